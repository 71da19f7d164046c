use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} is outside the domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{what}: exp({arg}^2) is not representable in double precision")]
    Overflow { what: &'static str, arg: f64 },

    #[error("{what}: no convergence after {iterations} iterations (last estimate {estimate})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
    },

    #[error("{what}: root is not bracketed by [{lo}, {hi}]")]
    Bracket { what: &'static str, lo: f64, hi: f64 },

    #[error("{what}: requested size {requested} exceeds the limit {limit}")]
    SizeLimit {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    #[error("{what}: index {index} outside {lo}..={hi}")]
    Index {
        what: &'static str,
        index: usize,
        lo: usize,
        hi: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_domain(ok: bool, what: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain { what, value, expected })
    }
}
