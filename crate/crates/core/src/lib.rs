//! The Emden-Fowler equation f'' = k/f on a line and its discrete analog
//! V_{j+1} - 2V_j + V_{j-1} = k/V_j: closed-form solutions, the shooting
//! slope, the critical coefficient k_c and the recursion asymptotics.

// Rule nodes and oracle values are quoted at full published precision.
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod continuous;
pub mod critical;
pub mod discrete;
pub mod error;
pub mod quadrature;
mod roots;
pub mod shooting;

pub use error::{Error, Result};
