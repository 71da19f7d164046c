//! Drift of the double-precision recursion against a double-double run.

use emden::discrete::Recursion;

/// Unevaluated sum hi + lo with |lo| <= ulp(hi) / 2.
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let u = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(u.hi, u.lo + t.lo)
    }

    fn mul_f64(self, b: f64) -> Dd {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        quick_two_sum(p, e + self.lo * b)
    }

    /// k / self for a double k.
    fn recip_scaled(self, k: f64) -> Dd {
        let q1 = k / self.hi;
        let r = Dd::from(k).add(self.mul_f64(-q1));
        let q2 = r.hi / self.hi;
        let r = r.add(self.mul_f64(-q2));
        let q3 = r.hi / self.hi;
        quick_two_sum(q1, q2).add(Dd::from(q3))
    }
}

fn max_drift(k: f64, n: u64) -> f64 {
    let (mut v, mut d) = (Dd::from(1.0), Dd::from(k));
    let mut worst = 0.0f64;
    let mut next_sample = 1000u64;
    for (j, vj, _) in Recursion::new(k).take(n as usize + 1) {
        if j == next_sample {
            worst = worst.max((vj - v.hi - v.lo).abs() / v.hi);
            next_sample *= 10;
        }
        v = v.add(d);
        d = d.add(v.recip_scaled(k));
    }
    worst
}

#[test]
fn double_double_arithmetic() {
    let x = Dd::from(3.0).recip_scaled(1.0);
    // 3 * (1/3) recovers 1 to about 1e-32
    let back = x.mul_f64(3.0).add(Dd::from(-1.0));
    assert!(back.hi.abs() < 1e-30);
}

#[test]
fn no_drift_through_hundred_million_steps() {
    std::thread::scope(|s| {
        let runs: Vec<_> = [0.1, 1.0]
            .map(|k| (k, s.spawn(move || max_drift(k, 100_000_000))))
            .into_iter()
            .collect();
        for (k, run) in runs {
            let drift = run.join().unwrap();
            println!("k={k}: max relative drift {drift:.3e}");
            assert!(drift < 1e-9, "k={k}: {drift}");
        }
    });
}
