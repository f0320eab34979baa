//! Seeded random problem families.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::fixtures::{EXAMPLE4_ALPHA, EXAMPLE4_D_RANGE, EXAMPLE4_Z_RANGE};
use crate::matrix::ArrowheadMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    WellConditioned,
    HugeTip,
    Clustered,
    Cancellation,
    /// Log-uniform magnitudes over `10^[-10, 10]` with random signs.
    LogUniform,
    Example4,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::WellConditioned,
        Family::HugeTip,
        Family::Clustered,
        Family::Cancellation,
        Family::LogUniform,
        Family::Example4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::WellConditioned => "well-conditioned",
            Family::HugeTip => "huge-tip",
            Family::Clustered => "clustered",
            Family::Cancellation => "cancellation",
            Family::LogUniform => "log-uniform",
            Family::Example4 => "example4",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown family `{s}`")))
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo.log10()..=hi.log10()))
}

fn signed<R: Rng>(rng: &mut R, x: f64) -> f64 {
    if rng.gen_bool(0.5) {
        -x
    } else {
        x
    }
}

/// `n - 1` distinct values drawn by `draw`.
fn distinct<R: Rng>(rng: &mut R, m: usize, mut draw: impl FnMut(&mut R) -> f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(m);
    while out.len() < m {
        let x = draw(rng);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Tip that makes `b` at pole `i` equal to `-t`, rounded once from doubled precision.
pub fn planted_tip(d: &[f64], z: &[f64], i: usize, t: f64) -> f64 {
    let di = DoubleDouble::from_f64(d[i]);
    let mut s = di + DoubleDouble::square_f64(z[i]).mul_f64(t);
    for j in 0..d.len() {
        if j != i {
            s += DoubleDouble::square_f64(z[j]) / (DoubleDouble::from_f64(d[j]) - di);
        }
    }
    s.to_f64()
}

/// Random matrix of order `n` from `family`; deterministic in `(family, n, seed)`.
pub fn generate(family: Family, n: usize, seed: u64) -> Result<ArrowheadMatrix> {
    if n < 2 {
        return Err(Error::Input(format!("generator needs n >= 2, got {n}")));
    }
    let m = n - 1;
    let mut r = rng(seed);
    let (d, z, alpha) = match family {
        Family::WellConditioned => {
            let d = distinct(&mut r, m, |r| r.gen_range(-1.0..1.0));
            let z = (0..m).map(|_| r.gen_range(0.1..1.0)).collect();
            (d, z, r.gen_range(-1.0..1.0))
        }
        Family::HugeTip => {
            let d = distinct(&mut r, m, |r| {
                let x = log_uniform(r, 1e-7, 1e-3);
                signed(r, x)
            });
            let z = (0..m).map(|_| log_uniform(&mut r, 1e6, 1e7)).collect();
            (d, z, log_uniform(&mut r, 1e18, 1e20))
        }
        Family::Clustered => {
            let eps = f64::EPSILON;
            let mut steps: Vec<u32> = (1..=(4 * m as u32)).collect();
            steps.shuffle(&mut r);
            let d = steps[..m].iter().map(|&k| 1.0 + k as f64 * eps).collect();
            let z = (0..m).map(|_| r.gen_range(1.0..=m as f64)).collect();
            (d, z, 0.0)
        }
        Family::Cancellation => {
            let d = distinct(&mut r, m, |r| r.gen_range(1.0..100.0f64).round());
            let z: Vec<f64> = (0..m).map(|_| r.gen_range(0.5..2.0)).collect();
            let i = r.gen_range(0..m);
            let t = log_uniform(&mut r, 1e-12, 1e-4);
            let alpha = planted_tip(&d, &z, i, t);
            (d, z, alpha)
        }
        Family::LogUniform => log_uniform_entries(&mut r, m),
        Family::Example4 => {
            let (lo, hi) = EXAMPLE4_D_RANGE;
            let (zlo, zhi) = EXAMPLE4_Z_RANGE;
            let mut d = distinct(&mut r, m, |r| r.gen_range(lo..=hi));
            d.sort_by(|x, y| y.total_cmp(x));
            let z = (0..m).map(|_| log_uniform(&mut r, zlo, zhi)).collect();
            (d, z, EXAMPLE4_ALPHA)
        }
    };
    ArrowheadMatrix::new(d, z, alpha)
}

fn log_uniform_entries<R: Rng>(r: &mut R, m: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let mut draw = |r: &mut R| {
        let x = log_uniform(r, 1e-10, 1e10);
        signed(r, x)
    };
    let d = distinct(r, m, &mut draw);
    let z = (0..m).map(|_| draw(r)).collect();
    let alpha = draw(r);
    (d, z, alpha)
}

/// One instance of the randomized accuracy suite: log-uniform entries, with
/// roughly one instance in four planted to cancel in `b` at a random pole.
pub fn suite_instance(n: usize, seed: u64) -> Result<ArrowheadMatrix> {
    let mut r = rng(seed ^ 0x5_eed0_fa11);
    let m = n - 1;
    let (d, z, mut alpha) = log_uniform_entries(&mut r, m);
    if r.gen_bool(0.25) {
        let i = r.gen_range(0..m);
        let mut size = d[i].abs();
        for j in (0..m).filter(|&j| j != i) {
            size += z[j] * z[j] / (d[j] - d[i]).abs();
        }
        let t = log_uniform(&mut r, 1e-12, 1e-4) * size / (z[i] * z[i]);
        alpha = planted_tip(&d, &z, i, signed(&mut r, t));
    }
    ArrowheadMatrix::new(d, z, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::k_b;
    use crate::matrix::ArrowheadData;
    use crate::preprocess::reduce;

    #[test]
    fn deterministic() {
        for f in Family::ALL {
            let a = generate(f, 7, 3).unwrap();
            assert_eq!(a, generate(f, 7, 3).unwrap());
            assert_eq!(a.dim(), 7);
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!(generate(Family::Example4, 1, 0).is_err());
        assert!("nope".parse::<Family>().is_err());
    }

    #[test]
    fn example4_ranges() {
        let a = generate(Family::Example4, 50, 1).unwrap();
        assert!(a.d.iter().all(|&x| (5.87e14..=1.38e15).contains(&x)));
        assert!(a.z.iter().all(|&x| (1.05e4..=1.10e7).contains(&x)));
        assert_eq!(a.alpha, 9.7949881500060375e14);
    }

    #[test]
    fn planted_cancellation_is_ill_conditioned() {
        let a = generate(Family::Cancellation, 6, 11).unwrap();
        let o = reduce(&a, 0.0, 0.0).unwrap().reduced.unwrap();
        let worst = (0..o.poles()).map(|i| k_b(&o, i)).fold(0.0, f64::max);
        assert!(worst > 1e3, "{worst}");
    }
}
