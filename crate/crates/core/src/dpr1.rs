//! Diagonal-plus-rank-one matrices `diag(d) + rho u u^T`.

use crate::dd::{two_diff, DoubleDouble, ULP_UNIT};
use crate::error::{Error, Result};
use crate::matrix::{ArrowheadData, Side};
use crate::refine::{aheig, Diagnostics, RefineConfig};
use crate::solver::{normalize, BISECTION_CAP};

#[derive(Clone, Debug, PartialEq)]
pub struct Dpr1Matrix {
    pub d: Vec<f64>,
    pub u: Vec<f64>,
    pub rho: f64,
}

impl Dpr1Matrix {
    pub fn new(d: Vec<f64>, u: Vec<f64>, rho: f64) -> Result<Self> {
        if d.len() != u.len() {
            return Err(Error::Dimension { expected: d.len(), got: u.len() });
        }
        if d.is_empty() {
            return Err(Error::Input("empty DPR1 matrix".into()));
        }
        if !d.iter().chain(&u).all(|x| x.is_finite()) || !rho.is_finite() {
            return Err(Error::Input("DPR1 entries must be finite".into()));
        }
        Ok(Dpr1Matrix { d, u, rho })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = self.rho * self.u[i] * self.u[j];
            }
            m[i][i] += self.d[i];
        }
        m
    }

    /// `y = M x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let ux: f64 = self.u.iter().zip(x).map(|(a, b)| a * b).sum();
        self.d.iter().zip(&self.u).zip(x).map(|((d, u), xi)| d * xi + self.rho * u * ux).collect()
    }
}

/// Secular function `1 + rho * sum u_j^2 / (d_j - lam)`.
pub fn phi_eval(m: &Dpr1Matrix, lam: f64) -> Result<f64> {
    let mut s = 0.0;
    for (&d, &u) in m.d.iter().zip(&m.u) {
        if u == 0.0 {
            continue;
        }
        let den = d - lam;
        if den == 0.0 {
            return Err(Error::Pole(lam));
        }
        s += u * u / den;
    }
    Ok(1.0 + m.rho * s)
}

/// Relative condition of a root `lam` of `phi`: rounding in the sum over
/// `|lam| * |phi'(lam)|`.
pub fn phi_root_condition(m: &Dpr1Matrix, lam: f64) -> f64 {
    let mut mass = 1.0;
    let mut slope = 0.0;
    for (&d, &u) in m.d.iter().zip(&m.u) {
        let den = d - lam;
        if u == 0.0 || den == 0.0 {
            continue;
        }
        let t = m.rho * u * u / den;
        mass += t.abs();
        slope += t / den;
    }
    mass / (lam.abs() * slope.abs())
}

/// Leftmost or rightmost eigenvalue by bisection on `phi`.
pub fn dpr1_extreme(m: &Dpr1Matrix, side: Side) -> Result<f64> {
    if m.d.len() != m.u.len() || m.d.is_empty() {
        return Err(Error::Dimension { expected: m.d.len(), got: m.u.len() });
    }
    let mut active_d = Vec::new();
    let mut active_u2 = Vec::new();
    let mut inactive: Option<f64> = None;
    for (&d, &u) in m.d.iter().zip(&m.u) {
        if u == 0.0 || m.rho == 0.0 {
            inactive = Some(match (inactive, side) {
                (None, _) => d,
                (Some(x), Side::Right) => x.max(d),
                (Some(x), Side::Left) => x.min(d),
            });
        } else {
            active_d.push(d);
            active_u2.push(u * u);
        }
    }
    if active_d.is_empty() {
        return Ok(inactive.unwrap());
    }
    let norm2: f64 = active_u2.iter().sum();
    let spread = m.rho * norm2;
    if !spread.is_finite() {
        return Err(Error::Range("rho * |u|^2 overflows".into()));
    }
    let mut sorted = active_d.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let lo2 = sorted.get(1).copied().unwrap_or(f64::INFINITY);
    let hi2 = if sorted.len() > 1 { sorted[sorted.len() - 2] } else { f64::NEG_INFINITY };
    let (mut left, mut right) = match (m.rho > 0.0, side) {
        (true, Side::Right) => (hi, hi + spread),
        (true, Side::Left) => (lo, (lo + spread).min(lo2)),
        (false, Side::Right) => ((hi + spread).max(hi2), hi),
        (false, Side::Left) => (lo + spread, lo),
    };
    let increasing = m.rho > 0.0;
    let mut middle = (left + right) / 2.0;
    for _ in 0..BISECTION_CAP {
        let width = right - left;
        let done = if middle == 0.0 {
            width <= f64::MIN_POSITIVE
        } else {
            width / middle.abs() <= 2.0 * ULP_UNIT
        };
        if done {
            break;
        }
        let mut s = 0.0;
        for (&d, &q) in active_d.iter().zip(&active_u2) {
            s += q / (d - middle);
        }
        let phi = 1.0 + m.rho * s;
        if (phi > 0.0) == increasing {
            right = middle;
        } else {
            left = middle;
        }
        middle = (left + right) / 2.0;
    }
    Ok(match (inactive, side) {
        (Some(x), Side::Right) => right.max(x),
        (Some(x), Side::Left) => right.min(x),
        (None, _) => right,
    })
}

/// Arrowhead form of an ordered `D + u u^T` with positive `u`.
#[derive(Clone, Debug)]
struct Dpr1Arrowhead {
    d: Vec<f64>,
    zeta: Vec<f64>,
    zeta_sq: Vec<DoubleDouble>,
    tip: DoubleDouble,
}

impl ArrowheadData for Dpr1Arrowhead {
    fn poles(&self) -> usize {
        self.d.len()
    }

    fn pole(&self, j: usize) -> f64 {
        self.d[j]
    }

    fn coupling(&self, j: usize) -> f64 {
        self.zeta[j]
    }

    fn tip(&self) -> f64 {
        self.tip.to_f64()
    }

    fn coupling_sq_dd(&self, j: usize) -> DoubleDouble {
        self.zeta_sq[j]
    }

    fn tip_dd(&self) -> DoubleDouble {
        self.tip
    }
}

/// Eigenpair of `D + u u^T` together with the arrowhead diagnostics.
#[derive(Clone, Debug)]
pub struct Dpr1Pair {
    pub lambda: f64,
    pub q: Vec<f64>,
    pub diagnostics: Option<Diagnostics>,
}

/// Prepared `D + u u^T`: sorted, sign-normalized and reduced to arrowhead form.
#[derive(Clone, Debug)]
pub struct Dpr1Solver {
    n: usize,
    perm: Vec<usize>,
    signs: Vec<f64>,
    d: Vec<f64>,
    u: Vec<f64>,
    delta: Vec<f64>,
    arrow: Option<Dpr1Arrowhead>,
}

impl Dpr1Solver {
    pub fn new(m: &Dpr1Matrix) -> Result<Self> {
        if m.rho != 1.0 {
            return Err(Error::Unsupported(format!(
                "only D + u u^T is supported (rho = {}); D - u u^T has no arrowhead reduction",
                m.rho
            )));
        }
        let n = m.dim();
        if m.u.contains(&0.0) {
            return Err(Error::Input("DPR1 vector u must have no zero entries".into()));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| m.d[b].partial_cmp(&m.d[a]).unwrap());
        let d: Vec<f64> = perm.iter().map(|&p| m.d[p]).collect();
        if d.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input("DPR1 diagonal entries must be distinct".into()));
        }
        let signs: Vec<f64> = perm.iter().map(|&p| m.u[p].signum()).collect();
        let u: Vec<f64> = perm.iter().map(|&p| m.u[p].abs()).collect();
        if n == 1 {
            return Ok(Dpr1Solver { n, perm, signs, d, u, delta: vec![], arrow: None });
        }
        let dn = d[n - 1];
        let mut delta = Vec::with_capacity(n - 1);
        let mut zeta = Vec::with_capacity(n - 1);
        let mut zeta_sq = Vec::with_capacity(n - 1);
        let mut tip = DoubleDouble::from_f64(dn);
        for j in 0..n - 1 {
            let diff = two_diff(d[j], dn);
            let dd_delta = diff.sqrt();
            delta.push(dd_delta.to_f64());
            zeta.push(dd_delta.mul_f64(u[j]).to_f64());
            zeta_sq.push(DoubleDouble::square_f64(u[j]) * diff);
        }
        for &x in &u {
            tip += DoubleDouble::square_f64(x);
        }
        if !tip.is_finite() || zeta.iter().any(|z| !z.is_finite() || *z <= 0.0) {
            return Err(Error::Range("arrowhead entries of the DPR1 reduction overflow or underflow".into()));
        }
        let arrow = Dpr1Arrowhead { d: d[..n - 1].to_vec(), zeta, zeta_sq, tip };
        Ok(Dpr1Solver { n, perm, signs, d, u, delta, arrow: Some(arrow) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The k-th eigenpair (0-based, decreasing order).
    pub fn solve(&self, k: usize, cfg: &RefineConfig) -> Result<Dpr1Pair> {
        let n = self.n;
        if k >= n {
            return Err(Error::Input(format!("eigenvalue index {} out of range 1..={n}", k + 1)));
        }
        let Some(arrow) = &self.arrow else {
            let lambda = (DoubleDouble::from_f64(self.d[0]) + DoubleDouble::square_f64(self.u[0])).to_f64();
            return Ok(Dpr1Pair { lambda, q: vec![1.0], diagnostics: None });
        };
        let (pair, diag) = aheig(arrow, k, cfg)?;
        let v = &pair.vector;
        let un = self.u[n - 1];
        let vn = v[n - 1];
        let mut best: Option<(f64, f64, f64)> = None;
        for j in 0..n - 1 {
            let t1 = self.delta[j] * v[j] / un;
            let t2 = self.u[j] * vn / un;
            let den = t1 + t2;
            let mag = t1.abs() + t2.abs();
            if den == 0.0 || mag == 0.0 {
                continue;
            }
            let score = den.abs() / mag;
            let better = match best {
                None => true,
                Some((s, vj, _)) => score > s || (score == s && v[j].abs() > vj),
            };
            if better {
                let s2 = (un * v[j] / self.delta[j]) / den;
                best = Some((score, v[j].abs(), s2));
            }
        }
        let sigma2 = match best {
            Some((_, _, s2)) if s2.is_finite() && s2 > 0.0 => s2,
            _ => return Err(Error::Internal("no usable equation for sigma^2".into())),
        };
        let mut x: Vec<f64> = (0..n - 1).map(|j| un * v[j] / self.delta[j]).collect();
        x.push(sigma2 * vn);
        normalize(&mut x);
        let mut q = vec![0.0; n];
        for (t, &p) in self.perm.iter().enumerate() {
            q[p] = self.signs[t] * x[t];
        }
        Ok(Dpr1Pair { lambda: pair.lambda, q, diagnostics: Some(diag) })
    }
}

/// The k-th eigenpair of `D + u u^T` (0-based, decreasing order).
pub fn dpr1_eig(m: &Dpr1Matrix, k: usize, cfg: &RefineConfig) -> Result<Dpr1Pair> {
    Dpr1Solver::new(m)?.solve(k, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> Dpr1Matrix {
        Dpr1Matrix::new(vec![2.0, 1.0], vec![1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn phi_values() {
        let m = Dpr1Matrix::new(vec![0.0, 0.0], vec![3.0, 4.0], 1.0).unwrap();
        assert_eq!(phi_eval(&m, 25.0).unwrap(), 0.0);
        assert!(phi_eval(&m, 0.0).is_err());
        let z = Dpr1Matrix::new(vec![1.0], vec![1.0], 0.0).unwrap();
        assert_eq!(phi_eval(&z, 7.0).unwrap(), 1.0);
    }

    #[test]
    fn extremes() {
        let m = Dpr1Matrix::new(vec![0.0, 0.0], vec![3.0, 4.0], 1.0).unwrap();
        assert_eq!(dpr1_extreme(&m, Side::Right).unwrap(), 25.0);
        assert_eq!(dpr1_extreme(&m, Side::Left).unwrap(), 0.0);
        let r = dpr1_extreme(&golden(), Side::Right).unwrap();
        assert!((r - 3.618033988749895).abs() <= 2.0 * ULP_UNIT * r);
        let neg = Dpr1Matrix::new(vec![2.0, 1.0], vec![1.0, 1.0], -1.0).unwrap();
        let l = dpr1_extreme(&neg, Side::Left).unwrap();
        // eigenvalues of [[1,-1],[-1,0]]: (1 +- sqrt 5)/2
        assert!((l + 0.6180339887498949).abs() < 1e-15);
    }

    #[test]
    fn golden_pairs() {
        let cfg = RefineConfig::default();
        let p = dpr1_eig(&golden(), 0, &cfg).unwrap();
        assert!((p.lambda - 3.618033988749895).abs() <= ULP_UNIT * 4.0);
        let y = golden().apply(&p.q);
        for (a, b) in y.iter().zip(&p.q) {
            assert!((a - p.lambda * b).abs() < 1e-14);
        }
        let p = dpr1_eig(&golden(), 1, &cfg).unwrap();
        assert!((p.lambda - 1.381966011250105).abs() <= ULP_UNIT * 2.0);
    }

    #[test]
    fn rejects_unsupported_forms() {
        let cfg = RefineConfig::default();
        let m = Dpr1Matrix::new(vec![2.0, 1.0], vec![1.0, 1.0], -1.0).unwrap();
        assert!(matches!(dpr1_eig(&m, 0, &cfg), Err(Error::Unsupported(_))));
        let m = Dpr1Matrix::new(vec![1.0, 1.0], vec![1.0, 1.0], 1.0).unwrap();
        assert!(dpr1_eig(&m, 0, &cfg).is_err());
        let m = Dpr1Matrix::new(vec![2.0, 1.0], vec![0.0, 1.0], 1.0).unwrap();
        assert!(dpr1_eig(&m, 0, &cfg).is_err());
    }

    #[test]
    fn scalar_case() {
        let m = Dpr1Matrix::new(vec![3.0], vec![-2.0], 1.0).unwrap();
        let p = dpr1_eig(&m, 0, &RefineConfig::default()).unwrap();
        assert_eq!(p.lambda, 7.0);
        assert_eq!(p.q, vec![1.0]);
    }

    #[test]
    fn signs_and_order_fold_back() {
        let m = Dpr1Matrix::new(vec![1.0, 3.0, 2.0], vec![-0.5, 1.0, 2.0], 1.0).unwrap();
        let cfg = RefineConfig::default();
        for k in 0..3 {
            let p = dpr1_eig(&m, k, &cfg).unwrap();
            let y = m.apply(&p.q);
            for (a, b) in y.iter().zip(&p.q) {
                assert!((a - p.lambda * b).abs() < 1e-13, "k={k}");
            }
        }
    }
}
