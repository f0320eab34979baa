//! Doubled-precision reference eigenvalues, residual metrics and the
//! perturbation bounds used to judge computed eigenpairs.

use rayon::prelude::*;

use crate::dd::{DoubleDouble, ULP_UNIT};
use crate::error::{Error, Result};
use crate::matrix::{ArrowheadData, Shift};
use crate::refine::Diagnostics;

pub const ORACLE_CAP: usize = 64;
pub const ORACLE_ITERATIONS: usize = 260;

/// Relative bracket width at which the oracle stops, `8 eps^2`.
pub fn oracle_width() -> f64 {
    8.0 * ULP_UNIT * ULP_UNIT
}

/// Secular function `alpha - x - sum zeta_j^2 / (d_j - x)` in doubled precision.
pub fn secular_dd<A: ArrowheadData + ?Sized>(a: &A, x: DoubleDouble) -> DoubleDouble {
    let mut s = a.tip_dd() - x;
    for j in 0..a.poles() {
        s -= a.coupling_sq_dd(j) / (a.pole_dd(j) - x);
    }
    s
}

fn coupling_dd<A: ArrowheadData + ?Sized>(a: &A, j: usize) -> DoubleDouble {
    a.coupling_sq_dd(j).sqrt()
}

fn bisect_dd<A: ArrowheadData + ?Sized>(a: &A, mut lo: DoubleDouble, mut hi: DoubleDouble) -> Result<DoubleDouble> {
    let tol = oracle_width();
    for _ in 0..ORACLE_ITERATIONS {
        let mid = (lo + hi).mul_pow2(0.5);
        if (hi - lo).to_f64() <= tol * mid.abs().to_f64() {
            return Ok(mid);
        }
        if mid == lo || mid == hi {
            return Ok(mid);
        }
        let f = secular_dd(a, mid);
        if f.is_zero() {
            return Ok(mid);
        }
        if f.is_sign_negative() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::OracleUnavailable(format!(
        "bisection did not reach relative width {tol:e} in {ORACLE_ITERATIONS} steps"
    )))
}

/// Exterior brackets `[max d, R]` and `[L, min d]` from the Gershgorin bound,
/// widened until the secular function changes sign.
fn exterior<A: ArrowheadData + ?Sized>(a: &A) -> ((DoubleDouble, DoubleDouble), (DoubleDouble, DoubleDouble)) {
    let m = a.poles();
    let mut z1 = DoubleDouble::ZERO;
    let mut right = a.pole_dd(0);
    let mut left = a.pole_dd(m - 1);
    for j in 0..m {
        let c = coupling_dd(a, j);
        z1 += c;
        let dj = a.pole_dd(j);
        if dj + c > right {
            right = dj + c;
        }
        if dj - c < left {
            left = dj - c;
        }
    }
    let tip = a.tip_dd();
    if tip + z1 > right {
        right = tip + z1;
    }
    if tip - z1 < left {
        left = tip - z1;
    }
    let (top, bottom) = (a.pole_dd(0), a.pole_dd(m - 1));
    while !secular_dd(a, right).is_sign_negative() && !secular_dd(a, right).is_zero() {
        right = right + (right - top) + DoubleDouble::from_f64(f64::MIN_POSITIVE);
    }
    while secular_dd(a, left).is_sign_negative() {
        left = left - (bottom - left) - DoubleDouble::from_f64(f64::MIN_POSITIVE);
    }
    ((top, right), (left, bottom))
}

/// Eigenvalue bracketed relative to itself, and again as `d_pole + mu` with
/// `mu` bracketed relative to itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleRoot {
    pub lambda: DoubleDouble,
    pub pole: usize,
    pub mu: DoubleDouble,
}

/// All eigenvalues in decreasing order, each bracketed by bisection on the
/// secular function in doubled precision over its interlacing interval.
pub fn oracle_eig<A: ArrowheadData + ?Sized>(a: &A) -> Result<Vec<DoubleDouble>> {
    Ok(oracle_roots(a)?.into_iter().map(|r| r.lambda).collect())
}

pub fn oracle_eig_capped<A: ArrowheadData + ?Sized>(a: &A, cap: usize) -> Result<Vec<DoubleDouble>> {
    Ok(oracle_roots_capped(a, cap)?.into_iter().map(|r| r.lambda).collect())
}

pub fn oracle_roots<A: ArrowheadData + ?Sized>(a: &A) -> Result<Vec<OracleRoot>> {
    oracle_roots_capped(a, ORACLE_CAP)
}

/// `f(d_i + mu)` with every offset formed in doubled precision.
fn shifted_secular<A: ArrowheadData + ?Sized>(a: &A, i: usize, mu: DoubleDouble) -> DoubleDouble {
    let s = Shift::Pole(i);
    let mut f = a.tip_offset_dd(s) - mu;
    for j in 0..a.poles() {
        f -= a.coupling_sq_dd(j) / (a.offset_dd(j, s) - mu);
    }
    f
}

fn bisect_shifted<A: ArrowheadData + ?Sized>(
    a: &A,
    i: usize,
    mut lo: DoubleDouble,
    mut hi: DoubleDouble,
) -> Result<DoubleDouble> {
    let tol = oracle_width();
    for _ in 0..ORACLE_ITERATIONS {
        let mid = (lo + hi).mul_pow2(0.5);
        if (hi - lo).to_f64() <= tol * mid.abs().to_f64() || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f = shifted_secular(a, i, mid);
        if f.is_zero() {
            return Ok(mid);
        }
        if f.is_sign_negative() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::OracleUnavailable(format!(
        "shifted bisection did not reach relative width {tol:e} in {ORACLE_ITERATIONS} steps"
    )))
}

fn dd_max(x: DoubleDouble, y: DoubleDouble) -> DoubleDouble {
    if x >= y {
        x
    } else {
        y
    }
}

/// Refines `lambda` relative to its nearest bracketing pole.
fn refine_root<A: ArrowheadData + ?Sized>(
    a: &A,
    k: usize,
    (lo, hi): (DoubleDouble, DoubleDouble),
    lambda: DoubleDouble,
) -> Result<OracleRoot> {
    let m = a.poles();
    let below = if k < m { Some(k) } else { None };
    let above = if k > 0 { Some(k - 1) } else { None };
    let pole = match (below, above) {
        (Some(b), Some(t)) => {
            if (lambda - a.pole_dd(b)) <= (a.pole_dd(t) - lambda) {
                b
            } else {
                t
            }
        }
        (Some(b), None) => b,
        (None, Some(t)) => t,
        (None, None) => unreachable!("at least one pole"),
    };
    let p = a.pole_dd(pole);
    let (mut mlo, mut mhi) = (lo - p, hi - p);
    if pole == k {
        mlo = DoubleDouble::ZERO;
    } else {
        mhi = DoubleDouble::ZERO;
    }
    // Seed from the unshifted bracket when it still straddles the root.
    let w = dd_max(lambda.abs().mul_f64(4.0 * oracle_width()), DoubleDouble::from_f64(f64::MIN_POSITIVE));
    let (slo, shi) = (dd_max(lambda - p - w, mlo), -dd_max(-(lambda - p + w), -mhi));
    let good = |x: DoubleDouble, positive: bool| {
        x == mlo || x == mhi || {
            let f = shifted_secular(a, pole, x);
            f.is_zero() || f.is_sign_negative() != positive
        }
    };
    if good(slo, true) && good(shi, false) {
        mlo = slo;
        mhi = shi;
    }
    let mu = bisect_shifted(a, pole, mlo, mhi)?;
    Ok(OracleRoot { lambda, pole, mu })
}

pub fn oracle_roots_capped<A: ArrowheadData + ?Sized>(a: &A, cap: usize) -> Result<Vec<OracleRoot>> {
    let n = a.dim();
    if n > cap {
        return Err(Error::OracleUnavailable(format!("size {n} exceeds oracle cap {cap}")));
    }
    if n < 2 {
        return Err(Error::Input("oracle needs at least one pole".into()));
    }
    let (top, bottom) = exterior(a);
    (0..n)
        .into_par_iter()
        .map(|k| {
            let bracket = if k == 0 {
                top
            } else if k == n - 1 {
                bottom
            } else {
                (a.pole_dd(k), a.pole_dd(k - 1))
            };
            let lambda = bisect_dd(a, bracket.0, bracket.1)?;
            refine_root(a, k, bracket, lambda)
        })
        .collect()
}

/// Eigenvector `[zeta ./ (d - lambda); -1]` with the offsets taken from the
/// shifted representation, in doubled precision, not normalized.
pub fn oracle_root_vector<A: ArrowheadData + ?Sized>(a: &A, root: &OracleRoot) -> Vec<DoubleDouble> {
    let s = Shift::Pole(root.pole);
    let mut x: Vec<DoubleDouble> =
        (0..a.poles()).map(|j| coupling_dd(a, j) / (a.offset_dd(j, s) - root.mu)).collect();
    x.push(-DoubleDouble::ONE);
    x
}

/// Eigenvector `[zeta ./ (d - lambda); -1]` in doubled precision, not normalized.
pub fn oracle_vector<A: ArrowheadData + ?Sized>(a: &A, lambda: DoubleDouble) -> Vec<DoubleDouble> {
    let mut x: Vec<DoubleDouble> = (0..a.poles()).map(|j| coupling_dd(a, j) / (a.pole_dd(j) - lambda)).collect();
    x.push(-DoubleDouble::ONE);
    x
}

/// Unit eigenvector rounded to working precision.
pub fn oracle_unit_vector<A: ArrowheadData + ?Sized>(a: &A, root: &OracleRoot) -> Vec<f64> {
    let x = oracle_root_vector(a, root);
    let scale = x.iter().fold(0.0f64, |s, v| s.max(v.abs().to_f64()));
    let mut norm = DoubleDouble::ZERO;
    for v in &x {
        norm += (*v / DoubleDouble::from_f64(scale)).square();
    }
    let norm = norm.sqrt().mul_f64(scale);
    x.iter().map(|v| (*v / norm).to_f64()).collect()
}

/// Relative error `|x - ref| / |ref|`, with exact zero for equal values.
pub fn relative_error(x: DoubleDouble, reference: DoubleDouble) -> f64 {
    let diff = x - reference;
    if diff.is_zero() {
        0.0
    } else {
        (diff / reference).abs().to_f64()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub max_orthogonality_defect: f64,
    pub interlacing_ok: bool,
}

/// Residuals relative to `max |lambda|`, `max |V^T V - I|` and strict
/// interlacing of the eigenvalues (in decreasing order) with the poles.
pub fn residual_report<A: ArrowheadData + ?Sized>(
    a: &A,
    lambdas: &[DoubleDouble],
    vectors: &[Vec<f64>],
) -> Result<ResidualReport> {
    let n = a.dim();
    if lambdas.len() != n || vectors.len() != n {
        return Err(Error::Dimension { expected: n, got: lambdas.len().min(vectors.len()) });
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(Error::Dimension { expected: n, got: v.len() });
    }
    let m = a.poles();
    let norm = lambdas.iter().fold(0.0f64, |s, l| s.max(l.abs().to_f64()));
    let max_residual = lambdas
        .par_iter()
        .zip(vectors)
        .map(|(lam, v)| {
            let lam = lam.to_f64();
            let mut r2 = 0.0;
            let mut last = a.tip() * v[m];
            for j in 0..m {
                let r = a.pole(j) * v[j] + a.coupling(j) * v[m] - lam * v[j];
                r2 += r * r;
                last += a.coupling(j) * v[j];
            }
            let r = last - lam * v[m];
            (r2 + r * r).sqrt()
        })
        .reduce(|| 0.0, f64::max)
        / if norm == 0.0 { 1.0 } else { norm };
    let max_orthogonality_defect = orthogonality_defect(vectors);
    let mut interlacing_ok = lambdas.windows(2).all(|w| w[0] > w[1]);
    for j in 0..m {
        let d = a.pole_dd(j);
        interlacing_ok &= lambdas[j] > d && d > lambdas[j + 1];
    }
    Ok(ResidualReport { max_residual, max_orthogonality_defect, interlacing_ok })
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (xc, yc) = (x.chunks_exact(8), y.chunks_exact(8));
    let tail: f64 = xc.remainder().iter().zip(yc.remainder()).map(|(a, b)| a * b).sum();
    for (a, b) in xc.zip(yc) {
        for t in 0..8 {
            acc[t] += a[t] * b[t];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// `max |V^T V - I|` over all entries.
pub fn orthogonality_defect(vectors: &[Vec<f64>]) -> f64 {
    const BLOCK: usize = 16;
    let n = vectors.len();
    (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let rows = b * BLOCK..(b * BLOCK + BLOCK).min(n);
            let mut worst = 0.0f64;
            for (j, vj) in vectors.iter().enumerate().skip(rows.start) {
                for i in rows.clone().take_while(|&i| i <= j) {
                    let p = dot(&vectors[i], vj);
                    let e = if i == j { (p - 1.0).abs() } else { p.abs() };
                    worst = worst.max(e);
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Perturbation bounds, in units of `eps` except `eigvec_component_bound`,
/// which is an absolute relative error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceModel {
    pub kappa_bis_bound: f64,
    pub kappa_b_bound: f64,
    pub kappa_nu_bound: f64,
    pub kappa_mu_bound: f64,
    pub kappa_lambda_bound: f64,
    pub eigvec_component_bound: f64,
}

pub fn tolerance_bounds(n: usize, k_b: f64, zeta_ratio: f64) -> ToleranceModel {
    let nf = n as f64;
    let rn = nf.sqrt();
    let kappa_bis_bound = 1.06 * nf * (rn + 1.0);
    let kappa_b_bound = (nf + 3.0) * k_b;
    let kappa_nu_bound = ((nf + 3.0) * rn * k_b).min(3.0 * rn + (nf + 3.0) * (1.0 + 2.0 * zeta_ratio));
    let kappa_mu_bound = kappa_nu_bound + kappa_bis_bound + 1.0;
    let kappa_lambda_bound = 3.0 * (kappa_nu_bound + kappa_bis_bound) + 4.0;
    let eigvec_component_bound = 3.0 * (kappa_mu_bound + 3.0) * ULP_UNIT;
    ToleranceModel {
        kappa_bis_bound,
        kappa_b_bound,
        kappa_nu_bound,
        kappa_mu_bound,
        kappa_lambda_bound,
        eigvec_component_bound,
    }
}

impl ToleranceModel {
    /// Bounds for a computed pair. `K_b` is taken as seen by the precision `b`
    /// was evaluated in. The `zeta_ratio` branch only applies to pole shifts,
    /// and the bisection term is scaled by `K_nu` since the bisection bound
    /// holds for the absolutely largest eigenvalue of the inverse.
    pub fn for_diagnostics(n: usize, diag: &Diagnostics) -> ToleranceModel {
        let zr = if diag.pole_shift { diag.zeta_ratio } else { f64::INFINITY };
        let t = tolerance_bounds(n, diag.k_b_effective.max(1.0), zr);
        let bis = t.kappa_bis_bound * diag.k_nu.max(1.0);
        let kappa_mu_bound = t.kappa_nu_bound + bis + 1.0;
        ToleranceModel {
            kappa_bis_bound: bis,
            kappa_mu_bound,
            kappa_lambda_bound: 3.0 * (t.kappa_nu_bound + bis) + 4.0,
            eigvec_component_bound: 3.0 * (kappa_mu_bound + 3.0) * ULP_UNIT,
            ..t
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::two_sum;
    use crate::fixtures;
    use crate::matrix::OrderedArrowhead;

    #[test]
    fn exchange_oracle() {
        let l = oracle_eig(&fixtures::exchange()).unwrap();
        assert!((l[0] - DoubleDouble::ONE).abs().to_f64() <= 8.0 * ULP_UNIT * ULP_UNIT);
        assert!((l[1] + DoubleDouble::ONE).abs().to_f64() <= 8.0 * ULP_UNIT * ULP_UNIT);
    }

    #[test]
    fn example2_second_eigenvalue() {
        let l = oracle_eig(&fixtures::example2()).unwrap();
        let want = DoubleDouble::from_decimal_str("1.0000000000000008727792604471857").unwrap();
        assert!(relative_error(l[1], want) < 1e-30);
    }

    #[test]
    fn example3_last_eigenvalue() {
        let l = oracle_eig(&fixtures::example3()).unwrap();
        assert_eq!(l[5].to_f64(), -7.160346250991725e-1);
    }

    #[test]
    fn cap_is_enforced() {
        let n = 70;
        let d: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
        let a = OrderedArrowhead::new(d, vec![1.0; n], 0.0).unwrap();
        assert!(matches!(oracle_eig(&a), Err(Error::OracleUnavailable(_))));
        assert_eq!(oracle_eig_capped(&a, 100).unwrap().len(), n + 1);
    }

    #[test]
    fn exact_pairs_have_no_residual() {
        let a = fixtures::exchange();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let l = [DoubleDouble::ONE, -DoubleDouble::ONE];
        let v = [vec![s, s], vec![s, -s]];
        let r = residual_report(&a, &l, &v).unwrap();
        assert_eq!(r.max_residual, 0.0);
        assert!(r.max_orthogonality_defect <= ULP_UNIT);
        assert!(r.interlacing_ok);
    }

    #[test]
    fn perturbed_eigenvalue_is_flagged() {
        let a = fixtures::example3();
        let roots = oracle_roots(&a).unwrap();
        let l: Vec<DoubleDouble> = roots.iter().map(|r| r.lambda).collect();
        let v: Vec<Vec<f64>> = roots.iter().map(|r| oracle_unit_vector(&a, r)).collect();
        let good = residual_report(&a, &l, &v).unwrap();
        assert!(good.max_residual < 1e-15 && good.interlacing_ok, "{good:?}");
        let mut bad = l.clone();
        bad[0] = bad[0].mul_f64(1.0 + 1e-8);
        assert!(residual_report(&a, &bad, &v).unwrap().max_residual > 1e-9);
        bad[0] = l[0];
        bad[1] = two_sum(3.5, 0.0);
        assert!(!residual_report(&a, &bad, &v).unwrap().interlacing_ok);
    }

    #[test]
    fn bound_arithmetic() {
        let t = tolerance_bounds(6, 1.0, 0.0);
        assert!((t.kappa_bis_bound - 1.06 * 6.0 * (6f64.sqrt() + 1.0)).abs() < 1e-12);
        assert!((t.kappa_bis_bound - 21.938).abs() < 1e-3);
        assert_eq!(t.kappa_b_bound, 9.0);
        let t = tolerance_bounds(2, 1.0, 0.0);
        assert!((t.kappa_nu_bound - 5.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((t.kappa_nu_bound - 7.071).abs() < 1e-3);
        assert_eq!(t.kappa_mu_bound, t.kappa_nu_bound + t.kappa_bis_bound + 1.0);
        assert_eq!(t.kappa_lambda_bound, 3.0 * (t.kappa_nu_bound + t.kappa_bis_bound) + 4.0);
        let big = tolerance_bounds(7, 1e6, 5.0);
        assert!(big.kappa_lambda_bound > tolerance_bounds(6, 1.0, 0.0).kappa_lambda_bound);
    }
}
