//! Basic shift-and-invert eigensolver.
//!
//! The k-th eigenvalue is found as `lambda = d_i + 1/nu`, where `d_i` is a pole
//! adjacent to it and `nu` an extreme eigenvalue of `(A - d_i I)^{-1}`. The
//! inverse is again an arrowhead matrix after a symmetric permutation, so its
//! extreme eigenvalues come from the same bisection routine.

use crate::dd::{DoubleDouble, ULP_UNIT};
use crate::error::{Error, Result};
use crate::matrix::{ArrowheadData, Shift, Side};
use crate::refine;

/// Iteration cap for working-precision bisection: 4 * 53 + 10.
pub const BISECTION_CAP: usize = 222;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Working,
    Doubled,
}

/// Structured inverse of `A - d_i I`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedInverseRep {
    pub inv_d1: Vec<f64>,
    pub inv_d2: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub w_zeta: f64,
    pub b: f64,
    pub b_dd: Option<DoubleDouble>,
    pub shift_index: usize,
    pub shift_value: f64,
}

/// An arrowhead matrix given by plain vectors; used for the permuted inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct InverseView {
    pub d: Vec<f64>,
    pub z: Vec<f64>,
    pub alpha: f64,
}

impl ShiftedInverseRep {
    /// Diagonal `[invD1; 0; invD2]`, border `[w1; w_zeta; w2]`, tip `b`.
    pub fn view(&self) -> InverseView {
        let mut d = Vec::with_capacity(self.inv_d1.len() + self.inv_d2.len() + 1);
        d.extend_from_slice(&self.inv_d1);
        d.push(0.0);
        d.extend_from_slice(&self.inv_d2);
        let mut z = Vec::with_capacity(d.len());
        z.extend_from_slice(&self.w1);
        z.push(self.w_zeta);
        z.extend_from_slice(&self.w2);
        InverseView { d, z, alpha: self.b }
    }

    /// The inverse as a dense matrix in the original row order.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let i = self.shift_index;
        let n = self.inv_d1.len() + self.inv_d2.len() + 2;
        let mut m = vec![vec![0.0; n]; n];
        for (j, (&x, &w)) in self.inv_d1.iter().zip(&self.w1).enumerate() {
            m[j][j] = x;
            m[j][i] = w;
            m[i][j] = w;
        }
        for (t, (&x, &w)) in self.inv_d2.iter().zip(&self.w2).enumerate() {
            let j = i + 1 + t;
            m[j][j] = x;
            m[j][i] = w;
            m[i][j] = w;
        }
        m[i][i] = self.b;
        m[i][n - 1] = self.w_zeta;
        m[n - 1][i] = self.w_zeta;
        m
    }
}

/// Computed eigenpair together with its shifted representation.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    pub vector: Vec<f64>,
    /// Shift value; `lambda` is represented more accurately by `shift + mu`.
    pub shift: f64,
    /// Index of the pole used as shift, if any.
    pub shift_index: Option<usize>,
    pub mu: f64,
    pub nu: f64,
    pub side: Side,
}

impl EigenPair {
    /// `shift + mu` without rounding.
    pub fn lambda_dd(&self) -> DoubleDouble {
        crate::dd::two_sum(self.shift, self.mu)
    }
}

/// Pick function `f(lambda) = alpha - lambda - sum zeta_j^2 / (d_j - lambda)`,
/// accumulated in doubled precision and rounded once.
pub fn pick_eval<A: ArrowheadData + ?Sized>(a: &A, lam: f64) -> Result<f64> {
    if (0..a.poles()).any(|j| a.pole(j) == lam) {
        return Err(Error::Pole(lam));
    }
    Ok((-refine::secular_split(a, Shift::Value(lam)).value()).to_f64())
}

/// Pick function in working precision.
pub fn pick_eval_working<A: ArrowheadData + ?Sized>(a: &A, lam: f64) -> Result<f64> {
    let mut s = 0.0;
    for j in 0..a.poles() {
        let den = a.pole(j) - lam;
        if den == 0.0 {
            return Err(Error::Pole(lam));
        }
        let z = a.coupling(j);
        s += z * z / den;
    }
    Ok((a.tip() - lam) - s)
}

/// Inverse of `A - d_i I` as a permuted arrowhead.
pub fn shifted_inverse<A: ArrowheadData + ?Sized>(
    a: &A,
    i: usize,
    precision: Precision,
) -> ShiftedInverseRep {
    let m = a.poles();
    assert!(i < m, "shift index {i} out of range");
    let shift = Shift::Pole(i);
    let zi = a.coupling(i);
    let mut inv_d1 = Vec::with_capacity(i);
    let mut w1 = Vec::with_capacity(i);
    let mut inv_d2 = Vec::with_capacity(m - i - 1);
    let mut w2 = Vec::with_capacity(m - i - 1);
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for j in 0..m {
        if j == i {
            continue;
        }
        let dj = a.offset(j, shift);
        let zj = a.coupling(j);
        let w = -zj / dj / zi;
        let t = zj * zj / dj;
        if j < i {
            inv_d1.push(1.0 / dj);
            w1.push(w);
            s1 += t;
        } else {
            inv_d2.push(1.0 / dj);
            w2.push(w);
            s2 += t;
        }
    }
    let neg_a = -a.tip_offset(shift);
    let (b, b_dd) = match precision {
        Precision::Working => (((neg_a + s1) + s2) / (zi * zi), None),
        Precision::Doubled => match refine::b_doubled(a, i) {
            Ok(x) => (x.hi(), Some(x)),
            Err(_) => (0.0, Some(DoubleDouble::ZERO)),
        },
    };
    ShiftedInverseRep {
        inv_d1,
        inv_d2,
        w1,
        w2,
        w_zeta: 1.0 / zi,
        b,
        b_dd,
        shift_index: i,
        shift_value: a.pole(i),
    }
}

/// Sum of magnitudes with Neumaier compensation.
pub fn norm1_compensated(z: &[f64]) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for &x in z {
        let x = x.abs();
        let t = s + x;
        if s >= x {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// Bisection for the leftmost or rightmost eigenvalue of an
/// arrowhead matrix. Poles need not be ordered and zero couplings are allowed.
pub fn bisect_extreme(d: &[f64], z: &[f64], alpha: f64, side: Side) -> Result<f64> {
    if d.len() != z.len() {
        return Err(Error::Dimension { expected: d.len(), got: z.len() });
    }
    if !alpha.is_finite() || !d.iter().chain(z).all(|x| x.is_finite()) {
        return Err(Error::Input("bisection input must be finite".into()));
    }
    if d.is_empty() {
        return Ok(alpha);
    }
    let z1 = norm1_compensated(z);
    if !(alpha.abs() + z1).is_finite() {
        return Err(Error::Range("tip plus border norm overflows".into()));
    }
    let (mut left, mut right) = match side {
        Side::Left => {
            let mut l = alpha - z1;
            let mut r = f64::INFINITY;
            for (&dj, &zj) in d.iter().zip(z) {
                l = l.min(dj - zj.abs());
                r = r.min(dj);
            }
            (l, r)
        }
        Side::Right => {
            let mut l = f64::NEG_INFINITY;
            let mut r = alpha + z1;
            for (&dj, &zj) in d.iter().zip(z) {
                l = l.max(dj);
                r = r.max(dj + zj.abs());
            }
            (l, r)
        }
    };
    if !(left.is_finite() && right.is_finite()) {
        return Err(Error::Range("initial bisection interval overflows".into()));
    }
    let z2: Vec<f64> = z.iter().map(|x| x * x).collect();
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
        for (&dj, &q) in d.iter().zip(&z2) {
            if q != 0.0 {
                s += q / (dj - middle);
            }
        }
        let f = (alpha - middle) - s;
        if f > 0.0 {
            left = middle;
        } else {
            right = middle;
        }
        middle = (left + right) / 2.0;
    }
    Ok(right)
}

/// Bisection on the permuted-arrowhead form of a shifted inverse.
pub fn bisect_view(v: &InverseView, side: Side) -> Result<f64> {
    bisect_extreme(&v.d, &v.z, v.alpha, side)
}

/// Divides by the Euclidean norm, scaled against overflow.
pub fn normalize(x: &mut [f64]) {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return;
    }
    let mut s = 0.0;
    for v in x.iter() {
        let t = v / scale;
        s += t * t;
    }
    let norm = s.sqrt() * scale;
    for v in x.iter_mut() {
        *v /= norm;
    }
}

/// Eigenvector `x = [z ./ (d - lambda); -1]`, normalized.
pub fn eigvec(d: &[f64], z: &[f64], lam: f64) -> Result<Vec<f64>> {
    if d.len() != z.len() {
        return Err(Error::Dimension { expected: d.len(), got: z.len() });
    }
    let mut x = Vec::with_capacity(d.len() + 1);
    for (&dj, &zj) in d.iter().zip(z) {
        let den = dj - lam;
        if den == 0.0 {
            return Err(Error::Pole(lam));
        }
        x.push(zj / den);
    }
    x.push(-1.0);
    normalize(&mut x);
    Ok(x)
}

/// Unnormalized eigenvector from a shifted representation `lambda = shift + mu`.
pub fn unnormalized_vector<A: ArrowheadData + ?Sized>(a: &A, shift: Shift, mu: f64) -> Vec<f64> {
    let m = a.poles();
    let mut x = Vec::with_capacity(m + 1);
    for j in 0..m {
        x.push(a.coupling(j) / (a.offset(j, shift) - mu));
    }
    x.push(-1.0);
    x
}

/// Shift selection. `k` is the 0-based eigenvalue index in
/// decreasing order; returns the pole index and the side of that pole.
pub fn choose_shift<A: ArrowheadData + ?Sized>(a: &A, k: usize) -> (usize, Side) {
    let n = a.dim();
    assert!(k < n, "eigenvalue index {k} out of range");
    if k == 0 {
        return (0, Side::Right);
    }
    if k == n - 1 {
        return (n - 2, Side::Left);
    }
    let shift = Shift::Pole(k);
    let atemp = a.tip_offset(shift);
    let middle = a.offset(k - 1, shift) / 2.0;
    let mut s = 0.0;
    for j in 0..a.poles() {
        let z = a.coupling(j);
        s += z * z / (a.offset(j, shift) - middle);
    }
    let fmiddle = atemp - middle - s;
    if fmiddle < 0.0 {
        (k, Side::Right)
    } else {
        (k - 1, Side::Left)
    }
}

/// Result of solving at a fixed pole, kept so that callers can reuse the inverse.
#[derive(Clone, Debug)]
pub struct PoleSolution {
    pub pair: EigenPair,
    pub rep: ShiftedInverseRep,
    pub view: InverseView,
}

/// Solves for the eigenvalue on `side` of pole `i`.
pub fn solve_at_pole<A: ArrowheadData + ?Sized>(
    a: &A,
    i: usize,
    side: Side,
    precision: Precision,
) -> Result<PoleSolution> {
    let rep = shifted_inverse(a, i, precision);
    let view = rep.view();
    let nu = bisect_view(&view, side)?;
    let mu = 1.0 / nu;
    let shift = Shift::Pole(i);
    let mut vector = unnormalized_vector(a, shift, mu);
    normalize(&mut vector);
    let sigma = a.pole(i);
    let pair = EigenPair { lambda: mu + sigma, vector, shift: sigma, shift_index: Some(i), mu, nu, side };
    Ok(PoleSolution { pair, rep, view })
}

/// The k-th eigenpair in working precision.
pub fn aheig_basic<A: ArrowheadData + ?Sized>(a: &A, k: usize) -> Result<EigenPair> {
    if k >= a.dim() {
        return Err(Error::Input(format!("eigenvalue index {} out of range 1..={}", k + 1, a.dim())));
    }
    let (i, side) = choose_shift(a, k);
    Ok(solve_at_pole(a, i, side, Precision::Working)?.pair)
}

/// Open interval `(lower, upper)` that contains the k-th eigenvalue.
pub fn interlacing_interval<A: ArrowheadData + ?Sized>(a: &A, k: usize) -> (f64, f64) {
    let n = a.dim();
    let upper = if k == 0 { f64::INFINITY } else { a.pole(k - 1) };
    let lower = if k == n - 1 { f64::NEG_INFINITY } else { a.pole(k) };
    (lower, upper)
}

/// Whether `shift + mu` lies strictly inside the k-th interlacing interval,
/// compared without rounding the sum.
pub fn in_interval<A: ArrowheadData + ?Sized>(a: &A, k: usize, value: DoubleDouble) -> bool {
    let n = a.dim();
    let above = k == n - 1 || value > a.pole_dd(k);
    let below = k == 0 || value < a.pole_dd(k - 1);
    above && below
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::OrderedArrowhead;

    fn exchange() -> OrderedArrowhead {
        OrderedArrowhead::new(vec![0.0], vec![1.0], 0.0).unwrap()
    }

    #[test]
    fn pick_on_exchange_matrix() {
        let a = exchange();
        assert_eq!(pick_eval(&a, 1.0).unwrap(), 0.0);
        assert_eq!(pick_eval(&a, -1.0).unwrap(), 0.0);
        assert!(matches!(pick_eval(&a, 0.0), Err(Error::Pole(_))));
    }

    #[test]
    fn pick_example3_at_zero() {
        let a = OrderedArrowhead::new(vec![1e10, 4.0, 3.0, 2.0, 1.0], vec![1e10, 1.0, 1.0, 1.0, 1.0], 1e10)
            .unwrap();
        let f = pick_eval(&a, 0.0).unwrap();
        assert!((f + 25.0 / 12.0).abs() <= ULP_UNIT * 25.0 / 12.0, "{f}");
        let g = pick_eval_working(&a, 0.0).unwrap();
        assert!((g + 25.0 / 12.0).abs() > 1e-8);
    }

    #[test]
    fn inverse_2x2() {
        let a = OrderedArrowhead::new(vec![5.0], vec![2.0], 1.0).unwrap();
        let r = shifted_inverse(&a, 0, Precision::Working);
        assert_eq!(r.w_zeta, 0.5);
        assert_eq!(r.b, 1.0);
        assert_eq!(r.to_dense(), vec![vec![1.0, 0.5], vec![0.5, 0.0]]);
        let r = shifted_inverse(&a, 0, Precision::Doubled);
        assert_eq!(r.b, 1.0);
    }

    #[test]
    fn bisection_on_exchange() {
        assert_eq!(bisect_extreme(&[0.0], &[1.0], 0.0, Side::Right).unwrap(), 1.0);
        // the returned right end sits within two ulps above -1
        let l = bisect_extreme(&[0.0], &[1.0], 0.0, Side::Left).unwrap();
        assert!(l > -1.0 && l + 1.0 <= 2.0 * ULP_UNIT, "{l}");
        assert!(bisect_extreme(&[0.0], &[f64::NAN], 0.0, Side::Left).is_err());
        assert!(bisect_extreme(&[f64::MAX], &[f64::MAX], f64::MAX, Side::Right).is_err());
        assert_eq!(bisect_extreme(&[], &[], 3.0, Side::Right).unwrap(), 3.0);
    }

    #[test]
    fn exchange_eigvec() {
        let v = eigvec(&[0.0], &[1.0], 1.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] + h).abs() <= 2e-16 && (v[1] + h).abs() <= 2e-16);
        assert!(eigvec(&[0.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn shift_choice() {
        let a = OrderedArrowhead::new(vec![1e10, 4.0, 3.0, 2.0, 1.0], vec![1e10, 1.0, 1.0, 1.0, 1.0], 1e10)
            .unwrap();
        assert_eq!(choose_shift(&a, 0), (0, Side::Right));
        assert_eq!(choose_shift(&a, 5), (4, Side::Left));
    }

    #[test]
    fn basic_exchange_pair() {
        let p = aheig_basic(&exchange(), 0).unwrap();
        assert_eq!(p.lambda, 1.0);
        assert!((p.vector[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(aheig_basic(&exchange(), 2).is_err());
    }
}
