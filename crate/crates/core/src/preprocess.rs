//! Reduction of a general symmetric arrowhead matrix to ordered irreducible form.

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::matrix::{ArrowheadMatrix, Extended, OrderedArrowhead};

/// Plane rotation acting on coordinates `p` and `q` of the original matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Givens {
    pub p: usize,
    pub q: usize,
    pub c: f64,
    pub s: f64,
}

/// Eigenpair split off during reduction. `coord` is the unit coordinate in the
/// rotated basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Deflation {
    pub lambda: f64,
    pub coord: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionRecord {
    /// Dimension of the original matrix.
    pub n: usize,
    /// Original coordinate of each reduced pole; the tip maps to `n - 1`.
    pub map: Vec<usize>,
    /// Sign flips of the reduced poles.
    pub flips: Vec<bool>,
    pub givens: Vec<Givens>,
    pub deflations: Vec<Deflation>,
}

impl ReductionRecord {
    pub fn is_identity(&self) -> bool {
        self.givens.is_empty()
            && self.deflations.is_empty()
            && !self.flips.iter().any(|&f| f)
            && self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    fn undo_rotations(&self, x: &mut [f64]) {
        for g in self.givens.iter().rev() {
            let (yp, yq) = (x[g.p], x[g.q]);
            x[g.p] = g.c * yp - g.s * yq;
            x[g.q] = g.s * yp + g.c * yq;
        }
    }

    /// Maps an eigenvector of the reduced matrix back to the original basis.
    pub fn backtransform(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.map.len() + 1 {
            return Err(Error::Dimension { expected: self.map.len() + 1, got: v.len() });
        }
        let mut x = vec![0.0; self.n];
        for (t, &j) in self.map.iter().enumerate() {
            x[j] = if self.flips[t] { -v[t] } else { v[t] };
        }
        x[self.n - 1] = v[self.map.len()];
        self.undo_rotations(&mut x);
        Ok(x)
    }

    /// Eigenvector of a deflated pair in the original basis.
    pub fn deflated_vector(&self, d: &Deflation) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        x[d.coord] = 1.0;
        self.undo_rotations(&mut x);
        x
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    /// `None` when every eigenpair was deflated.
    pub reduced: Option<OrderedArrowhead>,
    pub record: ReductionRecord,
}

/// `sqrt(a^2 + b^2)` in doubled precision, scaled against overflow.
pub fn dd_hypot(a: DoubleDouble, b: DoubleDouble) -> DoubleDouble {
    let m = a.abs().hi().max(b.abs().hi());
    if m == 0.0 {
        return DoubleDouble::ZERO;
    }
    let e = m.log2().floor();
    let scale = 2f64.powi(-(e as i32) / 2);
    let (x, y) = (a.mul_pow2(scale).mul_pow2(scale), b.mul_pow2(scale).mul_pow2(scale));
    (x.square() + y.square()).sqrt().mul_pow2(1.0 / scale).mul_pow2(1.0 / scale)
}

/// Deflates zero couplings and repeated poles, sorts, and normalizes signs.
/// Tolerances are relative to the largest entry magnitude; zero means exact.
pub fn reduce(m: &ArrowheadMatrix, zero_tol: f64, equal_tol: f64) -> Result<Reduction> {
    if !(zero_tol >= 0.0 && equal_tol >= 0.0) {
        return Err(Error::Input("tolerances must be nonnegative".into()));
    }
    let n = m.dim();
    let scale = m.d.iter().chain(&m.z).fold(m.alpha.abs(), |s, x| s.max(x.abs()));
    let ext_z = |j: usize| m.ext.as_ref().map_or(DoubleDouble::from_f64(m.z[j]), |e| e.z[j]);
    let ext_d = |j: usize| m.ext.as_ref().map_or(DoubleDouble::from_f64(m.d[j]), |e| e.d[j]);

    let mut deflations = Vec::new();
    let mut live: Vec<usize> = Vec::new();
    for j in 0..n - 1 {
        if m.z[j].abs() <= zero_tol * scale {
            deflations.push(Deflation { lambda: m.d[j], coord: j });
        } else {
            live.push(j);
        }
    }
    live.sort_by(|&a, &b| m.d[b].partial_cmp(&m.d[a]).unwrap());

    let mut z: Vec<f64> = m.z.clone();
    let mut zd: Vec<DoubleDouble> = (0..n - 1).map(ext_z).collect();
    let mut givens = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    let mut t = 0;
    while t < live.len() {
        let mut group = vec![live[t]];
        let mut u = t + 1;
        while u < live.len() && (m.d[live[t]] - m.d[live[u]]).abs() <= equal_tol * scale {
            group.push(live[u]);
            u += 1;
        }
        group.sort_unstable();
        let p = group[0];
        for &q in &group[1..] {
            let r = dd_hypot(zd[p], zd[q]);
            let c = (zd[p] / r).to_f64();
            let s = (zd[q] / r).to_f64();
            givens.push(Givens { p, q, c, s });
            zd[p] = r;
            z[p] = r.to_f64();
            zd[q] = DoubleDouble::ZERO;
            z[q] = 0.0;
            deflations.push(Deflation { lambda: m.d[q], coord: q });
        }
        kept.push(p);
        t = u;
    }

    let flips: Vec<bool> = kept.iter().map(|&j| z[j] < 0.0).collect();
    let record = ReductionRecord { n, map: kept.clone(), flips, givens, deflations };
    if kept.is_empty() {
        let mut record = record;
        record.deflations.push(Deflation { lambda: m.alpha, coord: n - 1 });
        return Ok(Reduction { reduced: None, record });
    }
    let d: Vec<f64> = kept.iter().map(|&j| m.d[j]).collect();
    let zr: Vec<f64> = kept.iter().map(|&j| z[j].abs()).collect();
    let mut reduced = OrderedArrowhead::new(d, zr, m.alpha)?;
    if let Some(e) = &m.ext {
        let ext = Extended {
            d: kept.iter().map(|&j| ext_d(j)).collect(),
            z: kept.iter().map(|&j| zd[j].abs()).collect(),
            alpha: e.alpha,
        };
        reduced = reduced.with_extended(ext)?;
    }
    Ok(Reduction { reduced: Some(reduced), record })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ArrowheadData;

    fn residual(m: &ArrowheadMatrix, lambda: f64, v: &[f64]) -> f64 {
        let y = m.apply(v);
        y.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn zero_coupling_deflates() {
        let m = ArrowheadMatrix::new(vec![2.0, 1.0], vec![0.0, 1.0], 0.0).unwrap();
        let r = reduce(&m, 0.0, 0.0).unwrap();
        let a = r.reduced.unwrap();
        assert_eq!((a.d(), a.z()), (&[1.0][..], &[1.0][..]));
        assert_eq!(r.record.deflations, vec![Deflation { lambda: 2.0, coord: 0 }]);
        assert_eq!(r.record.deflated_vector(&r.record.deflations[0]), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn equal_poles_rotate() {
        let m = ArrowheadMatrix::new(vec![1.0, 1.0], vec![3.0, 4.0], 0.0).unwrap();
        let r = reduce(&m, 0.0, 0.0).unwrap();
        let a = r.reduced.unwrap();
        assert_eq!(a.z(), &[5.0]);
        let g = r.record.givens[0];
        assert_eq!((g.c, g.s), (0.6, 0.8));
        let v = r.record.deflated_vector(&r.record.deflations[0]);
        assert!(residual(&m, 1.0, &v) <= 10.0 * 3.0 * f64::EPSILON * 5.0);
    }

    #[test]
    fn negative_coupling_flips() {
        let m = ArrowheadMatrix::new(vec![1.0], vec![-2.0], 0.0).unwrap();
        let r = reduce(&m, 0.0, 0.0).unwrap();
        assert_eq!(r.reduced.unwrap().z(), &[2.0]);
        assert_eq!(r.record.flips, vec![true]);
        assert_eq!(r.record.backtransform(&[0.6, 0.8]).unwrap(), vec![-0.6, 0.8]);
    }

    #[test]
    fn reduced_input_gives_identity_record() {
        let m = ArrowheadMatrix::new(vec![3.0, 1.0], vec![1.0, 2.0], 0.5).unwrap();
        let r = reduce(&m, 0.0, 0.0).unwrap();
        assert!(r.record.is_identity());
        assert_eq!(r.record.backtransform(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn everything_deflated() {
        let m = ArrowheadMatrix::new(vec![3.0, 1.0], vec![0.0, 0.0], 0.5).unwrap();
        let r = reduce(&m, 0.0, 0.0).unwrap();
        assert!(r.reduced.is_none());
        assert_eq!(r.record.deflations.len(), 3);
        assert_eq!(r.record.deflations[2], Deflation { lambda: 0.5, coord: 2 });
    }

    #[test]
    fn sorting_and_tolerance() {
        let m = ArrowheadMatrix::new(vec![1.0, 3.0, 1.0 + 1e-12], vec![1.0, 1.0, 1.0], 0.0).unwrap();
        let r = reduce(&m, 0.0, 0.0).unwrap();
        let a = r.reduced.unwrap();
        assert_eq!(a.d(), &[3.0, 1.0 + 1e-12, 1.0]);
        assert_eq!(r.record.map, vec![1, 2, 0]);
        let r = reduce(&m, 0.0, 1e-9).unwrap();
        assert_eq!(r.reduced.unwrap().poles(), 2);
        assert!(reduce(&m, -1.0, 0.0).is_err());
    }

    #[test]
    fn decimal_tails_survive_rotation() {
        let m = ArrowheadMatrix::from_decimal(&["0.5", "0.5"], &["0.1", "0.1"], "1").unwrap();
        let r = reduce(&m, 0.0, 0.0).unwrap();
        let a = r.reduced.unwrap();
        let want = DoubleDouble::from_decimal_str("0.02").unwrap();
        let got = a.coupling_sq_dd(0);
        assert!(((got - want) / want).abs().to_f64() < 1e-30);
    }
}
