//! Problems reduced to a real symmetric arrowhead matrix: Hermitian and
//! nonsymmetric arrowheads, and the SVD of a triangular arrowhead.

use num_complex::Complex64;

use crate::dd::{two_diff, two_prod, two_sum, DoubleDouble};
use crate::decomp::{decompose, eigenpair, solve_ordered, Decomposition, PairReport, SolverConfig};
use crate::error::{Error, Result};
use crate::matrix::{ArrowheadData, ArrowheadMatrix, Extended, Shift};
use crate::preprocess::dd_hypot;
use crate::refine::{aheig, Diagnostics};
use crate::solver::normalize;

fn check_finite(v: impl IntoIterator<Item = f64>) -> Result<()> {
    if v.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::Input("matrix entries must be finite".into()))
    }
}

/// Doubled-precision entries of a Hermitian arrowhead read from decimals.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianExtended {
    pub d: Vec<DoubleDouble>,
    pub z: Vec<(DoubleDouble, DoubleDouble)>,
    pub alpha: DoubleDouble,
}

/// `[[D, z], [z^*, alpha]]` with real `D`, `alpha` and complex `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianArrowhead {
    pub d: Vec<f64>,
    pub z: Vec<Complex64>,
    pub alpha: f64,
    pub ext: Option<HermitianExtended>,
}

impl HermitianArrowhead {
    pub fn new(d: Vec<f64>, z: Vec<Complex64>, alpha: f64) -> Result<Self> {
        if d.len() != z.len() {
            return Err(Error::Dimension { expected: d.len(), got: z.len() });
        }
        if d.is_empty() {
            return Err(Error::Input("an arrowhead matrix needs n >= 2".into()));
        }
        check_finite(d.iter().copied().chain(z.iter().flat_map(|c| [c.re, c.im])).chain([alpha]))?;
        Ok(HermitianArrowhead { d, z, alpha, ext: None })
    }

    pub fn with_extended(mut self, ext: HermitianExtended) -> Result<Self> {
        if ext.d.len() != self.d.len() || ext.z.len() != self.z.len() {
            return Err(Error::Dimension { expected: self.d.len(), got: ext.d.len().min(ext.z.len()) });
        }
        self.ext = Some(ext);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.d.len() + 1
    }

    /// Unit phases `zeta_j / |zeta_j|` (one for zero entries) and the real
    /// arrowhead with couplings `|zeta_j|`.
    pub fn realify(&self) -> Result<(Vec<Complex64>, ArrowheadMatrix)> {
        let (dd, zz, ad): (Vec<DoubleDouble>, Vec<(DoubleDouble, DoubleDouble)>, DoubleDouble) = match &self.ext {
            Some(e) => (e.d.clone(), e.z.clone(), e.alpha),
            None => (
                self.d.iter().map(|&x| x.into()).collect(),
                self.z.iter().map(|c| (c.re.into(), c.im.into())).collect(),
                self.alpha.into(),
            ),
        };
        let abs: Vec<DoubleDouble> = zz.iter().map(|&(re, im)| dd_hypot(re, im)).collect();
        let phases = self
            .z
            .iter()
            .zip(&abs)
            .map(|(c, r)| if r.is_zero() { Complex64::new(1.0, 0.0) } else { c / r.to_f64() })
            .collect();
        let m = ArrowheadMatrix::new(self.d.clone(), abs.iter().map(|x| x.hi()).collect(), self.alpha)?;
        let m = m.with_extended(Extended { d: dd, z: abs, alpha: ad })?;
        Ok((phases, m))
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let m = self.d.len();
        let mut y: Vec<Complex64> = (0..m).map(|j| self.d[j] * x[j] + self.z[j] * x[m]).collect();
        let mut last = self.alpha * x[m];
        for j in 0..m {
            last += self.z[j].conj() * x[j];
        }
        y.push(last);
        y
    }
}

fn apply_phases(phases: &[Complex64], v: &[f64]) -> Vec<Complex64> {
    let m = phases.len();
    let mut u: Vec<Complex64> = phases.iter().zip(v).map(|(p, &x)| p * x).collect();
    u.push(Complex64::new(v[m], 0.0));
    u
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianDecomposition {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<Complex64>>>,
    pub pairs: Vec<PairReport>,
}

pub fn hermitian_decompose(c: &HermitianArrowhead, cfg: &SolverConfig) -> Result<HermitianDecomposition> {
    let (phases, m) = c.realify()?;
    let Decomposition { values, vectors, pairs } = decompose(&m, cfg)?;
    let vectors = vectors.map(|vs| vs.iter().map(|v| apply_phases(&phases, v)).collect());
    Ok(HermitianDecomposition { values, vectors, pairs })
}

/// The k-th eigenpair (0-based, decreasing order) of a Hermitian arrowhead.
pub fn hermitian_eig(
    c: &HermitianArrowhead,
    k: usize,
    cfg: &SolverConfig,
) -> Result<(PairReport, Option<Vec<Complex64>>)> {
    let (phases, m) = c.realify()?;
    let (p, v) = eigenpair(&m, k, cfg)?;
    Ok((p, v.map(|v| apply_phases(&phases, &v))))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonsymExtended {
    pub d: Vec<DoubleDouble>,
    pub z_up: Vec<DoubleDouble>,
    pub z_low: Vec<DoubleDouble>,
    pub alpha: DoubleDouble,
}

/// `[[D, z_up], [z_low^T, alpha]]` with `z_up_j * z_low_j > 0` or both zero.
#[derive(Clone, Debug, PartialEq)]
pub struct NonsymArrowhead {
    pub d: Vec<f64>,
    pub z_up: Vec<f64>,
    pub z_low: Vec<f64>,
    pub alpha: f64,
    pub ext: Option<NonsymExtended>,
}

impl NonsymArrowhead {
    pub fn new(d: Vec<f64>, z_up: Vec<f64>, z_low: Vec<f64>, alpha: f64) -> Result<Self> {
        if d.len() != z_up.len() || d.len() != z_low.len() {
            return Err(Error::Dimension { expected: d.len(), got: z_up.len().min(z_low.len()) });
        }
        if d.is_empty() {
            return Err(Error::Input("an arrowhead matrix needs n >= 2".into()));
        }
        check_finite(d.iter().chain(&z_up).chain(&z_low).copied().chain([alpha]))?;
        for (j, (&u, &l)) in z_up.iter().zip(&z_low).enumerate() {
            if (u == 0.0) != (l == 0.0) || u * l < 0.0 || (u != 0.0 && (u < 0.0) != (l < 0.0)) {
                return Err(Error::Unsupported(format!(
                    "border entries {} have product {:e}; symmetrization needs a positive product",
                    j + 1,
                    u * l
                )));
            }
        }
        Ok(NonsymArrowhead { d, z_up, z_low, alpha, ext: None })
    }

    pub fn with_extended(mut self, ext: NonsymExtended) -> Result<Self> {
        let m = self.d.len();
        if ext.d.len() != m || ext.z_up.len() != m || ext.z_low.len() != m {
            return Err(Error::Dimension { expected: m, got: ext.d.len().min(ext.z_up.len()).min(ext.z_low.len()) });
        }
        self.ext = Some(ext);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.d.len() + 1
    }

    /// Diagonal `psi` with `psi^{-1} G psi` symmetric, and that symmetric matrix.
    pub fn symmetrize(&self) -> Result<(Vec<f64>, ArrowheadMatrix)> {
        let mut psi = Vec::with_capacity(self.d.len());
        let mut zeta = Vec::with_capacity(self.d.len());
        for (j, (&u, &l)) in self.z_up.iter().zip(&self.z_low).enumerate() {
            if u == 0.0 {
                psi.push(1.0);
                zeta.push(DoubleDouble::ZERO);
                continue;
            }
            let z = match &self.ext {
                Some(e) => (e.z_up[j] * e.z_low[j]).sqrt(),
                None => two_prod(u, l).sqrt(),
            };
            let p = l.signum() * (u / l).sqrt();
            // Both off-diagonal entries of the transformed matrix must agree.
            let (up, low) = (u / p, l * p);
            let tol = 8.0 * f64::EPSILON * z.hi();
            if (up - z.hi()).abs() > tol || (low - z.hi()).abs() > tol {
                return Err(Error::Internal(format!("symmetrization failed: {up:e} vs {low:e}")));
            }
            psi.push(p);
            zeta.push(z);
        }
        let m = ArrowheadMatrix::new(self.d.clone(), zeta.iter().map(|x| x.hi()).collect(), self.alpha)?;
        let ext = match &self.ext {
            Some(e) => Extended { d: e.d.clone(), z: zeta, alpha: e.alpha },
            None => Extended { d: self.d.iter().map(|&x| x.into()).collect(), z: zeta, alpha: self.alpha.into() },
        };
        Ok((psi, m.with_extended(ext)?))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.d.len();
        let mut y: Vec<f64> = (0..m).map(|j| self.d[j] * x[j] + self.z_up[j] * x[m]).collect();
        let mut last = self.alpha * x[m];
        for j in 0..m {
            last += self.z_low[j] * x[j];
        }
        y.push(last);
        y
    }
}

fn right_vector(psi: &[f64], v: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = psi.iter().zip(v).map(|(p, x)| p * x).collect();
    x.push(v[psi.len()]);
    normalize(&mut x);
    x
}

/// Eigenvalues in decreasing order and unit right eigenvectors.
pub fn nonsym_decompose(g: &NonsymArrowhead, cfg: &SolverConfig) -> Result<Decomposition> {
    let (psi, m) = g.symmetrize()?;
    let mut out = decompose(&m, cfg)?;
    out.vectors = out.vectors.map(|vs| vs.iter().map(|v| right_vector(&psi, v)).collect());
    Ok(out)
}

pub fn nonsym_eig(g: &NonsymArrowhead, k: usize, cfg: &SolverConfig) -> Result<(PairReport, Option<Vec<f64>>)> {
    let (psi, m) = g.symmetrize()?;
    let (p, v) = eigenpair(&m, k, cfg)?;
    Ok((p, v.map(|v| right_vector(&psi, &v))))
}

/// Upper triangular `[[D, z], [0, alpha]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularArrowhead {
    pub d: Vec<f64>,
    pub z: Vec<f64>,
    pub alpha: f64,
    pub ext: Option<Extended>,
}

impl TriangularArrowhead {
    pub fn new(d: Vec<f64>, z: Vec<f64>, alpha: f64) -> Result<Self> {
        let m = ArrowheadMatrix::new(d, z, alpha)?;
        Self::from_parts(m)
    }

    /// Reuses the arrowhead payload, including any doubled-precision entries.
    pub fn from_parts(m: ArrowheadMatrix) -> Result<Self> {
        if let Some(j) = m.d.iter().position(|&x| x == 0.0) {
            return Err(Error::Input(format!("diagonal entry {} is zero", j + 1)));
        }
        if let Some(j) = m.z.iter().position(|&x| x == 0.0) {
            return Err(Error::Input(format!("border entry {} is zero", j + 1)));
        }
        for i in 0..m.d.len() {
            for j in i + 1..m.d.len() {
                if m.d[i].abs() == m.d[j].abs() {
                    return Err(Error::Unsupported(format!(
                        "diagonal entries {} and {} have equal magnitude",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(TriangularArrowhead { d: m.d, z: m.z, alpha: m.alpha, ext: m.ext })
    }

    pub fn dim(&self) -> usize {
        self.d.len() + 1
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.d.len();
        let mut y: Vec<f64> = (0..m).map(|j| self.d[j] * x[j] + self.z[j] * x[m]).collect();
        y.push(self.alpha * x[m]);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut b = vec![vec![0.0; n]; n];
        for j in 0..n - 1 {
            b[j][j] = self.d[j];
            b[j][n - 1] = self.z[j];
        }
        b[n - 1][n - 1] = self.alpha;
        b
    }
}

/// `B^T B` of a triangular arrowhead in ordered form. Poles are `d_j^2` in
/// decreasing order; offsets between poles use `(d_j - d_i)(d_j + d_i)`.
#[derive(Clone, Debug)]
pub struct GramArrowhead {
    /// `|d|` in decreasing order.
    d: Vec<DoubleDouble>,
    /// `|z|`, permuted with `d`.
    z: Vec<DoubleDouble>,
    alpha: DoubleDouble,
    pole: Vec<f64>,
    coupling: Vec<f64>,
    tip: DoubleDouble,
    /// Original index of each sorted pole.
    pub perm: Vec<usize>,
    /// Sign of `d_j z_j` in original order.
    pub signs: Vec<f64>,
}

impl GramArrowhead {
    pub fn new(b: &TriangularArrowhead) -> Self {
        let m = b.d.len();
        let (d, z, alpha): (Vec<DoubleDouble>, Vec<DoubleDouble>, DoubleDouble) = match &b.ext {
            Some(e) => (e.d.clone(), e.z.clone(), e.alpha),
            None => (
                b.d.iter().map(|&x| x.into()).collect(),
                b.z.iter().map(|&x| x.into()).collect(),
                b.alpha.into(),
            ),
        };
        let mut perm: Vec<usize> = (0..m).collect();
        perm.sort_by(|&i, &j| b.d[j].abs().total_cmp(&b.d[i].abs()));
        let signs = (0..m).map(|j| (b.d[j] * b.z[j]).signum()).collect();
        let d: Vec<DoubleDouble> = perm.iter().map(|&j| d[j].abs()).collect();
        let z: Vec<DoubleDouble> = perm.iter().map(|&j| z[j].abs()).collect();
        let mut tip = alpha.square();
        for x in &z {
            tip += x.square();
        }
        let pole = d.iter().map(|x| x.square().to_f64()).collect();
        let coupling = d.iter().zip(&z).map(|(x, y)| (*x * *y).to_f64()).collect();
        GramArrowhead { d, z, alpha, pole, coupling, tip, perm, signs }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.to_f64()
    }
}

impl ArrowheadData for GramArrowhead {
    fn poles(&self) -> usize {
        self.d.len()
    }

    fn pole(&self, j: usize) -> f64 {
        self.pole[j]
    }

    fn coupling(&self, j: usize) -> f64 {
        self.coupling[j]
    }

    fn tip(&self) -> f64 {
        self.tip.to_f64()
    }

    fn pole_dd(&self, j: usize) -> DoubleDouble {
        self.d[j].square()
    }

    fn coupling_sq_dd(&self, j: usize) -> DoubleDouble {
        (self.d[j] * self.z[j]).square()
    }

    fn tip_dd(&self) -> DoubleDouble {
        self.tip
    }

    fn offset(&self, j: usize, s: Shift) -> f64 {
        match s {
            Shift::Pole(i) if i == j => 0.0,
            Shift::Pole(i) => {
                let (dj, di) = (self.d[j].hi(), self.d[i].hi());
                (dj - di) * (dj + di)
            }
            Shift::Value(x) => self.d[j].hi().mul_add(self.d[j].hi(), -x),
        }
    }

    fn offset_dd(&self, j: usize, s: Shift) -> DoubleDouble {
        match s {
            Shift::Pole(i) if i == j => DoubleDouble::ZERO,
            Shift::Pole(i) => (self.d[j] - self.d[i]) * (self.d[j] + self.d[i]),
            Shift::Value(x) => self.d[j].square() - DoubleDouble::from_f64(x),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvdTriplet {
    pub sigma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Eigenvalue of `B^T B` as `shift + mu`.
    pub lambda: DoubleDouble,
    pub diagnostics: Option<Diagnostics>,
    pub warning: Option<String>,
}

/// Left vector from `u_{1:n-1} = sigma v_{1:n-1} / d` and `u_n = alpha v_n / sigma`.
fn left_vector(b: &TriangularArrowhead, sigma: f64, v: &[f64]) -> Vec<f64> {
    let m = b.d.len();
    let mut u: Vec<f64> = (0..m).map(|j| sigma * v[j] / b.d[j]).collect();
    u.push(b.alpha * v[m] / sigma);
    normalize(&mut u);
    u
}

/// Null pair of a triangular arrowhead with `alpha = 0`.
fn null_triplet(b: &TriangularArrowhead) -> SvdTriplet {
    let m = b.d.len();
    let mut v: Vec<f64> = (0..m).map(|j| -b.z[j] / b.d[j]).collect();
    v.push(1.0);
    normalize(&mut v);
    let mut u = vec![0.0; m + 1];
    u[m] = 1.0;
    SvdTriplet {
        sigma: 0.0,
        u,
        v,
        lambda: DoubleDouble::ZERO,
        diagnostics: None,
        warning: Some("alpha = 0: zero singular value, left vector completed to e_n".into()),
    }
}

fn triplet(
    b: &TriangularArrowhead,
    g: &GramArrowhead,
    pair: crate::solver::EigenPair,
    diag: Diagnostics,
) -> Result<SvdTriplet> {
    let lambda = pair.lambda_dd();
    if lambda.hi() <= 0.0 {
        return Err(Error::Internal(format!("eigenvalue {:e} of B^T B is not positive", lambda.hi())));
    }
    let sigma = lambda.sqrt().to_f64();
    let m = b.d.len();
    let mut v = vec![0.0; m + 1];
    for (t, &j) in g.perm.iter().enumerate() {
        v[j] = g.signs[j] * pair.vector[t];
    }
    v[m] = pair.vector[m];
    let u = left_vector(b, sigma, &v);
    let warning = diag.warning.clone();
    Ok(SvdTriplet { sigma, u, v, lambda, diagnostics: Some(diag), warning })
}

/// The k-th singular triplet (0-based, decreasing order).
pub fn triangular_svd(b: &TriangularArrowhead, k: usize, cfg: &SolverConfig) -> Result<SvdTriplet> {
    let n = b.dim();
    if k >= n {
        return Err(Error::Input(format!("singular value index {} out of range 1..={n}", k + 1)));
    }
    if b.alpha == 0.0 && k == n - 1 {
        return Ok(null_triplet(b));
    }
    let g = GramArrowhead::new(b);
    let (pair, diag) = aheig(&g, k, &cfg.refine)?;
    triplet(b, &g, pair, diag)
}

/// All singular triplets in decreasing order.
pub fn triangular_svd_all(b: &TriangularArrowhead, cfg: &SolverConfig) -> Result<Vec<SvdTriplet>> {
    let n = b.dim();
    let g = GramArrowhead::new(b);
    let solved = solve_ordered(&g, &cfg.refine, cfg.parallel)?;
    solved
        .into_iter()
        .enumerate()
        .map(|(k, (pair, diag))| {
            if b.alpha == 0.0 && k == n - 1 {
                Ok(null_triplet(b))
            } else {
                triplet(b, &g, pair, diag)
            }
        })
        .collect()
}

/// `(d_j - d_i)(d_j + d_i)` from doubled-precision differences, exposed for tests.
pub fn square_difference(dj: f64, di: f64) -> DoubleDouble {
    two_diff(dj, di) * two_sum(dj, di)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::ULP_UNIT;

    fn ulps(x: f64, want: f64) -> f64 {
        (x - want).abs() / (want.abs() * ULP_UNIT)
    }

    #[test]
    fn hermitian_two_by_two() {
        let c = HermitianArrowhead::new(vec![0.0], vec![Complex64::new(0.0, 1.0)], 0.0).unwrap();
        let (p, u) = hermitian_eig(&c, 0, &SolverConfig::default()).unwrap();
        assert_eq!(p.lambda, 1.0);
        let u = u.unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = [Complex64::new(0.0, s), Complex64::new(s, 0.0)];
        let phase = u[1] / want[1];
        for (a, b) in u.iter().zip(&want) {
            assert!((a - phase * b).norm() < 2e-16);
        }
        let cu = c.apply(&u);
        for (a, b) in cu.iter().zip(&u) {
            assert!((a - b).norm() < 4e-16);
        }
    }

    #[test]
    fn hermitian_real_input_matches_real_solver() {
        let d = vec![3.0, 1.0, -2.0];
        let z = vec![0.5, -2.0, 1.5];
        let c = HermitianArrowhead::new(d.clone(), z.iter().map(|&x| Complex64::new(x, 0.0)).collect(), 0.25)
            .unwrap();
        let cfg = SolverConfig::default();
        let h = hermitian_decompose(&c, &cfg).unwrap();
        let r = decompose(&ArrowheadMatrix::new(d, z, 0.25).unwrap(), &cfg).unwrap();
        assert_eq!(h.values, r.values);
        for (hv, rv) in h.vectors.unwrap().iter().zip(r.vectors.unwrap()) {
            for (a, b) in hv.iter().zip(rv) {
                assert_eq!(a.im, 0.0);
                assert_eq!(a.re, b);
            }
        }
    }

    #[test]
    fn nonsym_two_by_two() {
        let g = NonsymArrowhead::new(vec![0.0], vec![1.0], vec![4.0], 0.0).unwrap();
        let (p, x) = nonsym_eig(&g, 0, &SolverConfig::default()).unwrap();
        assert_eq!(p.lambda, 2.0);
        let x = x.unwrap();
        assert!((x[1] / x[0] - 2.0).abs() < 4e-16);
        let gx = g.apply(&x);
        assert!((gx[0] - 2.0 * x[0]).abs() < 4e-16 && (gx[1] - 2.0 * x[1]).abs() < 4e-16);
        let (p, _) = nonsym_eig(&g, 1, &SolverConfig::default()).unwrap();
        assert!((p.lambda + 2.0).abs() <= 2.0 * 2.0 * ULP_UNIT);
    }

    #[test]
    fn nonsym_rejects_sign_mismatch() {
        assert!(matches!(
            NonsymArrowhead::new(vec![0.0], vec![1.0], vec![-4.0], 0.0),
            Err(Error::Unsupported(_))
        ));
        assert!(NonsymArrowhead::new(vec![0.0], vec![1.0], vec![0.0], 0.0).is_err());
        assert!(NonsymArrowhead::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 2.0], 0.0).is_ok());
    }

    #[test]
    fn nonsym_symmetric_input_is_unchanged() {
        let g = NonsymArrowhead::new(vec![2.0, -1.0], vec![1.0, -3.0], vec![1.0, -3.0], 0.5).unwrap();
        let (psi, m) = g.symmetrize().unwrap();
        assert_eq!(psi, vec![1.0, -1.0]);
        assert_eq!(m.z, vec![1.0, 3.0]);
    }

    #[test]
    fn golden_ratio_svd() {
        let b = TriangularArrowhead::new(vec![1.0], vec![1.0], 1.0).unwrap();
        let t = triangular_svd_all(&b, &SolverConfig::default()).unwrap();
        let s5 = DoubleDouble::from_f64(5.0).sqrt();
        let three = DoubleDouble::from_f64(3.0);
        assert!(ulps(t[0].sigma, (three + s5).mul_pow2(0.5).sqrt().to_f64()) <= 1.0);
        assert!(ulps(t[1].sigma, (three - s5).mul_pow2(0.5).sqrt().to_f64()) <= 1.0);
        assert!((t[0].sigma - 1.618033988749895).abs() <= 1e-15);
        assert!((t[1].sigma - 0.618033988749895).abs() <= 1e-15);
    }

    #[test]
    fn quadratic_svd() {
        let b = TriangularArrowhead::new(vec![2.0], vec![1.0], 1.0).unwrap();
        let t = triangular_svd(&b, 0, &SolverConfig::default()).unwrap();
        assert!(ulps(t.sigma, (3.0 + 5f64.sqrt()).sqrt()) <= 1.0);
        let bv = b.apply(&t.v);
        for (x, y) in bv.iter().zip(&t.u) {
            assert!((x - t.sigma * y).abs() < 8.0 * ULP_UNIT * t.sigma);
        }
    }

    #[test]
    fn zero_tip_svd() {
        let b = TriangularArrowhead::new(vec![3.0, -1.0], vec![1.0, 2.0], 0.0).unwrap();
        let t = triangular_svd_all(&b, &SolverConfig::default()).unwrap();
        assert_eq!(t[2].sigma, 0.0);
        assert!(t[2].warning.is_some());
        let bv = b.apply(&t[2].v);
        assert!(bv.iter().all(|x| x.abs() < 4.0 * ULP_UNIT));
        for s in &t[..2] {
            assert_eq!(s.u[2], 0.0);
        }
    }

    #[test]
    fn svd_rejects_reducible_input() {
        assert!(TriangularArrowhead::new(vec![0.0, 1.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(TriangularArrowhead::new(vec![2.0, 1.0], vec![0.0, 1.0], 1.0).is_err());
        assert!(matches!(
            TriangularArrowhead::new(vec![2.0, -2.0], vec![1.0, 1.0], 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn square_differences_are_exact_for_close_entries() {
        let (a, b) = (1.0 + f64::EPSILON, 1.0);
        let e = f64::EPSILON;
        assert_eq!(square_difference(a, b), DoubleDouble::new(2.0 * e, e * e));
    }
}
