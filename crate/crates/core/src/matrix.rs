//! Arrowhead matrix types and the data interface the solver runs on.

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};

/// Which extreme eigenvalue a bisection targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

/// Shift used when forming `A - sigma I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shift {
    /// Shift to the pole with the given index.
    Pole(usize),
    /// Shift to an arbitrary value.
    Value(f64),
}

/// Read access to an arrowhead matrix `[[diag(d), z], [z^T, alpha]]`.
///
/// Poles are indexed from 0 and must be strictly decreasing with positive
/// couplings. The `*_dd` accessors supply the entries in doubled precision;
/// implementors whose entries are derived quantities (e.g. `B^T B`) override
/// the offset methods so differences are formed without cancellation.
pub trait ArrowheadData: Sync {
    /// Number of poles, `n - 1`.
    fn poles(&self) -> usize;

    fn pole(&self, j: usize) -> f64;

    fn coupling(&self, j: usize) -> f64;

    fn tip(&self) -> f64;

    fn dim(&self) -> usize {
        self.poles() + 1
    }

    fn pole_dd(&self, j: usize) -> DoubleDouble {
        DoubleDouble::from_f64(self.pole(j))
    }

    fn coupling_sq_dd(&self, j: usize) -> DoubleDouble {
        DoubleDouble::square_f64(self.coupling(j))
    }

    fn tip_dd(&self) -> DoubleDouble {
        DoubleDouble::from_f64(self.tip())
    }

    fn shift_value(&self, s: Shift) -> f64 {
        match s {
            Shift::Pole(i) => self.pole(i),
            Shift::Value(x) => x,
        }
    }

    fn shift_value_dd(&self, s: Shift) -> DoubleDouble {
        match s {
            Shift::Pole(i) => self.pole_dd(i),
            Shift::Value(x) => DoubleDouble::from_f64(x),
        }
    }

    /// `d_j - shift` in working precision.
    fn offset(&self, j: usize, s: Shift) -> f64 {
        match s {
            Shift::Pole(i) if i == j => 0.0,
            _ => self.pole(j) - self.shift_value(s),
        }
    }

    /// `alpha - shift` in working precision.
    fn tip_offset(&self, s: Shift) -> f64 {
        self.tip() - self.shift_value(s)
    }

    fn offset_dd(&self, j: usize, s: Shift) -> DoubleDouble {
        match s {
            Shift::Pole(i) if i == j => DoubleDouble::ZERO,
            _ => self.pole_dd(j) - self.shift_value_dd(s),
        }
    }

    fn tip_offset_dd(&self, s: Shift) -> DoubleDouble {
        self.tip_dd() - self.shift_value_dd(s)
    }
}

/// Doubled-precision values of the entries, used when the input is read as decimal.
#[derive(Clone, Debug, PartialEq)]
pub struct Extended {
    pub d: Vec<DoubleDouble>,
    pub z: Vec<DoubleDouble>,
    pub alpha: DoubleDouble,
}

/// A general real symmetric arrowhead matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrowheadMatrix {
    pub d: Vec<f64>,
    pub z: Vec<f64>,
    pub alpha: f64,
    pub ext: Option<Extended>,
}

fn check_ext(d: &[f64], z: &[f64], alpha: f64, ext: &Extended) -> Result<()> {
    if ext.d.len() != d.len() || ext.z.len() != z.len() {
        return Err(Error::Dimension { expected: d.len(), got: ext.d.len().min(ext.z.len()) });
    }
    let same = |x: f64, y: DoubleDouble| x == y.hi() || (x == 0.0 && y.is_zero());
    let ok = d.iter().zip(&ext.d).all(|(&x, &y)| same(x, y))
        && z.iter().zip(&ext.z).all(|(&x, &y)| same(x, y))
        && same(alpha, ext.alpha);
    if ok {
        Ok(())
    } else {
        Err(Error::Input("extended entries do not round to the working entries".into()))
    }
}

impl ArrowheadMatrix {
    pub fn new(d: Vec<f64>, z: Vec<f64>, alpha: f64) -> Result<Self> {
        if d.len() != z.len() {
            return Err(Error::Dimension { expected: d.len(), got: z.len() });
        }
        if d.is_empty() {
            return Err(Error::Input("an arrowhead matrix needs n >= 2".into()));
        }
        if !d.iter().chain(&z).all(|x| x.is_finite()) || !alpha.is_finite() {
            return Err(Error::Input("matrix entries must be finite".into()));
        }
        Ok(ArrowheadMatrix { d, z, alpha, ext: None })
    }

    pub fn with_extended(mut self, ext: Extended) -> Result<Self> {
        check_ext(&self.d, &self.z, self.alpha, &ext)?;
        self.ext = Some(ext);
        Ok(self)
    }

    /// Reads every entry as a decimal literal, keeping the doubled-precision values.
    pub fn from_decimal(d: &[&str], z: &[&str], alpha: &str) -> Result<Self> {
        let parse = |v: &[&str]| -> Result<Vec<DoubleDouble>> {
            v.iter().map(|s| DoubleDouble::from_decimal_str(s)).collect()
        };
        let dd = parse(d)?;
        let zd = parse(z)?;
        let ad = DoubleDouble::from_decimal_str(alpha)?;
        let m = ArrowheadMatrix::new(
            dd.iter().map(|x| x.hi()).collect(),
            zd.iter().map(|x| x.hi()).collect(),
            ad.hi(),
        )?;
        m.with_extended(Extended { d: dd, z: zd, alpha: ad })
    }

    pub fn dim(&self) -> usize {
        self.d.len() + 1
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut a = vec![vec![0.0; n]; n];
        for j in 0..n - 1 {
            a[j][j] = self.d[j];
            a[j][n - 1] = self.z[j];
            a[n - 1][j] = self.z[j];
        }
        a[n - 1][n - 1] = self.alpha;
        a
    }

    /// `y = A x` using the arrowhead structure.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = Vec::with_capacity(n);
        for j in 0..n - 1 {
            y.push(self.d[j] * x[j] + self.z[j] * x[n - 1]);
        }
        let mut last = self.alpha * x[n - 1];
        for j in 0..n - 1 {
            last += self.z[j] * x[j];
        }
        y.push(last);
        y
    }
}

/// Arrowhead matrix with strictly decreasing poles and positive couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedArrowhead {
    d: Vec<f64>,
    z: Vec<f64>,
    alpha: f64,
    ext: Option<Extended>,
}

impl OrderedArrowhead {
    pub fn new(d: Vec<f64>, z: Vec<f64>, alpha: f64) -> Result<Self> {
        let m = ArrowheadMatrix::new(d, z, alpha)?;
        Self::from_matrix(m)
    }

    pub fn from_matrix(m: ArrowheadMatrix) -> Result<Self> {
        if m.d.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Input("poles must be strictly decreasing".into()));
        }
        if m.z.iter().any(|&x| x <= 0.0) {
            return Err(Error::Input("couplings must be positive".into()));
        }
        if let Some(e) = &m.ext {
            check_ext(&m.d, &m.z, m.alpha, e)?;
        }
        Ok(OrderedArrowhead { d: m.d, z: m.z, alpha: m.alpha, ext: m.ext })
    }

    pub fn with_extended(self, ext: Extended) -> Result<Self> {
        check_ext(&self.d, &self.z, self.alpha, &ext)?;
        Ok(OrderedArrowhead { ext: Some(ext), ..self })
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn extended(&self) -> Option<&Extended> {
        self.ext.as_ref()
    }

    pub fn to_matrix(&self) -> ArrowheadMatrix {
        ArrowheadMatrix { d: self.d.clone(), z: self.z.clone(), alpha: self.alpha, ext: self.ext.clone() }
    }
}

impl ArrowheadData for OrderedArrowhead {
    fn poles(&self) -> usize {
        self.d.len()
    }

    fn pole(&self, j: usize) -> f64 {
        self.d[j]
    }

    fn coupling(&self, j: usize) -> f64 {
        self.z[j]
    }

    fn tip(&self) -> f64 {
        self.alpha
    }

    fn pole_dd(&self, j: usize) -> DoubleDouble {
        match &self.ext {
            Some(e) => e.d[j],
            None => DoubleDouble::from_f64(self.d[j]),
        }
    }

    fn coupling_sq_dd(&self, j: usize) -> DoubleDouble {
        match &self.ext {
            Some(e) => e.z[j].square(),
            None => DoubleDouble::square_f64(self.z[j]),
        }
    }

    fn tip_dd(&self) -> DoubleDouble {
        match &self.ext {
            Some(e) => e.alpha,
            None => DoubleDouble::from_f64(self.alpha),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ArrowheadMatrix::new(vec![], vec![], 1.0).is_err());
        assert!(ArrowheadMatrix::new(vec![1.0], vec![1.0, 2.0], 1.0).is_err());
        assert!(ArrowheadMatrix::new(vec![f64::NAN], vec![1.0], 1.0).is_err());
        assert!(OrderedArrowhead::new(vec![1.0, 1.0], vec![1.0, 1.0], 0.0).is_err());
        assert!(OrderedArrowhead::new(vec![2.0, 1.0], vec![1.0, -1.0], 0.0).is_err());
        assert!(OrderedArrowhead::new(vec![2.0, 1.0], vec![1.0, 1.0], 0.0).is_ok());
    }

    #[test]
    fn decimal_entries_keep_tails() {
        let m = ArrowheadMatrix::from_decimal(&["0.1"], &["1"], "0.3").unwrap();
        let a = OrderedArrowhead::from_matrix(m).unwrap();
        assert_eq!(a.pole(0), 0.1);
        assert!(a.pole_dd(0).lo() != 0.0);
        assert!(a.tip_dd().lo() != 0.0);
        assert_eq!(a.coupling_sq_dd(0), DoubleDouble::ONE);
    }

    #[test]
    fn offsets() {
        let a = OrderedArrowhead::new(vec![3.0, 1.0], vec![1.0, 1.0], 0.5).unwrap();
        assert_eq!(a.offset(1, Shift::Pole(1)), 0.0);
        assert_eq!(a.offset(0, Shift::Pole(1)), 2.0);
        assert_eq!(a.tip_offset(Shift::Value(0.25)), 0.25);
        assert_eq!(a.offset_dd(0, Shift::Value(1.0)).hi(), 2.0);
    }

    #[test]
    fn dense_and_apply_agree() {
        let m = ArrowheadMatrix::new(vec![2.0, -1.0], vec![0.5, 3.0], 4.0).unwrap();
        let dense = m.to_dense();
        let x = [1.0, 2.0, -1.0];
        let y = m.apply(&x);
        for (row, yi) in dense.iter().zip(&y) {
            let s: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert_eq!(s, *yi);
        }
    }
}
