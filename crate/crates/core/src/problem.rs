//! Problem files: JSON with every number stored as a decimal string.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::apps::{HermitianArrowhead, HermitianExtended, NonsymArrowhead, NonsymExtended, TriangularArrowhead};
use crate::dd::DoubleDouble;
use crate::dpr1::Dpr1Matrix;
use crate::error::{Error, Result};
use crate::matrix::{ArrowheadMatrix, Extended};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Arrowhead,
    HermitianArrowhead,
    NonsymArrowhead,
    TriangularArrowhead,
    Dpr1,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Arrowhead => "arrowhead",
            Kind::HermitianArrowhead => "hermitian-arrowhead",
            Kind::NonsymArrowhead => "nonsym-arrowhead",
            Kind::TriangularArrowhead => "triangular-arrowhead",
            Kind::Dpr1 => "dpr1",
        }
    }
}

/// How decimal strings are promoted to doubled precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InputRepr {
    /// Keep the decimal value to doubled precision.
    #[default]
    Decimal,
    /// Round to the working format and pad with zero.
    Binary,
}

impl FromStr for InputRepr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decimal" => Ok(InputRepr::Decimal),
            "binary" => Ok(InputRepr::Binary),
            _ => Err(Error::Input(format!("unknown input representation `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Border {
    Real(Vec<String>),
    Complex(Vec<[String; 2]>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    pub kind: Kind,
    pub d: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Border>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_up: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_low: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    Arrowhead(ArrowheadMatrix),
    Hermitian(HermitianArrowhead),
    Nonsym(NonsymArrowhead),
    Triangular(TriangularArrowhead),
    Dpr1(Dpr1Matrix),
}

impl Problem {
    pub fn kind(&self) -> Kind {
        match self {
            Problem::Arrowhead(_) => Kind::Arrowhead,
            Problem::Hermitian(_) => Kind::HermitianArrowhead,
            Problem::Nonsym(_) => Kind::NonsymArrowhead,
            Problem::Triangular(_) => Kind::TriangularArrowhead,
            Problem::Dpr1(_) => Kind::Dpr1,
        }
    }
}

/// Shortest decimal string that reads back to `x`.
pub fn format_number(x: f64) -> String {
    format!("{x:e}")
}

fn strings(v: &[f64]) -> Vec<String> {
    v.iter().map(|&x| format_number(x)).collect()
}

fn number(s: &str, repr: InputRepr) -> Result<DoubleDouble> {
    let x = DoubleDouble::from_decimal_str(s)?;
    Ok(match repr {
        InputRepr::Decimal => x,
        InputRepr::Binary => DoubleDouble::from_f64(x.hi()),
    })
}

fn numbers(v: &[String], repr: InputRepr) -> Result<Vec<DoubleDouble>> {
    v.iter().map(|s| number(s, repr)).collect()
}

fn his(v: &[DoubleDouble]) -> Vec<f64> {
    v.iter().map(|x| x.hi()).collect()
}

fn need<'a, T>(field: &'a Option<T>, name: &str, kind: Kind) -> Result<&'a T> {
    field.as_ref().ok_or_else(|| Error::Input(format!("`{}` problems need a `{name}` field", kind.name())))
}

fn forbid<T>(field: &Option<T>, name: &str, kind: Kind) -> Result<()> {
    match field {
        Some(_) => Err(Error::Input(format!("`{}` problems take no `{name}` field", kind.name()))),
        None => Ok(()),
    }
}

fn real_border(z: &Border, kind: Kind) -> Result<&Vec<String>> {
    match z {
        Border::Real(v) => Ok(v),
        Border::Complex(_) => Err(Error::Input(format!("`{}` problems need a real `z`", kind.name()))),
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<ProblemFile> {
        let f: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if f.version != FORMAT_VERSION {
            return Err(Error::Input(format!("unsupported format version {}", f.version)));
        }
        Ok(f)
    }

    /// Canonical text: fixed key order, two-space indent, trailing newline.
    pub fn to_canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem files serialize");
        s.push('\n');
        s
    }

    fn empty(kind: Kind, d: &[f64]) -> ProblemFile {
        ProblemFile {
            version: FORMAT_VERSION,
            kind,
            d: strings(d),
            z: None,
            z_up: None,
            z_low: None,
            u: None,
            alpha: None,
            rho: None,
        }
    }

    /// File for a problem, written from its working-precision entries.
    pub fn from_problem(p: &Problem) -> ProblemFile {
        match p {
            Problem::Arrowhead(m) => ProblemFile {
                z: Some(Border::Real(strings(&m.z))),
                alpha: Some(format_number(m.alpha)),
                ..Self::empty(Kind::Arrowhead, &m.d)
            },
            Problem::Triangular(b) => ProblemFile {
                z: Some(Border::Real(strings(&b.z))),
                alpha: Some(format_number(b.alpha)),
                ..Self::empty(Kind::TriangularArrowhead, &b.d)
            },
            Problem::Hermitian(c) => ProblemFile {
                z: Some(Border::Complex(c.z.iter().map(|x| [format_number(x.re), format_number(x.im)]).collect())),
                alpha: Some(format_number(c.alpha)),
                ..Self::empty(Kind::HermitianArrowhead, &c.d)
            },
            Problem::Nonsym(g) => ProblemFile {
                z_up: Some(strings(&g.z_up)),
                z_low: Some(strings(&g.z_low)),
                alpha: Some(format_number(g.alpha)),
                ..Self::empty(Kind::NonsymArrowhead, &g.d)
            },
            Problem::Dpr1(m) => ProblemFile {
                u: Some(strings(&m.u)),
                rho: Some(format_number(m.rho)),
                ..Self::empty(Kind::Dpr1, &m.d)
            },
        }
    }

    pub fn to_problem(&self, repr: InputRepr) -> Result<Problem> {
        let kind = self.kind;
        let d = numbers(&self.d, repr)?;
        match kind {
            Kind::Arrowhead | Kind::TriangularArrowhead => {
                for (f, n) in [(&self.z_up, "z_up"), (&self.z_low, "z_low"), (&self.u, "u")] {
                    forbid(f, n, kind)?;
                }
                forbid(&self.rho, "rho", kind)?;
                let z = numbers(real_border(need(&self.z, "z", kind)?, kind)?, repr)?;
                let alpha = number(need(&self.alpha, "alpha", kind)?, repr)?;
                let m = ArrowheadMatrix::new(his(&d), his(&z), alpha.hi())?.with_extended(Extended { d, z, alpha })?;
                if kind == Kind::Arrowhead {
                    Ok(Problem::Arrowhead(m))
                } else {
                    Ok(Problem::Triangular(TriangularArrowhead::from_parts(m)?))
                }
            }
            Kind::HermitianArrowhead => {
                for (f, n) in [(&self.z_up, "z_up"), (&self.z_low, "z_low"), (&self.u, "u")] {
                    forbid(f, n, kind)?;
                }
                forbid(&self.rho, "rho", kind)?;
                let z: Vec<(DoubleDouble, DoubleDouble)> = match need(&self.z, "z", kind)? {
                    Border::Complex(v) => {
                        v.iter().map(|[re, im]| Ok((number(re, repr)?, number(im, repr)?))).collect::<Result<_>>()?
                    }
                    Border::Real(v) => {
                        v.iter().map(|re| Ok((number(re, repr)?, DoubleDouble::ZERO))).collect::<Result<_>>()?
                    }
                };
                let alpha = number(need(&self.alpha, "alpha", kind)?, repr)?;
                let zc = z.iter().map(|(re, im)| Complex64::new(re.hi(), im.hi())).collect();
                let c = HermitianArrowhead::new(his(&d), zc, alpha.hi())?;
                Ok(Problem::Hermitian(c.with_extended(HermitianExtended { d, z, alpha })?))
            }
            Kind::NonsymArrowhead => {
                forbid(&self.z, "z", kind)?;
                forbid(&self.u, "u", kind)?;
                forbid(&self.rho, "rho", kind)?;
                let up = numbers(need(&self.z_up, "z_up", kind)?, repr)?;
                let low = numbers(need(&self.z_low, "z_low", kind)?, repr)?;
                let alpha = number(need(&self.alpha, "alpha", kind)?, repr)?;
                let g = NonsymArrowhead::new(his(&d), his(&up), his(&low), alpha.hi())?;
                Ok(Problem::Nonsym(g.with_extended(NonsymExtended { d, z_up: up, z_low: low, alpha })?))
            }
            Kind::Dpr1 => {
                forbid(&self.z, "z", kind)?;
                forbid(&self.z_up, "z_up", kind)?;
                forbid(&self.z_low, "z_low", kind)?;
                forbid(&self.alpha, "alpha", kind)?;
                let u = numbers(need(&self.u, "u", kind)?, repr)?;
                let rho = number(need(&self.rho, "rho", kind)?, repr)?;
                Ok(Problem::Dpr1(Dpr1Matrix::new(his(&d), his(&u), rho.hi())?))
            }
        }
    }
}
