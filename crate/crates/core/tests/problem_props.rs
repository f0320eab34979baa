use arrowhead::dd::DoubleDouble;
use arrowhead::dpr1::Dpr1Matrix;
use arrowhead::matrix::ArrowheadMatrix;
use arrowhead::problem::{format_number, Border, InputRepr, Kind, Problem, ProblemFile, FORMAT_VERSION};
use proptest::prelude::*;

fn number() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::ZERO
}

fn decimal() -> impl Strategy<Value = String> {
    (-999_999_999i64..999_999_999, 0u32..40, -30i32..30).prop_map(|(m, frac, e)| {
        let s = m.to_string();
        let (sign, digits) = s.strip_prefix('-').map_or(("", s.as_str()), |r| ("-", r));
        let cut = (frac as usize).min(digits.len());
        let (a, b) = digits.split_at(digits.len() - cut);
        let a = if a.is_empty() { "0" } else { a };
        if b.is_empty() {
            format!("{sign}{a}e{e}")
        } else {
            format!("{sign}{a}.{b}e{e}")
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn arrowhead_files_round_trip(d in prop::collection::vec(number(), 1..6), z in prop::collection::vec(number(), 6), alpha in number()) {
        let z = z[..d.len()].to_vec();
        let p = Problem::Arrowhead(ArrowheadMatrix::new(d, z, alpha).unwrap());
        let f = ProblemFile::from_problem(&p);
        let text = f.to_canonical();
        let back = ProblemFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(back.to_canonical(), text);
        let Problem::Arrowhead(m) = back.to_problem(InputRepr::Binary).unwrap() else { unreachable!() };
        let Problem::Arrowhead(orig) = p else { unreachable!() };
        prop_assert_eq!((&m.d, &m.z, m.alpha.to_bits()), (&orig.d, &orig.z, orig.alpha.to_bits()));
    }

    #[test]
    fn numbers_print_shortest(x in number()) {
        prop_assert_eq!(format_number(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn decimal_promotion_keeps_the_tail(s in decimal()) {
        let f = ProblemFile {
            version: FORMAT_VERSION,
            kind: Kind::Arrowhead,
            d: vec![s.clone()],
            z: Some(Border::Real(vec!["1".into()])),
            z_up: None,
            z_low: None,
            u: None,
            alpha: Some(s.clone()),
            rho: None,
        };
        let want = DoubleDouble::from_decimal_str(&s).unwrap();
        let Problem::Arrowhead(m) = f.to_problem(InputRepr::Decimal).unwrap() else { unreachable!() };
        let ext = m.ext.as_ref().unwrap();
        prop_assert_eq!(ext.alpha, want);
        prop_assert_eq!(ext.d[0], want);
        prop_assert_eq!(m.alpha, want.hi());
        let Problem::Arrowhead(b) = f.to_problem(InputRepr::Binary).unwrap() else { unreachable!() };
        let e = b.ext.as_ref().unwrap();
        prop_assert_eq!(e.alpha.hi(), s.parse::<f64>().unwrap());
        prop_assert_eq!(e.alpha.lo(), 0.0);
    }

    #[test]
    fn dpr1_files_round_trip(d in prop::collection::vec(-1e3..1e3f64, 1..6), u in prop::collection::vec(number(), 6), rho in 0.1..4.0f64) {
        let u = u[..d.len()].to_vec();
        let p = Problem::Dpr1(Dpr1Matrix::new(d, u, rho).unwrap());
        let f = ProblemFile::parse(&ProblemFile::from_problem(&p).to_canonical()).unwrap();
        prop_assert_eq!(f.to_problem(InputRepr::Binary).unwrap(), p);
    }
}
