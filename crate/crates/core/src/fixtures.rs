//! Built-in test matrices.

use crate::matrix::{ArrowheadMatrix, OrderedArrowhead};

/// Huge tip with tiny poles, including a zero pole.
pub fn example1() -> OrderedArrowhead {
    let m = ArrowheadMatrix::from_decimal(
        &["2e-3", "1e-7", "0", "-1e-7", "-2e-3"],
        &["1e7", "1e7", "1", "1e7", "1e7"],
        "1e20",
    )
    .expect("valid fixture");
    OrderedArrowhead::from_matrix(m).expect("ordered fixture")
}

/// Poles `1 + k eps` for k = 4..1, built from the runtime machine epsilon.
pub fn example2() -> OrderedArrowhead {
    let e = f64::EPSILON;
    let d = vec![1.0 + 4.0 * e, 1.0 + 3.0 * e, 1.0 + 2.0 * e, 1.0 + e];
    OrderedArrowhead::new(d, vec![1.0, 2.0, 3.0, 4.0], 0.0).expect("ordered fixture")
}

/// Cancellation in the inverse element `b`.
pub fn example3() -> OrderedArrowhead {
    OrderedArrowhead::new(vec![1e10, 4.0, 3.0, 2.0, 1.0], vec![1e10, 1.0, 1.0, 1.0, 1.0], 1e10)
        .expect("ordered fixture")
}

/// The 2x2 exchange matrix `[[0, 1], [1, 0]]`.
pub fn exchange() -> OrderedArrowhead {
    OrderedArrowhead::new(vec![0.0], vec![1.0], 0.0).expect("ordered fixture")
}

/// Tip of the physical example.
pub const EXAMPLE4_ALPHA: f64 = 9.7949881500060375e14;
pub const EXAMPLE4_D_RANGE: (f64, f64) = (5.87e14, 1.38e15);
pub const EXAMPLE4_Z_RANGE: (f64, f64) = (1.05e4, 1.10e7);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ArrowheadData;

    #[test]
    fn fixtures_are_ordered() {
        assert_eq!(example1().dim(), 6);
        assert_eq!(example2().pole(3), 1.0 + f64::EPSILON);
        assert_eq!(example3().tip(), 1e10);
        assert_eq!(exchange().dim(), 2);
    }
}
