#![allow(dead_code)]

use arrowhead::matrix::{ArrowheadData, ArrowheadMatrix, OrderedArrowhead};
use arrowhead::preprocess::reduce;
use proptest::prelude::*;

pub const EPS: f64 = f64::EPSILON;

/// `+-10^e` with `e` uniform in `[lo, hi)`.
pub fn magnitude(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi, any::<bool>()).prop_map(|(e, neg)| {
        let x = 10f64.powf(e);
        if neg {
            -x
        } else {
            x
        }
    })
}

pub fn arrowhead(max_poles: usize, exp: f64) -> impl Strategy<Value = ArrowheadMatrix> {
    (1..=max_poles)
        .prop_flat_map(move |m| {
            (
                prop::collection::vec(magnitude(-exp, exp), m),
                prop::collection::vec(magnitude(-exp, exp), m),
                magnitude(-exp, exp),
            )
        })
        .prop_map(|(d, z, a)| ArrowheadMatrix::new(d, z, a).unwrap())
}

/// Ordered irreducible matrices; inputs that would deflate are rejected.
pub fn ordered(max_poles: usize, exp: f64) -> impl Strategy<Value = OrderedArrowhead> {
    arrowhead(max_poles, exp).prop_filter_map("deflates", |m| {
        let a = reduce(&m, 0.0, 0.0).ok()?.reduced?;
        (a.dim() == m.dim()).then_some(a)
    })
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest column norm, a lower bound for the 2-norm.
pub fn max_column_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    (0..n).map(|j| (0..n).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt()).fold(0.0, f64::max)
}

pub fn residual(apply: impl Fn(&[f64]) -> Vec<f64>, lambda: f64, v: &[f64]) -> f64 {
    let y = apply(v);
    norm(&y.iter().zip(v).map(|(a, b)| a - lambda * b).collect::<Vec<_>>())
}

/// Largest `|V^T V - I|` entry.
pub fn orthogonality(vs: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate() {
            let s: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            worst = worst.max((s - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}
