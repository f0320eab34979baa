//! Full eigendecomposition of a general arrowhead matrix.

use rayon::prelude::*;

use crate::dd::{two_sum, DoubleDouble};
use crate::error::{Error, Result};
use crate::matrix::{ArrowheadData, ArrowheadMatrix};
use crate::preprocess::{reduce, Reduction};
use crate::refine::{aheig, Diagnostics, RefineConfig};
use crate::solver::EigenPair;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub refine: RefineConfig,
    pub zero_tol: f64,
    pub equal_tol: f64,
    pub parallel: bool,
    pub vectors: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { refine: RefineConfig::default(), zero_tol: 0.0, equal_tol: 0.0, parallel: true, vectors: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairReport {
    /// 0-based position in decreasing order.
    pub index: usize,
    pub lambda: f64,
    pub shift: f64,
    pub mu: f64,
    pub shift_index: Option<usize>,
    pub diagnostics: Option<Diagnostics>,
    pub deflated: bool,
}

impl PairReport {
    /// `shift + mu` without rounding.
    pub fn lambda_dd(&self) -> DoubleDouble {
        two_sum(self.shift, self.mu)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// Eigenvalues in decreasing order.
    pub values: Vec<f64>,
    /// Unit eigenvectors, one per eigenvalue.
    pub vectors: Option<Vec<Vec<f64>>>,
    pub pairs: Vec<PairReport>,
}

impl Decomposition {
    pub fn warnings(&self) -> Vec<(usize, String)> {
        self.pairs
            .iter()
            .filter_map(|p| p.diagnostics.as_ref()?.warning.clone().map(|w| (p.index, w)))
            .collect()
    }
}

/// All eigenpairs of an ordered irreducible matrix, in decreasing order.
pub fn solve_ordered<A: ArrowheadData + ?Sized>(
    a: &A,
    cfg: &RefineConfig,
    parallel: bool,
) -> Result<Vec<(EigenPair, Diagnostics)>> {
    let n = a.dim();
    if parallel {
        (0..n).into_par_iter().map(|k| aheig(a, k, cfg)).collect()
    } else {
        (0..n).map(|k| aheig(a, k, cfg)).collect()
    }
}

struct Item {
    report: PairReport,
    vector: Option<Vec<f64>>,
}

fn assemble(red: &Reduction, solved: Vec<(EigenPair, Diagnostics)>, vectors: bool) -> Result<Vec<Item>> {
    let rec = &red.record;
    let mut items = Vec::with_capacity(rec.n);
    for (pair, diag) in solved {
        let vector = if vectors { Some(rec.backtransform(&pair.vector)?) } else { None };
        let report = PairReport {
            index: 0,
            lambda: pair.lambda,
            shift: pair.shift,
            mu: pair.mu,
            shift_index: pair.shift_index.map(|i| rec.map[i]),
            diagnostics: Some(diag),
            deflated: false,
        };
        items.push(Item { report, vector });
    }
    for d in &rec.deflations {
        let report = PairReport {
            index: 0,
            lambda: d.lambda,
            shift: d.lambda,
            mu: 0.0,
            shift_index: None,
            diagnostics: None,
            deflated: true,
        };
        let vector = if vectors { Some(rec.deflated_vector(d)) } else { None };
        items.push(Item { report, vector });
    }
    items.sort_by(|a, b| b.report.lambda_dd().partial_cmp(&a.report.lambda_dd()).unwrap());
    for (k, it) in items.iter_mut().enumerate() {
        it.report.index = k;
    }
    Ok(items)
}

fn finish(items: Vec<Item>, vectors: bool) -> Decomposition {
    let values = items.iter().map(|i| i.report.lambda).collect();
    let mut vecs = Vec::new();
    let mut pairs = Vec::new();
    for it in items {
        if let Some(v) = it.vector {
            vecs.push(v);
        }
        pairs.push(it.report);
    }
    Decomposition { values, vectors: if vectors { Some(vecs) } else { None }, pairs }
}

/// Eigenvalues and, optionally, eigenvectors of any symmetric arrowhead matrix.
pub fn decompose(m: &ArrowheadMatrix, cfg: &SolverConfig) -> Result<Decomposition> {
    let red = reduce(m, cfg.zero_tol, cfg.equal_tol)?;
    let solved = match &red.reduced {
        Some(a) => solve_ordered(a, &cfg.refine, cfg.parallel)?,
        None => Vec::new(),
    };
    Ok(finish(assemble(&red, solved, cfg.vectors)?, cfg.vectors))
}

/// The k-th eigenpair (0-based, decreasing order) of any symmetric arrowhead matrix.
pub fn eigenpair(m: &ArrowheadMatrix, k: usize, cfg: &SolverConfig) -> Result<(PairReport, Option<Vec<f64>>)> {
    let n = m.dim();
    if k >= n {
        return Err(Error::Input(format!("eigenvalue index {} out of range 1..={n}", k + 1)));
    }
    let red = reduce(m, cfg.zero_tol, cfg.equal_tol)?;
    let items = match (&red.reduced, red.record.deflations.is_empty()) {
        (Some(a), true) => {
            let solved = vec![aheig(a, k, &cfg.refine)?];
            let mut items = assemble(&red, solved, cfg.vectors)?;
            items[0].report.index = k;
            items
        }
        (Some(a), false) => assemble(&red, solve_ordered(a, &cfg.refine, cfg.parallel)?, cfg.vectors)?,
        (None, _) => assemble(&red, Vec::new(), cfg.vectors)?,
    };
    let it = items.into_iter().find(|i| i.report.index == k).expect("index present");
    Ok((it.report, it.vector))
}
