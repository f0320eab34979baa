//! The `aheig` command line tool.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::apps::{
    hermitian_decompose, hermitian_eig, nonsym_decompose, nonsym_eig, triangular_svd, triangular_svd_all,
    SvdTriplet,
};
use crate::check;
use crate::decomp::{decompose, eigenpair, PairReport, SolverConfig};
use crate::dpr1::{Dpr1Pair, Dpr1Solver};
use crate::error::{Error, Result};
use crate::gen::{generate, Family};
use crate::oracle::ToleranceModel;
use crate::problem::{InputRepr, Problem, ProblemFile};
use crate::refine::{Diagnostics, PrecisionPolicy, RefineConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_WARNING: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "aheig", version, about = "Eigenvalues of arrowhead matrices to high relative accuracy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenpairs of a symmetric, Hermitian or nonsymmetric arrowhead matrix.
    Eig(SolveArgs),
    /// Singular triplets of an upper triangular arrowhead matrix.
    Svd(SolveArgs),
    /// Eigenpairs of a diagonal plus rank-one matrix `D + u u^T`.
    Dpr1(SolveArgs),
    /// Run the acceptance checks.
    Check {
        /// `all`, a criterion number 1-8, or a check name.
        #[arg(default_value = "all")]
        target: String,
    },
    /// Write a random arrowhead problem file to stdout.
    Gen {
        /// well-conditioned, huge-tip, clustered, cancellation, log-uniform or example4.
        family: String,
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Problem file.
    file: PathBuf,
    /// Single 1-based index in decreasing order.
    #[arg(long, conflicts_with = "all")]
    k: Option<usize>,
    /// All pairs (the default).
    #[arg(long)]
    all: bool,
    /// Print vectors.
    #[arg(long)]
    vectors: bool,
    #[arg(long, value_enum, default_value_t = PolicyArg::Auto)]
    policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = ReprArg::Decimal)]
    input_repr: ReprArg,
    #[arg(long, default_value_t = 1e3)]
    threshold_kb: f64,
    #[arg(long, default_value_t = 1e3)]
    threshold_knu: f64,
    /// Multiplier `c` in the gate `zeta_ratio > c n`.
    #[arg(long, default_value_t = 10.0)]
    zeta_ratio_factor: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Auto,
    ForceStandard,
    ForceDoubled,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReprArg {
    Decimal,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl SolveArgs {
    fn config(&self) -> Result<SolverConfig> {
        for (name, v) in [
            ("threshold-kb", self.threshold_kb),
            ("threshold-knu", self.threshold_knu),
            ("zeta-ratio-factor", self.zeta_ratio_factor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Input(format!("--{name} must be positive, got {v}")));
            }
        }
        let policy = match self.policy {
            PolicyArg::Auto => PrecisionPolicy::Auto,
            PolicyArg::ForceStandard => PrecisionPolicy::ForceStandard,
            PolicyArg::ForceDoubled => PrecisionPolicy::ForceDoubled,
        };
        let refine = RefineConfig {
            policy,
            zeta_ratio_factor: self.zeta_ratio_factor,
            kb_threshold: self.threshold_kb,
            knu_threshold: self.threshold_knu,
            ..Default::default()
        };
        Ok(SolverConfig { refine, vectors: self.vectors, ..Default::default() })
    }

    fn repr(&self) -> InputRepr {
        match self.input_repr {
            ReprArg::Decimal => InputRepr::Decimal,
            ReprArg::Binary => InputRepr::Binary,
        }
    }

    fn index(&self, n: usize) -> Result<Option<usize>> {
        match self.k {
            None => Ok(None),
            Some(k) if (1..=n).contains(&k) => Ok(Some(k - 1)),
            Some(k) => Err(Error::Input(format!("--k {k} out of range 1..={n}"))),
        }
    }

    fn load(&self) -> Result<Problem> {
        let text = std::fs::read_to_string(&self.file)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", self.file.display())))?;
        ProblemFile::parse(&text)?.to_problem(self.repr())
    }
}

#[derive(Serialize, Debug)]
struct DiagReport {
    policy_used: &'static str,
    k_b: f64,
    k_b_effective: f64,
    k_nu: f64,
    k_nu_initial: f64,
    zeta_ratio: f64,
    b_doubled: bool,
    singular: bool,
    kappa_lambda_bound: f64,
    kappa_mu_bound: f64,
    eigvec_component_bound: f64,
}

impl DiagReport {
    fn new(n: usize, d: &Diagnostics) -> DiagReport {
        let tm = ToleranceModel::for_diagnostics(n, d);
        DiagReport {
            policy_used: d.policy_used.tag(),
            k_b: d.k_b,
            k_b_effective: d.k_b_effective,
            k_nu: d.k_nu,
            k_nu_initial: d.k_nu_initial,
            zeta_ratio: d.zeta_ratio,
            b_doubled: d.b_doubled,
            singular: d.singular,
            kappa_lambda_bound: tm.kappa_lambda_bound,
            kappa_mu_bound: tm.kappa_mu_bound,
            eigvec_component_bound: tm.eigvec_component_bound,
        }
    }
}

#[derive(Serialize, Debug)]
#[serde(untagged)]
enum VectorOut {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

#[derive(Serialize, Debug)]
struct PairOut {
    /// 1-based.
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    lambda: f64,
    /// `shift + mu` to 32 digits.
    lambda_dd: String,
    shift: f64,
    mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    shift_pole: Option<usize>,
    deflated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<DiagReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vector: Option<VectorOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    left_vector: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

#[derive(Serialize, Debug)]
struct Report {
    kind: &'static str,
    n: usize,
    pairs: Vec<PairOut>,
}

impl Report {
    fn warnings(&self) -> impl Iterator<Item = (usize, &str)> {
        self.pairs.iter().filter_map(|p| p.warning.as_deref().map(|w| (p.k, w)))
    }
}

fn pair_out(n: usize, p: &PairReport, vector: Option<VectorOut>) -> PairOut {
    PairOut {
        k: p.index + 1,
        sigma: None,
        lambda: p.lambda,
        lambda_dd: p.lambda_dd().to_sci_string(32),
        shift: p.shift,
        mu: p.mu,
        shift_pole: p.shift_index.map(|i| i + 1),
        deflated: p.deflated,
        diagnostics: p.diagnostics.as_ref().map(|d| DiagReport::new(n, d)),
        vector,
        left_vector: None,
        warning: p.diagnostics.as_ref().and_then(|d| d.warning.clone()),
    }
}

fn complex_out(v: Vec<Complex64>) -> VectorOut {
    VectorOut::Complex(v.into_iter().map(|c| [c.re, c.im]).collect())
}

fn eig_report(args: &SolveArgs, problem: Problem) -> Result<Report> {
    let cfg = args.config()?;
    let kind = problem.kind().name();
    let (n, pairs) = match problem {
        Problem::Arrowhead(m) => {
            let n = m.dim();
            let pairs = match args.index(n)? {
                Some(k) => {
                    let (p, v) = eigenpair(&m, k, &cfg)?;
                    vec![pair_out(n, &p, v.map(VectorOut::Real))]
                }
                None => {
                    let d = decompose(&m, &cfg)?;
                    let mut vs = d.vectors.map(|v| v.into_iter());
                    d.pairs.iter().map(|p| pair_out(n, p, vs.as_mut().and_then(|i| i.next()).map(VectorOut::Real))).collect()
                }
            };
            (n, pairs)
        }
        Problem::Hermitian(c) => {
            let n = c.dim();
            let pairs = match args.index(n)? {
                Some(k) => {
                    let (p, v) = hermitian_eig(&c, k, &cfg)?;
                    vec![pair_out(n, &p, v.map(complex_out))]
                }
                None => {
                    let d = hermitian_decompose(&c, &cfg)?;
                    let mut vs = d.vectors.map(|v| v.into_iter());
                    d.pairs.iter().map(|p| pair_out(n, p, vs.as_mut().and_then(|i| i.next()).map(complex_out))).collect()
                }
            };
            (n, pairs)
        }
        Problem::Nonsym(g) => {
            let n = g.dim();
            let pairs = match args.index(n)? {
                Some(k) => {
                    let (p, v) = nonsym_eig(&g, k, &cfg)?;
                    vec![pair_out(n, &p, v.map(VectorOut::Real))]
                }
                None => {
                    let d = nonsym_decompose(&g, &cfg)?;
                    let mut vs = d.vectors.map(|v| v.into_iter());
                    d.pairs.iter().map(|p| pair_out(n, p, vs.as_mut().and_then(|i| i.next()).map(VectorOut::Real))).collect()
                }
            };
            (n, pairs)
        }
        Problem::Triangular(_) => return Err(Error::Input("triangular-arrowhead files are solved by `svd`".into())),
        Problem::Dpr1(_) => return Err(Error::Input("dpr1 files are solved by `dpr1`".into())),
    };
    Ok(Report { kind, n, pairs })
}

fn triplet_out(n: usize, k: usize, t: SvdTriplet, vectors: bool) -> PairOut {
    PairOut {
        k: k + 1,
        sigma: Some(t.sigma),
        lambda: t.lambda.to_f64(),
        lambda_dd: t.lambda.to_sci_string(32),
        shift: t.lambda.hi(),
        mu: t.lambda.lo(),
        shift_pole: None,
        deflated: false,
        diagnostics: t.diagnostics.as_ref().map(|d| DiagReport::new(n, d)),
        vector: vectors.then_some(VectorOut::Real(t.v)),
        left_vector: vectors.then_some(t.u),
        warning: t.warning,
    }
}

fn svd_report(args: &SolveArgs, problem: Problem) -> Result<Report> {
    let Problem::Triangular(b) = problem else {
        return Err(Error::Input(format!("`svd` needs a triangular-arrowhead file, got {}", problem.kind().name())));
    };
    let cfg = args.config()?;
    let n = b.dim();
    let pairs = match args.index(n)? {
        Some(k) => vec![triplet_out(n, k, triangular_svd(&b, k, &cfg)?, args.vectors)],
        None => triangular_svd_all(&b, &cfg)?
            .into_iter()
            .enumerate()
            .map(|(k, t)| triplet_out(n, k, t, args.vectors))
            .collect(),
    };
    Ok(Report { kind: "triangular-arrowhead", n, pairs })
}

fn dpr1_out(n: usize, k: usize, p: Dpr1Pair, vectors: bool) -> PairOut {
    PairOut {
        k: k + 1,
        sigma: None,
        lambda: p.lambda,
        lambda_dd: crate::dd::DoubleDouble::from_f64(p.lambda).to_sci_string(32),
        shift: p.lambda,
        mu: 0.0,
        shift_pole: None,
        deflated: false,
        warning: p.diagnostics.as_ref().and_then(|d| d.warning.clone()),
        diagnostics: p.diagnostics.as_ref().map(|d| DiagReport::new(n, d)),
        vector: vectors.then_some(VectorOut::Real(p.q)),
        left_vector: None,
    }
}

fn dpr1_report(args: &SolveArgs, problem: Problem) -> Result<Report> {
    let Problem::Dpr1(m) = problem else {
        return Err(Error::Input(format!("`dpr1` needs a dpr1 file, got {}", problem.kind().name())));
    };
    let cfg = args.config()?;
    let s = Dpr1Solver::new(&m)?;
    let n = s.dim();
    let ks: Vec<usize> = match args.index(n)? {
        Some(k) => vec![k],
        None => (0..n).collect(),
    };
    let pairs = ks
        .into_par_iter()
        .map(|k| Ok(dpr1_out(n, k, s.solve(k, &cfg.refine)?, args.vectors)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report { kind: "dpr1", n, pairs })
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(out: &mut dyn Write, r: &Report) -> std::io::Result<()> {
    writeln!(out, "# {} n={}", r.kind, r.n)?;
    let value = if r.pairs.iter().any(|p| p.sigma.is_some()) { "sigma" } else { "lambda" };
    writeln!(
        out,
        "{:>5}  {value:<24} {:<24} {:<24} {:<16} {:>10} {:>10}",
        "k", "shift", "mu", "policy", "K_b", "K_nu"
    )?;
    for p in &r.pairs {
        let (policy, kb, knu) = match &p.diagnostics {
            Some(d) => (d.policy_used, format!("{:.3e}", d.k_b), format!("{:.3e}", d.k_nu)),
            None if p.deflated => ("deflated", "-".into(), "-".into()),
            None => ("-", "-".into(), "-".into()),
        };
        let v = p.sigma.unwrap_or(p.lambda);
        writeln!(out, "{:>5}  {:<24} {:<24} {:<24} {policy:<16} {kb:>10} {knu:>10}", p.k, num(v), num(p.shift), num(p.mu))?;
    }
    for p in &r.pairs {
        if let Some(v) = &p.vector {
            let items: Vec<String> = match v {
                VectorOut::Real(x) => x.iter().map(|&c| num(c)).collect(),
                VectorOut::Complex(x) => x.iter().map(|c| format!("({} {})", num(c[0]), num(c[1]))).collect(),
            };
            writeln!(out, "v{} = [{}]", p.k, items.join(", "))?;
        }
        if let Some(u) = &p.left_vector {
            let items: Vec<String> = u.iter().map(|&c| num(c)).collect();
            writeln!(out, "u{} = [{}]", p.k, items.join(", "))?;
        }
    }
    Ok(())
}

fn emit(out: &mut dyn Write, err: &mut dyn Write, r: &Report, format: Format) -> Result<i32> {
    let io = |e: std::io::Error| Error::Internal(format!("write failed: {e}"));
    match format {
        Format::Text => write_text(out, r).map_err(io)?,
        Format::Json => {
            let s = serde_json::to_string_pretty(r).map_err(|e| Error::Internal(e.to_string()))?;
            writeln!(out, "{s}").map_err(io)?;
        }
    }
    let mut code = EXIT_OK;
    for (k, w) in r.warnings() {
        writeln!(err, "warning: pair {k}: {w}").map_err(io)?;
        code = EXIT_WARNING;
    }
    Ok(code)
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let io = |e: std::io::Error| Error::Internal(format!("write failed: {e}"));
    match cli.command {
        Command::Eig(a) => {
            let r = eig_report(&a, a.load()?)?;
            emit(out, err, &r, a.format)
        }
        Command::Svd(a) => {
            let r = svd_report(&a, a.load()?)?;
            emit(out, err, &r, a.format)
        }
        Command::Dpr1(a) => {
            let r = dpr1_report(&a, a.load()?)?;
            emit(out, err, &r, a.format)
        }
        Command::Check { target } => {
            let mut code = EXIT_OK;
            for o in check::run(&target)? {
                writeln!(out, "{}", o.line()).map_err(io)?;
                if !o.passed {
                    code = EXIT_WARNING;
                }
            }
            Ok(code)
        }
        Command::Gen { family, n, seed } => {
            let f: Family = family.parse()?;
            let m = generate(f, n, seed)?;
            let file = ProblemFile::from_problem(&Problem::Arrowhead(m));
            write!(out, "{}", file.to_canonical()).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("aheig").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_INPUT);
        assert_eq!(run_str(&["eig"]).0, EXIT_INPUT);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_file_is_input_error() {
        let (code, _, err) = run_str(&["eig", "/nonexistent/problem.json"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("cannot read"));
    }

    #[test]
    fn gen_writes_canonical_file() {
        let (code, out, _) = run_str(&["gen", "well-conditioned", "4", "--seed", "9"]);
        assert_eq!(code, EXIT_OK);
        let f = ProblemFile::parse(&out).unwrap();
        assert_eq!(f.to_canonical(), out);
        assert_eq!(run_str(&["gen", "nope", "4"]).0, EXIT_INPUT);
        assert_eq!(run_str(&["gen", "example4", "1"]).0, EXIT_INPUT);
    }

    #[test]
    fn unknown_check_is_input_error() {
        assert_eq!(run_str(&["check", "nope"]).0, EXIT_INPUT);
    }
}
