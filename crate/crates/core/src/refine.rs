//! Condition estimates, the doubled-precision `b`, and the remedies used when
//! the target eigenvalue is not extremal after shifting.

use crate::dd::{DoubleDouble, ULP_UNIT};
use crate::dpr1::{dpr1_extreme, phi_root_condition, Dpr1Matrix};
use crate::error::{Error, Result};
use crate::matrix::{ArrowheadData, Shift, Side};
use crate::solver::{
    bisect_extreme, bisect_view, choose_shift, in_interval, interlacing_interval, normalize, pick_eval_working,
    solve_at_pole, unnormalized_vector, EigenPair, Precision,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PrecisionPolicy {
    #[default]
    Auto,
    ForceStandard,
    ForceDoubled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyUsed {
    Standard,
    DoubledB,
    /// Shift moved to the other neighbouring pole.
    RemedyAltPole,
    RemedyInverse,
    RemedySigma,
}

impl PolicyUsed {
    pub fn tag(self) -> &'static str {
        match self {
            PolicyUsed::Standard => "standard",
            PolicyUsed::DoubledB => "doubled-b",
            PolicyUsed::RemedyAltPole => "remedy-alt-pole",
            PolicyUsed::RemedyInverse => "remedy-inverse",
            PolicyUsed::RemedySigma => "remedy-sigma",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineConfig {
    pub policy: PrecisionPolicy,
    /// The zeta ratio gate is `zeta_ratio > zeta_ratio_factor * n`.
    pub zeta_ratio_factor: f64,
    pub kb_threshold: f64,
    pub knu_threshold: f64,
    pub remedies: bool,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            policy: PrecisionPolicy::Auto,
            zeta_ratio_factor: 10.0,
            kb_threshold: 1e3,
            knu_threshold: 1e3,
            remedies: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub k_b: f64,
    /// `K_b` after accounting for the precision `b` was computed in.
    pub k_b_effective: f64,
    pub k_nu: f64,
    /// `K_nu` of the first shift, before any remedy.
    pub k_nu_initial: f64,
    /// Zero unless the shift is a pole.
    pub zeta_ratio: f64,
    /// The shift is a pole rather than a free value.
    pub pole_shift: bool,
    pub quotient_near_zero: f64,
    pub policy_used: PolicyUsed,
    pub b_doubled: bool,
    /// The shifted matrix was exactly singular in doubled precision.
    pub singular: bool,
    pub warning: Option<String>,
}

/// Nonnegative parts of `-(alpha - s) + sum zeta_j^2 / (d_j - s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Split {
    pub p: DoubleDouble,
    pub q: DoubleDouble,
}

impl Split {
    pub fn value(&self) -> DoubleDouble {
        self.p - self.q
    }

    /// `(P + Q) / |P - Q|`, infinite when the parts cancel exactly.
    pub fn condition(&self) -> f64 {
        let diff = self.value();
        if diff.is_zero() {
            f64::INFINITY
        } else {
            ((self.p + self.q) / diff.abs()).to_f64()
        }
    }
}

/// Sign-split accumulation in doubled precision. For a pole shift the pole
/// itself is excluded.
pub fn secular_split<A: ArrowheadData + ?Sized>(a: &A, shift: Shift) -> Split {
    let mut p = DoubleDouble::ZERO;
    let mut q = DoubleDouble::ZERO;
    let neg_a = -a.tip_offset_dd(shift);
    if neg_a.is_sign_negative() {
        q -= neg_a;
    } else {
        p += neg_a;
    }
    for j in 0..a.poles() {
        if matches!(shift, Shift::Pole(i) if i == j) {
            continue;
        }
        let t = a.coupling_sq_dd(j) / a.offset_dd(j, shift);
        if t.is_sign_negative() {
            q -= t;
        } else {
            p += t;
        }
    }
    Split { p, q }
}

pub fn k_b<A: ArrowheadData + ?Sized>(a: &A, i: usize) -> f64 {
    secular_split(a, Shift::Pole(i)).condition()
}

pub fn zeta_ratio<A: ArrowheadData + ?Sized>(a: &A, i: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..a.poles() {
        if j != i {
            s += a.coupling(j).abs();
        }
    }
    s / a.coupling(i).abs()
}

/// `b` of the shifted inverse with `P` and `Q` accumulated separately.
pub fn b_doubled<A: ArrowheadData + ?Sized>(a: &A, i: usize) -> Result<DoubleDouble> {
    let s = secular_split(a, Shift::Pole(i));
    let v = s.value();
    if v.is_zero() {
        return Err(Error::Singular(format!("b at pole {} cancels exactly", i + 1)));
    }
    Ok(v / a.coupling_sq_dd(i))
}

/// `max(|nu_L|, |nu_R|) / |nu|` given the two extremes.
pub fn k_nu_from(nu: f64, nu_l: f64, nu_r: f64) -> f64 {
    nu_l.abs().max(nu_r.abs()) / nu.abs()
}

#[derive(Clone, Debug)]
struct Candidate {
    pair: EigenPair,
    k_nu: f64,
    policy: PolicyUsed,
    k_b: f64,
    k_b_effective: f64,
    zeta_ratio: f64,
    doubled: bool,
    singular: bool,
    /// Cancellation factor in the eigenvector entry of the original pole.
    spread: f64,
    /// Rounding amplification of the secular root when the shift is not a pole.
    root_condition: f64,
}

/// Largest acceptable `|d_i - d_alt| / |lambda - d_i|` for the alternative pole.
const ALT_POLE_SPREAD: f64 = 8.0;

fn solve_gated<A: ArrowheadData + ?Sized>(
    a: &A,
    i: usize,
    side: Side,
    cfg: &RefineConfig,
) -> Result<Candidate> {
    let n = a.dim() as f64;
    let zr = zeta_ratio(a, i);
    let split = secular_split(a, Shift::Pole(i));
    let kb = split.condition();
    let doubled = match cfg.policy {
        PrecisionPolicy::Auto => zr > cfg.zeta_ratio_factor * n && kb > cfg.kb_threshold,
        PrecisionPolicy::ForceStandard => false,
        PrecisionPolicy::ForceDoubled => true,
    };
    let precision = if doubled { Precision::Doubled } else { Precision::Working };
    let sol = solve_at_pole(a, i, side, precision)?;
    let other = bisect_view(&sol.view, side.opposite())?;
    let nu = sol.pair.nu;
    let k_nu = k_nu_from(nu, nu, other);
    Ok(Candidate {
        pair: sol.pair,
        k_nu,
        policy: if doubled { PolicyUsed::DoubledB } else { PolicyUsed::Standard },
        k_b: kb,
        k_b_effective: if doubled { 1.0 + kb * ULP_UNIT } else { kb },
        zeta_ratio: zr,
        doubled,
        singular: doubled && split.value().is_zero(),
        spread: 1.0,
        root_condition: 1.0,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pick {
    /// The eigenvalue adjacent to sigma on the side given by the sign of `f(sigma)`.
    Adjacent,
    /// The eigenvalue nearest to sigma.
    Nearest,
}

fn rho_inverse<A: ArrowheadData + ?Sized>(a: &A, sigma: f64, cfg: &RefineConfig) -> Result<(f64, bool)> {
    let split = secular_split(a, Shift::Value(sigma));
    // remedies promise full accuracy, so any cancellation beyond the n-term sum is lifted
    let doubled = match cfg.policy {
        PrecisionPolicy::Auto => split.condition() > (a.dim() as f64).min(cfg.kb_threshold),
        PrecisionPolicy::ForceStandard => false,
        PrecisionPolicy::ForceDoubled => true,
    };
    // f(sigma) = -(P - Q)
    let f = if doubled { (-split.value()).to_f64() } else { pick_eval_working(a, sigma)? };
    Ok((f, doubled))
}

fn solve_sigma<A: ArrowheadData + ?Sized>(
    a: &A,
    sigma: f64,
    pick: Pick,
    cfg: &RefineConfig,
) -> Result<Candidate> {
    if !sigma.is_finite() {
        return Err(Error::Input("shift must be finite".into()));
    }
    let m = a.poles();
    if (0..m).any(|j| a.pole(j) == sigma) {
        return Err(Error::Input(format!("shift {sigma:e} coincides with a pole")));
    }
    let shift = Shift::Value(sigma);
    let (f, doubled) = rho_inverse(a, sigma, cfg)?;
    let policy = if sigma == 0.0 { PolicyUsed::RemedyInverse } else { PolicyUsed::RemedySigma };
    let k_b = secular_split(a, shift).condition();
    let k_b_effective = if doubled { 1.0 + k_b * ULP_UNIT } else { k_b };
    let zr = 0.0;
    if f == 0.0 {
        let mut vector = unnormalized_vector(a, shift, 0.0);
        normalize(&mut vector);
        let pair = EigenPair {
            lambda: sigma,
            vector,
            shift: sigma,
            shift_index: None,
            mu: 0.0,
            nu: f64::INFINITY,
            side: Side::Right,
        };
        return Ok(Candidate {
            pair,
            k_nu: 1.0,
            policy,
            k_b,
            k_b_effective,
            zeta_ratio: zr,
            doubled,
            singular: true,
            spread: 1.0,
            root_condition: 1.0,
        });
    }
    let mut d = Vec::with_capacity(m + 1);
    let mut u = Vec::with_capacity(m + 1);
    for j in 0..m {
        let off = a.offset(j, shift);
        d.push(1.0 / off);
        u.push(a.coupling(j) / off);
    }
    d.push(0.0);
    u.push(-1.0);
    let dpr1 = Dpr1Matrix { d, u, rho: 1.0 / f };
    let nu_l = dpr1_extreme(&dpr1, Side::Left)?;
    let nu_r = dpr1_extreme(&dpr1, Side::Right)?;
    let side = match pick {
        Pick::Adjacent => {
            if f > 0.0 {
                Side::Right
            } else {
                Side::Left
            }
        }
        Pick::Nearest => {
            if nu_r.abs() >= nu_l.abs() {
                Side::Right
            } else {
                Side::Left
            }
        }
    };
    let nu = if side == Side::Right { nu_r } else { nu_l };
    let mu = 1.0 / nu;
    let mut vector = unnormalized_vector(a, shift, mu);
    normalize(&mut vector);
    let root_condition = phi_root_condition(&dpr1, nu);
    let pair = EigenPair { lambda: sigma + mu, vector, shift: sigma, shift_index: None, mu, nu, side };
    Ok(Candidate {
        pair,
        k_nu: k_nu_from(nu, nu_l, nu_r),
        policy,
        k_b,
        k_b_effective,
        zeta_ratio: zr,
        doubled,
        singular: false,
        spread: 1.0,
        root_condition,
    })
}

fn quotient(pair: &EigenPair) -> f64 {
    (pair.shift.abs() + pair.mu.abs()) / pair.lambda.abs()
}

fn finish(c: Candidate, k_nu_initial: f64, warning: Option<String>) -> (EigenPair, Diagnostics) {
    let diag = Diagnostics {
        k_b: c.k_b,
        k_b_effective: c.k_b_effective,
        k_nu: c.k_nu,
        k_nu_initial,
        zeta_ratio: c.zeta_ratio,
        pole_shift: c.pair.shift_index.is_some(),
        quotient_near_zero: quotient(&c.pair),
        policy_used: c.policy,
        b_doubled: c.doubled,
        singular: c.singular,
        warning,
    };
    (c.pair, diag)
}

/// Remedy used for the eigenvalue nearest zero: invert `A` itself, or shift to
/// the pole at zero when there is one.
fn inverse_candidate<A: ArrowheadData + ?Sized>(a: &A, k: usize, cfg: &RefineConfig) -> Option<Candidate> {
    let m = a.poles();
    if let Some(p) = (0..m).find(|&j| a.pole(j) == 0.0) {
        let side = if p == k {
            Side::Right
        } else if p + 1 == k {
            Side::Left
        } else {
            return None;
        };
        let mut c = solve_gated(a, p, side, cfg).ok()?;
        c.policy = PolicyUsed::RemedyInverse;
        return Some(c);
    }
    solve_sigma(a, 0.0, Pick::Adjacent, cfg).ok()
}

/// Shift near the current estimate, kept strictly inside interval `k` and away
/// from both the poles and the estimate itself.
fn choose_sigma<A: ArrowheadData + ?Sized>(a: &A, k: usize, estimate: f64) -> Option<f64> {
    let n = a.dim();
    let (lo, hi) = interlacing_interval(a, k);
    let inside = |x: f64| x > lo && x < hi;
    let est = if estimate.is_finite() && inside(estimate) {
        estimate
    } else if k == 0 || k == n - 1 {
        let d: Vec<f64> = (0..a.poles()).map(|j| a.pole(j)).collect();
        let z: Vec<f64> = (0..a.poles()).map(|j| a.coupling(j)).collect();
        let side = if k == 0 { Side::Right } else { Side::Left };
        let x = bisect_extreme(&d, &z, a.tip(), side).ok()?;
        if inside(x) {
            x
        } else {
            return None;
        }
    } else {
        lo / 2.0 + hi / 2.0
    };
    let below = est - lo;
    let above = hi - est;
    let g = below.min(above);
    let ulp4 = 4.0 * (est.abs() * ULP_UNIT).max(f64::MIN_POSITIVE);
    let delta = (g * 2f64.powi(-20)).max(ulp4).min(g / 2.0);
    let sigma = if below <= above { est + delta } else { est - delta };
    if inside(sigma) && sigma != est {
        Some(sigma)
    } else {
        None
    }
}

/// The k-th eigenpair (0-based, decreasing order) with gated precision and remedies.
pub fn aheig<A: ArrowheadData + ?Sized>(a: &A, k: usize, cfg: &RefineConfig) -> Result<(EigenPair, Diagnostics)> {
    let n = a.dim();
    if k >= n {
        return Err(Error::Input(format!("eigenvalue index {} out of range 1..={n}", k + 1)));
    }
    let (i, side) = choose_shift(a, k);
    let first = solve_gated(a, i, side, cfg)?;
    let k_nu_initial = first.k_nu;
    let mut warnings = Vec::new();
    if first.doubled && first.k_b * ULP_UNIT >= 1.0 {
        warnings.push(format!("K_b = {:e} is beyond doubled precision", first.k_b));
    }
    // Forcing working precision reproduces the basic algorithm, so no remedies.
    if !cfg.remedies || cfg.policy == PrecisionPolicy::ForceStandard {
        if first.k_nu > cfg.knu_threshold {
            warnings.push(format!("K_nu = {:e} exceeds {:e}", first.k_nu, cfg.knu_threshold));
        }
        return Ok(finish(first, k_nu_initial, join(warnings)));
    }

    let mut best = first;
    let d_i = best.pair.shift;
    let mu = best.pair.mu;
    let mismatch = d_i != 0.0 && mu != 0.0 && (d_i < 0.0) != (mu < 0.0);
    if mismatch && quotient(&best.pair) > 3.0 {
        if let Some(c) = inverse_candidate(a, k, cfg) {
            // the inverse can cancel worse than the shift it replaces
            if in_interval(a, k, c.pair.lambda_dd()) && c.root_condition < quotient(&best.pair) {
                best = c;
            }
        }
    }

    if best.k_nu > cfg.knu_threshold {
        let acceptable = |c: &Candidate| {
            c.k_nu <= cfg.knu_threshold && quotient(&c.pair) <= 3.0 && c.spread <= ALT_POLE_SPREAD
        };
        let mut cands: Vec<Candidate> = Vec::new();
        if k > 0 && k < n - 1 {
            if let Some(shift_index) = best.pair.shift_index {
                let alt = match best.pair.side {
                    Side::Right => (shift_index - 1, Side::Left),
                    Side::Left => (shift_index + 1, Side::Right),
                };
                if let Ok(mut c) = solve_gated(a, alt.0, alt.1, cfg) {
                    if in_interval(a, k, c.pair.lambda_dd()) {
                        let gap = (a.pole(shift_index) - a.pole(alt.0)).abs();
                        c.spread = gap / (c.pair.lambda - a.pole(shift_index)).abs();
                        c.policy = PolicyUsed::RemedyAltPole;
                        cands.push(c);
                    }
                }
            }
        }
        if !cands.iter().any(acceptable) {
            // Later rounds shift closer to the improved estimate.
            let mut estimate = best.pair.lambda;
            for _ in 0..3 {
                let Some(sigma) = choose_sigma(a, k, estimate) else { break };
                let Ok(mut c) = solve_sigma(a, sigma, Pick::Adjacent, cfg) else { break };
                if !in_interval(a, k, c.pair.lambda_dd()) {
                    break;
                }
                c.policy = PolicyUsed::RemedySigma;
                estimate = c.pair.lambda;
                let close = c.pair.mu.abs() <= 2f64.powi(-16) * c.pair.lambda.abs();
                let done = acceptable(&c) && close;
                cands.push(c);
                if done {
                    break;
                }
            }
        }
        if let Some(c) = cands.iter().rev().find(|c| acceptable(c)) {
            best = c.clone();
        } else {
            for c in cands {
                if c.k_nu < best.k_nu {
                    best = c;
                }
            }
        }
        if best.k_nu > cfg.knu_threshold {
            warnings.push(format!("K_nu = {:e} exceeds {:e} after remedies", best.k_nu, cfg.knu_threshold));
        }
    }
    Ok(finish(best, k_nu_initial, join(warnings)))
}

fn join(w: Vec<String>) -> Option<String> {
    if w.is_empty() {
        None
    } else {
        Some(w.join("; "))
    }
}

/// The eigenvalue of smallest magnitude, from the inverse of `A` (or of the
/// shift to a zero pole).
pub fn nearest_zero_eig<A: ArrowheadData + ?Sized>(a: &A, cfg: &RefineConfig) -> Result<(EigenPair, Diagnostics)> {
    let m = a.poles();
    if let Some(p) = (0..m).find(|&j| a.pole(j) == 0.0) {
        let n = a.dim() as f64;
        let zr = zeta_ratio(a, p);
        let split = secular_split(a, Shift::Pole(p));
        let kb = split.condition();
        let doubled = match cfg.policy {
            PrecisionPolicy::Auto => zr > cfg.zeta_ratio_factor * n && kb > cfg.kb_threshold,
            PrecisionPolicy::ForceStandard => false,
            PrecisionPolicy::ForceDoubled => true,
        };
        let precision = if doubled { Precision::Doubled } else { Precision::Working };
        let sol = solve_at_pole(a, p, Side::Right, precision)?;
        let nu_r = sol.pair.nu;
        let nu_l = bisect_view(&sol.view, Side::Left)?;
        let sol = if nu_l.abs() > nu_r.abs() { solve_at_pole(a, p, Side::Left, precision)? } else { sol };
        let c = Candidate {
            k_nu: k_nu_from(sol.pair.nu, nu_l, nu_r),
            pair: sol.pair,
            policy: PolicyUsed::RemedyInverse,
            k_b: kb,
            k_b_effective: if doubled { 1.0 + kb * ULP_UNIT } else { kb },
            zeta_ratio: zr,
            doubled,
            singular: false,
            spread: 1.0,
            root_condition: 1.0,
        };
        let k0 = c.k_nu;
        return Ok(finish(c, k0, None));
    }
    let c = solve_sigma(a, 0.0, Pick::Nearest, cfg)?;
    let k0 = c.k_nu;
    Ok(finish(c, k0, None))
}

/// Eigenvalue in interval `k` from the inverse of `A - sigma I`.
pub fn remedy_sigma<A: ArrowheadData + ?Sized>(
    a: &A,
    k: usize,
    sigma: f64,
    cfg: &RefineConfig,
) -> Result<(EigenPair, Diagnostics)> {
    if k >= a.dim() {
        return Err(Error::Input(format!("eigenvalue index {} out of range", k + 1)));
    }
    let c = solve_sigma(a, sigma, Pick::Adjacent, cfg)?;
    let k0 = c.k_nu;
    let warning = if in_interval(a, k, c.pair.lambda_dd()) {
        None
    } else {
        Some(format!("shift {sigma:e} does not lie next to eigenvalue {}", k + 1))
    };
    Ok(finish(c, k0, warning))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::OrderedArrowhead;

    fn example3() -> OrderedArrowhead {
        OrderedArrowhead::new(vec![1e10, 4.0, 3.0, 2.0, 1.0], vec![1e10, 1.0, 1.0, 1.0, 1.0], 1e10).unwrap()
    }

    #[test]
    fn two_by_two_condition_is_one() {
        let a = OrderedArrowhead::new(vec![5.0], vec![2.0], 1.0).unwrap();
        assert_eq!(k_b(&a, 0), 1.0);
        assert_eq!(zeta_ratio(&a, 0), 0.0);
        assert_eq!(b_doubled(&a, 0).unwrap(), DoubleDouble::ONE);
    }

    #[test]
    fn example3_b() {
        let b = b_doubled(&example3(), 1).unwrap().to_f64();
        assert_eq!(b, 6.166666668266667);
        assert!((zeta_ratio(&example3(), 1) - 1.0000000003e10).abs() < 1.0);
    }

    #[test]
    fn exact_cancellation_is_singular() {
        // a = 1, single other term 1/(3-2) = 1
        let a = OrderedArrowhead::new(vec![3.0, 2.0], vec![1.0, 1.0], 3.0).unwrap();
        assert!(matches!(b_doubled(&a, 1), Err(Error::Singular(_))));
        assert_eq!(k_b(&a, 1), f64::INFINITY);
    }

    #[test]
    fn symmetric_spectrum_nearest_zero() {
        let a = OrderedArrowhead::new(vec![1.0, -1.0], vec![1.0, 1.0], 0.0).unwrap();
        let (p, d) = nearest_zero_eig(&a, &RefineConfig::default()).unwrap();
        assert_eq!(p.lambda, 0.0);
        assert!(d.singular);
        // [1/(1-0), 1/(-1-0), -1] normalized
        let e = 1.0 / 3f64.sqrt();
        assert!((p.vector[0] - e).abs() < 1e-15 && (p.vector[1] + e).abs() < 1e-15);
    }

    #[test]
    fn sigma_on_pole_is_rejected() {
        let a = OrderedArrowhead::new(vec![2.0, 1.0], vec![1.0, 1.0], 0.0).unwrap();
        assert!(remedy_sigma(&a, 0, 2.0, &RefineConfig::default()).is_err());
    }

    #[test]
    fn example3_gate() {
        let a = example3();
        let (p, d) = aheig(&a, 5, &RefineConfig::default()).unwrap();
        assert!((p.lambda + 7.160346250991725e-1).abs() <= 1.2e-16, "{}", p.lambda);
        // d_5 = 1 > 0 with mu < 0 and quotient about 3.8: the eigenvalue nearest zero
        assert_eq!(d.policy_used, PolicyUsed::RemedyInverse);
        let (p2, d2) = aheig(&a, 4, &RefineConfig::default()).unwrap();
        assert_eq!(d2.policy_used, PolicyUsed::DoubledB);
        assert_eq!(p2.lambda, 1.2160935849485794);
        let cfg = RefineConfig { policy: PrecisionPolicy::ForceStandard, ..Default::default() };
        let (p, _) = aheig(&a, 5, &cfg).unwrap();
        assert!((p.lambda + 7.160348702977373e-1).abs() < 1e-10);
    }

    #[test]
    fn policy_tags() {
        assert_eq!(PolicyUsed::DoubledB.tag(), "doubled-b");
        assert_eq!(PolicyUsed::RemedySigma.tag(), "remedy-sigma");
    }
}
