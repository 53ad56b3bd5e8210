//! Exact event probabilities in natural-log space, the scalar functions
//! q and f, the constant lambda, the energy and entropy bounds, scale
//! parameters and the assembled multi-scale union lower bound.
//!
//! Everything arithmetic here stays in log space: products of event
//! probabilities become sums and disjoint unions become log-sum-exp, so the
//! bounds stay finite at probabilities far below 64-bit underflow.

use serde::Serialize;
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::events::{ScheduleFamily, Segment};
use crate::events::GrowthSchedule;
use crate::exec;

/// lambda = pi^2 / 6, the diagonal-growth integral for the modified model.
pub const LAMBDA: f64 = PI * PI / 6.0;

/// The classical-model analogue pi^2 / 18, kept for comparison output only;
/// no classical bound machinery is built on it.
pub const CLASSICAL_LAMBDA: f64 = PI * PI / 18.0;

/// Default second-order constant used by the closed forms.
pub const DEFAULT_C: f64 = 1.0 / 300.0;

/// Natural-log probability. Values are <= 0, with -inf for probability zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct LogProb(f64);

impl LogProb {
    pub const ONE: LogProb = LogProb(0.0);
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);

    /// Wraps a log-space value. Tiny positive values (float fuzz from sums
    /// of exact parts) clamp to zero; anything else positive is rejected.
    pub fn new(value: f64) -> Result<LogProb> {
        if value.is_nan() || value > 1e-9 {
            return Err(Error::InvalidProbability {
                p: value,
                range: "log-space (-inf, 0]",
            });
        }
        Ok(LogProb(value.min(0.0)))
    }

    pub fn from_prob(p: f64) -> Result<LogProb> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidProbability { p, range: "[0,1]" });
        }
        Ok(LogProb(p.ln()))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Linear probability; may underflow to 0.0, log space is authoritative.
    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    /// Probability of the intersection of independent events.
    pub fn and(self, other: LogProb) -> LogProb {
        LogProb((self.0 + other.0).min(0.0))
    }
}

/// Log-sum-exp of log-space terms in their given (fixed) order.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// p together with q = -log(1-p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticContext {
    p: f64,
    q: f64,
}

impl AnalyticContext {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability { p, range: "(0,1)" });
        }
        Ok(AnalyticContext {
            p,
            q: -(-p).ln_1p(),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

pub fn make_analytic_context(p: f64) -> Result<AnalyticContext> {
    AnalyticContext::new(p)
}

/// f(z) = -log(1 - e^{-z}), decreasing and convex on (0, inf).
///
/// Two branches keep full relative accuracy: expm1 near zero, log1p in the
/// tail where 1 - e^{-z} rounds to 1.
pub fn f_eval(z: f64) -> f64 {
    assert!(z > 0.0 && z.is_finite(), "f is defined on (0, inf)");
    if z < LN_2 {
        -(-(-z).exp_m1()).ln()
    } else {
        -(-(-z).exp()).ln_1p()
    }
}

/// f'(z) = 1 / (1 - e^z) < 0.
pub fn f_derivative(z: f64) -> f64 {
    assert!(z > 0.0 && z.is_finite(), "f' is defined on (0, inf)");
    -1.0 / z.exp_m1()
}

// 15-point Kronrod nodes (positive half), Kronrod weights, embedded
// 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = h * x;
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

fn adaptive_quadrature<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gauss_kronrod_15(f, a, b);
    if err <= tol || depth >= 40 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adaptive_quadrature(f, a, mid, 0.5 * tol, depth + 1)
        + adaptive_quadrature(f, mid, b, 0.5 * tol, depth + 1)
}

/// Rigorous lower/upper bounds for the tail integral of f beyond `t`:
/// e^{-z} <= f(z) <= e^{-z}/(1-e^{-t}) for z >= t.
pub fn lambda_tail_bounds(t: f64) -> (f64, f64) {
    let e = (-t).exp();
    (e, e / (1.0 - e))
}

const LAMBDA_TOL_FLOOR: f64 = 1e-11;

/// Adaptive quadrature of the integral of f over (0, inf).
///
/// The body is integrated after the substitution z = e^t, which flattens the
/// logarithmic singularity at zero; the head below 1e-8 and the exponential
/// tail beyond t = 45 enter through certified two-sided bounds. The
/// integrator always refines to its internal floor, so every accepted
/// tolerance returns the same value and |result - pi^2/6| <= tolerance.
pub fn lambda_quadrature(tolerance: f64) -> Result<f64> {
    if !(tolerance.is_finite() && tolerance > 0.0) || tolerance < LAMBDA_TOL_FLOOR {
        return Err(Error::ToleranceTooSmall(tolerance));
    }
    let eps: f64 = 1e-8;
    let t_cut: f64 = 45.0;
    // integral over (0, eps): between eps(1 - ln eps) and that + eps^2/2.
    let head = eps * (1.0 - eps.ln()) + 0.25 * eps * eps;
    let (tail_lo, tail_hi) = lambda_tail_bounds(t_cut);
    let tail = 0.5 * (tail_lo + tail_hi);
    let body = adaptive_quadrature(
        &|t: f64| {
            let z = t.exp();
            f_eval(z) * z
        },
        eps.ln(),
        t_cut.ln(),
        1e-13,
        0,
    );
    Ok(head + body + tail)
}

/// log P(D_a^b) = -2 sum_{i=a}^{b-1} f(i q), exact.
pub fn log_prob_diagonal(ctx: &AnalyticContext, a: u32, b: u32) -> Result<LogProb> {
    if a < 1 || a > b {
        return Err(Error::InvalidRange {
            a,
            b,
            requirement: "1 <= a <= b",
        });
    }
    let mut sum = 0.0;
    for i in a..b {
        sum += f_eval(i as f64 * ctx.q);
    }
    LogProb::new(-2.0 * sum)
}

/// log P(D_a^infinity): truncated series plus a certified geometric tail
/// majorant, so the result is a rigorous lower bound within 1e-10 of truth.
pub fn log_prob_diagonal_infinite(ctx: &AnalyticContext, a: u32) -> Result<LogProb> {
    if a < 1 {
        return Err(Error::InvalidRange {
            a,
            b: u32::MAX,
            requirement: "1 <= a",
        });
    }
    let q = ctx.q;
    let geo = 1.0 - (-q).exp();
    let mut sum = 0.0;
    let mut i = a as u64;
    loop {
        // Tail of sum_{j >= i} f(j q) via f(z) <= e^{-z}/(1 - e^{-z}).
        let e = (-(i as f64) * q).exp();
        let tail_majorant = e / ((1.0 - e) * geo);
        if tail_majorant < 5e-13 {
            sum += tail_majorant;
            break;
        }
        sum += f_eval(i as f64 * q);
        i += 1;
    }
    LogProb::new(-2.0 * sum)
}

/// log P(J_a^b) = log p - (b-a-1)(f(aq) + f(bq)) - q(b-1), exact.
pub fn log_prob_sideways(ctx: &AnalyticContext, a: u32, b: u32) -> Result<LogProb> {
    if a < 1 || a >= b {
        return Err(Error::InvalidRange {
            a,
            b,
            requirement: "1 <= a < b",
        });
    }
    let q = ctx.q;
    let cost = (b - a - 1) as f64 * (f_eval(a as f64 * q) + f_eval(b as f64 * q));
    LogProb::new(ctx.p.ln() - cost - q * (b - 1) as f64)
}

/// log P(E(schedule)): the sum of its sideways and diagonal segment terms.
/// The degenerate pair-free schedule is the pure diagonal of its span.
pub fn log_prob_schedule(ctx: &AnalyticContext, schedule: &GrowthSchedule) -> Result<LogProb> {
    let mut total = LogProb::ONE;
    for seg in schedule.segments() {
        let term = match seg {
            Segment::Sideways(a, b) => log_prob_sideways(ctx, a, b)?,
            Segment::Diagonal(a, b) => log_prob_diagonal(ctx, a, b)?,
        };
        total = total.and(term);
    }
    Ok(total)
}

/// Log of the energy-cost lower bound exp(-2^{n+2} sqrt(q)) / 2^{2n+3} for
/// the ratio P(J_a^b) / P(D_a^b) on scale n. Requires p < 1/2.
pub fn energy_ratio_bound(n: u32, ctx: &AnalyticContext) -> Result<f64> {
    if ctx.p >= 0.5 {
        return Err(Error::InvalidProbability {
            p: ctx.p,
            range: "(0, 1/2) for the energy bound",
        });
    }
    let pow = (1u64 << (n + 2)) as f64;
    Ok(-pow * ctx.q.sqrt() - (2 * n + 3) as f64 * LN_2)
}

/// Log of the guaranteed number of good sequences: N(m-1) log(12 * 2^N).
pub fn entropy_lower_bound(n_scales: u32, m: u32) -> f64 {
    assert!(n_scales >= 1 && m >= 1, "need N >= 1 and m >= 1");
    (n_scales as f64) * ((m - 1) as f64) * (12.0 * (n_scales as f64).exp2()).ln()
}

/// Multi-scale ladder parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleParams {
    pub p: f64,
    pub q: f64,
    /// Number of scales N.
    pub n_scales: u32,
    /// 1 / (50 sqrt(q)) before integer rounding.
    pub m_raw: f64,
    /// max(1, floor(m_raw)) or the override.
    pub m_effective: u32,
    /// Whether m_effective differs from m_raw.
    pub m_was_rounded: bool,
    /// Integer ladder l^(0) .. l^(N), nearest-integer roundings (ties up).
    pub levels: Vec<u32>,
    /// The ladder 2^n / sqrt(q) before rounding.
    pub levels_raw: Vec<f64>,
}

/// Desk-scale replacements for the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScaleOverrides {
    pub n_scales: Option<u32>,
    pub m: Option<u32>,
    pub levels: Option<Vec<u32>>,
}

pub fn make_scale_params(p: f64, overrides: &ScaleOverrides) -> Result<ScaleParams> {
    let ctx = AnalyticContext::new(p)?;
    let q = ctx.q();
    let sqrt_q = q.sqrt();
    let m_raw = 1.0 / (50.0 * sqrt_q);

    let n_scales = match (&overrides.levels, overrides.n_scales) {
        (Some(levels), _) => {
            if levels.len() < 2 {
                return Err(Error::InvalidParameter(
                    "level override needs at least two levels".into(),
                ));
            }
            (levels.len() - 1) as u32
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(Error::InvalidParameter("need at least one scale".into()));
            }
            n
        }
        (None, None) => ((1.0 / p).ln() / (4.0 * LN_2)).ceil() as u32,
    };

    let levels_raw: Vec<f64> = (0..=n_scales).map(|n| (n as f64).exp2() / sqrt_q).collect();
    let levels: Vec<u32> = match &overrides.levels {
        Some(l) => l.clone(),
        None => levels_raw.iter().map(|&x| x.round().max(1.0) as u32).collect(),
    };
    if levels[0] < 1 || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingLevels(levels));
    }

    let m_effective = overrides.m.unwrap_or_else(|| (m_raw.floor() as u32).max(1));
    Ok(ScaleParams {
        p,
        q,
        n_scales,
        m_raw,
        m_effective,
        m_was_rounded: (m_effective as f64 - m_raw).abs() > f64::EPSILON,
        levels,
        levels_raw,
    })
}

impl ScaleParams {
    /// The good-schedule family these parameters describe.
    pub fn family_spec(&self, cap: u64) -> Result<crate::events::FamilySpec> {
        crate::events::FamilySpec::new(self.levels.clone(), self.m_effective, None, cap)
    }
}

/// One scale's contribution to the assembled bound.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleTerm {
    pub scale: u32,
    pub level_lo: u32,
    pub level_hi: u32,
    pub sequences: u128,
    /// log-sum-exp over this scale's good sequences of their J/D chain.
    pub log_sum: f64,
}

/// The assembled lower bound on log P(I(B)) and its parts.
#[derive(Debug, Clone, Serialize)]
pub struct BoundBreakdown {
    pub p: f64,
    pub b_target: u32,
    pub levels: Vec<u32>,
    pub pairs_per_scale: u32,
    /// log p for the corner seed (1,1).
    pub log_seed: f64,
    /// log P(D_1^{l0}).
    pub log_diagonal_head: LogProb,
    pub per_scale: Vec<ScaleTerm>,
    /// Sum of the per-scale log-sum-exp terms.
    pub log_schedule_sum: f64,
    /// log P(D_{lN}^B).
    pub log_diagonal_tail: LogProb,
    /// log_seed + head + schedule sum + tail.
    pub total: LogProb,
}

fn scale_fragment_log_prob(
    ctx: &AnalyticContext,
    pairs: &[(u32, u32)],
    level_lo: u32,
    level_hi: u32,
) -> Result<f64> {
    if pairs.is_empty() {
        return Ok(log_prob_diagonal(ctx, level_lo, level_hi)?.value());
    }
    let mut total = 0.0;
    for (i, &(a, b)) in pairs.iter().enumerate() {
        total += log_prob_sideways(ctx, a, b)?.value();
        let next_a = pairs.get(i + 1).map(|&(a2, _)| a2).unwrap_or(level_hi);
        total += log_prob_diagonal(ctx, b, next_a)?.value();
    }
    Ok(total)
}

/// Rigorous lower bound on log P(I(B)):
/// log p + log P(D_1^{l0}) + sum_n lse over scale-n sequences + log P(D_{lN}^B).
///
/// The schedule sum factorises over scales because good schedules are the
/// cartesian product of per-scale sequences and their events touch disjoint
/// rectangles. Exact event probabilities are used throughout, so the bound
/// is valid for every p in (0,1). Each scale's log-sum-exp is reduced in a
/// fixed chunked order, making the value independent of the worker count.
pub fn union_lower_bound(
    ctx: &AnalyticContext,
    b_target: u32,
    family: &ScheduleFamily,
) -> Result<BoundBreakdown> {
    let spec = family.spec();
    let levels = &spec.levels;
    let top = *levels.last().expect("levels nonempty");
    if b_target < top {
        return Err(Error::InvalidParameter(format!(
            "bound target B = {b_target} must be at least the top level {top}"
        )));
    }
    let log_seed = ctx.p.ln();
    let head = log_prob_diagonal(ctx, 1, levels[0])?;
    let tail = log_prob_diagonal(ctx, top, b_target)?;

    let mut per_scale = Vec::with_capacity(spec.n_scales());
    let mut schedule_sum = 0.0;
    for n in 0..spec.n_scales() {
        let seqs = family.scale_sequences(n);
        let terms = exec::collect_indexed(seqs.len() as u64, |i| {
            scale_fragment_log_prob(ctx, &seqs[i as usize], levels[n], levels[n + 1])
                .expect("family sequences are valid spans")
        });
        let log_sum = log_sum_exp(&terms);
        per_scale.push(ScaleTerm {
            scale: n as u32,
            level_lo: levels[n],
            level_hi: levels[n + 1],
            sequences: seqs.len() as u128,
            log_sum,
        });
        schedule_sum += log_sum;
    }

    let total = LogProb::new(
        (log_seed + head.value() + schedule_sum + tail.value()).min(0.0),
    )?;
    Ok(BoundBreakdown {
        p: ctx.p,
        b_target,
        levels: levels.clone(),
        pairs_per_scale: spec.pairs_per_scale,
        log_seed,
        log_diagonal_head: head,
        per_scale,
        log_schedule_sum: schedule_sum,
        log_diagonal_tail: tail,
        total,
    })
}

/// Flat route over whole schedules, for cross-checking the factorised sum.
#[doc(hidden)]
pub fn schedule_sum_flat(ctx: &AnalyticContext, family: &ScheduleFamily) -> f64 {
    let terms: Vec<f64> = family
        .iter()
        .map(|s| log_prob_schedule(ctx, &s).expect("valid schedule").value())
        .collect();
    log_sum_exp(&terms)
}

/// The two closed-form expressions with lambda = pi^2/6.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormBounds {
    pub p: f64,
    pub c: f64,
    /// -2 lambda / p + c log(1/p) / sqrt(p); filling-probability bound, log space.
    pub proposition_rhs_log: f64,
    /// lambda / p - c log(1/p) / sqrt(p); infection-time bound, log space.
    pub theorem_rhs_log: f64,
    /// exp(theorem_rhs_log); may overflow to infinity, log space is authoritative.
    pub theorem_rhs: f64,
    /// Least B the filling bound asks for: ceil(2 p^{-3/4}).
    pub min_b: u64,
    pub b: Option<u64>,
    pub b_satisfies_min: Option<bool>,
}

pub fn closed_form_bounds(p: f64, c: f64, b: Option<u64>) -> Result<ClosedFormBounds> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability { p, range: "(0,1)" });
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "second-order constant must be finite and nonnegative, got {c}"
        )));
    }
    let correction = c * (1.0 / p).ln() / p.sqrt();
    let min_b = (2.0 * p.powf(-0.75)).ceil() as u64;
    Ok(ClosedFormBounds {
        p,
        c,
        proposition_rhs_log: -2.0 * LAMBDA / p + correction,
        theorem_rhs_log: LAMBDA / p - correction,
        theorem_rhs: (LAMBDA / p - correction).exp(),
        min_b,
        b,
        b_satisfies_min: b.map(|b| b >= min_b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{enumerate_good_schedules, FamilySpec};

    const TIGHT: f64 = 1e-12;

    fn ctx(p: f64) -> AnalyticContext {
        AnalyticContext::new(p).unwrap()
    }

    #[test]
    fn q_examples() {
        assert!((ctx(0.5).q() - LN_2).abs() < TIGHT);
        for &p in &[0.3, 0.2, 0.1, 0.05, 0.01] {
            let r = ctx(p).q() / p;
            assert!(r > 1.0 && r < 1.2, "q/p = {r} at p = {p}");
        }
        for &p in &[0.05, 0.1, 0.2, 0.3, 0.45, 0.49] {
            let q = ctx(p).q();
            assert!(p < q && q < 2.0 * p, "ordering fails at p = {p}");
        }
    }

    #[test]
    fn context_rejects_bad_p() {
        assert!(AnalyticContext::new(0.0).is_err());
        assert!(AnalyticContext::new(1.0).is_err());
        assert!(AnalyticContext::new(-0.1).is_err());
    }

    #[test]
    fn f_at_log2() {
        assert!((f_eval(LN_2) - LN_2).abs() < TIGHT);
    }

    #[test]
    fn f_bounds_from_the_energy_proof() {
        // f(z) >= -log z and f'(z) >= -1/z on a log-spaced grid.
        let mut z = 1e-8;
        while z <= 100.0 {
            assert!(f_eval(z) >= -z.ln() - 1e-12, "f bound at z = {z}");
            assert!(f_derivative(z) >= -1.0 / z - 1e-12, "f' bound at z = {z}");
            z *= 1.3;
        }
    }

    #[test]
    fn f_derivative_matches_finite_differences() {
        let mut z = 1e-6;
        while z <= 100.0 {
            let h = z * 1e-6;
            let fd = (f_eval(z + h) - f_eval(z - h)) / (2.0 * h);
            let an = f_derivative(z);
            assert!(
                ((fd - an) / an).abs() < 1e-6,
                "z = {z}: finite diff {fd} vs {an}"
            );
            z *= 1.7;
        }
    }

    #[test]
    fn f_is_decreasing_and_convex() {
        let mut z = 1e-6;
        while z < 50.0 {
            let z2 = z * 1.25;
            assert!(f_eval(z) > f_eval(z2), "decreasing at {z}");
            let mid = 0.5 * (z + z2);
            assert!(
                f_eval(mid) <= 0.5 * (f_eval(z) + f_eval(z2)) + 1e-15,
                "midpoint convexity at {z}"
            );
            z *= 1.25;
        }
    }

    #[test]
    fn lambda_matches_pi_squared_over_six() {
        let lam = lambda_quadrature(1e-9).unwrap();
        assert!(
            (lam - LAMBDA).abs() <= 1e-9,
            "quadrature {lam} vs {LAMBDA}"
        );
    }

    #[test]
    fn lambda_refinement_is_monotone() {
        let tols = [1e-3, 1e-5, 1e-7, 1e-9, 1e-11];
        let mut prev_err = f64::INFINITY;
        for &tol in &tols {
            let err = (lambda_quadrature(tol).unwrap() - LAMBDA).abs();
            assert!(err <= tol, "requested {tol}, got error {err}");
            assert!(err <= prev_err, "error grew when tolerance shrank");
            prev_err = err;
        }
    }

    #[test]
    fn lambda_rejects_unachievable_tolerance() {
        assert!(matches!(
            lambda_quadrature(1e-15),
            Err(Error::ToleranceTooSmall(_))
        ));
        assert!(lambda_quadrature(0.0).is_err());
    }

    #[test]
    fn lambda_tail_majorant_is_valid_and_decreasing() {
        // Series oracle: integral of f over (t, inf) = sum_k e^{-k t} / k^2.
        let tail_series = |t: f64| -> f64 {
            (1..200).map(|k| (-(k as f64) * t).exp() / (k * k) as f64).sum()
        };
        let mut prev = f64::INFINITY;
        for &t in &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            let (lo, hi) = lambda_tail_bounds(t);
            let truth = tail_series(t);
            assert!(lo <= truth + 1e-15 && truth <= hi + 1e-15, "tail bounds at {t}");
            assert!(hi < prev, "majorant not decreasing at {t}");
            prev = hi;
        }
    }

    #[test]
    fn diagonal_examples() {
        let c = ctx(0.3);
        assert_eq!(log_prob_diagonal(&c, 4, 4).unwrap(), LogProb::ONE);
        let two_cells = log_prob_diagonal(&c, 1, 2).unwrap().value();
        assert!((two_cells - 2.0 * 0.3f64.ln()).abs() < TIGHT);
        assert!(log_prob_diagonal(&c, 3, 2).is_err());
        assert!(log_prob_diagonal(&c, 0, 2).is_err());
    }

    #[test]
    fn diagonal_additivity() {
        for &p in &[0.1, 0.3, 0.5, 0.7] {
            let c = ctx(p);
            for (a, b, d) in [(1u32, 3u32, 7u32), (2, 5, 9), (1, 1, 4), (3, 8, 8)] {
                let lhs = log_prob_diagonal(&c, a, b)
                    .unwrap()
                    .and(log_prob_diagonal(&c, b, d).unwrap());
                let rhs = log_prob_diagonal(&c, a, d).unwrap();
                assert!(
                    (lhs.value() - rhs.value()).abs() <= 1e-9 * (1.0 + rhs.value().abs()),
                    "additivity at p={p} ({a},{b},{d})"
                );
            }
        }
    }

    #[test]
    fn diagonal_infinite_truncation_is_consistent() {
        let c = ctx(0.2);
        let inf = log_prob_diagonal_infinite(&c, 3).unwrap().value();
        let far = log_prob_diagonal(&c, 3, 2000).unwrap().value();
        // The infinite product only loses mass in the far tail.
        assert!(inf <= far);
        assert!((inf - far).abs() < 1e-9);
    }

    #[test]
    fn sideways_examples() {
        let c = ctx(0.5);
        let v = log_prob_sideways(&c, 1, 2).unwrap().value();
        assert!((v - 0.25f64.ln()).abs() < TIGHT);

        let c3 = ctx(0.3);
        let v3 = log_prob_sideways(&c3, 1, 2).unwrap().value();
        assert!((v3 - (0.3f64 * 0.7).ln()).abs() < TIGHT);

        // Product form: p (1-(1-p)^a)^{b-a-1} (1-(1-p)^b)^{b-a-1} (1-p)^{b-1}.
        let (a, b, p) = (2u32, 4u32, 0.3f64);
        let direct = (p
            * (1.0 - (1.0 - p).powi(a as i32)).powi((b - a - 1) as i32)
            * (1.0 - (1.0 - p).powi(b as i32)).powi((b - a - 1) as i32)
            * (1.0 - p).powi((b - 1) as i32))
        .ln();
        let v24 = log_prob_sideways(&c3, a, b).unwrap().value();
        assert!((v24 - direct).abs() < 1e-12, "{v24} vs {direct}");

        assert!(log_prob_sideways(&c3, 2, 2).is_err());
    }

    #[test]
    fn schedule_log_prob_examples() {
        let c = ctx(0.3);
        let degenerate = GrowthSchedule::pure_diagonal(2, 6).unwrap();
        assert_eq!(
            log_prob_schedule(&c, &degenerate).unwrap(),
            log_prob_diagonal(&c, 2, 6).unwrap()
        );

        let s = GrowthSchedule::from_points(&[2, 3, 4]).unwrap();
        let expect = log_prob_sideways(&c, 2, 3)
            .unwrap()
            .and(log_prob_diagonal(&c, 3, 4).unwrap());
        assert_eq!(log_prob_schedule(&c, &s).unwrap(), expect);
    }

    #[test]
    fn energy_bound_examples() {
        let c = ctx(0.3);
        let v = energy_ratio_bound(0, &c).unwrap();
        assert!((v - (-4.0 * c.q().sqrt() - 8f64.ln())).abs() < TIGHT);

        // q -> 0 limit at n = 1 approaches 1/32.
        let tiny = ctx(1e-16);
        let v1 = energy_ratio_bound(1, &tiny).unwrap();
        assert!((v1.exp() - 1.0 / 32.0).abs() < 1e-7);

        assert!(energy_ratio_bound(0, &ctx(0.5)).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_lower_bound(1, 1), 0.0);
        assert!((entropy_lower_bound(1, 2) - 24f64.ln()).abs() < TIGHT);
        assert!((entropy_lower_bound(2, 3) - 4.0 * 48f64.ln()).abs() < TIGHT);
    }

    #[test]
    fn scale_params_examples() {
        let sp = make_scale_params(1.0 / 16.0, &ScaleOverrides::default()).unwrap();
        assert_eq!(sp.n_scales, 1);

        let half = make_scale_params(0.5, &ScaleOverrides::default()).unwrap();
        assert!((half.levels_raw[0] - 1.2011).abs() < 1e-4);

        let small = make_scale_params(0.01, &ScaleOverrides::default()).unwrap();
        assert!((small.m_raw - 0.1995).abs() < 1e-3);
        assert_eq!(small.m_effective, 1);
        assert!(small.m_was_rounded);
        assert!(small.levels.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn scale_params_overrides() {
        let o = ScaleOverrides {
            levels: Some(vec![2, 4, 8]),
            m: Some(1),
            ..Default::default()
        };
        let sp = make_scale_params(0.3, &o).unwrap();
        assert_eq!(sp.n_scales, 2);
        assert_eq!(sp.levels, vec![2, 4, 8]);
        assert_eq!(sp.m_effective, 1);

        let bad = ScaleOverrides {
            levels: Some(vec![4, 4]),
            ..Default::default()
        };
        assert!(make_scale_params(0.3, &bad).is_err());
    }

    #[test]
    fn union_bound_degenerate_chain_collapses() {
        let c = ctx(0.3);
        let spec = FamilySpec::new(vec![2, 5], 0, None, 1000).unwrap();
        let family = enumerate_good_schedules(&spec).unwrap();
        let bound = union_lower_bound(&c, 9, &family).unwrap();
        let expect = c.p().ln() + log_prob_diagonal(&c, 1, 9).unwrap().value();
        assert!(
            (bound.total.value() - expect).abs() < 1e-9,
            "{} vs {}",
            bound.total.value(),
            expect
        );
    }

    #[test]
    fn union_bound_small_example_assembles_exactly() {
        let c = ctx(0.3);
        let spec = FamilySpec::new(vec![2, 4], 1, None, 1000).unwrap();
        let family = enumerate_good_schedules(&spec).unwrap();
        assert_eq!(family.count(), 1);
        let bound = union_lower_bound(&c, 6, &family).unwrap();
        let expect = c.p().ln()
            + log_prob_diagonal(&c, 1, 2).unwrap().value()
            + log_prob_sideways(&c, 2, 3).unwrap().value()
            + log_prob_diagonal(&c, 3, 4).unwrap().value()
            + log_prob_diagonal(&c, 4, 6).unwrap().value();
        assert!((bound.total.value() - expect).abs() < 1e-9);
        // Breakdown parts add up to the total.
        let parts = bound.log_seed
            + bound.log_diagonal_head.value()
            + bound.log_schedule_sum
            + bound.log_diagonal_tail.value();
        assert!((bound.total.value() - parts).abs() < 1e-12);
    }

    #[test]
    fn union_bound_factorised_matches_flat_enumeration() {
        let c = ctx(0.25);
        let spec = FamilySpec::new(vec![2, 5, 9], 2, None, 100_000).unwrap();
        let family = enumerate_good_schedules(&spec).unwrap();
        assert!(family.count() > 1);
        let bound = union_lower_bound(&c, 12, &family).unwrap();
        let flat = schedule_sum_flat(&c, &family);
        assert!(
            (bound.log_schedule_sum - flat).abs() < 1e-9,
            "factorised {} vs flat {}",
            bound.log_schedule_sum,
            flat
        );
    }

    #[test]
    fn union_bound_is_monotone_in_the_family() {
        let c = ctx(0.25);
        let spec = FamilySpec::new(vec![2, 6], 1, None, 10_000).unwrap();
        let family = enumerate_good_schedules(&spec).unwrap();
        let all: Vec<GrowthSchedule> = family.iter().collect();
        let lse_of = |k: usize| -> f64 {
            let terms: Vec<f64> = all[..k]
                .iter()
                .map(|s| log_prob_schedule(&c, s).unwrap().value())
                .collect();
            log_sum_exp(&terms)
        };
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=all.len() {
            let v = lse_of(k);
            assert!(v >= prev, "adding a schedule lowered the union sum");
            prev = v;
        }
    }

    #[test]
    fn union_bound_rejects_small_target() {
        let c = ctx(0.3);
        let spec = FamilySpec::new(vec![2, 4], 1, None, 1000).unwrap();
        let family = enumerate_good_schedules(&spec).unwrap();
        assert!(union_lower_bound(&c, 3, &family).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let cf = closed_form_bounds(0.2, 0.0, None).unwrap();
        assert!((cf.proposition_rhs_log - (-2.0 * LAMBDA / 0.2)).abs() < TIGHT);

        // theorem_rhs grows as p decreases on (0, 0.1].
        let mut prev = 0.0;
        for &p in &[0.1, 0.08, 0.05, 0.03, 0.01] {
            let cf = closed_form_bounds(p, DEFAULT_C, None).unwrap();
            assert!(cf.theorem_rhs_log > prev);
            prev = cf.theorem_rhs_log;
        }

        let with_b = closed_form_bounds(0.1, DEFAULT_C, Some(200)).unwrap();
        assert_eq!(with_b.min_b, (2.0 * 0.1f64.powf(-0.75)).ceil() as u64);
        assert_eq!(with_b.b_satisfies_min, Some(200 >= with_b.min_b));
    }

    #[test]
    fn log_prob_values_are_nonpositive() {
        for &p in &[0.05, 0.3, 0.6, 0.9] {
            let c = ctx(p);
            for a in 1..6u32 {
                for b in a..8u32 {
                    assert!(log_prob_diagonal(&c, a, b).unwrap().value() <= 0.0);
                    if b > a {
                        assert!(log_prob_sideways(&c, a, b).unwrap().value() <= 0.0);
                    }
                }
            }
        }
    }
}
