//! Reproducible Monte Carlo estimation of event probabilities and infection
//! time statistics.
//!
//! Per-trial seeds are a collision-resistant mix of (master seed, trial
//! index), success counts are integers and per-trial values are collected in
//! index order, so results are identical for one worker and many.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analytic::LAMBDA;
use crate::dynamics::{internally_filled, tau_origin, ModelKind};
use crate::error::{Error, Result};
use crate::events::{event_holds, EventSpec};
use crate::exec;
use crate::lattice::{Configuration, Rect, SampleSpec};
use crate::rng;

/// What a trial evaluates on the sampled configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Predicate {
    /// I(L): the L x L square internally fills.
    InternallyFilled { side: u32, model: ModelKind },
    /// A growth event.
    Event(EventSpec),
}

impl Predicate {
    /// The region trials sample: every cell the predicate can read.
    pub fn region(&self) -> Rect {
        match self {
            Predicate::InternallyFilled { side, .. } => Rect::unit_square(*side),
            Predicate::Event(spec) => Rect::unit_square(spec.max_index().max(1)),
        }
    }

    pub fn evaluate(&self, config: &Configuration) -> bool {
        match self {
            Predicate::InternallyFilled { side, model } => {
                internally_filled(config, &Rect::unit_square(*side), *model)
                    .expect("region covers the square")
            }
            Predicate::Event(spec) => {
                event_holds(config, spec).expect("region covers the event")
            }
        }
    }
}

/// A Bernoulli estimate with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateResult {
    pub successes: u64,
    pub trials: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub master_seed: u64,
}

impl EstimateResult {
    /// Plain binomial standard error of the point estimate.
    pub fn standard_error(&self) -> f64 {
        (self.point * (1.0 - self.point) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval; sane at 0/n and n/n, which rare events hit often.
fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    let z = Normal::standard().inverse_cdf(0.5 * (1.0 + confidence));
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn validate(p: f64, trials: u64, confidence: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability { p, range: "[0,1]" });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidProbability {
            p: confidence,
            range: "(0,1) for the confidence level",
        });
    }
    Ok(())
}

fn assemble(successes: u64, trials: u64, confidence: f64, master_seed: u64) -> EstimateResult {
    let (ci_low, ci_high) = wilson_interval(successes, trials, confidence);
    EstimateResult {
        successes,
        trials,
        point: successes as f64 / trials as f64,
        ci_low,
        ci_high,
        confidence,
        master_seed,
    }
}

/// Estimates P(predicate) under the product measure with parameter `p`.
pub fn estimate_event(
    p: f64,
    predicate: &Predicate,
    trials: u64,
    master_seed: u64,
    confidence: f64,
) -> Result<EstimateResult> {
    let region = predicate.region();
    estimate_custom(p, region, |cfg| predicate.evaluate(cfg), trials, master_seed, confidence)
}

/// Sequential twin of [`estimate_event`]; same output, used by benchmarks.
pub fn estimate_event_seq(
    p: f64,
    predicate: &Predicate,
    trials: u64,
    master_seed: u64,
    confidence: f64,
) -> Result<EstimateResult> {
    validate(p, trials, confidence)?;
    let region = predicate.region();
    let successes = exec::count_matching_seq(trials, |trial| {
        let spec = SampleSpec::new(p, rng::trial_seed(master_seed, trial), region)
            .expect("validated p");
        predicate.evaluate(&Configuration::sample(&spec))
    });
    Ok(assemble(successes, trials, confidence, master_seed))
}

/// Estimates P(pred) for an arbitrary configuration predicate over `region`.
pub fn estimate_custom<F>(
    p: f64,
    region: Rect,
    pred: F,
    trials: u64,
    master_seed: u64,
    confidence: f64,
) -> Result<EstimateResult>
where
    F: Fn(&Configuration) -> bool + Sync,
{
    validate(p, trials, confidence)?;
    let successes = exec::count_matching(trials, |trial| {
        let spec = SampleSpec::new(p, rng::trial_seed(master_seed, trial), region)
            .expect("validated p");
        pred(&Configuration::sample(&spec))
    });
    Ok(assemble(successes, trials, confidence, master_seed))
}

/// Per-trial infection times of the origin on a centered box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauSample {
    pub p: f64,
    pub box_side: u32,
    pub model: ModelKind,
    pub master_seed: u64,
    /// One entry per trial; None records a stalled trial, never dropped.
    pub taus: Vec<Option<u32>>,
}

/// Summary statistics of a tau sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauSummary {
    pub trials: u64,
    pub finite: u64,
    pub fraction_never: f64,
    /// Lower median over the finite times.
    pub median_tau: Option<u32>,
    /// Mean of log tau over finite times >= 1.
    pub mean_log_tau: Option<f64>,
    /// Mean of p log tau over finite times >= 1, the quantity compared
    /// against lambda = pi^2/6.
    pub mean_p_log_tau: Option<f64>,
    /// Fraction of finite trials with p log tau < lambda (tau = 0 counts).
    pub fraction_below_lambda: f64,
}

impl TauSample {
    /// p * log(tau) for one trial; -inf for tau = 0, None for stalled.
    pub fn p_log_tau(&self, trial: usize) -> Option<f64> {
        self.taus[trial].map(|t| {
            if t == 0 {
                f64::NEG_INFINITY
            } else {
                self.p * (t as f64).ln()
            }
        })
    }

    pub fn summary(&self) -> TauSummary {
        let mut finite: Vec<u32> = self.taus.iter().flatten().copied().collect();
        finite.sort_unstable();
        let n_finite = finite.len() as u64;
        let logs: Vec<f64> = finite
            .iter()
            .filter(|&&t| t >= 1)
            .map(|&t| (t as f64).ln())
            .collect();
        let mean_log = (!logs.is_empty())
            .then(|| logs.iter().sum::<f64>() / logs.len() as f64);
        let below = self
            .taus
            .iter()
            .flatten()
            .filter(|&&t| t == 0 || self.p * (t as f64).ln() < LAMBDA)
            .count();
        TauSummary {
            trials: self.taus.len() as u64,
            finite: n_finite,
            fraction_never: 1.0 - n_finite as f64 / self.taus.len() as f64,
            median_tau: finite.get(finite.len().saturating_sub(1) / 2).copied(),
            mean_log_tau: mean_log,
            mean_p_log_tau: mean_log.map(|m| self.p * m),
            fraction_below_lambda: if n_finite == 0 {
                0.0
            } else {
                below as f64 / n_finite as f64
            },
        }
    }
}

/// Samples tau at the origin of a centered box over independent trials.
///
/// A trial whose growth stalls before reaching the origin is reported as
/// None; choosing a box large enough is the experimenter's responsibility.
pub fn estimate_tau(
    p: f64,
    box_side: u32,
    trials: u64,
    master_seed: u64,
    model: ModelKind,
) -> Result<TauSample> {
    if box_side.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "box side must be odd so the origin is centered, got {box_side}"
        )));
    }
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability { p, range: "[0,1]" });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let region = Rect::centered_square(box_side);
    let taus = exec::collect_indexed(trials, |trial| {
        let spec = SampleSpec::new(p, rng::trial_seed(master_seed, trial), region)
            .expect("validated p");
        tau_origin(&Configuration::sample(&spec), model)
    });
    Ok(TauSample {
        p,
        box_side,
        model,
        master_seed,
        taus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_sure_probabilities() {
        let pred = Predicate::InternallyFilled {
            side: 2,
            model: ModelKind::Modified,
        };
        let zero = estimate_event(0.0, &pred, 500, 1, 0.95).unwrap();
        assert_eq!(zero.successes, 0);
        let one = estimate_event(1.0, &pred, 500, 1, 0.95).unwrap();
        assert_eq!(one.successes, 500);
        assert!(one.ci_low <= 1.0 && one.ci_high == 1.0);
    }

    #[test]
    fn estimate_is_deterministic() {
        let pred = Predicate::Event(EventSpec::diagonal(1, 3).unwrap());
        let a = estimate_event(0.4, &pred, 20_000, 99, 0.95).unwrap();
        let b = estimate_event(0.4, &pred, 20_000, 99, 0.95).unwrap();
        assert_eq!(a, b);
        let seq = estimate_event_seq(0.4, &pred, 20_000, 99, 0.95).unwrap();
        assert_eq!(a, seq);
    }

    #[test]
    fn filling_estimate_brackets_the_known_value() {
        // P(I(2)) at p = 1/2 under the modified rule is 7/16.
        let pred = Predicate::InternallyFilled {
            side: 2,
            model: ModelKind::Modified,
        };
        let est = estimate_event(0.5, &pred, 100_000, 42, 0.99).unwrap();
        let truth = 7.0 / 16.0;
        assert!(
            est.ci_low <= truth && truth <= est.ci_high,
            "99% CI [{}, {}] misses {truth}",
            est.ci_low,
            est.ci_high
        );
    }

    #[test]
    fn wilson_interval_is_ordered_and_contains_point() {
        for &(s, n) in &[(0u64, 100u64), (100, 100), (3, 100), (50, 100)] {
            let (lo, hi) = wilson_interval(s, n, 0.95);
            let point = s as f64 / n as f64;
            assert!(lo <= point && point <= hi);
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn tau_sure_case_is_zero() {
        let sample = estimate_tau(1.0, 5, 20, 7, ModelKind::Modified).unwrap();
        assert!(sample.taus.iter().all(|t| *t == Some(0)));
        let summary = sample.summary();
        assert_eq!(summary.finite, 20);
        assert_eq!(summary.median_tau, Some(0));
        assert_eq!(summary.fraction_below_lambda, 1.0);
    }

    #[test]
    fn tau_on_single_cell_box_matches_p() {
        let trials = 20_000u64;
        let sample = estimate_tau(0.3, 1, trials, 11, ModelKind::Modified).unwrap();
        let zeros = sample.taus.iter().filter(|t| **t == Some(0)).count();
        assert_eq!(
            zeros,
            sample.taus.iter().flatten().count(),
            "no growth is possible on a single cell"
        );
        let frac = zeros as f64 / trials as f64;
        let sigma = (0.3 * 0.7 / trials as f64).sqrt();
        assert!((frac - 0.3).abs() < 4.0 * sigma, "zero fraction {frac}");
    }

    #[test]
    fn tau_consistency_with_the_time_bound_direction() {
        // Desk-scale check: p log tau stays below lambda in most trials.
        let sample = estimate_tau(0.25, 501, 50, 5, ModelKind::Modified).unwrap();
        let summary = sample.summary();
        assert_eq!(summary.finite, 50, "all trials should fill to the origin");
        assert!(
            summary.fraction_below_lambda >= 0.9,
            "only {} below lambda",
            summary.fraction_below_lambda
        );
    }

    #[test]
    fn tau_requires_odd_box() {
        assert!(estimate_tau(0.3, 10, 5, 1, ModelKind::Modified).is_err());
    }
}
