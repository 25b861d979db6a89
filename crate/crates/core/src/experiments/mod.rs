//! Parameter sweeps reproducing the loss-versus-rounds and loss-versus-noise
//! experiments, emitted as CSV plot data.
//!
//! Every sweep is a pure function of its [`ExperimentSpec`]: random draws come
//! from the keyed streams described in [`crate::channel`], and rows are
//! emitted in a fixed order regardless of how points were scheduled.

mod csv_io;
mod strategy;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotic::bayes_threshold;
use crate::asymptotic::HypothesisPrior;
use crate::bounds::{optimal_rounds, optimal_threshold, rounds_loss_bound, threshold_loss_bound};
use crate::channel::{
    capped_rounds, estimate_on_stream, swiss_hitomi_rates, trial_rng, ChannelModel, RapidBitExchangeConfig,
    UserErrorModel,
};
use crate::error::{Error, Result};
use crate::exact::{brute_force_optimal, exact_losses, exact_worst_case};
use crate::loss::{ErrorRateBounds, LossParameters};
use crate::noise::{estimate_noise, high_probability_rates, simulate_coded_phase, BlockCode, TransparentCode};

pub use csv_io::{emit_csv, format_real, parse_csv, read_csv, write_csv};
pub use strategy::{RateStrategy, ThresholdStrategy};

/// Label used for rows holding the exhaustive optimum.
pub const BRUTE_FORCE_LABEL: &str = "brute";

/// Stream reserved for coded-phase draws; experiment point `i` simulates the
/// rapid-bit phase on point stream `i + 1`.
const CODED_PHASE_STREAM: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub losses: LossParameters,
    pub noise_grid: Vec<f64>,
    /// Round counts to evaluate. The loss-versus-noise sweep uses the
    /// near-optimal round count when this is `None`.
    pub rounds_grid: Option<Vec<u32>>,
    pub trials: u32,
    pub threshold_strategies: Vec<ThresholdStrategy>,
    pub rate_strategies: Vec<RateStrategy>,
    /// Length `k` of the coded initialization messages, which also caps the round count.
    pub codeword_len: usize,
    pub correction_radius: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    /// Settings of the loss-versus-noise comparison: `k = 2¹⁰`, `10⁴` trials,
    /// every rate and threshold strategy, 24 log-spaced noise levels.
    pub fn noise_comparison() -> Self {
        let codeword_len = 1024;
        Self {
            losses: LossParameters::reference(),
            noise_grid: log_grid(1e-3, 0.3, 24),
            rounds_grid: None,
            trials: 10_000,
            threshold_strategies: vec![ThresholdStrategy::FiniteSample, ThresholdStrategy::Asymptotic],
            rate_strategies: RateStrategy::standard_set(),
            codeword_len,
            correction_radius: codeword_len / 3,
            seed: 0,
        }
    }

    /// Settings of the loss-versus-rounds sweep: `ω ∈ {10⁻¹, 10⁻²}`, `n ∈ 1..=256`.
    pub fn rounds_sweep() -> Self {
        Self {
            noise_grid: vec![1e-2, 1e-1],
            rounds_grid: Some((1..=256).collect()),
            threshold_strategies: vec![ThresholdStrategy::FiniteSample],
            rate_strategies: vec![RateStrategy::TruePlugIn],
            ..Self::noise_comparison()
        }
    }

    /// Settings of the optimum-versus-noise sweep.
    pub fn optimum_sweep() -> Self {
        Self {
            threshold_strategies: vec![ThresholdStrategy::FiniteSample],
            rate_strategies: vec![RateStrategy::TruePlugIn],
            ..Self::noise_comparison()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_grid.is_empty() {
            return Err(Error::InvalidArgument("noise grid is empty".into()));
        }
        if let Some(&bad) = self.noise_grid.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidProbability {
                name: "channel noise",
                value: bad,
            });
        }
        if let Some(grid) = &self.rounds_grid {
            if grid.is_empty() || grid.contains(&0) {
                return Err(Error::InvalidArgument(
                    "round grid must be non-empty and positive".into(),
                ));
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.threshold_strategies.is_empty() || self.rate_strategies.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one threshold and one rate strategy are required".into(),
            ));
        }
        if self.codeword_len == 0 {
            return Err(Error::InvalidArgument("codeword length must be at least 1".into()));
        }
        Ok(())
    }

    fn sorted_noise(&self) -> Vec<f64> {
        let mut grid = self.noise_grid.clone();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }
}

/// `count` points spaced evenly in log scale from `low` to `high` inclusive.
pub fn log_grid(low: f64, high: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![low],
        _ => {
            let (a, b) = (low.ln(), high.ln());
            let last = (count - 1) as f64;
            let mut grid: Vec<f64> = (0..count).map(|i| (a + (b - a) * i as f64 / last).exp()).collect();
            grid[0] = low;
            grid[count - 1] = high;
            grid
        }
    }
}

/// One line of plot data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub omega: f64,
    pub n: u32,
    pub tau: f64,
    pub threshold_strategy: String,
    pub rate_strategy: String,
    /// Exact worst-case expected loss at `(n, tau)`.
    pub exact_worst: f64,
    pub elb1: f64,
    pub elb2: f64,
    pub mc_worst: f64,
    pub mc_stderr: f64,
    pub aborted: bool,
}

impl SweepRow {
    fn aborted(omega: f64, threshold: &ThresholdStrategy, rate: &RateStrategy) -> Self {
        Self {
            omega,
            n: 0,
            tau: f64::NAN,
            threshold_strategy: threshold.to_string(),
            rate_strategy: rate.to_string(),
            exact_worst: f64::NAN,
            elb1: f64::NAN,
            elb2: f64::NAN,
            mc_worst: f64::NAN,
            mc_stderr: f64::NAN,
            aborted: true,
        }
    }

    /// Every loss column that is present respects the round-cost floor.
    pub fn respects_round_floor(&self, params: &LossParameters) -> bool {
        let floor = params.round_cost(self.n);
        [self.exact_worst, self.elb1, self.elb2, self.mc_worst]
            .iter()
            .filter(|v| !v.is_nan())
            .all(|&v| v >= floor - 1e-12)
    }
}

/// Threshold chosen by `strategy` for `n` rounds under the assumed rates.
///
/// The finite-sample threshold is the unclamped `τ̂`. The likelihood-ratio
/// thresholds are undefined when an assumed rate sits at 0 or 1; the rates
/// are then pulled in by `1e-12`, which approaches the limiting rule.
pub fn choose_threshold(
    strategy: &ThresholdStrategy,
    params: &LossParameters,
    rates: &ErrorRateBounds,
    n: u32,
) -> Result<f64> {
    match strategy {
        ThresholdStrategy::FiniteSample => Ok(optimal_threshold(params, rates, n).raw),
        ThresholdStrategy::Asymptotic => bayes_threshold(params, &open_rates(rates)?, &HypothesisPrior::uniform(), n),
        ThresholdStrategy::Bayes { prior_attacker } => {
            bayes_threshold(params, &open_rates(rates)?, &HypothesisPrior::new(*prior_attacker)?, n)
        }
    }
}

fn open_rates(rates: &ErrorRateBounds) -> Result<ErrorRateBounds> {
    const EDGE: f64 = 1e-12;
    ErrorRateBounds::new(rates.attacker_floor().min(1.0 - EDGE), rates.user_ceiling().max(EDGE))
}

/// Exact worst-case loss and `ELb₁` versus round count, at the finite-sample
/// threshold, with per-round errors exactly at the Swiss-Knife/Hitomi bounds.
pub fn figure1a_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let params = spec.losses;
    let rounds: Vec<u32> = spec.rounds_grid.clone().unwrap_or_else(|| (1..=256).collect());
    let mut points = Vec::new();
    for omega in spec.sorted_noise() {
        let rates = swiss_hitomi_rates(&ChannelModel::new(omega)?)?;
        let elb2 = rounds_loss_bound(&params, &rates)?;
        for &n in &rounds {
            points.push((omega, rates, elb2, n));
        }
    }
    let mut rows = points
        .into_par_iter()
        .map(|(omega, rates, elb2, n)| {
            let tau = optimal_threshold(&params, &rates, n).raw;
            Ok(SweepRow {
                omega,
                n,
                tau,
                threshold_strategy: ThresholdStrategy::FiniteSample.to_string(),
                rate_strategy: RateStrategy::TruePlugIn.to_string(),
                exact_worst: exact_worst_case(&params, &rates, n, tau)?,
                elb1: threshold_loss_bound(&params, &rates, n),
                elb2,
                mc_worst: f64::NAN,
                mc_stderr: f64::NAN,
                aborted: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.omega.total_cmp(&b.omega).then(a.n.cmp(&b.n)));
    Ok(rows)
}

/// Search bound for the exhaustive optimum: far enough past `n̂` that the
/// optimum (which never exceeds `n̂` in practice) is inside it.
fn brute_force_limit(n_hat: u32) -> u32 {
    n_hat.saturating_mul(2).max(512)
}

/// Per noise level: the exhaustive optimum `(n*, τ*)` and the formula choice
/// `(n̂, τ̂)`, each with its exact loss and both bounds.
pub fn figure1b_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let params = spec.losses;
    let grid = spec.sorted_noise();
    let per_omega = grid
        .into_par_iter()
        .map(|omega| {
            let rates = swiss_hitomi_rates(&ChannelModel::new(omega)?)?;
            let elb2 = rounds_loss_bound(&params, &rates)?;
            let n_hat = optimal_rounds(&params, &rates)?.rounds;
            let tau_hat = optimal_threshold(&params, &rates, n_hat).raw;
            let best = brute_force_optimal(&params, &rates, brute_force_limit(n_hat))?;
            let row = |n: u32, tau: f64, label: String, exact_worst: f64| SweepRow {
                omega,
                n,
                tau,
                threshold_strategy: label,
                rate_strategy: RateStrategy::TruePlugIn.to_string(),
                exact_worst,
                elb1: threshold_loss_bound(&params, &rates, n),
                elb2,
                mc_worst: f64::NAN,
                mc_stderr: f64::NAN,
                aborted: false,
            };
            Ok(vec![
                row(
                    best.rounds,
                    f64::from(best.threshold),
                    BRUTE_FORCE_LABEL.to_string(),
                    best.worst,
                ),
                row(
                    n_hat,
                    tau_hat,
                    ThresholdStrategy::FiniteSample.to_string(),
                    exact_worst_case(&params, &rates, n_hat, tau_hat)?,
                ),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_omega.into_iter().flatten().collect())
}

/// Rates assumed by `strategy`, given the decoder's error count from the coded phase.
pub fn assumed_rates(
    strategy: &RateStrategy,
    true_noise: f64,
    observed_errors: usize,
    codeword_len: usize,
) -> Result<ErrorRateBounds> {
    match strategy {
        RateStrategy::TruePlugIn => swiss_hitomi_rates(&ChannelModel::new(true_noise)?),
        RateStrategy::Guessed(guess) => swiss_hitomi_rates(&ChannelModel::new(*guess)?),
        RateStrategy::MaxLikelihood => {
            let estimate = estimate_noise(observed_errors, codeword_len, 0.5)?;
            swiss_hitomi_rates(&ChannelModel::new(estimate.point)?)
        }
        RateStrategy::HighProbability(delta) => {
            high_probability_rates(&estimate_noise(observed_errors, codeword_len, *delta)?)
        }
    }
}

/// Worst-case loss versus actual channel noise for every combination of rate
/// and threshold strategy.
///
/// At each noise level one coded phase is simulated and shared by all
/// strategies; its error count feeds the estimating strategies. The round
/// count is `min{n̂, k}` under the assumed rates (or each entry of the round
/// grid, if given). The rapid-bit phase is then simulated with the actual
/// channel: the user errs with probability `1 − (1−ω)²` per round, the
/// attacker with `(1+ω)/2`. All strategies at one noise level draw from the
/// same random streams. A failed coded phase or collapsed rate gap yields an
/// aborted row.
pub fn figure3_comparison(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let params = spec.losses;
    let code = TransparentCode::with_correction_radius(spec.codeword_len, spec.correction_radius)?;
    let key_length = u32::try_from(spec.codeword_len).unwrap_or(u32::MAX);
    let mut rows = Vec::new();
    for (index, omega) in spec.sorted_noise().into_iter().enumerate() {
        let channel = ChannelModel::new(omega)?;
        let mut rng = trial_rng(spec.seed, CODED_PHASE_STREAM, index as u64);
        let coded = simulate_coded_phase(&channel, &code, &mut rng);
        let point_stream = index as u64 + 1;
        for rate_strategy in &spec.rate_strategies {
            let rates = match coded.observed_errors() {
                None => None,
                Some(theta) => match assumed_rates(rate_strategy, omega, theta, code.codeword_len()) {
                    Ok(rates) => Some(rates),
                    Err(Error::GapCollapse { .. } | Error::NoiseTooHigh { .. }) => None,
                    Err(e) => return Err(e),
                },
            };
            let Some(rates) = rates else {
                rows.extend(
                    spec.threshold_strategies
                        .iter()
                        .map(|t| SweepRow::aborted(omega, t, rate_strategy)),
                );
                continue;
            };
            let rounds = match &spec.rounds_grid {
                Some(grid) => grid.clone(),
                None => vec![capped_rounds(optimal_rounds(&params, &rates)?.rounds, key_length)],
            };
            let elb2 = rounds_loss_bound(&params, &rates)?;
            for threshold_strategy in &spec.threshold_strategies {
                for &n in &rounds {
                    let tau = choose_threshold(threshold_strategy, &params, &rates, n)?;
                    let config = RapidBitExchangeConfig::for_channel(&channel, n, tau, UserErrorModel::Physical)?;
                    let mc = estimate_on_stream(&config, &params, spec.trials, spec.seed, point_stream)?;
                    let exact = exact_losses(
                        &params,
                        n,
                        tau,
                        channel.attacker_round_error(),
                        channel.user_round_error(UserErrorModel::Physical),
                    )?;
                    rows.push(SweepRow {
                        omega,
                        n,
                        tau,
                        threshold_strategy: threshold_strategy.to_string(),
                        rate_strategy: rate_strategy.to_string(),
                        exact_worst: exact.worst(),
                        elb1: threshold_loss_bound(&params, &rates, n),
                        elb2,
                        mc_worst: mc.worst(),
                        mc_stderr: mc.worst_stderr(),
                        aborted: false,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Fraction of paired rows where `candidate`'s Monte Carlo worst case is at
/// most `baseline`'s. Pairs where either side aborted are skipped; `None`
/// when no pair remains.
pub fn win_fraction(candidate: &[&SweepRow], baseline: &[&SweepRow]) -> Option<f64> {
    let mut wins = 0usize;
    let mut total = 0usize;
    for (c, b) in candidate.iter().zip(baseline) {
        if c.aborted || b.aborted {
            continue;
        }
        total += 1;
        if c.mc_worst.partial_cmp(&b.mc_worst) != Some(Ordering::Greater) {
            wins += 1;
        }
    }
    (total > 0).then(|| wins as f64 / total as f64)
}
