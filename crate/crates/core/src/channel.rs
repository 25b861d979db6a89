//! Binary symmetric channel, the Swiss-Knife/Hitomi error-rate mapping and a
//! Monte Carlo simulator of the rapid-bit-exchange phase.
//!
//! Rounds are abstracted to Bernoulli error events; the cryptographic
//! construction of responses is not modelled.
//!
//! # Random streams
//!
//! Trial `i` on stream `s` under master seed `m` reads the ChaCha8 keystream
//! keyed by `seed_from_u64(m)`, stream id `s`, starting at word `i · 2³²`.
//! Trials therefore never share randomness, and a run is bit-identical
//! whether trials execute serially or in parallel. Simulations of one
//! experiment point use stream `2·p` for the user and `2·p + 1` for the
//! attacker, where `p` is the point stream.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::threshold_loss_bound;
use crate::error::{check_finite, check_probability, Error, Result};
use crate::loss::{realized_loss, worst_case_expected_loss, ErrorRateBounds, LossParameters, ProverIdentity};

/// Symmetric bit-flip channel over `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    noise: f64,
}

/// How the user's per-round error probability is derived from the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserErrorModel {
    /// Exactly the bound `pᵤ = 2ω`, the worst case the analysis allows.
    AtBound,
    /// Challenge and response each cross the channel once: `1 − (1−ω)²`.
    Physical,
}

impl ChannelModel {
    pub fn new(noise: f64) -> Result<Self> {
        check_probability("channel noise", noise)?;
        Ok(Self { noise })
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// Per-round error of a mafia-fraud attacker guessing responses: `(1+ω)/2`.
    pub fn attacker_round_error(&self) -> f64 {
        0.5 * (1.0 + self.noise)
    }

    pub fn user_round_error(&self, model: UserErrorModel) -> f64 {
        match model {
            UserErrorModel::AtBound => (2.0 * self.noise).min(1.0),
            UserErrorModel::Physical => 1.0 - (1.0 - self.noise).powi(2),
        }
    }
}

/// `pₐ = (1+ω)/2`, `pᵤ = 2ω` for Swiss-Knife and Hitomi. Needs `ω < 1/3`.
pub fn swiss_hitomi_rates(channel: &ChannelModel) -> Result<ErrorRateBounds> {
    let omega = channel.noise();
    if 3.0 * omega >= 1.0 {
        return Err(Error::NoiseTooHigh { omega });
    }
    ErrorRateBounds::new(0.5 * (1.0 + omega), 2.0 * omega)
}

/// `n ℓB + e^{−n(1−3ω)²/8} √(ℓA ℓU)`, evaluated directly from `ω`.
pub fn swiss_loss_bound(params: &LossParameters, channel: &ChannelModel, n: u32) -> Result<f64> {
    let omega = channel.noise();
    if 3.0 * omega >= 1.0 {
        return Err(Error::NoiseTooHigh { omega });
    }
    let nf = f64::from(n);
    let shrink = (1.0 - 3.0 * omega).powi(2);
    Ok(params.round_cost(n) + (-nf * shrink / 8.0).exp() * params.geometric_mean())
}

/// Same value as [`swiss_loss_bound`], through the generic rate bounds.
pub fn swiss_loss_bound_via_rates(params: &LossParameters, channel: &ChannelModel, n: u32) -> Result<f64> {
    Ok(threshold_loss_bound(params, &swiss_hitomi_rates(channel)?, n))
}

/// The rapid-bit phase cannot run more rounds than the key length: `min{n*, k}`.
pub fn capped_rounds(n_star: u32, key_length: u32) -> u32 {
    n_star.min(key_length)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RapidBitExchangeConfig {
    rounds: u32,
    threshold: f64,
    user_round_error: f64,
    attacker_round_error: f64,
}

impl RapidBitExchangeConfig {
    pub fn new(rounds: u32, threshold: f64, user_round_error: f64, attacker_round_error: f64) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidArgument("round count must be at least 1".into()));
        }
        check_finite("threshold", threshold)?;
        check_probability("user round error", user_round_error)?;
        check_probability("attacker round error", attacker_round_error)?;
        Ok(Self {
            rounds,
            threshold,
            user_round_error,
            attacker_round_error,
        })
    }

    pub fn for_channel(
        channel: &ChannelModel,
        rounds: u32,
        threshold: f64,
        user_model: UserErrorModel,
    ) -> Result<Self> {
        Self::new(
            rounds,
            threshold,
            channel.user_round_error(user_model),
            channel.attacker_round_error(),
        )
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn round_error(&self, identity: ProverIdentity) -> f64 {
        match identity {
            ProverIdentity::User => self.user_round_error,
            ProverIdentity::Attacker => self.attacker_round_error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub identity: ProverIdentity,
    pub error_count: u32,
    pub accepted: bool,
    pub loss: f64,
}

/// The per-trial generator described in the module docs.
pub fn trial_rng(master_seed: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(trial) << 32);
    rng
}

pub fn identity_stream(point_stream: u64, identity: ProverIdentity) -> u64 {
    let bit = match identity {
        ProverIdentity::User => 0,
        ProverIdentity::Attacker => 1,
    };
    (point_stream << 1) | bit
}

/// One run of the rapid-bit phase: `n` independent error indicators, then
/// accept iff their sum is below the threshold.
pub fn simulate_trial<R: Rng + ?Sized>(
    config: &RapidBitExchangeConfig,
    params: &LossParameters,
    identity: ProverIdentity,
    rng: &mut R,
) -> TrialOutcome {
    let p = config.round_error(identity);
    let error_count = (0..config.rounds).filter(|_| rng.gen_bool(p)).count() as u32;
    let accepted = f64::from(error_count) < config.threshold;
    TrialOutcome {
        identity,
        error_count,
        accepted,
        loss: realized_loss(params, config.rounds, identity, accepted),
    }
}

/// Sample mean of a loss (or indicator) with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMean {
    pub mean: f64,
    pub stderr: f64,
}

impl SampleMean {
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len() as f64;
        let mean = values.iter().sum::<f64>() / count;
        if values.len() < 2 {
            return Self { mean, stderr: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
        Self {
            mean,
            stderr: (var / count).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityEstimate {
    pub loss: SampleMean,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub user: IdentityEstimate,
    pub attacker: IdentityEstimate,
}

impl MonteCarloEstimate {
    pub fn worst(&self) -> f64 {
        worst_case_expected_loss(self.user.loss.mean, self.attacker.loss.mean)
    }

    /// Standard error of whichever identity attains the worst case.
    pub fn worst_stderr(&self) -> f64 {
        if self.attacker.loss.mean >= self.user.loss.mean {
            self.attacker.loss.stderr
        } else {
            self.user.loss.stderr
        }
    }
}

pub fn run_trials(
    config: &RapidBitExchangeConfig,
    params: &LossParameters,
    identity: ProverIdentity,
    trials: u32,
    master_seed: u64,
    point_stream: u64,
) -> Vec<TrialOutcome> {
    let stream = identity_stream(point_stream, identity);
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, stream, u64::from(i));
            simulate_trial(config, params, identity, &mut rng)
        })
        .collect()
}

fn summarize(outcomes: &[TrialOutcome]) -> IdentityEstimate {
    let losses: Vec<f64> = outcomes.iter().map(|o| o.loss).collect();
    let accepted = outcomes.iter().filter(|o| o.accepted).count();
    IdentityEstimate {
        loss: SampleMean::from_values(&losses),
        acceptance_rate: accepted as f64 / outcomes.len() as f64,
    }
}

/// Monte Carlo estimates of `E(L|U)` and `E(L|A)` on point stream 0.
pub fn estimate_worst_case_loss(
    config: &RapidBitExchangeConfig,
    params: &LossParameters,
    trials_per_identity: u32,
    master_seed: u64,
) -> Result<MonteCarloEstimate> {
    estimate_on_stream(config, params, trials_per_identity, master_seed, 0)
}

pub fn estimate_on_stream(
    config: &RapidBitExchangeConfig,
    params: &LossParameters,
    trials_per_identity: u32,
    master_seed: u64,
    point_stream: u64,
) -> Result<MonteCarloEstimate> {
    if trials_per_identity == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial per identity is required".into(),
        ));
    }
    let run = |identity| {
        summarize(&run_trials(
            config,
            params,
            identity,
            trials_per_identity,
            master_seed,
            point_stream,
        ))
    };
    Ok(MonteCarloEstimate {
        user: run(ProverIdentity::User),
        attacker: run(ProverIdentity::Attacker),
    })
}
