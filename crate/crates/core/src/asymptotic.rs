//! Bayesian likelihood-ratio thresholds for binary per-round errors.
//!
//! These are optimal for the prior-weighted risk and asymptotically optimal
//! in general. They carry no finite-sample guarantee, which is why they are
//! kept apart from [`crate::bounds`].

use crate::error::{check_finite, check_positive, Error, Result};
use crate::exact::BinomialSpec;
use crate::loss::{ErrorRateBounds, LossParameters};

/// Prior over the prover being the attacker or the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisPrior {
    attacker: f64,
}

impl HypothesisPrior {
    pub fn new(prior_attacker: f64) -> Result<Self> {
        if prior_attacker > 0.0 && prior_attacker < 1.0 {
            Ok(Self {
                attacker: prior_attacker,
            })
        } else {
            Err(Error::InvalidArgument(format!(
                "prior probability of an attacker must lie in (0, 1), got {prior_attacker}"
            )))
        }
    }

    pub fn uniform() -> Self {
        Self { attacker: 0.5 }
    }

    pub fn attacker(&self) -> f64 {
        self.attacker
    }

    pub fn user(&self) -> f64 {
        1.0 - self.attacker
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BayesDecision {
    DecideUser,
    DecideAttacker,
}

fn check_open_rates(rates: &ErrorRateBounds) -> Result<()> {
    let (pa, pu) = (rates.attacker_floor(), rates.user_ceiling());
    if pu <= 0.0 || pa >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "likelihood-ratio threshold needs 0 < p_u < p_a < 1, got p_u = {pu}, p_a = {pa}"
        )));
    }
    Ok(())
}

/// Prior-weighted Bayes threshold
/// `τ_b = [n ln((1−pᵤ)/(1−pₐ)) − ln(ρ π(A)/π(U))] / [ln((1−pᵤ)/(1−pₐ)) − ln(pᵤ/pₐ)]`.
pub fn bayes_threshold(
    params: &LossParameters,
    rates: &ErrorRateBounds,
    prior: &HypothesisPrior,
    n: u32,
) -> Result<f64> {
    check_open_rates(rates)?;
    let (pa, pu) = (rates.attacker_floor(), rates.user_ceiling());
    let survive = ((1.0 - pu) / (1.0 - pa)).ln();
    let denom = survive - (pu / pa).ln();
    let offset = (params.ratio() * prior.attacker() / prior.user()).ln();
    Ok((f64::from(n) * survive - offset) / denom)
}

/// Uniform-prior threshold `τ̃`.
pub fn asymptotic_threshold(params: &LossParameters, rates: &ErrorRateBounds, n: u32) -> Result<f64> {
    bayes_threshold(params, rates, &HypothesisPrior::uniform(), n)
}

/// Small-gap approximation `τ̃* = n p̄ − p̄(1−p̄) ln(ρ)/Δ` of `τ̃`, where the
/// rates are `p̄ ± Δ/2`.
pub fn approx_threshold(params: &LossParameters, mean_rate: f64, gap: f64, n: u32) -> Result<f64> {
    check_finite("mean error rate", mean_rate)?;
    if !(mean_rate > 0.0 && mean_rate < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "mean error rate must lie in (0, 1), got {mean_rate}"
        )));
    }
    check_positive("rate gap", gap)?;
    Ok(f64::from(n) * mean_rate - mean_rate * (1.0 - mean_rate) / gap * params.ratio().ln())
}

/// Threshold rule: decide user iff `ε < τ_b`.
pub fn bayes_decision(err_count: u32, tau_b: f64) -> BayesDecision {
    if f64::from(err_count) < tau_b {
        BayesDecision::DecideUser
    } else {
        BayesDecision::DecideAttacker
    }
}

/// Bayes risk of the rule "accept iff `ε < τ`":
/// `π(A) Pr(ε < τ | A) ℓA + π(U) Pr(ε ≥ τ | U) ℓU`.
///
/// Round costs are not included. Any finite `τ` is accepted; thresholds
/// below 0 reject everyone and thresholds above `n` accept everyone.
pub fn bayes_risk(
    params: &LossParameters,
    rates: &ErrorRateBounds,
    prior: &HypothesisPrior,
    n: u32,
    tau: f64,
) -> Result<f64> {
    check_finite("threshold", tau)?;
    let accept_attacker = BinomialSpec::new(n, rates.attacker_floor())?.prob_below(tau);
    let accept_user = BinomialSpec::new(n, rates.user_ceiling())?.prob_below(tau);
    Ok(prior.attacker() * accept_attacker * params.false_accept()
        + prior.user() * (1.0 - accept_user) * params.false_reject())
}
