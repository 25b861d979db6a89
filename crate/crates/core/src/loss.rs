//! Loss structure of a thresholded challenge-response phase.
//!
//! A run of `n` rounds always costs `n * per_round`. On top of that, accepting
//! an attacker costs `false_accept` and rejecting the legitimate user costs
//! `false_reject`. The verifier does not know who it is talking to, so the
//! quantity we control is the worst case over the two identities.

use std::fmt;

use crate::error::{check_finite, check_positive, check_probability, Error, Result};

/// The three losses `ℓA`, `ℓU`, `ℓB`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParameters {
    false_accept: f64,
    false_reject: f64,
    per_round: f64,
}

impl LossParameters {
    /// All three losses must be strictly positive.
    pub fn new(false_accept: f64, false_reject: f64, per_round: f64) -> Result<Self> {
        check_positive("per-round loss", per_round)?;
        Self::allowing_free_rounds(false_accept, false_reject, per_round)
    }

    /// Like [`LossParameters::new`] but accepts a zero per-round loss.
    ///
    /// Only useful for threshold-level analysis: the round-count optimizer
    /// divides by the per-round loss and rejects these parameters.
    pub fn allowing_free_rounds(false_accept: f64, false_reject: f64, per_round: f64) -> Result<Self> {
        check_positive("false-accept loss", false_accept)?;
        check_positive("false-reject loss", false_reject)?;
        check_finite("per-round loss", per_round)?;
        if per_round < 0.0 {
            return Err(Error::NonPositive {
                name: "per-round loss",
                value: per_round,
            });
        }
        Ok(Self {
            false_accept,
            false_reject,
            per_round,
        })
    }

    /// The losses used throughout the published experiments: `ℓA = 10`, `ℓU = 1`, `ℓB = 0.01`.
    pub fn reference() -> Self {
        Self {
            false_accept: 10.0,
            false_reject: 1.0,
            per_round: 1e-2,
        }
    }

    pub fn false_accept(&self) -> f64 {
        self.false_accept
    }

    pub fn false_reject(&self) -> f64 {
        self.false_reject
    }

    pub fn per_round(&self) -> f64 {
        self.per_round
    }

    /// `ρ = ℓA / ℓU`.
    pub fn ratio(&self) -> f64 {
        self.false_accept / self.false_reject
    }

    /// `√(ℓA ℓU)`, the scale of the misclassification term in the loss bounds.
    pub fn geometric_mean(&self) -> f64 {
        (self.false_accept * self.false_reject).sqrt()
    }

    /// Cost of running `n` rounds.
    pub fn round_cost(&self, n: u32) -> f64 {
        f64::from(n) * self.per_round
    }
}

/// Per-round expected-error bounds: the attacker errs at least `pₐ` per
/// round on average, the user at most `pᵤ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRateBounds {
    attacker_floor: f64,
    user_ceiling: f64,
}

impl ErrorRateBounds {
    /// Requires `0 ≤ pᵤ < pₐ ≤ 1`.
    pub fn new(attacker_floor: f64, user_ceiling: f64) -> Result<Self> {
        check_probability("attacker error floor", attacker_floor)?;
        check_probability("user error ceiling", user_ceiling)?;
        if attacker_floor <= user_ceiling {
            return Err(Error::GapCollapse {
                attacker: attacker_floor,
                user: user_ceiling,
            });
        }
        Ok(Self {
            attacker_floor,
            user_ceiling,
        })
    }

    pub fn attacker_floor(&self) -> f64 {
        self.attacker_floor
    }

    pub fn user_ceiling(&self) -> f64 {
        self.user_ceiling
    }

    /// `Δ = pₐ − pᵤ`, always positive.
    pub fn gap(&self) -> f64 {
        self.attacker_floor - self.user_ceiling
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.attacker_floor + self.user_ceiling)
    }
}

/// Round count and acceptance threshold of one protocol instance.
///
/// The verifier accepts iff the total error is strictly below the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    rounds: u32,
    threshold: f64,
}

impl ProtocolConfig {
    pub fn new(rounds: u32, threshold: f64) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidArgument("round count must be at least 1".into()));
        }
        check_finite("threshold", threshold)?;
        let high = f64::from(rounds);
        if !(0.0..=high).contains(&threshold) {
            return Err(Error::ThresholdOutOfRange {
                tau: threshold,
                low: 0.0,
                high,
            });
        }
        Ok(Self { rounds, threshold })
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn accepts(&self, total_error: f64) -> bool {
        total_error < self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProverIdentity {
    User,
    Attacker,
}

impl ProverIdentity {
    pub const BOTH: [ProverIdentity; 2] = [ProverIdentity::User, ProverIdentity::Attacker];
}

impl fmt::Display for ProverIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProverIdentity::User => f.write_str("user"),
            ProverIdentity::Attacker => f.write_str("attacker"),
        }
    }
}

/// Loss of a single run: round cost plus the misclassification loss, if any.
pub fn realized_loss(params: &LossParameters, n: u32, identity: ProverIdentity, accepted: bool) -> f64 {
    let base = params.round_cost(n);
    match (identity, accepted) {
        (ProverIdentity::Attacker, true) => base + params.false_accept,
        (ProverIdentity::User, false) => base + params.false_reject,
        _ => base,
    }
}

/// `E(L | identity)` given the probability that this identity is accepted.
pub fn expected_loss(params: &LossParameters, n: u32, accept_prob: f64, identity: ProverIdentity) -> Result<f64> {
    check_probability("acceptance probability", accept_prob)?;
    let base = params.round_cost(n);
    Ok(match identity {
        ProverIdentity::Attacker => base + accept_prob * params.false_accept,
        ProverIdentity::User => base + (1.0 - accept_prob) * params.false_reject,
    })
}

/// `max{E(L|U), E(L|A)}`, which bounds the expected loss under any prior on the prover.
pub fn worst_case_expected_loss(loss_user: f64, loss_attacker: f64) -> f64 {
    loss_user.max(loss_attacker)
}
