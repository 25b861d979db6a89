//! Exact acceptance probabilities and losses for `{0,1}` per-round errors.
//!
//! When every round either errs or not, the total error is binomial and the
//! expected losses can be computed exactly. This is the ground truth the
//! Hoeffding bounds are checked against.

use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;

use crate::error::{check_finite, check_probability, Error, Result};
use crate::loss::{expected_loss, worst_case_expected_loss, ErrorRateBounds, LossParameters, ProverIdentity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialSpec {
    trials: u32,
    success_prob: f64,
}

impl BinomialSpec {
    pub fn new(trials: u32, success_prob: f64) -> Result<Self> {
        check_probability("success probability", success_prob)?;
        Ok(Self { trials, success_prob })
    }

    pub fn trials(&self) -> u32 {
        self.trials
    }

    pub fn success_prob(&self) -> f64 {
        self.success_prob
    }

    /// `Pr(X = k)`, evaluated in log space.
    pub fn pmf(&self, k: u32) -> f64 {
        let n = self.trials;
        let mu = self.success_prob;
        if k > n {
            return 0.0;
        }
        if mu == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        if mu == 1.0 {
            return if k == n { 1.0 } else { 0.0 };
        }
        let ln_term =
            ln_binomial(u64::from(n), u64::from(k)) + f64::from(k) * mu.ln() + f64::from(n - k) * (-mu).ln_1p();
        ln_term.exp()
    }

    /// `Pr(X ≤ u)`.
    pub fn cdf(&self, u: u32) -> f64 {
        if u >= self.trials {
            return 1.0;
        }
        let sum: f64 = (0..=u).map(|k| self.pmf(k)).sum();
        sum.min(1.0)
    }

    /// `Pr(X ≥ u)`, taken as the complement of the lower tail.
    pub fn upper_tail(&self, u: u32) -> f64 {
        match u.checked_sub(1) {
            None => 1.0,
            Some(below) => 1.0 - self.cdf(below),
        }
    }

    /// `Pr(X ≤ u)` for every `u` in `0..=n`, in one pass.
    pub fn cdf_table(&self) -> Vec<f64> {
        let n = self.trials;
        let mut acc = 0.0;
        let mut table: Vec<f64> = (0..=n)
            .map(|k| {
                acc += self.pmf(k);
                acc.min(1.0)
            })
            .collect();
        table[n as usize] = 1.0;
        table
    }

    /// `Pr(X < tau)` for a real threshold.
    pub fn prob_below(&self, tau: f64) -> f64 {
        match max_count_below(tau) {
            None => 0.0,
            Some(u) => self.cdf(u.min(u64::from(self.trials)) as u32),
        }
    }
}

/// Largest integer count strictly below `tau`, or `None` if no count is.
///
/// For non-integer `tau` this is `⌈τ⌉ − 1`; for integer `tau` it is `τ − 1`.
pub fn max_count_below(tau: f64) -> Option<u64> {
    if tau.is_nan() || tau <= 0.0 {
        return None;
    }
    if tau.is_infinite() {
        return Some(u64::MAX);
    }
    Some(tau.ceil() as u64 - 1)
}

/// `binomial_cdf(spec, u)` with `u > n` giving 1.
pub fn binomial_cdf(spec: &BinomialSpec, u: u64) -> f64 {
    if u >= u64::from(spec.trials()) {
        1.0
    } else {
        spec.cdf(u as u32)
    }
}

/// Probability that a prover with the given per-round error rate is accepted
/// (`ε < τ`) after `n` rounds.
pub fn acceptance_probability(n: u32, per_round_error: f64, tau: f64) -> Result<f64> {
    check_finite("threshold", tau)?;
    Ok(BinomialSpec::new(n, per_round_error)?.prob_below(tau))
}

/// Exact `E(L | identity)` for `{0,1}` errors with the given per-round error probability.
pub fn exact_expected_loss(
    params: &LossParameters,
    n: u32,
    tau: f64,
    per_round_error: f64,
    identity: ProverIdentity,
) -> Result<f64> {
    let accept = acceptance_probability(n, per_round_error, tau)?;
    expected_loss(params, n, accept, identity)
}

/// Exact losses for both identities, with per-round error probabilities
/// `attacker_error` and `user_error`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactLosses {
    pub user: f64,
    pub attacker: f64,
}

impl ExactLosses {
    pub fn worst(&self) -> f64 {
        worst_case_expected_loss(self.user, self.attacker)
    }
}

pub fn exact_losses(
    params: &LossParameters,
    n: u32,
    tau: f64,
    attacker_error: f64,
    user_error: f64,
) -> Result<ExactLosses> {
    Ok(ExactLosses {
        user: exact_expected_loss(params, n, tau, user_error, ProverIdentity::User)?,
        attacker: exact_expected_loss(params, n, tau, attacker_error, ProverIdentity::Attacker)?,
    })
}

/// Exact worst-case loss when the per-round error rates sit exactly at the bounds.
pub fn exact_worst_case(params: &LossParameters, rates: &ErrorRateBounds, n: u32, tau: f64) -> Result<f64> {
    Ok(exact_losses(params, n, tau, rates.attacker_floor(), rates.user_ceiling())?.worst())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceOptimum {
    pub rounds: u32,
    pub threshold: u32,
    pub worst: f64,
}

fn best_threshold_for(params: &LossParameters, rates: &ErrorRateBounds, n: u32) -> BruteForceOptimum {
    let att = BinomialSpec {
        trials: n,
        success_prob: rates.attacker_floor(),
    }
    .cdf_table();
    let usr = BinomialSpec {
        trials: n,
        success_prob: rates.user_ceiling(),
    }
    .cdf_table();
    let base = params.round_cost(n);
    let mut best = BruteForceOptimum {
        rounds: n,
        threshold: 0,
        worst: f64::INFINITY,
    };
    for tau in 0..=n {
        // accept iff count <= tau - 1
        let (acc_a, acc_u) = match tau.checked_sub(1) {
            None => (0.0, 0.0),
            Some(u) => (att[u as usize], usr[u as usize]),
        };
        let worst = (base + acc_a * params.false_accept()).max(base + (1.0 - acc_u) * params.false_reject());
        if worst < best.worst {
            best = BruteForceOptimum {
                rounds: n,
                threshold: tau,
                worst,
            };
        }
    }
    best
}

/// Exhaustive minimum of the exact worst-case loss over `n ∈ 1..=n_max` and
/// integer thresholds `0..=n`. Ties go to the smallest `n`, then the smallest
/// threshold; the result does not depend on how the search is parallelized.
pub fn brute_force_optimal(params: &LossParameters, rates: &ErrorRateBounds, n_max: u32) -> Result<BruteForceOptimum> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let per_n: Vec<BruteForceOptimum> = (1..=n_max)
        .into_par_iter()
        .map(|n| best_threshold_for(params, rates, n))
        .collect();
    let best = per_n
        .into_iter()
        .reduce(|best, cand| if cand.worst < best.worst { cand } else { best })
        .expect("n_max >= 1");
    Ok(best)
}
