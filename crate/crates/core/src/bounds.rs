//! Finite-sample loss bounds and the thresholds/round counts that minimize them.
//!
//! Everything here holds for any per-round error in `[0, 1]`, not only
//! binary errors, because it rests on Hoeffding's inequality alone.

use crate::error::{check_positive, Error, Result};
use crate::loss::{ErrorRateBounds, LossParameters};

/// Hoeffding bound on `Pr(ΣXᵢ ≥ Σμᵢ + n t)` for `n` independent variables
/// each supported on an interval of width `range_width`.
pub fn hoeffding_tail(n: u32, t: f64, range_width: f64) -> Result<f64> {
    check_positive("deviation", t)?;
    check_positive("range width", range_width)?;
    let n = f64::from(n);
    Ok((-2.0 * n * t * t / (range_width * range_width)).exp())
}

/// Evaluated Hoeffding loss bound `ELb(n; τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub bound_value: f64,
    pub threshold: f64,
    pub rounds: u32,
    /// The two misclassification terms, user side first.
    pub user_term: f64,
    pub attacker_term: f64,
    /// Whether `n·pᵤ ≤ τ ≤ n·pₐ`, i.e. whether the value is a proven bound.
    pub valid: bool,
}

/// Evaluates the formula for `ELb(n; τ)` at any `τ`, flagging whether the
/// threshold lies in the range where it is a proven upper bound.
pub fn loss_bound_formula(params: &LossParameters, rates: &ErrorRateBounds, n: u32, tau: f64) -> BoundReport {
    let nf = f64::from(n);
    let low = nf * rates.user_ceiling();
    let high = nf * rates.attacker_floor();
    let user_term = (-2.0 / nf * (low - tau).powi(2)).exp() * params.false_reject();
    let attacker_term = (-2.0 / nf * (high - tau).powi(2)).exp() * params.false_accept();
    BoundReport {
        bound_value: params.round_cost(n) + user_term.max(attacker_term),
        threshold: tau,
        rounds: n,
        user_term,
        attacker_term,
        valid: low <= tau && tau <= high,
    }
}

/// `ELb(n; τ) ≥ max{E(L|A), E(L|U)}`, valid for `n·pᵤ ≤ τ ≤ n·pₐ`.
///
/// Thresholds outside that range are reported as an error; clamping is the
/// caller's decision.
pub fn loss_bound_at(params: &LossParameters, rates: &ErrorRateBounds, n: u32, tau: f64) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("round count must be at least 1".into()));
    }
    let report = loss_bound_formula(params, rates, n, tau);
    if !report.valid {
        let nf = f64::from(n);
        return Err(Error::ThresholdOutOfRange {
            tau,
            low: nf * rates.user_ceiling(),
            high: nf * rates.attacker_floor(),
        });
    }
    Ok(report)
}

/// Near-optimal threshold for a fixed round count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdChoice {
    /// The threshold clamped into `[n·pᵤ, n·pₐ]`.
    pub value: f64,
    /// `n(pₐ+pᵤ)/2 − ln(ρ)/(4Δ)` before clamping.
    pub raw: f64,
    pub clamped: bool,
}

/// `τ̂ = n(pₐ+pᵤ)/2 − ln(ρ)/(4Δ)`, the threshold equalizing the two terms of
/// the Hoeffding loss bound.
pub fn optimal_threshold(params: &LossParameters, rates: &ErrorRateBounds, n: u32) -> ThresholdChoice {
    let nf = f64::from(n);
    let raw = nf * rates.midpoint() - params.ratio().ln() / (4.0 * rates.gap());
    let low = nf * rates.user_ceiling();
    let high = nf * rates.attacker_floor();
    let value = raw.clamp(low, high);
    ThresholdChoice {
        value,
        raw,
        clamped: value != raw,
    }
}

/// `ELb₁(n) = n ℓB + e^{−nΔ²/2} √(ℓA ℓU)`.
pub fn threshold_loss_bound(params: &LossParameters, rates: &ErrorRateBounds, n: u32) -> f64 {
    threshold_loss_bound_real(params, rates.gap(), f64::from(n))
}

fn threshold_loss_bound_real(params: &LossParameters, gap: f64, n: f64) -> f64 {
    n * params.per_round() + (-0.5 * n * gap * gap).exp() * params.geometric_mean()
}

/// Near-optimal round count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundChoice {
    /// Integer round count used in practice.
    pub rounds: u32,
    /// `(√(1+2CK) − 1)/C` with `C = Δ²`, `K = √(ℓAℓU)/ℓB`.
    pub real: f64,
}

fn check_round_cost(params: &LossParameters) -> Result<()> {
    check_positive("per-round loss", params.per_round()).map(|_| ())
}

/// `n̂ = (√(1+2CK) − 1)/C`, rounded to whichever neighbouring integer (at
/// least 1) gives the smaller `ELb₁`.
pub fn optimal_rounds(params: &LossParameters, rates: &ErrorRateBounds) -> Result<RoundChoice> {
    check_round_cost(params)?;
    let c = rates.gap().powi(2);
    let k = params.geometric_mean() / params.per_round();
    // (√(1+x) − 1)/C rewritten as x/(C(√(1+x)+1)) to avoid cancellation for small x
    let x = 2.0 * c * k;
    let real = x / (c * ((1.0 + x).sqrt() + 1.0));
    let cap = f64::from(u32::MAX);
    let lo = real.floor().clamp(1.0, cap) as u32;
    let hi = real.ceil().clamp(1.0, cap) as u32;
    let rounds = if threshold_loss_bound(params, rates, lo) <= threshold_loss_bound(params, rates, hi) {
        lo
    } else {
        hi
    };
    Ok(RoundChoice { rounds, real })
}

/// `ELb₂ = √(8 ℓB) (ℓA ℓU)^{1/4} / Δ`, the bound at `(τ̂, n̂)`.
pub fn rounds_loss_bound(params: &LossParameters, rates: &ErrorRateBounds) -> Result<f64> {
    check_round_cost(params)?;
    Ok((8.0 * params.per_round()).sqrt() * params.geometric_mean().sqrt() / rates.gap())
}
