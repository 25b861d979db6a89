use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// How the acceptance threshold is picked once rates and rounds are fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdStrategy {
    /// The Hoeffding-optimal `τ̂`.
    FiniteSample,
    /// The uniform-prior likelihood-ratio threshold `τ̃`.
    Asymptotic,
    /// The likelihood-ratio threshold under a non-uniform prior.
    Bayes { prior_attacker: f64 },
}

/// Where the verifier's assumed error rates come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateStrategy {
    /// Rates at the actual channel noise.
    TruePlugIn,
    /// Rates at a fixed noise guess.
    Guessed(f64),
    /// Rates at the point estimate `θ/k` from the coded phase.
    MaxLikelihood,
    /// Rates valid with probability `1 − δ` given the coded phase.
    HighProbability(f64),
}

impl RateStrategy {
    /// Guesses of 10⁻¹, 10⁻² and 10⁻³, the ML estimate, and the
    /// high-probability rates at δ = 0.1 and 0.01.
    pub fn standard_set() -> Vec<Self> {
        vec![
            Self::Guessed(0.1),
            Self::Guessed(0.01),
            Self::Guessed(0.001),
            Self::MaxLikelihood,
            Self::HighProbability(0.1),
            Self::HighProbability(0.01),
        ]
    }
}

impl fmt::Display for ThresholdStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FiniteSample => f.write_str("finite"),
            Self::Asymptotic => f.write_str("asymptotic"),
            Self::Bayes { prior_attacker } => write!(f, "bayes:{prior_attacker}"),
        }
    }
}

impl fmt::Display for RateStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TruePlugIn => f.write_str("true"),
            Self::Guessed(w) => write!(f, "guess:{w}"),
            Self::MaxLikelihood => f.write_str("ml"),
            Self::HighProbability(d) => write!(f, "hp:{d}"),
        }
    }
}

fn parameter(label: &str, text: &str) -> Result<f64, Error> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidArgument(format!("bad numeric parameter in strategy `{label}`")))
}

impl FromStr for ThresholdStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.split_once(':') {
            None if s == "finite" => Ok(Self::FiniteSample),
            None if s == "asymptotic" => Ok(Self::Asymptotic),
            Some(("bayes", p)) => {
                let prior_attacker = parameter(s, p)?;
                if prior_attacker > 0.0 && prior_attacker < 1.0 {
                    Ok(Self::Bayes { prior_attacker })
                } else {
                    Err(Error::InvalidArgument(format!("prior in `{s}` must lie in (0, 1)")))
                }
            }
            _ => Err(Error::InvalidArgument(format!(
                "unknown threshold strategy `{s}` (expected finite, asymptotic or bayes:<prior>)"
            ))),
        }
    }
}

impl FromStr for RateStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let in_unit = |v: f64, open: bool| {
            if open {
                v > 0.0 && v < 1.0
            } else {
                (0.0..=1.0).contains(&v)
            }
        };
        match s.split_once(':') {
            None if s == "true" => Ok(Self::TruePlugIn),
            None if s == "ml" => Ok(Self::MaxLikelihood),
            Some(("guess", w)) => {
                let w = parameter(s, w)?;
                in_unit(w, false)
                    .then_some(Self::Guessed(w))
                    .ok_or(Error::InvalidProbability {
                        name: "guessed noise",
                        value: w,
                    })
            }
            Some(("hp", d)) => {
                let d = parameter(s, d)?;
                in_unit(d, true)
                    .then_some(Self::HighProbability(d))
                    .ok_or_else(|| Error::InvalidArgument(format!("confidence in `{s}` must lie in (0, 1)")))
            }
            _ => Err(Error::InvalidArgument(format!(
                "unknown rate strategy `{s}` (expected true, ml, guess:<omega> or hp:<delta>)"
            ))),
        }
    }
}
