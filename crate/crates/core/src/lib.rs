//! Expected-loss analysis of thresholded multi-round challenge-response
//! authentication over noisy channels.
//!
//! A verifier runs `n` challenge-response rounds, counts the prover's
//! errors `ε`, and accepts iff `ε < τ`. Each round costs `ℓB`, accepting an
//! attacker costs `ℓA`, and rejecting the legitimate user costs `ℓU`. This
//! crate picks `τ` and `n` so that the worst-case expected loss stays small.
//! It provides:
//!
//! - [`bounds`]: Hoeffding loss bounds with the near-optimal `τ̂` and `n̂`.
//! - [`exact`]: exact binomial losses and a brute-force optimum as ground truth.
//! - [`asymptotic`]: Bayesian likelihood-ratio thresholds for comparison.
//! - [`channel`]: the binary symmetric channel, the Swiss-Knife/Hitomi
//!   mapping, and a seeded Monte Carlo simulator.
//! - [`noise`]: channel-noise estimation from the coded protocol phases.
//! - [`experiments`]: the sweeps behind the CLI, plus CSV output.

pub mod asymptotic;
pub mod bounds;
pub mod channel;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod loss;
pub mod noise;

pub use error::{Error, Result};
pub use loss::{ErrorRateBounds, LossParameters, ProtocolConfig, ProverIdentity};
