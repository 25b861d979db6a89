use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use noisyauth_core::asymptotic::asymptotic_threshold;
use noisyauth_core::bounds::{optimal_rounds, optimal_threshold, rounds_loss_bound, threshold_loss_bound};
use noisyauth_core::channel::{swiss_hitomi_rates, trial_rng, ChannelModel};
use noisyauth_core::exact::{brute_force_optimal, exact_losses};
use noisyauth_core::experiments::{
    emit_csv, figure1a_sweep, figure1b_sweep, figure3_comparison, log_grid, write_csv, ExperimentSpec, RateStrategy,
    SweepRow, ThresholdStrategy,
};
use noisyauth_core::noise::{estimate_noise, high_probability_rates, simulate_coded_phase, TransparentCode};
use noisyauth_core::{ErrorRateBounds, LossParameters};

/// Expected-loss analysis of noisy challenge-response authentication.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Near-optimal threshold, round count and loss bounds for one setting.
    Bounds(BoundsOpts),
    /// Exact losses at (n, tau), or the exhaustive optimum when tau is omitted.
    Exact(ExactOpts),
    /// Loss versus round count at the finite-sample threshold.
    Fig1a(Fig1aOpts),
    /// Exhaustive and near-optimal round counts versus channel noise.
    Fig1b(Fig1bOpts),
    /// Monte Carlo loss versus noise for each rate and threshold strategy.
    Fig3(Fig3Opts),
    /// Simulate one coded phase and report the noise estimate.
    EstimateNoise(NoiseOpts),
}

#[derive(Args)]
struct LossArgs {
    /// Loss from accepting an attacker.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    la: f64,
    /// Loss from rejecting the user.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    lu: f64,
    /// Cost per round.
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    lb: f64,
}

impl LossArgs {
    fn params(&self) -> Result<LossParameters> {
        Ok(LossParameters::new(self.la, self.lu, self.lb)?)
    }
}

#[derive(Args)]
struct RateArgs {
    /// Channel noise; rates follow the Swiss-Knife/Hitomi mapping.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true, conflicts_with_all = ["pa", "pu"])]
    omega: f64,
    /// Explicit lower bound on the attacker's per-round error rate.
    #[arg(long, requires = "pu")]
    pa: Option<f64>,
    /// Explicit upper bound on the user's per-round error rate.
    #[arg(long, requires = "pa")]
    pu: Option<f64>,
}

impl RateArgs {
    fn rates(&self) -> Result<ErrorRateBounds> {
        match (self.pa, self.pu) {
            (Some(pa), Some(pu)) => Ok(ErrorRateBounds::new(pa, pu)?),
            _ => Ok(swiss_hitomi_rates(&ChannelModel::new(self.omega)?)?),
        }
    }
}

#[derive(Args)]
struct BoundsOpts {
    #[command(flatten)]
    loss: LossArgs,
    #[command(flatten)]
    rates: RateArgs,
    /// Round count to evaluate; defaults to the near-optimal count.
    #[arg(long)]
    n: Option<u32>,
}

#[derive(Args)]
struct ExactOpts {
    #[command(flatten)]
    loss: LossArgs,
    #[command(flatten)]
    rates: RateArgs,
    /// Round count (required with --tau; otherwise the search limit).
    #[arg(long, default_value_t = 256)]
    n: u32,
    /// Acceptance threshold: accept iff errors < tau.
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutputArgs {
    fn write(&self, rows: &[SweepRow]) -> Result<()> {
        match &self.out {
            Some(path) => emit_csv(rows, path)?,
            None => write_csv(rows, io::stdout().lock()).context("writing CSV to stdout")?,
        }
        Ok(())
    }
}

#[derive(Args)]
struct Fig1aOpts {
    #[command(flatten)]
    loss: LossArgs,
    /// Noise levels (comma-separated).
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.1])]
    omega: Vec<f64>,
    /// Largest round count.
    #[arg(long, default_value_t = 256)]
    n_max: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct NoiseGridArgs {
    /// Noise levels (comma-separated); defaults to a log grid.
    #[arg(long, value_delimiter = ',')]
    omega: Vec<f64>,
    /// Size of the default log grid over [omega-min, omega-max].
    #[arg(long, default_value_t = 24)]
    points: usize,
    #[arg(long, default_value_t = 1e-3)]
    omega_min: f64,
    #[arg(long, default_value_t = 0.3)]
    omega_max: f64,
}

impl NoiseGridArgs {
    fn grid(&self) -> Result<Vec<f64>> {
        if !self.omega.is_empty() {
            return Ok(self.omega.clone());
        }
        if !(self.omega_min > 0.0 && self.omega_min <= self.omega_max) {
            bail!("need 0 < omega-min <= omega-max");
        }
        Ok(log_grid(self.omega_min, self.omega_max, self.points))
    }
}

#[derive(Args)]
struct Fig1bOpts {
    #[command(flatten)]
    loss: LossArgs,
    #[command(flatten)]
    grid: NoiseGridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct Fig3Opts {
    #[command(flatten)]
    loss: LossArgs,
    #[command(flatten)]
    grid: NoiseGridArgs,
    /// Codeword length of the coded phases; also caps the round count.
    #[arg(long, default_value_t = 1024)]
    k: usize,
    /// Decoder correction radius; defaults to k/3.
    #[arg(long)]
    radius: Option<usize>,
    /// Fixed round counts (comma-separated) instead of the near-optimal count.
    #[arg(long, value_delimiter = ',')]
    n: Vec<u32>,
    /// Monte Carlo trials per prover identity.
    #[arg(long, default_value_t = 10_000)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rate strategies: true, ml, guess:<omega>, hp:<delta>.
    #[arg(long = "strategy", value_delimiter = ',')]
    strategies: Vec<RateStrategy>,
    /// Threshold strategies: finite, asymptotic, bayes:<prior>.
    #[arg(long = "threshold", value_delimiter = ',', default_values = ["finite", "asymptotic"])]
    thresholds: Vec<ThresholdStrategy>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct NoiseOpts {
    /// True channel noise used in the simulation.
    #[arg(long, default_value_t = 0.1)]
    omega: f64,
    #[arg(long, default_value_t = 1024)]
    k: usize,
    /// Decoder correction radius; defaults to k/3.
    #[arg(long)]
    radius: Option<usize>,
    /// Confidence parameter of the interval.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn bounds(opts: &BoundsOpts, out: &mut impl Write) -> Result<()> {
    let params = opts.loss.params()?;
    let rates = opts.rates.rates()?;
    let rounds = optimal_rounds(&params, &rates)?;
    let n = opts.n.unwrap_or(rounds.rounds);
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let tau = optimal_threshold(&params, &rates, n);
    writeln!(out, "p_a\t{}", rates.attacker_floor())?;
    writeln!(out, "p_u\t{}", rates.user_ceiling())?;
    writeln!(out, "n_hat_real\t{}", rounds.real)?;
    writeln!(out, "n_hat\t{}", rounds.rounds)?;
    writeln!(out, "n\t{n}")?;
    writeln!(out, "tau_hat\t{}", tau.raw)?;
    writeln!(out, "tau_hat_clamped\t{}", tau.clamped)?;
    writeln!(out, "elb1\t{}", threshold_loss_bound(&params, &rates, n))?;
    writeln!(out, "elb2\t{}", rounds_loss_bound(&params, &rates)?)?;
    match asymptotic_threshold(&params, &rates, n) {
        Ok(t) => writeln!(out, "tau_asymptotic\t{t}")?,
        Err(e) => writeln!(out, "tau_asymptotic\tundefined ({e})")?,
    }
    Ok(())
}

fn exact(opts: &ExactOpts, out: &mut impl Write) -> Result<()> {
    let params = opts.loss.params()?;
    let rates = opts.rates.rates()?;
    if opts.n == 0 {
        bail!("--n must be at least 1");
    }
    match opts.tau {
        Some(tau) => {
            let losses = exact_losses(&params, opts.n, tau, rates.attacker_floor(), rates.user_ceiling())?;
            writeln!(out, "loss_user\t{}", losses.user)?;
            writeln!(out, "loss_attacker\t{}", losses.attacker)?;
            writeln!(out, "worst\t{}", losses.worst())?;
        }
        None => {
            let best = brute_force_optimal(&params, &rates, opts.n)?;
            writeln!(out, "n_star\t{}", best.rounds)?;
            writeln!(out, "tau_star\t{}", best.threshold)?;
            writeln!(out, "worst\t{}", best.worst)?;
        }
    }
    Ok(())
}

fn estimate(opts: &NoiseOpts, out: &mut impl Write) -> Result<()> {
    let channel = ChannelModel::new(opts.omega)?;
    let code = TransparentCode::with_correction_radius(opts.k, opts.radius.unwrap_or(opts.k / 3))?;
    let phase = simulate_coded_phase(&channel, &code, &mut trial_rng(opts.seed, 0, 0));
    writeln!(out, "flips\t{}", phase.flips)?;
    let Some(theta) = phase.observed_errors() else {
        writeln!(out, "aborted\ttrue")?;
        return Ok(());
    };
    let est = estimate_noise(theta, opts.k, opts.delta)?;
    writeln!(out, "aborted\tfalse")?;
    writeln!(out, "omega_hat\t{}", est.point)?;
    writeln!(out, "half_width\t{}", est.half_width)?;
    match high_probability_rates(&est) {
        Ok(r) => {
            writeln!(out, "p_a\t{}", r.attacker_floor())?;
            writeln!(out, "p_u\t{}", r.user_ceiling())?;
        }
        Err(e) => writeln!(out, "rates\tunavailable ({e})")?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Bounds(opts) => bounds(&opts, &mut stdout),
        Command::Exact(opts) => exact(&opts, &mut stdout),
        Command::EstimateNoise(opts) => estimate(&opts, &mut stdout),
        Command::Fig1a(opts) => {
            if opts.n_max == 0 {
                bail!("--n-max must be at least 1");
            }
            let spec = ExperimentSpec {
                losses: opts.loss.params()?,
                noise_grid: opts.omega.clone(),
                rounds_grid: Some((1..=opts.n_max).collect()),
                ..ExperimentSpec::rounds_sweep()
            };
            opts.output.write(&figure1a_sweep(&spec)?)
        }
        Command::Fig1b(opts) => {
            let spec = ExperimentSpec {
                losses: opts.loss.params()?,
                noise_grid: opts.grid.grid()?,
                ..ExperimentSpec::optimum_sweep()
            };
            opts.output.write(&figure1b_sweep(&spec)?)
        }
        Command::Fig3(opts) => {
            let defaults = ExperimentSpec::noise_comparison();
            let spec = ExperimentSpec {
                losses: opts.loss.params()?,
                noise_grid: opts.grid.grid()?,
                rounds_grid: (!opts.n.is_empty()).then(|| opts.n.clone()),
                trials: opts.trials,
                threshold_strategies: opts.thresholds.clone(),
                rate_strategies: if opts.strategies.is_empty() {
                    defaults.rate_strategies
                } else {
                    opts.strategies.clone()
                },
                codeword_len: opts.k,
                correction_radius: opts.radius.unwrap_or(opts.k / 3),
                seed: opts.seed,
            };
            opts.output.write(&figure3_comparison(&spec)?)
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}
