//! Acceptance checks. Runs as a plain binary so every check prints a
//! PASS/FAIL line; exits nonzero if any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use noisyauth_core::asymptotic::{
    approx_threshold, asymptotic_threshold, bayes_risk, bayes_threshold, HypothesisPrior,
};
use noisyauth_core::bounds::{
    loss_bound_formula, optimal_rounds, optimal_threshold, rounds_loss_bound, threshold_loss_bound,
};
use noisyauth_core::channel::{run_trials, swiss_hitomi_rates, trial_rng, ChannelModel, RapidBitExchangeConfig};
use noisyauth_core::exact::brute_force_optimal;
use noisyauth_core::experiments::{
    figure1a_sweep, figure3_comparison, win_fraction, write_csv, ExperimentSpec, RateStrategy, SweepRow,
    ThresholdStrategy,
};
use noisyauth_core::noise::{estimate_noise, simulate_coded_phase, TransparentCode};
use noisyauth_core::{ErrorRateBounds, LossParameters, ProverIdentity};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn within_budget(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed < Duration::from_secs(limit_secs)
}

fn reference_rates(omega: f64) -> ErrorRateBounds {
    swiss_hitomi_rates(&ChannelModel::new(omega).unwrap()).unwrap()
}

fn rounds_sweep_rows() -> Vec<SweepRow> {
    figure1a_sweep(&ExperimentSpec::rounds_sweep()).unwrap()
}

fn bound_dominance() -> Outcome {
    let start = Instant::now();
    let rows = rounds_sweep_rows();
    let elapsed = start.elapsed();
    let violations: Vec<_> = rows.iter().filter(|r| r.elb1 < r.exact_worst - 1e-12).collect();
    let min_slack = rows
        .iter()
        .map(|r| r.elb1 - r.exact_worst)
        .fold(f64::INFINITY, f64::min);
    Outcome::new(
        violations.is_empty() && rows.len() == 512 && within_budget(elapsed, 10),
        format!(
            "{} rows, {} violations, min slack {min_slack:.3e}, {:.2}s",
            rows.len(),
            violations.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn argmin_by(rows: &[&SweepRow], key: impl Fn(&SweepRow) -> f64) -> u32 {
    rows.iter()
        .min_by(|a, b| key(a).total_cmp(&key(b)).then(a.n.cmp(&b.n)))
        .map(|r| r.n)
        .unwrap()
}

fn factor_two_minimizers() -> Outcome {
    let start = Instant::now();
    let params = LossParameters::reference();
    let rows = rounds_sweep_rows();
    let mut pass = true;
    let mut parts = Vec::new();
    for omega in [0.1, 0.01] {
        let curve: Vec<&SweepRow> = rows.iter().filter(|r| r.omega == omega).collect();
        let exact_argmin = argmin_by(&curve, |r| r.exact_worst);
        let bound_argmin = argmin_by(&curve, |r| r.elb1);
        let ratio = f64::from(exact_argmin.max(bound_argmin)) / f64::from(exact_argmin.min(bound_argmin));
        let rates = reference_rates(omega);
        let n_hat = optimal_rounds(&params, &rates).unwrap().rounds;
        let best = brute_force_optimal(&params, &rates, 512).unwrap();
        let ok = ratio <= 2.0 && n_hat >= best.rounds;
        pass &= ok;
        parts.push(format!(
            "omega={omega}: argmin exact={exact_argmin} argmin ELb1={bound_argmin} ratio={ratio:.2}, n_hat={n_hat} n*={} [{}]",
            best.rounds,
            if ok { "ok" } else { "violated" }
        ));
    }
    let elapsed = start.elapsed();
    pass &= within_budget(elapsed, 30);
    parts.push(format!("{:.2}s", elapsed.as_secs_f64()));
    Outcome::new(pass, parts.join("; "))
}

fn bound_consistency() -> Outcome {
    let mut rng = trial_rng(2024, 0, 0);
    let log_uniform = |rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64| (rng.gen_range(lo.ln()..hi.ln())).exp();
    let losses: Vec<LossParameters> = (0..10)
        .map(|_| {
            LossParameters::new(
                log_uniform(&mut rng, 1.0, 100.0),
                log_uniform(&mut rng, 1.0, 100.0),
                log_uniform(&mut rng, 1e-3, 1e-1),
            )
            .unwrap()
        })
        .collect();
    let rates: Vec<ErrorRateBounds> = (0..10)
        .map(|_| {
            let pu = rng.gen_range(0.0..0.9);
            let pa = rng.gen_range(pu + 0.05..=1.0);
            ErrorRateBounds::new(pa, pu).unwrap()
        })
        .collect();
    let mut worst_branch_gap: f64 = 0.0;
    let mut worst_chain_excess = f64::NEG_INFINITY;
    let mut failures = 0;
    for p in &losses {
        for r in &rates {
            let n_hat = optimal_rounds(p, r).unwrap().rounds;
            let tau = optimal_threshold(p, r, n_hat).raw;
            let report = loss_bound_formula(p, r, n_hat, tau);
            let branch_gap = (report.user_term - report.attacker_term).abs();
            let chain_excess = threshold_loss_bound(p, r, n_hat) - rounds_loss_bound(p, r).unwrap();
            worst_branch_gap = worst_branch_gap.max(branch_gap);
            worst_chain_excess = worst_chain_excess.max(chain_excess);
            if branch_gap > 1e-12 || chain_excess > 1e-12 {
                failures += 1;
            }
        }
    }
    Outcome::new(
        failures == 0,
        format!(
            "100 points, {failures} failures, max branch gap {worst_branch_gap:.2e}, max ELb1(n_hat)-ELb2 {worst_chain_excess:.3e}"
        ),
    )
}

fn frozen_values() -> Outcome {
    // independently computed with 50-digit arithmetic
    let params = LossParameters::reference();
    let rates = reference_rates(0.1);
    let checks = [
        ("tau_hat", optimal_threshold(&params, &rates, 64).raw, 22.35530, 1e-4),
        (
            "n_hat_real",
            optimal_rounds(&params, &rates).unwrap().real,
            64.152,
            1e-3,
        ),
        ("ELb2", rounds_loss_bound(&params, &rates).unwrap(), 1.43707, 1e-4),
        (
            "tau_tilde",
            asymptotic_threshold(&params, &rates, 64).unwrap(),
            21.7524,
            1e-3,
        ),
        (
            "tau_tilde_approx",
            approx_threshold(&params, rates.midpoint(), rates.gap(), 64).unwrap(),
            22.4581,
            1e-3,
        ),
    ];
    let mut pass = true;
    let parts: Vec<String> = checks
        .iter()
        .map(|(name, got, want, tol)| {
            let ok = (got - want).abs() <= *tol;
            pass &= ok;
            format!("{name}={got:.6} ({})", if ok { "ok" } else { "off" })
        })
        .collect();
    Outcome::new(pass, parts.join(", "))
}

fn enumerate_acceptance(n: u32, p: f64, tau: f64) -> f64 {
    (0u32..1 << n)
        .filter(|mask| f64::from(mask.count_ones()) < tau)
        .map(|mask| {
            let k = mask.count_ones() as i32;
            p.powi(k) * (1.0 - p).powi(n as i32 - k)
        })
        .sum()
}

fn monte_carlo_oracle() -> Outcome {
    let (n, tau, p, trials) = (4, 2.0, 0.55, 100_000u32);
    let truth = enumerate_acceptance(n, p, tau);
    let config = RapidBitExchangeConfig::new(n, tau, p, p).unwrap();
    let outcomes = run_trials(
        &config,
        &LossParameters::reference(),
        ProverIdentity::User,
        trials,
        7,
        0,
    );
    let rate = outcomes.iter().filter(|o| o.accepted).count() as f64 / f64::from(trials);
    let se = (truth * (1.0 - truth) / f64::from(trials)).sqrt();
    let z = (rate - truth) / se;
    let warn = if z.abs() > 3.0 { " (beyond 3 sigma)" } else { "" };
    Outcome::new(
        z.abs() <= 5.0 && (truth - 0.2414813).abs() < 1e-7,
        format!("enumerated {truth:.8}, simulated {rate:.5}, z={z:+.2}{warn}"),
    )
}

fn bayes_optimality() -> Outcome {
    let start = Instant::now();
    let grid: Vec<f64> = (1..=9).map(|i| f64::from(i) / 10.0).collect();
    let prior = HypothesisPrior::uniform();
    let mut points = 0;
    let mut failures = 0;
    for la in [1.0, 10.0] {
        let params = LossParameters::new(la, 1.0, 0.01).unwrap();
        for (i, &pu) in grid.iter().enumerate() {
            for &pa in &grid[i + 1..] {
                let rates = ErrorRateBounds::new(pa, pu).unwrap();
                for n in 2..=16u32 {
                    points += 1;
                    let tau_b = bayes_threshold(&params, &rates, &prior, n).unwrap();
                    let at_tau_b = bayes_risk(&params, &rates, &prior, n, tau_b).unwrap();
                    let best = (0..=n + 1)
                        .map(|t| bayes_risk(&params, &rates, &prior, n, f64::from(t)).unwrap())
                        .fold(f64::INFINITY, f64::min);
                    if at_tau_b > best + 1e-12 {
                        failures += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        failures == 0 && within_budget(elapsed, 5),
        format!("{points} points, {failures} failures, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn estimator_coverage() -> Outcome {
    let (k, omega, delta, runs) = (1024usize, 0.1, 0.01, 10_000u64);
    let channel = ChannelModel::new(omega).unwrap();
    let code = TransparentCode::for_length(k).unwrap();
    let mut covered = 0u64;
    let mut aborted = 0u64;
    let mut half_width = f64::NAN;
    for run in 0..runs {
        let phase = simulate_coded_phase(&channel, &code, &mut trial_rng(99, 0, run));
        let Some(theta) = phase.observed_errors() else {
            aborted += 1;
            continue;
        };
        let est = estimate_noise(theta, k, delta).unwrap();
        half_width = est.half_width;
        if (est.point - omega).abs() < 0.050863 {
            covered += 1;
        }
    }
    let coverage = covered as f64 / runs as f64;
    Outcome::new(
        coverage >= 0.985,
        format!(
            "coverage {:.2}% over {runs} phases ({aborted} aborted), half-width {half_width:.6}",
            coverage * 100.0
        ),
    )
}

fn select<'a>(
    rows: &'a [SweepRow],
    threshold: &str,
    rate: &str,
    keep: impl Fn(&SweepRow) -> bool,
) -> Vec<&'a SweepRow> {
    rows.iter()
        .filter(|r| r.threshold_strategy == threshold && r.rate_strategy == rate && keep(r))
        .collect()
}

fn strategy_claims() -> Outcome {
    let start = Instant::now();

    // (a) high-probability rates against the ML estimate, at the near-optimal round count
    let spec = ExperimentSpec {
        seed: 1,
        ..ExperimentSpec::noise_comparison()
    };
    let rows = figure3_comparison(&spec).unwrap();
    let quiet = |r: &SweepRow| r.omega <= 0.15;
    let mut wins_a = Vec::new();
    for threshold in ["finite", "asymptotic"] {
        let ml = select(&rows, threshold, "ml", quiet);
        for hp in ["hp:0.1", "hp:0.01"] {
            let candidate = select(&rows, threshold, hp, quiet);
            assert!(candidate.iter().zip(&ml).all(|(a, b)| a.omega == b.omega));
            wins_a.push((
                format!("{hp}/{threshold}"),
                win_fraction(&candidate, &ml).unwrap_or(0.0),
            ));
        }
    }
    let total_a = wins_a.iter().map(|(_, w)| w).sum::<f64>() / wins_a.len() as f64;

    // (b) finite-sample against asymptotic thresholds, short runs with a small gap
    let noisy: Vec<f64> = (0..7).map(|i| 0.2 + 0.02 * f64::from(i)).collect();
    let spec = ExperimentSpec {
        noise_grid: noisy,
        rounds_grid: Some((1..=8).map(|i| 4 * i).collect()),
        rate_strategies: vec![RateStrategy::TruePlugIn],
        threshold_strategies: vec![ThresholdStrategy::FiniteSample, ThresholdStrategy::Asymptotic],
        seed: 2,
        ..ExperimentSpec::noise_comparison()
    };
    let rows = figure3_comparison(&spec).unwrap();
    let small_gap = |r: &SweepRow| r.n <= 32 && (1.0 - 3.0 * r.omega) / 2.0 <= 0.2 + 1e-12;
    let finite = select(&rows, "finite", "true", small_gap);
    let asymptotic = select(&rows, "asymptotic", "true", small_gap);
    let total_b = win_fraction(&finite, &asymptotic).unwrap_or(0.0);

    let elapsed = start.elapsed();
    let detail_a: Vec<String> = wins_a.iter().map(|(l, w)| format!("{l} {:.0}%", w * 100.0)).collect();
    Outcome::new(
        total_a >= 0.6 && total_b >= 0.6 && within_budget(elapsed, 300),
        format!(
            "(a) hp<=ml on {:.0}% [{}]; (b) finite<=asymptotic on {:.0}% of {} points; {:.1}s",
            total_a * 100.0,
            detail_a.join(", "),
            total_b * 100.0,
            finite.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let render = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let rows = pool.install(rounds_sweep_rows);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        buf
    };
    let first = render(1);
    let second = render(4);
    let third = render(4);
    Outcome::new(
        first == second && second == third,
        format!(
            "{} bytes, identical across 1- and 4-thread runs: {}",
            first.len(),
            first == second && second == third
        ),
    )
}

type Check = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let checks: [Check; 9] = [
        ("bound dominance", bound_dominance),
        ("factor-two minimizers", factor_two_minimizers),
        ("bound self-consistency", bound_consistency),
        ("reference values", frozen_values),
        ("Monte Carlo oracle", monte_carlo_oracle),
        ("Bayes optimality", bayes_optimality),
        ("estimator coverage", estimator_coverage),
        ("strategy comparison", strategy_claims),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = check();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {}. {name}: {}", i + 1, outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
