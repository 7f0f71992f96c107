//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use oneshot_core::checks::{
    cpf_battery, decoding_disjointness_sweep, lockstep_check, random_coset_state, random_script,
    reduction_battery, strong_unforgeability_exhaustive,
};
use oneshot_core::experiments::{run_experiment, ExperimentConfig, ExperimentName, Report};
use oneshot_core::{DeterministicRng, Params, Result, Seed};
use rand::Rng;

const SEED: u64 = 1;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn experiment(name: ExperimentName, trials: usize) -> Result<Report> {
    run_experiment(&ExperimentConfig::new(name, trials, Seed::from_u64(SEED)))
}

fn metric(report: &Report, key: &str) -> f64 {
    report.summary.metrics.get(key).copied().unwrap_or(f64::NAN)
}

fn symbolic_dense() -> Result<Outcome> {
    let mut rng = DeterministicRng::new(&Seed::from_u64(SEED), "acceptance/scripts");
    for i in 0..200 {
        let k = rng.gen_range(1..=8);
        let len = rng.gen_range(0..=12);
        let st = random_coset_state(&mut rng, k)?;
        let script = random_script(&mut rng, k, len);
        if let Some(why) = lockstep_check(&st, &script, &mut rng)? {
            return Ok(outcome(false, format!("script {i}: {why}")));
        }
    }
    Ok(outcome(true, "200 scripts"))
}

fn end_to_end() -> Result<Outcome> {
    let report = experiment(ExperimentName::SignRounds, 1000)?;
    let rate = metric(&report, "success_rate");
    let outside = report.trials.iter().filter(|t| t["sigma_in_fiber"] != true).count();
    Ok(outcome(
        rate >= 0.85 && outside == 0,
        format!("success rate {rate:.3}, {outside} sigma outside the fiber"),
    ))
}

fn mismatch_halving() -> Result<Outcome> {
    let report = experiment(ExperimentName::SignRounds, 2000)?;
    let bands = [(0.45, 0.55), (0.20, 0.30), (0.08, 0.17)];
    let means: Vec<f64> = (1..=3).map(|r| metric(&report, &format!("round{r}_mismatch_fraction"))).collect();
    let passed = means.iter().zip(bands).all(|(m, (lo, hi))| (lo..=hi).contains(m));
    Ok(outcome(passed, format!("round fractions {:.4} / {:.4} / {:.4}", means[0], means[1], means[2])))
}

fn strong_unforgeability() -> Result<Outcome> {
    let seed = Seed::from_u64(SEED);
    let params = Params {
        lambda: 1,
        s: 0,
        r: 4,
        n: 12,
        k: 10,
        ell_code: 6,
        rounds: 3,
        bloat_s: None,
        msg_len: 1,
    };
    let (pairs, su) = strong_unforgeability_exhaustive(&params, &seed)?;
    let (codes, dd) = decoding_disjointness_sweep(14, 3, &seed)?;
    Ok(outcome(
        su.passed && dd.passed,
        format!("{pairs} verifying pairs, {codes} certified codes"),
    ))
}

fn cpf() -> Result<Outcome> {
    let report = cpf_battery(12, 8, &Seed::from_u64(SEED))?;
    let failed: Vec<_> = report.failures().iter().map(|c| c.name.clone()).collect();
    Ok(outcome(failed.is_empty(), format!("{} checks, failed {failed:?}", report.checks.len())))
}

fn reductions() -> Result<Outcome> {
    let report = reduction_battery(&Seed::from_u64(SEED), 500)?;
    let failed: Vec<_> = report.failures().iter().map(|c| c.name.clone()).collect();
    Ok(outcome(failed.is_empty(), format!("{} checks, failed {failed:?}", report.checks.len())))
}

fn birthday() -> Result<Outcome> {
    let report = experiment(ExperimentName::BirthdayScaling, 200)?;
    let keys = ["median_r8", "median_r10", "median_r12", "ratio_r8_r10", "ratio_r10_r12"];
    let vals: Vec<String> = keys.iter().map(|k| format!("{k} {}", metric(&report, k))).collect();
    Ok(outcome(report.passed, vals.join(", ")))
}

fn superspace() -> Result<Outcome> {
    let report = experiment(ExperimentName::SuperspaceUniformity, 7000)?;
    let (cats, p) = (metric(&report, "categories"), metric(&report, "p_value"));
    Ok(outcome(cats == 7.0 && p > 0.001, format!("{cats} superspaces, p = {p:.4}")))
}

fn intersection() -> Result<Outcome> {
    let report = experiment(ExperimentName::IntersectionBound, 10_000)?;
    let s = &report.summary;
    let bound = 1.0 - 4.0 * 2f64.powi(4 - 6);
    Ok(outcome(
        s.mean >= bound - 3.0 * s.stderr,
        format!("estimate {:.4} +- {:.4}, bound {bound}", s.mean, s.stderr),
    ))
}

fn determinism() -> Result<Outcome> {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_oneshot"))
            .args(["selftest", "all", "--seed", "7"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    Ok(outcome(
        same,
        format!("{} bytes, identical = {same}, exit {:?}", a.stdout.len(), a.status.code()),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>, Duration); 10] = [
        ("1 symbolic/dense equivalence", symbolic_dense, Duration::from_secs(60)),
        ("2 end-to-end sign/verify", end_to_end, Duration::from_secs(120)),
        ("3 mismatch halving", mismatch_halving, Duration::MAX),
        ("4 strong unforgeability structure", strong_unforgeability, Duration::MAX),
        ("5 cpf battery", cpf, Duration::from_secs(30)),
        ("6 reduction equivalence", reductions, Duration::MAX),
        ("7 birthday scaling", birthday, Duration::MAX),
        ("8 superspace uniformity", superspace, Duration::MAX),
        ("9 intersection bound", intersection, Duration::MAX),
        ("10 determinism", determinism, Duration::MAX),
    ];
    let mut all = true;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) if elapsed > limit => (false, format!("{} (over {limit:?})", o.detail)),
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= passed;
        println!(
            "{} criterion {name}: {detail} [{:.2}s]",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
