//! Seeded Monte Carlo and exhaustive experiments with JSON-lines reports.
//!
//! Trials run on a rayon pool. Each trial derives its own seed from the
//! master seed and its index, and results are collected in index order, so
//! a report is a pure function of its configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::checks::{cpf_battery, reduction_battery, BatteryReport};
use crate::cpf::collision_search_birthday;
use crate::ecc::LinearCode;
use crate::error::{Error, Result};
use crate::gf2::{BitVec, Subspace};
use crate::lazy_random::{DeterministicRng, Seed};
use crate::oracle::{OracleSuite, Params};
use crate::oss::{siggen, sign, verify};
use crate::stats;
use crate::subspace_lab::{intersection_lower_bound, sample_superspace, IntersectionSetup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    BirthdayScaling,
    SignRounds,
    ReductionEquivalence,
    SuperspaceUniformity,
    IntersectionBound,
    CpfExhaustive,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 6] = [
        ExperimentName::BirthdayScaling,
        ExperimentName::SignRounds,
        ExperimentName::ReductionEquivalence,
        ExperimentName::SuperspaceUniformity,
        ExperimentName::IntersectionBound,
        ExperimentName::CpfExhaustive,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentName::BirthdayScaling => "birthday_scaling",
            ExperimentName::SignRounds => "sign_rounds",
            ExperimentName::ReductionEquivalence => "reduction_equivalence",
            ExperimentName::SuperspaceUniformity => "superspace_uniformity",
            ExperimentName::IntersectionBound => "intersection_bound",
            ExperimentName::CpfExhaustive => "cpf_exhaustive",
        }
    }

    /// Trial count used by `selftest all` and the CLI when none is given.
    pub fn default_trials(&self) -> usize {
        match self {
            ExperimentName::BirthdayScaling => 200,
            ExperimentName::SignRounds => 2000,
            ExperimentName::ReductionEquivalence => 500,
            ExperimentName::SuperspaceUniformity => 7000,
            ExperimentName::IntersectionBound => 10_000,
            ExperimentName::CpfExhaustive => 1,
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown experiment {s:?}")))
    }
}

/// `params` drives `sign_rounds`; the other experiments run at fixed shapes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    pub params: Params,
    pub trials: usize,
    pub seed: Seed,
}

impl ExperimentConfig {
    pub fn new(name: ExperimentName, trials: usize, seed: Seed) -> Self {
        ExperimentConfig {
            name,
            params: Params::toy(),
            trials,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be at least 1".into()));
        }
        self.params.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub stderr: f64,
    /// Experiment-specific numbers, keyed for stable output order.
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config: ExperimentConfig,
    /// What `summary.mean`, `median` and `stderr` are computed over.
    pub metric: String,
    pub trials: Vec<Value>,
    pub summary: Summary,
    pub tolerance: String,
    pub passed: bool,
}

impl Report {
    /// One config line, one line per trial, one summary line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut line = |v: Value| {
            out.push_str(&v.to_string());
            out.push('\n');
        };
        line(json!({"type": "config", "experiment": self.config, "metric": self.metric}));
        for t in &self.trials {
            line(json!({"type": "trial", "data": t}));
        }
        line(json!({
            "type": "summary",
            "experiment": self.config.name,
            "summary": self.summary,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }));
        out
    }
}

fn trial_rng(seed: &Seed, label: &str, i: usize) -> DeterministicRng {
    DeterministicRng::new(&seed.derive(&format!("{label}/{i}")), "trial")
}

fn summarize(values: &[f64], metrics: BTreeMap<String, f64>) -> Summary {
    Summary {
        mean: stats::mean(values),
        median: stats::median(values),
        stderr: stats::stderr(values),
        metrics,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    match cfg.name {
        ExperimentName::BirthdayScaling => birthday_scaling(cfg),
        ExperimentName::SignRounds => sign_rounds(cfg),
        ExperimentName::ReductionEquivalence => battery_report(cfg, reduction_battery(&cfg.seed, cfg.trials)?),
        ExperimentName::SuperspaceUniformity => superspace_uniformity(cfg),
        ExperimentName::IntersectionBound => intersection_bound(cfg),
        ExperimentName::CpfExhaustive => battery_report(cfg, cpf_battery(12, 8, &cfg.seed)?),
    }
}

pub const BIRTHDAY_WIDTHS: [usize; 3] = [8, 10, 12];

fn birthday_params(r: usize) -> Params {
    Params {
        lambda: 1,
        s: 0,
        r,
        n: r + 4,
        k: 8,
        ell_code: 0,
        rounds: 0,
        bloat_s: None,
        msg_len: 0,
    }
}

fn birthday_scaling(cfg: &ExperimentConfig) -> Result<Report> {
    let jobs: Vec<(usize, usize)> = BIRTHDAY_WIDTHS
        .iter()
        .flat_map(|&r| (0..cfg.trials).map(move |i| (r, i)))
        .collect();
    let results: Vec<(usize, u64, bool)> = jobs
        .par_iter()
        .map(|&(r, i)| {
            let seed = cfg.seed.derive(&format!("birthday/{r}/{i}"));
            let mut suite = OracleSuite::new(birthday_params(r), seed)?;
            let mut rng = DeterministicRng::new(&seed, "search");
            let out = collision_search_birthday(|x| suite.h(x), r + 4, &mut rng, 1 << (r + 4))?;
            Ok((r, out.queries, out.collision.is_some()))
        })
        .collect::<Result<_>>()?;

    let mut metrics = BTreeMap::new();
    let mut medians = Vec::new();
    let mut normalized = Vec::new();
    let mut in_band = true;
    for &r in &BIRTHDAY_WIDTHS {
        let qs: Vec<f64> = results.iter().filter(|t| t.0 == r).map(|t| t.1 as f64).collect();
        let m = stats::median(&qs);
        let root = 2f64.powf(r as f64 / 2.0);
        normalized.extend(qs.iter().map(|q| q / root));
        in_band &= (0.5 * root..=4.0 * root).contains(&m);
        metrics.insert(format!("median_r{r}"), m);
        medians.push(m);
    }
    let mut ratios_ok = true;
    for w in 0..medians.len() - 1 {
        let ratio = medians[w + 1] / medians[w];
        ratios_ok &= (1.4..=2.9).contains(&ratio);
        metrics.insert(format!("ratio_r{}_r{}", BIRTHDAY_WIDTHS[w], BIRTHDAY_WIDTHS[w + 1]), ratio);
    }
    let all_found = results.iter().all(|t| t.2);
    let trials = results
        .iter()
        .enumerate()
        .map(|(i, (r, q, found))| json!({"index": i, "r": r, "queries": q, "found": found}))
        .collect();
    Ok(Report {
        config: cfg.clone(),
        metric: "queries / sqrt(2^r)".into(),
        trials,
        summary: summarize(&normalized, metrics),
        tolerance: "consecutive median ratios in [1.4, 2.9]; medians in [0.5, 4] x sqrt(2^r)".into(),
        passed: ratios_ok && in_band && all_found,
    })
}

/// Per-round mismatch-fraction bands for the first three rounds.
pub const MISMATCH_BANDS: [(f64, f64); 3] = [(0.45, 0.55), (0.20, 0.30), (0.08, 0.17)];
pub const MIN_SIGN_SUCCESS: f64 = 0.85;

struct SignTrial {
    success: bool,
    verified: bool,
    sigma_in_fiber: bool,
    fractions: Vec<f64>,
}

fn sign_trial(params: &Params, seed: &Seed) -> Result<SignTrial> {
    let mut suite = OracleSuite::new(params.clone(), *seed)?;
    let code = LinearCode::sample(&mut DeterministicRng::new(seed, "code"), params.msg_len, params.ell_code)?;
    let mut rng = DeterministicRng::new(seed, "sign");
    let mut kp = siggen(&mut suite, &mut rng)?;
    let msg = BitVec::random(&mut rng, params.msg_len);
    let (sig, tr) = sign(&mut suite, &mut kp, &msg, &code, &mut rng)?;
    let ell = params.ell_code.max(1) as f64;
    Ok(SignTrial {
        success: tr.success,
        verified: verify(&mut suite, &kp.pk, &msg, &sig.sigma, &code),
        sigma_in_fiber: suite.p_inverse(&kp.pk, &sig.sigma)?.is_some(),
        fractions: tr.rounds.iter().map(|r| r.mismatch_count as f64 / ell).collect(),
    })
}

fn sign_rounds(cfg: &ExperimentConfig) -> Result<Report> {
    let runs: Vec<SignTrial> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| sign_trial(&cfg.params, &cfg.seed.derive(&format!("sign/{i}"))))
        .collect::<Result<_>>()?;
    let n = runs.len() as f64;
    let rate = runs.iter().filter(|t| t.verified).count() as f64 / n;
    let mut metrics = BTreeMap::new();
    metrics.insert("success_rate".into(), rate);
    let mut passed = rate >= MIN_SIGN_SUCCESS
        && runs.iter().all(|t| t.sigma_in_fiber && t.success == t.verified);
    for round in 0..cfg.params.rounds {
        let mean = runs.iter().map(|t| t.fractions[round]).sum::<f64>() / n;
        metrics.insert(format!("round{}_mismatch_fraction", round + 1), mean);
        if let Some(&(lo, hi)) = MISMATCH_BANDS.get(round) {
            passed &= (lo..=hi).contains(&mean);
        }
    }
    let first: Vec<f64> = runs.iter().map(|t| t.fractions.first().copied().unwrap_or(0.0)).collect();
    let trials = runs
        .iter()
        .enumerate()
        .map(|(i, t)| {
            json!({
                "index": i,
                "success": t.success,
                "verified": t.verified,
                "sigma_in_fiber": t.sigma_in_fiber,
                "mismatch_fractions": t.fractions,
            })
        })
        .collect();
    Ok(Report {
        config: cfg.clone(),
        metric: "round-1 mismatch fraction".into(),
        trials,
        summary: summarize(&first, metrics),
        tolerance: format!(
            "success rate >= {MIN_SIGN_SUCCESS}; every sigma inside the fiber; round 1/2/3 mean mismatch fraction in \
             [0.45, 0.55] / [0.20, 0.30] / [0.08, 0.17]"
        ),
        passed,
    })
}

fn battery_report(cfg: &ExperimentConfig, battery: BatteryReport) -> Result<Report> {
    let values: Vec<f64> = battery.checks.iter().map(|c| if c.passed { 1.0 } else { 0.0 }).collect();
    let trials = battery
        .checks
        .iter()
        .enumerate()
        .map(|(i, c)| json!({"index": i, "check": c.name, "passed": c.passed, "detail": c.detail}))
        .collect();
    let mut metrics = BTreeMap::new();
    metrics.insert("checks".into(), values.len() as f64);
    metrics.insert("failures".into(), battery.failures().len() as f64);
    Ok(Report {
        config: cfg.clone(),
        metric: "check passed (0/1)".into(),
        trials,
        summary: summarize(&values, metrics),
        tolerance: "every check passes".into(),
        passed: battery.all_passed(),
    })
}

/// Every `(dim base + 1)`-dimensional superspace of `base`, by enumeration.
pub fn enumerate_superspaces(base: &Subspace) -> Result<BTreeSet<Vec<BitVec>>> {
    let k = base.ambient();
    let mut out = BTreeSet::new();
    for i in 0..1u64 << k {
        let v = BitVec::from_index(i, k);
        if !base.contains(&v) {
            out.insert(base.with_vector(&v)?.basis().row_vecs().to_vec());
        }
    }
    Ok(out)
}

pub const UNIFORMITY_MIN_P: f64 = 0.001;

fn superspace_uniformity(cfg: &ExperimentConfig) -> Result<Report> {
    let (k, r) = (4, 1);
    let base = sample_superspace(&Subspace::zero(k), r, &mut DeterministicRng::new(&cfg.seed, "uniformity/base"))?;
    let all: Vec<Vec<BitVec>> = enumerate_superspaces(&base)?.into_iter().collect();
    let samples: Vec<usize> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let t = sample_superspace(&base, 1, &mut trial_rng(&cfg.seed, "uniformity", i))?;
            let key = t.basis().row_vecs().to_vec();
            all.iter()
                .position(|b| *b == key)
                .ok_or_else(|| Error::Invariant("sampled a subspace outside the enumeration".into()))
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; all.len()];
    for &s in &samples {
        counts[s] += 1;
    }
    let p = stats::chi_square_uniform_p_value(&counts);
    let mut metrics = BTreeMap::new();
    metrics.insert("categories".into(), all.len() as f64);
    metrics.insert("chi_square".into(), stats::chi_square_uniform_statistic(&counts));
    metrics.insert("p_value".into(), p);
    let values: Vec<f64> = samples.iter().map(|&s| s as f64).collect();
    let trials = samples
        .iter()
        .enumerate()
        .map(|(i, s)| json!({"index": i, "superspace": s}))
        .collect();
    Ok(Report {
        config: cfg.clone(),
        metric: "superspace index".into(),
        trials,
        summary: summarize(&values, metrics),
        tolerance: format!("chi-square p > {UNIFORMITY_MIN_P} over the 7 superspaces"),
        passed: all.len() == 7 && p > UNIFORMITY_MIN_P,
    })
}

/// `(k, r, s, t)` for the intersection experiment.
pub const INTERSECTION_SHAPE: (usize, usize, usize, usize) = (12, 2, 6, 4);

fn intersection_bound(cfg: &ExperimentConfig) -> Result<Report> {
    let (k, r, s, t) = INTERSECTION_SHAPE;
    let setup = IntersectionSetup::sample(k, r, s, t, &mut DeterministicRng::new(&cfg.seed, "intersection/setup"))?;
    let hits: Vec<bool> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| setup.trial(&mut trial_rng(&cfg.seed, "intersection", i)))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = hits.iter().map(|&h| if h { 1.0 } else { 0.0 }).collect();
    let summary = summarize(&values, BTreeMap::new());
    let bound = intersection_lower_bound(s, t);
    let passed = summary.mean >= bound - 3.0 * summary.stderr;
    let mut summary = summary;
    summary.metrics.insert("lower_bound".into(), bound);
    let trials = hits
        .iter()
        .enumerate()
        .map(|(i, h)| json!({"index": i, "trivial": h}))
        .collect();
    Ok(Report {
        config: cfg.clone(),
        metric: "trivial intersection (0/1)".into(),
        trials,
        summary,
        tolerance: format!("estimate >= 1 - t*2^(t-s) - 3*stderr = {bound} - 3*stderr at k={k}, r={r}, s={s}, t={t}"),
        passed,
    })
}

/// Runs every experiment at its default trial count, in a fixed order.
pub fn selftest_all(seed: &Seed) -> Result<Vec<Report>> {
    ExperimentName::ALL
        .iter()
        .map(|&name| run_experiment(&ExperimentConfig::new(name, name.default_trials(), *seed)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for name in ExperimentName::ALL {
            assert_eq!(name.as_str().parse::<ExperimentName>().unwrap(), name);
            assert_eq!(serde_json::to_value(name).unwrap(), json!(name.as_str()));
        }
        assert!("nope".parse::<ExperimentName>().is_err());
    }

    #[test]
    fn zero_trials_is_rejected() {
        let cfg = ExperimentConfig::new(ExperimentName::SignRounds, 0, Seed::from_u64(1));
        assert!(matches!(run_experiment(&cfg), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn superspace_enumeration_counts() {
        let base = Subspace::from_generators(4, &[BitVec::from_bit_str("1000")]).unwrap();
        assert_eq!(enumerate_superspaces(&base).unwrap().len(), 7);
        assert_eq!(enumerate_superspaces(&Subspace::zero(3)).unwrap().len(), 7);
    }

    #[test]
    fn small_reports_are_deterministic() {
        let cfg = ExperimentConfig::new(ExperimentName::IntersectionBound, 50, Seed::from_u64(9));
        let a = run_experiment(&cfg).unwrap().to_jsonl();
        assert_eq!(a, run_experiment(&cfg).unwrap().to_jsonl());
        assert_eq!(a.lines().count(), 52);
    }
}
