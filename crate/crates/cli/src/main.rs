//! `oneshot`: key lifecycle, oracle transcripts, self-tests and experiments.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use oneshot_core::checks::cpf_battery;
use oneshot_core::ecc::LinearCode;
use oneshot_core::experiments::{enumerate_superspaces, run_experiment, selftest_all, ExperimentConfig, ExperimentName};
use oneshot_core::oracle::run_transcript;
use oneshot_core::oss::{siggen, sign, verify, KeyPair, KeyPairJson, Signature, SignatureJson};
use oneshot_core::stats;
use oneshot_core::subspace_lab::{
    anticoncentration_reduction, intersection_lower_bound, sample_superspace, AntiConcentrationConfig,
    IntersectionSetup, MembershipOracle,
};
use oneshot_core::{BitVec, DeterministicRng, Error, OracleSuite, Params, Seed, Subspace, SuiteConfig};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "oneshot", version, about = "One-shot signatures over coset oracles")]
struct Cli {
    /// Master seed: 64 hex characters, or a decimal integer.
    #[arg(long, global = true, env = "ONESHOT_SEED", default_value = "0")]
    seed: String,

    /// Scheme parameters as JSON. Defaults to the toy parameters.
    #[arg(long, global = true)]
    params: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Key generation, signing and verification.
    #[command(subcommand)]
    Oss(OssCommand),
    /// Classical oracle access.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Folding CPF checks.
    #[command(subcommand)]
    Cpf(CpfCommand),
    /// Subspace samplers and Monte Carlo runs.
    #[command(subcommand)]
    Lab(LabCommand),
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    #[command(subcommand)]
    Selftest(SelftestCommand),
}

#[derive(Subcommand)]
enum OssCommand {
    Keygen {
        #[arg(long)]
        out: PathBuf,
        /// Distinguishes several keys under one seed.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Signs once and marks the key file as spent.
    Sign {
        #[arg(long)]
        key: PathBuf,
        /// Message as a bit string, e.g. `101`.
        #[arg(long)]
        message: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exit code 0 on accept, 1 on reject.
    Verify {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Runs a transcript of `P x`, `Pinv y u`, `D y v` lines (hex).
    Query {
        /// Script file; stdin when omitted.
        #[arg(long)]
        script: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CpfCommand {
    Selftest {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        r: usize,
    },
}

#[derive(Args)]
struct LabShape {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Adversary {
    /// Outputs random nonzero elements of the sampled `T^⊥`.
    DualHit,
    /// Outputs uniformly random vectors after one membership query.
    Random,
}

#[derive(Subcommand)]
enum LabCommand {
    /// Samples superspaces and reports their frequencies.
    Superspace(LabShape),
    /// Trivial-intersection Monte Carlo; `t` is `k − r − s`.
    Intersect(LabShape),
    Anticoncentration {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long)]
        shared: bool,
        #[arg(long, value_enum, default_value_t = Adversary::DualHit)]
        adversary: Adversary,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    Run {
        #[arg(long)]
        name: String,
        /// Defaults to the experiment's own trial count.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SelftestCommand {
    /// Every experiment at its default trial count.
    All {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize, Deserialize)]
struct KeyFile {
    config: SuiteConfig,
    keypair: KeyPairJson,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::InvalidHex { .. } | Error::InvalidSeed(_) | Error::DimensionMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn parse_seed(s: &str) -> CliResult<Seed> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(Seed::from_u64(v));
    }
    Ok(s.parse::<Seed>()?)
}

fn load_params(path: &Option<PathBuf>) -> CliResult<Params> {
    let Some(path) = path else {
        return Ok(Params::toy());
    };
    let text = fs::read_to_string(path)?;
    let params: Params = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    params.validate()?;
    Ok(params)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    fs::write(path, text + "\n")?;
    Ok(())
}

fn emit(text: &str, out: &Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_bits(s: &str) -> CliResult<BitVec> {
    if s.is_empty() || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(CliError::Usage(format!("message must be a non-empty bit string, got {s:?}")));
    }
    Ok(BitVec::from_bit_str(s))
}

fn code_for(cfg: &SuiteConfig) -> CliResult<LinearCode> {
    let p = &cfg.params;
    Ok(LinearCode::sample(&mut DeterministicRng::new(&cfg.seed, "code"), p.msg_len, p.ell_code)?)
}

fn run_oss(cmd: OssCommand, seed: Seed, params: Params) -> CliResult<bool> {
    match cmd {
        OssCommand::Keygen { out, index } => {
            let config = SuiteConfig { seed, params };
            let mut suite = OracleSuite::from_config(&config)?;
            let kp = siggen(&mut suite, &mut DeterministicRng::new(&seed, &format!("keygen/{index}")))?;
            println!("{}", kp.pk.to_hex());
            write_json(&out, &KeyFile { config, keypair: kp.to_json() })?;
            Ok(true)
        }
        OssCommand::Sign { key, message, out } => {
            let mut file: KeyFile = read_json(&key)?;
            let mut suite = OracleSuite::from_config(&file.config)?;
            let code = code_for(&file.config)?;
            let mut kp = KeyPair::from_json(&file.keypair, file.config.params.r)?;
            let msg = parse_bits(&message)?;
            if msg.len() != code.msg_len() {
                return Err(CliError::Usage(format!("message must have {} bits", code.msg_len())));
            }
            let mut rng = DeterministicRng::new(&file.config.seed, &format!("sign/{}/{message}", kp.pk.to_hex()));
            let (sig, transcript) = sign(&mut suite, &mut kp, &msg, &code, &mut rng)?;
            file.keypair = kp.to_json();
            write_json(&key, &file)?;
            write_json(&out, &sig.to_json())?;
            println!("{}", json!({"sigma": sig.sigma.to_hex(), "decoded": transcript.success}));
            Ok(transcript.success)
        }
        OssCommand::Verify { key, sig } => {
            let file: KeyFile = read_json(&key)?;
            let mut suite = OracleSuite::from_config(&file.config)?;
            let code = code_for(&file.config)?;
            let pk = BitVec::from_hex(&file.keypair.pk, file.config.params.r)?;
            let sig_json: SignatureJson = read_json(&sig)?;
            let sig = Signature::from_json(&sig_json, file.config.params.k)?;
            let ok = verify(&mut suite, &pk, &sig.message, &sig.sigma, &code);
            println!("{}", if ok { "accept" } else { "reject" });
            Ok(ok)
        }
    }
}

fn run_lab(cmd: LabCommand, seed: Seed) -> CliResult<bool> {
    if let LabCommand::Superspace(shape) | LabCommand::Intersect(shape) = &cmd {
        if shape.trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
    }
    let mut rng = DeterministicRng::new(&seed, "lab");
    let mut out = String::new();
    let mut line = |v: serde_json::Value| {
        out.push_str(&v.to_string());
        out.push('\n');
    };
    let passed = match cmd {
        LabCommand::Superspace(shape) => {
            let base = sample_superspace(&Subspace::zero(shape.k), shape.r, &mut rng)?;
            let mut counts = std::collections::BTreeMap::new();
            for i in 0..shape.trials {
                let t = sample_superspace(&base, shape.s, &mut rng)?;
                let basis: Vec<String> = t.basis().row_vecs().iter().map(BitVec::to_bit_string).collect();
                line(json!({"type": "trial", "index": i, "basis": basis}));
                *counts.entry(basis).or_insert(0u64) += 1;
            }
            let mut summary = json!({"type": "summary", "distinct": counts.len()});
            if shape.s == 1 {
                let total = enumerate_superspaces(&base)?.len();
                let mut observed: Vec<u64> = counts.values().copied().collect();
                observed.resize(total, 0);
                summary["categories"] = json!(total);
                if total >= 2 {
                    summary["p_value"] = json!(stats::chi_square_uniform_p_value(&observed));
                }
            }
            line(summary);
            true
        }
        LabCommand::Intersect(shape) => {
            let (k, r, s) = (shape.k, shape.r, shape.s);
            if r + s > k {
                return Err(CliError::Usage("need r + s <= k".into()));
            }
            let t = k - r - s;
            let setup = IntersectionSetup::sample(k, r, s, t, &mut rng)?;
            let mut hits = Vec::with_capacity(shape.trials);
            for i in 0..shape.trials {
                let hit = setup.trial(&mut rng)?;
                line(json!({"type": "trial", "index": i, "trivial": hit}));
                hits.push(if hit { 1.0 } else { 0.0 });
            }
            let (mean, se, bound) = (stats::mean(&hits), stats::stderr(&hits), intersection_lower_bound(s, t));
            let ok = mean >= bound - 3.0 * se;
            line(json!({"type": "summary", "t": t, "estimate": mean, "stderr": se, "lower_bound": bound, "passed": ok}));
            ok
        }
        LabCommand::Anticoncentration {
            k,
            r,
            s,
            epsilon,
            shared,
            adversary,
        } => {
            let base = sample_superspace(&Subspace::zero(k), r, &mut rng)?;
            let cfg = AntiConcentrationConfig { s, epsilon, shared };
            let adv = |o: &mut MembershipOracle, rng: &mut DeterministicRng| match adversary {
                Adversary::DualHit => {
                    let dual = o.subspace().dual();
                    if dual.dim() == 0 {
                        return BitVec::zeros(k);
                    }
                    loop {
                        let u = dual.random_element(rng);
                        if !u.is_zero() {
                            break u;
                        }
                    }
                }
                Adversary::Random => {
                    let u = BitVec::random(rng, k);
                    o.query(&u);
                    u
                }
            };
            let run = anticoncentration_reduction(&base, cfg, adv, &mut rng)?;
            for (i, c) in run.classes.iter().enumerate() {
                line(json!({"type": "trial", "index": i, "class": c}));
            }
            line(json!({
                "type": "summary",
                "ell": run.ell,
                "t": run.t,
                "span_dim": run.span_dim,
                "buckets": run.buckets,
                "max_queries": run.max_queries,
                "reference_bound": run.reference_bound,
            }));
            true
        }
    };
    emit(&out, &None)?;
    Ok(passed)
}

fn run(cli: Cli) -> CliResult<bool> {
    let seed = parse_seed(&cli.seed)?;
    let params = load_params(&cli.params)?;
    match cli.command {
        Command::Oss(cmd) => run_oss(cmd, seed, params),
        Command::Oracle(OracleCommand::Query { script }) => {
            let text = match script {
                Some(path) => fs::read_to_string(path)?,
                None => {
                    let mut s = String::new();
                    io::stdin().read_to_string(&mut s)?;
                    s
                }
            };
            let mut suite = OracleSuite::new(params, seed)?;
            let answers = run_transcript(&mut suite, &text).map_err(|e| match e {
                Error::Precondition(m) => CliError::Usage(m),
                other => other.into(),
            })?;
            for a in answers {
                println!("{a}");
            }
            Ok(true)
        }
        Command::Cpf(CpfCommand::Selftest { n, r }) => {
            let report = cpf_battery(n, r, &seed)?;
            let mut out = String::new();
            for c in &report.checks {
                out.push_str(&serde_json::to_string(c).expect("plain data serializes"));
                out.push('\n');
            }
            emit(&out, &None)?;
            Ok(report.all_passed())
        }
        Command::Lab(cmd) => run_lab(cmd, seed),
        Command::Experiment(ExperimentCommand::Run { name, trials, out }) => {
            let name: ExperimentName = name.parse()?;
            let cfg = ExperimentConfig {
                name,
                params,
                trials: trials.unwrap_or_else(|| name.default_trials()),
                seed,
            };
            let report = run_experiment(&cfg)?;
            emit(&report.to_jsonl(), &out)?;
            Ok(report.passed)
        }
        Command::Selftest(SelftestCommand::All { out }) => {
            let reports = selftest_all(&seed)?;
            let mut text: String = reports.iter().map(|r| r.to_jsonl()).collect();
            let passed = reports.iter().all(|r| r.passed);
            let verdicts: Vec<_> = reports.iter().map(|r| json!({"experiment": r.config.name, "passed": r.passed})).collect();
            text.push_str(&json!({"type": "selftest", "results": verdicts, "passed": passed}).to_string());
            text.push('\n');
            emit(&text, &out)?;
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
