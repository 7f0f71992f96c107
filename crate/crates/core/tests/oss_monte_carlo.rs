use oneshot_core::ecc::LinearCode;
use oneshot_core::oss::{siggen, sign, verify};
use oneshot_core::{BitVec, DeterministicRng, OracleSuite, Params, Seed};

struct Run {
    success: bool,
    verified: bool,
    mismatches: Vec<usize>,
}

fn run(seed: u64, rounds: usize) -> Run {
    let s = Seed::from_u64(seed);
    let mut params = Params::toy();
    params.rounds = rounds;
    let mut suite = OracleSuite::new(params, s).unwrap();
    let code = LinearCode::sample(&mut DeterministicRng::new(&s, "CODE"), 3, 12).unwrap();
    let mut rng = DeterministicRng::new(&s, "SIGN");
    let mut kp = siggen(&mut suite, &mut rng).unwrap();
    let msg = BitVec::random(&mut rng, 3);
    let (sig, tr) = sign(&mut suite, &mut kp, &msg, &code, &mut rng).unwrap();
    Run {
        success: tr.success,
        verified: verify(&mut suite, &kp.pk, &msg, &sig.sigma, &code),
        mismatches: tr.rounds.iter().map(|r| r.mismatch_count).collect(),
    }
}

#[test]
fn honest_signatures_verify_at_toy_params() {
    let runs: Vec<Run> = (0..1000).map(|s| run(s, 3)).collect();
    for r in &runs {
        assert_eq!(r.success, r.verified);
    }
    let rate = runs.iter().filter(|r| r.verified).count() as f64 / 1000.0;
    assert!(rate >= 0.85, "verification rate {rate}");
}

#[test]
fn mismatches_halve_each_round() {
    let runs: Vec<Run> = (5000..7000).map(|s| run(s, 3)).collect();
    for t in 0..3 {
        let mean = runs.iter().map(|r| r.mismatches[t] as f64).sum::<f64>() / runs.len() as f64;
        let predicted = 12.0 / f64::powi(2.0, t as i32 + 1);
        assert!((mean - predicted).abs() <= 0.05 * 12.0, "round {} mean {mean}", t + 1);
    }
}

#[test]
fn zero_rounds_rarely_succeeds() {
    let wins = (0..400).filter(|&s| run(s, 0).success).count();
    // Pr[12 uniform bits within distance 2 of a fixed word] = 79/4096.
    assert!(wins < 30, "wins {wins}");
}
