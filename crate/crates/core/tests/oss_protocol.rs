use oneshot_core::ecc::LinearCode;
use oneshot_core::forgery::{attackers, forgery_game};
use oneshot_core::checks::{decoding_disjointness_sweep, strong_unforgeability_exhaustive};
use oneshot_core::oss::{siggen, sign};
use oneshot_core::{BitVec, DeterministicRng, Error, OracleSuite, Params, Seed};

fn tiny() -> Params {
    Params {
        lambda: 1,
        s: 0,
        r: 4,
        n: 12,
        k: 10,
        ell_code: 6,
        rounds: 3,
        bloat_s: None,
        msg_len: 1,
    }
}

fn code_for(seed: &Seed, p: &Params) -> LinearCode {
    LinearCode::sample(&mut DeterministicRng::new(seed, "CODE"), p.msg_len, p.ell_code).unwrap()
}

#[test]
fn every_round_keeps_the_state_inside_the_fiber() {
    for seed in 0..40 {
        let s = Seed::from_u64(seed);
        let mut suite = OracleSuite::new(Params::toy(), s).unwrap();
        let code = code_for(&s, &Params::toy());
        let mut rng = DeterministicRng::new(&s, "SIGN");
        let mut kp = siggen(&mut suite, &mut rng).unwrap();
        let fiber = suite.fiber(&kp.pk).unwrap();
        let msg = BitVec::random(&mut rng, 3);
        let (sig, tr) = sign(&mut suite, &mut kp, &msg, &code, &mut rng).unwrap();
        for round in &tr.rounds {
            let support = round.state.support();
            assert!(fiber.subspace().contains_subspace(support.subspace()));
            assert!(fiber.contains(support.offset()));
        }
        assert!(suite.p_inverse(&kp.pk, &sig.sigma).unwrap().is_some());
        assert!(matches!(
            sign(&mut suite, &mut kp, &msg, &code, &mut rng),
            Err(Error::KeySpent)
        ));
    }
}

#[test]
fn all_verifying_pairs_give_collisions() {
    let (pairs, check) = strong_unforgeability_exhaustive(&tiny(), &Seed::from_u64(14)).unwrap();
    assert!(check.passed, "{}", check.detail);
    assert!(pairs > 1000, "only {pairs} pairs");
    let mut two_bit = tiny();
    two_bit.msg_len = 2;
    let (pairs, check) = strong_unforgeability_exhaustive(&two_bit, &Seed::from_u64(15)).unwrap();
    assert!(check.passed, "{}", check.detail);
    assert!(pairs > 0);
}

#[test]
fn honest_attacker_loses() {
    for seed in 0..20 {
        let s = Seed::from_u64(seed);
        let mut suite = OracleSuite::new(Params::toy(), s).unwrap();
        let code = code_for(&s, &Params::toy());
        let (m0, m1) = (BitVec::from_index(1, 3), BitVec::from_index(6, 3));
        let mut rng = DeterministicRng::new(&s, "honest");
        let out = forgery_game(&mut suite, &code, 1000, |o| attackers::honest(o, &code, &m0, &m1, &mut rng)).unwrap();
        assert!(!out.won);
        assert_eq!(out.queries, 0);
    }
}

#[test]
fn brute_force_attacker_wins_at_tiny_params() {
    for seed in 0..5 {
        let s = Seed::from_u64(100 + seed);
        let mut suite = OracleSuite::new(tiny(), s).unwrap();
        let code = code_for(&s, &tiny());
        let (m0, m1) = (BitVec::zeros(1), BitVec::ones(1));
        let out = forgery_game(&mut suite, &code, 1 << 12, |o| attackers::brute_force(o, &code, &m0, &m1)).unwrap();
        assert!(out.won);
        assert_eq!(out.queries, 1 << 12);
        let (x0, x1) = out.collision.unwrap();
        assert_ne!(x0, x1);
        assert_eq!(suite.h(&x0).unwrap(), suite.h(&x1).unwrap());
    }
}

#[test]
fn random_guessing_rarely_wins() {
    let p = Params {
        lambda: 1,
        s: 0,
        r: 12,
        n: 18,
        k: 16,
        ell_code: 6,
        rounds: 3,
        bloat_s: None,
        msg_len: 1,
    };
    let mut wins = 0;
    for game in 0..200 {
        let s = Seed::from_u64(game);
        let mut suite = OracleSuite::new(p.clone(), s).unwrap();
        let code = code_for(&s, &p);
        let (m0, m1) = (BitVec::zeros(1), BitVec::ones(1));
        let mut rng = DeterministicRng::new(&s, "guess");
        let out = forgery_game(&mut suite, &code, 100, |o| attackers::random_guess(o, &m0, &m1, &mut rng)).unwrap();
        assert!(out.queries <= 100);
        wins += out.won as usize;
    }
    assert!(wins < 2, "{wins} wins in 200 games");
}

#[test]
fn decoding_balls_are_disjoint_for_certified_codes() {
    let (checked, check) = decoding_disjointness_sweep(14, 3, &Seed::from_u64(3)).unwrap();
    assert!(check.passed, "{}", check.detail);
    assert!(checked > 60, "{checked}");
}
