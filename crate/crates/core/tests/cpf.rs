use std::collections::BTreeMap;

use num_rational::Ratio;
use oneshot_core::cpf::{FoldingCpf, LweParams, LweTcf, TrapdoorClawFree};
use oneshot_core::{BitVec, DeterministicRng, Seed};
use rand::Rng;

/// Over all colliding pairs of `Q` at n = 12, n − r = 4, each instance is a
/// claw index in exactly 2^(m−1)/(2^m − 1) of the pairs.
#[test]
fn claw_indices_are_uniform_over_instances() {
    let mut cpf = FoldingCpf::new(12, 8, &Seed::from_u64(5)).unwrap();
    let m = cpf.shape().instances;
    let mut fibers: BTreeMap<BitVec, Vec<BitVec>> = BTreeMap::new();
    for i in 0..1u64 << 12 {
        let w = BitVec::from_index(i, 12);
        fibers.entry(cpf.q_forward(&w).unwrap().0).or_default().push(w);
    }
    let mut per_instance = vec![0u64; m];
    let mut pairs = 0u64;
    for ws in fibers.values() {
        for a in 0..ws.len() {
            for b in a + 1..ws.len() {
                let idx = cpf.claw_indices(&ws[a], &ws[b]);
                assert!(!idx.is_empty());
                for i in idx {
                    per_instance[i] += 1;
                }
                pairs += 1;
            }
        }
    }
    let expected = Ratio::new(1u64 << (m - 1), (1u64 << m) - 1);
    for &c in &per_instance {
        assert_eq!(Ratio::new(c, pairs), expected);
        assert!(Ratio::new(c, pairs) >= Ratio::new(1, m as u64));
    }
}

fn lwe_fold(seed: u64, m: usize) -> FoldingCpf<LweTcf> {
    let mut rng = DeterministicRng::new(&Seed::from_u64(seed), "LWE");
    let keys = (0..m).map(|_| LweTcf::keygen(LweParams::toy(), &mut rng).unwrap()).collect();
    FoldingCpf::from_instances(keys).unwrap()
}

#[test]
fn lwe_fold_inverses_agree_without_one_trapdoor() {
    let mut rng = DeterministicRng::new(&Seed::from_u64(8), "inputs");
    for seed in 0..4 {
        let mut cpf = lwe_fold(seed, 3);
        let n = cpf.shape().n();
        for _ in 0..300 {
            let w = BitVec::random(&mut rng, n);
            let (y, folded) = cpf.q_forward(&w).unwrap();
            let full = cpf.q_inverse(&y, &folded).unwrap();
            let x = full.clone().expect("an image always has a preimage");
            assert_eq!(cpf.q_forward(&x).unwrap(), (y.clone(), folded.clone()));
            for i_star in 0..3 {
                let mut fresh = lwe_fold(seed, 3);
                assert_eq!(fresh.q_inverse_missing(i_star, &y, &folded).unwrap(), full);
                assert_eq!(fresh.instance(i_star).trapdoor_calls(), 0);
            }
        }
    }
}

/// Images of small-noise inputs always have a claw, and both halves map
/// to the image under their own branch.
#[test]
fn lwe_small_noise_images_have_claws() {
    let mut rng = DeterministicRng::new(&Seed::from_u64(9), "claws");
    for _ in 0..20 {
        let key = LweTcf::keygen(LweParams::toy(), &mut rng).unwrap();
        let (q, b_bar) = (key.params().q, key.params().b_bar);
        for _ in 0..50 {
            let t = vec![rng.gen_range(0..q)];
            let f: Vec<i64> = (0..key.params().v).map(|_| rng.gen_range(-b_bar + 1..=b_bar)).collect();
            let y = key.eval_raw(&t, &f, false);
            let ((t0, f0), (t1, f1)) = key.claw_bruteforce(&y).unwrap().expect("claw exists");
            assert_eq!(key.eval_raw(&t0, &f0, false), y);
            assert_eq!(key.eval_raw(&t1, &f1, true), y);
        }
    }
}
