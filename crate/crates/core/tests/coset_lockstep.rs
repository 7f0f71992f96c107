use oneshot_core::checks::{lockstep_check, random_coset_state, random_script, StateOp};
use oneshot_core::coset_state::AffineFunctional;
use oneshot_core::{BitVec, DeterministicRng, Seed};
use rand::Rng;

#[test]
fn symbolic_matches_dense_on_random_scripts() {
    let mut rng = DeterministicRng::new(&Seed::from_u64(2024), "scripts");
    for i in 0..200 {
        let k = rng.gen_range(1..=8);
        let len = rng.gen_range(0..=12);
        let st = random_coset_state(&mut rng, k).unwrap();
        let script = random_script(&mut rng, k, len);
        if let Some(why) = lockstep_check(&st, &script, &mut rng).unwrap() {
            panic!("script {i} (k = {k}): {why}\n{script:?}");
        }
    }
}

#[test]
fn constant_functionals_do_not_branch() {
    let mut rng = DeterministicRng::new(&Seed::from_u64(5), "const");
    let st = random_coset_state(&mut rng, 6).unwrap();
    let zero = AffineFunctional::new(BitVec::zeros(6), true);
    let script = vec![StateOp::MeasureFunctional(zero.clone()), StateOp::Hadamard, StateOp::MeasureFunctional(zero)];
    assert_eq!(lockstep_check(&st, &script, &mut rng).unwrap(), None);
}
