//! Exhaustive invariant battery shared by genuine and simulated oracle suites.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use crate::coset_state::{dense_equal_up_to_global_sign, AffineFunctional, DenseState, SymbolicCosetState};
use crate::cpf::{
    simulate_bloated_from_dualfree, simulate_dualfree_suite, FoldingCpf, SimulatedBloatedSuite, TrapdoorClawFree,
};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec, Coset, Subspace};
use crate::ecc::LinearCode;
use crate::lazy_random::{DeterministicRng, Seed};
use crate::oracle::{DualFreeOracle, DualOracle, OracleSuite, Params};
use crate::oss::{strong_unforgeability_witness, verify, Signature};

/// Largest input width the battery will enumerate.
pub const MAX_EXHAUSTIVE_BITS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BatteryReport {
    pub checks: Vec<CheckResult>,
}

impl BatteryReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, failure: Option<String>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed: failure.is_none(),
            detail: failure.unwrap_or_else(|| "ok".into()),
        });
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// True iff `points` is an affine subspace: with `p₀` the first point, the
/// differences `p − p₀` are closed under addition. Sizes must be a power
/// of two for a coset, which the caller checks separately.
pub fn is_coset(points: &[BitVec]) -> bool {
    let Some(base) = points.first() else {
        return false;
    };
    let diffs: HashSet<BitVec> = points.iter().map(|p| p.xor(base)).collect();
    if diffs.len() != points.len() {
        return false;
    }
    diffs.iter().all(|a| diffs.iter().all(|b| diffs.contains(&a.xor(b))))
}

/// Fibers of `P` keyed by `y`, from exhaustive enumeration of inputs.
pub type Fibers = BTreeMap<BitVec, Vec<(BitVec, BitVec)>>;

/// Enumerates every input, checking injectivity, the inverse law, and that
/// each fiber is a coset of dimension `n − r` outside of which `P⁻¹` rejects.
pub fn check_dual_free<O: DualFreeOracle>(oracle: &mut O) -> Result<(BatteryReport, Fibers)> {
    let dims = oracle.dims();
    if dims.n > MAX_EXHAUSTIVE_BITS {
        return Err(Error::Precondition(format!("n = {} too large to enumerate", dims.n)));
    }
    let mut report = BatteryReport::default();
    let mut seen = HashSet::new();
    let mut fibers: Fibers = BTreeMap::new();
    let mut injective = None;
    let mut inverse = None;
    for i in 0..1u64 << dims.n {
        let x = BitVec::from_index(i, dims.n);
        let out = oracle.p_forward(&x)?;
        if !seen.insert((out.y.clone(), out.u.clone())) && injective.is_none() {
            injective = Some(format!("repeated output at x = {}", x.to_hex()));
        }
        if oracle.p_inverse(&out.y, &out.u)?.as_ref() != Some(&x) && inverse.is_none() {
            inverse = Some(format!("P^-1(P(x)) != x at x = {}", x.to_hex()));
        }
        fibers.entry(out.y).or_default().push((x, out.u));
    }
    report.push("injectivity", injective);
    report.push("inverse_law", inverse);

    let fiber_size = 1usize << (dims.n - dims.r);
    let mut shape = None;
    let mut rejection = None;
    for (y, members) in &fibers {
        let us: Vec<BitVec> = members.iter().map(|(_, u)| u.clone()).collect();
        if us.len() != fiber_size || !is_coset(&us) {
            shape.get_or_insert_with(|| format!("fiber of y = {} has {} points or is not a coset", y.to_hex(), us.len()));
            continue;
        }
        let span = Subspace::from_generators(dims.k, &us.iter().map(|u| u.xor(&us[0])).collect::<Vec<_>>())?;
        for j in 0..dims.k {
            let probe = us[0].xor(&BitVec::unit(dims.k, j));
            if !span.contains(&probe.xor(&us[0])) && oracle.p_inverse(y, &probe)?.is_some() {
                rejection.get_or_insert_with(|| format!("P^-1 accepted off-fiber u at y = {}", y.to_hex()));
            }
        }
    }
    report.push("coset_fibers", shape);
    report.push("off_fiber_rejection", rejection);
    Ok((report, fibers))
}

/// For each listed `y`, checks the dual oracle against enumeration over all
/// `v ∈ Z₂^k` and all `c ∈ Z₂^ℓ`, and that the dual matrix spans directions
/// inside the fiber.
pub fn check_dual<O: DualOracle>(oracle: &mut O, fibers: &Fibers, max_ys: usize) -> Result<BatteryReport> {
    let dims = oracle.dims();
    let ell = oracle.ell_code();
    if dims.k + ell > 2 * MAX_EXHAUSTIVE_BITS {
        return Err(Error::Precondition("dual check too large to enumerate".into()));
    }
    let mut report = BatteryReport::default();
    let ys = fibers.keys();
    let mut soundness = None;
    let mut inside = None;
    for y in ys.take(max_ys) {
        let a = oracle.dual_matrix(y)?;
        let fiber: Vec<BitVec> = fibers[y].iter().map(|(_, u)| u.xor(&fibers[y][0].1)).collect();
        let fiber_span = Subspace::from_generators(dims.k, &fiber)?;
        if !fiber_span.contains_subspace(&Subspace::column_span(&a)) {
            inside.get_or_insert_with(|| format!("dual matrix at y = {} leaves the fiber directions", y.to_hex()));
        }
        let table = bottom_combinations(&a, ell);
        for i in 0..1u64 << dims.k {
            let v = BitVec::from_index(i, dims.k);
            let target = a.vec_mul(&v)?;
            let expected = table.get(&target).cloned();
            let got = oracle.dual_query(y, &v)?;
            if got != expected {
                soundness.get_or_insert_with(|| {
                    format!("dual at y = {}, v = {}: got {got:?}, expected {expected:?}", y.to_hex(), v.to_hex())
                });
            }
        }
    }
    report.push("dual_vs_enumeration", soundness);
    report.push("dual_matrix_in_fiber", inside);
    Ok(report)
}

/// Every combination `Σ c_j·(bottom row j)` mapped back to `c`. Bottom rows
/// are independent, so the map is injective.
fn bottom_combinations(a: &BitMatrix, ell: usize) -> HashMap<BitVec, BitVec> {
    let bottom = a.row_range(a.rows() - ell, a.rows());
    (0..1u64 << ell)
        .map(|i| {
            let c = BitVec::from_index(i, ell);
            (bottom.vec_mul(&c).expect("coefficient width matches"), c)
        })
        .collect()
}

/// Exhaustive folding-CPF battery over all `2^n` inputs: round trip, coset
/// preimages, coordinate preservation, corrupted selectors, and
/// `q_inverse_missing ≡ q_inverse` for every withheld instance.
pub fn cpf_battery(n: usize, r: usize, seed: &Seed) -> Result<BatteryReport> {
    if n > MAX_EXHAUSTIVE_BITS {
        return Err(Error::Precondition(format!("n = {n} too large to enumerate")));
    }
    let mut cpf = FoldingCpf::new(n, r, seed)?;
    let shape = cpf.shape();
    let m = shape.instances;
    let mut report = BatteryReport::default();

    let mut images: BTreeMap<BitVec, Vec<(BitVec, BitVec)>> = BTreeMap::new();
    let mut round_trip = None;
    for i in 0..1u64 << n {
        let w = BitVec::from_index(i, n);
        let (y, folded) = cpf.q_forward(&w)?;
        if cpf.q_inverse(&y, &folded)?.as_ref() != Some(&w) {
            round_trip.get_or_insert_with(|| format!("Q^-1(Q(w)) != w at {}", w.to_hex()));
        }
        images.entry(y).or_default().push((w, folded));
    }
    report.push("round_trip", round_trip);

    let mut coset = None;
    let mut coords = None;
    let mut trapdoor_view = None;
    for (y, pre) in &images {
        let ws: Vec<BitVec> = pre.iter().map(|(w, _)| w.clone()).collect();
        if ws.len() != 1 << m || !is_coset(&ws) {
            coset.get_or_insert_with(|| format!("preimages of y = {} do not form a {m}-dim coset", y.to_hex()));
            continue;
        }
        // Brute-force coset description: the base takes branch 0 everywhere and
        // column i flips to branch 1 in block i only.
        let selectors = |w: &BitVec| -> BitVec { pre.iter().find(|(x, _)| x == w).expect("listed").1.slice(0, m) };
        let with_selectors = |sel: &BitVec| pre.iter().find(|(_, f)| &f.slice(0, m) == sel).map(|(w, _)| w.clone());
        let base = with_selectors(&BitVec::zeros(m)).expect("every selector pattern occurs");
        let columns: Vec<BitVec> = (0..m)
            .map(|i| with_selectors(&BitVec::unit(m, i)).expect("every selector pattern occurs").xor(&base))
            .collect();
        let a_bar = BitMatrix::from_columns(n, &columns)?;
        for w in &ws {
            if a_bar.solve(&w.xor(&base))?.as_ref() != Some(&selectors(w)) {
                coords.get_or_insert_with(|| format!("coordinates of {} differ from its selector bits", w.to_hex()));
            }
        }
        if cpf.preimage_coset(y)? != (a_bar, base) {
            trapdoor_view.get_or_insert_with(|| format!("trapdoor coset description differs at y = {}", y.to_hex()));
        }
    }
    report.push("preimage_cosets", coset);
    report.push("coordinate_preservation", coords);
    report.push("trapdoor_coset_description", trapdoor_view);

    let mut corrupted = None;
    for (y, pre) in &images {
        for (w, folded) in pre {
            for j in 0..m {
                let mut bad = folded.clone();
                bad.flip(j);
                if cpf.q_inverse(y, &bad)?.as_ref() == Some(w) {
                    corrupted.get_or_insert_with(|| format!("flipped selector {j} still inverts to {}", w.to_hex()));
                }
            }
        }
    }
    report.push("corrupted_selector", corrupted);

    let mut agree = None;
    let mut untouched = None;
    let fold_bits = shape.folded_bits();
    for i_star in 0..m {
        let mut fresh = FoldingCpf::new(n, r, seed)?;
        let mut reference = FoldingCpf::new(n, r, seed)?;
        for y in images.keys() {
            for f in 0..1u64 << fold_bits {
                let folded = BitVec::from_index(f, fold_bits);
                if fresh.q_inverse_missing(i_star, y, &folded)? != reference.q_inverse(y, &folded)? {
                    agree.get_or_insert_with(|| format!("q_inverse_missing({i_star}) disagrees at y = {}", y.to_hex()));
                }
            }
        }
        if fresh.instance(i_star).trapdoor_calls() != 0 {
            untouched.get_or_insert_with(|| format!("trapdoor {i_star} was used"));
        }
    }
    report.push("missing_trapdoor_equivalence", agree);
    report.push("withheld_trapdoor_untouched", untouched);
    Ok(report)
}

fn merge(into: &mut BatteryReport, prefix: &str, other: BatteryReport) {
    for mut c in other.checks {
        c.name = format!("{prefix}/{}", c.name);
        into.checks.push(c);
    }
}

/// Colliding input pairs `(x₀, x₁)` drawn from the fibers, in a fixed order.
fn collision_pairs(fibers: &Fibers) -> Vec<(BitVec, BitVec, BitVec, BitVec)> {
    let mut out = Vec::new();
    for y in fibers.keys() {
        let f = &fibers[y];
        for a in 0..f.len() {
            for b in a + 1..f.len() {
                out.push((f[a].0.clone(), f[a].1.clone(), f[b].0.clone(), f[b].1.clone()));
            }
        }
    }
    out
}

/// The full oracle battery and collision transport, run against the
/// CPF-simulated dual-free suite and the bloated-dual simulation on top of
/// both a genuine and a simulated inner suite. Each transport check uses up
/// to `collisions` colliding pairs.
pub fn reduction_battery(seed: &Seed, collisions: usize) -> Result<BatteryReport> {
    let mut report = BatteryReport::default();

    let cpf = FoldingCpf::new(12, 8, &seed.derive("dualfree"))?;
    let mut sim = simulate_dualfree_suite(cpf, 8, &seed.derive("dualfree"), 1)?;
    let (battery, fibers) = check_dual_free(&mut sim)?;
    merge(&mut report, "dualfree", battery);
    let mut transport = None;
    let pairs = collision_pairs(&fibers);
    for (x0, _, x1, _) in pairs.iter().take(collisions) {
        let (w0, w1) = (sim.gamma(x0)?, sim.gamma(x1)?);
        let mut q = sim.cpf().clone();
        if w0 == w1 || q.q_forward(&w0)?.0 != q.q_forward(&w1)?.0 {
            transport.get_or_insert_with(|| format!("collision at {} / {} did not map to a Q collision", x0.to_hex(), x1.to_hex()));
        }
    }
    if pairs.len() < collisions {
        transport.get_or_insert_with(|| format!("only {} collisions available", pairs.len()));
    }
    report.push("dualfree/collision_transport", transport);

    let genuine_inner = OracleSuite::new(
        Params {
            lambda: 1,
            s: 2,
            r: 4,
            n: 6,
            k: 4,
            ell_code: 0,
            rounds: 0,
            bloat_s: None,
            msg_len: 0,
        },
        seed.derive("inner"),
    )?;
    let bloated = simulate_bloated_from_dualfree(genuine_inner, 10, 4, 8, 2, 2, &seed.derive("bloated"))?;
    bloated_checks(&mut report, "bloated", bloated, collisions)?;

    let chained_cpf = FoldingCpf::new(6, 4, &seed.derive("chain"))?;
    let chained_inner = simulate_dualfree_suite(chained_cpf, 4, &seed.derive("chain"), 0)?;
    let chained = simulate_bloated_from_dualfree(chained_inner, 10, 4, 8, 2, 2, &seed.derive("chained"))?;
    bloated_checks(&mut report, "bloated_over_cpf", chained, collisions)?;
    Ok(report)
}

fn bloated_checks<I: DualFreeOracle>(
    report: &mut BatteryReport,
    prefix: &str,
    mut sim: SimulatedBloatedSuite<I>,
    collisions: usize,
) -> Result<()> {
    let (battery, fibers) = check_dual_free(&mut sim)?;
    merge(report, prefix, battery);
    let dual = check_dual(&mut sim, &fibers, usize::MAX)?;
    merge(report, prefix, dual);

    let mut transport = None;
    let mut found = 0;
    for (x0, u0, x1, u1) in collision_pairs(&fibers) {
        if found == collisions {
            break;
        }
        let y = sim.p_forward(&x0)?.y;
        let a1 = Subspace::column_span(&sim.dual_matrix(&y)?);
        if a1.contains(&u0.xor(&u1)) {
            continue;
        }
        found += 1;
        let (xb0, xb1) = (sim.inner_input(&x0)?, sim.inner_input(&x1)?);
        let inner = sim.inner_mut();
        if xb0 == xb1 || inner.p_forward(&xb0)?.y != inner.p_forward(&xb1)?.y {
            transport.get_or_insert_with(|| format!("strong collision {} / {} did not transport", x0.to_hex(), x1.to_hex()));
        }
    }
    if found < collisions {
        transport.get_or_insert_with(|| format!("only {found} strong collisions available"));
    }
    report.push(&format!("{prefix}/strong_collision_transport"), transport);
    Ok(())
}

/// Enumerates `P` over all `2^n` inputs, collects every verifying signature
/// per `(pk, message)`, and runs [`strong_unforgeability_witness`] on every
/// pair with distinct messages under one key. Each must return a valid `H`
/// collision. Reports the number of pairs checked.
pub fn strong_unforgeability_exhaustive(params: &Params, seed: &Seed) -> Result<(usize, CheckResult)> {
    if params.n > MAX_EXHAUSTIVE_BITS || params.msg_len > 8 {
        return Err(Error::Precondition("parameters too large to enumerate".into()));
    }
    let mut suite = OracleSuite::new(params.clone(), *seed)?;
    let code = LinearCode::sample(&mut DeterministicRng::new(seed, "code"), params.msg_len, params.ell_code)?;
    let messages: Vec<BitVec> = (0..1u64 << params.msg_len).map(|m| BitVec::from_index(m, params.msg_len)).collect();
    let mut by_key: BTreeMap<BitVec, Vec<Signature>> = BTreeMap::new();
    for i in 0..1u64 << params.n {
        let out = suite.p_forward(&BitVec::from_index(i, params.n))?;
        for m in &messages {
            if verify(&mut suite, &out.y, m, &out.u, &code) {
                by_key.entry(out.y.clone()).or_default().push(Signature {
                    sigma: out.u.clone(),
                    message: m.clone(),
                });
            }
        }
    }
    let mut pairs = 0;
    let mut failure = None;
    for (pk, sigs) in &by_key {
        for (a, sa) in sigs.iter().enumerate() {
            for sb in &sigs[a + 1..] {
                if sa.message == sb.message {
                    continue;
                }
                pairs += 1;
                let valid = match strong_unforgeability_witness(&mut suite, pk, sa, sb, &code)? {
                    Some((x0, x1)) => x0 != x1 && suite.h(&x0)? == *pk && suite.h(&x1)? == *pk,
                    None => false,
                };
                if !valid {
                    failure.get_or_insert_with(|| format!("no collision from signatures under pk = {}", pk.to_hex()));
                }
            }
        }
    }
    if pairs == 0 {
        failure.get_or_insert_with(|| "no verifying pairs found".into());
    }
    let mut report = BatteryReport::default();
    report.push("strong_unforgeability", failure);
    Ok((pairs, report.checks.remove(0)))
}

/// Samples certified codes for every `(msg_len, ℓ)` with `ℓ ≤ max_ell` and
/// `msg_len ≤ min(4, ℓ)` and checks decoding-ball disjointness over all
/// words. Shapes where sampling finds no certified code are skipped.
pub fn decoding_disjointness_sweep(max_ell: usize, per_shape: usize, seed: &Seed) -> Result<(usize, CheckResult)> {
    let mut rng = DeterministicRng::new(seed, "codes");
    let mut checked = 0;
    let mut failure = None;
    for ell in 1..=max_ell {
        for msg_len in 1..=ell.min(4) {
            for _ in 0..per_shape {
                let code = match LinearCode::sample(&mut rng, msg_len, ell) {
                    Ok(c) => c,
                    Err(Error::RetriesExhausted { .. }) => continue,
                    Err(e) => return Err(e),
                };
                checked += 1;
                if code.min_distance() <= ell / 3 || !code.decoding_balls_disjoint() {
                    failure.get_or_insert_with(|| format!("overlapping balls at ell = {ell}, msg_len = {msg_len}"));
                }
            }
        }
    }
    let mut report = BatteryReport::default();
    report.push("decoding_disjointness", failure);
    Ok((checked, report.checks.remove(0)))
}

/// One step of a coset-state script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateOp {
    Hadamard,
    MeasureBits(Vec<usize>),
    MeasureFunctional(AffineFunctional),
}

/// A coset state with random subspace, offset and phase in Z₂^k.
pub fn random_coset_state<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Result<SymbolicCosetState> {
    let dim = rng.gen_range(0..=k);
    let gens: Vec<BitVec> = (0..dim).map(|_| BitVec::random(rng, k)).collect();
    let support = Coset::new(Subspace::from_generators(k, &gens)?, &BitVec::random(rng, k))?;
    SymbolicCosetState::with_phase(support, &BitVec::random(rng, k))
}

pub fn random_script<R: Rng + ?Sized>(rng: &mut R, k: usize, len: usize) -> Vec<StateOp> {
    (0..len)
        .map(|_| match rng.gen_range(0..3) {
            0 => StateOp::Hadamard,
            1 => {
                let count = rng.gen_range(1..=k.min(3));
                StateOp::MeasureBits((0..count).map(|_| rng.gen_range(0..k)).collect())
            }
            _ => StateOp::MeasureFunctional(AffineFunctional::new(BitVec::random(rng, k), rng.gen())),
        })
        .collect()
}

struct Leaf {
    probability: Ratio<u64>,
    symbolic: SymbolicCosetState,
    dense: DenseState,
}

/// Runs `script` on the symbolic state and on its dense expansion side by
/// side, following every measurement branch. Each branch must have the same
/// exact probability and the same post-state up to global sign. Sampled
/// `measure_bits` calls must land on one of the enumerated branches.
/// Returns the first disagreement.
pub fn lockstep_check<R: Rng + ?Sized>(
    initial: &SymbolicCosetState,
    script: &[StateOp],
    rng: &mut R,
) -> Result<Option<String>> {
    let k = initial.ambient();
    let mut leaves = vec![Leaf {
        probability: Ratio::from_integer(1),
        symbolic: initial.clone(),
        dense: initial.to_dense()?,
    }];
    for (step, op) in script.iter().enumerate() {
        let functionals = match op {
            StateOp::Hadamard => {
                for leaf in &mut leaves {
                    leaf.symbolic = leaf.symbolic.hadamard_all();
                    leaf.dense = leaf.dense.hadamard_all();
                }
                Vec::new()
            }
            StateOp::MeasureBits(indices) => {
                for leaf in &leaves {
                    let (outcome, sampled) = leaf.symbolic.measure_bits(indices, rng)?;
                    let mut dense = leaf.dense.clone();
                    for (pos, &i) in indices.iter().enumerate() {
                        let f = AffineFunctional::coordinate(k, i);
                        match dense.branches(&f)?.into_iter().find(|b| b.outcome == outcome.get(pos)) {
                            Some(b) => dense = b.state,
                            None => return Ok(Some(format!("step {step}: sampled a zero-probability outcome"))),
                        }
                    }
                    if !dense_equal_up_to_global_sign(&sampled.to_dense()?, &dense) {
                        return Ok(Some(format!("step {step}: sampled post-state differs")));
                    }
                }
                indices.iter().map(|&i| AffineFunctional::coordinate(k, i)).collect()
            }
            StateOp::MeasureFunctional(f) => vec![f.clone()],
        };
        for f in functionals {
            let mut next = Vec::new();
            for leaf in leaves {
                let sym = leaf.symbolic.branches(&f)?;
                let dense = leaf.dense.branches(&f)?;
                if sym.len() != dense.len() {
                    return Ok(Some(format!("step {step}: {} symbolic vs {} dense branches", sym.len(), dense.len())));
                }
                for (s, d) in sym.into_iter().zip(dense) {
                    if s.outcome != d.outcome || s.probability != d.probability {
                        return Ok(Some(format!(
                            "step {step}: outcome {} has probability {} symbolically, {} densely",
                            s.outcome, s.probability, d.probability
                        )));
                    }
                    let sd = s.state.to_dense()?;
                    if !dense_equal_up_to_global_sign(&sd, &d.state) {
                        return Ok(Some(format!("step {step}: post-states differ for outcome {}", s.outcome)));
                    }
                    next.push(Leaf {
                        probability: leaf.probability * s.probability,
                        symbolic: s.state,
                        dense: d.state,
                    });
                }
            }
            leaves = next;
        }
    }
    let total: Ratio<u64> = leaves.iter().map(|l| l.probability).sum();
    if total != Ratio::from_integer(1) {
        return Ok(Some(format!("branch probabilities sum to {total}")));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coset_test_examples() {
        let pts = |s: &[&str]| s.iter().map(|b| BitVec::from_bit_str(b)).collect::<Vec<_>>();
        assert!(is_coset(&pts(&["100", "110", "101", "111"])));
        assert!(is_coset(&pts(&["011"])));
        assert!(!is_coset(&pts(&["100", "110", "101"])));
        assert!(!is_coset(&pts(&["000", "110", "101", "111"])));
        assert!(!is_coset(&[]));
    }
}
