//! Samplers and Monte Carlo experiments for subspace hiding and dual-subspace
//! anti-concentration.

use rand::Rng;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::gf2::{BitMatrix, BitVec, Subspace};
use crate::stats;

const SHF_RETRIES: usize = 1000;

/// Uniform superspace `T ⊇ base` with `dim T = dim base + s`, built by
/// adding random vectors that fall outside the running span.
pub fn sample_superspace<R: Rng + ?Sized>(base: &Subspace, s: usize, rng: &mut R) -> Result<Subspace> {
    let k = base.ambient();
    if base.dim() + s > k {
        return Err(Error::InvalidParams(format!(
            "superspace of dimension {} exceeds ambient {k}",
            base.dim() + s
        )));
    }
    let mut t = base.clone();
    while t.dim() < base.dim() + s {
        let v = BitVec::random(rng, k);
        if !t.contains(&v) {
            t = t.with_vector(&v)?;
        }
    }
    Ok(t)
}

/// A subspace membership oracle that counts its queries.
#[derive(Clone, Debug)]
pub struct MembershipOracle {
    subspace: Subspace,
    queries: u64,
}

impl MembershipOracle {
    pub fn new(subspace: Subspace) -> Self {
        MembershipOracle { subspace, queries: 0 }
    }

    pub fn ambient(&self) -> usize {
        self.subspace.ambient()
    }

    pub fn query(&mut self, v: &BitVec) -> bool {
        self.queries += 1;
        v.len() == self.subspace.ambient() && self.subspace.contains(v)
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    /// The hidden subspace, for instrumentation only.
    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }
}

/// `S₀ ⊂ S_i ⊂ S` together with a sampled `T₀` and the spans
/// `T_i = T₀ + S_i`, `T = T₀ + S`.
#[derive(Clone, Debug)]
pub struct ShfFamily {
    pub s0: Subspace,
    pub intermediates: Vec<Subspace>,
    pub s: Subspace,
    pub t0: Subspace,
    pub t_intermediates: Vec<Subspace>,
    pub t: Subspace,
    index_functionals: Vec<BitVec>,
}

/// Samples `T₀ ⊇ S₀` of dimension `dim S₀ + s_add` with `T₀ ∩ S = S₀`.
///
/// Requires `dim S_i = dim S₀ + λ − 1` and `dim S = dim S₀ + λ` for
/// `λ = intermediates.len()`, pairwise distinct `S_i` strictly between `S₀`
/// and `S`, and `∩ S_i = S₀`.
pub fn sample_shf<R: Rng + ?Sized>(
    s0: &Subspace,
    intermediates: &[Subspace],
    s: &Subspace,
    s_add: usize,
    rng: &mut R,
) -> Result<ShfFamily> {
    let lambda = intermediates.len();
    let r = s0.dim();
    let bad = |m: &str| Err(Error::InvalidParams(format!("invalid subspace chain: {m}")));
    if lambda == 0 {
        return bad("need at least one intermediate subspace");
    }
    if s.dim() != r + lambda || !s.contains_subspace(s0) {
        return bad("S must contain S0 with dimension dim S0 + lambda");
    }
    let mut meet = s.clone();
    for (i, si) in intermediates.iter().enumerate() {
        if si.dim() != r + lambda - 1 || !si.contains_subspace(s0) || !s.contains_subspace(si) {
            return bad("each S_i must sit between S0 and S with dimension dim S - 1");
        }
        if intermediates[..i].contains(si) {
            return bad("intermediate subspaces must be distinct");
        }
        meet = meet.intersect(si)?;
    }
    if meet != *s0 {
        return bad("the intermediate subspaces must intersect exactly in S0");
    }
    if r + lambda + s_add > s.ambient() {
        return bad("T would exceed the ambient dimension");
    }
    let mut t0 = None;
    for _ in 0..SHF_RETRIES {
        let cand = sample_superspace(s0, s_add, rng)?;
        if cand.intersect(s)? == *s0 {
            t0 = Some(cand);
            break;
        }
    }
    let t0 = t0.ok_or_else(|| Error::RetriesExhausted {
        attempts: SHF_RETRIES,
        what: "T0 meeting S exactly in S0".into(),
    })?;
    let t_intermediates = intermediates
        .iter()
        .map(|si| t0.joint_span(si))
        .collect::<Result<Vec<_>>>()?;
    let t = t0.joint_span(s)?;
    let s_dual = s.dual();
    let index_functionals = intermediates
        .iter()
        .map(|si| {
            si.dual()
                .basis()
                .row_vecs()
                .iter()
                .find(|g| !s_dual.contains(g))
                .cloned()
                .expect("S_i is a proper subspace of S")
        })
        .collect();
    Ok(ShfFamily {
        s0: s0.clone(),
        intermediates: intermediates.to_vec(),
        s: s.clone(),
        t0,
        t_intermediates,
        t,
        index_functionals,
    })
}

impl ShfFamily {
    /// Which coset of `S₀` inside `S` contains `v`: bit `i` says whether `v`
    /// leaves `S_i`. `None` for `v ∉ S`.
    pub fn coset_index(&self, v: &BitVec) -> Option<BitVec> {
        if !self.s.contains(v) {
            return None;
        }
        Some(BitVec::from_bools(
            &self.index_functionals.iter().map(|g| g.dot(v)).collect::<Vec<_>>(),
        ))
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// A random `S` of dimension `r` in Z₂^k and `t = k − r − s` fixed duals
/// `T̄_j^⊥` of random `(r + s)`-dimensional superspaces of `S`.
#[derive(Clone, Debug)]
pub struct IntersectionSetup {
    base: Subspace,
    s: usize,
    fixed: Vec<Subspace>,
}

impl IntersectionSetup {
    pub fn sample<R: Rng + ?Sized>(k: usize, r: usize, s: usize, t: usize, rng: &mut R) -> Result<Self> {
        if r + s > k || t != k - r - s {
            return Err(Error::InvalidParams(format!("need t = k - r - s (k = {k}, r = {r}, s = {s}, t = {t})")));
        }
        let base = sample_superspace(&Subspace::zero(k), r, rng)?;
        let fixed = (0..t)
            .map(|_| sample_superspace(&base, s, rng).map(|tb| tb.dual()))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntersectionSetup { base, s, fixed })
    }

    pub fn base(&self) -> &Subspace {
        &self.base
    }

    /// One trial: a fresh superspace `T`; true iff `T^⊥ ∩ T̄_j^⊥ = {0}` for
    /// every `j`.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<bool> {
        let dual = sample_superspace(&self.base, self.s, rng)?.dual();
        for f in &self.fixed {
            if f.joint_span(&dual)?.dim() != f.dim() + dual.dim() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Probability that `T^⊥` meets each of `t` fixed random duals only in 0,
/// with `T` a uniform `(r + s)`-dimensional superspace of a random `S`.
/// `t` must equal `k − r − s`, the dimension of `T^⊥`.
pub fn trivial_intersection_probability<R: Rng + ?Sized>(
    k: usize,
    r: usize,
    s: usize,
    t: usize,
    trials: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::InvalidParams("need at least one trial".into()));
    }
    let setup = IntersectionSetup::sample(k, r, s, t, rng)?;
    let hits = (0..trials)
        .map(|_| Ok(if setup.trial(rng)? { 1.0 } else { 0.0 }))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Estimate {
        estimate: stats::mean(&hits),
        stderr: stats::stderr(&hits),
        trials,
    })
}

/// `1 − t·2^{t−s}`.
pub fn intersection_lower_bound(s: usize, t: usize) -> f64 {
    1.0 - t as f64 * 2f64.powi(t as i32 - s as i32)
}

/// Where an adversary output landed relative to `S` and the sampled `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputClass {
    Zero,
    /// In `T^⊥ \ {0}`.
    DualHit,
    /// In `S^⊥ \ T^⊥`.
    Escape,
    /// Outside `S^⊥`.
    Outside,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BucketRecord {
    pub hits: usize,
    pub escapes: usize,
    /// First execution in the bucket whose output hit its dual, and whose dual
    /// meets every earlier winner's dual only in 0.
    pub winner: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AntiConcentrationRun {
    pub ell: usize,
    pub t: usize,
    pub classes: Vec<OutputClass>,
    pub buckets: Vec<BucketRecord>,
    /// Outputs that landed in `S^⊥`, in execution order.
    #[serde(serialize_with = "bit_strings")]
    pub collected: Vec<BitVec>,
    /// `dim span(collected)`, maintained incrementally.
    pub span_dim: usize,
    pub max_queries: u64,
    /// `q·ℓ²·s/√2^t` with `q = max_queries`. Reported only.
    pub reference_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AntiConcentrationConfig {
    pub s: usize,
    pub epsilon: f64,
    /// Give every execution the same `T` instead of fresh samples.
    pub shared: bool,
}

/// Runs the reduction: `ℓ = ⌈k(t+1)/ε⌉` executions of `adversary`, each with
/// a membership oracle for a superspace of `base`, then bookkeeping over
/// `t + 1` buckets and the span dimension of the outputs inside `S^⊥`.
pub fn anticoncentration_reduction<R, A>(
    base: &Subspace,
    cfg: AntiConcentrationConfig,
    mut adversary: A,
    rng: &mut R,
) -> Result<AntiConcentrationRun>
where
    R: Rng + ?Sized,
    A: FnMut(&mut MembershipOracle, &mut R) -> BitVec,
{
    let (k, r, s) = (base.ambient(), base.dim(), cfg.s);
    if r + s > k {
        return Err(Error::InvalidParams("need r + s <= k".into()));
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0) {
        return Err(Error::InvalidParams("need 0 < epsilon <= 1".into()));
    }
    let t = k - r - s;
    let ell = ((k * (t + 1)) as f64 / cfg.epsilon).ceil() as usize;
    let bucket_len = ell.div_ceil(t + 1);
    let s_dual = base.dual();
    let shared = if cfg.shared { Some(sample_superspace(base, s, rng)?) } else { None };

    let mut classes = Vec::with_capacity(ell);
    let mut buckets = vec![
        BucketRecord {
            hits: 0,
            escapes: 0,
            winner: None,
        };
        t + 1
    ];
    let mut winners: Vec<Subspace> = Vec::new();
    let mut collected = Vec::new();
    let mut span = Subspace::zero(k);
    let mut max_queries = 0;
    for i in 0..ell {
        let big_t = match &shared {
            Some(tt) => tt.clone(),
            None => sample_superspace(base, s, rng)?,
        };
        let t_dual = big_t.dual();
        let mut oracle = MembershipOracle::new(big_t);
        let u = adversary(&mut oracle, rng);
        check_len(k, u.len(), "adversary output")?;
        max_queries = max_queries.max(oracle.queries());
        let class = if u.is_zero() {
            OutputClass::Zero
        } else if t_dual.contains(&u) {
            OutputClass::DualHit
        } else if s_dual.contains(&u) {
            OutputClass::Escape
        } else {
            OutputClass::Outside
        };
        let bucket = &mut buckets[i / bucket_len];
        match class {
            OutputClass::DualHit => {
                bucket.hits += 1;
                if bucket.winner.is_none() {
                    let disjoint = winners
                        .iter()
                        .map(|w| Ok(w.joint_span(&t_dual)?.dim() == w.dim() + t_dual.dim()))
                        .collect::<Result<Vec<bool>>>()?
                        .into_iter()
                        .all(|b| b);
                    if disjoint {
                        bucket.winner = Some(i);
                        winners.push(t_dual.clone());
                    }
                }
            }
            OutputClass::Escape => bucket.escapes += 1,
            _ => {}
        }
        if matches!(class, OutputClass::Zero | OutputClass::DualHit | OutputClass::Escape) {
            collected.push(u.clone());
            if !span.contains(&u) {
                span = span.with_vector(&u)?;
            }
        }
        classes.push(class);
    }
    let reference_bound = max_queries as f64 * (ell * ell) as f64 * s as f64 / 2f64.powf(t as f64 / 2.0);
    Ok(AntiConcentrationRun {
        ell,
        t,
        classes,
        buckets,
        collected,
        span_dim: span.dim(),
        max_queries,
        reference_bound,
    })
}

fn bit_strings<S: serde::Serializer>(vs: &[BitVec], ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_seq(vs.iter().map(BitVec::to_bit_string))
}

/// Batch rank of a list of vectors, for cross-checking incremental spans.
pub fn batch_rank(k: usize, vs: &[BitVec]) -> Result<usize> {
    Ok(BitMatrix::from_rows(k, vs.to_vec())?.rank())
}
