//! Claw-free permutations, the folding coset-partition function, and the
//! reductions that simulate oracle suites from them.

mod birthday;
mod lwe;
mod simulate;

pub use birthday::{collision_search_birthday, BirthdayOutcome};
pub use lwe::{LweParams, LweTcf};
pub use simulate::{simulate_bloated_from_dualfree, simulate_dualfree_suite, SimulatedBloatedSuite, SimulatedDualFreeSuite};

use crate::error::{check_len, Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::lazy_random::{LazyPermutation, Seed};

/// A two-branch function family `(b, x) ↦ f_b(x)` with a trapdoor inverter.
///
/// `effective_input` is the part of `x` that gets folded; `reconstruct`
/// recovers `x` from its effective part using forward access only.
pub trait TrapdoorClawFree {
    fn input_bits(&self) -> usize;
    fn output_bits(&self) -> usize;
    fn effective_bits(&self) -> usize;
    fn eval(&mut self, b: bool, x: &BitVec) -> Result<BitVec>;
    fn effective_input(&self, x: &BitVec) -> BitVec;
    /// Trapdoor inversion of branch `b`. Counted.
    fn invert(&mut self, b: bool, y: &BitVec) -> Result<Option<BitVec>>;
    fn reconstruct(&mut self, b: bool, effective: &BitVec, y: &BitVec) -> Result<Option<BitVec>>;
    fn trapdoor_calls(&self) -> u64;
}

/// `H*(b, x) = Π_b(x)` for two independent random permutations of
/// `{0,1}^λ_c`. The retained inverse tables play the trapdoor.
#[derive(Clone, Debug)]
pub struct ClawFreePermutation {
    pi: [LazyPermutation; 2],
    trapdoor_calls: u64,
}

/// Permutations up to this width are fully sampled at construction, so their
/// values do not depend on query order.
pub const MATERIALIZE_BITS: usize = 12;

impl ClawFreePermutation {
    pub fn new(seed: &Seed, tag: &str, bits: usize) -> Self {
        let mut pi = [
            LazyPermutation::new(seed, &format!("{tag}/0"), bits),
            LazyPermutation::new(seed, &format!("{tag}/1"), bits),
        ];
        if bits <= MATERIALIZE_BITS {
            for p in &mut pi {
                p.materialize();
            }
        }
        ClawFreePermutation { pi, trapdoor_calls: 0 }
    }

    pub fn bits(&self) -> usize {
        self.pi[0].bits()
    }

    /// `(Π₀⁻¹(y), Π₁⁻¹(y))`, the claw at `y`.
    pub fn claw(&mut self, y: &BitVec) -> Result<(BitVec, BitVec)> {
        self.trapdoor_calls += 2;
        Ok((self.pi[0].inverse(y)?, self.pi[1].inverse(y)?))
    }
}

impl TrapdoorClawFree for ClawFreePermutation {
    fn input_bits(&self) -> usize {
        self.bits()
    }

    fn output_bits(&self) -> usize {
        self.bits()
    }

    fn effective_bits(&self) -> usize {
        self.bits()
    }

    fn eval(&mut self, b: bool, x: &BitVec) -> Result<BitVec> {
        self.pi[b as usize].forward(x)
    }

    fn effective_input(&self, x: &BitVec) -> BitVec {
        x.clone()
    }

    fn invert(&mut self, b: bool, y: &BitVec) -> Result<Option<BitVec>> {
        self.trapdoor_calls += 1;
        self.pi[b as usize].inverse(y).map(Some)
    }

    fn reconstruct(&mut self, b: bool, effective: &BitVec, y: &BitVec) -> Result<Option<BitVec>> {
        check_len(self.bits(), effective.len(), "effective input")?;
        Ok((self.eval(b, effective)? == *y).then(|| effective.clone()))
    }

    fn trapdoor_calls(&self) -> u64 {
        self.trapdoor_calls
    }
}

/// Block widths of a [`FoldingCpf`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldShape {
    /// Number of instances, `n − r`.
    pub instances: usize,
    pub input_bits: usize,
    pub output_bits: usize,
    pub effective_bits: usize,
}

impl FoldShape {
    /// Width of `w`: one selector bit plus an input per instance.
    pub fn n(&self) -> usize {
        self.instances * (1 + self.input_bits)
    }

    /// Width of `y`.
    pub fn r(&self) -> usize {
        self.instances * self.output_bits
    }

    /// Width of the folded value: the selector bits, then the XOR of the
    /// effective inputs.
    pub fn folded_bits(&self) -> usize {
        self.instances + self.effective_bits
    }
}

/// `Q(w) = (f_1(w_1), …, f_m(w_m))` where `w_i = (b_i, x_i)`, together with
/// the fold `w̃ = (b_1, …, b_m, ⊕ eff(x_i))`.
#[derive(Clone, Debug)]
pub struct FoldingCpf<T> {
    instances: Vec<T>,
    shape: FoldShape,
}

impl FoldingCpf<ClawFreePermutation> {
    /// `n − r` claw-free permutations on `n/(n − r) − 1` bits each.
    pub fn new(n: usize, r: usize, seed: &Seed) -> Result<Self> {
        if r >= n || n % (n - r) != 0 || n / (n - r) < 2 {
            return Err(Error::InvalidParams(format!(
                "need (n - r) | n and n/(n - r) >= 2 (n = {n}, r = {r})"
            )));
        }
        let m = n - r;
        let bits = n / m - 1;
        let instances = (0..m)
            .map(|i| ClawFreePermutation::new(seed, &format!("CPF/{i}"), bits))
            .collect();
        FoldingCpf::from_instances(instances)
    }
}

impl<T: TrapdoorClawFree> FoldingCpf<T> {
    pub fn from_instances(instances: Vec<T>) -> Result<Self> {
        let first = instances
            .first()
            .ok_or_else(|| Error::InvalidParams("need at least one instance".into()))?;
        let shape = FoldShape {
            instances: instances.len(),
            input_bits: first.input_bits(),
            output_bits: first.output_bits(),
            effective_bits: first.effective_bits(),
        };
        for inst in &instances {
            if (inst.input_bits(), inst.output_bits(), inst.effective_bits())
                != (shape.input_bits, shape.output_bits, shape.effective_bits)
            {
                return Err(Error::InvalidParams("instances have different shapes".into()));
            }
        }
        Ok(FoldingCpf { instances, shape })
    }

    pub fn shape(&self) -> FoldShape {
        self.shape
    }

    pub fn instance(&self, i: usize) -> &T {
        &self.instances[i]
    }

    fn block(&self, w: &BitVec, i: usize) -> (bool, BitVec) {
        let width = 1 + self.shape.input_bits;
        let start = i * width;
        (w.get(start), w.slice(start + 1, start + width))
    }

    fn output_block(&self, y: &BitVec, i: usize) -> BitVec {
        let o = self.shape.output_bits;
        y.slice(i * o, (i + 1) * o)
    }

    fn assemble(&self, blocks: &[(bool, BitVec)]) -> BitVec {
        let mut w = BitVec::zeros(0);
        for (b, x) in blocks {
            w = w.concat(&BitVec::from_bools(&[*b])).concat(x);
        }
        w
    }

    /// `(y, w̃)`.
    pub fn q_forward(&mut self, w: &BitVec) -> Result<(BitVec, BitVec)> {
        check_len(self.shape.n(), w.len(), "Q input")?;
        let m = self.shape.instances;
        let mut y = BitVec::zeros(0);
        let mut selectors = BitVec::zeros(m);
        let mut sum = BitVec::zeros(self.shape.effective_bits);
        for i in 0..m {
            let (b, x) = self.block(w, i);
            y = y.concat(&self.instances[i].eval(b, &x)?);
            selectors.set(i, b);
            sum.xor_assign(&self.instances[i].effective_input(&x));
        }
        Ok((y, selectors.concat(&sum)))
    }

    fn check_inverse_shapes(&self, y: &BitVec, folded: &BitVec) -> Result<()> {
        check_len(self.shape.r(), y.len(), "Q output")?;
        check_len(self.shape.folded_bits(), folded.len(), "folded value")
    }

    /// Inverts every instance with its trapdoor, then checks the folded sum.
    pub fn q_inverse(&mut self, y: &BitVec, folded: &BitVec) -> Result<Option<BitVec>> {
        self.check_inverse_shapes(y, folded)?;
        let m = self.shape.instances;
        let mut blocks = Vec::with_capacity(m);
        let mut sum = BitVec::zeros(self.shape.effective_bits);
        for i in 0..m {
            let b = folded.get(i);
            let yi = self.output_block(y, i);
            let Some(x) = self.instances[i].invert(b, &yi)? else {
                return Ok(None);
            };
            sum.xor_assign(&self.instances[i].effective_input(&x));
            blocks.push((b, x));
        }
        if sum != folded.slice(m, folded.len()) {
            return Ok(None);
        }
        Ok(Some(self.assemble(&blocks)))
    }

    /// As [`FoldingCpf::q_inverse`] without the trapdoor of `i_star`: its
    /// effective input is recovered from the folded sum and checked forward.
    pub fn q_inverse_missing(&mut self, i_star: usize, y: &BitVec, folded: &BitVec) -> Result<Option<BitVec>> {
        self.check_inverse_shapes(y, folded)?;
        let m = self.shape.instances;
        if i_star >= m {
            return Err(Error::IndexOutOfRange { index: i_star, len: m });
        }
        let mut blocks = vec![(false, BitVec::zeros(0)); m];
        let mut eff = folded.slice(m, folded.len());
        for i in (0..m).filter(|&i| i != i_star) {
            let b = folded.get(i);
            let yi = self.output_block(y, i);
            let Some(x) = self.instances[i].invert(b, &yi)? else {
                return Ok(None);
            };
            eff.xor_assign(&self.instances[i].effective_input(&x));
            blocks[i] = (b, x);
        }
        let b = folded.get(i_star);
        let yi = self.output_block(y, i_star);
        let Some(x) = self.instances[i_star].reconstruct(b, &eff, &yi)? else {
            return Ok(None);
        };
        blocks[i_star] = (b, x);
        Ok(Some(self.assemble(&blocks)))
    }

    /// Instances in which `w0` and `w1` take different branches.
    pub fn claw_indices(&self, w0: &BitVec, w1: &BitVec) -> Vec<usize> {
        (0..self.shape.instances)
            .filter(|&i| self.block(w0, i).0 != self.block(w1, i).0)
            .collect()
    }
}

impl FoldingCpf<ClawFreePermutation> {
    /// `(Ā_y, b̄_y)` with the preimage set of `y` equal to
    /// `{Ā_y·z + b̄_y}`, computed through the trapdoors. Column `i` of `Ā_y`
    /// is the difference of the two branch preimages in block `i`.
    pub fn preimage_coset(&mut self, y: &BitVec) -> Result<(BitMatrix, BitVec)> {
        check_len(self.shape.r(), y.len(), "Q output")?;
        let m = self.shape.instances;
        let width = 1 + self.shape.input_bits;
        let n = self.shape.n();
        let mut base = BitVec::zeros(n);
        let mut columns = Vec::with_capacity(m);
        for i in 0..m {
            let yi = self.output_block(y, i);
            let (x0, x1) = self.instances[i].claw(&yi)?;
            let mut col = BitVec::zeros(n);
            col.set(i * width, true);
            for j in 0..self.shape.input_bits {
                base.set(i * width + 1 + j, x0.get(j));
                col.set(i * width + 1 + j, x0.get(j) ^ x1.get(j));
            }
            columns.push(col);
        }
        Ok((BitMatrix::from_columns(n, &columns)?, base))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn all(bits: usize) -> impl Iterator<Item = BitVec> {
        (0..1u64 << bits).map(move |i| BitVec::from_index(i, bits))
    }

    #[test]
    fn fold_example() {
        let mut cpf = FoldingCpf::new(6, 4, &Seed::from_u64(1)).unwrap();
        let w = BitVec::from_bit_str("1 01 0 11");
        let (_, folded) = cpf.q_forward(&w).unwrap();
        assert_eq!(folded, BitVec::from_bit_str("10 10"));
    }

    #[test]
    fn shape_validation() {
        assert!(FoldingCpf::new(7, 4, &Seed::from_u64(1)).is_err());
        assert!(FoldingCpf::new(4, 0, &Seed::from_u64(1)).is_err());
        assert!(FoldingCpf::new(12, 8, &Seed::from_u64(1)).is_ok());
    }

    #[test]
    fn claw_free_permutation_is_two_to_one() {
        let mut cf = ClawFreePermutation::new(&Seed::from_u64(2), "T", 8);
        let mut pre: HashMap<BitVec, Vec<(bool, BitVec)>> = HashMap::new();
        for b in [false, true] {
            for x in all(8) {
                pre.entry(cf.eval(b, &x).unwrap()).or_default().push((b, x));
            }
        }
        assert_eq!(pre.len(), 256);
        for (y, v) in pre {
            assert_eq!(v.len(), 2);
            assert_ne!(v[0].0, v[1].0);
            let (x0, x1) = cf.claw(&y).unwrap();
            assert_eq!(cf.eval(false, &x0).unwrap(), y);
            assert_eq!(cf.eval(true, &x1).unwrap(), y);
        }
    }

    #[test]
    fn missing_trapdoor_is_never_touched() {
        let mut cpf = FoldingCpf::new(12, 8, &Seed::from_u64(3)).unwrap();
        for i in 0..1u64 << 12 {
            let w = BitVec::from_index(i.wrapping_mul(2654435761) & 0xfff, 12);
            let (y, f) = cpf.q_forward(&w).unwrap();
            assert_eq!(cpf.q_inverse_missing(2, &y, &f).unwrap(), Some(w));
        }
        assert_eq!(cpf.instance(2).trapdoor_calls(), 0);
        assert!(cpf.instance(0).trapdoor_calls() > 0);
    }

    #[test]
    fn corrupted_sum_rejects() {
        let mut cpf = FoldingCpf::new(12, 8, &Seed::from_u64(4)).unwrap();
        let w = BitVec::from_index(0x5a3, 12);
        let (y, mut f) = cpf.q_forward(&w).unwrap();
        f.flip(f.len() - 1);
        assert_eq!(cpf.q_inverse(&y, &f).unwrap(), None);
        assert_eq!(cpf.q_inverse_missing(0, &y, &f).unwrap(), None);
    }
}
