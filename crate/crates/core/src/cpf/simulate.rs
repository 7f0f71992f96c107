use crate::error::{check_len, Error, Result};
use crate::gf2::{BitMatrix, BitVec, DEFAULT_MATRIX_RETRIES};
use crate::lazy_random::{LazyFunction, LazyPermutation, Seed};
use crate::oracle::{bottom_block_coordinates, DualFreeOracle, DualOracle, OracleDims, PointOutput};

use super::{ClawFreePermutation, FoldingCpf};

/// `(P, P⁻¹)` built from a folding CPF without the trapdoor of instance
/// `i_star`.
#[derive(Clone, Debug)]
pub struct SimulatedDualFreeSuite {
    cpf: FoldingCpf<ClawFreePermutation>,
    gamma: LazyPermutation,
    embed: LazyFunction<(BitMatrix, BitVec)>,
    k: usize,
    i_star: usize,
}

/// `P(x)`: `w = Γ(x)`, `(y, w̃) = Q(w)`, output `(y, C_y·w̃ + d_y)` with a
/// random full-column-rank `C_y` and random `d_y` per `y`.
pub fn simulate_dualfree_suite(
    cpf: FoldingCpf<ClawFreePermutation>,
    k: usize,
    seed: &Seed,
    i_star: usize,
) -> Result<SimulatedDualFreeSuite> {
    let shape = cpf.shape();
    if k < shape.folded_bits() {
        return Err(Error::InvalidParams(format!(
            "need k >= n - r + lambda_c = {} (k = {k})",
            shape.folded_bits()
        )));
    }
    if i_star >= shape.instances {
        return Err(Error::IndexOutOfRange {
            index: i_star,
            len: shape.instances,
        });
    }
    Ok(SimulatedDualFreeSuite {
        gamma: LazyPermutation::new(seed, "GAMMA", shape.n()),
        embed: LazyFunction::new(seed, "CY"),
        cpf,
        k,
        i_star,
    })
}

impl SimulatedDualFreeSuite {
    pub fn cpf(&self) -> &FoldingCpf<ClawFreePermutation> {
        &self.cpf
    }

    pub fn i_star(&self) -> usize {
        self.i_star
    }

    /// `Γ(x)`, the CPF input behind `x`.
    pub fn gamma(&mut self, x: &BitVec) -> Result<BitVec> {
        self.gamma.forward(x)
    }

    fn embedding(&mut self, y: &BitVec) -> Result<&(BitMatrix, BitVec)> {
        check_len(self.cpf.shape().r(), y.len(), "hash value y")?;
        let (k, cols) = (self.k, self.cpf.shape().folded_bits());
        self.embed.query(y, |rng| {
            let c = BitMatrix::random_full_rank(rng, k, cols, None)?;
            Ok((c, BitVec::random(rng, k)))
        })
    }
}

impl DualFreeOracle for SimulatedDualFreeSuite {
    fn dims(&self) -> OracleDims {
        let s = self.cpf.shape();
        OracleDims {
            n: s.n(),
            r: s.r(),
            k: self.k,
        }
    }

    fn p_forward(&mut self, x: &BitVec) -> Result<PointOutput> {
        let w = self.gamma.forward(x)?;
        let (y, folded) = self.cpf.q_forward(&w)?;
        let (c, d) = self.embedding(&y)?;
        let mut u = c.mul_vec(&folded)?;
        u.xor_assign(d);
        Ok(PointOutput { y, u })
    }

    fn p_inverse(&mut self, y: &BitVec, u: &BitVec) -> Result<Option<BitVec>> {
        check_len(self.k, u.len(), "P inverse vector")?;
        let (c, d) = self.embedding(y)?;
        let Some(folded) = c.solve(&u.xor(d))? else {
            return Ok(None);
        };
        let i_star = self.i_star;
        match self.cpf.q_inverse_missing(i_star, y, &folded)? {
            Some(w) => Ok(Some(self.gamma.inverse(&w)?)),
            None => Ok(None),
        }
    }
}

#[derive(Clone, Debug)]
struct OuterEmbedding {
    c: BitMatrix,
    c_inv: BitMatrix,
    d: BitVec,
}

/// `(P, P⁻¹, D′)` at `(n, r, k)` with bloat `s`, built from an inner dual-free
/// pair at `(r + s, r, k − (n − r − s))`.
#[derive(Clone, Debug)]
pub struct SimulatedBloatedSuite<I> {
    inner: I,
    gamma: LazyPermutation,
    embed: LazyFunction<OuterEmbedding>,
    dims: OracleDims,
    s: usize,
    ell_code: usize,
}

/// Outer `P(x)`: `(x̄, x̃) = Γ(x)`, `(y, ū) = P_inner(x̄)`,
/// `u = C(y)·(ū ‖ x̃ + d(y))`. `D′` answers against the last `n − r − s`
/// columns of `C(y)`.
pub fn simulate_bloated_from_dualfree<I: DualFreeOracle>(
    inner: I,
    n: usize,
    r: usize,
    k: usize,
    s: usize,
    ell_code: usize,
    seed: &Seed,
) -> Result<SimulatedBloatedSuite<I>> {
    if s == 0 || r + s > n {
        return Err(Error::InvalidParams(format!("need 1 <= s <= n - r (s = {s})")));
    }
    let tail = n - r - s;
    if tail > k || ell_code > tail {
        return Err(Error::InvalidParams(format!(
            "need ell_code <= n - r - s <= k (ell_code = {ell_code}, n - r - s = {tail}, k = {k})"
        )));
    }
    let want = OracleDims { n: r + s, r, k: k - tail };
    if inner.dims() != want {
        return Err(Error::InvalidParams(format!(
            "inner suite has shape {:?}, expected {want:?}",
            inner.dims()
        )));
    }
    Ok(SimulatedBloatedSuite {
        inner,
        gamma: LazyPermutation::new(seed, "GAMMA", n),
        embed: LazyFunction::new(seed, "CY"),
        dims: OracleDims { n, r, k },
        s,
        ell_code,
    })
}

impl<I: DualFreeOracle> SimulatedBloatedSuite<I> {
    pub fn inner(&self) -> &I {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut I {
        &mut self.inner
    }

    fn tail(&self) -> usize {
        self.dims.n - self.dims.r - self.s
    }

    /// The inner input `x̄` behind `x`.
    pub fn inner_input(&mut self, x: &BitVec) -> Result<BitVec> {
        let g = self.gamma.forward(x)?;
        Ok(g.slice(0, self.dims.r + self.s))
    }

    fn embedding(&mut self, y: &BitVec) -> Result<&OuterEmbedding> {
        check_len(self.dims.r, y.len(), "hash value y")?;
        let (k, tail, ell) = (self.dims.k, self.tail(), self.ell_code);
        self.embed.query(y, |rng| {
            for _ in 0..DEFAULT_MATRIX_RETRIES {
                let c = BitMatrix::random(rng, k, k);
                let Some(c_inv) = c.inverse() else { continue };
                if c.column_range(k - tail, k).row_range(k - ell, k).rank() != ell {
                    continue;
                }
                return Ok(OuterEmbedding {
                    c,
                    c_inv,
                    d: BitVec::random(rng, tail),
                });
            }
            Err(Error::RetriesExhausted {
                attempts: DEFAULT_MATRIX_RETRIES,
                what: "outer embedding C(y)".into(),
            })
        })
    }
}

impl<I: DualFreeOracle> DualFreeOracle for SimulatedBloatedSuite<I> {
    fn dims(&self) -> OracleDims {
        self.dims
    }

    fn p_forward(&mut self, x: &BitVec) -> Result<PointOutput> {
        let g = self.gamma.forward(x)?;
        let split = self.dims.r + self.s;
        let inner_out = self.inner.p_forward(&g.slice(0, split))?;
        let e = self.embedding(&inner_out.y)?;
        let shifted = g.slice(split, g.len()).xor(&e.d);
        let u = e.c.mul_vec(&inner_out.u.concat(&shifted))?;
        Ok(PointOutput { y: inner_out.y, u })
    }

    fn p_inverse(&mut self, y: &BitVec, u: &BitVec) -> Result<Option<BitVec>> {
        check_len(self.dims.k, u.len(), "P inverse vector")?;
        let inner_k = self.dims.k - self.tail();
        let e = self.embedding(y)?;
        let v = e.c_inv.mul_vec(u)?;
        let x_tail = v.slice(inner_k, v.len()).xor(&e.d);
        let Some(x_bar) = self.inner.p_inverse(y, &v.slice(0, inner_k))? else {
            return Ok(None);
        };
        Ok(Some(self.gamma.inverse(&x_bar.concat(&x_tail))?))
    }
}

impl<I: DualFreeOracle> DualOracle for SimulatedBloatedSuite<I> {
    fn ell_code(&self) -> usize {
        self.ell_code
    }

    fn dual_query(&mut self, y: &BitVec, v: &BitVec) -> Result<Option<BitVec>> {
        let a1 = self.dual_matrix(y)?;
        bottom_block_coordinates(&a1, v, self.ell_code)
    }

    fn dual_matrix(&mut self, y: &BitVec) -> Result<BitMatrix> {
        let (k, tail) = (self.dims.k, self.tail());
        Ok(self.embedding(y)?.c.column_range(k - tail, k))
    }
}
