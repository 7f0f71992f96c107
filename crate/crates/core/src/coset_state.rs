//! Exact symbolic simulation of coset states
//! `Σ_{u ∈ a+S} (−1)^{⟨z,u⟩} |u⟩`, with a dense statevector oracle.

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gf2::{BitVec, Coset, Subspace};

/// The affine map `u ↦ ⟨linear, u⟩ + constant` on Z₂^k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineFunctional {
    pub linear: BitVec,
    pub constant: bool,
}

impl AffineFunctional {
    pub fn new(linear: BitVec, constant: bool) -> Self {
        AffineFunctional { linear, constant }
    }

    /// The coordinate projection `u ↦ u[index]`.
    pub fn coordinate(k: usize, index: usize) -> Self {
        AffineFunctional {
            linear: BitVec::unit(k, index),
            constant: false,
        }
    }

    pub fn eval(&self, u: &BitVec) -> bool {
        self.linear.dot(u) ^ self.constant
    }
}

/// A coset state up to global sign. The phase is kept reduced modulo the
/// dual of the support subspace, so equal states have equal fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicCosetState {
    support: Coset,
    dual: Subspace,
    phase: BitVec,
}

/// One outcome of a projective measurement, with its exact probability.
#[derive(Clone, Debug)]
pub struct Branch<S> {
    pub probability: Ratio<u64>,
    pub outcome: bool,
    pub state: S,
}

impl SymbolicCosetState {
    /// Uniform superposition over `c` with zero phase.
    pub fn uniform_over(c: Coset) -> Self {
        let k = c.ambient();
        Self::with_phase(c, &BitVec::zeros(k)).expect("zero phase has the right length")
    }

    pub fn with_phase(support: Coset, phase: &BitVec) -> Result<Self> {
        check_len(support.ambient(), phase.len(), "state phase")?;
        let dual = support.subspace().dual();
        let phase = dual.reduce(phase);
        Ok(SymbolicCosetState { support, dual, phase })
    }

    pub fn ambient(&self) -> usize {
        self.support.ambient()
    }

    pub fn support(&self) -> &Coset {
        &self.support
    }

    /// `dual(S)` for the support subspace `S`.
    pub fn support_dual(&self) -> &Subspace {
        &self.dual
    }

    pub fn phase(&self) -> &BitVec {
        &self.phase
    }

    /// `H^{⊗k}`: `(S, a, z) ↦ (dual(S), z, a)`.
    pub fn hadamard_all(&self) -> Self {
        SymbolicCosetState {
            support: Coset::new(self.dual.clone(), &self.phase).expect("phase lives in the ambient space"),
            dual: self.support.subspace().clone(),
            phase: self.support.offset().clone(),
        }
    }

    fn check_functional(&self, f: &AffineFunctional) -> Result<()> {
        check_len(self.ambient(), f.linear.len(), "affine functional")
    }

    /// `Some(value)` when `f` is constant on the support.
    pub fn constant_value(&self, f: &AffineFunctional) -> Result<Option<bool>> {
        self.check_functional(f)?;
        if self.dual.contains(&f.linear) {
            Ok(Some(f.eval(self.support.offset())))
        } else {
            Ok(None)
        }
    }

    /// Both measurement outcomes of `f` with their exact probabilities.
    /// Zero-probability outcomes are omitted.
    pub fn branches(&self, f: &AffineFunctional) -> Result<Vec<Branch<Self>>> {
        if let Some(value) = self.constant_value(f)? {
            return Ok(vec![Branch {
                probability: Ratio::from_integer(1),
                outcome: value,
                state: self.clone(),
            }]);
        }
        let basis = self.support.subspace().basis().row_vecs();
        let p = basis
            .iter()
            .position(|b| f.linear.dot(b))
            .expect("non-constant functional has a witness in the basis");
        let pivot = &basis[p];
        let slice_gens: Vec<BitVec> = basis
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != p)
            .map(|(_, b)| if f.linear.dot(b) { b.xor(pivot) } else { b.clone() })
            .collect();
        let slice = Subspace::from_generators(self.ambient(), &slice_gens)?;
        let a = self.support.offset();
        let at_a = f.eval(a);
        let mut out = Vec::with_capacity(2);
        for outcome in [false, true] {
            let offset = if outcome == at_a { a.clone() } else { a.xor(pivot) };
            out.push(Branch {
                probability: Ratio::new(1, 2),
                outcome,
                state: Self::with_phase(Coset::new(slice.clone(), &offset)?, &self.phase)?,
            });
        }
        Ok(out)
    }

    /// Measures `f`, collapsing onto the matching affine slice.
    pub fn measure_functional<R: Rng + ?Sized>(&self, f: &AffineFunctional, rng: &mut R) -> Result<(bool, Self)> {
        let mut branches = self.branches(f)?;
        let pick = if branches.len() == 1 { 0 } else { rng.gen_range(0..2) };
        let b = branches.swap_remove(pick);
        Ok((b.outcome, b.state))
    }

    /// Measures the listed coordinates in order.
    pub fn measure_bits<R: Rng + ?Sized>(&self, indices: &[usize], rng: &mut R) -> Result<(BitVec, Self)> {
        let k = self.ambient();
        if let Some(&bad) = indices.iter().find(|&&i| i >= k) {
            return Err(Error::IndexOutOfRange { index: bad, len: k });
        }
        let mut outcomes = BitVec::zeros(indices.len());
        let mut st = self.clone();
        for (pos, &i) in indices.iter().enumerate() {
            let (bit, next) = st.measure_functional(&AffineFunctional::coordinate(k, i), rng)?;
            outcomes.set(pos, bit);
            st = next;
        }
        Ok((outcomes, st))
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        let k = self.ambient();
        if k > DenseState::MAX_QUBITS {
            return Err(Error::StateTooLarge(k));
        }
        let mut amplitudes = vec![0i64; 1 << k];
        for u in self.support.elements() {
            amplitudes[u.to_index() as usize] = if self.phase.dot(&u) { -1 } else { 1 };
        }
        Ok(DenseState {
            k,
            amplitudes,
            norm_sq: 1u64 << self.support.dim(),
        })
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            k: self.ambient(),
            basis_rows: self.support.subspace().basis().row_vecs().iter().map(BitVec::to_hex).collect(),
            offset: self.support.offset().to_hex(),
            phase: self.phase.to_hex(),
        }
    }

    pub fn from_json(json: &StateJson) -> Result<Self> {
        let k = json.k;
        let rows = json
            .basis_rows
            .iter()
            .map(|h| BitVec::from_hex(h, k))
            .collect::<Result<Vec<_>>>()?;
        let subspace = Subspace::from_generators(k, &rows)?;
        let support = Coset::new(subspace, &BitVec::from_hex(&json.offset, k)?)?;
        Self::with_phase(support, &BitVec::from_hex(&json.phase, k)?)
    }
}

/// Debug serialization of a [`SymbolicCosetState`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateJson {
    pub k: usize,
    pub basis_rows: Vec<String>,
    pub offset: String,
    pub phase: String,
}

/// A real statevector with amplitudes `amplitudes[u] / √norm_sq`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseState {
    k: usize,
    amplitudes: Vec<i64>,
    norm_sq: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl DenseState {
    pub const MAX_QUBITS: usize = 16;

    pub fn basis_state(u: &BitVec) -> Result<Self> {
        let k = u.len();
        if k > Self::MAX_QUBITS {
            return Err(Error::StateTooLarge(k));
        }
        let mut amplitudes = vec![0; 1 << k];
        amplitudes[u.to_index() as usize] = 1;
        Ok(DenseState { k, amplitudes, norm_sq: 1 })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn amplitudes(&self) -> &[i64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> u64 {
        self.norm_sq
    }

    /// Checks `Σ amplitude² = norm_sq` exactly.
    pub fn is_normalized(&self) -> bool {
        self.amplitudes.iter().map(|&a| (a * a) as u64).sum::<u64>() == self.norm_sq
    }

    fn reduced(mut self) -> Self {
        let g = self.amplitudes.iter().fold(0u64, |g, &a| gcd(g, a.unsigned_abs()));
        if g > 1 {
            for a in &mut self.amplitudes {
                *a /= g as i64;
            }
            self.norm_sq /= g * g;
        }
        self
    }

    /// Unnormalized fast Walsh-Hadamard transform; the norm picks up `2^k`.
    pub fn hadamard_all(&self) -> Self {
        let mut amps = self.amplitudes.clone();
        let mut h = 1;
        while h < amps.len() {
            for block in (0..amps.len()).step_by(2 * h) {
                for i in block..block + h {
                    let (x, y) = (amps[i], amps[i + h]);
                    amps[i] = x + y;
                    amps[i + h] = x - y;
                }
            }
            h *= 2;
        }
        DenseState {
            k: self.k,
            amplitudes: amps,
            norm_sq: self.norm_sq << self.k,
        }
        .reduced()
    }

    /// Projective measurement of `f`, both outcomes with exact probabilities.
    pub fn branches(&self, f: &AffineFunctional) -> Result<Vec<Branch<Self>>> {
        check_len(self.k, f.linear.len(), "affine functional")?;
        let mut out = Vec::new();
        for outcome in [false, true] {
            let mut amps = self.amplitudes.clone();
            let mut mass = 0u64;
            for (i, a) in amps.iter_mut().enumerate() {
                if f.eval(&BitVec::from_index(i as u64, self.k)) == outcome {
                    mass += (*a * *a) as u64;
                } else {
                    *a = 0;
                }
            }
            if mass > 0 {
                out.push(Branch {
                    probability: Ratio::new(mass, self.norm_sq),
                    outcome,
                    state: DenseState {
                        k: self.k,
                        amplitudes: amps,
                        norm_sq: mass,
                    }
                    .reduced(),
                });
            }
        }
        Ok(out)
    }

    /// Exact probability that measuring `f` yields `outcome`.
    pub fn probability(&self, f: &AffineFunctional, outcome: bool) -> Result<Ratio<u64>> {
        Ok(self
            .branches(f)?
            .into_iter()
            .find(|b| b.outcome == outcome)
            .map_or(Ratio::from_integer(0), |b| b.probability))
    }
}

/// Equality of normalized states up to one global sign.
pub fn dense_equal_up_to_global_sign(a: &DenseState, b: &DenseState) -> bool {
    if a.k != b.k {
        return false;
    }
    let (na, nb) = (a.norm_sq as i128, b.norm_sq as i128);
    let mut sign: Option<bool> = None;
    for (&x, &y) in a.amplitudes.iter().zip(&b.amplitudes) {
        let (x, y) = (x as i128, y as i128);
        if x * x * nb != y * y * na {
            return false;
        }
        if x != 0 {
            let same = (x > 0) == (y > 0);
            match sign {
                None => sign = Some(same),
                Some(s) if s != same => return false,
                _ => {}
            }
        }
    }
    true
}
