use rand::Rng;

use super::matrix::rref_in_place;
use super::{BitMatrix, BitVec};
use crate::error::{check_len, Result};

/// A linear subspace of Z₂^ambient, stored by its reduced row-echelon basis.
///
/// The RREF basis is unique per subspace, so derived equality is set equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: BitMatrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: BitMatrix::zeros(0, ambient),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: BitMatrix::identity(ambient),
            pivots: (0..ambient).collect(),
        }
    }

    /// Span of arbitrary (possibly dependent) generators.
    pub fn from_generators(ambient: usize, generators: &[BitVec]) -> Result<Self> {
        for g in generators {
            check_len(ambient, g.len(), "subspace generator")?;
        }
        let mut rows = generators.to_vec();
        let pivots = rref_in_place(&mut rows, ambient);
        rows.truncate(pivots.len());
        Ok(Subspace {
            ambient,
            basis: BitMatrix::from_rows(ambient, rows)?,
            pivots,
        })
    }

    pub fn row_span(m: &BitMatrix) -> Self {
        Self::from_generators(m.cols(), m.row_vecs()).expect("rows share a length")
    }

    pub fn column_span(m: &BitMatrix) -> Self {
        Self::row_span(&m.transpose())
    }

    #[inline]
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Canonical basis, one vector per row.
    pub fn basis(&self) -> &BitMatrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Canonical representative of `v + self`: the unique coset element whose
    /// pivot coordinates are all zero.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.ambient, "reduce: ambient mismatch");
        let mut out = v.clone();
        for (row, &p) in self.basis.row_vecs().iter().zip(&self.pivots) {
            if out.get(p) {
                out.xor_assign(row);
            }
        }
        out
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        v.len() == self.ambient && self.reduce(v).is_zero()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.ambient == self.ambient && other.basis.row_vecs().iter().all(|b| self.contains(b))
    }

    /// Coordinates of `v` in the canonical basis, if `v` is in the subspace.
    pub fn coordinates(&self, v: &BitVec) -> Option<BitVec> {
        if !self.contains(v) {
            return None;
        }
        // In RREF, the coefficient of basis row i is the bit of v at pivot i.
        Some(BitVec::from_bools(
            &self.pivots.iter().map(|&p| v.get(p)).collect::<Vec<_>>(),
        ))
    }

    /// Element with the given coordinates in the canonical basis.
    pub fn combination(&self, coords: &BitVec) -> BitVec {
        assert_eq!(coords.len(), self.dim(), "combination: wrong coordinate count");
        let mut out = BitVec::zeros(self.ambient);
        for i in coords.ones_iter() {
            out.xor_assign(self.basis.row(i));
        }
        out
    }

    /// All `2^dim` elements, in coordinate order.
    pub fn elements(&self) -> impl Iterator<Item = BitVec> + '_ {
        assert!(self.dim() < 63, "subspace too large to enumerate");
        (0..1u64 << self.dim()).map(move |i| self.combination(&BitVec::from_index(i, self.dim())))
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVec {
        self.combination(&BitVec::random(rng, self.dim()))
    }

    /// `{v : ⟨v, u⟩ = 0 for all u in self}`.
    pub fn dual(&self) -> Subspace {
        let mut is_pivot = vec![false; self.ambient];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let generators: Vec<BitVec> = (0..self.ambient)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitVec::unit(self.ambient, f);
                for (row, &p) in self.basis.row_vecs().iter().zip(&self.pivots) {
                    if row.get(f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect();
        Subspace::from_generators(self.ambient, &generators).expect("generated in ambient space")
    }

    /// Smallest subspace containing both.
    pub fn joint_span(&self, other: &Subspace) -> Result<Subspace> {
        check_len(self.ambient, other.ambient, "joint span")?;
        let mut gens = self.basis.row_vecs().to_vec();
        gens.extend(other.basis.row_vecs().iter().cloned());
        Subspace::from_generators(self.ambient, &gens)
    }

    pub fn with_vector(&self, v: &BitVec) -> Result<Subspace> {
        check_len(self.ambient, v.len(), "subspace extension")?;
        let mut gens = self.basis.row_vecs().to_vec();
        gens.push(v.clone());
        Subspace::from_generators(self.ambient, &gens)
    }

    /// Intersection, computed as `dual(dual(a) + dual(b))`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        Ok(self.dual().joint_span(&other.dual())?.dual())
    }
}

/// An affine subspace `offset + subspace`, with the offset stored as the
/// canonical representative so that equal sets compare equal.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Coset {
    subspace: Subspace,
    offset: BitVec,
}

impl Coset {
    pub fn new(subspace: Subspace, offset: &BitVec) -> Result<Self> {
        check_len(subspace.ambient(), offset.len(), "coset offset")?;
        let offset = subspace.reduce(offset);
        Ok(Coset { subspace, offset })
    }

    /// `ColSpan(a) + b`.
    pub fn from_affine_map(a: &BitMatrix, b: &BitVec) -> Result<Self> {
        Coset::new(Subspace::column_span(a), b)
    }

    pub fn point(v: &BitVec) -> Self {
        Coset {
            subspace: Subspace::zero(v.len()),
            offset: v.clone(),
        }
    }

    #[inline]
    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    #[inline]
    pub fn offset(&self) -> &BitVec {
        &self.offset
    }

    #[inline]
    pub fn ambient(&self) -> usize {
        self.subspace.ambient()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        v.len() == self.ambient() && self.subspace.reduce(v) == self.offset
    }

    pub fn elements(&self) -> impl Iterator<Item = BitVec> + '_ {
        self.subspace.elements().map(move |s| s.xor(&self.offset))
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVec {
        self.subspace.random_element(rng).xor(&self.offset)
    }
}
