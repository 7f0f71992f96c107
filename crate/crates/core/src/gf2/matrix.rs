use std::fmt;

use rand::Rng;

use super::BitVec;
use crate::error::{check_len, Error, Result};

/// Default bound on rejection-sampling attempts for constrained random matrices.
pub const DEFAULT_MATRIX_RETRIES: usize = 256;

/// Dense row-major matrix over Z₂.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

/// Brings `rows` into reduced row-echelon form, only pivoting on the first
/// `pivot_cols` columns. Returns the pivot columns; rows `0..pivots.len()`
/// hold the pivot rows in order, the rest are zero on `0..pivot_cols`.
pub(crate) fn rref_in_place(rows: &mut [BitVec], pivot_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..pivot_cols {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&i| rows[i].get(col)) else {
            continue;
        };
        rows.swap(next, found);
        let pivot_row = rows[next].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != next && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        next += 1;
    }
    pivots
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix {
            rows: n,
            cols: n,
            data: (0..n).map(|i| BitVec::unit(n, i)).collect(),
        }
    }

    /// Builds a matrix from row vectors of a common length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Result<Self> {
        for r in &rows {
            check_len(cols, r.len(), "matrix row")?;
        }
        Ok(BitMatrix {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[BitVec]) -> Result<Self> {
        let mut m = BitMatrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            check_len(rows, c.len(), "matrix column")?;
            for i in c.ones_iter() {
                m.data[i].set(j, true);
            }
        }
        Ok(m)
    }

    /// Test helper: rows given as `0`/`1` strings.
    pub fn from_bit_rows(rows: &[&str]) -> Self {
        let data: Vec<BitVec> = rows.iter().map(|r| BitVec::from_bit_str(r)).collect();
        let cols = data.first().map_or(0, BitVec::len);
        BitMatrix::from_rows(cols, data).expect("ragged bit rows")
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            data: (0..rows).map(|_| BitVec::random(rng, cols)).collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &BitVec {
        &self.data[i]
    }

    pub fn row_vecs(&self) -> &[BitVec] {
        &self.data
    }

    pub fn into_rows(self) -> Vec<BitVec> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i].get(j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.data[i].set(j, value);
    }

    pub fn column(&self, j: usize) -> BitVec {
        let mut c = BitVec::zeros(self.rows);
        for (i, row) in self.data.iter().enumerate() {
            if row.get(j) {
                c.set(i, true);
            }
        }
        c
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for (i, row) in self.data.iter().enumerate() {
            for j in row.ones_iter() {
                t.data[j].set(i, true);
            }
        }
        t
    }

    /// `self · z` for a column vector `z`.
    pub fn mul_vec(&self, z: &BitVec) -> Result<BitVec> {
        check_len(self.cols, z.len(), "matrix-vector product")?;
        let mut out = BitVec::zeros(self.rows);
        for (i, row) in self.data.iter().enumerate() {
            if row.dot(z) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// `vᵀ · self` for a row vector `v`.
    pub fn vec_mul(&self, v: &BitVec) -> Result<BitVec> {
        check_len(self.rows, v.len(), "vector-matrix product")?;
        let mut out = BitVec::zeros(self.cols);
        for i in v.ones_iter() {
            out.xor_assign(&self.data[i]);
        }
        Ok(out)
    }

    pub fn mat_mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        check_len(self.cols, other.rows, "matrix product")?;
        let data = self
            .data
            .iter()
            .map(|row| other.vec_mul(row).expect("inner dimensions checked"))
            .collect();
        Ok(BitMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// Columns `[start, end)`.
    pub fn column_range(&self, start: usize, end: usize) -> BitMatrix {
        assert!(start <= end && end <= self.cols, "column range out of bounds");
        BitMatrix {
            rows: self.rows,
            cols: end - start,
            data: self.data.iter().map(|r| r.slice(start, end)).collect(),
        }
    }

    /// Rows `[start, end)`.
    pub fn row_range(&self, start: usize, end: usize) -> BitMatrix {
        assert!(start <= end && end <= self.rows, "row range out of bounds");
        BitMatrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start..end].to_vec(),
        }
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        check_len(self.rows, other.rows, "horizontal stack")?;
        Ok(BitMatrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.concat(b)).collect(),
        })
    }

    /// `[self ; other]`.
    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        check_len(self.cols, other.cols, "vertical stack")?;
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(BitMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Block-diagonal `diag(self, other)`.
    pub fn block_diag(&self, other: &BitMatrix) -> BitMatrix {
        let top = self
            .hstack(&BitMatrix::zeros(self.rows, other.cols))
            .expect("row counts agree");
        let bottom = BitMatrix::zeros(other.rows, self.cols)
            .hstack(other)
            .expect("row counts agree");
        top.vstack(&bottom).expect("column counts agree")
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.data.clone();
        rref_in_place(&mut rows, self.cols).len()
    }

    /// Reduced row-echelon form with zero rows dropped, and the pivot columns.
    pub fn rref(&self) -> (BitMatrix, Vec<usize>) {
        let mut rows = self.data.clone();
        let pivots = rref_in_place(&mut rows, self.cols);
        rows.truncate(pivots.len());
        (
            BitMatrix {
                rows: pivots.len(),
                cols: self.cols,
                data: rows,
            },
            pivots,
        )
    }

    /// Finds `z` with `self · z = target`, or `None` when the target is
    /// outside the column span. Free variables are set to zero.
    pub fn solve(&self, target: &BitVec) -> Result<Option<BitVec>> {
        check_len(self.rows, target.len(), "solve target")?;
        let mut aug: Vec<BitVec> = self
            .data
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut bit = BitVec::zeros(1);
                bit.set(0, target.get(i));
                row.concat(&bit)
            })
            .collect();
        let pivots = rref_in_place(&mut aug, self.cols);
        if aug[pivots.len()..].iter().any(|r| r.get(self.cols)) {
            return Ok(None);
        }
        let mut z = BitVec::zeros(self.cols);
        for (i, &p) in pivots.iter().enumerate() {
            if aug[i].get(self.cols) {
                z.set(p, true);
            }
        }
        Ok(Some(z))
    }

    pub fn inverse(&self) -> Option<BitMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug: Vec<BitVec> = self
            .data
            .iter()
            .enumerate()
            .map(|(i, r)| r.concat(&BitVec::unit(n, i)))
            .collect();
        let pivots = rref_in_place(&mut aug, n);
        if pivots.len() < n {
            return None;
        }
        let data = aug.iter().map(|r| r.slice(n, 2 * n)).collect();
        Some(BitMatrix {
            rows: n,
            cols: n,
            data,
        })
    }

    /// Uniform random matrix with full column rank, optionally conditioned
    /// on its bottom `bottom_block` rows having full row rank. See
    /// [`BitMatrix::random_full_rank_with_retries`].
    pub fn random_full_rank<R: Rng + ?Sized>(
        rng: &mut R,
        rows: usize,
        cols: usize,
        bottom_block: Option<usize>,
    ) -> Result<BitMatrix> {
        Self::random_full_rank_with_retries(rng, rows, cols, bottom_block, DEFAULT_MATRIX_RETRIES)
    }

    /// Rejection sampler behind [`BitMatrix::random_full_rank`]. Each attempt
    /// draws a uniform matrix, so accepted outputs are uniform on the
    /// constrained set.
    pub fn random_full_rank_with_retries<R: Rng + ?Sized>(
        rng: &mut R,
        rows: usize,
        cols: usize,
        bottom_block: Option<usize>,
        retries: usize,
    ) -> Result<BitMatrix> {
        if cols > rows {
            return Err(Error::InvalidParams(format!(
                "full column rank impossible with {cols} columns and {rows} rows"
            )));
        }
        if let Some(h) = bottom_block {
            if h > cols || h > rows {
                return Err(Error::InvalidParams(format!(
                    "bottom block of {h} rows cannot have full rank with {cols} columns"
                )));
            }
        }
        for _ in 0..retries {
            let m = BitMatrix::random(rng, rows, cols);
            if m.rank() != cols {
                continue;
            }
            if let Some(h) = bottom_block {
                if m.row_range(rows - h, rows).rank() != h {
                    continue;
                }
            }
            return Ok(m);
        }
        Err(Error::RetriesExhausted {
            attempts: retries,
            what: format!("{rows}x{cols} full-rank matrix"),
        })
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in &self.data {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

/// Coordinates `c` of `v` with respect to linearly independent rows:
/// `Σ c_j · row_j = v`. `None` when `v` is outside the row span.
pub fn coordinates(basis_rows: &BitMatrix, v: &BitVec) -> Result<Option<BitVec>> {
    check_len(basis_rows.cols(), v.len(), "coordinates")?;
    basis_rows.transpose().solve(v)
}
