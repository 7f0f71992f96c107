use std::fmt;

use rand::Rng;

use crate::error::{check_len, Error, Result};

const WORD_BITS: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A fixed-length vector over Z₂, packed into 64-bit words.
///
/// Bit `i` lives in word `i / 64` at position `i % 64`. Pad bits past `len`
/// are always zero, so derived equality, ordering and hashing are exact.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVec {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        v.clear_padding();
        v
    }

    /// The `i`-th standard basis vector.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters (bit 0 first). Whitespace and
    /// underscores are ignored, which keeps test vectors readable.
    pub fn from_bit_str(s: &str) -> Self {
        let bits: Vec<bool> = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != ',')
            .map(|c| match c {
                '0' => false,
                '1' => true,
                other => panic!("invalid bit character {other:?}"),
            })
            .collect();
        Self::from_bools(&bits)
    }

    /// Builds a vector whose bit `i` is bit `i` of `index` (least significant first).
    pub fn from_index(index: u64, len: usize) -> Self {
        assert!(len <= 64, "from_index supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = if len == 64 { index } else { index & ((1u64 << len) - 1) };
        }
        v
    }

    /// Inverse of [`BitVec::from_index`].
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= 64, "to_index supports at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        let mut v = BitVec {
            len,
            words: (0..words_for(len)).map(|_| rng.gen::<u64>()).collect(),
        };
        v.clear_padding();
        v
    }

    fn clear_padding(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming_distance(&self, other: &BitVec) -> usize {
        assert_eq!(self.len, other.len, "hamming distance of unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// In-place addition over Z₂.
    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn try_xor(&self, other: &BitVec) -> Result<BitVec> {
        check_len(self.len, other.len, "vector addition")?;
        Ok(self.xor(other))
    }

    /// Inner product ⟨self, other⟩ mod 2.
    #[inline]
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot product of unequal lengths");
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }

    /// Index of the lowest set bit, if any.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD_BITS + w.trailing_zeros() as usize)
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + t)
                }
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Bits `[start, end)` as a new vector.
    pub fn slice(&self, start: usize, end: usize) -> BitVec {
        assert!(start <= end && end <= self.len, "slice {start}..{end} out of range");
        let mut out = BitVec::zeros(end - start);
        for i in start..end {
            if self.get(i) {
                out.set(i - start, true);
            }
        }
        out
    }

    /// `self ‖ other`.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.len + other.len);
        for i in self.ones_iter() {
            out.set(i, true);
        }
        for i in other.ones_iter() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Lowercase hex, most significant bit of byte 0 holding bit 0.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.len.div_ceil(8)];
        for i in self.ones_iter() {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
        hex::encode(bytes)
    }

    /// Parses [`BitVec::to_hex`] output; unused trailing bits must be zero.
    pub fn from_hex(s: &str, len: usize) -> Result<BitVec> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::InvalidHex {
            len,
            reason: e.to_string(),
        })?;
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::InvalidHex {
                len,
                reason: format!("expected {} bytes, got {}", len.div_ceil(8), bytes.len()),
            });
        }
        let mut out = BitVec::zeros(len);
        for (bi, byte) in bytes.iter().enumerate() {
            for j in 0..8 {
                if byte & (0x80 >> j) != 0 {
                    let idx = bi * 8 + j;
                    if idx >= len {
                        return Err(Error::InvalidHex {
                            len,
                            reason: "nonzero padding bits".into(),
                        });
                    }
                    out.set(idx, true);
                }
            }
        }
        Ok(out)
    }

    /// Bits as a `0`/`1` string, bit 0 first.
    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({})", self.to_bit_string())
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}
