//! Random binary linear codes with brute-force distance certification.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gf2::{BitMatrix, BitVec};

pub const DEFAULT_CODE_RETRIES: usize = 1000;
pub const MAX_MSG_LEN: usize = 20;

/// A `[ℓ, λ′]` code with generator rows of length `ℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    generator: BitMatrix,
    min_distance: usize,
}

/// Minimum weight of `m·G` over nonzero messages `m`. A generator with no
/// rows has no nonzero codewords; this returns `ℓ + 1` for it.
pub fn min_distance_bruteforce(generator: &BitMatrix) -> Result<usize> {
    let (rows, len) = (generator.rows(), generator.cols());
    if rows > MAX_MSG_LEN {
        return Err(Error::InvalidParams(format!("message length {rows} exceeds {MAX_MSG_LEN}")));
    }
    // Gray-code walk: each step flips one message bit.
    let mut word = BitVec::zeros(len);
    let mut best = len + 1;
    for i in 1u64..(1 << rows) {
        word.xor_assign(generator.row(i.trailing_zeros() as usize));
        best = best.min(word.weight());
    }
    Ok(best)
}

impl LinearCode {
    /// Wraps a generator, certifying full row rank and distance `> ⌊ℓ/3⌋`.
    pub fn from_generator(generator: BitMatrix) -> Result<Self> {
        if generator.rank() != generator.rows() {
            return Err(Error::InvalidParams("generator is not full row rank".into()));
        }
        let min_distance = min_distance_bruteforce(&generator)?;
        if min_distance <= generator.cols() / 3 {
            return Err(Error::InvalidParams(format!(
                "minimum distance {min_distance} does not exceed {}",
                generator.cols() / 3
            )));
        }
        Ok(LinearCode { generator, min_distance })
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R, msg_len: usize, code_len: usize) -> Result<Self> {
        Self::sample_with_retries(rng, msg_len, code_len, DEFAULT_CODE_RETRIES).map(|(c, _)| c)
    }

    /// Resamples uniform generators until one certifies. Also returns the
    /// number of draws used.
    pub fn sample_with_retries<R: Rng + ?Sized>(
        rng: &mut R,
        msg_len: usize,
        code_len: usize,
        retries: usize,
    ) -> Result<(Self, usize)> {
        if msg_len == 0 || msg_len > code_len || msg_len > MAX_MSG_LEN {
            return Err(Error::InvalidParams(format!(
                "need 1 <= msg_len <= min(code_len, {MAX_MSG_LEN}) (msg_len = {msg_len}, code_len = {code_len})"
            )));
        }
        for attempt in 1..=retries {
            let g = BitMatrix::random(rng, msg_len, code_len);
            if let Ok(code) = Self::from_generator(g) {
                return Ok((code, attempt));
            }
        }
        Err(Error::RetriesExhausted {
            attempts: retries,
            what: format!("[{code_len}, {msg_len}] code with distance > {}", code_len / 3),
        })
    }

    pub fn msg_len(&self) -> usize {
        self.generator.rows()
    }

    pub fn code_len(&self) -> usize {
        self.generator.cols()
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn min_distance(&self) -> usize {
        self.min_distance
    }

    /// `⌊ℓ/6⌋`.
    pub fn radius(&self) -> usize {
        self.code_len() / 6
    }

    /// `m′ᵀ·G`.
    pub fn encode(&self, message: &BitVec) -> Result<BitVec> {
        check_len(self.msg_len(), message.len(), "message")?;
        self.generator.vec_mul(message)
    }

    pub fn within_radius(&self, word: &BitVec, codeword: &BitVec) -> bool {
        word.len() == self.code_len()
            && codeword.len() == self.code_len()
            && word.hamming_distance(codeword) <= self.radius()
    }

    /// Exhaustive over all `2^ℓ` words: no word lies within the decoding
    /// radius of two distinct codewords.
    pub fn decoding_balls_disjoint(&self) -> bool {
        let codewords: Vec<BitVec> = (0..1u64 << self.msg_len())
            .map(|m| self.generator.vec_mul(&BitVec::from_index(m, self.msg_len())).expect("message width matches"))
            .collect();
        (0..1u64 << self.code_len()).all(|w| {
            let word = BitVec::from_index(w, self.code_len());
            codewords.iter().filter(|c| self.within_radius(&word, c)).count() <= 1
        })
    }

    pub fn to_json(&self) -> CodeJson {
        CodeJson {
            msg_len: self.msg_len(),
            code_len: self.code_len(),
            generator_rows: self.generator.row_vecs().iter().map(BitVec::to_hex).collect(),
            min_distance: self.min_distance,
        }
    }

    pub fn from_json(json: &CodeJson) -> Result<Self> {
        let rows = json
            .generator_rows
            .iter()
            .map(|h| BitVec::from_hex(h, json.code_len))
            .collect::<Result<Vec<_>>>()?;
        check_len(json.msg_len, rows.len(), "generator rows")?;
        let code = Self::from_generator(BitMatrix::from_rows(json.code_len, rows)?)?;
        if code.min_distance != json.min_distance {
            return Err(Error::Invariant(format!(
                "recorded distance {} but generator has {}",
                json.min_distance, code.min_distance
            )));
        }
        Ok(code)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeJson {
    pub msg_len: usize,
    pub code_len: usize,
    pub generator_rows: Vec<String>,
    pub min_distance: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lazy_random::{DeterministicRng, Seed};
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};

    fn rng(tag: &str) -> DeterministicRng {
        DeterministicRng::new(&Seed::from_u64(21), tag)
    }

    #[test]
    fn distance_examples() {
        assert_eq!(min_distance_bruteforce(&BitMatrix::from_bit_rows(&["111"])).unwrap(), 3);
        let g = BitMatrix::from_bit_rows(&["111000", "000111"]);
        assert_eq!(min_distance_bruteforce(&g).unwrap(), 3);
        assert_eq!(min_distance_bruteforce(&BitMatrix::identity(5)).unwrap(), 1);
    }

    #[test]
    fn two_block_code_certifies_at_length_six() {
        let code = LinearCode::from_generator(BitMatrix::from_bit_rows(&["111000", "000111"])).unwrap();
        assert_eq!(code.min_distance(), 3);
        assert_eq!(code.radius(), 1);
    }

    #[test]
    fn single_message_bit_code() {
        let code = LinearCode::sample(&mut rng("one"), 1, 6).unwrap();
        assert!(code.generator().row(0).weight() >= 3);
    }

    #[test]
    fn impossible_code_exhausts_retries() {
        let err = LinearCode::sample(&mut rng("five"), 5, 6).unwrap_err();
        assert!(matches!(err, Error::RetriesExhausted { attempts: 1000, .. }));
    }

    #[test]
    fn encoding_basics() {
        let code = LinearCode::sample(&mut rng("enc"), 3, 12).unwrap();
        assert!(code.encode(&BitVec::zeros(3)).unwrap().is_zero());
        for j in 0..3 {
            assert_eq!(&code.encode(&BitVec::unit(3, j)).unwrap(), code.generator().row(j));
        }
        assert!(code.encode(&BitVec::zeros(4)).is_err());
    }

    #[test]
    fn radius_at_twelve() {
        let code = LinearCode::sample(&mut rng("rad"), 3, 12).unwrap();
        let c = code.encode(&BitVec::from_bit_str("101")).unwrap();
        let mut w = c.clone();
        assert!(code.within_radius(&w, &c));
        w.flip(0);
        w.flip(5);
        assert!(code.within_radius(&w, &c));
        w.flip(11);
        assert!(!code.within_radius(&w, &c));
    }

    #[test]
    fn unique_decoding_is_exhaustive_at_twelve() {
        let code = LinearCode::sample(&mut rng("uniq"), 3, 12).unwrap();
        let codewords: Vec<BitVec> = (0..8).map(|m| code.encode(&BitVec::from_index(m, 3)).unwrap()).collect();
        for w in 0..1u64 << 12 {
            let word = BitVec::from_index(w, 12);
            let near = codewords.iter().filter(|c| code.within_radius(&word, c)).count();
            assert!(near <= 1);
        }
    }

    #[test]
    fn resampling_is_quick_at_low_rate() {
        let mut r = rng("retries");
        let draws: Vec<f64> = (0..100)
            .map(|_| LinearCode::sample_with_retries(&mut r, 3, 12, DEFAULT_CODE_RETRIES).unwrap().1 as f64)
            .collect();
        assert!(crate::stats::mean(&draws) < 10.0);
    }

    #[test]
    fn json_round_trip_and_tamper_check() {
        let code = LinearCode::sample(&mut rng("json"), 3, 12).unwrap();
        let mut json = code.to_json();
        assert_eq!(LinearCode::from_json(&json).unwrap(), code);
        json.min_distance += 1;
        assert!(LinearCode::from_json(&json).is_err());
    }

    proptest! {
        #[test]
        fn encoding_is_linear(seed in any::<u64>(), a in 0u64..8, b in 0u64..8) {
            let code = LinearCode::sample(&mut DeterministicRng::new(&Seed::from_u64(seed), "lin"), 3, 12).unwrap();
            let (a, b) = (BitVec::from_index(a, 3), BitVec::from_index(b, 3));
            prop_assert_eq!(
                code.encode(&a).unwrap().xor(&code.encode(&b).unwrap()),
                code.encode(&a.xor(&b)).unwrap()
            );
        }

        #[test]
        fn certified_distance_exceeds_a_third(seed in any::<u64>(), msg in 1usize..4) {
            let code = LinearCode::sample(&mut DeterministicRng::new(&Seed::from_u64(seed), "dist"), msg, 14).unwrap();
            prop_assert!(3 * code.min_distance() > code.code_len());
        }
    }
}
