//! The classical oracles `P`, `P⁻¹`, `D` over a random permutation and a
//! random coset sampler, plus the bloated dual `D′`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gf2::{coordinates, BitMatrix, BitVec, Coset, DEFAULT_MATRIX_RETRIES};
use crate::lazy_random::{LazyFunction, LazyPermutation, Seed};

fn default_rounds() -> usize {
    3
}

fn default_msg_len() -> usize {
    3
}

/// Scheme parameters.
///
/// `ell_code` is the length of the signed block (the last `ell_code`
/// coordinates of Z₂^k); `msg_len` is the pre-encoding message length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub lambda: usize,
    pub s: usize,
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub ell_code: usize,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub bloat_s: Option<usize>,
    #[serde(default = "default_msg_len")]
    pub msg_len: usize,
}

impl Params {
    /// Desk-scale defaults: n = 20, r = 6, k = 16, a 12-bit signed block
    /// carrying 3-bit messages.
    pub fn toy() -> Params {
        Params {
            lambda: 12,
            s: 0,
            r: 6,
            n: 20,
            k: 16,
            ell_code: 12,
            rounds: 3,
            bloat_s: None,
            msg_len: 3,
        }
    }

    /// The asymptotic parameter family: s = 16λ, r = s(λ − 1), n = r + 3s/2.
    ///
    /// `k` is set to `n − r + λ` rather than `2λ`: A(y) must have full
    /// column rank `n − r = 24λ`, which needs at least that many rows.
    pub fn asymptotic(lambda: usize) -> Result<Params> {
        if lambda < 1 {
            return Err(Error::InvalidParams("lambda must be positive".into()));
        }
        let s = 16 * lambda;
        let r = s * (lambda - 1);
        let n = r + 3 * s / 2;
        let p = Params {
            lambda,
            s,
            r,
            n,
            k: n - r + lambda,
            ell_code: lambda,
            rounds: 3,
            bloat_s: None,
            msg_len: (lambda / 4).max(1),
        };
        p.validate()?;
        Ok(p)
    }

    /// Dimension of each fiber coset, `n − r`.
    pub fn fiber_dim(&self) -> usize {
        self.n - self.r
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidParams(m));
        if self.r >= self.n {
            return fail(format!("need r < n (r = {}, n = {})", self.r, self.n));
        }
        if self.n - self.r < self.ell_code {
            return fail(format!("need n - r >= ell_code ({} < {})", self.n - self.r, self.ell_code));
        }
        if self.k < self.n - self.r {
            return fail(format!("need k >= n - r for a full-rank A(y) (k = {}, n - r = {})", self.k, self.n - self.r));
        }
        if self.ell_code > self.k {
            return fail("need ell_code <= k".into());
        }
        if let Some(bs) = self.bloat_s {
            if bs + self.ell_code > self.n - self.r {
                return fail(format!("need bloat_s <= n - r - ell_code (bloat_s = {bs})"));
            }
        }
        if self.msg_len > self.ell_code {
            return fail("need msg_len <= ell_code".into());
        }
        Ok(())
    }
}

/// Everything needed to rebuild a suite: master seed plus parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: Seed,
    #[serde(flatten)]
    pub params: Params,
}

/// Output of `P`: the hash value `y` and the coset vector `u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointOutput {
    pub y: BitVec,
    pub u: BitVec,
}

/// Input/output widths of a `(P, P⁻¹)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleDims {
    pub n: usize,
    pub r: usize,
    pub k: usize,
}

/// Classical access to a `(P, P⁻¹)` pair. Implemented by the genuine suite
/// and by the reductions' simulated suites so one invariant battery covers
/// both.
pub trait DualFreeOracle {
    fn dims(&self) -> OracleDims;
    fn p_forward(&mut self, x: &BitVec) -> Result<PointOutput>;
    fn p_inverse(&mut self, y: &BitVec, u: &BitVec) -> Result<Option<BitVec>>;
}

/// A `(P, P⁻¹)` pair together with a coordinate-revealing dual oracle.
pub trait DualOracle: DualFreeOracle {
    /// Length of the coordinate vectors returned by [`DualOracle::dual_query`].
    fn ell_code(&self) -> usize;

    fn dual_query(&mut self, y: &BitVec, v: &BitVec) -> Result<Option<BitVec>>;

    /// The matrix the dual answers against, `A(y)` or `A⁽¹⁾(y)`. White-box
    /// access for the test battery only.
    fn dual_matrix(&mut self, y: &BitVec) -> Result<BitMatrix>;
}

#[derive(Clone, Debug)]
struct CosetData {
    a: BitMatrix,
    b: BitVec,
}

/// A seeded, deterministic instance of `(Π, F, P, P⁻¹, D, D′)`.
#[derive(Clone, Debug)]
pub struct OracleSuite {
    params: Params,
    seed: Seed,
    pi: LazyPermutation,
    coset_fn: LazyFunction<CosetData>,
}

fn sample_coset(params: &Params, rng: &mut impl rand::Rng) -> Result<CosetData> {
    let (k, cols, ell) = (params.k, params.fiber_dim(), params.ell_code);
    for _ in 0..DEFAULT_MATRIX_RETRIES {
        let a = BitMatrix::random(rng, k, cols);
        if a.rank() != cols || a.row_range(k - ell, k).rank() != ell {
            continue;
        }
        if let Some(bs) = params.bloat_s {
            if a.column_range(bs, cols).row_range(k - ell, k).rank() != ell {
                continue;
            }
        }
        let b = BitVec::random(rng, k);
        return Ok(CosetData { a, b });
    }
    Err(Error::RetriesExhausted {
        attempts: DEFAULT_MATRIX_RETRIES,
        what: "coset matrix A(y)".into(),
    })
}

/// Coordinates of `vᵀ·m` with respect to the bottom `ell` rows of `m`.
pub(crate) fn bottom_block_coordinates(m: &BitMatrix, v: &BitVec, ell: usize) -> Result<Option<BitVec>> {
    check_len(m.rows(), v.len(), "dual query vector")?;
    let w = m.vec_mul(v)?;
    let bottom = m.row_range(m.rows() - ell, m.rows());
    coordinates(&bottom, &w)
}

impl OracleSuite {
    pub fn new(params: Params, seed: Seed) -> Result<Self> {
        params.validate()?;
        Ok(OracleSuite {
            pi: LazyPermutation::new(&seed, "PI", params.n),
            coset_fn: LazyFunction::new(&seed, "F"),
            params,
            seed,
        })
    }

    pub fn from_config(cfg: &SuiteConfig) -> Result<Self> {
        Self::new(cfg.params.clone(), cfg.seed)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    fn coset_data(&mut self, y: &BitVec) -> Result<&CosetData> {
        check_len(self.params.r, y.len(), "hash value y")?;
        let params = &self.params;
        self.coset_fn.query(y, |rng| sample_coset(params, rng))
    }

    /// `(A(y), b(y))`.
    pub fn coset_description(&mut self, y: &BitVec) -> Result<(BitMatrix, BitVec)> {
        let d = self.coset_data(y)?;
        Ok((d.a.clone(), d.b.clone()))
    }

    /// The fiber coset `ColSpan(A(y)) + b(y)`.
    pub fn fiber(&mut self, y: &BitVec) -> Result<Coset> {
        let d = self.coset_data(y)?;
        Coset::from_affine_map(&d.a, &d.b)
    }

    /// `H(x)`: the first `r` bits of `Π(x)`.
    pub fn h(&mut self, x: &BitVec) -> Result<BitVec> {
        Ok(self.pi.forward(x)?.slice(0, self.params.r))
    }

    pub fn p_forward(&mut self, x: &BitVec) -> Result<PointOutput> {
        check_len(self.params.n, x.len(), "P input")?;
        let image = self.pi.forward(x)?;
        let (r, n) = (self.params.r, self.params.n);
        let y = image.slice(0, r);
        let j = image.slice(r, n);
        let d = self.coset_data(&y)?;
        let mut u = d.a.mul_vec(&j)?;
        u.xor_assign(&d.b);
        Ok(PointOutput { y, u })
    }

    pub fn p_inverse(&mut self, y: &BitVec, u: &BitVec) -> Result<Option<BitVec>> {
        check_len(self.params.k, u.len(), "P inverse vector")?;
        let d = self.coset_data(y)?;
        let Some(z) = d.a.solve(&u.xor(&d.b))? else {
            return Ok(None);
        };
        Ok(Some(self.pi.inverse(&y.concat(&z))?))
    }

    /// `D(y, v)`: coordinates of `vᵀA(y)` in the bottom `ell_code` rows of
    /// `A(y)`, or `None` outside their row span.
    pub fn d_oracle(&mut self, y: &BitVec, v: &BitVec) -> Result<Option<BitVec>> {
        let ell = self.params.ell_code;
        let d = self.coset_data(y)?;
        bottom_block_coordinates(&d.a, v, ell)
    }

    /// `A⁽¹⁾(y)`: the rightmost `n − r − bloat_s` columns of `A(y)`.
    pub fn bloated_matrix(&mut self, y: &BitVec) -> Result<BitMatrix> {
        let bs = self
            .params
            .bloat_s
            .ok_or_else(|| Error::Precondition("bloat_s is not configured".into()))?;
        let cols = self.params.fiber_dim();
        Ok(self.coset_data(y)?.a.column_range(bs, cols))
    }

    /// `D′(y, v)`: as [`OracleSuite::d_oracle`] but against `A⁽¹⁾(y)`.
    pub fn d_bloated(&mut self, y: &BitVec, v: &BitVec) -> Result<Option<BitVec>> {
        let a1 = self.bloated_matrix(y)?;
        bottom_block_coordinates(&a1, v, self.params.ell_code)
    }

    /// A view whose dual oracle is `D′` instead of `D`.
    pub fn bloated_view(&mut self) -> Result<BloatedView<'_>> {
        if self.params.bloat_s.is_none() {
            return Err(Error::Precondition("bloat_s is not configured".into()));
        }
        Ok(BloatedView { suite: self })
    }
}

impl DualFreeOracle for OracleSuite {
    fn dims(&self) -> OracleDims {
        OracleDims {
            n: self.params.n,
            r: self.params.r,
            k: self.params.k,
        }
    }

    fn p_forward(&mut self, x: &BitVec) -> Result<PointOutput> {
        OracleSuite::p_forward(self, x)
    }

    fn p_inverse(&mut self, y: &BitVec, u: &BitVec) -> Result<Option<BitVec>> {
        OracleSuite::p_inverse(self, y, u)
    }
}

impl DualOracle for OracleSuite {
    fn ell_code(&self) -> usize {
        self.params.ell_code
    }

    fn dual_query(&mut self, y: &BitVec, v: &BitVec) -> Result<Option<BitVec>> {
        self.d_oracle(y, v)
    }

    fn dual_matrix(&mut self, y: &BitVec) -> Result<BitMatrix> {
        Ok(self.coset_description(y)?.0)
    }
}

/// `(P, P⁻¹, D′)` over a suite with `bloat_s` configured.
pub struct BloatedView<'a> {
    suite: &'a mut OracleSuite,
}

impl DualFreeOracle for BloatedView<'_> {
    fn dims(&self) -> OracleDims {
        self.suite.dims()
    }

    fn p_forward(&mut self, x: &BitVec) -> Result<PointOutput> {
        self.suite.p_forward(x)
    }

    fn p_inverse(&mut self, y: &BitVec, u: &BitVec) -> Result<Option<BitVec>> {
        self.suite.p_inverse(y, u)
    }
}

impl DualOracle for BloatedView<'_> {
    fn ell_code(&self) -> usize {
        self.suite.params.ell_code
    }

    fn dual_query(&mut self, y: &BitVec, v: &BitVec) -> Result<Option<BitVec>> {
        self.suite.d_bloated(y, v)
    }

    fn dual_matrix(&mut self, y: &BitVec) -> Result<BitMatrix> {
        self.suite.bloated_matrix(y)
    }
}

/// Runs a scripted transcript against a suite. One query per line:
/// `P <x>`, `Pinv <y> <u>` or `D <y> <v>` (hex). Each answer is one line:
/// `<y> <u>` for `P`, and a hex value or `BOT` for the others. Blank lines
/// and `#` comments are skipped.
pub fn run_transcript(suite: &mut OracleSuite, script: &str) -> Result<Vec<String>> {
    let (n, r, k) = (suite.params.n, suite.params.r, suite.params.k);
    let mut out = Vec::new();
    for (lineno, line) in script.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Precondition(format!("line {}: malformed query {line:?}", lineno + 1));
        let answer = match parts.as_slice() {
            ["P", x] => {
                let o = suite.p_forward(&BitVec::from_hex(x, n)?)?;
                format!("{} {}", o.y.to_hex(), o.u.to_hex())
            }
            ["Pinv", y, u] => suite
                .p_inverse(&BitVec::from_hex(y, r)?, &BitVec::from_hex(u, k)?)?
                .map_or_else(|| "BOT".to_string(), |x| x.to_hex()),
            ["D", y, v] => suite
                .d_oracle(&BitVec::from_hex(y, r)?, &BitVec::from_hex(v, k)?)?
                .map_or_else(|| "BOT".to_string(), |c| c.to_hex()),
            _ => return Err(bad()),
        };
        out.push(answer);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::Subspace;
    use std::collections::HashSet;

    fn small_params() -> Params {
        Params {
            lambda: 3,
            s: 0,
            r: 4,
            n: 10,
            k: 9,
            ell_code: 3,
            rounds: 3,
            bloat_s: Some(2),
            msg_len: 1,
        }
    }

    #[test]
    fn params_validation() {
        assert!(Params::toy().validate().is_ok());
        let mut p = Params::toy();
        p.k = 10;
        assert!(p.validate().is_err());
        let mut p = Params::toy();
        p.bloat_s = Some(3);
        assert!(p.validate().is_err());
        p.bloat_s = Some(2);
        assert!(p.validate().is_ok());
        let p = Params::asymptotic(2).unwrap();
        assert_eq!((p.s, p.r, p.n, p.k), (32, 32, 80, 50));
    }

    #[test]
    fn config_json_shape() {
        let cfg = SuiteConfig {
            seed: Seed::from_u64(1),
            params: Params::toy(),
        };
        let json = serde_json::to_value(&cfg).unwrap();
        for key in ["seed", "lambda", "s", "r", "n", "k", "ell_code", "rounds", "bloat_s"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        let back: SuiteConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn exhaustive_injectivity_and_inverse_at_n10() {
        let mut suite = OracleSuite::new(small_params(), Seed::from_u64(2)).unwrap();
        let mut outputs = HashSet::new();
        for i in 0..1u64 << 10 {
            let x = BitVec::from_index(i, 10);
            let o = suite.p_forward(&x).unwrap();
            assert_eq!(suite.p_inverse(&o.y, &o.u).unwrap(), Some(x));
            outputs.insert(o);
        }
        assert_eq!(outputs.len(), 1 << 10);
    }

    #[test]
    fn same_hash_outputs_differ_by_column_span() {
        let mut suite = OracleSuite::new(small_params(), Seed::from_u64(4)).unwrap();
        let x0 = BitVec::from_index(17, 10);
        let o0 = suite.p_forward(&x0).unwrap();
        let (a, b) = suite.coset_description(&o0.y).unwrap();
        let col = Subspace::column_span(&a);
        let u1 = o0.u.xor(&a.column(0));
        let x1 = suite.p_inverse(&o0.y, &u1).unwrap().unwrap();
        let o1 = suite.p_forward(&x1).unwrap();
        assert_eq!(o1.y, o0.y);
        assert!(col.contains(&o0.u.xor(&o1.u)));
        assert!(Coset::from_affine_map(&a, &b).unwrap().contains(&o1.u));
    }

    #[test]
    fn p_inverse_rejects_off_coset_vectors() {
        let mut suite = OracleSuite::new(small_params(), Seed::from_u64(5)).unwrap();
        let y = BitVec::from_index(3, 4);
        let fiber = suite.fiber(&y).unwrap();
        let outside = (0..1u64 << 9)
            .map(|i| BitVec::from_index(i, 9))
            .find(|u| !fiber.contains(u))
            .unwrap();
        assert_eq!(suite.p_inverse(&y, &outside).unwrap(), None);
        assert!(suite.p_inverse(&y, &BitVec::zeros(8)).is_err());
    }

    #[test]
    fn dual_examples() {
        let mut suite = OracleSuite::new(small_params(), Seed::from_u64(6)).unwrap();
        let y = BitVec::from_index(9, 4);
        assert_eq!(suite.d_oracle(&y, &BitVec::zeros(9)).unwrap(), Some(BitVec::zeros(3)));
        let (a, _) = suite.coset_description(&y).unwrap();
        for v in Subspace::column_span(&a).dual().elements() {
            assert_eq!(suite.d_oracle(&y, &v).unwrap(), Some(BitVec::zeros(3)));
        }
        let bottom = a.row_range(6, 9);
        let mut accepted = 0;
        for i in 0..1u64 << 9 {
            let v = BitVec::from_index(i, 9);
            if let Some(c) = suite.d_oracle(&y, &v).unwrap() {
                accepted += 1;
                assert_eq!(bottom.vec_mul(&c).unwrap(), a.vec_mul(&v).unwrap());
            }
        }
        assert!(accepted > 0);
    }

    #[test]
    fn bloat_zero_matches_plain_dual() {
        let mut p = small_params();
        p.bloat_s = Some(0);
        let mut suite = OracleSuite::new(p, Seed::from_u64(8)).unwrap();
        let y = BitVec::from_index(1, 4);
        for i in 0..1u64 << 9 {
            let v = BitVec::from_index(i, 9);
            assert_eq!(suite.d_oracle(&y, &v).unwrap(), suite.d_bloated(&y, &v).unwrap());
        }
    }

    #[test]
    fn bloated_dual_accepts_a_superset() {
        let mut suite = OracleSuite::new(small_params(), Seed::from_u64(10)).unwrap();
        let a1_cols = 6 - 2;
        for yi in 0..4u64 {
            let y = BitVec::from_index(yi, 4);
            let a1 = suite.bloated_matrix(&y).unwrap();
            assert_eq!(a1.cols(), a1_cols);
            for v in Subspace::column_span(&a1).dual().elements() {
                assert_eq!(suite.d_bloated(&y, &v).unwrap(), Some(BitVec::zeros(3)));
            }
            for i in 0..1u64 << 9 {
                let v = BitVec::from_index(i, 9);
                if suite.d_oracle(&y, &v).unwrap().is_some() {
                    assert!(suite.d_bloated(&y, &v).unwrap().is_some());
                }
            }
        }
        let mut plain = OracleSuite::new(Params::toy(), Seed::from_u64(1)).unwrap();
        assert!(plain.d_bloated(&BitVec::zeros(6), &BitVec::zeros(16)).is_err());
    }

    #[test]
    fn transcripts_are_deterministic() {
        let script = "P 0000\nP 0040\n# comment\nPinv 00 0000\nD 30 ff00\n";
        let mut p = small_params();
        p.bloat_s = None;
        let run = || {
            let mut suite = OracleSuite::new(p.clone(), Seed::from_u64(77)).unwrap();
            run_transcript(&mut suite, script).unwrap()
        };
        let a = run();
        assert_eq!(a.len(), 4);
        assert_eq!(a, run());
        let mut suite = OracleSuite::new(p, Seed::from_u64(77)).unwrap();
        assert!(run_transcript(&mut suite, "Q 00").is_err());
    }
}
