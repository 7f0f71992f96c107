use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{check_len, Error, Result};
use crate::gf2::BitVec;

use super::TrapdoorClawFree;

/// Toy parameters `(u, v, q, B, B̄, σ)` for `(t, f, b) ↦ B·t + f + b·c mod q`.
#[derive(Clone, Debug, PartialEq)]
pub struct LweParams {
    pub u: usize,
    pub v: usize,
    pub q: u64,
    pub big_b: i64,
    pub b_bar: i64,
    pub sigma: f64,
}

impl LweParams {
    pub fn toy() -> Self {
        LweParams {
            u: 1,
            v: 3,
            q: 16,
            big_b: 2,
            b_bar: 1,
            sigma: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.u == 0 || self.u > 3 || self.v > 6 || self.q > 64 {
            return fail("brute force needs u in 1..=3, v <= 6, q <= 64");
        }
        if self.v < self.u {
            return fail("need v >= u");
        }
        if !self.q.is_power_of_two() || self.big_b < 1 || !(self.big_b as u64).is_power_of_two() {
            return fail("q and B must be powers of two");
        }
        if !(self.sigma > 0.0 && self.sigma <= self.b_bar as f64) {
            return fail("need 0 < sigma <= B_bar");
        }
        if self.b_bar < 1 || self.b_bar > self.big_b || 2 * self.big_b as u64 > self.q {
            return fail("need 1 <= B_bar <= B <= q/2");
        }
        Ok(())
    }

    fn log_q(&self) -> usize {
        self.q.trailing_zeros() as usize
    }

    fn log_noise(&self) -> usize {
        (2 * self.big_b as u64).trailing_zeros() as usize
    }
}

pub const DEFAULT_KEYGEN_RETRIES: usize = 1000;

/// True iff every nonzero `B·d` has a centered coordinate of size at least
/// `2B`, which makes each branch injective on `Z_q^u × (−B, B]^v`.
fn separates_noise(matrix: &[Vec<u64>], params: &LweParams) -> bool {
    let (u, q) = (params.u, params.q as i64);
    (1..params.q.pow(u as u32)).all(|mut idx| {
        let d: Vec<i64> = (0..u)
            .map(|_| {
                let x = (idx % params.q) as i64;
                idx /= params.q;
                x
            })
            .collect();
        matrix.iter().any(|row| {
            let x = row.iter().zip(&d).map(|(&a, &b)| a as i64 * b).sum::<i64>().rem_euclid(q);
            let centered = if x > q / 2 { x - q } else { x };
            centered.abs() >= 2 * params.big_b
        })
    })
}

/// Public matrix `B`, `c = B·s + e`, and the secret `s`.
#[derive(Clone, Debug)]
pub struct LweTcf {
    params: LweParams,
    matrix: Vec<Vec<u64>>,
    c: Vec<u64>,
    s: Vec<u64>,
    e: Vec<i64>,
    trapdoor_calls: u64,
}

pub type Claw = ((Vec<u64>, Vec<i64>), (Vec<u64>, Vec<i64>));

impl LweTcf {
    pub fn keygen<R: Rng + ?Sized>(params: LweParams, rng: &mut R) -> Result<Self> {
        params.validate()?;
        let (u, v, q) = (params.u, params.v, params.q);
        let mut matrix = Vec::new();
        for attempt in 0..=DEFAULT_KEYGEN_RETRIES {
            if attempt == DEFAULT_KEYGEN_RETRIES {
                return Err(Error::RetriesExhausted {
                    attempts: attempt,
                    what: "injective LWE matrix".into(),
                });
            }
            matrix = (0..v).map(|_| (0..u).map(|_| rng.gen_range(0..q)).collect()).collect();
            if separates_noise(&matrix, &params) {
                break;
            }
        }
        let s: Vec<u64> = (0..u).map(|_| rng.gen_range(0..q)).collect();
        let normal = Normal::new(0.0, params.sigma).map_err(|e| Error::InvalidParams(e.to_string()))?;
        let e: Vec<i64> = (0..v)
            .map(|_| loop {
                let x = normal.sample(rng).round() as i64;
                if -params.b_bar < x && x <= params.b_bar {
                    break x;
                }
            })
            .collect();
        let mut key = LweTcf {
            params,
            matrix,
            c: vec![0; v],
            s,
            e,
            trapdoor_calls: 0,
        };
        let (s, e) = (key.s.clone(), key.e.clone());
        key.c = key.eval_raw(&s, &e, false);
        Ok(key)
    }

    pub fn params(&self) -> &LweParams {
        &self.params
    }

    pub fn secret(&self) -> (&[u64], &[i64]) {
        (&self.s, &self.e)
    }

    fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.params.q as i64) as u64
    }

    /// `B·t + f + b·c mod q`.
    pub fn eval_raw(&self, t: &[u64], f: &[i64], b: bool) -> Vec<u64> {
        (0..self.params.v)
            .map(|i| {
                let mut acc: i64 = f[i];
                for (j, &tj) in t.iter().enumerate() {
                    acc += (self.matrix[i][j] * tj) as i64;
                }
                if b {
                    acc += self.c[i] as i64;
                }
                self.reduce(acc)
            })
            .collect()
    }

    /// The noise `f` with `B·t + f + b·c = y`, if it lies in `(−B, B]`.
    fn noise_for(&self, t: &[u64], y: &[u64], b: bool) -> Option<Vec<i64>> {
        let zero = vec![0i64; self.params.v];
        let base = self.eval_raw(t, &zero, b);
        let q = self.params.q as i64;
        let f: Vec<i64> = y
            .iter()
            .zip(&base)
            .map(|(&yi, &bi)| {
                let d = (yi as i64 - bi as i64).rem_euclid(q);
                if d > q / 2 {
                    d - q
                } else {
                    d
                }
            })
            .collect();
        f.iter().all(|&x| -self.params.big_b < x && x <= self.params.big_b).then_some(f)
    }

    fn all_t(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let (u, q) = (self.params.u, self.params.q);
        (0..q.pow(u as u32)).map(move |mut idx| {
            (0..u)
                .map(|_| {
                    let d = idx % q;
                    idx /= q;
                    d
                })
                .collect()
        })
    }

    /// Scans every `t` for a preimage under each branch.
    pub fn claw_bruteforce(&self, y: &[u64]) -> Result<Option<Claw>> {
        if y.len() != self.params.v {
            return Err(Error::DimensionMismatch {
                expected: self.params.v,
                actual: y.len(),
                context: "LWE image",
            });
        }
        let find = |b: bool| self.all_t().find_map(|t| self.noise_for(&t, y, b).map(|f| (t, f)));
        Ok(find(false).zip(find(true)))
    }

    fn encode_vec(&self, xs: &[u64], bits: usize) -> BitVec {
        let mut out = BitVec::zeros(0);
        for &x in xs {
            out = out.concat(&BitVec::from_index(x, bits));
        }
        out
    }

    fn decode_vec(&self, v: &BitVec, count: usize, bits: usize) -> Vec<u64> {
        (0..count).map(|i| v.slice(i * bits, (i + 1) * bits).to_index()).collect()
    }

    /// Bit encoding of `(t, f)`: `t` then `f + B − 1`, little-endian fields.
    pub fn encode_input(&self, t: &[u64], f: &[i64]) -> BitVec {
        let shifted: Vec<u64> = f.iter().map(|&x| (x + self.params.big_b - 1) as u64).collect();
        self.encode_vec(t, self.params.log_q())
            .concat(&self.encode_vec(&shifted, self.params.log_noise()))
    }

    pub fn decode_input(&self, x: &BitVec) -> (Vec<u64>, Vec<i64>) {
        let tb = self.params.u * self.params.log_q();
        let t = self.decode_vec(&x.slice(0, tb), self.params.u, self.params.log_q());
        let f = self
            .decode_vec(&x.slice(tb, x.len()), self.params.v, self.params.log_noise())
            .into_iter()
            .map(|x| x as i64 - self.params.big_b + 1)
            .collect();
        (t, f)
    }

    pub fn encode_output(&self, y: &[u64]) -> BitVec {
        self.encode_vec(y, self.params.log_q())
    }

    pub fn decode_output(&self, y: &BitVec) -> Vec<u64> {
        self.decode_vec(y, self.params.v, self.params.log_q())
    }
}

impl TrapdoorClawFree for LweTcf {
    fn input_bits(&self) -> usize {
        self.params.u * self.params.log_q() + self.params.v * self.params.log_noise()
    }

    fn output_bits(&self) -> usize {
        self.params.v * self.params.log_q()
    }

    fn effective_bits(&self) -> usize {
        self.params.u * self.params.log_q()
    }

    fn eval(&mut self, b: bool, x: &BitVec) -> Result<BitVec> {
        check_len(self.input_bits(), x.len(), "LWE input")?;
        let (t, f) = self.decode_input(x);
        Ok(self.encode_output(&self.eval_raw(&t, &f, b)))
    }

    fn effective_input(&self, x: &BitVec) -> BitVec {
        x.slice(0, self.effective_bits())
    }

    fn invert(&mut self, b: bool, y: &BitVec) -> Result<Option<BitVec>> {
        check_len(self.output_bits(), y.len(), "LWE output")?;
        self.trapdoor_calls += 1;
        let y = self.decode_output(y);
        Ok(self
            .all_t()
            .find_map(|t| self.noise_for(&t, &y, b).map(|f| (t, f)))
            .map(|(t, f)| self.encode_input(&t, &f)))
    }

    fn reconstruct(&mut self, b: bool, effective: &BitVec, y: &BitVec) -> Result<Option<BitVec>> {
        check_len(self.effective_bits(), effective.len(), "effective input")?;
        check_len(self.output_bits(), y.len(), "LWE output")?;
        let t = self.decode_vec(effective, self.params.u, self.params.log_q());
        let y = self.decode_output(y);
        Ok(self.noise_for(&t, &y, b).map(|f| self.encode_input(&t, &f)))
    }

    fn trapdoor_calls(&self) -> u64 {
        self.trapdoor_calls
    }
}
