//! One-shot signatures: key generation, parallel signing, verification.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coset_state::{AffineFunctional, StateJson, SymbolicCosetState};
use crate::ecc::LinearCode;
use crate::error::{check_len, Error, Result};
use crate::gf2::BitVec;
use crate::oracle::OracleSuite;

/// Public key `y` and the quantum secret key, here a symbolic coset state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub pk: BitVec,
    sk: SymbolicCosetState,
    spent: bool,
}

impl KeyPair {
    pub fn secret_state(&self) -> &SymbolicCosetState {
        &self.sk
    }

    pub fn is_spent(&self) -> bool {
        self.spent
    }

    pub fn to_json(&self) -> KeyPairJson {
        KeyPairJson {
            pk: self.pk.to_hex(),
            sk: self.sk.to_json(),
            spent: self.spent,
        }
    }

    pub fn from_json(json: &KeyPairJson, r: usize) -> Result<Self> {
        Ok(KeyPair {
            pk: BitVec::from_hex(&json.pk, r)?,
            sk: SymbolicCosetState::from_json(&json.sk)?,
            spent: json.spent,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyPairJson {
    pub pk: String,
    pub sk: StateJson,
    pub spent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub sigma: BitVec,
    pub message: BitVec,
}

impl Signature {
    pub fn to_json(&self) -> SignatureJson {
        SignatureJson {
            sigma: self.sigma.to_hex(),
            message: self.message.to_hex(),
            message_len: self.message.len(),
        }
    }

    pub fn from_json(json: &SignatureJson, k: usize) -> Result<Self> {
        Ok(Signature {
            sigma: BitVec::from_hex(&json.sigma, k)?,
            message: BitVec::from_hex(&json.message, json.message_len)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureJson {
    pub sigma: String,
    pub message: String,
    pub message_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundRecord {
    /// The measured last `ℓ` bits.
    pub m_t: BitVec,
    pub mismatch_count: usize,
    /// Primal-form state at the end of the round.
    pub state: SymbolicCosetState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignTranscript {
    pub rounds: Vec<RoundRecord>,
    pub final_sigma: BitVec,
    pub success: bool,
}

/// Draws a uniform `x`, publishes `y = H(x)` and keeps the uniform
/// superposition over the fiber of `y`.
pub fn siggen<R: Rng + ?Sized>(suite: &mut OracleSuite, rng: &mut R) -> Result<KeyPair> {
    let x = BitVec::random(rng, suite.params().n);
    let y = suite.h(&x)?;
    let fiber = suite.fiber(&y)?;
    Ok(KeyPair {
        pk: y,
        sk: SymbolicCosetState::uniform_over(fiber),
        spent: false,
    })
}

/// The functionals `v ↦ c_{y,v}[j]` for each `j` in `positions`, pulled back
/// to the support of `st`. Fails if the support leaves the accept set of `D`.
fn dual_coordinate_functionals(
    suite: &mut OracleSuite,
    y: &BitVec,
    st: &SymbolicCosetState,
    positions: &[usize],
) -> Result<Vec<AffineFunctional>> {
    let k = st.ambient();
    let support = st.support();
    let mut query = |v: &BitVec| -> Result<BitVec> {
        suite
            .d_oracle(y, v)?
            .ok_or_else(|| Error::Invariant(format!("signing state left the dual oracle's domain at {}", v.to_hex())))
    };
    let offset_coords = query(support.offset())?;
    let basis = support.subspace().basis().row_vecs();
    let pivots = support.subspace().pivots();
    let basis_coords = basis.iter().map(&mut query).collect::<Result<Vec<_>>>()?;
    Ok(positions
        .iter()
        .map(|&j| {
            let mut linear = BitVec::zeros(k);
            for (coords, &p) in basis_coords.iter().zip(pivots) {
                linear.set(p, coords.get(j));
            }
            let constant = offset_coords.get(j) ^ linear.dot(support.offset());
            AffineFunctional::new(linear, constant)
        })
        .collect())
}

/// Parallel signing. Consumes the key even when the attempt fails.
pub fn sign<R: Rng + ?Sized>(
    suite: &mut OracleSuite,
    keypair: &mut KeyPair,
    message: &BitVec,
    code: &LinearCode,
    rng: &mut R,
) -> Result<(Signature, SignTranscript)> {
    if keypair.spent {
        return Err(Error::KeySpent);
    }
    let (k, ell, rounds) = (suite.params().k, suite.params().ell_code, suite.params().rounds);
    check_len(ell, code.code_len(), "code length")?;
    let target = code.encode(message)?;
    keypair.spent = true;

    let tail: Vec<usize> = (k - ell..k).collect();
    let mut st = keypair.sk.clone();
    let mut records = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let (m_t, collapsed) = st.measure_bits(&tail, rng)?;
        let mismatches: Vec<usize> = (0..ell).filter(|&j| m_t.get(j) != target.get(j)).collect();
        st = collapsed.hadamard_all();
        let functionals = dual_coordinate_functionals(suite, &keypair.pk, &st, &mismatches)?;
        for f in &functionals {
            st = st.measure_functional(f, rng)?.1;
        }
        st = st.hadamard_all();
        records.push(RoundRecord {
            m_t,
            mismatch_count: mismatches.len(),
            state: st.clone(),
        });
    }
    let (sigma, _) = st.measure_bits(&(0..k).collect::<Vec<_>>(), rng)?;
    let success = code.within_radius(&sigma.slice(k - ell, k), &target);
    Ok((
        Signature {
            sigma: sigma.clone(),
            message: message.clone(),
        },
        SignTranscript {
            rounds: records,
            final_sigma: sigma,
            success,
        },
    ))
}

/// Accepts iff `P⁻¹(pk, σ) ≠ ⊥` and the last `ℓ` bits of `σ` are within
/// `⌊ℓ/6⌋` of the encoded message.
pub fn verify(suite: &mut OracleSuite, pk: &BitVec, message: &BitVec, sigma: &BitVec, code: &LinearCode) -> bool {
    let p = suite.params();
    let (k, ell) = (p.k, p.ell_code);
    if pk.len() != p.r || sigma.len() != k || code.code_len() != ell || message.len() != code.msg_len() {
        return false;
    }
    let Ok(target) = code.encode(message) else {
        return false;
    };
    if !code.within_radius(&sigma.slice(k - ell, k), &target) {
        return false;
    }
    matches!(suite.p_inverse(pk, sigma), Ok(Some(_)))
}

/// Two distinct verifying signatures under one key give two distinct
/// preimages of `pk` under `H`.
pub fn strong_unforgeability_witness(
    suite: &mut OracleSuite,
    pk: &BitVec,
    sig0: &Signature,
    sig1: &Signature,
    code: &LinearCode,
) -> Result<Option<(BitVec, BitVec)>> {
    for sig in [sig0, sig1] {
        if !verify(suite, pk, &sig.message, &sig.sigma, code) {
            return Err(Error::Precondition("signature does not verify".into()));
        }
    }
    if sig0.sigma == sig1.sigma {
        return Ok(None);
    }
    let x0 = suite.p_inverse(pk, &sig0.sigma)?.expect("verified");
    let x1 = suite.p_inverse(pk, &sig1.sigma)?.expect("verified");
    Ok(Some((x0, x1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lazy_random::{DeterministicRng, Seed};
    use crate::oracle::Params;

    fn setup(seed: u64) -> (OracleSuite, LinearCode, DeterministicRng) {
        let s = Seed::from_u64(seed);
        let suite = OracleSuite::new(Params::toy(), s).unwrap();
        let code = LinearCode::sample(&mut DeterministicRng::new(&s, "CODE"), 3, 12).unwrap();
        (suite, code, DeterministicRng::new(&s, "SIGN"))
    }

    #[test]
    fn secret_key_is_the_fiber() {
        let (mut suite, _, mut rng) = setup(1);
        let kp = siggen(&mut suite, &mut rng).unwrap();
        assert_eq!(kp.secret_state().support(), &suite.fiber(&kp.pk).unwrap());
        assert!(kp.secret_state().phase().is_zero());
        for _ in 0..20 {
            let (u, _) = kp.secret_state().measure_bits(&(0..16).collect::<Vec<_>>(), &mut rng).unwrap();
            assert!(suite.p_inverse(&kp.pk, &u).unwrap().is_some());
        }
    }

    #[test]
    fn keygen_is_reproducible() {
        let pks = |seed| {
            let (mut suite, _, mut rng) = setup(seed);
            (0..5).map(|_| siggen(&mut suite, &mut rng).unwrap().pk).collect::<Vec<_>>()
        };
        assert_eq!(pks(3), pks(3));
        assert_ne!(pks(3), pks(4));
    }

    #[test]
    fn sign_verify_and_one_shot() {
        let (mut suite, code, mut rng) = setup(5);
        let mut kp = siggen(&mut suite, &mut rng).unwrap();
        let msg = BitVec::from_bit_str("110");
        let (sig, tr) = sign(&mut suite, &mut kp, &msg, &code, &mut rng).unwrap();
        assert_eq!(tr.rounds.len(), 3);
        assert_eq!(verify(&mut suite, &kp.pk, &msg, &sig.sigma, &code), tr.success);
        assert!(kp.is_spent());
        assert!(matches!(
            sign(&mut suite, &mut kp, &msg, &code, &mut rng),
            Err(Error::KeySpent)
        ));
    }

    #[test]
    fn off_coset_sigma_is_rejected() {
        let (mut suite, code, mut rng) = setup(6);
        let kp = siggen(&mut suite, &mut rng).unwrap();
        let msg = BitVec::from_bit_str("011");
        let fiber = suite.fiber(&kp.pk).unwrap();
        let target = code.encode(&msg).unwrap();
        let sigma = (0..1u64 << 4)
            .map(|hi| BitVec::from_index(hi, 4).concat(&target))
            .find(|u| !fiber.contains(u))
            .unwrap();
        assert!(!verify(&mut suite, &kp.pk, &msg, &sigma, &code));
    }

    #[test]
    fn wrong_lengths_do_not_verify() {
        let (mut suite, code, _) = setup(7);
        let pk = BitVec::zeros(6);
        assert!(!verify(&mut suite, &pk, &BitVec::zeros(2), &BitVec::zeros(16), &code));
        assert!(!verify(&mut suite, &pk, &BitVec::zeros(3), &BitVec::zeros(15), &code));
    }

    #[test]
    fn equal_signatures_give_no_witness() {
        let mut seed = 10;
        loop {
            let (mut suite, code, mut rng) = setup(seed);
            let mut kp = siggen(&mut suite, &mut rng).unwrap();
            let msg = BitVec::from_bit_str("100");
            let (sig, tr) = sign(&mut suite, &mut kp, &msg, &code, &mut rng).unwrap();
            if tr.success {
                assert_eq!(strong_unforgeability_witness(&mut suite, &kp.pk, &sig, &sig, &code).unwrap(), None);
                let bogus = Signature {
                    sigma: BitVec::zeros(16),
                    message: msg,
                };
                assert!(strong_unforgeability_witness(&mut suite, &kp.pk, &sig, &bogus, &code).is_err());
                break;
            }
            seed += 1;
        }
    }

    #[test]
    fn key_json_round_trip() {
        let (mut suite, _, mut rng) = setup(8);
        let kp = siggen(&mut suite, &mut rng).unwrap();
        let text = serde_json::to_string(&kp.to_json()).unwrap();
        let back: KeyPairJson = serde_json::from_str(&text).unwrap();
        assert_eq!(KeyPair::from_json(&back, 6).unwrap(), kp);
    }
}
