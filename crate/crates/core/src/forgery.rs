//! The one-shot forgery game: an attacker with counted classical oracle
//! access tries to produce verifying signatures on two distinct messages
//! under one public key.

use serde::Serialize;

use crate::ecc::LinearCode;
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::oracle::{OracleSuite, PointOutput};
use crate::oss::{strong_unforgeability_witness, verify, Signature};

/// Query-counting wrapper around a suite. Every `P`, `P⁻¹` and `D` call
/// costs one unit; exceeding the budget fails with
/// [`Error::BudgetExceeded`].
pub struct BudgetedOracle<'a> {
    suite: &'a mut OracleSuite,
    budget: u64,
    used: u64,
}

impl<'a> BudgetedOracle<'a> {
    pub fn new(suite: &'a mut OracleSuite, budget: u64) -> Self {
        BudgetedOracle { suite, budget, used: 0 }
    }

    fn charge(&mut self) -> Result<()> {
        if self.used >= self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        self.used += 1;
        Ok(())
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn params(&self) -> &crate::oracle::Params {
        self.suite.params()
    }

    pub fn p_forward(&mut self, x: &BitVec) -> Result<PointOutput> {
        self.charge()?;
        self.suite.p_forward(x)
    }

    pub fn p_inverse(&mut self, y: &BitVec, u: &BitVec) -> Result<Option<BitVec>> {
        self.charge()?;
        self.suite.p_inverse(y, u)
    }

    pub fn d_oracle(&mut self, y: &BitVec, v: &BitVec) -> Result<Option<BitVec>> {
        self.charge()?;
        self.suite.d_oracle(y, v)
    }

    /// Uncounted access standing in for the honest quantum signer, which
    /// holds the coset state rather than making classical queries.
    pub fn honest_signer_access(&mut self) -> &mut OracleSuite {
        self.suite
    }
}

/// What the attacker claims: a public key and two signed messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForgeryAttempt {
    pub pk: BitVec,
    pub first: Signature,
    pub second: Signature,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForgeryOutcome {
    pub won: bool,
    pub queries: u64,
    pub budget_exceeded: bool,
    /// Two distinct `H`-preimages of the public key, extracted on a win.
    #[serde(skip)]
    pub collision: Option<(BitVec, BitVec)>,
}

/// Runs one game. Running out of budget is a forced loss. A win requires
/// distinct messages, both verifying, and yields the extracted `H`
/// collision, which is checked before the win is recorded.
pub fn forgery_game<A>(suite: &mut OracleSuite, code: &LinearCode, budget: u64, attacker: A) -> Result<ForgeryOutcome>
where
    A: FnOnce(&mut BudgetedOracle) -> Result<Option<ForgeryAttempt>>,
{
    let mut oracle = BudgetedOracle::new(suite, budget);
    let result = attacker(&mut oracle);
    let queries = oracle.used();
    let lose = |budget_exceeded| ForgeryOutcome {
        won: false,
        queries,
        budget_exceeded,
        collision: None,
    };
    let attempt = match result {
        Err(Error::BudgetExceeded(_)) => return Ok(lose(true)),
        Err(e) => return Err(e),
        Ok(None) => return Ok(lose(false)),
        Ok(Some(a)) => a,
    };
    let ForgeryAttempt { pk, first, second } = attempt;
    if first.message == second.message
        || !verify(suite, &pk, &first.message, &first.sigma, code)
        || !verify(suite, &pk, &second.message, &second.sigma, code)
    {
        return Ok(lose(false));
    }
    let Some((x0, x1)) = strong_unforgeability_witness(suite, &pk, &first, &second, code)? else {
        return Err(Error::Invariant("distinct messages verified with one signature".into()));
    };
    if x0 == x1 || suite.h(&x0)? != pk || suite.h(&x1)? != pk {
        return Err(Error::Invariant("extracted pair is not an H collision".into()));
    }
    Ok(ForgeryOutcome {
        won: true,
        queries,
        budget_exceeded: false,
        collision: Some((x0, x1)),
    })
}

pub mod attackers {
    //! Reference attackers for the forgery game.

    use rand::Rng;

    use super::{BudgetedOracle, ForgeryAttempt};
    use crate::ecc::LinearCode;
    use crate::error::{Error, Result};
    use crate::gf2::BitVec;
    use crate::oss::{siggen, sign, Signature};

    /// Generates a key, signs `m0` honestly, then tries to sign `m1` with the
    /// spent key and falls back to replaying the first signature.
    pub fn honest<R: Rng + ?Sized>(
        oracle: &mut BudgetedOracle,
        code: &LinearCode,
        m0: &BitVec,
        m1: &BitVec,
        rng: &mut R,
    ) -> Result<Option<ForgeryAttempt>> {
        let suite = oracle.honest_signer_access();
        let mut kp = siggen(suite, rng)?;
        let (first, _) = sign(suite, &mut kp, m0, code, rng)?;
        let second = match sign(suite, &mut kp, m1, code, rng) {
            Ok((sig, _)) => sig,
            Err(Error::KeySpent) => Signature {
                sigma: first.sigma.clone(),
                message: m1.clone(),
            },
            Err(e) => return Err(e),
        };
        Ok(Some(ForgeryAttempt {
            pk: kp.pk,
            first,
            second,
        }))
    }

    /// Enumerates `P` over the whole domain, then looks for a fiber holding
    /// points that decode to both messages.
    pub fn brute_force(oracle: &mut BudgetedOracle, code: &LinearCode, m0: &BitVec, m1: &BitVec) -> Result<Option<ForgeryAttempt>> {
        let (n, k, ell) = (oracle.params().n, oracle.params().k, oracle.params().ell_code);
        let (c0, c1) = (code.encode(m0)?, code.encode(m1)?);
        let mut by_y: std::collections::BTreeMap<BitVec, (Option<BitVec>, Option<BitVec>)> = Default::default();
        for i in 0..1u64 << n {
            let out = oracle.p_forward(&BitVec::from_index(i, n))?;
            let tail = out.u.slice(k - ell, k);
            let slot = by_y.entry(out.y).or_default();
            if slot.0.is_none() && code.within_radius(&tail, &c0) {
                slot.0 = Some(out.u.clone());
            }
            if slot.1.is_none() && code.within_radius(&tail, &c1) {
                slot.1 = Some(out.u);
            }
        }
        Ok(by_y.into_iter().find_map(|(y, slot)| match slot {
            (Some(s0), Some(s1)) => Some(ForgeryAttempt {
                pk: y,
                first: Signature {
                    sigma: s0,
                    message: m0.clone(),
                },
                second: Signature {
                    sigma: s1,
                    message: m1.clone(),
                },
            }),
            _ => None,
        }))
    }

    /// Evaluates `P` once for a public key, then spends the remaining budget
    /// on uniformly random `σ` guesses for `m1`, checked through `P⁻¹`.
    pub fn random_guess<R: Rng + ?Sized>(
        oracle: &mut BudgetedOracle,
        m0: &BitVec,
        m1: &BitVec,
        rng: &mut R,
    ) -> Result<Option<ForgeryAttempt>> {
        let (n, k) = (oracle.params().n, oracle.params().k);
        let out = oracle.p_forward(&BitVec::random(rng, n))?;
        while oracle.used() < oracle.budget() {
            let guess = BitVec::random(rng, k);
            if oracle.p_inverse(&out.y, &guess)?.is_some() {
                return Ok(Some(ForgeryAttempt {
                    pk: out.y,
                    first: Signature {
                        sigma: out.u,
                        message: m0.clone(),
                    },
                    second: Signature {
                        sigma: guess,
                        message: m1.clone(),
                    },
                }));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lazy_random::{DeterministicRng, Seed};
    use crate::oracle::Params;

    fn tiny() -> Params {
        Params {
            lambda: 1,
            s: 0,
            r: 4,
            n: 12,
            k: 10,
            ell_code: 6,
            rounds: 3,
            bloat_s: None,
            msg_len: 1,
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut suite = OracleSuite::new(tiny(), Seed::from_u64(1)).unwrap();
        let mut o = BudgetedOracle::new(&mut suite, 2);
        let x = BitVec::zeros(12);
        o.p_forward(&x).unwrap();
        o.p_forward(&x).unwrap();
        assert!(matches!(o.p_forward(&x), Err(Error::BudgetExceeded(2))));
        assert_eq!(o.used(), 2);
    }

    #[test]
    fn exhausted_budget_loses() {
        let seed = Seed::from_u64(2);
        let mut suite = OracleSuite::new(tiny(), seed).unwrap();
        let code = LinearCode::sample(&mut DeterministicRng::new(&seed, "CODE"), 1, 6).unwrap();
        let (m0, m1) = (BitVec::zeros(1), BitVec::ones(1));
        let out = forgery_game(&mut suite, &code, 10, |o| attackers::brute_force(o, &code, &m0, &m1)).unwrap();
        assert!(!out.won && out.budget_exceeded);
        assert_eq!(out.queries, 10);
    }

    #[test]
    fn same_message_twice_is_not_a_win() {
        let seed = Seed::from_u64(3);
        let mut suite = OracleSuite::new(tiny(), seed).unwrap();
        let code = LinearCode::sample(&mut DeterministicRng::new(&seed, "CODE"), 1, 6).unwrap();
        let m0 = BitVec::zeros(1);
        let out = forgery_game(&mut suite, &code, 1 << 13, |o| attackers::brute_force(o, &code, &m0, &m0)).unwrap();
        assert!(!out.won);
    }
}
