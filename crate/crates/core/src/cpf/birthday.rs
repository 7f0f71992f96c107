use std::collections::{HashMap, HashSet};

use rand::Rng;

use crate::error::Result;
use crate::gf2::BitVec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BirthdayOutcome {
    pub collision: Option<(BitVec, BitVec)>,
    pub queries: u64,
}

/// Queries `f` on distinct uniformly random `in_bits`-bit inputs until two
/// outputs agree, the domain runs out, or `max_queries` is spent.
pub fn collision_search_birthday<F, R>(mut f: F, in_bits: usize, rng: &mut R, max_queries: u64) -> Result<BirthdayOutcome>
where
    F: FnMut(&BitVec) -> Result<BitVec>,
    R: Rng + ?Sized,
{
    let domain = if in_bits < 64 { 1u64 << in_bits } else { u64::MAX };
    let budget = max_queries.min(domain);
    let mut asked = HashSet::new();
    let mut seen: HashMap<BitVec, BitVec> = HashMap::new();
    let mut queries = 0;
    while queries < budget {
        let x = BitVec::random(rng, in_bits);
        if !asked.insert(x.clone()) {
            continue;
        }
        queries += 1;
        let y = f(&x)?;
        if let Some(prev) = seen.insert(y, x.clone()) {
            return Ok(BirthdayOutcome {
                collision: Some((prev, x)),
                queries,
            });
        }
    }
    Ok(BirthdayOutcome { collision: None, queries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lazy_random::{DeterministicRng, LazyPermutation, Seed};

    #[test]
    fn constant_function_collides_immediately() {
        let mut rng = DeterministicRng::new(&Seed::from_u64(1), "b");
        let out = collision_search_birthday(|_| Ok(BitVec::zeros(4)), 10, &mut rng, 100).unwrap();
        assert_eq!(out.queries, 2);
        let (a, b) = out.collision.unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn injective_function_exhausts_domain() {
        let mut rng = DeterministicRng::new(&Seed::from_u64(2), "b");
        let mut p = LazyPermutation::new(&Seed::from_u64(2), "p", 6);
        let out = collision_search_birthday(|x| p.forward(x), 6, &mut rng, 1000).unwrap();
        assert_eq!(out, BirthdayOutcome { collision: None, queries: 64 });
    }
}
