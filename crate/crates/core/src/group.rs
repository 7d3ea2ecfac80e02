//! Generic cyclic-group routines: baby-step giant-step, generator search and
//! Pohlig-Hellman. The group law is supplied by the caller.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::crt;
use crate::error::{Error, Result};

/// Baby-step tables larger than this are refused.
pub const BSGS_MAX_TABLE: u64 = 1 << 26;

pub trait Group {
    type Elem: Clone + Eq + Hash;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn pow(&self, a: &Self::Elem, e: &BigUint) -> Self::Elem {
        let mut acc = self.identity();
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }
}

/// Returns x in [0, order) with base^x = target, where `order` is the order
/// of `base`. Uses O(sqrt(order)) memory.
pub fn bsgs_dlog<G: Group>(
    group: &G,
    base: &G::Elem,
    target: &G::Elem,
    order: &BigUint,
) -> Result<BigUint> {
    if order.is_zero() {
        return Err(Error::NotInSubgroup);
    }
    let m_big = order.sqrt() + 1u32;
    let m = m_big
        .to_u64()
        .filter(|&m| m <= BSGS_MAX_TABLE)
        .ok_or(Error::OrderTooLarge(order.bits()))?;
    let mut baby: HashMap<G::Elem, u64> = HashMap::with_capacity(m as usize);
    let mut cur = group.identity();
    for j in 0..m {
        baby.entry(cur.clone()).or_insert(j);
        cur = group.mul(&cur, base);
    }
    // factor = base^{-m} = base^{order - m mod order}
    let neg_m = (order - (&m_big % order)) % order;
    let factor = group.pow(base, &neg_m);
    let mut gamma = target.clone();
    for i in 0..m {
        if let Some(&j) = baby.get(&gamma) {
            let x = (BigUint::from(i) * &m_big + j) % order;
            return Ok(x);
        }
        gamma = group.mul(&gamma, &factor);
    }
    Err(Error::NotInSubgroup)
}

/// True iff g has order exactly N, given the complete factorization of N.
pub fn is_generator<G: Group>(group: &G, g: &G::Elem, order: &BigUint, primes: &[BigUint]) -> bool {
    let one = group.identity();
    if group.pow(g, order) != one {
        return false;
    }
    primes.iter().all(|r| group.pow(g, &(order / r)) != one)
}

/// First candidate passing every prime-order test g^(N/r) != 1.
pub fn find_generator<G: Group>(
    group: &G,
    candidates: impl IntoIterator<Item = G::Elem>,
    order: &BigUint,
    factorization: &[(BigUint, u32)],
) -> Result<G::Elem> {
    let product: BigUint = factorization.iter().map(|(p, e)| p.pow(*e)).product();
    if &product != order {
        return Err(Error::InconsistentOrder);
    }
    let primes: Vec<BigUint> = factorization.iter().map(|(p, _)| p.clone()).collect();
    let one = group.identity();
    for g in candidates {
        if group.pow(&g, order) != one {
            return Err(Error::InconsistentOrder);
        }
        if primes.iter().all(|r| group.pow(&g, &(order / r)) != one) {
            return Ok(g);
        }
    }
    Err(Error::InconsistentOrder)
}

/// log_base(target) modulo r^e by Pohlig-Hellman layers, each layer solved by
/// baby-step giant-step in the order-r subgroup. `order` is the full order of
/// `base`.
pub fn dlog_prime_power<G: Group>(
    group: &G,
    base: &G::Elem,
    target: &G::Elem,
    order: &BigUint,
    r: &BigUint,
    e: u32,
) -> Result<BigUint> {
    let re = r.pow(e);
    let cof = order / &re;
    let gamma = group.pow(base, &(order / r));
    let b = group.pow(base, &cof);
    let t = group.pow(target, &cof);
    let mut x = BigUint::zero();
    let mut rk = BigUint::one();
    for k in 0..e {
        // h = (t * b^{-x})^{r^{e-1-k}}
        let inv_exp = (&re - (&x % &re)) % &re;
        let tk = group.mul(&t, &group.pow(&b, &inv_exp));
        let h = group.pow(&tk, &r.pow(e - 1 - k));
        let d = bsgs_dlog(group, &gamma, &h, r)?;
        x += &rk * d;
        rk *= r;
    }
    Ok(x)
}

/// Full Pohlig-Hellman over a complete factorization of `order`.
pub fn pohlig_hellman<G: Group>(
    group: &G,
    base: &G::Elem,
    target: &G::Elem,
    order: &BigUint,
    factorization: &[(BigUint, u32)],
) -> Result<BigUint> {
    let mut residues = Vec::new();
    for (r, e) in factorization {
        let x = dlog_prime_power(group, base, target, order, r, *e).map_err(|err| {
            Error::PohligHellman {
                prime: r.clone(),
                exponent: *e,
                source: Box::new(err),
            }
        })?;
        residues.push((x, r.pow(*e)));
    }
    let x = crt(&residues);
    debug_assert!(x < *order || order.is_one());
    Ok(x.mod_floor(order))
}
