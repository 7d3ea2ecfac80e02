//! Integer number theory on machine words and `BigUint`: primality,
//! factoring (trial division, Pollard rho, cyclotomic pre-splitting),
//! Möbius function and divisor enumeration.

use std::collections::BTreeMap;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_u64(r, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin with `rounds` random bases (deterministic stream).
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    for p in small_primes(1000) {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d69_6c6c_6572);
    let two = BigUint::from(2u32);
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n1);
        let mut x = a.modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn small_primes(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u64)
        .collect()
}

/// Factorization of a machine word by trial division.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn mobius(n: u64) -> i64 {
    let f = factor_u64(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n).take_while(|d| d * d <= n).filter(|d| n % d == 0).collect();
    let mut hi: Vec<u64> = out.iter().rev().map(|d| n / d).filter(|&d| d * d != n).collect();
    out.append(&mut hi);
    out
}

/// Φ_d(x) evaluated at an integer, via ∏_{e | d} (x^{d/e} - 1)^{μ(e)}.
pub fn cyclotomic_value(d: u64, x: &BigUint) -> BigUint {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for e in divisors(d) {
        let t = x.pow((d / e) as u32) - 1u32;
        match mobius(e) {
            1 => num *= t,
            -1 => den *= t,
            _ => {}
        }
    }
    num / den
}

/// Limits for [`factor_biguint`].
#[derive(Clone, Copy, Debug)]
pub struct FactorBudget {
    pub trial_bound: u64,
    pub rho_iterations: u64,
    pub mr_rounds: usize,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_bound: 1_000_000,
            rho_iterations: 1 << 24,
            mr_rounds: 64,
        }
    }
}

/// Result of a (possibly partial) factorization: certified prime factors and
/// composite cofactors that resisted the budget.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialFactorization {
    pub primes: BTreeMap<BigUint, u32>,
    pub unfactored: Vec<BigUint>,
}

impl PartialFactorization {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_empty()
    }

    pub fn product(&self) -> BigUint {
        let mut acc = BigUint::one();
        for (p, &e) in &self.primes {
            acc *= p.pow(e);
        }
        for c in &self.unfactored {
            acc *= c;
        }
        acc
    }

    fn add_prime(&mut self, p: BigUint, e: u32) {
        *self.primes.entry(p).or_insert(0) += e;
    }

    fn merge(&mut self, other: PartialFactorization) {
        for (p, e) in other.primes {
            self.add_prime(p, e);
        }
        self.unfactored.extend(other.unfactored);
    }
}

/// Factor `n` by trial division to `budget.trial_bound`, then Pollard rho
/// (Brent variant) on the remaining composites.
pub fn factor_biguint(n: &BigUint, budget: &FactorBudget) -> PartialFactorization {
    let mut out = PartialFactorization::default();
    if n.is_zero() || n.is_one() {
        return out;
    }
    let mut rest = n.clone();
    for p in small_primes(budget.trial_bound) {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            e += 1;
        }
        if e > 0 {
            out.add_prime(pb, e);
        }
    }
    let mut stack = vec![rest];
    while let Some(c) = stack.pop() {
        if c.is_one() {
            continue;
        }
        if is_probable_prime(&c, budget.mr_rounds) {
            out.add_prime(c, 1);
            continue;
        }
        if let Some(r) = perfect_power_root(&c) {
            let (root, k) = r;
            for _ in 0..k {
                stack.push(root.clone());
            }
            continue;
        }
        match pollard_rho(&c, budget.rho_iterations) {
            Some(d) => {
                let other = &c / &d;
                stack.push(d);
                stack.push(other);
            }
            None => out.unfactored.push(c),
        }
    }
    out.unfactored.sort();
    out
}

/// Factor q^n - 1 by first splitting it into cyclotomic values Φ_d(q), d | n.
pub fn factor_q_power_minus_one(q: u64, n: u64, budget: &FactorBudget) -> PartialFactorization {
    let qb = BigUint::from(q);
    let mut out = PartialFactorization::default();
    for d in divisors(n) {
        let v = cyclotomic_value(d, &qb);
        out.merge(factor_biguint(&v, budget));
    }
    // Unfactored pieces from different Φ_d may share primes already found.
    let mut unfactored = Vec::new();
    for mut c in std::mem::take(&mut out.unfactored) {
        let primes: Vec<BigUint> = out.primes.keys().cloned().collect();
        for p in primes {
            while (&c % &p).is_zero() {
                c /= &p;
                out.add_prime(p.clone(), 1);
            }
        }
        if !c.is_one() {
            if is_probable_prime(&c, budget.mr_rounds) {
                out.add_prime(c, 1);
            } else {
                unfactored.push(c);
            }
        }
    }
    unfactored.sort();
    out.unfactored = unfactored;
    out
}

fn perfect_power_root(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    for k in 2..=bits {
        let r = n.nth_root(k);
        if r < BigUint::from(2u32) {
            break;
        }
        if r.pow(k) == *n {
            return Some((r, k));
        }
    }
    None
}

/// Brent's variant of Pollard rho with batched gcds. Returns a nontrivial
/// factor, or `None` once `max_iter` steps are spent.
pub fn pollard_rho(n: &BigUint, max_iter: u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let one = BigUint::one();
    let mut spent = 0u64;
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r = 1u64;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        const M: u64 = 128;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..M.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += M;
            }
            spent += r;
            r *= 2;
            if spent > max_iter {
                return None;
            }
        }
        if &g == n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
        if spent > max_iter {
            return None;
        }
    }
    None
}

/// Trial division to `bound` followed by a short rho run; used for
/// determinant gcds where only the small-prime structure matters.
pub fn factor_with_limits(n: &BigUint, trial_bound: u64, rho_iterations: u64) -> PartialFactorization {
    factor_biguint(
        n,
        &FactorBudget {
            trial_bound,
            rho_iterations,
            mr_rounds: 32,
        },
    )
}

pub fn inv_mod_biguint(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let a = BigInt::from(a % m);
    let m = BigInt::from(m.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    let x = ((e.x % &m) + &m) % &m;
    x.to_biguint()
}

/// Chinese remaindering of pairwise coprime moduli.
pub fn crt(residues: &[(BigUint, BigUint)]) -> BigUint {
    let mut acc = BigUint::zero();
    let mut modulus = BigUint::one();
    for (r, m) in residues {
        // acc + modulus * t ≡ r (mod m)
        let diff = ((r % m) + m - (&acc % m)) % m;
        let inv = inv_mod_biguint(&(&modulus % m), m).expect("moduli must be coprime");
        let t = (diff * inv) % m;
        acc += &modulus * t;
        modulus *= m;
    }
    acc % modulus
}
