//! Arithmetic in F_{q^2} for q = p^m.
//!
//! F_{q^2} is F_p[t]/(f) with deg f = 2m; F_q is its fixed field under
//! x -> x^q. Elements have a canonical *packed* encoding
//! `c_0 + c_1 p + ... + c_{2m-1} p^{2m-1}` (little-endian coefficients of t).
//!
//! For q^2 <= 2^16 the context stores exp/log and Zech tables and elements are
//! held internally as `1 + log_g(x)` (0 for zero), which makes multiplication,
//! inversion and Frobenius single integer operations. Larger fields fall back
//! to schoolbook arithmetic on the packed encoding. Either way `0` is zero and
//! `1` is one.

use std::fmt::Write as _;

use num_bigint::BigUint;
use rand::Rng;

use crate::arith::{factor_u64, is_prime_u64};
use crate::error::{Error, Result};

/// Largest q^2 for which log/Zech tables are built.
pub const TABLE_LIMIT: u64 = 1 << 16;
/// Largest supported q^2 (packed encodings are `u32`).
pub const SIZE_LIMIT: u64 = 1 << 32;

/// An element of F_{q^2} in the internal representation of its [`FieldCtx`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fq2(pub(crate) u32);

impl Fq2 {
    pub const ZERO: Fq2 = Fq2(0);
    pub const ONE: Fq2 = Fq2(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Raw internal value; only meaningful together with its context.
    pub fn raw(self) -> u32 {
        self.0
    }
}

#[derive(Clone, Debug)]
struct Tables {
    /// `exp[i]` = packed g^i for i in [0, 2N).
    exp: Vec<u32>,
    /// `log[packed]` = log_g, undefined for 0.
    log: Vec<u32>,
    /// `zech[d]` = internal representation of 1 + g^d.
    zech: Vec<u32>,
}

/// Arithmetic context for F_{q^2}; immutable after construction.
#[derive(Clone, Debug)]
pub struct FieldCtx {
    p: u32,
    m: u32,
    q: u32,
    size: u32,
    modulus: Vec<u32>,
    generator: u32,
    pow_p: Vec<u32>,
    tables: Option<Tables>,
    minus_one: Fq2,
    subfield: Vec<Fq2>,
}

impl FieldCtx {
    /// Builds F_{q^2}, q = p^m. The modulus is the first irreducible monic
    /// polynomial of degree 2m, scanning lower coefficient vectors (as base-p
    /// integers) upward from `seed`.
    pub fn new(p: u64, m: u32, seed: u64) -> Result<Self> {
        Self::with_options(p, m, seed, false)
    }

    /// As [`FieldCtx::new`], optionally forcing schoolbook arithmetic even for
    /// small fields (used to cross-check the table path).
    pub fn with_options(p: u64, m: u32, seed: u64, force_schoolbook: bool) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::InvalidContext("m must be positive".into()));
        }
        let degree = 2 * m;
        let size = (p as u128).checked_pow(degree).unwrap_or(u128::MAX);
        if size >= SIZE_LIMIT as u128 {
            return Err(Error::FieldTooLarge { p, degree });
        }
        let modulus = find_irreducible_fp(p as u32, degree as usize, seed);
        Self::build(p as u32, m, modulus, None, force_schoolbook)
    }

    /// Rebuilds a context from an explicit modulus and generator.
    pub fn from_parts(p: u64, m: u32, modulus: Vec<u32>, generator: u32) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        let degree = 2 * m as usize;
        if modulus.len() != degree + 1 || modulus[degree] != 1 {
            return Err(Error::InvalidContext("modulus must be monic of degree 2m".into()));
        }
        if modulus.iter().any(|&c| c >= p as u32) {
            return Err(Error::InvalidContext("modulus coefficients must be reduced mod p".into()));
        }
        if !fp_is_irreducible(p as u32, &modulus) {
            return Err(Error::InvalidContext("modulus is reducible".into()));
        }
        Self::build(p as u32, m, modulus, Some(generator), false)
    }

    fn build(
        p: u32,
        m: u32,
        modulus: Vec<u32>,
        generator: Option<u32>,
        force_schoolbook: bool,
    ) -> Result<Self> {
        let degree = 2 * m;
        let q = p.pow(m);
        let size64 = (p as u64).pow(degree);
        let size = size64 as u32;
        let pow_p = (0..=degree).map(|i| (p as u64).pow(i) as u32).collect();
        let mut ctx = FieldCtx {
            p,
            m,
            q,
            size,
            modulus,
            generator: 0,
            pow_p,
            tables: None,
            minus_one: Fq2::ZERO,
            subfield: Vec::new(),
        };
        let order = size64 - 1;
        let order_primes: Vec<u64> = factor_u64(order).into_iter().map(|(r, _)| r).collect();
        let is_gen = |c: &FieldCtx, x: u32| {
            x != 0
                && c.pow_packed(x, order) == 1
                && order_primes.iter().all(|&r| c.pow_packed(x, order / r) != 1)
        };
        ctx.generator = match generator {
            Some(g) => {
                if g >= size || !is_gen(&ctx, g) {
                    return Err(Error::InvalidContext(format!("{g} is not a generator")));
                }
                g
            }
            None => (1..size)
                .find(|&x| is_gen(&ctx, x))
                .expect("a finite field has a primitive element"),
        };
        if size64 <= TABLE_LIMIT && !force_schoolbook {
            let n = order as usize;
            let mut exp = vec![0u32; 2 * n.max(1)];
            let mut log = vec![0u32; size as usize];
            let mut x = 1u32;
            for i in 0..n {
                exp[i] = x;
                log[x as usize] = i as u32;
                x = ctx.mul_packed(x, ctx.generator);
            }
            for i in n..2 * n {
                exp[i] = exp[i - n];
            }
            let zech = (0..n)
                .map(|d| {
                    let s = ctx.add_packed(1, exp[d]);
                    if s == 0 {
                        0
                    } else {
                        log[s as usize] + 1
                    }
                })
                .collect();
            ctx.tables = Some(Tables { exp, log, zech });
        }
        let minus_one_packed = ctx.neg_packed(1);
        ctx.minus_one = ctx.from_packed(minus_one_packed);
        let mut sub: Vec<Fq2> = (0..size)
            .map(|x| ctx.from_packed(x))
            .filter(|&x| ctx.frobenius(x) == x)
            .collect();
        sub.sort_by_key(|&x| ctx.to_packed(x));
        ctx.subfield = sub;
        Ok(ctx)
    }

    pub fn p(&self) -> u64 {
        self.p as u64
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// q = p^m.
    pub fn q(&self) -> u64 {
        self.q as u64
    }

    /// |F_{q^2}| = q^2.
    pub fn size(&self) -> u64 {
        self.size as u64
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> Fq2 {
        self.from_packed(self.generator)
    }

    pub fn uses_tables(&self) -> bool {
        self.tables.is_some()
    }

    /// The q elements of F_q, sorted by packed encoding.
    pub fn subfield(&self) -> &[Fq2] {
        &self.subfield
    }

    /// All q^2 elements in packed order.
    pub fn elements(&self) -> impl Iterator<Item = Fq2> + '_ {
        (0..self.size).map(move |x| self.from_packed(x))
    }

    #[inline]
    pub fn from_packed(&self, x: u32) -> Fq2 {
        debug_assert!(x < self.size);
        match &self.tables {
            Some(t) if x != 0 => Fq2(t.log[x as usize] + 1),
            _ => Fq2(x),
        }
    }

    #[inline]
    pub fn to_packed(&self, x: Fq2) -> u32 {
        match &self.tables {
            Some(t) if x.0 != 0 => t.exp[(x.0 - 1) as usize],
            _ => x.0,
        }
    }

    /// Embeds an integer through F_p.
    pub fn from_int(&self, k: i64) -> Fq2 {
        self.from_packed(k.rem_euclid(self.p as i64) as u32)
    }

    pub fn coefficients(&self, x: Fq2) -> Vec<u32> {
        let mut v = self.to_packed(x);
        (0..2 * self.m)
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    pub fn from_coefficients(&self, c: &[u32]) -> Result<Fq2> {
        if c.len() > 2 * self.m as usize || c.iter().any(|&d| d >= self.p) {
            return Err(Error::Parse(format!("bad F_q^2 coefficient vector {c:?}")));
        }
        let packed = c.iter().rev().fold(0u32, |acc, &d| acc * self.p + d);
        Ok(self.from_packed(packed))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fq2 {
        self.from_packed(rng.gen_range(0..self.size))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fq2 {
        self.from_packed(rng.gen_range(1..self.size))
    }

    #[inline]
    pub fn add(&self, a: Fq2, b: Fq2) -> Fq2 {
        match &self.tables {
            Some(t) => {
                if a.0 == 0 {
                    return b;
                }
                if b.0 == 0 {
                    return a;
                }
                let n = self.size - 1;
                let (i, j) = (a.0 - 1, b.0 - 1);
                let d = if j >= i { j - i } else { j + n - i };
                let z = t.zech[d as usize];
                if z == 0 {
                    Fq2::ZERO
                } else {
                    let s = i + z - 1;
                    Fq2(if s >= n { s - n } else { s } + 1)
                }
            }
            None => Fq2(self.add_packed(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: Fq2) -> Fq2 {
        if self.p == 2 {
            return a;
        }
        match &self.tables {
            Some(_) => self.mul(a, self.minus_one),
            None => Fq2(self.neg_packed(a.0)),
        }
    }

    #[inline]
    pub fn sub(&self, a: Fq2, b: Fq2) -> Fq2 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq2, b: Fq2) -> Fq2 {
        match &self.tables {
            Some(_) => {
                if a.0 == 0 || b.0 == 0 {
                    return Fq2::ZERO;
                }
                let n = self.size - 1;
                let s = a.0 + b.0 - 2;
                Fq2(if s >= n { s - n } else { s } + 1)
            }
            None => Fq2(self.mul_packed(a.0, b.0)),
        }
    }

    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(&self, a: Fq2) -> Fq2 {
        assert!(!a.is_zero(), "inverse of zero in F_q^2");
        match &self.tables {
            Some(_) => {
                let n = self.size - 1;
                let i = a.0 - 1;
                Fq2(if i == 0 { 0 } else { n - i } + 1)
            }
            None => Fq2(self.pow_packed(a.0, self.size as u64 - 2)),
        }
    }

    #[inline]
    pub fn div(&self, a: Fq2, b: Fq2) -> Fq2 {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Fq2, e: u64) -> Fq2 {
        match &self.tables {
            Some(_) => {
                if a.0 == 0 {
                    return if e == 0 { Fq2::ONE } else { Fq2::ZERO };
                }
                let n = (self.size - 1) as u64;
                Fq2((((a.0 - 1) as u64 * (e % n)) % n) as u32 + 1)
            }
            None => Fq2(self.pow_packed(a.0, e)),
        }
    }

    pub fn pow_big(&self, a: Fq2, e: &BigUint) -> Fq2 {
        let n = BigUint::from(self.size - 1);
        if a.is_zero() {
            return if e.bits() == 0 { Fq2::ONE } else { Fq2::ZERO };
        }
        let r: u64 = (e % &n).try_into().expect("reduced exponent fits");
        self.pow(a, r)
    }

    /// x -> x^q.
    #[inline]
    pub fn frobenius(&self, a: Fq2) -> Fq2 {
        match &self.tables {
            Some(_) => {
                if a.0 == 0 {
                    return a;
                }
                let n = (self.size - 1) as u64;
                Fq2((((a.0 - 1) as u64 * self.q as u64) % n) as u32 + 1)
            }
            None => Fq2(self.pow_packed(a.0, self.q as u64)),
        }
    }

    pub fn is_in_subfield(&self, a: Fq2) -> bool {
        self.frobenius(a) == a
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: Fq2) -> u64 {
        assert!(!a.is_zero());
        let mut ord = (self.size - 1) as u64;
        for (r, e) in factor_u64(ord) {
            for _ in 0..e {
                if self.pow(a, ord / r) == Fq2::ONE {
                    ord /= r;
                } else {
                    break;
                }
            }
        }
        ord
    }

    /// log_generator(a) in Z/(q^2-1), by table lookup or baby-step giant-step.
    pub fn dlog(&self, a: Fq2) -> Option<u64> {
        if a.is_zero() {
            return None;
        }
        match &self.tables {
            Some(_) => Some((a.0 - 1) as u64),
            None => {
                let grp = Fq2Group(self);
                crate::group::bsgs_dlog(
                    &grp,
                    &self.generator(),
                    &a,
                    &BigUint::from(self.size - 1),
                )
                .ok()
                .map(|x| x.try_into().expect("fits"))
            }
        }
    }

    /// Packed-encoding comparison key, used for canonical orderings.
    #[inline]
    pub fn sort_key(&self, a: Fq2) -> u32 {
        self.to_packed(a)
    }

    /// Line-oriented text form: `p`, `m`, `modulus`, `generator` keys.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "p={}", self.p).unwrap();
        writeln!(s, "m={}", self.m).unwrap();
        let coeffs: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
        writeln!(s, "modulus={}", coeffs.join(",")).unwrap();
        writeln!(s, "generator={}", self.generator).unwrap();
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let kv = crate::io::parse_kv(text)?;
        let p: u64 = crate::io::get_parsed(&kv, "p")?;
        let m: u32 = crate::io::get_parsed(&kv, "m")?;
        let modulus = crate::io::parse_u32_list(crate::io::get(&kv, "modulus")?)?;
        let generator: u32 = crate::io::get_parsed(&kv, "generator")?;
        Self::from_parts(p, m, modulus, generator)
    }

    // ---- packed-encoding arithmetic ----

    fn unpack(&self, mut x: u32, out: &mut [u32]) {
        for d in out.iter_mut() {
            *d = x % self.p;
            x /= self.p;
        }
    }

    fn pack(&self, digits: &[u32]) -> u32 {
        digits.iter().rev().fold(0u32, |acc, &d| acc * self.p + d)
    }

    fn add_packed(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        for i in 0..2 * self.m as usize {
            let s = (a % self.p + b % self.p) % self.p;
            out += s * self.pow_p[i];
            a /= self.p;
            b /= self.p;
        }
        out
    }

    fn neg_packed(&self, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        let mut a = a;
        let mut out = 0u32;
        for i in 0..2 * self.m as usize {
            let d = a % self.p;
            out += ((self.p - d) % self.p) * self.pow_p[i];
            a /= self.p;
        }
        out
    }

    fn mul_packed(&self, a: u32, b: u32) -> u32 {
        let n = 2 * self.m as usize;
        let p = self.p as u64;
        let mut da = [0u32; 32];
        let mut db = [0u32; 32];
        self.unpack(a, &mut da[..n]);
        self.unpack(b, &mut db[..n]);
        let mut prod = [0u64; 64];
        for i in 0..n {
            if da[i] == 0 {
                continue;
            }
            for j in 0..n {
                prod[i + j] = (prod[i + j] + da[i] as u64 * db[j] as u64) % p;
            }
        }
        for i in (n..2 * n - 1).rev() {
            let c = prod[i] % p;
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..n {
                let sub = c * self.modulus[j] as u64 % p;
                prod[i - n + j] = (prod[i - n + j] + p - sub) % p;
            }
        }
        let digits: Vec<u32> = prod[..n].iter().map(|&d| (d % p) as u32).collect();
        self.pack(&digits)
    }

    fn pow_packed(&self, mut a: u32, mut e: u64) -> u32 {
        let mut r = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_packed(r, a);
            }
            a = self.mul_packed(a, a);
            e >>= 1;
        }
        r
    }
}

/// F_{q^2}^* as a [`crate::group::Group`].
pub struct Fq2Group<'a>(pub &'a FieldCtx);

impl crate::group::Group for Fq2Group<'_> {
    type Elem = Fq2;

    fn identity(&self) -> Fq2 {
        Fq2::ONE
    }

    fn mul(&self, a: &Fq2, b: &Fq2) -> Fq2 {
        self.0.mul(*a, *b)
    }
}

// ---- small polynomial arithmetic over F_p, used to find the modulus ----

fn fp_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn fp_mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    let p64 = p as u64;
    let n = f.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p64;
        }
    }
    let mut r: Vec<u32> = prod.iter().map(|&x| x as u32).collect();
    fp_rem(&mut r, f, p);
    r.resize(n, 0);
    r
}

/// In-place remainder by a monic polynomial.
fn fp_rem(r: &mut Vec<u32>, f: &[u32], p: u32) {
    let p64 = p as u64;
    let n = f.len() - 1;
    fp_trim(r);
    while r.len() > n {
        let d = r.len() - 1;
        let c = r[d] as u64;
        for j in 0..=n {
            let idx = d - n + j;
            r[idx] = ((r[idx] as u64 + p64 - c * f[j] as u64 % p64) % p64) as u32;
        }
        fp_trim(r);
    }
}

fn fp_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        // make b monic
        let inv = crate::arith::pow_mod_u64(*b.last().unwrap() as u64, p as u64 - 2, p as u64);
        for c in b.iter_mut() {
            *c = (*c as u64 * inv % p as u64) as u32;
        }
        fp_rem(&mut a, &b, p);
        std::mem::swap(&mut a, &mut b);
    }
    a
}

fn fp_x_pow_p_iter(f: &[u32], p: u32, times: usize) -> Vec<u32> {
    let n = f.len() - 1;
    debug_assert!(n >= 2);
    let mut x = vec![0u32; n];
    x[1] = 1;
    for _ in 0..times {
        // x <- x^p mod f
        let mut base = x.clone();
        let mut acc = vec![0u32; n];
        acc[0] = 1;
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = fp_mulmod(&acc, &base, f, p);
            }
            base = fp_mulmod(&base, &base, f, p);
            e >>= 1;
        }
        x = acc;
    }
    x
}

pub(crate) fn fp_is_irreducible(p: u32, f: &[u32]) -> bool {
    let n = f.len() - 1;
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let mut x = vec![0u32; n];
    x[1] = 1;
    let xp = fp_x_pow_p_iter(f, p, n);
    if xp != x {
        return false;
    }
    for (r, _) in factor_u64(n as u64) {
        let h = fp_x_pow_p_iter(f, p, n / r as usize);
        let mut diff = h.clone();
        diff[1] = (diff[1] + p - 1) % p;
        let g = fp_gcd(f, &diff, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

fn find_irreducible_fp(p: u32, degree: usize, seed: u64) -> Vec<u32> {
    let count = (p as u64).pow(degree as u32);
    let start = seed % count;
    for i in 0..count {
        let mut c = (start + i) % count;
        let mut f = Vec::with_capacity(degree + 1);
        for _ in 0..degree {
            f.push((c % p as u64) as u32);
            c /= p as u64;
        }
        f.push(1);
        if fp_is_irreducible(p, &f) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}
