//! Univariate polynomials over F_{q^2}: ring arithmetic, factorization,
//! irreducibility and smoothness tests, and the coefficient-wise Frobenius
//! twist.
//!
//! Polynomials are dense little-endian coefficient vectors, always trimmed so
//! that the leading coefficient is nonzero. They carry no reference to their
//! field; every operation that needs arithmetic takes the [`FieldCtx`].
//!
//! Canonical order (used for factor lists and LogDB keys): by degree, then
//! lexicographically on the packed coefficient encodings, constant term first.

use std::cmp::Ordering;

use num_bigint::BigUint;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Fq2};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<Fq2>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Fq2::ONE)
    }

    pub fn constant(c: Fq2) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// The monic linear polynomial X.
    pub fn x() -> Self {
        Poly::from_coeffs(vec![Fq2::ZERO, Fq2::ONE])
    }

    pub fn monomial(c: Fq2, d: usize) -> Self {
        let mut v = vec![Fq2::ZERO; d + 1];
        v[d] = c;
        Poly::from_coeffs(v)
    }

    /// X - a.
    pub fn linear(ctx: &FieldCtx, a: Fq2) -> Self {
        Poly::from_coeffs(vec![ctx.neg(a), Fq2::ONE])
    }

    pub fn from_coeffs(mut coeffs: Vec<Fq2>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[Fq2] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Fq2::ONE
    }

    /// Degree; the zero polynomial reports 0 (check `is_zero` first).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Fq2 {
        self.coeffs.last().copied().unwrap_or(Fq2::ZERO)
    }

    pub fn coeff(&self, i: usize) -> Fq2 {
        self.coeffs.get(i).copied().unwrap_or(Fq2::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == Fq2::ONE
    }

    pub fn add(&self, other: &Poly, ctx: &FieldCtx) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n)
            .map(|i| ctx.add(self.coeff(i), other.coeff(i)))
            .collect();
        Poly::from_coeffs(v)
    }

    pub fn sub(&self, other: &Poly, ctx: &FieldCtx) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n)
            .map(|i| ctx.sub(self.coeff(i), other.coeff(i)))
            .collect();
        Poly::from_coeffs(v)
    }

    pub fn neg(&self, ctx: &FieldCtx) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&c| ctx.neg(c)).collect())
    }

    pub fn scale(&self, c: Fq2, ctx: &FieldCtx) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::from_coeffs(self.coeffs.iter().map(|&a| ctx.mul(a, c)).collect())
    }

    /// self += c * other (in place).
    pub fn add_scaled(&mut self, other: &Poly, c: Fq2, ctx: &FieldCtx) {
        if c.is_zero() {
            return;
        }
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), Fq2::ZERO);
        }
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = ctx.add(*a, ctx.mul(b, c));
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn mul(&self, other: &Poly, ctx: &FieldCtx) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![Fq2::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                v[i + j] = ctx.add(v[i + j], ctx.mul(a, b));
            }
        }
        Poly::from_coeffs(v)
    }

    pub fn square(&self, ctx: &FieldCtx) -> Poly {
        self.mul(self, ctx)
    }

    pub fn pow(&self, e: u64, ctx: &FieldCtx) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, ctx);
            }
            e >>= 1;
            if e > 0 {
                base = base.square(ctx);
            }
        }
        acc
    }

    /// Quotient and remainder.
    pub fn divrem(&self, divisor: &Poly, ctx: &FieldCtx) -> Result<(Poly, Poly)> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZeroPoly);
        }
        if self.coeffs.len() < divisor.coeffs.len() {
            return Ok((Poly::zero(), self.clone()));
        }
        let dn = divisor.degree();
        let inv_lead = ctx.inv(divisor.lead());
        let mut r = self.coeffs.clone();
        let mut q = vec![Fq2::ZERO; r.len() - dn];
        for i in (dn..r.len()).rev() {
            let c = r[i];
            if c.is_zero() {
                continue;
            }
            let t = ctx.mul(c, inv_lead);
            q[i - dn] = t;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                r[i - dn + j] = ctx.sub(r[i - dn + j], ctx.mul(t, d));
            }
        }
        r.truncate(dn);
        Ok((Poly::from_coeffs(q), Poly::from_coeffs(r)))
    }

    pub fn rem(&self, divisor: &Poly, ctx: &FieldCtx) -> Result<Poly> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZeroPoly);
        }
        if self.coeffs.len() < divisor.coeffs.len() {
            return Ok(self.clone());
        }
        let dn = divisor.degree();
        let inv_lead = ctx.inv(divisor.lead());
        let mut r = self.coeffs.clone();
        for i in (dn..r.len()).rev() {
            let c = r[i];
            if c.is_zero() {
                continue;
            }
            let t = ctx.mul(c, inv_lead);
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                r[i - dn + j] = ctx.sub(r[i - dn + j], ctx.mul(t, d));
            }
        }
        r.truncate(dn);
        Ok(Poly::from_coeffs(r))
    }

    /// Exact division; panics if `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Poly, ctx: &FieldCtx) -> Poly {
        let (q, r) = self.divrem(divisor, ctx).expect("nonzero divisor");
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn mulmod(&self, other: &Poly, modulus: &Poly, ctx: &FieldCtx) -> Poly {
        self.mul(other, ctx).rem(modulus, ctx).expect("nonzero modulus")
    }

    pub fn powmod(&self, e: &BigUint, modulus: &Poly, ctx: &FieldCtx) -> Result<Poly> {
        if modulus.is_zero() {
            return Err(Error::DivisionByZeroPoly);
        }
        let base = self.rem(modulus, ctx)?;
        let mut acc = Poly::one().rem(modulus, ctx)?;
        for i in (0..e.bits()).rev() {
            acc = acc.mulmod(&acc, modulus, ctx);
            if e.bit(i) {
                acc = acc.mulmod(&base, modulus, ctx);
            }
        }
        Ok(acc)
    }

    /// Monic gcd (zero only if both inputs are zero).
    pub fn gcd(&self, other: &Poly, ctx: &FieldCtx) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b, ctx).expect("nonzero");
            a = b;
            b = r;
        }
        a.monic(ctx)
    }

    /// Inverse modulo `modulus`, if gcd(self, modulus) = 1.
    pub fn invmod(&self, modulus: &Poly, ctx: &FieldCtx) -> Option<Poly> {
        // extended Euclid tracking the coefficient of self
        let mut r0 = modulus.clone();
        let mut r1 = self.rem(modulus, ctx).ok()?;
        let mut s0 = Poly::zero();
        let mut s1 = Poly::one();
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1, ctx).ok()?;
            let s = s0.sub(&q.mul(&s1, ctx), ctx);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.degree() != 0 || r0.is_zero() {
            return None;
        }
        let inv = ctx.inv(r0.lead());
        Some(s0.scale(inv, ctx).rem(modulus, ctx).ok()?)
    }

    pub fn eval(&self, x: Fq2, ctx: &FieldCtx) -> Fq2 {
        self.coeffs
            .iter()
            .rev()
            .fold(Fq2::ZERO, |acc, &c| ctx.add(ctx.mul(acc, x), c))
    }

    pub fn derivative(&self, ctx: &FieldCtx) -> Poly {
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| ctx.mul(c, ctx.from_int(i as i64)))
            .collect();
        Poly::from_coeffs(v)
    }

    pub fn monic(&self, ctx: &FieldCtx) -> Poly {
        if self.is_zero() || self.is_monic() {
            return self.clone();
        }
        self.scale(ctx.inv(self.lead()), ctx)
    }

    /// Coefficient-wise Frobenius a -> a^q.
    pub fn frobenius_twist(&self, ctx: &FieldCtx) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&c| ctx.frobenius(c)).collect())
    }

    /// h1^D * P(h0/h1) with D = deg P, as a polynomial.
    pub fn homogenize(&self, h0: &Poly, h1: &Poly, ctx: &FieldCtx) -> Poly {
        let d = self.degree();
        let mut h0_pows = vec![Poly::one()];
        let mut h1_pows = vec![Poly::one()];
        for i in 1..=d {
            h0_pows.push(h0_pows[i - 1].mul(h0, ctx));
            h1_pows.push(h1_pows[i - 1].mul(h1, ctx));
        }
        let mut acc = Poly::zero();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc.add_scaled(&h0_pows[i].mul(&h1_pows[d - i], ctx), c, ctx);
        }
        acc
    }

    pub fn canonical_cmp(&self, other: &Poly, ctx: &FieldCtx) -> Ordering {
        self.coeffs.len().cmp(&other.coeffs.len()).then_with(|| {
            for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
                let o = ctx.sort_key(*a).cmp(&ctx.sort_key(*b));
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
    }

    /// Comma-separated packed coefficient encodings, constant term first.
    pub fn to_text(&self, ctx: &FieldCtx) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.coeffs
            .iter()
            .map(|&c| ctx.to_packed(c).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_text(s: &str, ctx: &FieldCtx) -> Result<Poly> {
        let vals = crate::io::parse_u32_list(s.trim())?;
        let mut v = Vec::with_capacity(vals.len());
        for x in vals {
            if x as u64 >= ctx.size() {
                return Err(Error::Parse(format!("{x} is not an element of F_q^2")));
            }
            v.push(ctx.from_packed(x));
        }
        Ok(Poly::from_coeffs(v))
    }

    pub fn random_monic<R: Rng + ?Sized>(degree: usize, ctx: &FieldCtx, rng: &mut R) -> Poly {
        let mut v: Vec<Fq2> = (0..degree).map(|_| ctx.random(rng)).collect();
        v.push(Fq2::ONE);
        Poly::from_coeffs(v)
    }

    pub fn random_monic_irreducible<R: Rng + ?Sized>(
        degree: usize,
        ctx: &FieldCtx,
        rng: &mut R,
    ) -> Poly {
        loop {
            let p = Poly::random_monic(degree, ctx, rng);
            if is_irreducible(&p, ctx) {
                return p;
            }
        }
    }
}

/// The Q-power map (Q = q^2) on F_{q^2}[X]/(f), stored as the images of the
/// monomial basis. h^Q = sum_j h_j X^{jQ} because the coefficients are fixed
/// by x -> x^Q.
pub struct FrobeniusMap {
    modulus: Poly,
    images: Vec<Poly>,
}

impl FrobeniusMap {
    pub fn new(modulus: &Poly, ctx: &FieldCtx) -> Self {
        let n = modulus.degree();
        let xq = Poly::x()
            .powmod(&BigUint::from(ctx.size()), modulus, ctx)
            .expect("nonzero modulus");
        let mut images = Vec::with_capacity(n);
        let mut cur = Poly::one().rem(modulus, ctx).expect("nonzero modulus");
        for _ in 0..n {
            images.push(cur.clone());
            cur = cur.mulmod(&xq, modulus, ctx);
        }
        FrobeniusMap {
            modulus: modulus.clone(),
            images,
        }
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    /// h^Q mod f for h already reduced mod f.
    pub fn apply(&self, h: &Poly, ctx: &FieldCtx) -> Poly {
        let n = self.modulus.degree();
        let mut acc = vec![Fq2::ZERO; n];
        for (j, &c) in h.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (k, &b) in self.images[j].coeffs().iter().enumerate() {
                acc[k] = ctx.add(acc[k], ctx.mul(b, c));
            }
        }
        Poly::from_coeffs(acc)
    }
}

/// unit * prod factor^mult, factors monic irreducible, distinct, canonically
/// sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: Fq2,
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    pub fn product(&self, ctx: &FieldCtx) -> Poly {
        let mut acc = Poly::constant(self.unit);
        for (f, e) in &self.factors {
            acc = acc.mul(&f.pow(*e as u64, ctx), ctx);
        }
        acc
    }

    pub fn max_degree(&self) -> usize {
        self.factors.iter().map(|(f, _)| f.degree()).max().unwrap_or(0)
    }

    pub fn factor_count(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    fn normalize(unit: Fq2, mut raw: Vec<(Poly, u32)>, ctx: &FieldCtx) -> Self {
        raw.sort_by(|a, b| a.0.canonical_cmp(&b.0, ctx));
        let mut factors: Vec<(Poly, u32)> = Vec::with_capacity(raw.len());
        for (f, e) in raw {
            match factors.last_mut() {
                Some((g, m)) if *g == f => *m += e,
                _ => factors.push((f, e)),
            }
        }
        Factorization { unit, factors }
    }
}

/// Squarefree decomposition of a monic polynomial: pairs (s_i, i) with
/// f = prod s_i^i, each s_i squarefree (pieces may share no factor).
pub fn squarefree_decomposition(f: &Poly, ctx: &FieldCtx) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    if f.degree() == 0 {
        return out;
    }
    let df = f.derivative(ctx);
    if df.is_zero() {
        let root = pth_root(f, ctx);
        let p = ctx.p() as u32;
        for (g, e) in squarefree_decomposition(&root, ctx) {
            out.push((g, e * p));
        }
        return out;
    }
    let mut c = f.gcd(&df, ctx);
    let mut w = f.div_exact(&c, ctx);
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c, ctx);
        let fac = w.div_exact(&y, ctx);
        if !fac.is_one() {
            out.push((fac, i));
        }
        w = y;
        c = c.div_exact(&w, ctx);
        i += 1;
    }
    if !c.is_one() {
        let root = pth_root(&c, ctx);
        let p = ctx.p() as u32;
        for (g, e) in squarefree_decomposition(&root, ctx) {
            out.push((g, e * p));
        }
    }
    out
}

/// g with g^p = f, for f whose exponents are all multiples of p.
fn pth_root(f: &Poly, ctx: &FieldCtx) -> Poly {
    let p = ctx.p() as usize;
    let e = ctx.size() / ctx.p();
    let v = f
        .coeffs()
        .iter()
        .step_by(p)
        .map(|&c| ctx.pow(c, e))
        .collect();
    Poly::from_coeffs(v)
}

/// Distinct-degree factorization of a squarefree monic polynomial: pairs
/// (d, product of all irreducible factors of degree d).
pub fn distinct_degree(f: &Poly, ctx: &FieldCtx) -> Vec<(usize, Poly)> {
    let mut out = Vec::new();
    if f.degree() == 0 {
        return out;
    }
    let frob = FrobeniusMap::new(f, ctx);
    let x = Poly::x().rem(f, ctx).unwrap();
    let mut h = x.clone();
    let mut rest = f.clone();
    let mut i = 0;
    while rest.degree() >= 2 * (i + 1) {
        i += 1;
        h = frob.apply(&h, ctx);
        let hr = h.rem(&rest, ctx).unwrap();
        let g = rest.gcd(&hr.sub(&Poly::x(), ctx), ctx);
        if !g.is_one() {
            rest = rest.div_exact(&g, ctx);
            out.push((i, g));
        }
    }
    if rest.degree() > 0 {
        out.push((rest.degree(), rest));
    }
    out
}

/// Splits a squarefree monic product of irreducibles of degree `d`.
pub fn equal_degree<R: Rng + ?Sized>(f: &Poly, d: usize, ctx: &FieldCtx, rng: &mut R) -> Vec<Poly> {
    let n = f.degree();
    if n == d {
        return vec![f.clone()];
    }
    if n == 0 {
        return Vec::new();
    }
    let frob = FrobeniusMap::new(f, ctx);
    loop {
        let r = Poly::from_coeffs((0..n).map(|_| ctx.random(rng)).collect());
        if r.degree() == 0 {
            continue;
        }
        let s = if ctx.p() == 2 {
            // absolute trace to F_2: sum of r^(2^i), i < 2m*d
            let mut t = r.clone();
            let mut acc = r.clone();
            for _ in 1..(2 * ctx.m() as usize * d) {
                t = t.mulmod(&t, f, ctx);
                acc = acc.add(&t, ctx);
            }
            acc
        } else {
            // r^((Q^d - 1)/2) = (prod_{j<d} r^{Q^j})^((Q-1)/2)
            let mut t = r.clone();
            let mut norm = r.clone();
            for _ in 1..d {
                t = frob.apply(&t, ctx);
                norm = norm.mulmod(&t, f, ctx);
            }
            let e = BigUint::from((ctx.size() - 1) / 2);
            norm.powmod(&e, f, ctx)
                .unwrap()
                .sub(&Poly::one(), ctx)
        };
        let g = f.gcd(&s, ctx);
        if g.degree() > 0 && g.degree() < n {
            let h = f.div_exact(&g, ctx);
            let mut out = equal_degree(&g, d, ctx, rng);
            out.extend(equal_degree(&h, d, ctx, rng));
            return out;
        }
    }
}

/// Complete factorization: squarefree decomposition, distinct-degree
/// splitting, then randomized equal-degree splitting.
pub fn factor<R: Rng + ?Sized>(f: &Poly, ctx: &FieldCtx, rng: &mut R) -> Factorization {
    assert!(!f.is_zero(), "cannot factor the zero polynomial");
    let unit = f.lead();
    let monic = f.monic(ctx);
    let mut raw = Vec::new();
    for (s, mult) in squarefree_decomposition(&monic, ctx) {
        for (d, part) in distinct_degree(&s, ctx) {
            for g in equal_degree(&part, d, ctx, rng) {
                raw.push((g, mult));
            }
        }
    }
    let fact = Factorization::normalize(unit, raw, ctx);
    debug_assert_eq!(fact.product(ctx), *f);
    fact
}

/// Factorization of `f` if every irreducible factor has degree <= `bound`,
/// otherwise `None`. Factors of degree i are stripped for i = 1..bound using
/// gcds with X^(Q^i) - X; the test aborts as soon as the cofactor is provably
/// not smooth.
pub fn smooth_factor<R: Rng + ?Sized>(
    f: &Poly,
    bound: usize,
    ctx: &FieldCtx,
    rng: &mut R,
) -> Option<Factorization> {
    assert!(!f.is_zero(), "cannot factor the zero polynomial");
    if f.degree() <= bound {
        return Some(factor(f, ctx, rng));
    }
    if !is_smooth(f, bound, ctx) {
        return None;
    }
    Some(factor(f, ctx, rng))
}

/// The early-abort smoothness decision used by [`smooth_factor`].
pub fn is_smooth(f: &Poly, bound: usize, ctx: &FieldCtx) -> bool {
    if f.degree() <= bound {
        return true;
    }
    let f0 = f.monic(ctx);
    let frob = FrobeniusMap::new(&f0, ctx);
    let x = Poly::x();
    let mut h = x.rem(&f0, ctx).unwrap();
    let mut rest = f0;
    for i in 1..=bound {
        h = frob.apply(&h, ctx);
        let hr = h.rem(&rest, ctx).unwrap();
        let mut g = rest.gcd(&hr.sub(&x, ctx), ctx);
        while !g.is_one() {
            rest = rest.div_exact(&g, ctx);
            g = rest.gcd(&g, ctx);
        }
        let n = rest.degree();
        if n == 0 {
            return true;
        }
        // every remaining factor has degree > i
        if n < 2 * (i + 1) {
            return n <= bound;
        }
    }
    false
}

/// Rabin's irreducibility test.
pub fn is_irreducible(f: &Poly, ctx: &FieldCtx) -> bool {
    let n = f.degree();
    if f.is_zero() || n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let f = f.monic(ctx);
    let frob = FrobeniusMap::new(&f, ctx);
    let x = Poly::x().rem(&f, ctx).unwrap();
    let mut powers = Vec::with_capacity(n);
    let mut h = x.clone();
    for _ in 0..n {
        h = frob.apply(&h, ctx);
        powers.push(h.clone());
    }
    if powers[n - 1] != x {
        return false;
    }
    crate::arith::factor_u64(n as u64).iter().all(|&(r, _)| {
        let hk = &powers[n / r as usize - 1];
        f.gcd(&hk.sub(&x, ctx), ctx).is_one()
    })
}

/// Degrees of the irreducible factors (with multiplicity), without the
/// equal-degree splitting step.
pub fn factor_degrees(f: &Poly, ctx: &FieldCtx) -> Vec<usize> {
    let mut out = Vec::new();
    for (s, mult) in squarefree_decomposition(&f.monic(ctx), ctx) {
        for (d, part) in distinct_degree(&s, ctx) {
            for _ in 0..(part.degree() / d) * mult as usize {
                out.push(d);
            }
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(ctx: &FieldCtx, c: &[i64]) -> Poly {
        Poly::from_coeffs(c.iter().map(|&x| ctx.from_int(x)).collect())
    }

    #[test]
    fn basic_arithmetic() {
        let f9 = FieldCtx::new(3, 1, 0).unwrap();
        let a = p(&f9, &[-1, 0, 1]);
        let b = p(&f9, &[-1, 1]);
        assert_eq!(a.gcd(&b, &f9), b);
        let x3 = p(&f9, &[0, 0, 0, 1]);
        let (q, r) = x3.divrem(&Poly::x(), &f9).unwrap();
        assert_eq!(q, p(&f9, &[0, 0, 1]));
        assert!(r.is_zero());
        assert!(matches!(a.divrem(&Poly::zero(), &f9), Err(Error::DivisionByZeroPoly)));
    }

    #[test]
    fn irreducibility_examples() {
        let f9 = FieldCtx::new(3, 1, 0).unwrap();
        assert!(!is_irreducible(&p(&f9, &[1, 0, 1]), &f9));
        assert!(is_irreducible(&p(&f9, &[2, 1]), &f9));
        // monic irreducible quadratics over F_4: (16 - 4)/2 = 6
        let f4 = FieldCtx::new(2, 1, 0).unwrap();
        let mut count = 0;
        for a in f4.elements() {
            for b in f4.elements() {
                if is_irreducible(&Poly::from_coeffs(vec![b, a, Fq2::ONE]), &f4) {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 6);
    }

    #[test]
    fn systematic_equation_over_f4() {
        // X^4 - X over F_4 is the product of the four linear factors X - a
        let f4 = FieldCtx::new(2, 1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = Poly::monomial(Fq2::ONE, 4).sub(&Poly::x(), &f4);
        let fact = factor(&f, &f4, &mut rng);
        assert_eq!(fact.factors.len(), 4);
        let roots: Vec<Poly> = f4.elements().map(|a| Poly::linear(&f4, a)).collect();
        for (g, e) in &fact.factors {
            assert_eq!(*e, 1);
            assert!(roots.contains(g));
        }
    }

    #[test]
    fn factor_constant_and_products() {
        let ctx = FieldCtx::new(5, 1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = Poly::constant(ctx.from_int(3));
        let fact = factor(&c, &ctx, &mut rng);
        assert!(fact.factors.is_empty());
        assert_eq!(fact.unit, ctx.from_int(3));

        for trial in 0..20 {
            let mut known = Vec::new();
            let mut prod = Poly::constant(ctx.random_nonzero(&mut rng));
            for _ in 0..5 {
                let d = rng.gen_range(1..=4);
                let g = Poly::random_monic_irreducible(d, &ctx, &mut rng);
                let e = rng.gen_range(1..=3);
                prod = prod.mul(&g.pow(e, &ctx), &ctx);
                known.push((g, e as u32));
            }
            let fact = factor(&prod, &ctx, &mut rng);
            assert_eq!(fact.product(&ctx), prod, "trial {trial}");
            let expected = Factorization::normalize(prod.lead(), known, &ctx);
            assert_eq!(fact, expected);
        }
    }

    #[test]
    fn characteristic_two_and_p_powers() {
        let ctx = FieldCtx::new(2, 2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let a = Poly::random_monic(rng.gen_range(1..6), &ctx, &mut rng);
            let b = Poly::random_monic(rng.gen_range(1..6), &ctx, &mut rng);
            // squares and p-th powers exercise the derivative-zero branch
            let f = a.square(&ctx).mul(&b, &ctx).mul(&a.pow(4, &ctx), &ctx);
            let fact = factor(&f, &ctx, &mut rng);
            assert_eq!(fact.product(&ctx), f);
            for (g, _) in &fact.factors {
                assert!(is_irreducible(g, &ctx));
            }
        }
    }

    #[test]
    fn smooth_examples() {
        let f9 = FieldCtx::new(3, 1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let split = p(&f9, &[-1, 1]).mul(&p(&f9, &[-2, 1]), &f9);
        assert!(smooth_factor(&split, 1, &f9, &mut rng).is_some());
        let q = Poly::random_monic_irreducible(2, &f9, &mut rng);
        assert!(smooth_factor(&q, 1, &f9, &mut rng).is_none());
    }

    #[test]
    fn smoothness_agrees_with_factorization() {
        let ctx = FieldCtx::new(3, 2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let n = rng.gen_range(1..12);
            let f = Poly::random_monic(n, &ctx, &mut rng);
            let full = factor(&f, &ctx, &mut rng);
            assert!(smooth_factor(&f, f.degree(), &ctx, &mut rng).is_some());
            for b in 1..=n {
                let s = smooth_factor(&f, b, &ctx, &mut rng);
                assert_eq!(s.is_some(), full.max_degree() <= b);
                if let Some(s) = s {
                    assert_eq!(s, full);
                }
            }
        }
    }

    #[test]
    fn twist_properties() {
        let ctx = FieldCtx::new(7, 1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sub: Vec<Fq2> = ctx.subfield().to_vec();
        let fq_poly = Poly::from_coeffs((0..6).map(|i| sub[(i * 3) % sub.len()]).collect());
        assert_eq!(fq_poly.frobenius_twist(&ctx), fq_poly);
        for _ in 0..50 {
            let f = Poly::random_monic(7, &ctx, &mut rng);
            assert_eq!(f.frobenius_twist(&ctx).frobenius_twist(&ctx), f);
            let c = ctx.random(&mut rng);
            let cx = Poly::monomial(c, 1);
            assert_eq!(cx.frobenius_twist(&ctx), Poly::monomial(ctx.pow(c, ctx.q()), 1));
        }
    }

    #[test]
    fn text_round_trip() {
        let ctx = FieldCtx::new(3, 2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = Poly::random_monic(5, &ctx, &mut rng);
        assert_eq!(Poly::from_text(&f.to_text(&ctx), &ctx).unwrap(), f);
    }

    #[test]
    fn invmod_and_factor_degrees() {
        let ctx = FieldCtx::new(5, 1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = Poly::random_monic_irreducible(5, &ctx, &mut rng);
        let a = Poly::random_monic(3, &ctx, &mut rng);
        let inv = a.invmod(&m, &ctx).unwrap();
        assert!(a.mulmod(&inv, &m, &ctx).is_one());
        let f = Poly::random_monic(9, &ctx, &mut rng);
        let fact = factor(&f, &ctx, &mut rng);
        let mut degs: Vec<usize> = fact
            .factors
            .iter()
            .flat_map(|(g, e)| std::iter::repeat(g.degree()).take(*e as usize))
            .collect();
        degs.sort_unstable();
        assert_eq!(factor_degrees(&f, &ctx), degs);
    }
}
