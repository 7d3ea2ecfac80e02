//! Sparse medium-subfield representations of F_{q^{2k}}: a degree-k
//! irreducible factor phi of h1*X^q - h0 with h0, h1 of tiny degree, plus
//! everything needed to take logarithms in it (group order, generator,
//! subgroup modulus, constant logs).

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use crate::arith::{factor_q_power_minus_one, inv_mod_biguint, FactorBudget, PartialFactorization};
use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Fq2};
use crate::io;
use crate::poly::{factor, factor_degrees, is_irreducible, Poly};
use crate::rng::SeedSplitter;

/// Which search family produced a representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepFamily {
    /// h1 = 1, h0 = -(X^2 + a).
    Quadratic,
    /// h1 = 1, h0 of degree <= 2, enumerated.
    Exhaustive,
    /// random coprime pairs of degree <= delta_max.
    Random,
    /// supplied by the caller.
    Given,
}

impl RepFamily {
    pub fn name(self) -> &'static str {
        match self {
            RepFamily::Quadratic => "quadratic",
            RepFamily::Exhaustive => "exhaustive",
            RepFamily::Random => "random",
            RepFamily::Given => "given",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "quadratic" => RepFamily::Quadratic,
            "exhaustive" => RepFamily::Exhaustive,
            "random" => RepFamily::Random,
            "given" => RepFamily::Given,
            _ => return Err(Error::Parse(format!("unknown representation family {s}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchStrategy {
    /// quadratic family, then exhaustive, then random.
    Scan,
    /// random pairs only.
    Random,
}

#[derive(Clone, Debug)]
pub struct RepSearch {
    pub k: usize,
    pub delta_max: usize,
    pub strategy: SearchStrategy,
    pub seed: u64,
    /// candidate budget for each of the exhaustive and random families.
    pub max_candidates: u64,
}

impl RepSearch {
    pub fn new(k: usize) -> Self {
        RepSearch {
            k,
            delta_max: 2,
            strategy: SearchStrategy::Scan,
            seed: 0,
            max_candidates: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SparseRep {
    pub ctx: FieldCtx,
    pub k: usize,
    pub h0: Poly,
    pub h1: Poly,
    pub delta: usize,
    pub phi: Poly,
    /// other irreducible factors of h1*X^q - h0, with multiplicity.
    pub traps: Vec<(Poly, u32)>,
    pub family: RepFamily,
}

/// h1*X^q - h0.
pub fn defining_poly(ctx: &FieldCtx, h0: &Poly, h1: &Poly) -> Poly {
    let xq = Poly::monomial(Fq2::ONE, ctx.q() as usize);
    h1.mul(&xq, ctx).sub(h0, ctx)
}

fn poly_degree(p: &Poly) -> usize {
    if p.is_zero() {
        0
    } else {
        p.degree()
    }
}

impl SparseRep {
    /// Builds a representation from h0, h1, choosing phi as the canonically
    /// first degree-k factor. Returns `None` if there is no such factor.
    pub fn from_pair<R: Rng + ?Sized>(
        ctx: &FieldCtx,
        k: usize,
        h0: &Poly,
        h1: &Poly,
        family: RepFamily,
        rng: &mut R,
    ) -> Result<Option<SparseRep>> {
        if h1.is_zero() {
            return Err(Error::InvalidContext("h1 must be nonzero".into()));
        }
        if !h0.gcd(h1, ctx).is_one() {
            return Err(Error::InvalidContext("gcd(h0, h1) must be 1".into()));
        }
        let f = defining_poly(ctx, h0, h1);
        if !factor_degrees(&f, ctx).contains(&k) {
            return Ok(None);
        }
        let fact = factor(&f, ctx, rng);
        let pos = fact
            .factors
            .iter()
            .position(|(g, _)| g.degree() == k)
            .expect("degree pattern promised a degree-k factor");
        let mut factors = fact.factors;
        let (phi, mult) = factors.remove(pos);
        if mult > 1 {
            // phi must be a simple factor; keep the extra copies as traps
            factors.push((phi.clone(), mult - 1));
            factors.sort_by(|a, b| a.0.canonical_cmp(&b.0, ctx));
        }
        Ok(Some(SparseRep {
            ctx: ctx.clone(),
            k,
            h0: h0.clone(),
            h1: h1.clone(),
            delta: poly_degree(h0).max(poly_degree(h1)),
            phi,
            traps: factors,
            family,
        }))
    }

    pub fn q(&self) -> u64 {
        self.ctx.q()
    }

    pub fn defining_poly(&self) -> Poly {
        defining_poly(&self.ctx, &self.h0, &self.h1)
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let ctx = &self.ctx;
        let bad = |m: &str| Err(Error::InvalidContext(m.to_string()));
        if self.phi.degree() != self.k || !self.phi.is_monic() || !is_irreducible(&self.phi, ctx) {
            return bad("phi is not monic irreducible of degree k");
        }
        if !self.h0.gcd(&self.h1, ctx).is_one() {
            return bad("gcd(h0, h1) != 1");
        }
        let f = self.defining_poly();
        let mut prod = Poly::constant(f.lead()).mul(&self.phi, ctx);
        for (t, e) in &self.traps {
            if !is_irreducible(t, ctx) || !t.is_monic() {
                return bad("trap is not monic irreducible");
            }
            if t.degree() >= 1 && self.h1.rem(t, ctx)?.is_zero() {
                return bad("trap divides h1");
            }
            prod = prod.mul(&t.pow(*e as u64, ctx), ctx);
        }
        if prod != f {
            return bad("unit * phi * traps does not rebuild h1*X^q - h0");
        }
        if self.k as u64 > self.q() + self.delta as u64 {
            return bad("k exceeds q + delta");
        }
        Ok(())
    }

    /// Element of F_{q^{2k}} = F_{q^2}[X]/(phi).
    pub fn reduce(&self, a: &Poly) -> Poly {
        a.rem(&self.phi, &self.ctx).expect("phi is nonzero")
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        a.mulmod(b, &self.phi, &self.ctx)
    }

    pub fn pow(&self, a: &Poly, e: &BigUint) -> Poly {
        a.powmod(e, &self.phi, &self.ctx).expect("phi is nonzero")
    }

    pub fn inv(&self, a: &Poly) -> Option<Poly> {
        a.invmod(&self.phi, &self.ctx)
    }

    pub fn order(&self) -> BigUint {
        BigUint::from(self.ctx.size()).pow(self.k as u32) - 1u32
    }

    pub fn is_trap(&self, p: &Poly) -> bool {
        self.traps.iter().any(|(t, _)| t == p)
    }
}

/// Searches for a representation of F_{q^{2k}}; see [`RepSearch`].
pub fn find_sparse_rep(ctx: &FieldCtx, search: &RepSearch) -> Result<SparseRep> {
    let q = ctx.q();
    let k = search.k;
    if k == 0 || k as u64 > q + search.delta_max as u64 {
        return Err(Error::DegreeConstraint {
            k,
            q,
            delta: search.delta_max,
        });
    }
    let seeds = SeedSplitter::new(search.seed);
    let mut rng = seeds.stream("rep-factor");
    let mut tried = 0u64;
    let one = Poly::one();

    if search.strategy == SearchStrategy::Scan {
        if search.delta_max >= 2 {
            for a in ctx.elements() {
                tried += 1;
                let h0 = Poly::from_coeffs(vec![a, Fq2::ZERO, Fq2::ONE]).neg(ctx);
                if let Some(rep) = SparseRep::from_pair(ctx, k, &h0, &one, RepFamily::Quadratic, &mut rng)? {
                    return Ok(rep);
                }
            }
        }
        let d = search.delta_max.min(2);
        let size = ctx.size();
        let total = size.saturating_pow(d as u32 + 1);
        for idx in 0..total.min(search.max_candidates) {
            let mut v = Vec::with_capacity(d + 1);
            let mut x = idx;
            for _ in 0..=d {
                v.push(ctx.from_packed((x % size) as u32));
                x /= size;
            }
            let h0 = Poly::from_coeffs(v);
            if h0.is_zero() {
                continue;
            }
            tried += 1;
            if let Some(rep) = SparseRep::from_pair(ctx, k, &h0, &one, RepFamily::Exhaustive, &mut rng)? {
                return Ok(rep);
            }
        }
    }

    let mut pick = seeds.stream("rep-random");
    let rand_poly = |rng: &mut _| {
        Poly::from_coeffs((0..=search.delta_max).map(|_| ctx.random(rng)).collect())
    };
    for _ in 0..search.max_candidates {
        let h0 = rand_poly(&mut pick);
        let h1 = rand_poly(&mut pick);
        if h1.is_zero() || h0.is_zero() || !h0.gcd(&h1, ctx).is_one() {
            continue;
        }
        tried += 1;
        let h1 = h1.monic(ctx);
        if let Some(rep) = SparseRep::from_pair(ctx, k, &h0, &h1, RepFamily::Random, &mut rng)? {
            return Ok(rep);
        }
    }
    Err(Error::NoRepresentationFound { tried })
}

/// Factorization of q^{2k} - 1 within the given budget.
pub fn factor_group_order(rep: &SparseRep, budget: &FactorBudget) -> Result<Vec<(BigUint, u32)>> {
    let part = factor_q_power_minus_one(rep.q(), 2 * rep.k as u64, budget);
    debug_assert_eq!(part.product(), rep.order());
    if !part.is_complete() {
        return Err(Error::FactorizationTimeout { partial: part });
    }
    Ok(part.primes.into_iter().collect())
}

#[derive(Clone, Debug)]
pub struct LogContext {
    pub rep: SparseRep,
    pub ell: BigUint,
    pub order: BigUint,
    pub cofactor: BigUint,
    pub generator: Poly,
    /// Known prime factorization of the order, possibly with composite
    /// leftovers when the factoring budget ran out.
    pub factorization: PartialFactorization,
    pub warnings: Vec<String>,
    /// generator^cofactor, a generator of the order-l subgroup.
    g_sub: Poly,
    /// generator^(order/(q^2-1)) as an element of F_{q^2}.
    g_const: Fq2,
}

impl LogContext {
    /// Factors the order (possibly partially), picks l (default: the largest
    /// certified prime factor) and the first generator candidate in the order
    /// X + c, X^2 + ..., passing every known prime-order test.
    pub fn new(rep: SparseRep, ell: Option<BigUint>, budget: &FactorBudget) -> Result<Self> {
        let factorization = factor_q_power_minus_one(rep.q(), 2 * rep.k as u64, budget);
        Self::with_factorization(rep, ell, factorization)
    }

    pub fn with_factorization(
        rep: SparseRep,
        ell: Option<BigUint>,
        factorization: PartialFactorization,
    ) -> Result<Self> {
        let order = rep.order();
        if factorization.product() != order {
            return Err(Error::InconsistentOrder);
        }
        let ell = match ell {
            Some(l) => {
                if !factorization.primes.contains_key(&l) {
                    return Err(Error::BadModulus(l));
                }
                l
            }
            None => factorization
                .primes
                .keys()
                .next_back()
                .cloned()
                .ok_or(Error::InconsistentOrder)?,
        };
        let generator = find_generator(&rep, &order, &factorization)?;
        Self::assemble(rep, ell, generator, factorization)
    }

    fn assemble(
        rep: SparseRep,
        ell: BigUint,
        generator: Poly,
        factorization: PartialFactorization,
    ) -> Result<Self> {
        let order = rep.order();
        let cofactor = &order / &ell;
        if !(&order % &ell).is_zero() {
            return Err(Error::BadModulus(ell));
        }
        let g_sub = rep.pow(&generator, &cofactor);
        if g_sub.is_one() {
            return Err(Error::InconsistentOrder);
        }
        let qq = BigUint::from(rep.ctx.size());
        let gc = rep.pow(&generator, &(&order / (&qq - 1u32)));
        if gc.degree() != 0 || gc.is_zero() {
            return Err(Error::InconsistentOrder);
        }
        let g_const = gc.coeff(0);
        let mut warnings = Vec::new();
        let q = BigUint::from(rep.q());
        let q3q = q.pow(3) - &q;
        if (&q3q % &ell).is_zero() {
            warnings.push(format!("l = {ell} divides q^3 - q"));
        }
        if ell <= q {
            warnings.push(format!("l = {ell} is not larger than q"));
        }
        if !factorization.is_complete() {
            warnings.push(format!(
                "group order only partially factored ({} composite cofactors)",
                factorization.unfactored.len()
            ));
        }
        if rep.delta > 2 {
            warnings.push(format!("delta = {} > 2: trap descent may loop", rep.delta));
        }
        Ok(LogContext {
            rep,
            ell,
            order,
            cofactor,
            generator,
            factorization,
            warnings,
            g_sub,
            g_const,
        })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.rep.ctx
    }

    pub fn order_fully_factored(&self) -> bool {
        self.factorization.is_complete()
    }

    /// x^(order/l): the projection to the order-l subgroup.
    pub fn project(&self, x: &Poly) -> Poly {
        self.rep.pow(x, &self.cofactor)
    }

    pub fn subgroup_generator(&self) -> &Poly {
        &self.g_sub
    }

    /// True iff log_g(x) = log (mod l), checked in the order-l subgroup.
    pub fn check_log(&self, x: &Poly, log: &BigUint) -> bool {
        let x = self.rep.reduce(x);
        if x.is_zero() {
            return false;
        }
        self.project(&x) == self.rep.pow(&self.g_sub, log)
    }

    /// log_g(c) mod l for a nonzero constant c in F_{q^2}.
    pub fn const_log(&self, c: Fq2) -> Result<BigUint> {
        assert!(!c.is_zero(), "logarithm of zero");
        let ctx = self.ctx();
        let qm1 = ctx.size() - 1;
        if (BigUint::from(qm1) % &self.ell).is_zero() {
            return Err(Error::DegenerateModulus(self.ell.clone()));
        }
        // log_{g'}(c) = dlog(c) / dlog(g') mod (q^2 - 1)
        let dc = ctx.dlog(c).expect("nonzero");
        let dg = ctx.dlog(self.g_const).expect("nonzero");
        let inv = inv_mod_biguint(&BigUint::from(dg), &BigUint::from(qm1))
            .ok_or(Error::InconsistentOrder)?;
        let s = (BigUint::from(dc) * inv) % qm1;
        let n_over = &self.order / qm1;
        Ok((s * n_over) % &self.ell)
    }

    /// generator^(order/(q^2-1)), which generates F_{q^2}^*.
    pub fn const_generator(&self) -> Fq2 {
        self.g_const
    }

    pub fn to_text(&self) -> String {
        let ctx = self.ctx();
        let rep = &self.rep;
        let mut s = String::new();
        s.push_str(&ctx.to_text().replace("generator=", "fq2_generator="));
        writeln!(s, "k={}", rep.k).unwrap();
        writeln!(s, "h0={}", rep.h0.to_text(ctx)).unwrap();
        writeln!(s, "h1={}", rep.h1.to_text(ctx)).unwrap();
        writeln!(s, "phi={}", rep.phi.to_text(ctx)).unwrap();
        let traps: Vec<String> = rep
            .traps
            .iter()
            .map(|(t, e)| format!("{}^{}", t.to_text(ctx), e))
            .collect();
        writeln!(s, "traps={}", traps.join(";")).unwrap();
        writeln!(s, "family={}", rep.family.name()).unwrap();
        writeln!(s, "ell={}", self.ell).unwrap();
        writeln!(s, "generator={}", self.generator.to_text(ctx)).unwrap();
        let primes: Vec<String> = self
            .factorization
            .primes
            .iter()
            .map(|(p, e)| format!("{p}^{e}"))
            .collect();
        writeln!(s, "order_primes={}", primes.join(",")).unwrap();
        let rest: Vec<String> = self.factorization.unfactored.iter().map(|c| c.to_string()).collect();
        writeln!(s, "order_unfactored={}", rest.join(",")).unwrap();
        s
    }

    /// Parses a representation file and re-validates every invariant.
    pub fn from_text(text: &str) -> Result<Self> {
        let kv = io::parse_kv(text)?;
        let p: u64 = io::get_parsed(&kv, "p")?;
        let m: u32 = io::get_parsed(&kv, "m")?;
        let modulus = io::parse_u32_list(io::get(&kv, "modulus")?)?;
        let fg: u32 = io::get_parsed(&kv, "fq2_generator")?;
        let ctx = FieldCtx::from_parts(p, m, modulus, fg)?;
        let poly = |key: &str| Poly::from_text(io::get(&kv, key)?, &ctx);
        let k: usize = io::get_parsed(&kv, "k")?;
        let h0 = poly("h0")?;
        let h1 = poly("h1")?;
        let phi = poly("phi")?;
        let mut traps = Vec::new();
        for item in io::get(&kv, "traps")?.split(';').filter(|s| !s.trim().is_empty()) {
            let (t, e) = item
                .rsplit_once('^')
                .ok_or_else(|| Error::Parse(format!("bad trap entry {item}")))?;
            let e: u32 = e.trim().parse().map_err(|_| Error::Parse(format!("bad multiplicity in {item}")))?;
            traps.push((Poly::from_text(t, &ctx)?, e));
        }
        let family = RepFamily::parse(io::get(&kv, "family").unwrap_or("given"))?;
        let rep = SparseRep {
            delta: poly_degree(&h0).max(poly_degree(&h1)),
            ctx: ctx.clone(),
            k,
            h0,
            h1,
            phi,
            traps,
            family,
        };
        rep.validate()?;
        let ell: BigUint = io::get(&kv, "ell")?
            .parse()
            .map_err(|_| Error::Parse("bad ell".into()))?;
        let generator = poly("generator")?;
        let mut factorization = PartialFactorization::default();
        for item in io::get(&kv, "order_primes")?.split(',').filter(|s| !s.trim().is_empty()) {
            let (pr, e) = item
                .split_once('^')
                .ok_or_else(|| Error::Parse(format!("bad prime entry {item}")))?;
            let pr: BigUint = pr.trim().parse().map_err(|_| Error::Parse(format!("bad prime {pr}")))?;
            let e: u32 = e.trim().parse().map_err(|_| Error::Parse(format!("bad exponent {e}")))?;
            factorization.primes.insert(pr, e);
        }
        for c in io::get(&kv, "order_unfactored").unwrap_or("").split(',').filter(|s| !s.trim().is_empty()) {
            factorization
                .unfactored
                .push(c.trim().parse().map_err(|_| Error::Parse(format!("bad cofactor {c}")))?);
        }
        if factorization.product() != rep.order() {
            return Err(Error::InconsistentOrder);
        }
        if !factorization.primes.contains_key(&ell) {
            return Err(Error::BadModulus(ell));
        }
        if !passes_order_tests(&rep, &generator, &rep.order(), &factorization) {
            return Err(Error::InconsistentOrder);
        }
        Self::assemble(rep, ell, generator, factorization)
    }
}

fn passes_order_tests(rep: &SparseRep, g: &Poly, order: &BigUint, fact: &PartialFactorization) -> bool {
    let g = rep.reduce(g);
    if g.is_zero() || !rep.pow(&g, order).is_one() {
        return false;
    }
    fact.primes
        .keys()
        .all(|r| !rep.pow(&g, &(order / r)).is_one())
}

fn find_generator(rep: &SparseRep, order: &BigUint, fact: &PartialFactorization) -> Result<Poly> {
    let ctx = &rep.ctx;
    let size = ctx.size();
    for d in 1..=rep.k.max(1) {
        let limit = size.saturating_pow(d as u32).min(1 << 20);
        for idx in 0..limit {
            let mut v = Vec::with_capacity(d + 1);
            let mut x = idx;
            for _ in 0..d {
                v.push(ctx.from_packed((x % size) as u32));
                x /= size;
            }
            v.push(Fq2::ONE);
            let g = Poly::from_coeffs(v);
            if g.degree() >= rep.k {
                continue;
            }
            if passes_order_tests(rep, &g, order, fact) {
                return Ok(g);
            }
        }
    }
    Err(Error::InconsistentOrder)
}

/// Logs of the subgroup-order primes r with r^e || order, for reporting.
pub fn order_summary(fact: &PartialFactorization) -> String {
    let mut parts: Vec<String> = fact
        .primes
        .iter()
        .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
        .collect();
    parts.extend(fact.unfactored.iter().map(|c| format!("C{}", c.bits())));
    parts.join(" * ")
}

/// Residue of a signed integer modulo l.
pub fn signed_mod(x: i64, ell: &BigUint) -> BigUint {
    let v = BigUint::from(x.unsigned_abs()) % ell;
    if x < 0 && !v.is_zero() {
        ell - v
    } else {
        v
    }
}
