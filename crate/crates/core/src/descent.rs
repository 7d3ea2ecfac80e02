//! Base precomputation, recursive descent with memoization, trap
//! substitution, Pohlig-Hellman assembly and descent certificates.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

use crate::arith::{crt, inv_mod_biguint};
use crate::cosets::{enumerate_cosets, image_of_rational_line, infinity, CosetRep, Homography};
use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Fq2};
use crate::group::{dlog_prime_power, Group};
use crate::poly::{factor, is_irreducible, Poly};
use crate::relation::{
    base_linear_system, build_candidate, check_field_identity, descend_step, trap_relation, SieveOptions,
    SieveStats, Target,
};
use crate::rep::{LogContext, SparseRep};
use crate::rng::SeedSplitter;

/// The multiplicative group of F_{q^{2k}} = F_{q^2}[X]/(phi).
pub struct BigFieldGroup<'a>(pub &'a SparseRep);

impl Group for BigFieldGroup<'_> {
    type Elem = Poly;

    fn identity(&self) -> Poly {
        Poly::one()
    }

    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        self.0.mul(a, b)
    }

    fn pow(&self, a: &Poly, e: &BigUint) -> Poly {
        self.0.pow(a, e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Base,
    Descent,
    Trap,
    Constant,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Base => "base",
            Provenance::Descent => "descent",
            Provenance::Trap => "trap",
            Provenance::Constant => "constant",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "base" => Provenance::Base,
            "descent" => Provenance::Descent,
            "trap" => Provenance::Trap,
            "constant" => Provenance::Constant,
            _ => return Err(Error::Parse(format!("unknown provenance {s}"))),
        })
    }
}

#[derive(Clone, Debug)]
pub struct LogEntry {
    pub poly: Poly,
    pub value: BigUint,
    pub provenance: Provenance,
}

type PolyKey = (usize, Vec<u32>);

fn poly_key(p: &Poly, ctx: &FieldCtx) -> PolyKey {
    (p.coeffs().len(), p.coeffs().iter().map(|&c| ctx.to_packed(c)).collect())
}

/// Verified logarithms of monic irreducible polynomials. Keys put the
/// constant term first so iteration follows the canonical order.
#[derive(Clone, Debug)]
pub struct LogDB {
    pub ell: BigUint,
    pub generator: Poly,
    /// phi of the representation the entries belong to
    pub phi: Poly,
    entries: BTreeMap<PolyKey, LogEntry>,
}

impl LogDB {
    pub fn new(lc: &LogContext) -> Self {
        LogDB {
            ell: lc.ell.clone(),
            generator: lc.generator.clone(),
            phi: lc.rep.phi.clone(),
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, p: &Poly, ctx: &FieldCtx) -> Option<&LogEntry> {
        self.entries.get(&poly_key(p, ctx))
    }

    pub fn entries(&self) -> impl Iterator<Item = &LogEntry> {
        self.entries.values()
    }

    fn matches(&self, lc: &LogContext) -> Result<()> {
        if self.ell != lc.ell || self.generator != lc.generator || self.phi != lc.rep.phi {
            return Err(Error::VerificationFailed(
                "log database belongs to a different representation".into(),
            ));
        }
        Ok(())
    }

    /// Inserts after checking the subgroup projection; returns false if the
    /// polynomial was already present.
    pub fn insert(&mut self, lc: &LogContext, poly: Poly, value: BigUint, provenance: Provenance) -> Result<bool> {
        self.matches(lc)?;
        let value = value % &self.ell;
        if !lc.check_log(&poly, &value) {
            return Err(Error::VerificationFailed(format!(
                "log of {} does not match its projection",
                poly.to_text(lc.ctx())
            )));
        }
        let key = poly_key(&poly, lc.ctx());
        if self.entries.contains_key(&key) {
            return Ok(false);
        }
        self.entries.insert(key, LogEntry { poly, value, provenance });
        Ok(true)
    }

    fn insert_unchecked(&mut self, ctx: &FieldCtx, poly: Poly, value: BigUint, provenance: Provenance) {
        let key = poly_key(&poly, ctx);
        self.entries.insert(key, LogEntry { poly, value, provenance });
    }

    /// Re-checks every entry.
    pub fn verify_all(&self, lc: &LogContext) -> Result<()> {
        self.matches(lc)?;
        for e in self.entries.values() {
            if !lc.check_log(&e.poly, &e.value) {
                return Err(Error::VerificationFailed(format!(
                    "entry {} fails the projection check",
                    e.poly.to_text(lc.ctx())
                )));
            }
        }
        Ok(())
    }

    /// Header lines `# key=value` (extra lines such as a run config may be
    /// prepended by the caller), then one `poly:value:provenance` per entry.
    pub fn to_text(&self, ctx: &FieldCtx) -> String {
        let mut s = String::new();
        writeln!(s, "# ell={}", self.ell).unwrap();
        writeln!(s, "# generator={}", self.generator.to_text(ctx)).unwrap();
        writeln!(s, "# phi={}", self.phi.to_text(ctx)).unwrap();
        for e in self.entries.values() {
            writeln!(s, "{}:{}:{}", e.poly.to_text(ctx), e.value, e.provenance.name()).unwrap();
        }
        s
    }

    /// Parses and re-verifies every entry against `lc`.
    pub fn from_text(text: &str, lc: &LogContext) -> Result<Self> {
        let ctx = lc.ctx();
        let mut header = BTreeMap::new();
        let mut db = LogDB::new(lc);
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                if let Some((k, v)) = h.trim().split_once('=') {
                    header.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            let mut parts = line.split(':');
            let (Some(p), Some(v), Some(pr), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("bad log entry {line:?}")));
            };
            let value: BigUint = v.parse().map_err(|_| Error::Parse(format!("bad value in {line:?}")))?;
            rows.push((Poly::from_text(p, ctx)?, value, Provenance::parse(pr)?));
        }
        let field = |k: &str| {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Parse(format!("missing header {k}")))
        };
        db.ell = field("ell")?.parse().map_err(|_| Error::Parse("bad ell".into()))?;
        db.generator = Poly::from_text(&field("generator")?, ctx)?;
        db.phi = Poly::from_text(&field("phi")?, ctx)?;
        db.matches(lc)?;
        for (p, v, pr) in rows {
            if v >= db.ell {
                return Err(Error::Parse(format!("value {v} not reduced mod l")));
            }
            db.insert(lc, p, v, pr)?;
        }
        Ok(db)
    }
}

pub fn verify_log(target: &Poly, value: &BigUint, lc: &LogContext) -> bool {
    lc.check_log(target, &(value % &lc.ell))
}

#[derive(Clone, Debug)]
pub struct DescentOptions {
    /// smoothness bound for a node of degree D; None means ceil(D/2)
    pub bound: Option<usize>,
    pub base_degree: usize,
    pub memo: bool,
    pub sieve: SieveOptions,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            bound: None,
            base_degree: 1,
            memo: true,
            sieve: SieveOptions::new(1),
        }
    }
}

impl DescentOptions {
    pub fn bound_for(&self, d: usize) -> usize {
        match self.bound {
            Some(b) => b.min(d - 1).max(1),
            None => d.div_ceil(2),
        }
    }
}

/// One relation used by a descent step, enough to rebuild and recheck it.
#[derive(Clone, Debug, PartialEq)]
pub struct CertRow {
    pub m: Homography,
    pub coeff: BigUint,
    pub unit: Fq2,
    pub factors: Vec<(Poly, u32)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertNode {
    /// value taken from the database
    Leaf {
        poly: Poly,
        value: BigUint,
        source: Provenance,
    },
    /// poly = unit * prod f^e
    Product {
        poly: Poly,
        value: BigUint,
        unit: Fq2,
        factors: Vec<(u32, CertNode)>,
    },
    Step {
        poly: Poly,
        value: BigUint,
        bound: usize,
        h1_exp: BigUint,
        constant: BigUint,
        rows: Vec<CertRow>,
        h1: Option<Box<CertNode>>,
        children: Vec<(BigUint, CertNode)>,
    },
    Trap {
        poly: Poly,
        value: BigUint,
        v: u32,
        unit: Fq2,
        h1: Option<Box<CertNode>>,
        factors: Vec<(u32, CertNode)>,
    },
}

impl CertNode {
    pub fn poly(&self) -> &Poly {
        match self {
            CertNode::Leaf { poly, .. }
            | CertNode::Product { poly, .. }
            | CertNode::Step { poly, .. }
            | CertNode::Trap { poly, .. } => poly,
        }
    }

    pub fn value(&self) -> &BigUint {
        match self {
            CertNode::Leaf { value, .. }
            | CertNode::Product { value, .. }
            | CertNode::Step { value, .. }
            | CertNode::Trap { value, .. } => value,
        }
    }

    /// Number of descent steps in the tree.
    pub fn steps(&self) -> usize {
        self.fold(&mut |n| matches!(n, CertNode::Step { .. }) as usize)
    }

    /// Longest chain of descent steps from this node.
    pub fn step_depth(&self) -> usize {
        let own = matches!(self, CertNode::Step { .. }) as usize;
        own + self.subnodes().map(|n| n.step_depth()).max().unwrap_or(0)
    }

    /// Largest number of children of one step.
    pub fn max_arity(&self) -> usize {
        let own = match self {
            CertNode::Step { children, .. } => children.len(),
            _ => 0,
        };
        self.subnodes().map(|n| n.max_arity()).fold(own, usize::max)
    }

    fn subnodes(&self) -> Box<dyn Iterator<Item = &CertNode> + '_> {
        match self {
            CertNode::Leaf { .. } => Box::new(std::iter::empty()),
            CertNode::Product { factors, .. } => Box::new(factors.iter().map(|(_, n)| n)),
            CertNode::Step { h1, children, .. } => {
                Box::new(h1.iter().map(|b| b.as_ref()).chain(children.iter().map(|(_, n)| n)))
            }
            CertNode::Trap { h1, factors, .. } => {
                Box::new(h1.iter().map(|b| b.as_ref()).chain(factors.iter().map(|(_, n)| n)))
            }
        }
    }

    fn fold(&self, f: &mut dyn FnMut(&CertNode) -> usize) -> usize {
        let own = f(self);
        own + self.subnodes().map(|n| n.fold(f)).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescentCertificate {
    pub ell: BigUint,
    pub generator: Poly,
    pub root: CertNode,
}

#[derive(Clone, Debug, Default)]
pub struct DescentStats {
    pub steps: Vec<(usize, SieveStats)>,
    pub memo_hits: usize,
}

pub struct Descender<'a> {
    pub lc: &'a LogContext,
    pub cosets: &'a [CosetRep],
    pub db: &'a mut LogDB,
    pub opts: DescentOptions,
    pub stats: DescentStats,
    stack: HashSet<PolyKey>,
}

impl<'a> Descender<'a> {
    pub fn new(lc: &'a LogContext, cosets: &'a [CosetRep], db: &'a mut LogDB, opts: DescentOptions) -> Self {
        Descender {
            lc,
            cosets,
            db,
            opts,
            stats: DescentStats::default(),
            stack: HashSet::new(),
        }
    }

    fn clog(&self, c: Fq2) -> Result<BigUint> {
        self.lc.const_log(c)
    }

    /// log of an arbitrary nonzero polynomial (reduced mod phi first).
    pub fn log_of(&mut self, p: &Poly) -> Result<CertNode> {
        let rep = &self.lc.rep;
        let ctx = rep.ctx.clone();
        let p = rep.reduce(p);
        if p.is_zero() {
            return Err(Error::NotInSubgroup);
        }
        let mut rng = SeedSplitter::new(self.opts.sieve.seed).stream("descent-factor");
        let fact = factor(&p, &ctx, &mut rng);
        let ell = self.lc.ell.clone();
        let mut value = self.clog(fact.unit)?;
        let mut factors = Vec::new();
        for (f, e) in &fact.factors {
            let node = self.log_irreducible(f)?;
            value = (value + node.value() * BigUint::from(*e)) % &ell;
            factors.push((*e, node));
        }
        Ok(CertNode::Product {
            poly: p,
            value,
            unit: fact.unit,
            factors,
        })
    }

    fn log_h1(&mut self) -> Result<Option<Box<CertNode>>> {
        let h1 = self.lc.rep.h1.clone();
        if h1.degree() == 0 && h1.coeff(0) == Fq2::ONE {
            return Ok(None);
        }
        Ok(Some(Box::new(self.log_of(&h1)?)))
    }

    /// log of a monic irreducible polynomial.
    pub fn log_irreducible(&mut self, f: &Poly) -> Result<CertNode> {
        let lc = self.lc;
        let ctx = lc.ctx();
        let ell = &lc.ell;
        let key = poly_key(f, ctx);
        if lc.rep.is_trap(f) {
            return self.log_trap(f);
        }
        if let Some(e) = self.db.get(f, ctx) {
            if self.opts.memo || e.provenance == Provenance::Base || f.degree() <= self.opts.base_degree {
                if e.provenance == Provenance::Descent {
                    self.stats.memo_hits += 1;
                }
                return Ok(CertNode::Leaf {
                    poly: f.clone(),
                    value: e.value.clone(),
                    source: e.provenance,
                });
            }
        }
        let d = f.degree();
        if d <= self.opts.base_degree {
            return Err(Error::MissingLog(f.to_text(ctx)));
        }
        if !self.stack.insert(key.clone()) {
            return Err(Error::CycleDetected(f.to_text(ctx)));
        }
        let bound = self.opts.bound_for(d);
        let mut sopts = self.opts.sieve.clone();
        sopts.bound = bound;
        let target = Target::new(f, &lc.rep);
        let step = descend_step(&target, lc, self.cosets, &sopts)?;
        self.stats.steps.push((d, step.stats.clone()));

        let h1 = if step.h1_exp.is_zero() { None } else { self.log_h1()? };
        let mut value = step.constant.clone();
        if let Some(h) = &h1 {
            value = (value + &step.h1_exp * h.value()) % ell;
        }
        let mut children = Vec::new();
        for (c, e) in &step.children {
            // degree halving (or the configured bound) at every edge
            assert!(c.degree() <= bound, "child of degree {} above bound {bound}", c.degree());
            let node = self.log_irreducible(c)?;
            value = (value + e * node.value()) % ell;
            children.push((e.clone(), node));
        }
        let rows = step
            .rows
            .iter()
            .map(|r| CertRow {
                m: r.relation.cand.m,
                coeff: r.coeff.clone(),
                unit: r.relation.lhs.unit,
                factors: r.relation.lhs.factors.clone(),
            })
            .collect();
        self.stack.remove(&key);
        if self.opts.memo {
            self.db.insert(lc, f.clone(), value.clone(), Provenance::Descent)?;
        }
        Ok(CertNode::Step {
            poly: f.clone(),
            value,
            bound,
            h1_exp: step.h1_exp,
            constant: step.constant,
            rows,
            h1,
            children,
        })
    }

    fn log_trap(&mut self, t: &Poly) -> Result<CertNode> {
        let lc = self.lc;
        let ctx = lc.ctx();
        let ell = &lc.ell;
        let key = poly_key(t, ctx);
        if !self.stack.insert(key.clone()) {
            return Err(Error::CycleDetected(t.to_text(ctx)));
        }
        let tr = trap_relation(t, lc)?;
        let mut rhs = self.clog(tr.unit)?;
        let h1 = self.log_h1()?;
        if let Some(h) = &h1 {
            let dh = (BigUint::from(tr.d) * h.value()) % ell;
            rhs = (rhs + ell - dh) % ell;
        }
        let mut factors = Vec::new();
        for (f, e) in &tr.factors {
            let node = self.log_irreducible(f)?;
            rhs = (rhs + node.value() * BigUint::from(*e)) % ell;
            factors.push((*e, node));
        }
        let coef = BigUint::from(lc.rep.q() - tr.v as u64);
        let inv = inv_mod_biguint(&coef, ell).ok_or(Error::NonInvertibleCoefficient(lc.rep.q() - tr.v as u64))?;
        let value = (rhs * inv) % ell;
        self.stack.remove(&key);
        if self.opts.memo {
            self.db.insert(lc, t.clone(), value.clone(), Provenance::Trap)?;
        }
        Ok(CertNode::Trap {
            poly: t.clone(),
            value,
            v: tr.v,
            unit: tr.unit,
            h1,
            factors,
        })
    }
}

/// log_g(target) mod l with its certificate.
pub fn descend(
    target: &Poly,
    lc: &LogContext,
    cosets: &[CosetRep],
    db: &mut LogDB,
    opts: &DescentOptions,
) -> Result<(BigUint, DescentCertificate)> {
    let mut d = Descender::new(lc, cosets, db, opts.clone());
    let root = d.log_of(target)?;
    Ok((
        root.value().clone(),
        DescentCertificate {
            ell: lc.ell.clone(),
            generator: lc.generator.clone(),
            root,
        },
    ))
}

/// Logs of all monic linear polynomials (and of the higher-degree factors of
/// h1), optionally extended to the monic irreducible quadratics.
pub fn compute_base(lc: &LogContext, cosets: &[CosetRep], base_degree: usize, opts: &DescentOptions) -> Result<LogDB> {
    let ctx = lc.ctx();
    let ell = &lc.ell;
    let base = base_linear_system(lc, cosets, opts.sieve.margin)?;
    let mut db = LogDB::new(lc);
    for (i, l) in base.linear.iter().enumerate() {
        db.insert_unchecked(ctx, Poly::linear(ctx, ctx.from_packed(i as u32)), l.clone(), Provenance::Base);
    }
    for (f, l) in &base.h1_factors {
        db.insert_unchecked(ctx, f.clone(), l.clone(), Provenance::Base);
    }
    // the base logs are relative to base.reference; rescale to the generator
    if base.reference != lc.generator {
        let mut o = opts.clone();
        o.memo = false;
        o.base_degree = 1;
        let mut tmp = db.clone();
        let mut d = Descender::new(lc, cosets, &mut tmp, o);
        // the temporary database holds unverified reference logs, so insert
        // checks would reject them
        let node = d.log_of(&lc.generator)?;
        let s = node.value().clone();
        let inv = inv_mod_biguint(&s, ell).ok_or(Error::InconsistentOrder)?;
        let rescaled: Vec<LogEntry> = db.entries().cloned().collect();
        db.entries.clear();
        for e in rescaled {
            db.insert_unchecked(ctx, e.poly, (e.value * &inv) % ell, e.provenance);
        }
    }
    db.verify_all(lc)?;

    if base_degree >= 2 {
        let mut o = opts.clone();
        o.base_degree = 1;
        o.memo = true;
        o.bound = Some(1);
        let mut d = Descender::new(lc, cosets, &mut db, o);
        for f in monic_irreducible_quadratics(ctx) {
            if lc.rep.is_trap(&f) || d.db.get(&f, ctx).is_some() {
                continue;
            }
            d.log_irreducible(&f)?;
        }
        let keys: Vec<PolyKey> = db
            .entries
            .iter()
            .filter(|(_, e)| e.provenance == Provenance::Descent && e.poly.degree() == 2)
            .map(|(k, _)| k.clone())
            .collect();
        for k in keys {
            db.entries.get_mut(&k).unwrap().provenance = Provenance::Base;
        }
    }
    Ok(db)
}

fn monic_irreducible_quadratics(ctx: &FieldCtx) -> Vec<Poly> {
    let size = ctx.size() as u32;
    let mut out = Vec::new();
    for c1 in 0..size {
        for c0 in 0..size {
            let f = Poly::from_coeffs(vec![ctx.from_packed(c0), ctx.from_packed(c1), Fq2::ONE]);
            if is_irreducible(&f, ctx) {
                out.push(f);
            }
        }
    }
    out
}

/// Replays a certificate: every relation is rebuilt from its homography and
/// its field identity rechecked, every combination is recomputed, and every
/// leaf is checked by subgroup projection. No linear algebra is redone.
pub fn check_certificate(cert: &DescentCertificate, lc: &LogContext) -> Result<()> {
    if cert.ell != lc.ell || cert.generator != lc.generator {
        return Err(Error::VerificationFailed("certificate belongs to a different context".into()));
    }
    check_node(&cert.root, lc)
}

fn fail(what: String) -> Error {
    Error::VerificationFailed(what)
}

fn check_node(node: &CertNode, lc: &LogContext) -> Result<()> {
    let rep = &lc.rep;
    let ctx = lc.ctx();
    let ell = &lc.ell;
    let name = || node.poly().to_text(ctx);
    match node {
        CertNode::Leaf { poly, value, .. } => {
            if !lc.check_log(poly, value) {
                return Err(fail(format!("leaf {}", name())));
            }
        }
        CertNode::Product {
            poly,
            value,
            unit,
            factors,
        } => {
            let mut prod = Poly::constant(*unit);
            let mut v = lc.const_log(*unit)?;
            for (e, n) in factors {
                check_node(n, lc)?;
                if !n.poly().is_monic() || !is_irreducible(n.poly(), ctx) {
                    return Err(fail(format!("factor of {} is not monic irreducible", name())));
                }
                prod = prod.mul(&n.poly().pow(*e as u64, ctx), ctx);
                v = (v + n.value() * BigUint::from(*e)) % ell;
            }
            if &prod != poly {
                return Err(fail(format!("factorization of {}", name())));
            }
            if &v != value {
                return Err(fail(format!("value of {}", name())));
            }
        }
        CertNode::Step {
            poly,
            value,
            bound,
            h1_exp,
            constant,
            rows,
            h1,
            children,
        } => {
            let target = Target::new(poly, rep);
            let size = ctx.size() as usize;
            let inf = infinity(ctx) as usize;
            let mut combo = vec![BigUint::zero(); size + 1];
            let mut exps: BTreeMap<PolyKey, BigUint> = BTreeMap::new();
            let mut xsum = BigUint::zero();
            let mut cst = BigUint::zero();
            for (i, row) in rows.iter().enumerate() {
                let mut block = image_of_rational_line(ctx, &row.m.inverse(ctx));
                block.sort_unstable();
                let coset = CosetRep { m: row.m, block };
                let cand = build_candidate(&target, rep, &coset, i);
                let mut prod = Poly::constant(row.unit);
                for (f, e) in &row.factors {
                    if f.degree() > *bound {
                        return Err(fail(format!("relation factor above bound under {}", name())));
                    }
                    prod = prod.mul(&f.pow(*e as u64, ctx), ctx);
                    let slot = exps.entry(poly_key(f, ctx)).or_default();
                    *slot = (&*slot + &row.coeff * BigUint::from(*e)) % ell;
                }
                if prod != cand.numerator {
                    return Err(fail(format!("relation numerator under {}", name())));
                }
                if !check_field_identity(&cand, &target, rep) {
                    return Err(fail(format!("field identity under {}", name())));
                }
                for &pt in &coset.block {
                    combo[pt as usize] = (&combo[pt as usize] + &row.coeff) % ell;
                }
                xsum += &row.coeff;
                let c = (lc.const_log(row.unit)? + ell - lc.const_log(cand.lambda)?) % ell;
                cst = (cst + &row.coeff * c) % ell;
            }
            // x * H = e_0
            for (j, c) in combo.iter().enumerate() {
                let want = (j == 0) as u32;
                if *c != BigUint::from(want) && !(j == inf && c.is_zero()) {
                    return Err(fail(format!("row combination of {}", name())));
                }
            }
            let want_h1 = (ell - (xsum * BigUint::from(poly.degree())) % ell) % ell;
            if &want_h1 != h1_exp || &cst != constant {
                return Err(fail(format!("aggregates of {}", name())));
            }
            exps.retain(|_, v| !v.is_zero());
            let listed: BTreeMap<PolyKey, BigUint> = children
                .iter()
                .map(|(e, n)| (poly_key(n.poly(), ctx), e.clone()))
                .collect();
            if listed != exps {
                return Err(fail(format!("child exponents of {}", name())));
            }
            let mut v = constant.clone();
            if let Some(h) = h1 {
                check_h1(h, lc)?;
                v = (v + h1_exp * h.value()) % ell;
            } else if !h1_exp.is_zero() && !rep.h1.is_one() {
                return Err(fail(format!("missing h1 log under {}", name())));
            }
            for (e, n) in children {
                if n.poly().degree() > *bound {
                    return Err(fail(format!("child above bound under {}", name())));
                }
                check_node(n, lc)?;
                v = (v + e * n.value()) % ell;
            }
            if &v != value {
                return Err(fail(format!("value of {}", name())));
            }
        }
        CertNode::Trap {
            poly,
            value,
            v,
            unit,
            h1,
            factors,
        } => {
            if !rep.is_trap(poly) {
                return Err(fail(format!("{} is not a trap", name())));
            }
            let tr = trap_relation(poly, lc)?;
            let listed: Vec<(Poly, u32)> = factors.iter().map(|(e, n)| (n.poly().clone(), *e)).collect();
            if tr.v != *v || tr.unit != *unit || tr.factors != listed {
                return Err(fail(format!("trap relation of {}", name())));
            }
            let mut rhs = lc.const_log(*unit)?;
            if let Some(h) = h1 {
                check_h1(h, lc)?;
                rhs = (rhs + ell - (BigUint::from(tr.d) * h.value()) % ell) % ell;
            }
            for (e, n) in factors {
                check_node(n, lc)?;
                rhs = (rhs + n.value() * BigUint::from(*e)) % ell;
            }
            let lhs = (BigUint::from(rep.q() - *v as u64) * value) % ell;
            if lhs != rhs {
                return Err(fail(format!("trap value of {}", name())));
            }
        }
    }
    Ok(())
}

fn check_h1(h: &CertNode, lc: &LogContext) -> Result<()> {
    if h.poly() != &lc.rep.reduce(&lc.rep.h1) {
        return Err(fail("h1 node does not hold h1".into()));
    }
    check_node(h, lc)
}

// ---- certificate text format ----
//
// One node per line, children indented by two spaces:
//   certificate ell=<l> generator=<poly>
//   product poly=<p> value=<v> unit=<c>
//     factor exp=<e>
//       <node>
//   step poly=<p> value=<v> bound=<B> h1_exp=<e> constant=<c>
//     row m=<a>,<b>,<c>,<d> coeff=<x> unit=<u> factors=<poly>^<e>;...
//     h1
//       <node>
//     child exp=<e>
//       <node>
//   trap poly=<p> value=<v> v=<v_P> unit=<u>
//     h1 / factor exp=<e> as above
//   leaf poly=<p> value=<v> source=<provenance>
// Polynomials are comma-separated packed coefficients, constant term first.

impl DescentCertificate {
    pub fn to_text(&self, ctx: &FieldCtx) -> String {
        let mut s = String::new();
        writeln!(s, "certificate ell={} generator={}", self.ell, self.generator.to_text(ctx)).unwrap();
        write_node(&mut s, &self.root, 0, ctx);
        s
    }

    pub fn from_text(text: &str, ctx: &FieldCtx) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|l| {
                let t = l.trim_start();
                ((l.len() - t.len()) / 2, t.trim_end())
            })
            .collect();
        let Some(&(0, head)) = lines.first() else {
            return Err(Error::Parse("empty certificate".into()));
        };
        let kv = fields(head, "certificate")?;
        let ell = parse_big(get(&kv, "ell")?)?;
        let generator = Poly::from_text(get(&kv, "generator")?, ctx)?;
        let mut pos = 1;
        let root = parse_node(&lines, &mut pos, 0, ctx)?;
        if pos != lines.len() {
            return Err(Error::Parse("trailing lines in certificate".into()));
        }
        Ok(DescentCertificate { ell, generator, root })
    }
}

fn pad(s: &mut String, depth: usize) {
    for _ in 0..depth {
        s.push_str("  ");
    }
}

fn write_node(s: &mut String, node: &CertNode, depth: usize, ctx: &FieldCtx) {
    pad(s, depth);
    match node {
        CertNode::Leaf { poly, value, source } => {
            writeln!(s, "leaf poly={} value={} source={}", poly.to_text(ctx), value, source.name()).unwrap();
        }
        CertNode::Product {
            poly,
            value,
            unit,
            factors,
        } => {
            writeln!(s, "product poly={} value={} unit={}", poly.to_text(ctx), value, ctx.to_packed(*unit)).unwrap();
            write_factors(s, factors, depth, ctx);
        }
        CertNode::Step {
            poly,
            value,
            bound,
            h1_exp,
            constant,
            rows,
            h1,
            children,
        } => {
            writeln!(
                s,
                "step poly={} value={} bound={} h1_exp={} constant={}",
                poly.to_text(ctx),
                value,
                bound,
                h1_exp,
                constant
            )
            .unwrap();
            for r in rows {
                pad(s, depth + 1);
                let m = [r.m.a, r.m.b, r.m.c, r.m.d].map(|x| ctx.to_packed(x).to_string()).join(",");
                writeln!(
                    s,
                    "row m={} coeff={} unit={} factors={}",
                    m,
                    r.coeff,
                    ctx.to_packed(r.unit),
                    factor_list(&r.factors, ctx)
                )
                .unwrap();
            }
            write_h1(s, h1, depth, ctx);
            for (e, n) in children {
                pad(s, depth + 1);
                writeln!(s, "child exp={e}").unwrap();
                write_node(s, n, depth + 2, ctx);
            }
        }
        CertNode::Trap {
            poly,
            value,
            v,
            unit,
            h1,
            factors,
        } => {
            writeln!(s, "trap poly={} value={} v={} unit={}", poly.to_text(ctx), value, v, ctx.to_packed(*unit)).unwrap();
            write_h1(s, h1, depth, ctx);
            write_factors(s, factors, depth, ctx);
        }
    }
}

fn write_h1(s: &mut String, h1: &Option<Box<CertNode>>, depth: usize, ctx: &FieldCtx) {
    if let Some(h) = h1 {
        pad(s, depth + 1);
        s.push_str("h1\n");
        write_node(s, h, depth + 2, ctx);
    }
}

fn write_factors(s: &mut String, factors: &[(u32, CertNode)], depth: usize, ctx: &FieldCtx) {
    for (e, n) in factors {
        pad(s, depth + 1);
        writeln!(s, "factor exp={e}").unwrap();
        write_node(s, n, depth + 2, ctx);
    }
}

fn factor_list(factors: &[(Poly, u32)], ctx: &FieldCtx) -> String {
    factors
        .iter()
        .map(|(f, e)| format!("{}^{}", f.to_text(ctx), e))
        .collect::<Vec<_>>()
        .join(";")
}

fn fields<'t>(line: &'t str, kind: &str) -> Result<BTreeMap<&'t str, &'t str>> {
    let mut it = line.split_whitespace();
    if it.next() != Some(kind) {
        return Err(Error::Parse(format!("expected {kind}, got {line:?}")));
    }
    it.map(|tok| {
        tok.split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad field {tok:?}")))
    })
    .collect()
}

fn get<'t>(kv: &BTreeMap<&str, &'t str>, key: &str) -> Result<&'t str> {
    kv.get(key)
        .copied()
        .ok_or_else(|| Error::Parse(format!("missing field {key}")))
}

fn parse_big(s: &str) -> Result<BigUint> {
    s.parse().map_err(|_| Error::Parse(format!("bad integer {s:?}")))
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("bad integer {s:?}")))
}

fn parse_elem(s: &str, ctx: &FieldCtx) -> Result<Fq2> {
    let v: u32 = parse_num(s)?;
    if v as u64 >= ctx.size() {
        return Err(Error::Parse(format!("field element {v} out of range")));
    }
    Ok(ctx.from_packed(v))
}

fn parse_node(lines: &[(usize, &str)], pos: &mut usize, depth: usize, ctx: &FieldCtx) -> Result<CertNode> {
    let &(ind, line) = lines
        .get(*pos)
        .ok_or_else(|| Error::Parse("certificate ends early".into()))?;
    if ind != depth {
        return Err(Error::Parse(format!("bad indentation at {line:?}")));
    }
    *pos += 1;
    let kind = line.split_whitespace().next().unwrap_or("");
    let kv = fields(line, kind)?;
    let poly = Poly::from_text(get(&kv, "poly")?, ctx)?;
    let value = parse_big(get(&kv, "value")?)?;
    // sub-items one level deeper
    let mut rows = Vec::new();
    let mut h1 = None;
    let mut subs: Vec<(String, CertNode)> = Vec::new();
    while let Some(&(ind, sub)) = lines.get(*pos) {
        if ind != depth + 1 {
            break;
        }
        *pos += 1;
        let sk = sub.split_whitespace().next().unwrap_or("");
        match sk {
            "row" => {
                let rk = fields(sub, "row")?;
                let m: Vec<Fq2> = get(&rk, "m")?
                    .split(',')
                    .map(|x| parse_elem(x, ctx))
                    .collect::<Result<_>>()?;
                if m.len() != 4 {
                    return Err(Error::Parse("homography needs four entries".into()));
                }
                let hm = Homography {
                    a: m[0],
                    b: m[1],
                    c: m[2],
                    d: m[3],
                };
                if hm.det(ctx).is_zero() {
                    return Err(Error::Parse("singular homography".into()));
                }
                let mut factors = Vec::new();
                for item in get(&rk, "factors")?.split(';').filter(|s| !s.is_empty()) {
                    let (f, e) = item
                        .rsplit_once('^')
                        .ok_or_else(|| Error::Parse(format!("bad factor {item:?}")))?;
                    factors.push((Poly::from_text(f, ctx)?, parse_num(e)?));
                }
                rows.push(CertRow {
                    m: hm,
                    coeff: parse_big(get(&rk, "coeff")?)?,
                    unit: parse_elem(get(&rk, "unit")?, ctx)?,
                    factors,
                });
            }
            "h1" => {
                h1 = Some(Box::new(parse_node(lines, pos, depth + 2, ctx)?));
            }
            "child" | "factor" => {
                let ek = fields(sub, sk)?;
                let e = get(&ek, "exp")?.to_string();
                let n = parse_node(lines, pos, depth + 2, ctx)?;
                subs.push((e, n));
            }
            _ => return Err(Error::Parse(format!("unexpected line {sub:?}"))),
        }
    }
    let small = |subs: Vec<(String, CertNode)>| -> Result<Vec<(u32, CertNode)>> {
        subs.into_iter().map(|(e, n)| Ok((parse_num(&e)?, n))).collect()
    };
    Ok(match kind {
        "leaf" => CertNode::Leaf {
            poly,
            value,
            source: Provenance::parse(get(&kv, "source")?)?,
        },
        "product" => CertNode::Product {
            poly,
            value,
            unit: parse_elem(get(&kv, "unit")?, ctx)?,
            factors: small(subs)?,
        },
        "step" => CertNode::Step {
            poly,
            value,
            bound: parse_num(get(&kv, "bound")?)?,
            h1_exp: parse_big(get(&kv, "h1_exp")?)?,
            constant: parse_big(get(&kv, "constant")?)?,
            rows,
            h1,
            children: subs
                .into_iter()
                .map(|(e, n)| Ok((parse_big(&e)?, n)))
                .collect::<Result<_>>()?,
        },
        "trap" => CertNode::Trap {
            poly,
            value,
            v: parse_num(get(&kv, "v")?)?,
            unit: parse_elem(get(&kv, "unit")?, ctx)?,
            h1,
            factors: small(subs)?,
        },
        _ => return Err(Error::Parse(format!("unknown node kind {kind:?}"))),
    })
}

// ---- Pohlig-Hellman assembly ----

#[derive(Clone, Debug)]
pub struct DlogOptions {
    /// primes above this use the descent, the rest generic layers
    pub threshold: BigUint,
    pub descent: DescentOptions,
}

impl Default for DlogOptions {
    fn default() -> Self {
        DlogOptions {
            threshold: BigUint::from(1u32 << 20),
            descent: DescentOptions::default(),
        }
    }
}

/// How each prime power of the group order was handled.
#[derive(Clone, Debug)]
pub struct DlogPart {
    pub prime: BigUint,
    pub exponent: u32,
    pub residue: BigUint,
    pub by_descent: bool,
}

/// log_g(target) modulo q^{2k} - 1, where g is the generator of `lc`.
/// The order must be fully factored.
pub fn full_dlog(target: &Poly, lc: &LogContext, opts: &DlogOptions) -> Result<(BigUint, Vec<DlogPart>)> {
    let rep = &lc.rep;
    let ctx = lc.ctx();
    if !lc.order_fully_factored() {
        return Err(Error::FactorizationTimeout {
            partial: lc.factorization.clone(),
        });
    }
    let t = rep.reduce(target);
    if t.is_zero() {
        return Err(Error::NotInSubgroup);
    }
    let group = BigFieldGroup(rep);
    let order = &lc.order;
    let qq1 = BigUint::from(ctx.size() - 1);
    let mut cosets: Option<Vec<CosetRep>> = None;
    let mut parts = Vec::new();
    for (r, &e) in &lc.factorization.primes {
        let wrap = |err: Error| Error::PohligHellman {
            prime: r.clone(),
            exponent: e,
            source: Box::new(err),
        };
        let use_descent = r > &opts.threshold && e == 1 && !(&qq1 % r).is_zero();
        let residue = if use_descent {
            let sub = LogContext::with_factorization(rep.clone(), Some(r.clone()), lc.factorization.clone())
                .map_err(wrap)?;
            if sub.generator != lc.generator {
                return Err(wrap(Error::InconsistentOrder));
            }
            let cs = match &cosets {
                Some(c) => c,
                None => cosets.insert(enumerate_cosets(ctx).map_err(wrap)?),
            };
            let mut db = compute_base(&sub, cs, opts.descent.base_degree, &opts.descent).map_err(wrap)?;
            let (v, _) = descend(&t, &sub, cs, &mut db, &opts.descent).map_err(wrap)?;
            v
        } else {
            dlog_prime_power(&group, &lc.generator, &t, order, r, e).map_err(wrap)?
        };
        parts.push(DlogPart {
            prime: r.clone(),
            exponent: e,
            residue,
            by_descent: use_descent,
        });
    }
    let residues: Vec<(BigUint, BigUint)> = parts
        .iter()
        .map(|p| (p.residue.clone(), p.prime.pow(p.exponent)))
        .collect();
    let x = crt(&residues).mod_floor(order);
    if group.pow(&lc.generator, &x) != t {
        return Err(Error::VerificationFailed("g^x differs from the target".into()));
    }
    Ok((x, parts))
}

/// log_g(target) mod l by baby-step giant-step in the order-l subgroup.
/// Only for small l; used as an oracle.
pub fn bsgs_log_mod_ell(target: &Poly, lc: &LogContext) -> Result<BigUint> {
    let group = BigFieldGroup(&lc.rep);
    crate::group::bsgs_dlog(&group, lc.subgroup_generator(), &lc.project(target), &lc.ell)
}
