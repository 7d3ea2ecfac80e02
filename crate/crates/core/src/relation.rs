//! Relations from the systematic equation X^q Y - X Y^q = prod (beta X - alpha Y)
//! with X = aP + b P1, Y = cP + d P1 (P1 = 1 unless the auxiliary mode is
//! used). After X^q = h0/h1 the left side becomes numerator / h1^D; the right
//! side is lambda * prod_{mu in block, finite} (P - mu P1), times P1 when the
//! block contains infinity.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::cosets::{infinity, CosetRep, Homography, ProjPoint};
use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Fq2};
use crate::linalg::{AnyEchelon, ModL, SparseRow};
use crate::poly::{factor, is_smooth, Factorization, Poly};
use crate::rep::{LogContext, SparseRep};
use crate::rng::SeedSplitter;

/// h1^d * P(h0/h1) for deg P <= d.
pub fn homogenize_to(p: &Poly, d: usize, h0: &Poly, h1: &Poly, ctx: &FieldCtx) -> Poly {
    let mut h0_pows = vec![Poly::one()];
    let mut h1_pows = vec![Poly::one()];
    for i in 1..=d {
        h0_pows.push(h0_pows[i - 1].mul(h0, ctx));
        h1_pows.push(h1_pows[i - 1].mul(h1, ctx));
    }
    let mut acc = Poly::zero();
    for (i, &c) in p.coeffs().iter().enumerate() {
        acc.add_scaled(&h0_pows[i].mul(&h1_pows[d - i], ctx), c, ctx);
    }
    acc
}

/// Per-target precomputation: the four polynomials whose combination gives
/// every numerator.
pub struct Target {
    pub p: Poly,
    pub aux: Poly,
    pub d: usize,
    a_p: Poly,
    a_aux: Poly,
    b_p: Poly,
    b_aux: Poly,
}

impl Target {
    pub fn new(p: &Poly, rep: &SparseRep) -> Self {
        Self::with_aux(p, &Poly::one(), rep)
    }

    /// Auxiliary mode: columns become P - mu*P1, and P1 sits at infinity.
    pub fn with_aux(p: &Poly, aux: &Poly, rep: &SparseRep) -> Self {
        let ctx = &rep.ctx;
        let d = p.degree();
        assert!(aux.degree() <= d && !aux.is_zero());
        let a = homogenize_to(&p.frobenius_twist(ctx), d, &rep.h0, &rep.h1, ctx);
        let b = homogenize_to(&aux.frobenius_twist(ctx), d, &rep.h0, &rep.h1, ctx);
        Target {
            p: p.clone(),
            aux: aux.clone(),
            d,
            a_p: a.mul(p, ctx),
            a_aux: a.mul(aux, ctx),
            b_p: b.mul(p, ctx),
            b_aux: b.mul(aux, ctx),
        }
    }

    /// The column polynomial for a finite point mu: P - mu*P1.
    pub fn column_poly(&self, mu: Fq2, ctx: &FieldCtx) -> Poly {
        self.p.sub(&self.aux.scale(mu, ctx), ctx)
    }
}

#[derive(Clone, Debug)]
pub struct RelationCandidate {
    /// position of the coset in the stream it came from
    pub coset: usize,
    pub m: Homography,
    pub block: Vec<ProjPoint>,
    pub h1_power: usize,
    pub lambda: Fq2,
    pub numerator: Poly,
}

#[derive(Clone, Debug)]
pub struct Relation {
    pub cand: RelationCandidate,
    pub lhs: Factorization,
}

/// lambda = prod over (alpha:beta) in {(t:1)} + {(-1:0)} of the leading
/// coefficient (a beta - c alpha), or of the constant (b beta - d alpha) for
/// the one point sent to infinity.
pub fn lambda_of(m: &Homography, ctx: &FieldCtx) -> Fq2 {
    let mut lam = Fq2::ONE;
    let pts = ctx
        .subfield()
        .iter()
        .map(|&t| (t, Fq2::ONE))
        .chain([(ctx.from_int(-1), Fq2::ZERO)]);
    for (alpha, beta) in pts {
        let lead = ctx.sub(ctx.mul(m.a, beta), ctx.mul(m.c, alpha));
        let f = if lead.is_zero() {
            ctx.sub(ctx.mul(m.b, beta), ctx.mul(m.d, alpha))
        } else {
            lead
        };
        lam = ctx.mul(lam, f);
    }
    lam
}

pub fn build_candidate(target: &Target, rep: &SparseRep, coset: &CosetRep, index: usize) -> RelationCandidate {
    let ctx = &rep.ctx;
    let m = coset.m;
    let (at, bt, ct, dt) = (
        ctx.frobenius(m.a),
        ctx.frobenius(m.b),
        ctx.frobenius(m.c),
        ctx.frobenius(m.d),
    );
    let k1 = ctx.sub(ctx.mul(at, m.c), ctx.mul(m.a, ct));
    let k2 = ctx.sub(ctx.mul(at, m.d), ctx.mul(m.b, ct));
    let k3 = ctx.sub(ctx.mul(bt, m.c), ctx.mul(m.a, dt));
    let k4 = ctx.sub(ctx.mul(bt, m.d), ctx.mul(m.b, dt));
    let mut num = target.a_p.scale(k1, ctx);
    num.add_scaled(&target.a_aux, k2, ctx);
    num.add_scaled(&target.b_p, k3, ctx);
    num.add_scaled(&target.b_aux, k4, ctx);
    assert!(!num.is_zero(), "numerator of L_m vanished");
    RelationCandidate {
        coset: index,
        m,
        block: coset.block.clone(),
        h1_power: target.d,
        lambda: lambda_of(&m, ctx),
        numerator: num,
    }
}

/// numerator == h1^s * lambda * [P1] * prod (P - mu P1)  (mod phi).
pub fn check_field_identity(cand: &RelationCandidate, target: &Target, rep: &SparseRep) -> bool {
    let ctx = &rep.ctx;
    let inf = infinity(ctx);
    let mut rhs = rep.reduce(&Poly::constant(cand.lambda));
    for _ in 0..cand.h1_power {
        rhs = rep.mul(&rhs, &rep.h1);
    }
    for &pt in &cand.block {
        let f = if pt == inf {
            target.aux.clone()
        } else {
            target.column_poly(ctx.from_packed(pt), ctx)
        };
        rhs = rep.mul(&rhs, &f);
    }
    rep.reduce(&cand.numerator) == rhs && !rep.reduce(&cand.numerator).is_zero()
}

/// Smoothness test on a chunk of cosets; parallel when the feature is on.
fn test_chunk(
    target: &Target,
    rep: &SparseRep,
    cosets: &[CosetRep],
    start: usize,
    bound: usize,
    seeds: &SeedSplitter,
) -> Vec<Option<Relation>> {
    let work = |(i, c): (usize, &CosetRep)| {
        let cand = build_candidate(target, rep, c, start + i);
        if !is_smooth(&cand.numerator, bound, &rep.ctx) {
            return None;
        }
        let mut rng = seeds.indexed("relation-factor", (start + i) as u64);
        let lhs = factor(&cand.numerator, &rep.ctx, &mut rng);
        Some(Relation { cand, lhs })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        cosets.par_iter().enumerate().map(work).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        cosets.iter().enumerate().map(work).collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct SieveStats {
    pub cosets_tried: usize,
    pub accepted: usize,
    pub rank: usize,
    /// histogram of lhs factor degrees over accepted relations
    pub factor_degrees: BTreeMap<usize, usize>,
    pub numerator_degrees: BTreeMap<usize, usize>,
    pub identity_checks: usize,
}

impl SieveStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.cosets_tried == 0 {
            0.0
        } else {
            self.accepted as f64 / self.cosets_tried as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct SieveOptions {
    pub bound: usize,
    /// extra rows collected after full rank
    pub margin: usize,
    /// every n-th accepted relation gets a field-identity check (0 = never)
    pub check_every: usize,
    pub seed: u64,
    pub chunk: usize,
}

impl SieveOptions {
    pub fn new(bound: usize) -> Self {
        SieveOptions {
            bound,
            margin: 16,
            check_every: 100,
            seed: 0,
            chunk: 512,
        }
    }
}

/// H(P): accepted relations plus an incremental echelon over F_l with
/// combination tracking.
pub struct RelationMatrix {
    pub relations: Vec<Relation>,
    pub echelon: AnyEchelon,
    pub stats: SieveStats,
}

/// Streams `cosets`, keeping relations whose numerator is `bound`-smooth,
/// until H(P) has rank q^2 + 1 plus `margin` extra rows.
pub fn sieve_relations(
    target: &Target,
    lc: &LogContext,
    cosets: &[CosetRep],
    opts: &SieveOptions,
) -> Result<RelationMatrix> {
    let rep = &lc.rep;
    let ctx = &rep.ctx;
    let ncols = ctx.size() as usize + 1;
    let field = ModL::new(&lc.ell)?;
    let mut echelon = AnyEchelon::new(&field, ncols, true);
    let mut relations = Vec::new();
    let mut stats = SieveStats::default();
    let seeds = SeedSplitter::new(opts.seed);
    let mut extra = 0;
    'outer: for (ci, chunk) in cosets.chunks(opts.chunk.max(1)).enumerate() {
        let start = ci * opts.chunk.max(1);
        let results = test_chunk(target, rep, chunk, start, opts.bound, &seeds);
        for (off, res) in results.into_iter().enumerate() {
            stats.cosets_tried = start + off + 1;
            let Some(rel) = res else { continue };
            stats.accepted += 1;
            if opts.check_every > 0 && (stats.accepted - 1) % opts.check_every == 0 {
                stats.identity_checks += 1;
                if !check_field_identity(&rel.cand, target, rep) {
                    return Err(Error::VerificationFailed(format!(
                        "field identity of relation from coset {}",
                        rel.cand.coset
                    )));
                }
            }
            *stats.numerator_degrees.entry(rel.cand.numerator.degree()).or_default() += 1;
            for (f, e) in &rel.lhs.factors {
                debug_assert!(f.degree() <= opts.bound);
                *stats.factor_degrees.entry(f.degree()).or_default() += *e as usize;
            }
            let row: SparseRow = rel.cand.block.iter().map(|&p| (p as usize, 1)).collect();
            let grew = echelon.insert_sparse(&row);
            relations.push(rel);
            if echelon.rank() == ncols && !grew {
                extra += 1;
            } else if echelon.rank() == ncols && grew {
                extra = 0;
            }
            if echelon.rank() == ncols && extra >= opts.margin {
                break 'outer;
            }
        }
    }
    stats.rank = echelon.rank();
    if echelon.rank() < ncols {
        return Err(Error::RankDeficient {
            rank: echelon.rank(),
            needed: ncols,
            rows: relations.len(),
            cosets_tried: stats.cosets_tried,
        });
    }
    Ok(RelationMatrix {
        relations,
        echelon,
        stats,
    })
}

/// One used row of a descent step: its relation and coefficient x_m.
#[derive(Clone, Debug)]
pub struct UsedRow {
    pub relation: Relation,
    pub coeff: BigUint,
}

#[derive(Clone, Debug)]
pub struct StepResult {
    /// log P = constant + h1_exp * log h1 + sum exp * log child  (mod l)
    pub children: Vec<(Poly, BigUint)>,
    pub h1_exp: BigUint,
    pub constant: BigUint,
    pub rows: Vec<UsedRow>,
    pub stats: SieveStats,
}

/// Expresses log P through logs of the lhs factors of relations: solves
/// x * H = e_0 (the column of P - 0) and aggregates.
pub fn descend_step(
    target: &Target,
    lc: &LogContext,
    cosets: &[CosetRep],
    opts: &SieveOptions,
) -> Result<StepResult> {
    let rm = sieve_relations(target, lc, cosets, opts)?;
    combine_step(target, lc, rm)
}

pub fn combine_step(target: &Target, lc: &LogContext, rm: RelationMatrix) -> Result<StepResult> {
    let ctx = lc.ctx();
    let ell = &lc.ell;
    let mu0 = 0usize;
    let x = rm.echelon.express_unit(mu0).ok_or(Error::NotInRowSpan)?;
    let ncols = ctx.size() as usize + 1;
    // multiply back before using the solution
    let rows: Vec<SparseRow> = rm
        .relations
        .iter()
        .map(|r| r.cand.block.iter().map(|&p| (p as usize, 1)).collect())
        .collect();
    crate::linalg::verify_left(&rows, &x, ncols, mu0, ell)?;

    let mut children: BTreeMap<Vec<u32>, (Poly, BigUint)> = BTreeMap::new();
    let mut constant = BigUint::zero();
    let mut xsum = BigUint::zero();
    let mut used = Vec::new();
    for (rel, xm) in rm.relations.into_iter().zip(x) {
        if xm.is_zero() {
            continue;
        }
        xsum += &xm;
        let c = (lc.const_log(rel.lhs.unit)? + ell - lc.const_log(rel.cand.lambda)?) % ell;
        constant = (constant + &xm * c) % ell;
        for (f, e) in &rel.lhs.factors {
            let key: Vec<u32> = f.coeffs().iter().map(|&c| ctx.to_packed(c)).collect();
            let entry = children
                .entry(key)
                .or_insert_with(|| (f.clone(), BigUint::zero()));
            entry.1 = (&entry.1 + &xm * BigUint::from(*e)) % ell;
        }
        used.push(UsedRow {
            relation: rel,
            coeff: xm,
        });
    }
    let h1_exp = (ell - (xsum * BigUint::from(target.d)) % ell) % ell;
    let mut children: Vec<(Poly, BigUint)> = children
        .into_values()
        .filter(|(_, e)| !e.is_zero())
        .collect();
    children.sort_by(|a, b| a.0.canonical_cmp(&b.0, ctx));
    Ok(StepResult {
        children,
        h1_exp,
        constant,
        rows: used,
        stats: rm.stats,
    })
}

#[derive(Clone, Debug)]
pub struct TrapRelation {
    pub trap: Poly,
    pub d: usize,
    pub v: u32,
    pub unit: Fq2,
    pub factors: Vec<(Poly, u32)>,
}

/// R = h1^D * T~(h0/h1) = unit * T^v * prod Q_i^e_i, giving
/// (q - v) log T = clog(unit) + sum e_i log Q_i - D log h1.
pub fn trap_relation(trap: &Poly, lc: &LogContext) -> Result<TrapRelation> {
    let rep = &lc.rep;
    let ctx = &rep.ctx;
    let d = trap.degree();
    let r = homogenize_to(&trap.frobenius_twist(ctx), d, &rep.h0, &rep.h1, ctx);
    let mut rest = r;
    let mut v = 0u32;
    loop {
        let (qt, rem) = rest.divrem(trap, ctx)?;
        if !rem.is_zero() {
            break;
        }
        rest = qt;
        v += 1;
    }
    assert!(v >= 1, "trap does not divide its own R");
    assert!(v as usize <= rep.delta, "trap valuation exceeds delta");
    assert!(
        rest.degree() <= rep.delta.saturating_sub(1) * d,
        "trap cofactor too large"
    );
    let mut rng = SeedSplitter::new(0).stream("trap-factor");
    let fact = factor(&rest, ctx, &mut rng);
    for (f, _) in &fact.factors {
        if rep.is_trap(f) {
            return Err(Error::TrapLoop {
                trap: trap.to_text(ctx),
                other: f.to_text(ctx),
            });
        }
    }
    let coef = rep.q() - v as u64;
    if (BigUint::from(coef) % &lc.ell).is_zero() {
        return Err(Error::NonInvertibleCoefficient(coef));
    }
    Ok(TrapRelation {
        trap: trap.clone(),
        d,
        v,
        unit: fact.unit,
        factors: fact.factors,
    })
}

/// T^(q-v) * h1^D == unit * prod Q_i^e_i  (mod phi).
pub fn check_trap_identity(tr: &TrapRelation, rep: &SparseRep) -> bool {
    let e = BigUint::from(rep.q() - tr.v as u64);
    let mut lhs = rep.pow(&tr.trap, &e);
    for _ in 0..tr.d {
        lhs = rep.mul(&lhs, &rep.h1);
    }
    let mut rhs = rep.reduce(&Poly::constant(tr.unit));
    for (f, e) in &tr.factors {
        rhs = rep.mul(&rhs, &rep.pow(f, &BigUint::from(*e)));
    }
    lhs == rhs
}

/// Logarithms of the monic linear polynomials (and of any irreducible
/// factors of h1 of degree >= 2), from relations with P = X.
///
/// Constants have logarithm 0 mod l whenever l does not divide q^2 - 1, so
/// the relations are homogeneous and fix the logs only up to scale. They are
/// normalized by log(reference) = 1: the reference is the generator when it
/// is linear, otherwise the first linear polynomial of order divisible by l.
#[derive(Clone, Debug)]
pub struct BaseLogs {
    pub reference: Poly,
    /// log_reference(X - mu), indexed by the packed encoding of mu
    pub linear: Vec<BigUint>,
    pub h1_factors: Vec<(Poly, BigUint)>,
    pub rows_used: usize,
    pub cosets_tried: usize,
    pub trap_rows: usize,
    pub reduction_rows: usize,
}

pub fn base_linear_system(lc: &LogContext, cosets: &[CosetRep], margin: usize) -> Result<BaseLogs> {
    let rep = &lc.rep;
    let ctx = &rep.ctx;
    let ell = &lc.ell;
    let size = ctx.size() as usize;
    let mut rng = SeedSplitter::new(0).stream("base-factor");
    let h1_fact = factor(&rep.h1, ctx, &mut rng);
    let mut h1_cols: Vec<(usize, i64)> = Vec::new();
    let mut extra_polys = Vec::new();
    for (f, e) in &h1_fact.factors {
        if f.degree() == 1 {
            let mu = ctx.neg(f.coeff(0));
            h1_cols.push((ctx.to_packed(mu) as usize, *e as i64));
        } else {
            h1_cols.push((size + extra_polys.len(), *e as i64));
            extra_polys.push(f.clone());
        }
    }
    let ncols = size + extra_polys.len();
    let clog_h1 = lc.const_log(h1_fact.unit)?;
    let lin_col = |f: &Poly| ctx.to_packed(ctx.neg(f.coeff(0))) as usize;

    let mut system = crate::linalg::AugmentedSystem::new(&ModL::new(ell)?, ncols);
    let reference = if lc.generator.degree() == 1 {
        lc.generator.clone()
    } else {
        (0..size as u32)
            .map(|pm| Poly::linear(ctx, ctx.from_packed(pm)))
            .find(|f| !lc.project(f).is_one())
            .ok_or_else(|| Error::MissingLog("a linear polynomial of order divisible by l".into()))?
    };
    let ref_proj = lc.project(&reference);
    system.insert(vec![(lin_col(&reference), 1)], BigUint::one());
    // (X - mu)^q = (h0 - mu^q h1) / h1 mod phi; every linear poly whose
    // right side splits gives a row. For a trap, X - mu divides the right side.
    let mut trap_rows = 0;
    for pm in 0..size as u32 {
        let mu = ctx.from_packed(pm);
        let r = rep.h0.sub(&rep.h1.scale(ctx.frobenius(mu), ctx), ctx);
        let fr = factor(&r, ctx, &mut rng);
        if fr.factors.iter().any(|(f, _)| f.degree() != 1) {
            continue;
        }
        let mut row: SparseRow = vec![(pm as usize, rep.q() as i64)];
        for (f, e) in &fr.factors {
            row.push((lin_col(f), -(*e as i64)));
        }
        for &(c, e) in &h1_cols {
            row.push((c, e));
        }
        if rep.is_trap(&Poly::linear(ctx, mu)) {
            trap_rows += 1;
        }
        let rhs = (lc.const_log(fr.unit)? + ell - &clog_h1) % ell;
        system.insert(row, rhs);
    }

    let target = Target::new(&Poly::x(), rep);
    let inf = infinity(ctx) as usize;
    let seeds = SeedSplitter::new(0);
    let mut extra = 0;
    let mut tried = 0;
    'outer: for (ci, chunk) in cosets.chunks(512).enumerate() {
        let start = ci * 512;
        for (off, res) in test_chunk(&target, rep, chunk, start, 1, &seeds).into_iter().enumerate() {
            tried = start + off + 1;
            let Some(rel) = res else { continue };
            let mut row: SparseRow = rel
                .cand
                .block
                .iter()
                .filter(|&&p| p as usize != inf)
                .map(|&p| (p as usize, 1))
                .collect();
            for (f, e) in &rel.lhs.factors {
                row.push((lin_col(f), -(*e as i64)));
            }
            for &(c, e) in &h1_cols {
                row.push((c, e));
            }
            let rhs = (lc.const_log(rel.lhs.unit)? + ell * 2u32
                - lc.const_log(rel.cand.lambda)?
                - &clog_h1)
                % ell;
            let grew = system.insert(row, rhs);
            if system.rank() == ncols {
                if grew {
                    extra = 0;
                } else {
                    extra += 1;
                }
                if extra >= margin {
                    break 'outer;
                }
            }
        }
    }
    // Coset and Frobenius rows hold modulo all of h1*X^q - h0, so every
    // other factor of degree > 1 leaves a kernel direction. Products of k
    // linear polynomials reduced mod phi tell the factors apart.
    let mut reduction_rows = 0;
    if system.rank() < ncols {
        let mut pick = SeedSplitter::new(0).stream("base-reduction");
        let budget = 64 * ncols;
        let mut extra = 0;
        for _ in 0..budget {
            let mut prod = Poly::one();
            let mut row: SparseRow = Vec::with_capacity(2 * rep.k);
            for _ in 0..rep.k {
                let mu = ctx.random(&mut pick);
                prod = prod.mul(&Poly::linear(ctx, mu), ctx);
                row.push((ctx.to_packed(mu) as usize, 1));
            }
            let r = rep.reduce(&prod);
            if !is_smooth(&r, 1, ctx) && extra_polys.is_empty() {
                continue;
            }
            let fr = factor(&r, ctx, &mut rng);
            let mut ok = true;
            for (f, e) in &fr.factors {
                let col = if f.degree() == 1 {
                    lin_col(f)
                } else if let Some(i) = extra_polys.iter().position(|g| g == f) {
                    size + i
                } else {
                    ok = false;
                    break;
                };
                row.push((col, -(*e as i64)));
            }
            if !ok {
                continue;
            }
            let rhs = (ell - lc.const_log(fr.unit)?) % ell;
            let grew = system.insert(row, rhs);
            reduction_rows += 1;
            if system.rank() == ncols {
                if grew {
                    extra = 0;
                }
                extra += 1;
                if extra > margin {
                    break;
                }
            }
        }
    }
    let sol = system.solve()?;
    let linear = sol[..size].to_vec();
    let h1_factors: Vec<(Poly, BigUint)> = extra_polys.into_iter().zip(sol[size..].iter().cloned()).collect();
    // every log is checked by exponentiation before it is handed out
    let check = |f: &Poly, l: &BigUint| lc.project(f) == rep.pow(&ref_proj, l);
    for (i, l) in linear.iter().enumerate() {
        let f = Poly::linear(ctx, ctx.from_packed(i as u32));
        if !check(&f, l) {
            return Err(Error::VerificationFailed(format!("base log of {}", f.to_text(ctx))));
        }
    }
    for (f, l) in &h1_factors {
        if !check(f, l) {
            return Err(Error::VerificationFailed(format!("base log of {}", f.to_text(ctx))));
        }
    }
    Ok(BaseLogs {
        reference,
        linear,
        h1_factors,
        rows_used: system.rows(),
        cosets_tried: tried,
        trap_rows,
        reduction_rows,
    })
}

/// One line per relation: coset key, s, lambda, unit and factor list.
pub fn relation_dump(rel: &Relation, ctx: &FieldCtx) -> String {
    let mut s = String::new();
    let key: String = rel
        .cand
        .block
        .iter()
        .flat_map(|p| p.to_be_bytes())
        .map(|b| format!("{b:02x}"))
        .collect();
    write!(
        s,
        "{key} s={} lambda={} unit={} factors=",
        rel.cand.h1_power,
        ctx.to_packed(rel.cand.lambda),
        ctx.to_packed(rel.lhs.unit)
    )
    .unwrap();
    let parts: Vec<String> = rel
        .lhs
        .factors
        .iter()
        .map(|(f, e)| format!("{}^{}", f.to_text(ctx), e))
        .collect();
    s.push_str(&parts.join(";"));
    s
}
