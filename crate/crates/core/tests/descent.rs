use std::sync::OnceLock;

use num_bigint::BigUint;
use qpdlog::arith::FactorBudget;
use qpdlog::cosets::{enumerate_cosets, CosetRep};
use qpdlog::descent::{
    bsgs_log_mod_ell, check_certificate, compute_base, descend, full_dlog, verify_log, BigFieldGroup, CertNode,
    DescentCertificate, DescentOptions, DlogOptions, LogDB, Provenance,
};
use qpdlog::group::{pohlig_hellman, Group};
use qpdlog::poly::Poly;
use qpdlog::rep::{find_sparse_rep, LogContext, RepSearch, SearchStrategy};
use qpdlog::{Error, FieldCtx};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn context(p: u64, m: u32, k: usize, seed: u64) -> LogContext {
    let ctx = FieldCtx::new(p, m, 0).unwrap();
    let search = RepSearch {
        delta_max: 1,
        strategy: SearchStrategy::Random,
        seed,
        ..RepSearch::new(k)
    };
    let rep = find_sparse_rep(&ctx, &search).unwrap();
    LogContext::new(rep, None, &FactorBudget::default()).unwrap()
}

struct Desk {
    lc: LogContext,
    cosets: Vec<CosetRep>,
    db: LogDB,
}

// q = 32, k = 3: the smallest field here where degree-2 descent has enough
// relations (about 1.3 per column)
fn desk() -> &'static Desk {
    static D: OnceLock<Desk> = OnceLock::new();
    D.get_or_init(|| {
        let lc = context(2, 5, 3, 1);
        let cosets = enumerate_cosets(lc.ctx()).unwrap();
        let db = compute_base(&lc, &cosets, 1, &DescentOptions::default()).unwrap();
        Desk { lc, cosets, db }
    })
}

fn oracle_pow(lc: &LogContext, e: &BigUint) -> Poly {
    lc.rep.pow(&lc.generator, e)
}

#[test]
fn base_logs_verify() {
    let d = desk();
    let ctx = d.lc.ctx();
    assert_eq!(d.db.len(), ctx.size() as usize + usize::from(d.lc.rep.h1.degree() > 1));
    for e in d.db.entries() {
        assert_eq!(e.provenance, Provenance::Base);
        assert!(verify_log(&e.poly, &e.value, &d.lc));
    }
    let x = d.db.get(&Poly::x(), ctx).unwrap();
    assert!(verify_log(&Poly::x(), &x.value, &d.lc));
}

#[test]
fn descent_matches_bsgs() {
    let d = desk();
    let ctx = d.lc.ctx();
    let mut db = d.db.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let p = Poly::random_monic_irreducible(2, ctx, &mut rng);
        let (v, cert) = descend(&p, &d.lc, &d.cosets, &mut db, &DescentOptions::default()).unwrap();
        assert_eq!(v, bsgs_log_mod_ell(&p, &d.lc).unwrap());
        check_certificate(&cert, &d.lc).unwrap();
        assert_eq!(cert.root.steps(), 1);
        assert!(cert.root.step_depth() <= 2);
        // arity is bounded by (1 + delta) * D * (q^2 + 1)
        assert!(cert.root.max_arity() <= 2 * 2 * (ctx.size() as usize + 1));
    }
}

#[test]
fn homomorphism_on_products() {
    let d = desk();
    let ctx = d.lc.ctx();
    let mut db = d.db.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ell = &d.lc.ell;
    for _ in 0..3 {
        let a = ctx.random(&mut rng);
        let b = ctx.random(&mut rng);
        let la = &db.get(&Poly::linear(ctx, a), ctx).unwrap().value.clone();
        let lb = &db.get(&Poly::linear(ctx, b), ctx).unwrap().value.clone();
        let prod = Poly::linear(ctx, a).mul(&Poly::linear(ctx, b), ctx);
        let (v, _) = descend(&prod, &d.lc, &d.cosets, &mut db, &DescentOptions::default()).unwrap();
        assert_eq!(v, (la + lb) % ell);
    }
    // constants and the generator
    let (v, _) = descend(&d.lc.generator, &d.lc, &d.cosets, &mut db, &DescentOptions::default()).unwrap();
    assert_eq!(v, BigUint::from(1u32));
    let (v, _) = descend(&Poly::one(), &d.lc, &d.cosets, &mut db, &DescentOptions::default()).unwrap();
    assert_eq!(v, BigUint::from(0u32));
}

#[test]
fn memo_does_not_change_results() {
    let d = desk();
    let ctx = d.lc.ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let f = Poly::random_monic_irreducible(2, ctx, &mut rng);
    // degree 2 = k - 1, so no reduction mod phi happens
    let target = f.scale(ctx.from_int(3), ctx);
    let mut with = d.db.clone();
    let (v1, c1) = descend(&target, &d.lc, &d.cosets, &mut with, &DescentOptions::default()).unwrap();
    let mut without = d.db.clone();
    let opts = DescentOptions {
        memo: false,
        ..DescentOptions::default()
    };
    let (v2, _) = descend(&target, &d.lc, &d.cosets, &mut without, &opts).unwrap();
    assert_eq!(v1, v2);
    assert_eq!(without.len(), d.db.len());
    assert!(with.len() > d.db.len());
    check_certificate(&c1, &d.lc).unwrap();
    // a second run is a pure lookup
    let (v3, c3) = descend(&f, &d.lc, &d.cosets, &mut with, &DescentOptions::default()).unwrap();
    assert_eq!(c3.root.steps(), 0);
    assert!(verify_log(&f, &v3, &d.lc));
}

#[test]
fn certificate_text_round_trip_and_tamper() {
    let d = desk();
    let ctx = d.lc.ctx();
    let mut db = d.db.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = Poly::random_monic_irreducible(2, ctx, &mut rng).mul(&Poly::linear(ctx, ctx.random(&mut rng)), ctx);
    let (_, cert) = descend(&p, &d.lc, &d.cosets, &mut db, &DescentOptions::default()).unwrap();
    let text = cert.to_text(ctx);
    let back = DescentCertificate::from_text(&text, ctx).unwrap();
    assert_eq!(back, cert);
    check_certificate(&back, &d.lc).unwrap();

    // change one row coefficient
    let mut bad = cert.clone();
    fn first_step(n: &mut CertNode) -> Option<&mut CertNode> {
        match n {
            CertNode::Step { .. } => Some(n),
            CertNode::Product { factors, .. } => factors.iter_mut().find_map(|(_, c)| first_step(c)),
            _ => None,
        }
    }
    if let Some(CertNode::Step { rows, .. }) = first_step(&mut bad.root) {
        rows[0].coeff = (&rows[0].coeff + 1u32) % &d.lc.ell;
    }
    assert!(matches!(check_certificate(&bad, &d.lc), Err(Error::VerificationFailed(_))));

    // change the claimed value at the root
    let mut bad = cert;
    if let CertNode::Product { value, .. } = &mut bad.root {
        *value = (&*value + 1u32) % &d.lc.ell;
    }
    assert!(check_certificate(&bad, &d.lc).is_err());
    assert!(DescentCertificate::from_text("certificate ell=3", ctx).is_err());
}

#[test]
fn logdb_file_round_trip_and_tamper() {
    let d = desk();
    let ctx = d.lc.ctx();
    let text = d.db.to_text(ctx);
    let back = LogDB::from_text(&text, &d.lc).unwrap();
    assert_eq!(back.len(), d.db.len());
    // alter the value on the fifth entry line
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let idx = lines.iter().position(|l| !l.starts_with('#')).unwrap() + 4;
    let mut parts: Vec<String> = lines[idx].split(':').map(String::from).collect();
    let v: BigUint = parts[1].parse().unwrap();
    parts[1] = ((v + 1u32) % &d.lc.ell).to_string();
    lines[idx] = parts.join(":");
    assert!(matches!(
        LogDB::from_text(&lines.join("\n"), &d.lc),
        Err(Error::VerificationFailed(_))
    ));
}

#[test]
fn verify_log_trivia() {
    let d = desk();
    let g = &d.lc.generator;
    let g2 = d.lc.rep.mul(g, g);
    assert!(verify_log(g, &BigUint::from(1u32), &d.lc));
    assert!(!verify_log(&g2, &BigUint::from(1u32), &d.lc));
    assert!(verify_log(&g2, &BigUint::from(2u32), &d.lc));
}

#[test]
fn trap_in_descent_tree() {
    // q = 8, k = 7, delta = 1: h1*X^8 - h0 = phi * (two linear traps)
    let lc = context(2, 3, 7, 7);
    let ctx = lc.ctx();
    let cosets = enumerate_cosets(ctx).unwrap();
    let opts = DescentOptions::default();
    let mut db = compute_base(&lc, &cosets, 1, &opts).unwrap();
    let trap = lc.rep.traps.iter().find(|(t, _)| t.degree() == 1).unwrap().0.clone();
    let target = trap.mul(&Poly::linear(ctx, ctx.from_int(1)), ctx);
    let (v, cert) = descend(&target, &lc, &cosets, &mut db, &opts).unwrap();
    assert_eq!(v, bsgs_log_mod_ell(&target, &lc).unwrap());
    check_certificate(&cert, &lc).unwrap();
    let text = cert.to_text(ctx);
    assert!(text.contains("\n    trap poly="));

    // full log through Pohlig-Hellman, large primes by descent
    let dopts = DlogOptions {
        threshold: BigUint::from(100u32),
        ..DlogOptions::default()
    };
    let (x, parts) = full_dlog(&target, &lc, &dopts).unwrap();
    assert!(parts.iter().any(|p| p.by_descent));
    let group = BigFieldGroup(&lc.rep);
    let fact: Vec<(BigUint, u32)> = lc.factorization.primes.iter().map(|(p, e)| (p.clone(), *e)).collect();
    let oracle = pohlig_hellman(&group, &lc.generator, &target, &lc.order, &fact).unwrap();
    assert_eq!(x, oracle);
}

#[test]
fn full_dlog_round_trips() {
    // q = 9, k = 5 (5 divides q + 1)
    let lc = context(3, 2, 5, 3);
    let opts = DlogOptions::default();
    let (x, _) = full_dlog(&lc.generator, &lc, &opts).unwrap();
    assert_eq!(x, BigUint::from(1u32));
    let (x, _) = full_dlog(&Poly::one(), &lc, &opts).unwrap();
    assert_eq!(x, BigUint::from(0u32));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let e = BigUint::from(rng.gen::<u64>()) % &lc.order;
        let t = oracle_pow(&lc, &e);
        let (x, _) = full_dlog(&t, &lc, &opts).unwrap();
        assert_eq!(x, e);
        assert_eq!(BigFieldGroup(&lc.rep).pow(&lc.generator, &x), t);
    }
    assert!(matches!(
        full_dlog(&Poly::zero(), &lc, &opts),
        Err(Error::NotInSubgroup)
    ));
}
