use num_bigint::BigUint;
use qpdlog::arith::FactorBudget;
use qpdlog::poly::Poly;
use qpdlog::rep::{factor_group_order, find_sparse_rep, LogContext, RepFamily, RepSearch, SearchStrategy};
use qpdlog::{Error, FieldCtx};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

#[test]
fn small_group_orders() {
    let budget = FactorBudget::default();
    let f4 = FieldCtx::new(2, 1, 0).unwrap();
    let rep = find_sparse_rep(&f4, &RepSearch::new(2)).unwrap();
    assert_eq!(factor_group_order(&rep, &budget).unwrap(), vec![(big(3), 1), (big(5), 1)]);
    let f9 = FieldCtx::new(3, 1, 0).unwrap();
    let rep = find_sparse_rep(&f9, &RepSearch::new(2)).unwrap();
    assert_eq!(factor_group_order(&rep, &budget).unwrap(), vec![(big(2), 4), (big(5), 1)]);
}

#[test]
fn q9_k7_order_rebuilds() {
    let ctx = FieldCtx::new(3, 2, 0).unwrap();
    let rep = find_sparse_rep(&ctx, &RepSearch::new(7)).unwrap();
    let fac = factor_group_order(&rep, &FactorBudget::default()).unwrap();
    let prod: BigUint = fac.iter().map(|(p, e)| p.pow(*e)).product();
    assert_eq!(prod, BigUint::from(9u32).pow(14) - 1u32);
}

#[test]
fn q9_k10_needs_nonconstant_h1() {
    // X^9 + X^2 + a has degree 9, so k = 10 must come from the random family
    let ctx = FieldCtx::new(3, 2, 0).unwrap();
    let rep = find_sparse_rep(&ctx, &RepSearch::new(10)).unwrap();
    assert_eq!(rep.family, RepFamily::Random);
    assert!(rep.h1.degree() >= 1);
    assert_eq!(rep.phi.degree(), 10);
    rep.validate().unwrap();
}

#[test]
fn degree_constraint_rejected_before_search() {
    let ctx = FieldCtx::new(2, 2, 0).unwrap();
    let err = find_sparse_rep(&ctx, &RepSearch::new(7)).unwrap_err();
    assert!(matches!(err, Error::DegreeConstraint { k: 7, q: 4, delta: 2 }));
}

#[test]
fn frobenius_of_x_is_h0_over_h1() {
    for (p, m, k) in [(3, 2, 7), (5, 1, 4), (2, 3, 9)] {
        let ctx = FieldCtx::new(p, m, 0).unwrap();
        let rep = find_sparse_rep(&ctx, &RepSearch::new(k)).unwrap();
        let xq = Poly::x().powmod(&big(ctx.q()), &rep.phi, &ctx).unwrap();
        let rhs = rep.mul(&rep.h0, &rep.inv(&rep.h1).unwrap());
        assert_eq!(xq, rhs);
        // and directly: h1 X^q - h0 vanishes mod phi
        assert!(rep.reduce(&rep.defining_poly()).is_zero());
        for (t, _) in &rep.traps {
            assert_ne!(t, &rep.phi);
        }
    }
}

#[test]
fn random_family_with_delta_one() {
    let ctx = FieldCtx::new(5, 1, 0).unwrap();
    let search = RepSearch {
        delta_max: 1,
        strategy: SearchStrategy::Random,
        seed: 3,
        ..RepSearch::new(5)
    };
    let rep = find_sparse_rep(&ctx, &search).unwrap();
    assert_eq!(rep.family, RepFamily::Random);
    assert!(rep.delta <= 1);
    rep.validate().unwrap();
}

#[test]
fn log_context_invariants() {
    let ctx = FieldCtx::new(3, 2, 0).unwrap();
    let rep = find_sparse_rep(&ctx, &RepSearch::new(7)).unwrap();
    let lc = LogContext::new(rep, None, &FactorBudget::default()).unwrap();
    assert!(lc.order_fully_factored());
    // largest prime factor by default
    assert_eq!(&lc.ell, lc.factorization.primes.keys().last().unwrap());
    for r in lc.factorization.primes.keys() {
        assert!(!lc.rep.pow(&lc.generator, &(&lc.order / r)).is_one());
    }
    let x = lc.rep.reduce(&lc.generator);
    assert!(lc.rep.pow(&x, &lc.order).is_one());

    assert_eq!(lc.const_log(qpdlog::Fq2::ONE).unwrap(), BigUint::from(0u32));
    let g1 = lc.const_generator();
    let n_over = &lc.order / (ctx.size() - 1);
    assert_eq!(lc.const_log(ctx.pow(g1, 5)).unwrap(), (n_over * 5u32) % &lc.ell);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..30 {
        let a = ctx.random_nonzero(&mut rng);
        let b = ctx.random_nonzero(&mut rng);
        let la = lc.const_log(a).unwrap();
        let lb = lc.const_log(b).unwrap();
        assert_eq!(lc.const_log(ctx.mul(a, b)).unwrap(), (&la + &lb) % &lc.ell);
        assert!(lc.check_log(&Poly::constant(a), &la));
    }
    // subgroup check on powers of the generator
    for _ in 0..5 {
        let e = rng.gen_range(0u64..1 << 40);
        let x = lc.rep.pow(&lc.generator, &big(e));
        assert!(lc.check_log(&x, &(big(e) % &lc.ell)));
        assert!(!lc.check_log(&x, &((big(e) + 1u32) % &lc.ell)));
    }
}

#[test]
fn rep_file_round_trip() {
    let ctx = FieldCtx::new(2, 3, 0).unwrap();
    let rep = find_sparse_rep(&ctx, &RepSearch::new(5)).unwrap();
    let lc = LogContext::new(rep, None, &FactorBudget::default()).unwrap();
    let text = lc.to_text();
    let back = LogContext::from_text(&text).unwrap();
    assert_eq!(back.to_text(), text);
    assert_eq!(back.rep.phi, lc.rep.phi);
    // tampering with phi is caught
    let bad = text.replace(&format!("phi={}", lc.rep.phi.to_text(&ctx)), "phi=1,1");
    assert!(LogContext::from_text(&bad).is_err());
}

#[test]
fn degenerate_modulus_flagged() {
    // l = 5 divides 3^4 - 1 = q^2 - 1 for q = 3
    let ctx = FieldCtx::new(3, 1, 0).unwrap();
    let rep = find_sparse_rep(&ctx, &RepSearch::new(3)).unwrap();
    let lc = LogContext::new(rep, Some(big(2)), &FactorBudget::default()).unwrap();
    assert!(matches!(lc.const_log(ctx.from_int(2)), Err(Error::DegenerateModulus(_))));
    let rep = find_sparse_rep(&ctx, &RepSearch::new(3)).unwrap();
    assert!(matches!(
        LogContext::new(rep, Some(big(11)), &FactorBudget::default()),
        Err(Error::BadModulus(_))
    ));
}
