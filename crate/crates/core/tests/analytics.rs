mod common;

use num_bigint::BigUint;
use proptest::prelude::*;
use qpdlog::analytics::{
    count_smooth, design_identity_experiment, dickman_rho, h_scan, h_scan_field, irreducible_count,
    odd_prime_powers, ratio, smoothness_rate, submatrix_determinant_experiment, DickmanTable, SmoothCountTable,
};
use qpdlog::arith::FactorBudget;
use qpdlog::rep::{find_sparse_rep, LogContext, RepSearch};
use qpdlog::FieldCtx;

use common::{brute_smooth_counts, TaylorRho};

#[test]
fn smooth_count_small_cases() {
    assert_eq!(count_smooth(2, 2, 1), BigUint::from(3u32));
    assert_eq!(count_smooth(2, 2, 2), BigUint::from(4u32));
    assert_eq!(irreducible_count(2, 4), BigUint::from(3u32));
    assert_eq!(irreducible_count(3, 2), BigUint::from(3u32));
    assert_eq!(irreducible_count(4, 3), BigUint::from(20u32));
}

#[test]
fn smooth_count_matches_brute_force_q3() {
    for n in 1..=6 {
        let brute = brute_smooth_counts(3, n);
        for m in 1..=n {
            assert_eq!(count_smooth(3, n, m), BigUint::from(brute[m]), "n={n} m={m}");
        }
    }
}

#[test]
fn smooth_count_table_invariants() {
    for q in [2u64, 5, 9, 53 * 53] {
        let t = SmoothCountTable::new(q, 12);
        for n in 1..=12 {
            assert_eq!(t.get(n, n), &BigUint::from(q).pow(n as u32));
            for m in 2..=n {
                assert!(t.get(n, m) >= t.get(n, m - 1));
            }
        }
        // sum_{d | n} d I(d) = q^n
        for n in 1..=12usize {
            let s: BigUint = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| BigUint::from(d) * &t.irreducible[d])
                .sum();
            assert_eq!(s, BigUint::from(q).pow(n as u32));
        }
    }
}

#[test]
fn tiny_probabilities_do_not_underflow() {
    assert_eq!(ratio(&BigUint::from(1u32), &(BigUint::from(1u32) << 200)), 2f64.powi(-200));
    assert_eq!(ratio(&(BigUint::from(3u32) << 500), &(BigUint::from(1u32) << 501)), 1.5);
    // N(20, 1) / Q^20 = C(Q + 19, 20) / Q^20 = prod (Q + j) / (Q (j + 1))
    let q = 53u64 * 53;
    let t = SmoothCountTable::new(q, 20);
    let want: f64 = (0..20).map(|j| (q + j) as f64 / (q as f64 * (j + 1) as f64)).product();
    let got = t.probability(20, 1);
    assert!((got / want - 1.0).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn dickman_closed_forms() {
    assert_eq!(dickman_rho(0.0), 1.0);
    assert_eq!(dickman_rho(0.5), 1.0);
    assert_eq!(dickman_rho(1.0), 1.0);
    for i in 0..=1000 {
        let u = 1.0 + i as f64 / 1000.0;
        assert!((dickman_rho(u) - (1.0 - u.ln())).abs() <= 1e-9, "u = {u}");
    }
    assert!((dickman_rho(2.0) - (1.0 - 2f64.ln())).abs() <= 1e-12);
}

#[test]
fn dickman_matches_taylor_oracle() {
    let oracle = TaylorRho::new(12);
    let mut u = 0.0;
    while u <= 10.0 {
        let a = dickman_rho(u);
        let b = oracle.eval(u);
        assert!((a - b).abs() <= 1e-12, "u = {u}: {a} vs {b}");
        u += 0.00731;
    }
    // rho(6), which the smoothness discussion uses
    assert!((dickman_rho(6.0) - oracle.eval(6.0)).abs() <= 1e-12);
    assert!((oracle.eval(6.0) - 1.9649696e-5).abs() < 1e-11);
}

#[test]
fn dickman_monotone_and_continuous() {
    let t = DickmanTable::new(12.0);
    let mut prev = t.eval(1.0);
    for i in 1..=1100 {
        let u = 1.0 + i as f64 / 100.0;
        let v = t.eval(u);
        assert!(v < prev && v > 0.0, "u = {u}");
        assert!(prev - v < 0.01);
        prev = v;
    }
    // beyond about u = 12 only the absolute error (~1e-15) is meaningful
    assert!(dickman_rho(25.0).abs() < 1e-14);
}

#[test]
fn design_identities_small_q() {
    for (p, m) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3)] {
        let ctx = FieldCtx::new(p, m, 0).unwrap();
        let rep = design_identity_experiment(&ctx, &[101, 1009, 65537]).unwrap();
        let q = ctx.q();
        assert_eq!(rep.summary_value("blocks").unwrap(), (q * q * q + q).to_string());
        assert!(!rep.rows.is_empty());
    }
}

#[test]
fn determinant_experiment_is_reproducible() {
    let ctx = FieldCtx::new(2, 2, 0).unwrap();
    let (a, sa) = submatrix_determinant_experiment(&ctx, 10, 3).unwrap();
    let (b, _) = submatrix_determinant_experiment(&ctx, 10, 3).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    assert_eq!(a.rows.len(), 10);
    let (c, _) = submatrix_determinant_experiment(&ctx, 10, 4).unwrap();
    assert_ne!(a.to_text(), c.to_text());
    if sa.zero_count == 0 {
        assert!(!sa.gcd_primes.is_empty() || sa.gcd_unfactored.is_empty());
    }
    assert_eq!(a.file_name(), "table1-q4-trials10-seed3.txt");
}

#[test]
fn hscan_examples() {
    let ctx = FieldCtx::new(3, 2, 0).unwrap();
    let found = h_scan_field(&ctx, 9);
    let a = found[&9].expect("a degree-9 witness exists for q = 9");
    // the witness makes X^9 + X^2 + a irreducible
    let mut c = vec![qpdlog::Fq2::ZERO; 10];
    c[9] = qpdlog::Fq2::ONE;
    c[2] = qpdlog::Fq2::ONE;
    c[0] = a;
    assert!(qpdlog::poly::is_irreducible(&qpdlog::poly::Poly::from_coeffs(c), &ctx));

    let rep = h_scan(&[3], Some(4)).unwrap();
    let last = rep.rows.last().unwrap();
    assert_eq!(last[1], "4");
    assert_eq!(last[2], "not_attempted");
    assert_eq!(rep.summary_value("success_rate").unwrap(), "1.000000");
    assert_eq!(odd_prime_powers(3, 30), vec![3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27, 29]);
}

#[test]
fn numerator_smoothness_q9() {
    let ctx = FieldCtx::new(3, 2, 0).unwrap();
    let rep = find_sparse_rep(&ctx, &RepSearch::new(7)).unwrap();
    let _lc = LogContext::new(rep.clone(), None, &FactorBudget::default()).unwrap();
    let r = smoothness_rate(&rep, 4, 2, 10_000, 1).unwrap();
    let ratio = r.ratio();
    assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
    assert!(r.interval.0 <= r.empirical && r.empirical <= r.interval.1);
    // B = max numerator degree accepts everything
    let top = *r.degrees.keys().max().unwrap();
    let all = smoothness_rate(&rep, 4, top, 500, 2).unwrap();
    assert_eq!(all.smooth, 500);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn smooth_counts_are_multiplicative_in_degree(q in prop::sample::select(vec![2u64, 3, 4, 5, 7, 8, 9]), n in 2usize..9) {
        // N(n, 1) = C(q + n - 1, n)
        let t = SmoothCountTable::new(q, n);
        let mut c = BigUint::from(1u32);
        for j in 0..n {
            c = c * BigUint::from(q + j as u64) / BigUint::from(j as u64 + 1);
        }
        prop_assert_eq!(t.get(n, 1), &c);
    }
}
