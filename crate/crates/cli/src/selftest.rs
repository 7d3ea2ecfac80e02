//! Small-field invariant suite behind `qpdlog selftest`.

use num_bigint::BigUint;
use rand::Rng;
use qpdlog::analytics::{design_identity_experiment, dickman_rho, SmoothCountTable};
use qpdlog::arith::{factor_q_power_minus_one, FactorBudget};
use qpdlog::descent::{full_dlog, BigFieldGroup, DlogOptions};
use qpdlog::group::Group;
use qpdlog::rep::{find_sparse_rep, LogContext, RepSearch, SearchStrategy};
use qpdlog::rng::SeedSplitter;
use qpdlog::{Error, FieldCtx};

fn check(name: &str, ok: bool) -> Result<(), Error> {
    if ok {
        println!("ok   {name}");
        Ok(())
    } else {
        println!("FAIL {name}");
        Err(Error::VerificationFailed(name.to_string()))
    }
}

pub fn run() -> Result<(), Error> {
    for (p, m) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
        let ctx = FieldCtx::new(p, m, 0)?;
        let q = ctx.q();
        let rep = design_identity_experiment(&ctx, &[101, 1009])?;
        let blocks = rep.summary_value("blocks").unwrap_or("");
        check(&format!("design q={q}"), blocks == (q * q * q + q).to_string())?;
    }

    for q in [2u64, 3, 4, 9] {
        let t = SmoothCountTable::new(q, 10);
        let ok = (1..=10usize).all(|n| {
            let total: BigUint = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| BigUint::from(d) * &t.irreducible[d])
                .sum();
            t.get(n, n) == &BigUint::from(q).pow(n as u32) && total == *t.get(n, n)
        });
        check(&format!("smooth counts Q={q}"), ok)?;
    }

    let worst = (0..=1000)
        .map(|i| 1.0 + i as f64 / 1000.0)
        .map(|u| (dickman_rho(u) - (1.0 - u.ln())).abs())
        .fold(0.0, f64::max);
    check("dickman on [1,2]", worst <= 1e-9)?;

    for (q, k) in [(2u64, 5u64), (3, 4), (4, 3), (9, 5)] {
        let f = factor_q_power_minus_one(q, 2 * k, &FactorBudget::default());
        check(
            &format!("order q={q} k={k}"),
            f.is_complete() && f.product() == BigUint::from(q).pow(2 * k as u32) - 1u32,
        )?;
    }

    // full log through Pohlig-Hellman with the descent on the large prime
    let ctx = FieldCtx::new(3, 2, 0)?;
    let search = RepSearch {
        delta_max: 1,
        strategy: SearchStrategy::Random,
        seed: 3,
        ..RepSearch::new(5)
    };
    let lc = LogContext::new(find_sparse_rep(&ctx, &search)?, None, &FactorBudget::default())?;
    let group = BigFieldGroup(&lc.rep);
    let mut rng = SeedSplitter::new(0).stream("selftest");
    let opts = DlogOptions::default();
    for i in 0..3 {
        let e = BigUint::from(rng.gen::<u64>()) % &lc.order;
        let t = group.pow(&lc.generator, &e);
        let (x, _) = full_dlog(&t, &lc, &opts)?;
        check(&format!("full dlog q=9 k=5 #{i}"), x == e)?;
    }
    println!("selftest passed");
    Ok(())
}
