//! Experiment harness: exact smooth-polynomial counts, the Dickman function,
//! the design identities, random-submatrix determinants, the X^q + X^2 + a
//! scan and empirical smoothness rates of relation numerators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::Rng;

use crate::arith::{divisors, factor_u64, factor_with_limits, is_prime_u64, mobius};
use crate::cosets::{enumerate_cosets, incidence_vector, CosetRep};
use crate::error::{Error, Result};
use crate::gf::{FieldCtx, Fq2};
use crate::linalg::{det_exact, rank_mod};
use crate::poly::{factor_degrees, is_smooth, Poly};
use crate::relation::{build_candidate, Target};
use crate::rep::SparseRep;
use crate::rng::SeedSplitter;

// ---- smooth counts ----

/// Number of monic irreducible polynomials of degree d over F_Q.
pub fn irreducible_count(q: u64, d: usize) -> BigUint {
    let qb = BigUint::from(q);
    let mut pos = BigUint::zero();
    let mut neg = BigUint::zero();
    for e in divisors(d as u64) {
        let term = qb.pow((d as u64 / e) as u32);
        match mobius(e) {
            1 => pos += term,
            -1 => neg += term,
            _ => {}
        }
    }
    (pos - neg) / BigUint::from(d)
}

/// Exact counts N(n, m) of m-smooth monic polynomials of degree n over F_Q,
/// for all m <= n <= n_max.
#[derive(Clone, Debug)]
pub struct SmoothCountTable {
    pub q: u64,
    pub n_max: usize,
    /// irreducible[d] = I(d), index 0 unused
    pub irreducible: Vec<BigUint>,
    /// counts[m][n]
    counts: Vec<Vec<BigUint>>,
}

impl SmoothCountTable {
    /// Multiplies in the factor prod_{d <= m} (1 - x^d)^{-I(d)} one degree
    /// at a time; (1 - x^d)^{-I} = sum_j C(I + j - 1, j) x^{dj}.
    pub fn new(q: u64, n_max: usize) -> Self {
        let irreducible: Vec<BigUint> = std::iter::once(BigUint::zero())
            .chain((1..=n_max).map(|d| irreducible_count(q, d)))
            .collect();
        let mut cur = vec![BigUint::zero(); n_max + 1];
        cur[0] = BigUint::one();
        let mut counts = vec![cur.clone()];
        for d in 1..=n_max {
            let i_d = &irreducible[d];
            // multiset coefficients C(I + j - 1, j) for j = 0..n_max/d
            let jmax = n_max / d;
            let mut mult = vec![BigUint::one(); jmax + 1];
            for j in 1..=jmax {
                mult[j] = &mult[j - 1] * (i_d + BigUint::from(j - 1)) / BigUint::from(j);
            }
            let mut next = vec![BigUint::zero(); n_max + 1];
            for (n, slot) in next.iter_mut().enumerate() {
                let mut acc = BigUint::zero();
                for (j, c) in mult.iter().enumerate().take(n / d + 1) {
                    if !cur[n - j * d].is_zero() {
                        acc += c * &cur[n - j * d];
                    }
                }
                *slot = acc;
            }
            cur = next;
            counts.push(cur.clone());
        }
        SmoothCountTable {
            q,
            n_max,
            irreducible,
            counts,
        }
    }

    /// N(n, m); m above n is clamped to n.
    pub fn get(&self, n: usize, m: usize) -> &BigUint {
        &self.counts[m.min(n)][n]
    }

    /// N(n, m) / Q^n as a float.
    pub fn probability(&self, n: usize, m: usize) -> f64 {
        ratio(self.get(n, m), &BigUint::from(self.q).pow(n as u32))
    }
}

/// num / den for big integers, as f64. Each side keeps its own top 60 bits,
/// so tiny ratios do not underflow to zero.
pub fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    if den.is_zero() {
        return f64::NAN;
    }
    let top = |x: &BigUint| {
        let s = x.bits().saturating_sub(60);
        ((x >> s).to_f64().unwrap_or(f64::INFINITY), s as i64)
    };
    let (n, sn) = top(num);
    let (d, sd) = top(den);
    let e = (sn - sd).clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    n / d * 2f64.powi(e)
}

/// Exact number of m-smooth monic polynomials of degree n over F_Q.
pub fn count_smooth(q: u64, n: usize, m: usize) -> BigUint {
    assert!(m >= 1 && m <= n, "need 1 <= m <= n");
    SmoothCountTable::new(q, n).get(n, m).clone()
}

// ---- Dickman rho ----

/// Dickman's function on a grid of spacing 5e-5 (the integration step is
/// 1e-4 = two grid cells), from u rho'(u) = -rho(u - 1):
///   rho(x) = rho(x - h) - int_{x-h}^{x} rho(t - 1) / t dt
/// with the integral by Simpson's rule on grid points only. rho has a
/// derivative jump at every integer, so no Simpson step straddles one: the
/// point one cell past each integer is restarted from the integer itself
/// with a one-sided interpolated midpoint. Absolute error is about 1e-15,
/// so relative accuracy is lost once rho drops below ~1e-12 (u > 12).
#[derive(Clone, Debug)]
pub struct DickmanTable {
    /// values at i * GRID for i in 0..len
    values: Vec<f64>,
}

const GRID: f64 = 5e-5;
const PER_UNIT: usize = 20_000;

impl DickmanTable {
    pub fn new(u_max: f64) -> Self {
        let n = (u_max.max(1.0) * PER_UNIT as f64).ceil() as usize + 4;
        let mut v = vec![1.0; n.max(PER_UNIT + 4)];
        for i in PER_UNIT + 1..v.len() {
            let x = i as f64 * GRID;
            let f = |v: &[f64], j: usize, t: f64| v[j - PER_UNIT] / t;
            v[i] = if i % PER_UNIT == 1 {
                // [x - g, x] with x - g an integer; midpoint rho from the
                // four grid values starting at x - g - 1
                let j = i - 1 - PER_UNIT;
                let mid = 0.3125 * v[j] + 0.9375 * v[j + 1] - 0.3125 * v[j + 2] + 0.0625 * v[j + 3];
                let a = x - GRID;
                v[i - 1] - GRID / 6.0 * (f(&v, i - 1, a) + 4.0 * mid / (a + GRID / 2.0) + f(&v, i, x))
            } else {
                v[i - 2] - GRID / 3.0 * (f(&v, i - 2, x - 2.0 * GRID) + 4.0 * f(&v, i - 1, x - GRID) + f(&v, i, x))
            };
        }
        DickmanTable { values: v }
    }

    pub fn u_max(&self) -> f64 {
        (self.values.len() - 4) as f64 * GRID
    }

    /// Four-point Lagrange interpolation inside one unit interval.
    pub fn eval(&self, u: f64) -> f64 {
        assert!(u >= 0.0, "rho is defined for u >= 0");
        if u <= 1.0 {
            return 1.0;
        }
        assert!(u <= self.u_max(), "u beyond table range");
        let s = u / GRID;
        let i = s.floor() as usize;
        if s == i as f64 {
            return self.values[i];
        }
        let lo = i / PER_UNIT * PER_UNIT;
        let i0 = i.saturating_sub(1).clamp(lo, lo + PER_UNIT - 3);
        let xs = [i0, i0 + 1, i0 + 2, i0 + 3];
        let mut acc = 0.0;
        for (a, &xa) in xs.iter().enumerate() {
            let mut w = 1.0;
            for (b, &xb) in xs.iter().enumerate() {
                if a != b {
                    w *= (s - xb as f64) / (xa as f64 - xb as f64);
                }
            }
            acc += w * self.values[xa];
        }
        acc
    }
}

/// rho(u), from a shared table covering [0, 20] (a larger table is built on
/// demand beyond that).
pub fn dickman_rho(u: f64) -> f64 {
    static TABLE: OnceLock<DickmanTable> = OnceLock::new();
    let t = TABLE.get_or_init(|| DickmanTable::new(20.0));
    if u <= t.u_max() {
        t.eval(u)
    } else {
        DickmanTable::new(u + 1.0).eval(u)
    }
}

// ---- reports ----

/// Parameters, per-trial rows and summary of one experiment run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    pub params: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
}

impl ExperimentReport {
    pub fn new(name: &str, seed: u64) -> Self {
        ExperimentReport {
            name: name.to_string(),
            seed,
            ..Default::default()
        }
    }

    pub fn param(&mut self, k: &str, v: impl ToString) {
        self.params.push((k.to_string(), v.to_string()));
    }

    pub fn stat(&mut self, k: &str, v: impl ToString) {
        self.summary.push((k.to_string(), v.to_string()));
    }

    pub fn summary_value(&self, k: &str) -> Option<&str> {
        self.summary.iter().find(|(a, _)| a == k).map(|(_, v)| v.as_str())
    }

    /// `# experiment=...`, `# param k=v` and `# seed=` header lines, the CSV
    /// table, then `# summary k=v` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# experiment={}", self.name).unwrap();
        writeln!(s, "# seed={}", self.seed).unwrap();
        for (k, v) in &self.params {
            writeln!(s, "# param {k}={v}").unwrap();
        }
        if !self.columns.is_empty() {
            writeln!(s, "{}", self.columns.join(",")).unwrap();
            for r in &self.rows {
                writeln!(s, "{}", r.join(",")).unwrap();
            }
        }
        for (k, v) in &self.summary {
            writeln!(s, "# summary {k}={v}").unwrap();
        }
        s
    }

    /// `<name>-<k>=<v>-...-seed<seed>.txt`
    pub fn file_name(&self) -> String {
        let mut s = self.name.clone();
        for (k, v) in &self.params {
            let v: String = v
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                .collect();
            write!(s, "-{k}{v}").unwrap();
        }
        write!(s, "-seed{}.txt", self.seed).unwrap();
        s
    }
}

// ---- design identities ----

/// Exact checks of H^T H = (q+1)(J - (1-q)I), the column sums, and the rank
/// of H over a few primes l not dividing q^3 - q. Any failure is an error.
pub fn design_identity_experiment(ctx: &FieldCtx, primes: &[u64]) -> Result<ExperimentReport> {
    let q = ctx.q();
    let n = (q * q + 1) as usize;
    let cosets = enumerate_cosets(ctx)?;
    let rows: Vec<Vec<u8>> = cosets.iter().map(|c| incidence_vector(ctx, c)).collect();
    let mut gram = vec![vec![0u64; n]; n];
    for c in &cosets {
        for &a in &c.block {
            for &b in &c.block {
                gram[a as usize][b as usize] += 1;
            }
        }
    }
    let fail = |what: String| Error::VerificationFailed(format!("design identity, q = {q}: {what}"));
    for (i, row) in gram.iter().enumerate() {
        for (j, &g) in row.iter().enumerate() {
            let want = if i == j { q * q + q } else { q + 1 };
            if g != want {
                return Err(fail(format!("H^T H[{i}][{j}] = {g}, expected {want}")));
            }
        }
    }
    for j in 0..n {
        let s: u64 = rows.iter().map(|r| r[j] as u64).sum();
        if s != q * q + q {
            return Err(fail(format!("column {j} sums to {s}")));
        }
    }
    let mut rep = ExperimentReport::new("design", 0);
    rep.param("q", q);
    rep.columns = vec!["ell".into(), "rank".into()];
    let q3q = q * q * q - q;
    let signed: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
    for &l in primes {
        if q3q % l == 0 {
            continue;
        }
        let r = rank_mod(&signed, &BigUint::from(l))?;
        if r != n {
            return Err(fail(format!("rank {r} mod {l}")));
        }
        rep.rows.push(vec![l.to_string(), r.to_string()]);
    }
    rep.stat("blocks", cosets.len());
    rep.stat("points", n);
    rep.stat("gram", "exact");
    rep.stat("column_sum", q * q + q);
    Ok(rep)
}

// ---- random submatrix determinants ----

/// Result of the determinant experiment, also rendered into the report.
#[derive(Clone, Debug)]
pub struct DeterminantSummary {
    pub zero_count: usize,
    /// prime factors of gcd of all determinants (within the factoring budget)
    pub gcd_primes: Vec<BigUint>,
    pub gcd_unfactored: Vec<BigUint>,
    /// factors of pairwise gcds that do not divide q^3 - q and exceed q^2
    pub sporadic: BTreeSet<BigUint>,
}

/// Trial division to 1e7 plus 1e5 rho iterations.
fn small_structure(n: &BigUint) -> (Vec<BigUint>, Vec<BigUint>) {
    if n.is_zero() {
        return (Vec::new(), Vec::new());
    }
    let f = factor_with_limits(n, 10_000_000, 100_000);
    (f.primes.into_keys().collect(), f.unfactored)
}

pub fn submatrix_determinant_experiment(
    ctx: &FieldCtx,
    trials: usize,
    seed: u64,
) -> Result<(ExperimentReport, DeterminantSummary)> {
    let q = ctx.q();
    let n = (q * q + 1) as usize;
    let cosets = enumerate_cosets(ctx)?;
    let seeds = SeedSplitter::new(seed);
    let pick = |t: usize| -> Vec<usize> {
        let mut rng = seeds.indexed("det-subset", t as u64);
        let mut idx = sample(&mut rng, cosets.len(), n).into_vec();
        idx.sort_unstable();
        idx
    };
    let work = |t: usize| -> BigInt {
        let m: Vec<Vec<u8>> = pick(t).into_iter().map(|i| incidence_vector(ctx, &cosets[i])).collect();
        det_exact(&m)
    };
    #[cfg(feature = "parallel")]
    let dets: Vec<BigInt> = {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(work).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let dets: Vec<BigInt> = (0..trials).map(work).collect();

    let q3q = BigUint::from(q * q * q - q);
    let abs: Vec<BigUint> = dets.iter().map(|d| d.abs().to_biguint().unwrap()).collect();
    let zero_count = abs.iter().filter(|d| d.is_zero()).count();
    let g = abs.iter().fold(BigUint::zero(), |acc, d| acc.gcd(d));
    let (gcd_primes, gcd_unfactored) = small_structure(&g);
    let mut sporadic = BTreeSet::new();
    let q2 = BigUint::from(q * q);
    for i in 0..abs.len() {
        for j in i + 1..abs.len() {
            let pg = abs[i].gcd(&abs[j]);
            let (ps, _) = small_structure(&pg);
            for p in ps {
                if !(&q3q % &p).is_zero() && p > q2 {
                    sporadic.insert(p);
                }
            }
        }
    }

    let mut rep = ExperimentReport::new("table1", seed);
    rep.param("q", q);
    rep.param("trials", trials);
    rep.columns = vec!["trial".into(), "det_bits".into(), "det_mod_q3q".into()];
    for (t, d) in abs.iter().enumerate() {
        rep.rows
            .push(vec![t.to_string(), d.bits().to_string(), (d % &q3q).to_string()]);
    }
    let join = |v: &[BigUint]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    rep.stat("zero_determinants", zero_count);
    rep.stat("gcd_primes", join(&gcd_primes));
    rep.stat("gcd_unfactored", join(&gcd_unfactored));
    rep.stat(
        "gcd_primes_dividing_q3_minus_q",
        gcd_primes.iter().all(|p| (&q3q % p).is_zero()),
    );
    rep.stat("sporadic_pairwise_above_q2", join(&sporadic.iter().cloned().collect::<Vec<_>>()));
    Ok((
        rep,
        DeterminantSummary {
            zero_count,
            gcd_primes,
            gcd_unfactored,
            sporadic,
        },
    ))
}

// ---- X^q + X^2 + a scan ----

/// Odd prime powers in [lo, hi].
pub fn odd_prime_powers(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(3)..=hi)
        .filter(|&n| n % 2 == 1)
        .filter(|&n| {
            let f = factor_u64(n);
            f.len() == 1 && is_prime_u64(f[0].0)
        })
        .collect()
}

/// For each k <= k_max, the first a in the packed order making
/// X^q + X^2 + a have an irreducible factor of degree k.
pub fn h_scan_field(ctx: &FieldCtx, k_max: usize) -> BTreeMap<usize, Option<Fq2>> {
    let q = ctx.q() as usize;
    let mut found: BTreeMap<usize, Option<Fq2>> = (1..=k_max.min(q)).map(|k| (k, None)).collect();
    let mut missing = found.len();
    for a in ctx.elements() {
        if missing == 0 {
            break;
        }
        let mut c = vec![Fq2::ZERO; q + 1];
        c[q] = Fq2::ONE;
        c[2] = ctx.add(c[2], Fq2::ONE);
        c[0] = a;
        let f = Poly::from_coeffs(c);
        for d in factor_degrees(&f, ctx) {
            if let Some(slot) = found.get_mut(&d) {
                if slot.is_none() {
                    *slot = Some(a);
                    missing -= 1;
                }
            }
        }
    }
    found
}

/// One row per (q, k); k above q is reported as not attempted.
pub fn h_scan(q_list: &[u64], k_max: Option<usize>) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("hscan", 0);
    rep.param("q", q_list.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" "));
    if let Some(k) = k_max {
        rep.param("kmax", k);
    }
    rep.columns = vec!["q".into(), "k".into(), "status".into(), "a".into()];
    let mut attempted = 0usize;
    let mut success = 0usize;
    let mut failures = Vec::new();
    for &q in q_list {
        let f = factor_u64(q);
        if f.len() != 1 {
            return Err(Error::InvalidContext(format!("{q} is not a prime power")));
        }
        let ctx = FieldCtx::new(f[0].0, f[0].1, 0)?;
        let kmax = k_max.unwrap_or(q as usize);
        let found = h_scan_field(&ctx, kmax);
        for k in 1..=kmax {
            let row = match found.get(&k) {
                None => vec![q.to_string(), k.to_string(), "not_attempted".into(), String::new()],
                Some(Some(a)) => {
                    attempted += 1;
                    success += 1;
                    vec![q.to_string(), k.to_string(), "ok".into(), ctx.to_packed(*a).to_string()]
                }
                Some(None) => {
                    attempted += 1;
                    failures.push(format!("{q}:{k}"));
                    vec![q.to_string(), k.to_string(), "fail".into(), String::new()]
                }
            };
            rep.rows.push(row);
        }
    }
    rep.stat("attempted", attempted);
    rep.stat("success", success);
    rep.stat(
        "success_rate",
        format!("{:.6}", if attempted == 0 { 1.0 } else { success as f64 / attempted as f64 }),
    );
    rep.stat("failures", failures.join(" "));
    Ok(rep)
}

// ---- smoothness of relation numerators ----

#[derive(Clone, Debug)]
pub struct SmoothRate {
    pub samples: usize,
    pub smooth: usize,
    pub empirical: f64,
    /// expected rate for random polynomials of the observed degrees
    pub expected: f64,
    /// 95% Wilson interval of the empirical rate
    pub interval: (f64, f64),
    pub degrees: BTreeMap<usize, usize>,
}

impl SmoothRate {
    pub fn ratio(&self) -> f64 {
        self.empirical / self.expected
    }
}

fn wilson(k: usize, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    let den = 1.0 + z * z / n;
    let mid = (p + z * z / (2.0 * n)) / den;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / den;
    (mid - half, mid + half)
}

/// Random monic irreducible P of degree D against random cosets: measures
/// how often the numerator of L_m is B-smooth, and the rate predicted by
/// exact counts for random polynomials of the same degrees.
pub fn smoothness_rate(rep: &SparseRep, d: usize, bound: usize, samples: usize, seed: u64) -> Result<SmoothRate> {
    let ctx = &rep.ctx;
    if d < 1 || d >= rep.k.max(2) {
        return Err(Error::InvalidContext(format!("need 1 <= D < k, got D = {d}")));
    }
    let cosets = enumerate_cosets(ctx)?;
    let seeds = SeedSplitter::new(seed);
    let work = |i: usize| -> (usize, bool) {
        let mut rng = seeds.indexed("smoothrate", i as u64);
        let p = Poly::random_monic_irreducible(d, ctx, &mut rng);
        let t = Target::new(&p, rep);
        let c: &CosetRep = &cosets[rng.gen_range(0..cosets.len())];
        let cand = build_candidate(&t, rep, c, i);
        (cand.numerator.degree(), is_smooth(&cand.numerator, bound, ctx))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<(usize, bool)> = {
        use rayon::prelude::*;
        (0..samples).into_par_iter().map(work).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(usize, bool)> = (0..samples).map(work).collect();

    let mut degrees = BTreeMap::new();
    let mut smooth = 0;
    for &(deg, ok) in &results {
        *degrees.entry(deg).or_insert(0) += 1;
        smooth += ok as usize;
    }
    let nmax = degrees.keys().copied().max().unwrap_or(1).max(1);
    let table = SmoothCountTable::new(ctx.size(), nmax);
    let expected = degrees
        .iter()
        .map(|(&n, &c)| c as f64 * if n == 0 { 1.0 } else { table.probability(n, bound) })
        .sum::<f64>()
        / samples as f64;
    Ok(SmoothRate {
        samples,
        smooth,
        empirical: smooth as f64 / samples as f64,
        expected,
        interval: wilson(smooth, samples),
        degrees,
    })
}

pub fn smoothness_rate_experiment(
    rep: &SparseRep,
    d: usize,
    bound: usize,
    samples: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let r = smoothness_rate(rep, d, bound, samples, seed)?;
    let mut out = ExperimentReport::new("smoothrate", seed);
    out.param("q", rep.q());
    out.param("k", rep.k);
    out.param("D", d);
    out.param("B", bound);
    out.param("samples", samples);
    out.columns = vec!["numerator_degree".into(), "count".into(), "random_rate".into()];
    let nmax = r.degrees.keys().copied().max().unwrap_or(1).max(1);
    let table = SmoothCountTable::new(rep.ctx.size(), nmax);
    for (&n, &c) in &r.degrees {
        let p = if n == 0 { 1.0 } else { table.probability(n, bound) };
        out.rows.push(vec![n.to_string(), c.to_string(), format!("{p:.6e}")]);
    }
    out.stat("smooth", r.smooth);
    out.stat("empirical_rate", format!("{:.6}", r.empirical));
    out.stat("expected_rate", format!("{:.6}", r.expected));
    out.stat("ratio", format!("{:.4}", r.ratio()));
    out.stat("wilson95", format!("{:.6} {:.6}", r.interval.0, r.interval.1));
    Ok(out)
}

/// N(n, m) for m = 1..=n and the Dickman estimate rho(n/m).
pub fn smooth_count_report(q: u64, n: usize) -> ExperimentReport {
    let t = SmoothCountTable::new(q, n);
    let mut rep = ExperimentReport::new("smoothcount", 0);
    rep.param("Q", q);
    rep.param("n", n);
    rep.columns = vec!["m".into(), "count".into(), "probability".into(), "rho_n_over_m".into()];
    for m in 1..=n {
        rep.rows.push(vec![
            m.to_string(),
            t.get(n, m).to_string(),
            format!("{:.6e}", t.probability(n, m)),
            format!("{:.6e}", dickman_rho(n as f64 / m as f64)),
        ]);
    }
    rep
}

pub fn dickman_report(points: &[f64]) -> ExperimentReport {
    let mut rep = ExperimentReport::new("dickman", 0);
    rep.param("points", points.len());
    rep.columns = vec!["u".into(), "rho".into()];
    for &u in points {
        rep.rows.push(vec![format!("{u}"), format!("{:.12e}", dickman_rho(u))]);
    }
    rep
}
