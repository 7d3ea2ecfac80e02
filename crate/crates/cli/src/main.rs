use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use qpdlog::analytics::{
    design_identity_experiment, dickman_report, h_scan, odd_prime_powers, smooth_count_report,
    smoothness_rate_experiment, submatrix_determinant_experiment, ExperimentReport,
};
use qpdlog::arith::{factor_q_power_minus_one, factor_u64, FactorBudget};
use qpdlog::cosets::enumerate_cosets;
use qpdlog::descent::{
    check_certificate, compute_base, descend, full_dlog, verify_log, DescentCertificate, DescentOptions, DlogOptions,
    LogDB,
};
use qpdlog::poly::Poly;
use qpdlog::rep::{find_sparse_rep, order_summary, LogContext, RepSearch, SearchStrategy};
use qpdlog::rng::SeedSplitter;
use qpdlog::{Error, FieldCtx};

mod selftest;

/// Discrete logarithms in F_{q^2k} by the quasi-polynomial descent.
#[derive(Parser, Debug)]
#[command(name = "qpdlog", version, about)]
struct Cli {
    /// worker threads for sieving and experiments
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Find a sparse representation and write the representation file
    Setup(SetupArgs),
    /// Factor the group order q^{2k} - 1
    Order(OrderArgs),
    /// Compute the logs of all linear polynomials into a log database
    Base(BaseArgs),
    /// Discrete log of one target
    Dlog(DlogArgs),
    /// Re-verify a log database, a certificate or a single claimed log
    Verify(VerifyArgs),
    /// Run one experiment and write its report
    #[command(subcommand)]
    Experiment(Experiment),
    /// Exhaustive invariant checks over small fields
    Selftest,
}

#[derive(Args, Debug, Clone)]
struct Budget {
    /// trial division bound for order factorization
    #[arg(long, env = "QPDLOG_TRIAL_BOUND", default_value_t = 1_000_000)]
    trial_bound: u64,
    /// Pollard rho iterations per composite
    #[arg(long, env = "QPDLOG_RHO_ITERATIONS", default_value_t = 1 << 24)]
    rho_iterations: u64,
}

impl Budget {
    fn get(&self) -> FactorBudget {
        FactorBudget {
            trial_bound: self.trial_bound,
            rho_iterations: self.rho_iterations,
            ..FactorBudget::default()
        }
    }
}

#[derive(Args, Debug)]
struct SetupArgs {
    #[arg(long)]
    p: u64,
    /// q = p^m
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    delta_max: usize,
    /// scan (quadratic family first) or random
    #[arg(long, default_value = "scan")]
    strategy: String,
    /// subgroup order; default is the largest certified prime factor
    #[arg(long)]
    ell: Option<BigUint>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "rep.txt")]
    out: PathBuf,
    #[command(flatten)]
    budget: Budget,
}

#[derive(Args, Debug)]
struct OrderArgs {
    /// read q and k from a representation file
    #[arg(long, conflicts_with_all = ["q", "k"])]
    rep: Option<PathBuf>,
    #[arg(long, requires = "k")]
    q: Option<u64>,
    #[arg(long, requires = "q")]
    k: Option<u64>,
    #[command(flatten)]
    budget: Budget,
}

#[derive(Args, Debug)]
struct BaseArgs {
    #[arg(long)]
    rep: PathBuf,
    #[arg(long, default_value = "base.db")]
    out: PathBuf,
    /// also store the irreducible quadratics (by degree-2 descent)
    #[arg(long, default_value_t = 1)]
    base_degree: usize,
    /// extra relations kept after full rank
    #[arg(long, default_value_t = 16)]
    margin: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct DlogArgs {
    #[arg(long)]
    rep: PathBuf,
    /// log database; required unless --full
    #[arg(long)]
    logdb: Option<PathBuf>,
    /// target polynomial, comma-separated packed coefficients, constant first
    #[arg(long, required_unless_present = "random_degree")]
    target: Option<String>,
    /// draw a random monic irreducible target of this degree instead
    #[arg(long, conflicts_with = "target")]
    random_degree: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// smoothness bound per step; default ceil(D/2)
    #[arg(long)]
    bound: Option<usize>,
    /// full log mod q^{2k} - 1 by Pohlig-Hellman
    #[arg(long)]
    full: bool,
    /// primes above this are handled by the descent in --full mode
    #[arg(long, default_value_t = 1 << 20)]
    threshold: u64,
    /// write the descent certificate here
    #[arg(long)]
    certificate: Option<PathBuf>,
    /// re-check the result (subgroup exponentiation and certificate replay)
    #[arg(long)]
    verify: bool,
    /// store logs found during the descent back into the database
    #[arg(long)]
    update_logdb: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    rep: PathBuf,
    #[arg(long)]
    logdb: Option<PathBuf>,
    #[arg(long)]
    certificate: Option<PathBuf>,
    #[arg(long, requires = "value")]
    target: Option<String>,
    #[arg(long, requires = "target")]
    value: Option<BigUint>,
}

#[derive(Args, Debug)]
struct OutDir {
    /// directory for the report file
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// Inversive-plane identities of the coset blocks
    Design {
        #[arg(long)]
        q: u64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Determinants of random (q^2+1)-subsets of blocks
    Table1 {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Degrees k reachable by X^q + X^2 + a
    Hscan {
        /// explicit list of q; default all odd prime powers up to --q-max
        #[arg(long, value_delimiter = ',')]
        q: Vec<u64>,
        #[arg(long, default_value_t = 101)]
        q_max: u64,
        #[arg(long)]
        k_max: Option<usize>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Empirical smoothness of relation numerators against random polynomials
    Smoothrate {
        #[arg(long)]
        rep: PathBuf,
        /// target degree
        #[arg(long)]
        d: usize,
        /// smoothness bound
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Dickman rho on a grid
    Dickman {
        #[arg(long, default_value_t = 10.0)]
        u_max: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Exact m-smooth counts of degree-n polynomials over F_Q
    Smoothcount {
        /// field size Q
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutDir,
    },
}

/// Distinct exit codes per error class.
mod code {
    pub const FAILURE: u8 = 1;
    pub const SETUP: u8 = 3;
    pub const RANK: u8 = 4;
    pub const VERIFY: u8 = 5;
    pub const INPUT: u8 = 6;
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::RankDeficient { .. } | Error::BaseSystemRankDeficient { .. } | Error::NotInRowSpan => code::RANK,
        Error::VerificationFailed(_) | Error::InconsistentOrder => code::VERIFY,
        Error::NotPrime(_)
        | Error::FieldTooLarge { .. }
        | Error::InvalidContext(_)
        | Error::DegreeConstraint { .. }
        | Error::NoRepresentationFound { .. }
        | Error::FactorizationTimeout { .. }
        | Error::DegenerateModulus(_)
        | Error::BadModulus(_) => code::SETUP,
        Error::Parse(_) | Error::Io(_) => code::INPUT,
        Error::PohligHellman { source, .. } => exit_code(source),
        _ => code::FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("warning: {e}");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// `# config key=value` lines naming the subcommand and every input, so a file
/// can be regenerated from its own header.
fn header(cmd: &str, items: &[(&str, String)]) -> String {
    let mut s = format!("# config command={cmd}\n");
    for (k, v) in items {
        s.push_str(&format!("# config {k}={v}\n"));
    }
    s
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn load_context(path: &Path) -> Result<LogContext, Error> {
    LogContext::from_text(&fs::read_to_string(path)?)
}

fn field_of(q: u64) -> Result<FieldCtx, Error> {
    let f = factor_u64(q);
    if f.len() != 1 {
        return Err(Error::InvalidContext(format!("{q} is not a prime power")));
    }
    FieldCtx::new(f[0].0, f[0].1, 0)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Setup(a) => setup(a, cli.threads),
        Cmd::Order(a) => order(a),
        Cmd::Base(a) => base(a, cli.threads),
        Cmd::Dlog(a) => dlog(a, cli.threads),
        Cmd::Verify(a) => verify(a),
        Cmd::Experiment(e) => experiment(e),
        Cmd::Selftest => selftest::run(),
    }
}

fn setup(a: SetupArgs, threads: usize) -> Result<(), Error> {
    let strategy = match a.strategy.as_str() {
        "scan" => SearchStrategy::Scan,
        "random" => SearchStrategy::Random,
        s => return Err(Error::Parse(format!("unknown strategy {s}"))),
    };
    let ctx = FieldCtx::new(a.p, a.m, 0)?;
    let search = RepSearch {
        delta_max: a.delta_max,
        strategy,
        seed: a.seed,
        ..RepSearch::new(a.k)
    };
    let rep = find_sparse_rep(&ctx, &search)?;
    let lc = LogContext::new(rep, a.ell.clone(), &a.budget.get())?;
    let mut text = header(
        "setup",
        &[
            ("p", a.p.to_string()),
            ("m", a.m.to_string()),
            ("k", a.k.to_string()),
            ("delta_max", a.delta_max.to_string()),
            ("strategy", a.strategy.clone()),
            ("ell", a.ell.map(|e| e.to_string()).unwrap_or_else(|| "auto".into())),
            ("seed", a.seed.to_string()),
            ("threads", threads.to_string()),
        ],
    );
    text.push_str(&lc.to_text());
    write(&a.out, &text)?;
    let rep = &lc.rep;
    println!("wrote {}", a.out.display());
    println!("q={} k={} delta={} family={}", rep.q(), rep.k, rep.delta, rep.family.name());
    println!("traps={} ell={} ({} bits)", rep.traps.len(), lc.ell, lc.ell.bits());
    for w in &lc.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

fn order(a: OrderArgs) -> Result<(), Error> {
    let (q, k) = match (&a.rep, a.q, a.k) {
        (Some(path), _, _) => {
            let lc = load_context(path)?;
            (lc.rep.q(), lc.rep.k as u64)
        }
        (None, Some(q), Some(k)) => (q, k),
        _ => return Err(Error::Parse("give --rep or both --q and --k".into())),
    };
    let f = factor_q_power_minus_one(q, 2 * k, &a.budget.get());
    println!("q^(2k)-1 with q={q} k={k}");
    println!("{}", order_summary(&f));
    if f.is_complete() {
        Ok(())
    } else {
        Err(Error::FactorizationTimeout { partial: f })
    }
}

fn base(a: BaseArgs, threads: usize) -> Result<(), Error> {
    let lc = load_context(&a.rep)?;
    let cosets = enumerate_cosets(lc.ctx())?;
    let mut opts = DescentOptions::default();
    opts.sieve.margin = a.margin;
    opts.sieve.seed = a.seed;
    let db = compute_base(&lc, &cosets, a.base_degree, &opts)?;
    let mut text = header(
        "base",
        &[
            ("rep", a.rep.display().to_string()),
            ("base_degree", a.base_degree.to_string()),
            ("margin", a.margin.to_string()),
            ("seed", a.seed.to_string()),
            ("threads", threads.to_string()),
        ],
    );
    text.push_str(&db.to_text(lc.ctx()));
    write(&a.out, &text)?;
    println!("wrote {} ({} logs, all verified)", a.out.display(), db.len());
    Ok(())
}

fn dlog(a: DlogArgs, threads: usize) -> Result<(), Error> {
    let lc = load_context(&a.rep)?;
    let ctx = lc.ctx();
    let target = match (&a.target, a.random_degree) {
        (Some(t), _) => Poly::from_text(t, ctx)?,
        (None, Some(d)) => {
            let mut rng = SeedSplitter::new(a.seed).stream("cli-target");
            Poly::random_monic_irreducible(d, ctx, &mut rng)
        }
        (None, None) => unreachable!("clap requires one of them"),
    };
    println!("target={}", target.to_text(ctx));
    let mut opts = DescentOptions {
        bound: a.bound,
        ..DescentOptions::default()
    };
    opts.sieve.seed = a.seed;

    if a.full {
        let dopts = DlogOptions {
            threshold: BigUint::from(a.threshold),
            descent: opts,
        };
        let (x, parts) = full_dlog(&target, &lc, &dopts)?;
        for p in &parts {
            let how = if p.by_descent { "descent" } else { "generic" };
            println!("mod {}^{}: {} ({how})", p.prime, p.exponent, p.residue);
        }
        println!("log={x}");
        return Ok(());
    }

    let path = a
        .logdb
        .as_ref()
        .ok_or_else(|| Error::Parse("--logdb is required unless --full".into()))?;
    let mut db = LogDB::from_text(&fs::read_to_string(path)?, &lc)?;
    let cosets = enumerate_cosets(ctx)?;
    let (value, cert) = descend(&target, &lc, &cosets, &mut db, &opts)?;
    println!("log mod ell={value}");
    println!("steps={} depth={}", cert.root.steps(), cert.root.step_depth());
    if a.verify {
        if !verify_log(&target, &value, &lc) {
            return Err(Error::VerificationFailed("subgroup exponentiation".into()));
        }
        check_certificate(&cert, &lc)?;
        println!("verify=ok");
    }
    if let Some(cpath) = &a.certificate {
        let mut text = header(
            "dlog",
            &[
                ("rep", a.rep.display().to_string()),
                ("logdb", path.display().to_string()),
                ("target", target.to_text(ctx)),
                ("bound", a.bound.map(|b| b.to_string()).unwrap_or_else(|| "auto".into())),
                ("seed", a.seed.to_string()),
                ("threads", threads.to_string()),
            ],
        );
        text.push_str(&cert.to_text(ctx));
        write(cpath, &text)?;
        println!("certificate={}", cpath.display());
    }
    if a.update_logdb {
        let mut text = String::new();
        for line in fs::read_to_string(path)?.lines().filter(|l| l.starts_with("# config")) {
            text.push_str(line);
            text.push('\n');
        }
        text.push_str(&db.to_text(ctx));
        write(path, &text)?;
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<(), Error> {
    let lc = load_context(&a.rep)?;
    let ctx = lc.ctx();
    let mut checked = 0;
    if let Some(path) = &a.logdb {
        let db = LogDB::from_text(&fs::read_to_string(path)?, &lc)?;
        println!("logdb ok: {} entries", db.len());
        checked += 1;
    }
    if let Some(path) = &a.certificate {
        let cert = DescentCertificate::from_text(&fs::read_to_string(path)?, ctx)?;
        check_certificate(&cert, &lc)?;
        println!("certificate ok: log={} steps={}", cert.root.value(), cert.root.steps());
        checked += 1;
    }
    if let (Some(t), Some(v)) = (&a.target, &a.value) {
        let t = Poly::from_text(t, ctx)?;
        if !verify_log(&t, v, &lc) {
            return Err(Error::VerificationFailed(format!("log {v} of {}", t.to_text(ctx))));
        }
        println!("log ok");
        checked += 1;
    }
    if checked == 0 {
        return Err(Error::Parse("nothing to verify: give --logdb, --certificate or --target/--value".into()));
    }
    Ok(())
}

fn experiment(e: Experiment) -> Result<(), Error> {
    let (report, out) = match e {
        Experiment::Design { q, out } => {
            let ctx = field_of(q)?;
            (design_identity_experiment(&ctx, &[101, 1009, 65537])?, out)
        }
        Experiment::Table1 { q, trials, seed, out } => {
            let ctx = field_of(q)?;
            (submatrix_determinant_experiment(&ctx, trials, seed)?.0, out)
        }
        Experiment::Hscan { q, q_max, k_max, out } => {
            let list = if q.is_empty() { odd_prime_powers(3, q_max) } else { q };
            (h_scan(&list, k_max)?, out)
        }
        Experiment::Smoothrate {
            rep,
            d,
            b,
            samples,
            seed,
            out,
        } => {
            let lc = load_context(&rep)?;
            (smoothness_rate_experiment(&lc.rep, d, b, samples, seed)?, out)
        }
        Experiment::Dickman { u_max, step, out } => {
            if !(step > 0.0 && u_max >= 0.0) {
                return Err(Error::Parse("need step > 0 and u_max >= 0".into()));
            }
            let n = (u_max / step).round() as usize;
            let points: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
            let mut r = dickman_report(&points);
            r.param("step", step);
            (r, out)
        }
        Experiment::Smoothcount { q, n, out } => (smooth_count_report(q, n), out),
    };
    emit(&report, &out.out_dir)
}

fn emit(report: &ExperimentReport, dir: &Path) -> Result<(), Error> {
    let path = dir.join(report.file_name());
    write(&path, &report.to_text())?;
    for (k, v) in &report.summary {
        println!("{k}={v}");
    }
    println!("wrote {}", path.display());
    Ok(())
}
