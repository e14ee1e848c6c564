//! `lpjacobi` command line.
//!
//! Reports are JSON objects `{header, …}`; grids and measures are CSV with
//! a leading `# header: {…}` comment line. Exit codes: 0 pass, 1 check
//! failure, 2 configuration error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lpjacobi::coeffs::CoeffTable;
use lpjacobi::dynamics::{self, MapParams};
use lpjacobi::hull::{self, Hull};
use lpjacobi::numeric::{linspace, serialize_mat2_vec, Mat2};
use lpjacobi::ruelle;
use lpjacobi::suite::{self, Header, RunConfig, Tolerances};
use lpjacobi::{DyadicInt, Error, Lambda};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("LPJACOBI_GIT_REV"));

#[derive(Parser)]
#[command(name = "lpjacobi", version = VERSION, about = "Limit-periodic Jacobi hull and matrix Ruelle certificates")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// λ as an integer, fraction (`7/2`) or decimal.
    #[arg(long, global = true, default_value = "4")]
    lambda: String,
    /// Dyadic digits M.
    #[arg(long, global = true, default_value_t = 32)]
    digits: usize,
    /// Table depth (coefficient rows 2^depth) or, for `dynamics`, the largest n.
    #[arg(long, global = true, default_value_t = 12)]
    depth: usize,
    /// Window half-width N.
    #[arg(long, global = true, default_value_t = 1024)]
    truncation: usize,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Permit 2 < λ ≤ 3.
    #[arg(long, global = true)]
    allow_small_lambda: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Shift, modified shift and κ-map of a dyadic integer.
    Dyadic {
        /// Integer, digit string (`0110…`) or pattern (`1(10)*`).
        kappa: String,
        /// Modified-shift orbit length.
        #[arg(long, default_value_t = 8)]
        steps: usize,
    },
    /// w-products against their bounds and the preimage sum (CSV).
    Dynamics {
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Coefficient table dumps and lookups.
    Coeffs {
        #[command(subcommand)]
        action: CoeffsCmd,
    },
    /// Truncated hull members: identity residuals and spectral atoms.
    Hull {
        #[command(subcommand)]
        action: HullCmd,
    },
    /// Matrix Ruelle iteration: coefficients and certificates.
    Ruelle {
        #[command(subcommand)]
        action: RuelleCmd,
    },
    /// Run every certificate; exit 1 when any fails.
    Verify {
        /// Corrupt this row of the exact table first (fault injection).
        #[arg(long, value_name = "ROW")]
        inject_fault: Option<usize>,
    },
    /// Trace-mass histograms of two spectral measures on a common partition (CSV).
    ExploreMeasures {
        #[arg(long, default_value = "0")]
        kappa_a: String,
        #[arg(long, default_value = "1(10)*")]
        kappa_b: String,
        #[arg(long, default_value_t = 64)]
        bins: usize,
    },
}

#[derive(Subcommand)]
enum CoeffsCmd {
    /// All rows `a²_n`, `n < 2^depth`, exact (CSV).
    Dump,
    /// `a_ϰ` with its empirical error bound (JSON).
    At {
        #[arg(long)]
        kappa: String,
    },
}

#[derive(Subcommand)]
enum HullCmd {
    /// V-identity, renormalization pairing and reflection residuals (JSON).
    Identities {
        #[arg(long, default_value = "0")]
        kappa: String,
        #[arg(long, default_value_t = 8)]
        degree: u32,
    },
    /// Atoms `(x, W)` of the truncated spectral matrix measure (CSV).
    Atoms {
        #[arg(long, default_value = "0")]
        kappa: String,
    },
}

#[derive(Subcommand)]
enum RuelleCmd {
    /// Coefficient matrices of `h_0 … h_n` (JSON).
    Coeffs {
        #[arg(long, default_value = "0")]
        kappa: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Positivity certificate and trace sandwich for one ϰ (JSON).
    Certificate {
        #[arg(long, default_value = "1(10)*")]
        kappa: String,
        #[arg(long, default_value_t = 20)]
        n: usize,
    },
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Config(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Regime { .. }
            | Error::InvalidDyadic(_)
            | Error::InvalidRational(_)
            | Error::InvalidArgument(_)
            | Error::PrecisionExhausted { .. }
            | Error::TableRange { .. } => Failure::Config(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn config(g: &Global) -> Result<RunConfig, Failure> {
    let lambda: Lambda = g.lambda.parse()?;
    let mut tolerances = Tolerances::default();
    for spec in &g.tol {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("--tol expects NAME=VALUE, got {spec:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("--tol {name}: {value:?} is not a number")))?;
        tolerances.set(name.trim(), value)?;
    }
    let cfg = RunConfig {
        lambda,
        digits: g.digits,
        table_depth: g.depth,
        truncation: g.truncation,
        seed: g.seed,
        allow_small_lambda: g.allow_small_lambda,
        tolerances,
        ..RunConfig::default()
    };
    Ok(cfg)
}

fn output(g: &Global) -> Result<Box<dyn Write>, Failure> {
    Ok(match &g.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(g: &Global, header: &Header, payload: Value) -> Result<(), Failure> {
    let mut doc = json!({ "header": header });
    if let (Value::Object(d), Value::Object(p)) = (&mut doc, payload) {
        d.extend(p);
    }
    let mut w = output(g)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| Failure::Config(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// CSV writer whose first lines are `#` comments carrying the header.
fn csv_writer(g: &Global, header: &Header, notes: &[String]) -> Result<csv::Writer<Box<dyn Write>>, Failure> {
    let mut w = output(g)?;
    writeln!(w, "# header: {}", serde_json::to_string(header).expect("header serializes"))?;
    for n in notes {
        writeln!(w, "# {n}")?;
    }
    Ok(csv::Writer::from_writer(w))
}

fn kappa(text: &str, digits: usize) -> Result<DyadicInt, Failure> {
    Ok(DyadicInt::parse(text, digits)?)
}

fn run(cli: Cli) -> Outcome {
    let g = cli.global;
    let cfg = config(&g)?;
    cfg.lambda.check_regime(cfg.allow_small_lambda)?;
    let header = Header::new(&cfg, VERSION);
    match cli.command {
        Command::Dyadic { kappa: text, steps } => cmd_dyadic(&g, &header, &text, steps),
        Command::Dynamics { points } => cmd_dynamics(&g, &cfg, &header, points),
        Command::Coeffs { action } => cmd_coeffs(&g, &cfg, &header, action),
        Command::Hull { action } => cmd_hull(&g, &cfg, &header, action),
        Command::Ruelle { action } => cmd_ruelle(&g, &cfg, &header, action),
        Command::Verify { inject_fault } => cmd_verify(&g, cfg, inject_fault),
        Command::ExploreMeasures { kappa_a, kappa_b, bins } => {
            cmd_explore(&g, &cfg, &header, &kappa_a, &kappa_b, bins)
        }
    }
}

fn cmd_dyadic(g: &Global, header: &Header, text: &str, steps: usize) -> Outcome {
    let d = kappa(text, g.digits)?;
    let mut orbit = vec![d.clone()];
    for _ in 0..steps.min(d.precision().saturating_sub(1)) {
        let next = orbit.last().expect("non-empty").modified_shift()?;
        orbit.push(next);
    }
    let n_terms = d.precision() - 1;
    write_json(
        g,
        header,
        json!({
            "kappa": d,
            "odd": d.is_odd(),
            "negation": d.negate(),
            "double": d.double(),
            "shift": d.shift()?,
            "modified_shift_orbit": orbit,
            "kappa_map": d.kappa_map(n_terms)?,
            "run_profile": d.run_profile(d.precision())?,
        }),
    )?;
    Ok(true)
}

fn cmd_dynamics(g: &Global, cfg: &RunConfig, header: &Header, points: usize) -> Outcome {
    let params = MapParams::new(cfg.lambda.value())?;
    let orbit = dynamics::CriticalOrbit::new(params);
    let (lo, hi) = params.w_bounds();
    let mut w = csv_writer(g, header, &[])?;
    w.write_record(["x", "n", "w_value", "lower_bound", "upper_bound", "within_bounds"])?;
    let mut all = true;
    for x in linspace(-params.xi, params.xi, points.max(2)) {
        for n in 0..=g.depth {
            let v = dynamics::w_eval(&orbit, x, n);
            all &= v.within_bounds;
            w.serialize((x, n, v.value, lo, hi, v.within_bounds))?;
        }
    }
    w.flush()?;
    Ok(all)
}

fn exact_table(cfg: &RunConfig) -> Result<CoeffTable, Failure> {
    if cfg.table_depth > lpjacobi::coeffs::EXACT_DEPTH_CAP {
        return Err(Failure::Config(format!(
            "--depth {} exceeds the exact-table cap {}",
            cfg.table_depth,
            lpjacobi::coeffs::EXACT_DEPTH_CAP
        )));
    }
    Ok(CoeffTable::build_with(&cfg.lambda, cfg.table_depth, cfg.allow_small_lambda)?)
}

fn cmd_coeffs(g: &Global, cfg: &RunConfig, header: &Header, action: CoeffsCmd) -> Outcome {
    match action {
        CoeffsCmd::Dump => {
            let table = exact_table(cfg)?;
            let mut w = csv_writer(g, header, &[])?;
            w.write_record(["n", "a_sq_num", "a_sq_den", "a_float"])?;
            match table.exact_rows() {
                Some(rows) => {
                    for (n, q) in rows.iter().enumerate() {
                        w.serialize((n, q.numer().to_string(), q.denom().to_string(), table.a(n)))?;
                    }
                }
                None => {
                    for n in 0..table.len() {
                        w.serialize((n, "", "", table.a(n)))?;
                    }
                }
            }
            w.flush()?;
            Ok(true)
        }
        CoeffsCmd::At { kappa: text } => {
            let k = kappa(&text, g.digits)?;
            let table = CoeffTable::shared_float(&cfg.lambda, cfg.float_depth)?;
            let c = table.a_at(&k);
            write_json(g, header, json!({ "kappa": k, "value": c.value, "error_bound": c.error_bound,
                "representative": c.representative }))?;
            Ok(true)
        }
    }
}

fn hull_for(cfg: &RunConfig) -> Result<Hull, Failure> {
    Ok(Hull::with_table(CoeffTable::shared_float(&cfg.lambda, cfg.float_depth)?)?)
}

fn cmd_hull(g: &Global, cfg: &RunConfig, header: &Header, action: HullCmd) -> Outcome {
    let hull = hull_for(cfg)?;
    let n = cfg.truncation;
    match action {
        HullCmd::Identities { kappa: text, degree } => {
            let k = kappa(&text, g.digits)?;
            let t = &cfg.tolerances;
            let mut rows = Vec::new();
            let mut pass = true;
            for z in [Complex64::new(1.0, 1.0), Complex64::new(0.0, 0.5), Complex64::new(10.0, 0.0)] {
                let r = hull::check_v_identity(&hull, &k, z, n)?;
                pass &= r.residual < t.v_identity;
                rows.push(serde_json::to_value(r).expect("serializable"));
            }
            for p in hull::check_renormalization(&hull, &k, degree, n)? {
                pass &= p.residual < t.pairing;
                rows.push(json!({ "identity": "renormalization_pairing", "kappa": k, "N": n, "degree": p.m,
                    "p": p.p, "q": p.q, "residual": p.residual }));
            }
            let refl = hull::reflection_check(&hull, &k, n, degree)?;
            pass &= refl < t.reflection;
            rows.push(json!({ "identity": "reflection", "kappa": k, "N": n, "degree": degree, "residual": refl }));
            write_json(g, header, json!({ "pass": pass, "residuals": rows }))?;
            Ok(pass)
        }
        HullCmd::Atoms { kappa: text } => {
            let k = kappa(&text, g.digits)?;
            let sigma = hull.truncation(&k, n)?.spectral_measure()?;
            let mut w = csv_writer(g, header, &[format!("kappa: {k}")])?;
            w.write_record(["x", "W11", "W12", "W22"])?;
            for a in &sigma.atoms {
                w.serialize((a.x, a.w[(0, 0)], a.w[(0, 1)], a.w[(1, 1)]))?;
            }
            w.flush()?;
            Ok(true)
        }
    }
}

#[derive(Serialize)]
struct CoeffDump<'a> {
    n: usize,
    #[serde(serialize_with = "serialize_mat2_vec")]
    coefficients: &'a [Mat2],
}

fn cmd_ruelle(g: &Global, cfg: &RunConfig, header: &Header, action: RuelleCmd) -> Outcome {
    let hull = hull_for(cfg)?;
    let orbit = std::sync::Arc::new(dynamics::CriticalOrbit::new(*hull.params()));
    match action {
        RuelleCmd::Coeffs { kappa: text, n } => {
            let k = kappa(&text, g.digits)?;
            let hs = ruelle::iterate_h(&k, n, hull.table(), &orbit)?;
            let dumps: Vec<CoeffDump> = hs.iter().enumerate().map(|(m, h)| CoeffDump { n: m, coefficients: h.coeffs() }).collect();
            let psd = hs.iter().map(|h| h.min_coeff_eigenvalue()).fold(f64::INFINITY, f64::min);
            let pass = psd >= -cfg.tolerances.psd;
            write_json(g, header, json!({ "kappa": k, "min_coefficient_eigenvalue": psd, "pass": pass,
                "h": serde_json::to_value(&dumps).expect("serializable") }))?;
            Ok(pass)
        }
        RuelleCmd::Certificate { kappa: text, n } => {
            let k = kappa(&text, g.digits)?;
            let grid = linspace(-hull.params().xi, hull.params().xi, 200);
            let cert = ruelle::positivity_certificate(&k, n, &grid, hull.table(), &orbit)?;
            let sigma = hull.truncation(&k, 2 * cfg.truncation)?.spectral_measure()?;
            let base = sigma.trace_integral(|x| orbit.w(x, 0));
            let hs = ruelle::iterate_h(&k, n, hull.table(), &orbit)?;
            let sandwich = ruelle::trace_sandwich(&hs, &grid, base);
            let pass = cert.pass && sandwich.holds;
            let mut v = serde_json::to_value(&cert).expect("serializable");
            v["sandwich"] = serde_json::to_value(&sandwich).expect("serializable");
            v["pass"] = json!(pass);
            write_json(g, header, v)?;
            Ok(pass)
        }
    }
}

fn cmd_verify(g: &Global, mut cfg: RunConfig, inject_fault: Option<usize>) -> Outcome {
    cfg.corrupt_row = inject_fault;
    let report = suite::run_verify(cfg, VERSION)?;
    let mut w = output(g)?;
    w.write_all(suite::report_json(&report).as_bytes())?;
    w.flush()?;
    for name in &report.failed {
        eprintln!("check failed: {name}");
    }
    Ok(report.pass)
}

fn cmd_explore(g: &Global, cfg: &RunConfig, header: &Header, a: &str, b: &str, bins: usize) -> Outcome {
    if bins == 0 {
        return Err(Failure::Config("--bins must be positive".into()));
    }
    let hull = hull_for(cfg)?;
    let ka = kappa(a, g.digits)?;
    let kb = kappa(b, g.digits)?;
    let ctx_n = cfg.truncation;
    let sa = hull.truncation(&ka, ctx_n)?.spectral_measure()?;
    let sb = hull.truncation(&kb, ctx_n)?.spectral_measure()?;
    let reach = hull.params().xi + 0.1;
    let ha = sa.trace_histogram(-reach, reach, bins);
    let hb = sb.trace_histogram(-reach, reach, bins);
    let overlap: f64 = ha.iter().zip(&hb).map(|(x, y)| x.min(*y)).sum();
    let notes = [
        "exploratory — no singularity claim".to_string(),
        format!("kappa_a: {ka}"),
        format!("kappa_b: {kb}"),
        format!("total_a: {} total_b: {} overlap: {overlap}", ha.iter().sum::<f64>(), hb.iter().sum::<f64>()),
    ];
    let width = 2.0 * reach / bins as f64;
    let mut w = csv_writer(g, header, &notes)?;
    w.write_record(["bin_lo", "bin_hi", "mass_a", "mass_b"])?;
    for (i, (x, y)) in ha.iter().zip(&hb).enumerate() {
        let lo = -reach + i as f64 * width;
        w.serialize((lo, lo + width, x, y))?;
    }
    w.flush()?;
    Ok(true)
}

