//! The `verify` suite: every certificate at configured tolerances.
//!
//! Each check is an independent job seeded from `(seed, check position)`, so
//! the report does not depend on scheduling and is byte-reproducible.
//! Window sizes scale with the configured truncation `N`: the V-identity
//! compares `N/4` with `N`, the trace sandwich uses `2N`, and atom and
//! mass-growth probes use `4N`.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coeffs::{self, CoeffTable, Lambda, DEFAULT_FLOAT_DEPTH};
use crate::dyadic::DyadicInt;
use crate::dynamics::{self, CriticalOrbit, MapParams, PreimageTree};
use crate::error::{Error, Result};
use crate::hull::{self, Hull};
use crate::numeric::{linspace, max_abs_entry, Mat2};
use crate::ruelle;

/// Named tolerances; every field can be overridden by name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub fn_bound: f64,
    pub w_agreement: f64,
    pub quadrature: f64,
    pub nu_invariance: f64,
    pub v_identity: f64,
    pub pairing: f64,
    pub reflection: f64,
    pub normalization: f64,
    pub evenness: f64,
    pub stieltjes: f64,
    pub jminus: f64,
    pub bruteforce: f64,
    pub psd: f64,
    pub interpolation: f64,
    pub top_coefficient: f64,
    pub pullback: f64,
    pub atom_plateau: f64,
    pub growth_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fn_bound: 1e-9,
            w_agreement: 1e-10,
            quadrature: 1e-6,
            nu_invariance: 1e-3,
            v_identity: 1e-4,
            pairing: 1e-5,
            reflection: 1e-8,
            normalization: 1e-10,
            evenness: 1e-8,
            stieltjes: 1e-9,
            jminus: 1e-8,
            bruteforce: 1e-9,
            psd: 1e-12,
            interpolation: 1e-10,
            top_coefficient: 1e-10,
            pullback: 1e-5,
            atom_plateau: 0.1,
            growth_ratio: 10.0,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 18] = [
        "fn_bound",
        "w_agreement",
        "quadrature",
        "nu_invariance",
        "v_identity",
        "pairing",
        "reflection",
        "normalization",
        "evenness",
        "stieltjes",
        "jminus",
        "bruteforce",
        "psd",
        "interpolation",
        "top_coefficient",
        "pullback",
        "atom_plateau",
        "growth_ratio",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidArgument(format!("tolerance {name}={value} must be positive")));
        }
        let slot = match name {
            "fn_bound" => &mut self.fn_bound,
            "w_agreement" => &mut self.w_agreement,
            "quadrature" => &mut self.quadrature,
            "nu_invariance" => &mut self.nu_invariance,
            "v_identity" => &mut self.v_identity,
            "pairing" => &mut self.pairing,
            "reflection" => &mut self.reflection,
            "normalization" => &mut self.normalization,
            "evenness" => &mut self.evenness,
            "stieltjes" => &mut self.stieltjes,
            "jminus" => &mut self.jminus,
            "bruteforce" => &mut self.bruteforce,
            "psd" => &mut self.psd,
            "interpolation" => &mut self.interpolation,
            "top_coefficient" => &mut self.top_coefficient,
            "pullback" => &mut self.pullback,
            "atom_plateau" => &mut self.atom_plateau,
            "growth_ratio" => &mut self.growth_ratio,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown tolerance {name:?}; known: {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lambda: Lambda,
    /// Dyadic digits `M` of every sampled `ϰ`.
    pub digits: usize,
    /// Depth of the exact rational table (`2^depth` rows).
    pub table_depth: usize,
    /// Depth of the float table behind the hull.
    pub float_depth: usize,
    /// Window half-width `N`.
    pub truncation: usize,
    pub seed: u64,
    pub allow_small_lambda: bool,
    pub tolerances: Tolerances,
    /// Row of the exact table to corrupt before checking (fault injection).
    pub corrupt_row: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lambda: Lambda::from_f64(4.0),
            digits: 32,
            table_depth: 12,
            float_depth: DEFAULT_FLOAT_DEPTH,
            truncation: 1 << 10,
            seed: 1,
            allow_small_lambda: false,
            tolerances: Tolerances::default(),
            corrupt_row: None,
        }
    }
}

/// Deepest iteration any check runs; `digits` must exceed it by two.
pub const MAX_ITERATION: usize = 30;

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.lambda.check_regime(self.allow_small_lambda)?;
        if self.digits < MAX_ITERATION + 2 {
            return Err(Error::InvalidArgument(format!(
                "--digits {} is below the deepest iteration + 2 = {}",
                self.digits,
                MAX_ITERATION + 2
            )));
        }
        if self.digits > 64 {
            return Err(Error::InvalidArgument("--digits above 64 is not supported".into()));
        }
        if !(1..=coeffs::EXACT_DEPTH_CAP).contains(&self.table_depth) {
            return Err(Error::InvalidArgument(format!(
                "--depth must be in 1..={}",
                coeffs::EXACT_DEPTH_CAP
            )));
        }
        if !(12..=28).contains(&self.float_depth) {
            return Err(Error::InvalidArgument("float table depth must be in 12..=28".into()));
        }
        if self.truncation < 16 || !self.truncation.is_power_of_two() || self.truncation > 1 << 13 {
            return Err(Error::InvalidArgument("--truncation must be a power of two in 16..=8192".into()));
        }
        if let Some(row) = self.corrupt_row {
            if row >= 1 << self.table_depth {
                return Err(Error::TableRange { index: row, len: 1 << self.table_depth });
            }
        }
        Ok(())
    }
}

/// Header written at the top of every machine-readable output.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub artifact: String,
    pub version: String,
    pub lambda: String,
    #[serde(rename = "M")]
    pub digits: usize,
    #[serde(rename = "N")]
    pub truncation: usize,
    pub table_depth: usize,
    pub float_depth: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Header {
    pub fn new(cfg: &RunConfig, version: &str) -> Self {
        Self {
            artifact: "lpjacobi".into(),
            version: version.to_string(),
            lambda: cfg.lambda.to_string(),
            digits: cfg.digits,
            truncation: cfg.truncation,
            table_depth: cfg.table_depth,
            float_depth: cfg.float_depth,
            seed: cfg.seed,
            tolerances: cfg.tolerances.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// Acceptance criterion this check witnesses, if any.
    pub criterion: Option<u8>,
    pub pass: bool,
    /// Headline quantity compared against `tolerance`.
    pub residual: f64,
    pub tolerance: f64,
    pub details: Value,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub header: Header,
    pub pass: bool,
    pub failed: Vec<&'static str>,
    pub checks: Vec<CheckResult>,
}

/// Shared, lazily built inputs of the checks.
pub struct Context {
    pub cfg: RunConfig,
    pub params: MapParams,
    pub hull: Hull,
    pub orbit: Arc<CriticalOrbit>,
    exact: OnceLock<std::result::Result<Arc<CoeffTable>, Error>>,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let table = CoeffTable::shared_float(&cfg.lambda, cfg.float_depth)?;
        let hull = Hull::with_table(table)?;
        let params = *hull.params();
        let orbit = Arc::new(CriticalOrbit::new(params));
        Ok(Self { cfg, params, hull, orbit, exact: OnceLock::new() })
    }

    /// The exact table, with the configured fault injected.
    pub fn exact_table(&self) -> Result<Arc<CoeffTable>> {
        self.exact
            .get_or_init(|| {
                let mut t = CoeffTable::build_with(&self.cfg.lambda, self.cfg.table_depth, self.cfg.allow_small_lambda)?;
                if let Some(row) = self.cfg.corrupt_row {
                    t.corrupt(row);
                }
                Ok(Arc::new(t))
            })
            .clone()
    }

    /// Independent random stream per check.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(stream);
        rng
    }

    pub fn kappa(&self, n: i64) -> Result<DyadicInt> {
        DyadicInt::from_integer(n, self.cfg.digits)
    }

    pub fn grid(&self, n: usize) -> Vec<f64> {
        linspace(-self.params.xi, self.params.xi, n)
    }
}

type CheckFn = fn(&Context, &mut CheckResult) -> Result<()>;

/// `(name, criterion, check)` in report order.
pub const CHECKS: [(&str, Option<u8>, CheckFn); 17] = [
    ("dyadic.identities", None, check_dyadic_identities),
    ("coeffs.exact_relations", Some(1), check_exact_relations),
    ("coeffs.parity_bounds", Some(2), check_parity_bounds),
    ("coeffs.fn_lower_bound", Some(3), check_fn_lower_bound),
    ("dynamics.w_bounds", Some(4), check_w_bounds),
    ("dynamics.balanced_invariance", Some(5), check_balanced_invariance),
    ("dynamics.nu_invariance", None, check_nu_invariance),
    ("hull.v_identity", Some(6), check_v_identity),
    ("hull.renormalization_pairing", Some(7), check_pairing),
    ("hull.measure_invariants", None, check_measure_invariants),
    ("hull.jminus_renormalization", None, check_jminus),
    ("ruelle.closed_vs_bruteforce", Some(8), check_closed_vs_bruteforce),
    ("ruelle.trace_sandwich", Some(9), check_trace_sandwich),
    ("ruelle.interpolation", Some(10), check_interpolation),
    ("ruelle.positivity", Some(11), check_positivity),
    ("hull.atom_probes", Some(12), check_atom_probes),
    ("ruelle.mass_growth", Some(13), check_mass_growth),
];

/// Runs one named check.
pub fn run_check(ctx: &Context, name: &str) -> Result<CheckResult> {
    let &(name, criterion, f) = CHECKS
        .iter()
        .find(|c| c.0 == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown check {name:?}")))?;
    Ok(execute(ctx, name, criterion, f))
}

fn execute(ctx: &Context, name: &'static str, criterion: Option<u8>, f: CheckFn) -> CheckResult {
    let mut r = CheckResult {
        name,
        criterion,
        pass: false,
        residual: f64::NAN,
        tolerance: f64::NAN,
        details: Value::Null,
        error: None,
    };
    if let Err(e) = f(ctx, &mut r) {
        r.pass = false;
        r.error = Some(e.to_string());
    }
    r
}

/// Runs every check in parallel; the report keeps the fixed check order.
pub fn run_verify(cfg: RunConfig, version: &str) -> Result<VerifyReport> {
    let header = Header::new(&cfg, version);
    let ctx = Context::new(cfg)?;
    let checks: Vec<CheckResult> = CHECKS
        .par_iter()
        .map(|&(name, criterion, f)| execute(&ctx, name, criterion, f))
        .collect();
    let failed: Vec<&'static str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    Ok(VerifyReport { header, pass: failed.is_empty(), failed, checks })
}

fn stream_of(name: &str) -> u64 {
    CHECKS.iter().position(|c| c.0 == name).expect("registered check") as u64
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn random_kappa(rng: &mut ChaCha8Rng, digits: usize) -> Result<DyadicInt> {
    let bits: Vec<u8> = (0..digits).map(|_| rng.random_range(0..2u8)).collect();
    DyadicInt::from_digits(&bits)
}

fn check_dyadic_identities(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let mut rng = ctx.rng(stream_of("dyadic.identities"));
    let m = ctx.cfg.digits;
    let samples = 1000;
    let (mut conj, mut kappa_shift, mut digit_formula, mut f_inclusion) = (0, 0, 0, 0);
    let mut f_tested = 0;
    for i in 0..samples {
        let d = random_kappa(&mut rng, m)?;
        let lhs = d.modified_shift()?;
        let rhs = d.negate().shift()?.negate();
        if lhs != rhs {
            conj += 1;
        }
        let n = m - 3;
        if d.modified_shift()?.kappa_map(n)? != d.kappa_map(n + 1)?.shift()? {
            kappa_shift += 1;
        }
        let k = d.kappa_map(m - 1)?;
        if let Some(n0) = d.digits().iter().position(|&x| x == 1) {
            for j in n0 + 1..m - 1 {
                if k.digit(j) != (d.digit(j) + 1) % 2 {
                    digit_formula += 1;
                    break;
                }
            }
        }
        let big_n = 1 + i % 3;
        let f = DyadicInt::sample_f(&mut rng, big_n, m)?;
        let window = m - 1;
        if f.run_profile(window)?.within_f(big_n) {
            f_tested += 1;
            if !f.kappa_map(window)?.run_profile(window)?.within_f(big_n + 1) {
                f_inclusion += 1;
            }
        }
    }
    let failures = conj + kappa_shift + digit_formula + f_inclusion;
    r.residual = failures as f64;
    r.tolerance = 0.0;
    r.pass = failures == 0;
    r.details = json!({
        "samples": samples,
        "modified_shift_conjugacy_failures": conj,
        "kappa_shift_failures": kappa_shift,
        "digit_formula_failures": digit_formula,
        "f_inclusion_tested": f_tested,
        "f_inclusion_failures": f_inclusion,
    });
    Ok(())
}

/// Independent oracle: the relations solved by recursion on the index.
fn oracle_a_sq(lambda: &BigRational, n: usize, memo: &mut Vec<Option<BigRational>>) -> BigRational {
    if let Some(Some(v)) = memo.get(n) {
        return v.clone();
    }
    let v = if n == 0 {
        BigRational::zero()
    } else if n % 2 == 1 {
        lambda - oracle_a_sq(lambda, n - 1, memo)
    } else {
        oracle_a_sq(lambda, n / 2, memo) / oracle_a_sq(lambda, n - 1, memo)
    };
    if memo.len() <= n {
        memo.resize(n + 1, None);
    }
    memo[n] = Some(v.clone());
    v
}

fn check_exact_relations(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let table = ctx.exact_table()?;
    let relations = table.verify_relations();
    let lam = ctx.cfg.lambda.exact().cloned().expect("exact lambda");
    let mut memo = Vec::new();
    let rows = table.exact_rows().expect("exact table");
    let spots = [4usize, 7];
    let mut spot_values = Vec::new();
    let mut spots_ok = true;
    for &n in &spots {
        if n < rows.len() {
            let o = oracle_a_sq(&lam, n, &mut memo);
            spots_ok &= o == rows[n];
            spot_values.push(json!({"n": n, "table": rows[n].to_string(), "oracle": o.to_string()}));
        }
    }
    let four = ctx.cfg.lambda.exact().is_some_and(|l| *l == BigRational::from_integer(4.into()));
    let mut lambda4_values_ok = true;
    if four && rows.len() > 7 {
        let third = BigRational::new(1.into(), 3.into());
        let v7 = BigRational::new(35.into(), 11.into());
        lambda4_values_ok = rows[4] == third && rows[7] == v7;
    }
    r.tolerance = 0.0;
    r.residual = if relations.is_ok() && spots_ok && lambda4_values_ok { 0.0 } else { 1.0 };
    r.pass = r.residual == 0.0;
    r.details = json!({
        "rows": table.len(),
        "relations": match &relations { Ok(()) => "exact".to_string(), Err(e) => e.to_string() },
        "spot_values": spot_values,
        "lambda4_values_match": lambda4_values_ok,
    });
    if let Err(e) = relations {
        r.error = Some(e.to_string());
    }
    Ok(())
}

fn check_parity_bounds(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let table = ctx.exact_table()?;
    let rep = coeffs::verify_parity_bounds(&table)?;
    r.tolerance = 0.0;
    r.residual = 0.0;
    r.pass = true;
    r.details = serde_json::to_value(&rep).expect("serializable");
    Ok(())
}

fn check_fn_lower_bound(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let mut rng = ctx.rng(stream_of("coeffs.fn_lower_bound"));
    let tol = ctx.cfg.tolerances.fn_bound;
    let mut reports = Vec::new();
    let mut pass = true;
    let mut worst_margin = f64::INFINITY;
    for n in 1..=3 {
        let samples: Vec<DyadicInt> =
            (0..1000).map(|_| DyadicInt::sample_f(&mut rng, n, ctx.cfg.digits)).collect::<Result<_>>()?;
        let rep = coeffs::fn_lower_bound(ctx.hull.table(), n, &samples, tol)?;
        pass &= rep.violations == 0 && rep.induction_violations == 0;
        worst_margin = worst_margin.min(rep.min_a_sq - rep.c3);
        reports.push(rep);
    }
    r.tolerance = tol;
    r.residual = (-worst_margin).max(0.0);
    r.pass = pass;
    r.details = json!({ "reports": reports, "min_margin": worst_margin });
    Ok(())
}

fn check_w_bounds(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let tol = ctx.cfg.tolerances.w_agreement;
    let grid = ctx.grid(200);
    let rows: Vec<(bool, f64)> = (0..=12usize)
        .into_par_iter()
        .map(|n| -> Result<(bool, f64)> {
            let mut ok = true;
            let mut dev: f64 = 0.0;
            for &x in &grid {
                let w = dynamics::w_eval(&ctx.orbit, x, n);
                ok &= w.within_bounds;
                dev = dev.max((w.value - dynamics::w_preimage_sum(&ctx.params, x, n)?).abs());
            }
            Ok((ok, dev))
        })
        .collect::<Result<_>>()?;
    let within = rows.iter().all(|r| r.0);
    let dev = max_of(rows.iter().map(|r| r.1));
    let (lo, hi) = ctx.params.w_bounds();
    r.tolerance = tol;
    r.residual = dev;
    r.pass = within && dev < tol;
    r.details = json!({ "n_max": 12, "grid": 200, "within_bounds": within, "lower": lo, "upper": hi,
        "max_product_vs_preimage_sum": dev });
    Ok(())
}

fn check_balanced_invariance(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let tol = ctx.cfg.tolerances.quadrature;
    let depths = [8usize, 12, 16];
    let mut res2 = Vec::new();
    let mut res4 = Vec::new();
    for &d in &depths {
        let q = dynamics::balanced_quadrature(&ctx.params, d)?;
        res2.push(dynamics::invariance_residual(&ctx.params, &q, |x| x * x)?);
        res4.push(dynamics::invariance_residual(&ctx.params, &q, |x| x.powi(4))?);
    }
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let tree = PreimageTree::new(&ctx.params, ctx.params.xi, 10)?;
    let last = res2[2].max(res4[2]);
    r.tolerance = tol;
    r.residual = last;
    r.pass = monotone(&res2) && monotone(&res4) && last < tol;
    r.details = json!({ "depths": depths, "x2": res2, "x4": res4,
        "monotone_x2": monotone(&res2), "monotone_x4": monotone(&res4),
        "forward_residual_depth10": tree.forward_residual(&ctx.params) });
    Ok(())
}

fn check_nu_invariance(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let n = 4 * ctx.cfg.truncation;
    let nu = hull::nu_measure(&ctx.hull, n, ctx.cfg.digits)?;
    let zero = ctx.kappa(0)?;
    let a1 = ctx.hull.table().a_shifted(&zero, -1);
    let r0 = dynamics::nu_invariance_check(&ctx.params, &nu, a1 * a1, |_| 1.0)?;
    let r2 = dynamics::nu_invariance_check(&ctx.params, &nu, a1 * a1, |x| x * x)?;
    r.tolerance = ctx.cfg.tolerances.nu_invariance;
    r.residual = r2;
    r.pass = r2 < r.tolerance;
    r.details = json!({ "N": n, "a_minus1": a1, "f_1": r0, "f_x2": r2 });
    Ok(())
}

fn check_v_identity(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let tol = ctx.cfg.tolerances.v_identity;
    let (small, large) = (ctx.cfg.truncation / 4, ctx.cfg.truncation);
    let z = Complex64::new(1.0, 1.0);
    let mut rows = Vec::new();
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for k in [0i64, 1] {
        let kappa = ctx.kappa(k)?;
        let a = hull::check_v_identity(&ctx.hull, &kappa, z, small)?.residual;
        let b = hull::check_v_identity(&ctx.hull, &kappa, z, large)?.residual;
        let far = hull::check_v_identity(&ctx.hull, &kappa, Complex64::new(10.0, 0.0), large)?.residual;
        let decreased = b < a;
        pass &= a < tol && b < tol;
        worst = worst.max(a).max(b);
        rows.push(json!({ "kappa": k, "z": [1.0, 1.0], "residual_small_N": a, "residual_large_N": b,
            "decreased": decreased, "residual_z10": far }));
    }
    // Window sizes where the open boundary is still visible above rounding.
    let zero = ctx.kappa(0)?;
    let boundary_trend: Vec<f64> = [4usize, 8, 16]
        .iter()
        .map(|&n| hull::check_v_identity(&ctx.hull, &zero, z, n).map(|x| x.residual))
        .collect::<Result<_>>()?;
    // Once the boundary is out of reach both residuals sit at rounding level
    // and their order is noise; the truncation effect is judged on the small
    // windows instead, and `decreased` is reported as measured.
    let boundary_decays = boundary_trend.windows(2).all(|w| w[1] < w[0]);
    r.tolerance = tol;
    r.residual = worst;
    r.pass = pass && boundary_decays;
    r.details = json!({ "N_small": small, "N_large": large, "rows": rows,
        "boundary_trend_kappa0_N4_8_16": boundary_trend, "boundary_decays": boundary_decays,
        "large_below_small": rows.iter().all(|r| r["decreased"] == Value::Bool(true)) });
    Ok(())
}

fn pairing_kappas(ctx: &Context) -> Result<Vec<(i64, DyadicInt)>> {
    [0i64, 1, 6, -1].iter().map(|&k| Ok((k, ctx.kappa(k)?))).collect()
}

fn check_pairing(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let tol = ctx.cfg.tolerances.pairing;
    let n = ctx.cfg.truncation;
    let rows: Vec<(i64, f64)> = pairing_kappas(ctx)?
        .into_par_iter()
        .map(|(k, kappa)| {
            let res = hull::check_renormalization(&ctx.hull, &kappa, 8, n)?;
            Ok((k, max_of(res.iter().map(|p| p.residual))))
        })
        .collect::<Result<_>>()?;
    let worst = max_of(rows.iter().map(|x| x.1));
    r.tolerance = tol;
    r.residual = worst;
    r.pass = worst < tol;
    r.details = json!({ "N": n, "degree": 8,
        "max_residual_by_kappa": rows.iter().map(|(k, v)| json!({"kappa": k, "residual": v})).collect::<Vec<_>>() });
    Ok(())
}

fn check_measure_invariants(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let t = &ctx.cfg.tolerances;
    let n = ctx.cfg.truncation;
    let z = Complex64::new(0.3, 0.1);
    let rows: Vec<Value> = pairing_kappas(ctx)?
        .into_par_iter()
        .map(|(k, kappa)| {
            let j = ctx.hull.truncation(&kappa, n)?;
            let s = j.spectral_measure()?;
            let norm = (s.total() - Mat2::identity()).abs().max();
            let m1 = s.moment(1);
            let first_moment = m1[(0, 0)].abs().max(m1[(1, 1)].abs()).max((m1[(0, 1)] - j.coupling(0)).abs());
            let even = s.evenness_residual(8);
            let res = j.resolvent(z, ctx.params.xi, hull::DEFAULT_ETA_MIN)?;
            let st = s.stieltjes(z);
            let mut stieltjes: f64 = 0.0;
            for p in 0..2 {
                for q in 0..2 {
                    stieltjes = stieltjes.max((res.m[p][q] - st[p][q]).norm());
                }
            }
            let herglotz = res.herglotz_min_eigenvalue();
            let support = s.max_abs_support();
            let refl = hull::reflection_check(&ctx.hull, &kappa, n, 8)?;
            let ok = norm < t.normalization
                && first_moment < t.normalization
                && even < t.evenness
                && stieltjes < t.stieltjes
                && herglotz >= -t.psd
                && support <= ctx.params.xi + 0.1
                && refl < t.reflection;
            Ok(json!({ "kappa": k, "normalization": norm, "first_moment": first_moment, "evenness": even,
                "stieltjes_vs_resolvent": stieltjes, "herglotz_min_eig": herglotz, "max_abs_support": support,
                "reflection": refl, "pass": ok }))
        })
        .collect::<Result<_>>()?;
    let pass = rows.iter().all(|v| v["pass"] == Value::Bool(true));
    r.tolerance = t.reflection;
    r.residual = max_of(rows.iter().map(|v| v["reflection"].as_f64().unwrap_or(f64::INFINITY)));
    r.pass = pass;
    r.details = json!({ "N": n, "rows": rows });
    Ok(())
}

fn check_jminus(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let grid = ctx.grid(200);
    let main = hull::jminus_renorm_check(ctx.hull.table(), 5, &grid)?;
    let mut by_depth = Vec::new();
    for d in [12usize, 16, 20] {
        if d < ctx.cfg.float_depth {
            let t = CoeffTable::shared_float(&ctx.cfg.lambda, d)?;
            by_depth.push(json!({"depth": d, "residual": hull::jminus_renorm_check(&t, 5, &grid)?}));
        }
    }
    by_depth.push(json!({"depth": ctx.cfg.float_depth, "residual": main}));
    r.tolerance = ctx.cfg.tolerances.jminus;
    r.residual = main;
    r.pass = main < r.tolerance;
    r.details = json!({ "n_max": 5, "by_depth": by_depth });
    Ok(())
}

fn check_closed_vs_bruteforce(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let t = &ctx.cfg.tolerances;
    let mut rng = ctx.rng(stream_of("ruelle.closed_vs_bruteforce"));
    let kappas: Vec<DyadicInt> = (0..10).map(|_| random_kappa(&mut rng, ctx.cfg.digits)).collect::<Result<_>>()?;
    let grid = ctx.grid(100);
    let n = 15;
    let rows: Vec<(f64, f64, bool)> = kappas
        .par_iter()
        .map(|kappa| {
            let hs = ruelle::iterate_h(kappa, n, ctx.hull.table(), &ctx.orbit)?;
            let ws = ruelle::weights_along(kappa, n, ctx.hull.table())?;
            let mut dev: f64 = 0.0;
            for m in 0..n {
                for &x in &grid {
                    let direct = ruelle::apply_bruteforce(&ws[m], |y| hs[m].eval(y), x)?;
                    dev = dev.max(max_abs_entry(&(direct - hs[m + 1].eval(x))));
                }
            }
            let psd = hs.iter().map(|h| h.min_coeff_eigenvalue()).fold(f64::INFINITY, f64::min);
            let degrees = hs.iter().enumerate().all(|(m, h)| h.coeffs().len() == m + 1);
            Ok((dev, psd, degrees))
        })
        .collect::<Result<_>>()?;
    let dev = max_of(rows.iter().map(|x| x.0));
    let psd = rows.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let degrees = rows.iter().all(|x| x.2);
    r.tolerance = t.bruteforce;
    r.residual = dev;
    r.pass = dev < t.bruteforce && psd >= -t.psd && degrees;
    r.details = json!({ "n_max": n, "grid": 100, "kappas": kappas, "max_deviation": dev,
        "min_coefficient_eigenvalue": psd, "degree_law": degrees });
    Ok(())
}

/// `ϰ = 0, 1` and four seeded `F_3` windows.
fn sandwich_kappas(ctx: &Context, stream: u64) -> Result<Vec<DyadicInt>> {
    let mut rng = ctx.rng(stream);
    let mut out = vec![ctx.kappa(0)?, ctx.kappa(1)?];
    for _ in 0..4 {
        out.push(DyadicInt::sample_f(&mut rng, 3, ctx.cfg.digits)?);
    }
    Ok(out)
}

fn check_trace_sandwich(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let n_window = 2 * ctx.cfg.truncation;
    let grid = ctx.grid(200);
    let kappas = sandwich_kappas(ctx, stream_of("ruelle.trace_sandwich"))?;
    let reports: Vec<ruelle::SandwichReport> = kappas
        .par_iter()
        .map(|kappa| {
            let sigma = ctx.hull.truncation(kappa, n_window)?.spectral_measure()?;
            let base = sigma.trace_integral(|x| ctx.orbit.w(x, 0));
            let hs = ruelle::iterate_h(kappa, MAX_ITERATION, ctx.hull.table(), &ctx.orbit)?;
            Ok(ruelle::trace_sandwich(&hs, &grid, base))
        })
        .collect::<Result<_>>()?;
    // slack: how far inside the band the worst point sits (negative = violated)
    let slack = reports
        .iter()
        .map(|s| (s.min_trace - s.lower).min(s.upper - s.max_trace).min(s.coeff_mass_bound - s.max_coeff_mass))
        .fold(f64::INFINITY, f64::min);
    r.tolerance = 0.0;
    r.residual = (-slack).max(0.0);
    r.pass = reports.iter().all(|s| s.holds);
    r.details = json!({ "N": n_window, "n_max": MAX_ITERATION, "grid": 200, "kappas": kappas,
        "reports": reports, "min_slack": slack });
    Ok(())
}

fn check_interpolation(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let t = &ctx.cfg.tolerances;
    let n = 25;
    let kappas = sandwich_kappas(ctx, stream_of("ruelle.interpolation"))?;
    let mut worst: f64 = 0.0;
    let mut top: f64 = 0.0;
    let mut f1_exact = true;
    let mut positive = true;
    let mut one_step: f64 = f64::NEG_INFINITY;
    let lam = ctx.params.lambda;
    for kappa in &kappas {
        worst = worst.max(max_of(ruelle::interpolation_residuals(kappa, n, ctx.hull.table(), &ctx.orbit)?));
        top = top.max(ruelle::top_coefficient_residual(kappa, n, ctx.hull.table(), &ctx.orbit)?);
        let f = ruelle::f0_recurrence(kappa, n + 1, ctx.hull.table(), &ctx.orbit)?;
        f1_exact &= f.get(1) == 1.0 / lam;
        positive &= f.all_positive();
        one_step = one_step.max(f.one_step_violation());
    }
    r.tolerance = t.interpolation;
    r.residual = worst;
    r.pass = worst < t.interpolation && top < t.top_coefficient && f1_exact && positive && one_step <= 0.0;
    r.details = json!({ "n_max": n, "kappas": kappas, "max_interpolation_residual": worst,
        "max_top_coefficient_residual": top, "f0_1_is_inverse_lambda": f1_exact,
        "f0_positive": positive, "max_one_step_violation": one_step });
    Ok(())
}

fn check_positivity(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let mut rng = ctx.rng(stream_of("ruelle.positivity"));
    let kappas: Vec<DyadicInt> =
        (0..20).map(|i| DyadicInt::sample_f(&mut rng, 1 + i % 2, ctx.cfg.digits)).collect::<Result<_>>()?;
    let grid = ctx.grid(200);
    let certs: Vec<ruelle::PositivityCertificate> = kappas
        .par_iter()
        .map(|k| ruelle::positivity_certificate(k, 20, &grid, ctx.hull.table(), &ctx.orbit))
        .collect::<Result<_>>()?;
    let margin = certs.iter().map(|c| c.min_eig - c.predicted_c1).fold(f64::INFINITY, f64::min);
    r.tolerance = 0.0;
    r.residual = (-margin).max(0.0);
    r.pass = certs.iter().all(|c| c.pass);
    r.details = json!({ "n": 20, "grid": 200, "certificates": certs, "min_margin": margin });
    Ok(())
}

fn check_atom_probes(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let mut rng = ctx.rng(stream_of("hull.atom_probes"));
    let n = 4 * ctx.cfg.truncation;
    let etas = [1e-1, 1e-2, 1e-3];
    let tree = PreimageTree::new(&ctx.params, ctx.params.xi, 12)?;
    let points: Vec<f64> = (0..10).map(|_| tree.leaves()[rng.random_range(0..tree.leaves().len())]).collect();
    let kappa = ctx.kappa(0)?;
    let j = ctx.hull.truncation(&kappa, n)?;
    let eta_min = hull::resolvable_eta(&j)?;
    let probes: Vec<hull::AtomProbe> =
        points.iter().map(|&x| hull::atom_probe(&j, x, &etas, eta_min)).collect::<Result<_>>()?;
    let gap = hull::atom_probe(&j, ctx.params.xi + 0.5, &etas, eta_min)?;
    let implant = hull::implanted_atom_self_test(&j, 10.0, &etas, ctx.cfg.tolerances.atom_plateau)?;
    let all_decreasing = probes.iter().all(|p| p.decreasing);
    let all_reliable = probes.iter().all(|p| p.reliable.iter().all(|&b| b));
    r.tolerance = ctx.cfg.tolerances.atom_plateau;
    r.residual = implant.max_relative_deviation;
    r.pass = all_decreasing && all_reliable && implant.plateau;
    r.details = json!({ "N": n, "kappa": kappa, "eta_min": eta_min, "probes": probes,
        "gap_point_probe": gap, "implanted_atom": implant,
        "note": "decreasing probes are evidence of no detectable atom at this resolution, not a proof" });
    Ok(())
}

/// Mass-growth probe data for one `ϰ` along the orbit of `x0`.
#[derive(Debug, Clone, Serialize)]
pub struct MassGrowth {
    pub kappa: DyadicInt,
    #[serde(rename = "N")]
    pub half_width: usize,
    pub delta: f64,
    pub orbit: Vec<f64>,
    /// `t_m = tr(h_m(y_m) Σ_{ŝ^mϰ}(B_δ(y_m)))`.
    pub t: Vec<f64>,
    pub ratio: f64,
    /// `|∫ g(Tx) tr(h_m dΣ_m) − ∫ g tr(h_{m+1} dΣ_{m+1})|` maximized over `g ∈ {1, x, x²}`.
    pub pullback_residuals: Vec<f64>,
    /// `|tr Σ_m(B_δ(y_m)) − tr Σ_m(B_δ(−y_m))|`.
    pub evenness: Vec<f64>,
    pub c_minus: f64,
    pub c_plus: f64,
    pub synthetic: Vec<f64>,
    pub synthetic_min_growth: f64,
    pub required_growth: f64,
}

/// The mass-growth probe with orbit `y_m = T^∘m(x0)` given explicitly
/// (tree ancestors avoid the forward drift of an expanding map).
pub fn mass_growth_probe(
    hull: &Hull,
    orbit: &Arc<CriticalOrbit>,
    kappa: &DyadicInt,
    orbit_points: &[f64],
    half_width: usize,
    pullback_steps: usize,
) -> Result<MassGrowth> {
    let n = orbit_points.len() - 1;
    let params = *hull.params();
    let hs = ruelle::iterate_h(kappa, n, hull.table(), orbit)?;
    let weights = ruelle::weights_along(kappa, n, hull.table())?;
    let mut shifted = vec![kappa.clone()];
    for _ in 0..n {
        let next = shifted.last().expect("non-empty").modified_shift()?;
        shifted.push(next);
    }
    let sigmas: Vec<hull::SpectralMeasureApprox> = shifted
        .par_iter()
        .map(|k| hull.truncation(k, half_width)?.spectral_measure())
        .collect::<Result<_>>()?;
    // sixteen mean level spacings
    let delta = 16.0 * 2.0 * params.xi / (2 * half_width) as f64;
    let t: Vec<f64> = (0..=n)
        .map(|m| (hs[m].eval(orbit_points[m]) * sigmas[m].mass_near(orbit_points[m], delta)).trace())
        .collect();
    let evenness = (0..=n)
        .map(|m| {
            let y = orbit_points[m];
            (sigmas[m].trace_mass_near(y, delta) - sigmas[m].trace_mass_near(-y, delta)).abs()
        })
        .collect();
    let tmax = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tmin = t.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda = params.lambda;
    let tests: [fn(f64) -> f64; 3] = [|_| 1.0, |x| x, |x| x * x];
    let pullback_residuals = (0..pullback_steps.min(n))
        .map(|m| {
            max_of(tests.iter().map(|g| {
                let lhs = sigmas[m].pair(|x| hs[m].eval(x) * g(x * x - lambda));
                let rhs = sigmas[m + 1].pair(|x| hs[m + 1].eval(x) * g(x));
                (lhs - rhs).abs()
            }))
        })
        .collect();
    let mut probe_points = linspace(-params.xi, params.xi, 200);
    probe_points.extend(orbit_points.iter().flat_map(|&y| [y, -y]));
    let (c_minus, c_plus) = ruelle::observed_bounds(&hs, &probe_points);
    let synthetic = ruelle::synthetic_atom_growth(&hs, &weights, orbit_points, &(Mat2::identity() * 0.5))?;
    let synthetic_min_growth = synthetic.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    Ok(MassGrowth {
        kappa: kappa.clone(),
        half_width,
        delta,
        orbit: orbit_points.to_vec(),
        t,
        ratio: tmax / tmin,
        pullback_residuals,
        evenness,
        c_minus,
        c_plus,
        synthetic,
        synthetic_min_growth,
        required_growth: 1.0 + c_minus / c_plus,
    })
}

fn check_mass_growth(ctx: &Context, r: &mut CheckResult) -> Result<()> {
    let t = &ctx.cfg.tolerances;
    let bits: Vec<u8> = (0..ctx.cfg.digits).map(|i| (i % 2) as u8).collect();
    let kappa = DyadicInt::from_digits(&bits)?;
    let orbit_points = vec![ctx.params.xi; 11];
    let g = mass_growth_probe(&ctx.hull, &ctx.orbit, &kappa, &orbit_points, 4 * ctx.cfg.truncation, 8)?;
    let pull = max_of(g.pullback_residuals.iter().copied());
    let grows = g.synthetic_min_growth >= g.required_growth * (1.0 - 1e-12);
    r.tolerance = t.growth_ratio;
    r.residual = g.ratio;
    r.pass = pull < t.pullback && g.ratio < t.growth_ratio && grows && g.c_minus > 0.0;
    r.details = json!({ "probe": g, "max_pullback_residual": pull, "pullback_tolerance": t.pullback,
        "synthetic_grows": grows });
    Ok(())
}

/// Serialized report with a trailing newline; identical inputs give identical bytes.
pub fn report_json(report: &VerifyReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report is serializable");
    s.push('\n');
    s
}
