//! Jacobi coefficients of the equilibrium measure of the Julia set.
//!
//! With `a₀ = 0` the squared coefficients are forced by
//!
//! ```text
//! a²_{2k} + a²_{2k+1} = λ,        a²_{2k+1} · a²_{2k+2} = a²_{k+1},
//! ```
//!
//! which fills the table left to right. The table is exact over the
//! rationals up to [`EXACT_DEPTH_CAP`]; deeper tables are double precision.
//! Dyadic arguments are evaluated at their representative modulo `2^M`, with
//! an empirical error bound taken from coarser truncations.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::dyadic::DyadicInt;
use crate::error::{Error, Result};

/// Deepest table built in exact arithmetic (`2^13` rows); denominators grow
/// to thousands of bits, so deeper exact tables are impractical.
pub const EXACT_DEPTH_CAP: usize = 13;

/// Default depth for float tables used by the hull (`2^24` rows), so that
/// negative-index coefficients `a_{−k} ≈ a_{2^M − k}` are well converged.
pub const DEFAULT_FLOAT_DEPTH: usize = 24;

/// How many coarser truncations `a_at` compares against.
const ERROR_PROBES: usize = 3;

/// The parameter `λ`, exact when it was given as a rational literal.
#[derive(Clone, PartialEq)]
pub struct Lambda {
    exact: Option<BigRational>,
    value: f64,
}

impl Lambda {
    pub fn from_f64(value: f64) -> Self {
        let exact = BigRational::from_float(value);
        Self { exact, value }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Rejects `λ ≤ 3` (where limit-periodicity is not available) unless
    /// `allow_small`, and `λ ≤ 2` always.
    pub fn check_regime(&self, allow_small: bool) -> Result<()> {
        if !(self.value > 2.0) {
            return Err(Error::Regime { lambda: self.value, reason: "lambda must exceed 2" });
        }
        if !allow_small && !(self.value > 3.0) {
            return Err(Error::Regime {
                lambda: self.value,
                reason: "lambda <= 3 needs --allow-small-lambda",
            });
        }
        Ok(())
    }
}

impl FromStr for Lambda {
    type Err = Error;

    /// Accepts `4`, `7/2` or a decimal such as `3.75`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidRational(s.to_string());
        let exact = if let Some((num, den)) = s.split_once('/') {
            let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
            let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            BigRational::new(num, den)
        } else if let Some((int, frac)) = s.split_once('.') {
            let digits = format!("{int}{frac}");
            let num = BigInt::from_str(&digits).map_err(|_| bad())?;
            let den = num_traits::pow(BigInt::from(10), frac.len());
            BigRational::new(num, den)
        } else {
            BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)
        };
        let value = exact.to_f64().ok_or_else(bad)?;
        Ok(Self { exact: Some(exact), value })
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(q) => write!(f, "{q}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl fmt::Debug for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lambda({self})")
    }
}

/// Squared Jacobi coefficients `a²_n`, `0 ≤ n < 2^depth`.
#[derive(Clone)]
pub struct CoeffTable {
    lambda: Lambda,
    depth: usize,
    exact: Option<Vec<BigRational>>,
    a_sq: Vec<f64>,
}

/// Value of `a_ϰ` at the representative of `ϰ mod 2^M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicCoeff {
    pub value: f64,
    /// Empirical: spread against the representatives modulo `2^{M−3} … 2^{M−1}`.
    pub error_bound: f64,
    pub representative: u64,
}

impl CoeffTable {
    /// Exact table of `2^depth` rows.
    pub fn build(lambda: &Lambda, depth: usize) -> Result<Self> {
        Self::build_with(lambda, depth, false)
    }

    pub fn build_with(lambda: &Lambda, depth: usize, allow_small: bool) -> Result<Self> {
        lambda.check_regime(allow_small)?;
        check_depth(depth)?;
        if depth > EXACT_DEPTH_CAP {
            return Err(Error::InvalidArgument(format!(
                "exact tables are capped at depth {EXACT_DEPTH_CAP}; use a float table"
            )));
        }
        let lam = lambda
            .exact()
            .ok_or_else(|| Error::InvalidArgument("exact table needs a rational lambda".into()))?
            .clone();
        let len = 1usize << depth;
        let mut a: Vec<BigRational> = Vec::with_capacity(len);
        a.push(BigRational::zero());
        for n in 1..len {
            let next = if n % 2 == 1 {
                &lam - &a[n - 1]
            } else {
                // n = 2k + 2: a²_{2k+2} = a²_{k+1} / a²_{2k+1}
                &a[n / 2] / &a[n - 1]
            };
            a.push(next);
        }
        let a_sq = a.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect();
        Ok(Self { lambda: lambda.clone(), depth, exact: Some(a), a_sq })
    }

    /// Double-precision table of `2^depth` rows; any depth up to 30.
    pub fn build_float(lambda: &Lambda, depth: usize, allow_small: bool) -> Result<Self> {
        lambda.check_regime(allow_small)?;
        check_depth(depth)?;
        if depth > 30 {
            return Err(Error::InvalidArgument(format!("float table depth {depth} exceeds 30")));
        }
        let lam = lambda.value();
        let len = 1usize << depth;
        let mut a = Vec::with_capacity(len);
        a.push(0.0);
        for n in 1..len {
            let next = if n % 2 == 1 { lam - a[n - 1] } else { a[n / 2] / a[n - 1] };
            a.push(next);
        }
        Ok(Self { lambda: lambda.clone(), depth, exact: None, a_sq: a })
    }

    /// Process-wide cache of float tables keyed by `(λ, depth)`.
    pub fn shared_float(lambda: &Lambda, depth: usize) -> Result<Arc<Self>> {
        type Cache = Mutex<HashMap<(u64, usize), Arc<CoeffTable>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let key = (lambda.value().to_bits(), depth);
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(t));
        }
        // Built outside the lock; a concurrent duplicate build is harmless.
        let table = Arc::new(Self::build_float(lambda, depth, true)?);
        let mut guard = cache.lock().expect("cache poisoned");
        Ok(Arc::clone(guard.entry(key).or_insert(table)))
    }

    pub fn lambda(&self) -> &Lambda {
        &self.lambda
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.a_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_sq.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact_rows(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    pub fn a_sq(&self, n: usize) -> f64 {
        self.a_sq[n]
    }

    pub fn a(&self, n: usize) -> f64 {
        self.a_sq[n].sqrt()
    }

    pub fn float_rows(&self) -> &[f64] {
        &self.a_sq
    }

    /// Overwrites one row with a wrong value; used for fault injection.
    pub fn corrupt(&mut self, n: usize) {
        if let Some(rows) = self.exact.as_mut() {
            rows[n] += BigRational::new(BigInt::one(), BigInt::from(1000));
        }
        self.a_sq[n] += 1e-3;
    }

    /// Checks the two defining relations on every row: exactly for
    /// rational tables, to `1e-12` relative for float tables.
    pub fn verify_relations(&self) -> Result<()> {
        let len = self.len();
        if let Some(a) = &self.exact {
            let lam = self.lambda.exact().expect("exact tables carry exact lambda");
            if !a[0].is_zero() {
                return Err(corrupted(0, "a_0 must vanish"));
            }
            for k in 0..len / 2 {
                if &a[2 * k] + &a[2 * k + 1] != *lam {
                    return Err(corrupted(2 * k, "a²_{2k} + a²_{2k+1} = λ"));
                }
                if 2 * k + 2 < len && &a[2 * k + 1] * &a[2 * k + 2] != a[k + 1] {
                    return Err(corrupted(2 * k + 2, "a²_{2k+1} a²_{2k+2} = a²_{k+1}"));
                }
            }
            for (n, q) in a.iter().enumerate().skip(1) {
                if !q.is_positive() {
                    return Err(corrupted(n, "a²_n > 0"));
                }
            }
        } else {
            let a = &self.a_sq;
            let lam = self.lambda.value();
            for k in 0..len / 2 {
                if ((a[2 * k] + a[2 * k + 1]) - lam).abs() > 1e-12 * lam {
                    return Err(corrupted(2 * k, "a²_{2k} + a²_{2k+1} = λ"));
                }
                if 2 * k + 2 < len
                    && (a[2 * k + 1] * a[2 * k + 2] - a[k + 1]).abs() > 1e-12 * a[k + 1].abs()
                {
                    return Err(corrupted(2 * k + 2, "a²_{2k+1} a²_{2k+2} = a²_{k+1}"));
                }
            }
        }
        Ok(())
    }

    fn index_mod(&self, k: i128, m: usize) -> usize {
        k.rem_euclid(1i128 << m) as usize
    }

    /// `a_{ϰ+offset}` at the representative modulo `2^{min(M, depth)}`.
    pub fn a_shifted(&self, kappa: &DyadicInt, offset: i64) -> f64 {
        let m = kappa.precision().min(self.depth);
        let k = kappa.residue(m) as i128 + offset as i128;
        self.a(self.index_mod(k, m))
    }

    /// `a_ϰ` with an empirical error bound. Digits beyond the table depth are
    /// dropped; the bound compares against representatives modulo the three
    /// next coarser powers of two.
    pub fn a_at(&self, kappa: &DyadicInt) -> DyadicCoeff {
        let m = kappa.precision().min(self.depth);
        let k = kappa.residue(m);
        let value = self.a(k as usize);
        let error_bound = (m.saturating_sub(ERROR_PROBES).max(1)..m)
            .map(|mm| (self.a(self.index_mod(k as i128, mm)) - value).abs())
            .fold(0.0, f64::max);
        DyadicCoeff { value, error_bound, representative: k }
    }

    /// `max_s |a_{k + s 2^n} − a_k|` for `n = 1, …, depth − 1`.
    pub fn limit_periodicity_profile(&self, k: usize) -> Vec<f64> {
        let len = self.len();
        (1..self.depth)
            .map(|n| {
                let step = 1usize << n;
                let base = k % step;
                let a_k = self.a(base);
                (base..len)
                    .step_by(step)
                    .map(|j| (self.a(j) - a_k).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

impl fmt::Debug for CoeffTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoeffTable")
            .field("lambda", &self.lambda)
            .field("depth", &self.depth)
            .field("exact", &self.is_exact())
            .finish()
    }
}

fn check_depth(depth: usize) -> Result<()> {
    if depth == 0 {
        Err(Error::InvalidArgument("table depth must be >= 1".into()))
    } else {
        Ok(())
    }
}

fn corrupted(index: usize, relation: &str) -> Error {
    Error::TableCorrupted { index, relation: relation.to_string() }
}

/// Extremal rows of the parity bounds `a²_even ≤ 1`, `a²_odd ≥ λ − 1`.
#[derive(Debug, Clone, Serialize)]
pub struct ParityReport {
    pub max_even_index: usize,
    pub max_even_value: f64,
    pub min_odd_index: usize,
    pub min_odd_value: f64,
    pub exact: bool,
}

/// Checks `a²_{2k} ≤ 1` for `k ≥ 1` and `a²_{2k+1} ≥ λ − 1` on every row.
pub fn verify_parity_bounds(table: &CoeffTable) -> Result<ParityReport> {
    let len = table.len();
    let lam = table.lambda().value();
    // Extremal rows are located in floating point, then every row is
    // compared exactly when the table is rational.
    let max_even = (2..len)
        .step_by(2)
        .max_by(|&i, &j| table.a_sq(i).total_cmp(&table.a_sq(j)));
    let min_odd = (1..len)
        .step_by(2)
        .min_by(|&i, &j| table.a_sq(i).total_cmp(&table.a_sq(j)))
        .expect("table has at least one odd row");
    if let Some(rows) = table.exact_rows() {
        let one = BigRational::one();
        let lam_minus_one = table.lambda().exact().expect("exact") - &one;
        for (n, q) in rows.iter().enumerate().skip(1) {
            let ok = if n % 2 == 0 { *q <= one } else { *q >= lam_minus_one };
            if !ok {
                return Err(corrupted(n, "parity bound"));
            }
        }
    } else {
        for n in 1..len {
            let v = table.a_sq(n);
            let ok = if n % 2 == 0 { v <= 1.0 + 1e-12 } else { v >= lam - 1.0 - 1e-12 };
            if !ok {
                return Err(corrupted(n, "parity bound"));
            }
        }
    }
    let max_even_index = max_even.unwrap_or(0);
    Ok(ParityReport {
        max_even_index,
        max_even_value: max_even.map(|i| table.a_sq(i)).unwrap_or(0.0),
        min_odd_index: min_odd,
        min_odd_value: table.a_sq(min_odd),
        exact: table.is_exact(),
    })
}

/// Outcome of the `F_N` lower bound `a²_ϰ ≥ (λ−1)/λ^N`.
#[derive(Debug, Clone, Serialize)]
pub struct FnBoundReport {
    pub n: usize,
    pub c3: f64,
    pub samples: usize,
    pub min_a_sq: f64,
    pub violations: usize,
    pub induction_checks: usize,
    pub induction_violations: usize,
}

/// `C₃ = (λ − 1)/λ^N`.
pub fn c3(lambda: f64, n: usize) -> f64 {
    (lambda - 1.0) / lambda.powi(n as i32)
}

/// Evaluates `a²_ϰ` on the samples (callers pass `ϰ` inside an `F_N`
/// window) and also the induction steps `a²_{2^{j+1}ϰ'} ≥ (λ−1)/λ^{j+1}`
/// along the odd part `ϰ'` of each sample, `j < N`. A sample passes when
/// `a²_ϰ ≥ C₃ − tol − error_bound`.
pub fn fn_lower_bound(
    table: &CoeffTable,
    n: usize,
    samples: &[DyadicInt],
    tol: f64,
) -> Result<FnBoundReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("F_N needs N >= 1".into()));
    }
    let lam = table.lambda().value();
    let bound = c3(lam, n);
    let mut min_a_sq = f64::INFINITY;
    let mut violations = 0;
    let mut induction_checks = 0;
    let mut induction_violations = 0;
    for kappa in samples {
        let c = table.a_at(kappa);
        let a_sq = c.value * c.value;
        min_a_sq = min_a_sq.min(a_sq);
        if a_sq < bound - tol - c.error_bound {
            violations += 1;
        }
        // odd part: drop the trailing zeros
        let zeros = kappa.digits().iter().take_while(|&&d| d == 0).count();
        if zeros >= kappa.precision() - 1 {
            continue;
        }
        let mut odd = kappa.clone();
        for _ in 0..zeros {
            odd = odd.shift()?;
        }
        let mut cur = odd;
        for j in 0..n {
            cur = cur.double();
            let v = table.a_at(&cur);
            induction_checks += 1;
            if v.value * v.value < c3(lam, j + 1) - tol - v.error_bound {
                induction_violations += 1;
            }
        }
    }
    Ok(FnBoundReport {
        n,
        c3: bound,
        samples: samples.len(),
        min_a_sq,
        violations,
        induction_checks,
        induction_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn lam(s: &str) -> Lambda {
        s.parse().unwrap()
    }

    /// Independent oracle: solve the two relations row by row, in the
    /// order they are stated, with no shared indexing logic.
    fn oracle(lambda: &BigRational, rows: usize) -> Vec<BigRational> {
        let mut a = vec![BigRational::zero(); rows];
        for k in 0.. {
            if 2 * k + 1 >= rows {
                break;
            }
            a[2 * k + 1] = lambda - &a[2 * k];
            if 2 * k + 2 < rows {
                a[2 * k + 2] = &a[k + 1] / &a[2 * k + 1];
            }
        }
        a
    }

    #[test]
    fn lambda_parsing() {
        assert_eq!(lam("7/2").exact(), Some(&q(7, 2)));
        assert_eq!(lam("3.75").exact(), Some(&q(15, 4)));
        assert_eq!(lam("4").value(), 4.0);
        assert!("x".parse::<Lambda>().is_err());
        assert!("1/0".parse::<Lambda>().is_err());
        assert!(lam("2.5").check_regime(false).is_err());
        assert!(lam("2.5").check_regime(true).is_ok());
        assert!(lam("2").check_regime(true).is_err());
    }

    #[test]
    fn small_rows_match_oracle() {
        let t = CoeffTable::build(&lam("4"), 3).unwrap();
        let rows = t.exact_rows().unwrap();
        let expected = [q(0, 1), q(4, 1), q(1, 1), q(3, 1), q(1, 3), q(11, 3), q(9, 11), q(35, 11)];
        assert_eq!(rows, &expected);
        assert_eq!(rows, oracle(&q(4, 1), 8).as_slice());
    }

    #[test]
    fn exact_table_matches_oracle_and_relations() {
        for s in ["4", "7/2", "13/3"] {
            let l = lam(s);
            let t = CoeffTable::build(&l, 9).unwrap();
            assert_eq!(t.exact_rows().unwrap(), oracle(l.exact().unwrap(), 512).as_slice());
            t.verify_relations().unwrap();
        }
    }

    #[test]
    fn regime_gate() {
        assert!(matches!(CoeffTable::build(&lam("5/2"), 4), Err(Error::Regime { .. })));
        assert!(CoeffTable::build_with(&lam("5/2"), 4, true).is_ok());
        assert!(CoeffTable::build(&lam("4"), 17).is_err());
    }

    #[test]
    fn float_table_tracks_exact() {
        let l = lam("4");
        let e = CoeffTable::build(&l, 12).unwrap();
        let f = CoeffTable::build_float(&l, 12, false).unwrap();
        for n in 0..e.len() {
            assert!((e.a_sq(n) - f.a_sq(n)).abs() < 1e-13, "n={n}");
        }
        f.verify_relations().unwrap();
    }

    #[test]
    fn corruption_is_detected() {
        let mut t = CoeffTable::build(&lam("4"), 6).unwrap();
        t.corrupt(9);
        assert!(matches!(t.verify_relations(), Err(Error::TableCorrupted { .. })));
    }

    #[test]
    fn dyadic_evaluation() {
        let t = CoeffTable::build(&lam("4"), 12).unwrap();
        let three = t.a_at(&DyadicInt::from_integer(3, 64).unwrap());
        assert_eq!(three.value, 3f64.sqrt());
        assert_eq!(three.error_bound, 0.0);
        assert_eq!(three.representative, 3);
        let zero = t.a_at(&DyadicInt::from_integer(0, 64).unwrap());
        assert_eq!((zero.value, zero.error_bound), (0.0, 0.0));

        // a²_{2^n − 1} = 4, 3, 35/11, 17963/5707, …
        let rows = t.exact_rows().unwrap();
        assert_eq!(rows[15], q(17963, 5707));
        let mut bounds = Vec::new();
        for m in [4, 8, 12] {
            let c = t.a_at(&DyadicInt::from_integer(-1, m).unwrap());
            assert_eq!(c.representative, (1 << m) - 1);
            assert!((c.value * c.value - 3.15).abs() < 0.01);
            bounds.push(c.error_bound);
        }
        assert!(bounds[0] > bounds[1] && bounds[1] > bounds[2], "{bounds:?}");
    }

    #[test]
    fn parity_bounds_hold() {
        for s in ["4", "7/2"] {
            let t = CoeffTable::build(&lam(s), 12).unwrap();
            let r = verify_parity_bounds(&t).unwrap();
            assert!(r.min_odd_value >= lam(s).value() - 1.0);
            assert!(r.max_even_value <= 1.0);
            if s == "4" {
                assert_eq!((r.max_even_index, r.max_even_value), (2, 1.0));
                assert!(r.min_odd_value >= 3.0);
            }
        }
    }

    #[test]
    fn fn_bound_examples() {
        let t = CoeffTable::build(&lam("4"), 12).unwrap();
        assert_eq!(c3(4.0, 3), 3.0 / 64.0);
        let alt = DyadicInt::eventually_periodic(&[], &[1, 0], 64).unwrap();
        let r = fn_lower_bound(&t, 1, &[alt], 0.0).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.min_a_sq >= 0.75);
        assert_eq!(t.exact_rows().unwrap()[6], q(9, 11));
        assert!(t.a_sq(6) >= 0.75);
    }
}
