//! The quadratic map `T(z) = z² − λ` on its real Julia set.
//!
//! Covers the critical orbit `T^∘k(0)`, preimage trees and the balanced
//! quadrature they induce, the scalar transfer operators `ℒ_j`, and the
//! pole functions `w_x^n(T(0))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Orbit values above this magnitude are stored on a log scale.
pub const LOG_SCALE_THRESHOLD: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapParams {
    pub lambda: f64,
    /// Positive root of `ξ² − ξ − λ = 0`; `E ⊂ [−ξ, ξ]`.
    pub xi: f64,
}

impl MapParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 2.0) || !lambda.is_finite() {
            return Err(Error::Regime { lambda, reason: "the Julia set is real only for lambda > 2" });
        }
        Ok(Self { lambda, xi: 0.5 * (1.0 + (1.0 + 4.0 * lambda).sqrt()) })
    }

    #[inline]
    pub fn t(&self, z: f64) -> f64 {
        z * z - self.lambda
    }

    /// `T(0) = −λ`.
    pub fn critical_value(&self) -> f64 {
        -self.lambda
    }

    pub fn in_trapping_interval(&self, x: f64, tol: f64) -> bool {
        x.abs() <= self.xi + tol
    }

    /// `± √(x + λ)`.
    pub fn preimages(&self, x: f64) -> Result<(f64, f64)> {
        if x < -self.lambda {
            return Err(Error::Domain { x, min: -self.lambda });
        }
        let y = (x + self.lambda).sqrt();
        Ok((y, -y))
    }

    /// Bounds `1/(λ+ξ) ≤ w_x^n(T(0)) ≤ 1/(λ−ξ)` valid for `x ∈ [−ξ, ξ]`.
    pub fn w_bounds(&self) -> (f64, f64) {
        (1.0 / (self.lambda + self.xi), 1.0 / (self.lambda - self.xi))
    }
}

/// A point of a forward orbit; huge magnitudes switch to `(sign, ln|v|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OrbitPoint {
    Finite(f64),
    Log { negative: bool, ln_abs: f64 },
}

impl OrbitPoint {
    pub fn to_f64(self) -> f64 {
        match self {
            OrbitPoint::Finite(v) => v,
            OrbitPoint::Log { negative, .. } => {
                if negative {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// `1/v`, flushing to zero once the magnitude leaves the f64 range.
    pub fn recip(self) -> f64 {
        match self {
            OrbitPoint::Finite(v) => 1.0 / v,
            OrbitPoint::Log { negative, ln_abs } => {
                let r = (-ln_abs).exp();
                if negative {
                    -r
                } else {
                    r
                }
            }
        }
    }

    pub fn ln_abs(self) -> f64 {
        match self {
            OrbitPoint::Finite(v) => v.abs().ln(),
            OrbitPoint::Log { ln_abs, .. } => ln_abs,
        }
    }
}

/// `T^∘0(0), …, T^∘n(0)`.
pub fn orbit_of_zero(params: &MapParams, n: usize) -> Vec<OrbitPoint> {
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = OrbitPoint::Finite(0.0);
    out.push(cur);
    for _ in 0..n {
        cur = step(params, cur);
        out.push(cur);
    }
    out
}

fn step(params: &MapParams, p: OrbitPoint) -> OrbitPoint {
    match p {
        OrbitPoint::Finite(v) if v.abs() <= LOG_SCALE_THRESHOLD.sqrt() => {
            OrbitPoint::Finite(params.t(v))
        }
        _ => {
            // T(v) = v²(1 − λ/v²) > 0 once |v| is large.
            let ln = p.ln_abs();
            let next = 2.0 * ln + (-params.lambda * (-2.0 * ln).exp()).ln_1p();
            if next <= LOG_SCALE_THRESHOLD.ln() {
                OrbitPoint::Finite(next.exp())
            } else {
                OrbitPoint::Log { negative: false, ln_abs: next }
            }
        }
    }
}

/// Cached data of the critical orbit used by every pole-basis computation.
///
/// `w_0^n(T(0)) = (1/λ) Π_{k=1}^n ρ_k` with `ρ_k = 1/(1 − λ r_k²)` and
/// `r_k = 1/T^∘k(0)`; this is the product formula with the doubly
/// exponential factors telescoped away. Once `r_k` underflows every further
/// factor is exactly one, so the tables stop growing there.
#[derive(Debug, Clone)]
pub struct CriticalOrbit {
    params: MapParams,
    /// `recips[k] = 1/T^∘k(0)` for `k ≥ 1`; `recips[0]` is unused.
    recips: Vec<f64>,
    /// `w0[n] = w_0^n(T(0))`.
    w0: Vec<f64>,
}

impl CriticalOrbit {
    pub fn new(params: MapParams) -> Self {
        let mut recips = vec![f64::INFINITY];
        let mut w0 = vec![1.0 / params.lambda];
        let mut r = -1.0 / params.lambda;
        recips.push(r);
        loop {
            let r2 = r * r;
            r = r2 / (1.0 - params.lambda * r2);
            recips.push(r);
            let k = w0.len();
            let rho = 1.0 / (1.0 - params.lambda * recips[k] * recips[k]);
            w0.push(w0[k - 1] * rho);
            if recips[k] == 0.0 {
                break;
            }
        }
        Self { params, recips, w0 }
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    /// `1/T^∘k(0)` for `k ≥ 1`.
    pub fn recip(&self, k: usize) -> f64 {
        assert!(k >= 1, "T^0(0) = 0 has no reciprocal");
        self.recips.get(k).copied().unwrap_or(0.0)
    }

    /// `w_0^n(T(0))`.
    pub fn w0(&self, n: usize) -> f64 {
        *self.w0.get(n).unwrap_or_else(|| self.w0.last().expect("non-empty"))
    }

    /// `w_x^n(T(0)) = w_0^n(T(0)) / (1 − x/T^∘(n+1)(0))`.
    pub fn w(&self, x: f64, n: usize) -> f64 {
        self.w0(n) / (1.0 - x * self.recip(n + 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WValue {
    pub x: f64,
    pub n: usize,
    pub value: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub within_bounds: bool,
    /// False when `x ∉ [−ξ, ξ]`; the bounds are then not guaranteed.
    pub in_domain: bool,
}

/// `w_x^n(T(0))` from the product formula.
pub fn w_eval(orbit: &CriticalOrbit, x: f64, n: usize) -> WValue {
    let params = orbit.params();
    let value = orbit.w(x, n);
    let (lower, upper) = params.w_bounds();
    WValue {
        x,
        n,
        value,
        lower_bound: lower,
        upper_bound: upper,
        within_bounds: value >= lower && value <= upper,
        in_domain: params.in_trapping_interval(x, 0.0),
    }
}

/// `w_x^n(T(0))` from the partial fraction form `2^{-n} Σ_{T^n(y)=x} 1/(y+λ)`.
pub fn w_preimage_sum(params: &MapParams, x: f64, n: usize) -> Result<f64> {
    let tree = PreimageTree::new(params, x, n)?;
    let mut acc = CompensatedSum::default();
    for &y in tree.leaves() {
        acc.add(1.0 / (y + params.lambda));
    }
    Ok(acc.value() / (1u64 << n) as f64)
}

/// Complete binary tree of iterated preimages `y = ±√(x + λ)`.
///
/// `levels[d]` holds the `2^d` nodes at depth `d`; the children of node `i`
/// sit at `2i` (positive root) and `2i + 1` (negative root), so the ancestor
/// of a leaf `i` at depth `d − m` is `i >> m`, which is `T^∘m` of the leaf.
#[derive(Debug, Clone)]
pub struct PreimageTree {
    levels: Vec<Vec<f64>>,
}

impl PreimageTree {
    pub fn new(params: &MapParams, root: f64, depth: usize) -> Result<Self> {
        if root < -params.lambda {
            return Err(Error::Domain { x: root, min: -params.lambda });
        }
        let mut levels = vec![vec![root]];
        for d in 0..depth {
            let next = levels[d]
                .iter()
                .flat_map(|&p| {
                    // children of a node ≥ −λ are real and ≥ −ξ ≥ −λ
                    let y = (p + params.lambda).max(0.0).sqrt();
                    [y, -y]
                })
                .collect();
            levels.push(next);
        }
        Ok(Self { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn root(&self) -> f64 {
        self.levels[0][0]
    }

    pub fn leaves(&self) -> &[f64] {
        self.levels.last().expect("tree has a root")
    }

    pub fn level(&self, d: usize) -> &[f64] {
        &self.levels[d]
    }

    /// `T^∘m(leaf)` read off the tree (no forward iteration).
    pub fn forward_image(&self, leaf: usize, m: usize) -> f64 {
        let d = self.depth();
        assert!(m <= d);
        self.levels[d - m][leaf >> m]
    }

    /// `max_leaf |T^∘d(leaf) − root|` by explicit forward iteration.
    pub fn forward_residual(&self, params: &MapParams) -> f64 {
        let root = self.root();
        self.leaves()
            .iter()
            .map(|&y| {
                let mut v = y;
                for _ in 0..self.depth() {
                    v = params.t(v);
                }
                (v - root).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Uniform-weight quadrature on depth-`n` preimages of a root point.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut acc = CompensatedSum::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(x));
        }
        acc.value()
    }
}

/// Balanced quadrature for `μ_E` rooted at `ξ ∈ E`.
pub fn balanced_quadrature(params: &MapParams, depth: usize) -> Result<Quadrature> {
    if depth == 0 {
        return Err(Error::InvalidArgument("quadrature depth must be >= 1".into()));
    }
    let tree = PreimageTree::new(params, params.xi, depth)?;
    let nodes = tree.leaves().to_vec();
    let w = 1.0 / nodes.len() as f64;
    Ok(Quadrature { weights: vec![w; nodes.len()], nodes })
}

/// `(ℒ_j f)(x) = Σ_{T(y)=x} f(y) / T'(y)^j`.
pub fn scalar_ruelle<F: Fn(f64) -> f64>(params: &MapParams, f: F, j: u32, x: f64) -> Result<f64> {
    if j > 2 {
        return Err(Error::InvalidArgument(format!("Ruelle weight exponent {j} not in 0..=2")));
    }
    let (y, neg) = params.preimages(x)?;
    if j > 0 && y == 0.0 {
        return Err(Error::SingularWeight { x });
    }
    let term = |y: f64| f(y) / (2.0 * y).powi(j as i32);
    Ok(term(y) + term(neg))
}

/// `|∫ f dμ − ½ ∫ ℒ_0 f dμ|` on a quadrature, summed as one compensated sum of
/// per-node differences.
pub fn invariance_residual<F: Fn(f64) -> f64>(
    params: &MapParams,
    quad: &Quadrature,
    f: F,
) -> Result<f64> {
    let mut acc = CompensatedSum::default();
    for (&x, &w) in quad.nodes.iter().zip(&quad.weights) {
        let pulled = scalar_ruelle(params, &f, 0, x)?;
        acc.add(w * f(x));
        acc.add(-0.5 * w * pulled);
    }
    Ok(acc.value().abs())
}

/// Residual of `ℒ₂*ν = ρ₂ν`, `ρ₂ = 1/(2a²_{−1})`, tested against `f`:
/// `|∫ ℒ₂f dν − ρ₂ ∫ f dν|`. `nu` is a list of `(x, mass)` atoms.
pub fn nu_invariance_check<F: Fn(f64) -> f64>(
    params: &MapParams,
    nu: &[(f64, f64)],
    a_minus1_sq: f64,
    f: F,
) -> Result<f64> {
    let mass: f64 = nu.iter().map(|a| a.1).sum();
    if (mass - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { mass });
    }
    let rho2 = 1.0 / (2.0 * a_minus1_sq);
    let mut lhs = CompensatedSum::default();
    let mut rhs = CompensatedSum::default();
    for &(x, m) in nu {
        lhs.add(m * scalar_ruelle(params, &f, 2, x)?);
        rhs.add(m * f(x));
    }
    Ok((lhs.value() - rho2 * rhs.value()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> MapParams {
        MapParams::new(4.0).unwrap()
    }

    #[test]
    fn xi_solves_quadratic() {
        for lambda in [2.5, 3.5, 4.0, 7.0] {
            let p = MapParams::new(lambda).unwrap();
            assert!((p.xi * p.xi - p.xi - lambda).abs() < 1e-12);
            assert!(p.critical_value() < -p.xi);
        }
        assert!(MapParams::new(2.0).is_err());
    }

    #[test]
    fn orbit_small_values() {
        let o = orbit_of_zero(&p4(), 3);
        let v: Vec<f64> = o.iter().map(|p| p.to_f64()).collect();
        assert_eq!(v, vec![0.0, -4.0, 12.0, 140.0]);
        assert!(12.0 > p4().xi);
    }

    #[test]
    fn orbit_switches_to_log_scale() {
        let p = p4();
        let o = orbit_of_zero(&p, 16);
        assert!(matches!(o[16], OrbitPoint::Log { negative: false, .. }));
        for k in 2..16 {
            assert!(o[k + 1].ln_abs() > o[k].ln_abs());
            // ln T^{k+1} ≈ 2 ln T^k
            let ratio = o[k + 1].ln_abs() / o[k].ln_abs();
            if k > 6 {
                assert!((ratio - 2.0).abs() < 1e-6);
            }
        }
        let orbit = CriticalOrbit::new(p);
        for k in 1..=12 {
            let rel = (orbit.recip(k) - o[k].recip()).abs() / o[k].recip().abs().max(1e-300);
            assert!(rel < 1e-12 || o[k].recip() == 0.0, "k={k}");
        }
    }

    #[test]
    fn preimage_tree_basics() {
        let p = p4();
        let t = PreimageTree::new(&p, 0.0, 1).unwrap();
        assert_eq!(t.leaves(), &[2.0, -2.0]);
        let t = PreimageTree::new(&p, 1.0, 10).unwrap();
        assert_eq!(t.leaves().len(), 1024);
        assert!(t.leaves().iter().all(|y| y.abs() <= p.xi));
        assert!(PreimageTree::new(&p, -4.5, 2).is_err());
        assert_eq!(t.forward_image(37, 10), 1.0);
        assert_eq!(t.forward_image(37, 1), t.level(9)[18]);
    }

    #[test]
    fn scalar_ruelle_examples() {
        let p = p4();
        for x in [-2.0, 0.0, 1.7] {
            assert_eq!(scalar_ruelle(&p, |_| 1.0, 0, x).unwrap(), 2.0);
            assert_eq!(scalar_ruelle(&p, |_| 1.0, 1, x).unwrap(), 0.0);
        }
        assert_eq!(scalar_ruelle(&p, |_| 1.0, 2, 0.0).unwrap(), 0.125);
        assert!(matches!(scalar_ruelle(&p, |_| 1.0, 2, -4.0), Err(Error::SingularWeight { .. })));
        assert!(scalar_ruelle(&p, |_| 1.0, 0, -4.0).is_ok());
    }

    #[test]
    fn w_examples() {
        let orbit = CriticalOrbit::new(p4());
        assert!((w_eval(&orbit, 0.0, 0).value - 0.25).abs() < 1e-15);
        assert!((w_eval(&orbit, 0.0, 1).value - 1.0 / 3.0).abs() < 1e-15);
        let (lo, hi) = p4().w_bounds();
        assert!((lo - 0.152_401).abs() < 1e-5 && (hi - 0.695_194).abs() < 1e-5);
        for n in 0..=12 {
            assert!(w_eval(&orbit, 0.0, n).within_bounds);
        }
        assert!(!w_eval(&orbit, 3.0, 0).in_domain);
    }

    #[test]
    fn quadrature_moments() {
        let p = p4();
        let q = balanced_quadrature(&p, 16).unwrap();
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!(q.integrate(|x| x).abs() < 1e-8);
        assert!(balanced_quadrature(&p, 0).is_err());
    }
}
