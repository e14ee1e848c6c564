//! The matrix Ruelle operator `ℳ_ϰ` on the pole basis and its certificates.
//!
//! `(ℳ_ϰ g)(x) = ½ Σ_{T(y)=x} 𝔭_ϰ(y) g(y) 𝔭_ϰ(y)*` with
//! `𝔭_ϰ(y) = D_ϰ + Φ_ϰ / y`, where `D_ϰ` is a coordinate projection and
//! `Φ_ϰ = Ψ_ϰ Υ_ϰ*` has rank one. On functions `h(x) = Σ_k w_x^k(T(0)) A_k`
//! the operator acts on the coefficient list:
//!
//! ```text
//! A'_0     = Σ_k w_0^k(T(0)) Φ A_k Φ*,
//! A'_{k+1} = 𝔭(T^∘(k+1)(0)) A_k 𝔭(T^∘(k+1)(0))*.
//! ```

use std::sync::Arc;

use nalgebra::Vector2;
use serde::Serialize;

use crate::coeffs::CoeffTable;
use crate::dyadic::DyadicInt;
use crate::dynamics::{CriticalOrbit, MapParams};
use crate::error::{Error, Result};
use crate::numeric::{max_abs_entry, min_eigenvalue, sym_eigenvalues, Mat2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Weight data of `𝔭_ϰ`: `(a_minus, a_plus) = (a_{ϰ−1}, a_ϰ)` for even `ϰ`
/// and `(a_ϰ, a_{ϰ+1})` for odd `ϰ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuelleWeight {
    pub parity: Parity,
    pub a_minus: f64,
    pub a_plus: f64,
    pub lambda: f64,
}

impl RuelleWeight {
    pub fn new(parity: Parity, a_minus: f64, a_plus: f64, lambda: f64) -> Self {
        Self { parity, a_minus, a_plus, lambda }
    }

    pub fn psi(&self) -> Vector2<f64> {
        Vector2::new(self.a_minus, self.a_plus)
    }

    pub fn upsilon(&self) -> Vector2<f64> {
        match self.parity {
            Parity::Even => Vector2::new(1.0, 0.0),
            Parity::Odd => Vector2::new(0.0, 1.0),
        }
    }

    /// `Φ = Ψ Υ*`, the residue of `𝔭` at the critical point.
    pub fn phi(&self) -> Mat2 {
        self.psi() * self.upsilon().transpose()
    }

    /// The constant part `D = 𝔭(∞)`.
    pub fn constant_part(&self) -> Mat2 {
        match self.parity {
            Parity::Even => Mat2::new(0.0, 0.0, 0.0, 1.0),
            Parity::Odd => Mat2::new(1.0, 0.0, 0.0, 0.0),
        }
    }

    /// `𝔭(x)`; `2/T'(x) = 1/x`.
    pub fn eval(&self, x: f64) -> Result<Mat2> {
        if x == 0.0 {
            return Err(Error::SingularWeight { x });
        }
        Ok(self.eval_recip(1.0 / x))
    }

    /// `𝔭` at the point with reciprocal `r = 1/x`; `r = 0` gives the limit at infinity.
    pub fn eval_recip(&self, r: f64) -> Mat2 {
        self.constant_part() + self.phi() * r
    }
}

/// `𝔭_ϰ` read off the coefficient table; the parity is the last digit.
pub fn weight(kappa: &DyadicInt, table: &CoeffTable) -> Result<RuelleWeight> {
    if kappa.precision() < 2 {
        return Err(Error::PrecisionExhausted { needed: 2, available: kappa.precision() });
    }
    let lambda = table.lambda().value();
    Ok(if kappa.is_odd() {
        RuelleWeight::new(Parity::Odd, table.a_shifted(kappa, 0), table.a_shifted(kappa, 1), lambda)
    } else {
        RuelleWeight::new(Parity::Even, table.a_shifted(kappa, -1), table.a_shifted(kappa, 0), lambda)
    })
}

/// Weights of `ϰ, ŝϰ, …, ŝ^{n−1}ϰ`.
pub fn weights_along(kappa: &DyadicInt, n: usize, table: &CoeffTable) -> Result<Vec<RuelleWeight>> {
    let mut out = Vec::with_capacity(n);
    let mut cur = kappa.clone();
    for m in 0..n {
        out.push(weight(&cur, table)?);
        if m + 1 < n {
            cur = cur.modified_shift()?;
        }
    }
    Ok(out)
}

fn require_precision(kappa: &DyadicInt, n: usize) -> Result<()> {
    if kappa.precision() < n + 2 {
        return Err(Error::PrecisionExhausted { needed: n + 2, available: kappa.precision() });
    }
    Ok(())
}

/// `h(x) = Σ_k w_x^k(T(0)) A_k`.
#[derive(Debug, Clone)]
pub struct MatrixPoleFunction {
    coeffs: Vec<Mat2>,
    orbit: Arc<CriticalOrbit>,
}

impl MatrixPoleFunction {
    pub fn new(coeffs: Vec<Mat2>, orbit: Arc<CriticalOrbit>) -> Self {
        Self { coeffs, orbit }
    }

    /// `h_0(x) = w_x^0(T(0)) I`.
    pub fn initial(orbit: Arc<CriticalOrbit>) -> Self {
        Self::new(vec![Mat2::identity()], orbit)
    }

    pub fn coeffs(&self) -> &[Mat2] {
        &self.coeffs
    }

    pub fn orbit(&self) -> &Arc<CriticalOrbit> {
        &self.orbit
    }

    /// Index of the highest coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> Mat2 {
        self.coeffs
            .iter()
            .enumerate()
            .fold(Mat2::zeros(), |acc, (k, a)| acc + a * self.orbit.w(x, k))
    }

    /// `Σ_k tr A_k`.
    pub fn trace_mass(&self) -> f64 {
        self.coeffs.iter().map(|a| a.trace()).sum()
    }

    pub fn min_coeff_eigenvalue(&self) -> f64 {
        self.coeffs.iter().map(min_eigenvalue).fold(f64::INFINITY, f64::min)
    }
}

/// One step of the iteration, acting on coefficients.
pub fn apply_closed_form(w: &RuelleWeight, h: &MatrixPoleFunction) -> MatrixPoleFunction {
    let orbit = h.orbit();
    let phi = w.phi();
    let mut out = Vec::with_capacity(h.coeffs.len() + 1);
    let mut a0 = Mat2::zeros();
    for (k, a) in h.coeffs.iter().enumerate() {
        a0 += phi * a * phi.transpose() * orbit.w0(k);
    }
    out.push(a0);
    for (k, a) in h.coeffs.iter().enumerate() {
        let p = w.eval_recip(orbit.recip(k + 1));
        out.push(p * a * p.transpose());
    }
    MatrixPoleFunction::new(out, Arc::clone(orbit))
}

/// `(ℳ g)(x)` by the two-term preimage sum.
pub fn apply_bruteforce<G: Fn(f64) -> Mat2>(w: &RuelleWeight, g: G, x: f64) -> Result<Mat2> {
    let params = MapParams::new(w.lambda)?;
    let (y, ny) = params.preimages(x)?;
    let p = w.eval(y)?;
    let q = w.eval(ny)?;
    Ok((p * g(y) * p.transpose() + q * g(ny) * q.transpose()) * 0.5)
}

/// `h_0, …, h_n` with `h_m = ℳ_{ŝ^{m−1}ϰ} h_{m−1}`.
pub fn iterate_h(
    kappa: &DyadicInt,
    n: usize,
    table: &CoeffTable,
    orbit: &Arc<CriticalOrbit>,
) -> Result<Vec<MatrixPoleFunction>> {
    require_precision(kappa, n)?;
    let weights = weights_along(kappa, n, table)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(MatrixPoleFunction::initial(Arc::clone(orbit)));
    for w in &weights {
        let next = apply_closed_form(w, out.last().expect("non-empty"));
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrakPProduct {
    pub n: usize,
    pub z: f64,
    #[serde(serialize_with = "crate::numeric::serialize_mat2")]
    pub value: Mat2,
}

/// `𝔓^n_ϰ(z) = 𝔭_{ŝ^{n−1}ϰ}(T^∘(n−1)(z)) ⋯ 𝔭_ϰ(z)`.
///
/// An escaping orbit overflows to infinity, whose reciprocal `0` gives the
/// limit factor `D` exactly.
pub fn frak_p(kappa: &DyadicInt, n: usize, z: f64, table: &CoeffTable) -> Result<FrakPProduct> {
    require_precision(kappa, n)?;
    let weights = weights_along(kappa, n, table)?;
    let lambda = table.lambda().value();
    let mut value = Mat2::identity();
    let mut cur = z;
    for w in &weights {
        if cur == 0.0 {
            return Err(Error::SingularWeight { x: cur });
        }
        value = w.eval_recip(1.0 / cur) * value;
        cur = cur * cur - lambda;
    }
    Ok(FrakPProduct { n, z, value })
}

/// `f_0^1, …, f_0^n`.
#[derive(Debug, Clone, Serialize)]
pub struct FSequence {
    pub kappa: DyadicInt,
    pub values: Vec<f64>,
    /// `𝔏_{m,m−1}` for `m = 2, …, n`, the one-step factors.
    pub step_factors: Vec<f64>,
}

impl FSequence {
    /// `f_0^m` (1-based).
    pub fn get(&self, m: usize) -> f64 {
        self.values[m - 1]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn all_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    /// Largest violation of `f_0^m ≥ 𝔏_{m,m−1} f_0^{m−1}` (non-positive when it holds).
    pub fn one_step_violation(&self) -> f64 {
        self.step_factors
            .iter()
            .enumerate()
            .map(|(i, &l)| l * self.values[i] - self.values[i + 1])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The scalar recurrence for `f_0^m`, computed from products `𝔓` alone.
pub fn f0_recurrence(
    kappa: &DyadicInt,
    n: usize,
    table: &CoeffTable,
    orbit: &CriticalOrbit,
) -> Result<FSequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("f0 sequence needs n >= 1".into()));
    }
    require_precision(kappa, n)?;
    let weights = weights_along(kappa, n, table)?;
    // frak[i][j] = 𝔓^j_{ŝ^iϰ}(T(0)), with 𝔓^{j+1}_{ŝ^iϰ} = 𝔭_{ŝ^{i+j}ϰ}(T^∘(j+1)(0)) 𝔓^j_{ŝ^iϰ}.
    let mut frak: Vec<Vec<Mat2>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![Mat2::identity()];
        for j in 0..n - 1 - i {
            let p = weights[i + j].eval_recip(orbit.recip(j + 1));
            row.push(p * row[j]);
        }
        frak.push(row);
    }
    let mut values = Vec::with_capacity(n);
    let mut step_factors = Vec::with_capacity(n.saturating_sub(1));
    for m in 1..=n {
        let ups = weights[m - 1].upsilon();
        let top = frak[0][m - 1] * frak[0][m - 1].transpose();
        let mut f = orbit.w0(m - 1) * (ups.transpose() * top * ups)[0];
        for i in 1..m {
            let v = frak[i][m - 1 - i] * weights[i - 1].psi();
            let l = orbit.w0(m - 1 - i) * v.dot(&ups).powi(2);
            f += l * values[i - 1];
            if i == m - 1 {
                step_factors.push(l);
            }
        }
        values.push(f);
    }
    Ok(FSequence { kappa: kappa.clone(), values, step_factors })
}

/// `|f_0^{m+1} − ⟨h_m(0)Υ_{ŝ^mϰ}, Υ_{ŝ^mϰ}⟩|` for `m = 0, …, n`.
pub fn interpolation_residuals(
    kappa: &DyadicInt,
    n: usize,
    table: &CoeffTable,
    orbit: &Arc<CriticalOrbit>,
) -> Result<Vec<f64>> {
    let f = f0_recurrence(kappa, n + 1, table, orbit)?;
    let hs = iterate_h(kappa, n, table, orbit)?;
    let weights = weights_along(kappa, n + 1, table)?;
    Ok(hs
        .iter()
        .enumerate()
        .map(|(m, h)| {
            let ups = weights[m].upsilon();
            let v = (ups.transpose() * h.eval(0.0) * ups)[0];
            (f.get(m + 1) - v).abs()
        })
        .collect())
}

/// Largest `|A_m^m − 𝔓^m(T(0)) 𝔓^m(T(0))*|` over `m ≤ n`.
pub fn top_coefficient_residual(
    kappa: &DyadicInt,
    n: usize,
    table: &CoeffTable,
    orbit: &Arc<CriticalOrbit>,
) -> Result<f64> {
    let hs = iterate_h(kappa, n, table, orbit)?;
    let lambda = table.lambda().value();
    let mut worst: f64 = 0.0;
    for (m, h) in hs.iter().enumerate() {
        let p = frak_p(kappa, m, -lambda, table)?.value;
        let top = h.coeffs()[m];
        let scale = max_abs_entry(&top).max(1.0);
        worst = worst.max(max_abs_entry(&(top - p * p.transpose())) / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    /// `∫ tr(h_0 dΣ_ϰ)`.
    pub base_integral: f64,
    pub lower: f64,
    pub upper: f64,
    pub min_trace: f64,
    pub max_trace: f64,
    /// `max_m Σ_k tr A_k^m` against its bound `(λ+ξ) ∫ tr(h_0 dΣ_ϰ)`.
    pub max_coeff_mass: f64,
    pub coeff_mass_bound: f64,
    pub holds: bool,
}

/// Trace sandwich `(λ−ξ)/(λ+ξ) I₀ ≤ tr h_m(x) ≤ (λ+ξ)/(λ−ξ) I₀` and the
/// coefficient mass bound, over the given iterates and grid.
pub fn trace_sandwich(hs: &[MatrixPoleFunction], grid: &[f64], base_integral: f64) -> SandwichReport {
    let params = *hs[0].orbit().params();
    let (lam, xi) = (params.lambda, params.xi);
    let upper = (lam + xi) / (lam - xi) * base_integral;
    let lower = (lam - xi) / (lam + xi) * base_integral;
    let mut min_trace = f64::INFINITY;
    let mut max_trace = f64::NEG_INFINITY;
    for h in hs {
        for &x in grid {
            let t = h.eval(x).trace();
            min_trace = min_trace.min(t);
            max_trace = max_trace.max(t);
        }
    }
    let max_coeff_mass = hs.iter().map(|h| h.trace_mass()).fold(0.0, f64::max);
    let coeff_mass_bound = (lam + xi) * base_integral;
    SandwichReport {
        base_integral,
        lower,
        upper,
        min_trace,
        max_trace,
        max_coeff_mass,
        coeff_mass_bound,
        holds: min_trace >= lower && max_trace <= upper && max_coeff_mass <= coeff_mass_bound,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityCertificate {
    pub kappa: DyadicInt,
    /// Longest digit run in the precision window (`ϰ ∈ F_N` there).
    pub n_window: usize,
    pub n: usize,
    pub min_eig: f64,
    /// `C₂ = min_m f_0^m`.
    pub c2: f64,
    pub c3: f64,
    pub predicted_c1: f64,
    pub pass: bool,
}

/// `min_{m ≤ n, x ∈ grid} λ_min(h_m(x))` against `C₂C₃²/(4(λ+ξ)(λ+1))`.
pub fn positivity_certificate(
    kappa: &DyadicInt,
    n: usize,
    grid: &[f64],
    table: &CoeffTable,
    orbit: &Arc<CriticalOrbit>,
) -> Result<PositivityCertificate> {
    let hs = iterate_h(kappa, n, table, orbit)?;
    let f = f0_recurrence(kappa, n.max(1), table, orbit)?;
    let n_window = kappa.run_profile(kappa.precision())?.max_run();
    let params = orbit.params();
    let (lam, xi) = (params.lambda, params.xi);
    let min_eig = hs
        .iter()
        .flat_map(|h| grid.iter().map(move |&x| min_eigenvalue(&h.eval(x))))
        .fold(f64::INFINITY, f64::min);
    let c2 = f.min();
    let c3 = crate::coeffs::c3(lam, n_window);
    let predicted_c1 = c2 * c3 * c3 / (4.0 * (lam + xi) * (lam + 1.0));
    Ok(PositivityCertificate {
        kappa: kappa.clone(),
        n_window,
        n,
        min_eig,
        c2,
        c3,
        predicted_c1,
        pass: min_eig > 0.0 && min_eig >= predicted_c1,
    })
}

/// Observed `c₋ = min λ_min(h_m(x))`, `c₊ = max λ_max(h_m(x))` over the points.
pub fn observed_bounds(hs: &[MatrixPoleFunction], points: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for h in hs {
        for &x in points {
            let (a, b) = sym_eigenvalues(&h.eval(x));
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    (lo, hi)
}

/// Pull back a point mass: `ℳ*(δ_u W) = Σ_{T(y)=u} δ_y ½ 𝔭(y)* W 𝔭(y)`.
pub fn pull_back_atom(w: &RuelleWeight, u: f64, mass: &Mat2) -> Result<[(f64, Mat2); 2]> {
    let params = MapParams::new(w.lambda)?;
    let (y, ny) = params.preimages(u)?;
    let p = w.eval(y)?;
    let q = w.eval(ny)?;
    Ok([(y, p.transpose() * mass * p * 0.5), (ny, q.transpose() * mass * q * 0.5)])
}

/// Synthetic control for the mass-growth probe.
///
/// An atom `W` is implanted at `y_n` in the level-`n` measure and pulled back
/// along the orbit `y_0, …, y_n` (`T(y_m) = y_{m+1}`). Returns
/// `t'_m = tr(h_m(y_m) V_m)` with `V_m` the pulled-back mass at `y_m`, which
/// the growth argument forces to increase by at least `1 + c₋/c₊` per step.
pub fn synthetic_atom_growth(
    hs: &[MatrixPoleFunction],
    weights: &[RuelleWeight],
    orbit_points: &[f64],
    implanted: &Mat2,
) -> Result<Vec<f64>> {
    let n = hs.len() - 1;
    if orbit_points.len() < n + 1 || weights.len() < n {
        return Err(Error::InvalidArgument("orbit or weights shorter than the iteration".into()));
    }
    let mut masses = vec![Mat2::zeros(); n + 1];
    masses[n] = *implanted;
    for m in (0..n).rev() {
        // the preimage of y_{m+1} matching y_m
        let [(y, wy), (ny, wny)] = pull_back_atom(&weights[m], orbit_points[m + 1], &masses[m + 1])?;
        let target = orbit_points[m];
        masses[m] = if (y - target).abs() <= (ny - target).abs() { wy } else { wny };
    }
    Ok((0..=n).map(|m| (hs[m].eval(orbit_points[m]) * masses[m]).trace()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::Lambda;

    fn setup() -> (CoeffTable, Arc<CriticalOrbit>) {
        let table = CoeffTable::build_float(&Lambda::from_f64(4.0), 16, false).unwrap();
        let orbit = Arc::new(CriticalOrbit::new(MapParams::new(4.0).unwrap()));
        (table, orbit)
    }

    #[test]
    fn weight_examples() {
        let (table, _) = setup();
        let one = DyadicInt::from_integer(1, 32).unwrap();
        let w = weight(&one, &table).unwrap();
        assert_eq!(w.parity, Parity::Odd);
        assert!((w.a_minus - 2.0).abs() < 1e-15 && (w.a_plus - 1.0).abs() < 1e-15);
        assert_eq!(w.upsilon(), Vector2::new(0.0, 1.0));
        let zero = DyadicInt::from_integer(0, 32).unwrap();
        let w0 = weight(&zero, &table).unwrap();
        assert_eq!(w0.parity, Parity::Even);
        assert_eq!(w0.a_plus, 0.0);
        assert!(w0.a_minus > 1.7);
        assert!(w.phi().determinant().abs() < 1e-15);
    }

    #[test]
    fn first_step_matches_hand_formula() {
        let (table, orbit) = setup();
        let kappa = DyadicInt::from_integer(6, 32).unwrap();
        let w = weight(&kappa, &table).unwrap();
        let h1 = apply_closed_form(&w, &MatrixPoleFunction::initial(Arc::clone(&orbit)));
        assert_eq!(h1.degree(), 1);
        let psi = w.psi();
        let expected0 = psi * psi.transpose() * 0.25;
        assert!(max_abs_entry(&(h1.coeffs()[0] - expected0)) < 1e-15);
        let p = w.eval(-4.0).unwrap();
        assert!(max_abs_entry(&(h1.coeffs()[1] - p * p.transpose())) < 1e-15);
    }

    #[test]
    fn closed_form_matches_bruteforce() {
        let (table, orbit) = setup();
        let kappa = DyadicInt::from_integer(-5, 40).unwrap();
        let hs = iterate_h(&kappa, 8, &table, &orbit).unwrap();
        let weights = weights_along(&kappa, 8, &table).unwrap();
        for m in 0..8 {
            for &x in &[-2.5, -1.0, 0.0, 0.7, 2.56] {
                let direct = apply_bruteforce(&weights[m], |y| hs[m].eval(y), x).unwrap();
                let closed = hs[m + 1].eval(x);
                assert!(max_abs_entry(&(direct - closed)) < 1e-12, "m={m} x={x}");
            }
        }
    }

    #[test]
    fn f0_starts_at_inverse_lambda_and_interpolates() {
        let (table, orbit) = setup();
        let kappa = DyadicInt::from_integer(0b1011_0110, 40).unwrap();
        let f = f0_recurrence(&kappa, 10, &table, &orbit).unwrap();
        assert_eq!(f.get(1), 0.25);
        for r in interpolation_residuals(&kappa, 9, &table, &orbit).unwrap() {
            assert!(r < 1e-12);
        }
        assert!(f.one_step_violation() <= 1e-15);
    }

    #[test]
    fn precision_gate() {
        let (table, orbit) = setup();
        let kappa = DyadicInt::from_integer(3, 8).unwrap();
        assert!(matches!(iterate_h(&kappa, 7, &table, &orbit), Err(Error::PrecisionExhausted { .. })));
        assert!(iterate_h(&kappa, 6, &table, &orbit).is_ok());
    }

    #[test]
    fn bruteforce_rejects_critical_preimage() {
        let w = RuelleWeight::new(Parity::Odd, 2.0, 1.0, 4.0);
        assert!(matches!(
            apply_bruteforce(&w, |_| Mat2::identity(), -4.0),
            Err(Error::SingularWeight { .. })
        ));
    }
}
