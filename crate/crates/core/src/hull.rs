//! Finite windows of `J_ϰ`, their spectral matrix measures and resolvents.
//!
//! A window of half-width `N` keeps the sites `−N, …, N−1` with open
//! boundary. It is symmetric about the bond `(−1, 0)`, whose coupling is
//! `a_ϰ`; the bond between sites `m−1` and `m` carries `a_{ϰ+m}`. The
//! spectral matrix measure `Σ_ϰ` is taken at `(e_{−1}, e_0)`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::coeffs::{CoeffTable, Lambda, DEFAULT_FLOAT_DEPTH};
use crate::dyadic::DyadicInt;
use crate::dynamics::MapParams;
use crate::error::{Error, Result};
use crate::numeric::{median, min_eigenvalue, CompensatedSum, Mat2};
use crate::ruelle::{self, RuelleWeight};
use crate::tridiag;

/// Default lower limit on `|Im z|` for resolvents inside `[−ξ, ξ]`.
pub const DEFAULT_ETA_MIN: f64 = 1e-8;

/// Coefficient source for windows of `J_ϰ`.
#[derive(Debug, Clone)]
pub struct Hull {
    table: Arc<CoeffTable>,
    params: MapParams,
}

impl Hull {
    /// Hull backed by the shared float table of default depth.
    pub fn new(lambda: &Lambda) -> Result<Self> {
        Self::with_table(CoeffTable::shared_float(lambda, DEFAULT_FLOAT_DEPTH)?)
    }

    pub fn with_table(table: Arc<CoeffTable>) -> Result<Self> {
        let params = MapParams::new(table.lambda().value())?;
        Ok(Self { table, params })
    }

    pub fn table(&self) -> &CoeffTable {
        &self.table
    }

    pub fn table_arc(&self) -> &Arc<CoeffTable> {
        &self.table
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    fn check_window(&self, kappa: &DyadicInt, half_width: usize) -> Result<()> {
        if half_width == 0 {
            return Err(Error::InvalidArgument("window half-width must be positive".into()));
        }
        let m = kappa.precision().min(self.table.depth());
        // the 2N bonds must not wrap around modulo 2^m
        if m < 64 && 2 * half_width as u128 > 1u128 << m {
            return Err(Error::PrecisionExhausted {
                needed: usize::BITS as usize - (2 * half_width).leading_zeros() as usize,
                available: m,
            });
        }
        Ok(())
    }

    /// Window of `J_ϰ` on the sites `−N, …, N−1`.
    pub fn truncation(&self, kappa: &DyadicInt, half_width: usize) -> Result<TruncatedJacobi> {
        self.check_window(kappa, half_width)?;
        let n = half_width as i64;
        let offdiag = (-n + 1..n).map(|m| self.table.a_shifted(kappa, m)).collect();
        Ok(TruncatedJacobi { kappa: kappa.clone(), half_width, offdiag, diag: vec![0.0; 2 * half_width] })
    }

    /// Window of `J♯_ϰ = τJ_ϰτ`, built directly from `a♯_m = a_{ϰ−m}`.
    pub fn reflected_truncation(&self, kappa: &DyadicInt, half_width: usize) -> Result<TruncatedJacobi> {
        self.check_window(kappa, half_width)?;
        let n = half_width as i64;
        let offdiag = (-n + 1..n).map(|m| self.table.a_shifted(kappa, -m)).collect();
        Ok(TruncatedJacobi { kappa: kappa.clone(), half_width, offdiag, diag: vec![0.0; 2 * half_width] })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncatedJacobi {
    pub kappa: DyadicInt,
    pub half_width: usize,
    /// `offdiag[i]` couples sites `i − N` and `i − N + 1`.
    pub offdiag: Vec<f64>,
    /// Identically zero for `J_ϰ`; perturbed only by [`TruncatedJacobi::with_potential`].
    pub diag: Vec<f64>,
}

impl TruncatedJacobi {
    pub fn size(&self) -> usize {
        2 * self.half_width
    }

    /// Matrix index of site `site ∈ [−N, N)`.
    pub fn index(&self, site: i64) -> usize {
        let idx = site + self.half_width as i64;
        assert!(idx >= 0 && (idx as usize) < self.size(), "site {site} outside window");
        idx as usize
    }

    /// Coupling `a_{ϰ+m}` of the bond between sites `m−1` and `m`.
    pub fn coupling(&self, m: i64) -> f64 {
        self.offdiag[self.index(m) - 1]
    }

    /// Copy with `β` added to the diagonal at `site`.
    pub fn with_potential(&self, site: i64, beta: f64) -> Self {
        let mut out = self.clone();
        let i = self.index(site);
        out.diag[i] += beta;
        out
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        tridiag::eigenvalues(&self.diag, &self.offdiag)
    }

    /// Median gap between consecutive eigenvalues.
    pub fn median_level_spacing(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        let gaps: Vec<f64> = ev.windows(2).map(|w| w[1] - w[0]).collect();
        median(&gaps).ok_or_else(|| Error::InvalidArgument("window too small for level spacing".into()))
    }

    pub fn spectral_measure(&self) -> Result<SpectralMeasureApprox> {
        let rows = [self.index(-1), self.index(0)];
        let pe = tridiag::eigen_rows(&self.diag, &self.offdiag, &rows)?;
        let atoms = pe
            .values
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                let (u, v) = (pe.rows[0][j], pe.rows[1][j]);
                MatrixAtom { x, w: Mat2::new(u * u, u * v, u * v, v * v) }
            })
            .collect();
        Ok(SpectralMeasureApprox { atoms })
    }

    /// `⟨e_i, (J − z)⁻¹ e_j⟩` for every site `i`, as a column indexed by matrix index.
    pub fn resolvent_column(&self, z: Complex64, site: i64) -> Vec<Complex64> {
        tridiag::resolvent_column(&self.diag, &self.offdiag, z, self.index(site))
    }

    /// `ℰ*(J − z)⁻¹ℰ` at the sites `(−1, 0)`.
    pub fn resolvent(&self, z: Complex64, xi: f64, eta_min: f64) -> Result<ResolventSample> {
        if z.im.abs() < eta_min && z.re.abs() <= xi {
            return Err(Error::NearSpectrum { z: format!("{z}"), eta_min });
        }
        let (im1, i0) = (self.index(-1), self.index(0));
        let c1 = self.resolvent_column(z, -1);
        let c0 = self.resolvent_column(z, 0);
        Ok(ResolventSample { z, m: [[c1[im1], c0[im1]], [c1[i0], c0[i0]]] })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixAtom {
    pub x: f64,
    #[serde(serialize_with = "crate::numeric::serialize_mat2")]
    pub w: Mat2,
}

/// Finite atomic approximation `Σ_j δ_{x_j} W_j` of `Σ_ϰ`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralMeasureApprox {
    pub atoms: Vec<MatrixAtom>,
}

impl SpectralMeasureApprox {
    pub fn from_atoms(atoms: Vec<MatrixAtom>) -> Self {
        Self { atoms }
    }

    pub fn total(&self) -> Mat2 {
        self.matrix_integral(|_| 1.0)
    }

    /// `∫ f(x) Σ(dx)`, entrywise compensated.
    pub fn matrix_integral<F: Fn(f64) -> f64>(&self, f: F) -> Mat2 {
        let mut acc = [CompensatedSum::default(), CompensatedSum::default(), CompensatedSum::default()];
        for a in &self.atoms {
            let fx = f(a.x);
            acc[0].add(fx * a.w[(0, 0)]);
            acc[1].add(fx * a.w[(0, 1)]);
            acc[2].add(fx * a.w[(1, 1)]);
        }
        let (p, q, r) = (acc[0].value(), acc[1].value(), acc[2].value());
        Mat2::new(p, q, q, r)
    }

    pub fn moment(&self, m: u32) -> Mat2 {
        self.matrix_integral(|x| x.powi(m as i32))
    }

    /// `∫ tr(g(x) Σ(dx))`.
    pub fn pair<G: Fn(f64) -> Mat2>(&self, g: G) -> f64 {
        let mut acc = CompensatedSum::default();
        for a in &self.atoms {
            acc.add((g(a.x) * a.w).trace());
        }
        acc.value()
    }

    /// `∫ f tr Σ`.
    pub fn trace_integral<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut acc = CompensatedSum::default();
        for a in &self.atoms {
            acc.add(f(a.x) * a.w.trace());
        }
        acc.value()
    }

    /// `tr Σ([x − δ, x + δ])`.
    pub fn trace_mass_near(&self, x: f64, delta: f64) -> f64 {
        self.trace_integral(|y| if (y - x).abs() <= delta { 1.0 } else { 0.0 })
    }

    /// `Σ([x − δ, x + δ])`.
    pub fn mass_near(&self, x: f64, delta: f64) -> Mat2 {
        self.matrix_integral(|y| if (y - x).abs() <= delta { 1.0 } else { 0.0 })
    }

    /// `∫ Σ(dx)/(x − z)`.
    pub fn stieltjes(&self, z: Complex64) -> [[Complex64; 2]; 2] {
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for a in &self.atoms {
            let r = 1.0 / (Complex64::new(a.x, 0.0) - z);
            for (i, row) in m.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v += r * a.w[(i, j)];
                }
            }
        }
        m
    }

    /// `max_{k ≤ degree} |∫ x^k tr Σ − ∫ (−x)^k tr Σ|`.
    pub fn evenness_residual(&self, degree: u32) -> f64 {
        (1..=degree)
            .step_by(2)
            .map(|k| 2.0 * self.trace_integral(|x| x.powi(k as i32)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_support(&self) -> f64 {
        self.atoms.iter().map(|a| a.x.abs()).fold(0.0, f64::max)
    }

    pub fn min_atom_eigenvalue(&self) -> f64 {
        self.atoms.iter().map(|a| min_eigenvalue(&a.w)).fold(f64::INFINITY, f64::min)
    }

    /// Scalar measure `Σ_{pp}` (`p = 0` for `e_{−1}`, `1` for `e_0`).
    pub fn component(&self, p: usize) -> Vec<(f64, f64)> {
        self.atoms.iter().map(|a| (a.x, a.w[(p, p)])).collect()
    }

    /// Trace masses binned on `bins` equal cells of `[lo, hi]`.
    pub fn trace_histogram(&self, lo: f64, hi: f64, bins: usize) -> Vec<f64> {
        let mut out = vec![0.0; bins];
        let width = (hi - lo) / bins as f64;
        for a in &self.atoms {
            let k = (((a.x - lo) / width).floor().max(0.0) as usize).min(bins - 1);
            out[k] += a.w.trace();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventSample {
    pub z: Complex64,
    /// `m[p][q] = ⟨e_p, (J − z)⁻¹ e_q⟩` with `p, q ∈ {−1, 0}`.
    pub m: [[Complex64; 2]; 2],
}

impl ResolventSample {
    /// Smallest eigenvalue of `(m − m*)/(2i)`; non-negative when `Im z > 0`.
    pub fn herglotz_min_eigenvalue(&self) -> f64 {
        let im = |p: usize, q: usize| (self.m[p][q] - self.m[q][p].conj()) / Complex64::new(0.0, 2.0);
        // the imaginary part of a symmetric resolvent is real symmetric
        let a = Mat2::new(im(0, 0).re, im(0, 1).re, im(1, 0).re, im(1, 1).re);
        min_eigenvalue(&a)
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }
}

/// Probe sites `{0, ±1, ±2, ±N/8, ±N/4}` inside the middle of a window.
pub fn probe_sites(half_width: usize) -> Vec<i64> {
    let q = (half_width / 4) as i64;
    let e = (half_width / 8) as i64;
    let mut s = vec![-q, -e, -2, -1, 0, 1, 2, e, q];
    s.retain(|v| v.abs() <= q);
    s.sort_unstable();
    s.dedup();
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResidual {
    pub identity: &'static str,
    pub kappa: DyadicInt,
    #[serde(rename = "N")]
    pub n: usize,
    pub z: Option<[f64; 2]>,
    pub degree: Option<u32>,
    pub residual: f64,
}

/// `max |⟨e_{2i},(J_{2ϰ}−z)⁻¹e_{2j}⟩ − z⟨e_i,(J_ϰ−T(z))⁻¹e_j⟩|` over the probe set
/// (`½T'(z) = z`). `J_ϰ` uses half-width `N`, `J_{2ϰ}` half-width `2N`.
pub fn check_v_identity(hull: &Hull, kappa: &DyadicInt, z: Complex64, half_width: usize) -> Result<IdentityResidual> {
    let params = hull.params();
    if z.im.abs() < DEFAULT_ETA_MIN && z.re.abs() <= params.xi {
        return Err(Error::NearSpectrum { z: format!("{z}"), eta_min: DEFAULT_ETA_MIN });
    }
    let small = hull.truncation(kappa, half_width)?;
    let big = hull.truncation(&kappa.double(), 2 * half_width)?;
    let tz = z * z - params.lambda;
    let probes = probe_sites(half_width);
    let mut worst: f64 = 0.0;
    for &j in &probes {
        let col_big = big.resolvent_column(z, 2 * j);
        let col_small = small.resolvent_column(tz, j);
        for &i in &probes {
            let lhs = col_big[big.index(2 * i)];
            let rhs = z * col_small[small.index(i)];
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(IdentityResidual {
        identity: "V-conjugation",
        kappa: kappa.clone(),
        n: half_width,
        z: Some([z.re, z.im]),
        degree: None,
        residual: worst,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairingResidual {
    pub m: u32,
    pub p: usize,
    pub q: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

fn unit(p: usize, q: usize) -> Mat2 {
    let mut e = Mat2::zeros();
    e[(p, q)] = 1.0;
    e
}

/// `∫ tr(g Σ_ϰ)` against `∫ tr((ℳ_ϰ g) Σ_{ŝϰ})` for `g = x^m E_{pq}`, `m ≤ degree`.
pub fn check_renormalization(
    hull: &Hull,
    kappa: &DyadicInt,
    degree: u32,
    half_width: usize,
) -> Result<Vec<PairingResidual>> {
    let sigma = hull.truncation(kappa, half_width)?.spectral_measure()?;
    let sigma_next = hull.truncation(&kappa.modified_shift()?, half_width)?.spectral_measure()?;
    let w = ruelle::weight(kappa, hull.table())?;
    renormalization_pairing(&sigma, &sigma_next, &w, degree)
}

/// The pairing residuals for given measures and weight.
pub fn renormalization_pairing(
    sigma: &SpectralMeasureApprox,
    sigma_next: &SpectralMeasureApprox,
    w: &RuelleWeight,
    degree: u32,
) -> Result<Vec<PairingResidual>> {
    let mut out = Vec::new();
    for m in 0..=degree {
        for p in 0..2 {
            for q in 0..2 {
                let g = |x: f64| unit(p, q) * x.powi(m as i32);
                let lhs = sigma.pair(g);
                let mut acc = CompensatedSum::default();
                for a in &sigma_next.atoms {
                    acc.add((ruelle::apply_bruteforce(w, g, a.x)? * a.w).trace());
                }
                let rhs = acc.value();
                out.push(PairingResidual { m, p, q, lhs, rhs, residual: (lhs - rhs).abs() });
            }
        }
    }
    Ok(out)
}

/// Moments of `J♯_ϰ` against `σ₁ Σ_ϰ σ₁`, degrees `0..=degree`.
pub fn reflection_check(hull: &Hull, kappa: &DyadicInt, half_width: usize, degree: u32) -> Result<f64> {
    let sigma = hull.truncation(kappa, half_width)?.spectral_measure()?;
    let sharp = hull.reflected_truncation(kappa, half_width)?.spectral_measure()?;
    let s1 = Mat2::new(0.0, 1.0, 1.0, 0.0);
    let mut worst: f64 = 0.0;
    for m in 0..=degree {
        let a = sharp.moment(m);
        let b = s1 * sigma.moment(m) * s1;
        worst = worst.max((a - b).abs().max());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct AtomProbe {
    pub x: f64,
    pub etas: Vec<f64>,
    /// `η · Im tr m(x + iη)`.
    pub values: Vec<f64>,
    pub eta_min: f64,
    pub reliable: Vec<bool>,
    pub decreasing: bool,
}

/// `η Im tr m(x + iη)` for each `η`; values with `η < eta_min` are flagged unreliable.
pub fn atom_probe(j: &TruncatedJacobi, x: f64, etas: &[f64], eta_min: f64) -> Result<AtomProbe> {
    let mut values = Vec::with_capacity(etas.len());
    for &eta in etas {
        if eta <= 0.0 {
            return Err(Error::InvalidArgument(format!("probe width {eta} must be positive")));
        }
        let z = Complex64::new(x, eta);
        let (im1, i0) = (j.index(-1), j.index(0));
        let tr = j.resolvent_column(z, -1)[im1] + j.resolvent_column(z, 0)[i0];
        values.push(eta * tr.im);
    }
    let reliable = etas.iter().map(|&e| e >= eta_min).collect();
    let decreasing = strictly_decreasing_in_eta(etas, &values);
    Ok(AtomProbe { x, etas: etas.to_vec(), values, eta_min, reliable, decreasing })
}

/// True when the values shrink as `η` shrinks.
fn strictly_decreasing_in_eta(etas: &[f64], values: &[f64]) -> bool {
    let mut pairs: Vec<(f64, f64)> = etas.iter().copied().zip(values.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.windows(2).all(|w| w[1].1 < w[0].1)
}

/// `η_min = 10 ×` median level spacing.
pub fn resolvable_eta(j: &TruncatedJacobi) -> Result<f64> {
    Ok(10.0 * j.median_level_spacing()?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ImplantedAtomTest {
    pub beta: f64,
    pub atom_location: f64,
    /// `tr W` of the implanted eigenvalue from the eigendecomposition.
    pub atom_mass: f64,
    pub probe: AtomProbe,
    /// Largest relative deviation of the probe values from the mass.
    pub max_relative_deviation: f64,
    pub plateau: bool,
}

/// Probe self-test on `J + β e_0 e_0*`, which has an eigenvalue split off the
/// spectrum; the probe must plateau at its trace mass within `rel_tol`.
pub fn implanted_atom_self_test(j: &TruncatedJacobi, beta: f64, etas: &[f64], rel_tol: f64) -> Result<ImplantedAtomTest> {
    let perturbed = j.with_potential(0, beta);
    let sigma = perturbed.spectral_measure()?;
    let top = sigma
        .atoms
        .iter()
        .max_by(|a, b| a.x.total_cmp(&b.x))
        .copied()
        .ok_or_else(|| Error::InvalidArgument("empty window".into()))?;
    let atom_mass = top.w.trace();
    let probe = atom_probe(&perturbed, top.x, etas, 0.0)?;
    let max_relative_deviation =
        probe.values.iter().map(|v| (v - atom_mass).abs() / atom_mass).fold(0.0, f64::max);
    Ok(ImplantedAtomTest {
        beta,
        atom_location: top.x,
        atom_mass,
        probe,
        max_relative_deviation,
        plateau: max_relative_deviation <= rel_tol,
    })
}

/// Scalar spectral measure `ν` of the `J_−` block at `e_{−1}` (from `ϰ = 0`).
pub fn nu_measure(hull: &Hull, half_width: usize, precision: usize) -> Result<Vec<(f64, f64)>> {
    let zero = DyadicInt::from_integer(0, precision)?;
    Ok(hull.truncation(&zero, half_width)?.spectral_measure()?.component(0))
}

/// `max_{x, n ≤ n_max} |p_{2n+1}(x) − (x/a_{−1}) p_n(T(x))|` for the orthonormal
/// polynomials of `J_−`, whose recurrence coefficients are `b_k = a_{−k}`.
pub fn jminus_renorm_check(table: &CoeffTable, n_max: usize, grid: &[f64]) -> Result<f64> {
    let zero = DyadicInt::from_integer(0, table.depth().max(1))?;
    let len = 2 * n_max + 2;
    let b: Vec<f64> = (0..=len as i64).map(|k| if k == 0 { 0.0 } else { table.a_shifted(&zero, -k) }).collect();
    let lambda = table.lambda().value();
    let polys = |x: f64| {
        let mut p = vec![1.0, x / b[1]];
        for k in 1..len {
            let next = (x * p[k] - b[k] * p[k - 1]) / b[k + 1];
            p.push(next);
        }
        p
    };
    let mut worst: f64 = 0.0;
    for &x in grid {
        let px = polys(x);
        let pt = polys(x * x - lambda);
        for n in 0..=n_max {
            worst = worst.max((px[2 * n + 1] - x / b[1] * pt[n]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hull() -> Hull {
        let table = CoeffTable::shared_float(&Lambda::from_f64(4.0), 16).unwrap();
        Hull::with_table(table).unwrap()
    }

    #[test]
    fn window_layout_for_kappa_zero() {
        let h = hull();
        let j = h.truncation(&DyadicInt::from_integer(0, 32).unwrap(), 3).unwrap();
        assert_eq!(j.size(), 6);
        assert_eq!(j.coupling(0), 0.0);
        assert!((j.coupling(1) - 2.0).abs() < 1e-15);
        assert!((j.coupling(2) - 1.0).abs() < 1e-15);
        assert!(j.coupling(-1) > 1.7);
        assert!(j.diag.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn measure_normalization_and_first_moment() {
        let h = hull();
        let kappa = DyadicInt::from_integer(5, 32).unwrap();
        let j = h.truncation(&kappa, 64).unwrap();
        let s = j.spectral_measure().unwrap();
        assert!((s.total() - Mat2::identity()).abs().max() < 1e-12);
        let m1 = s.moment(1);
        assert!(m1[(0, 0)].abs() < 1e-12 && m1[(1, 1)].abs() < 1e-12);
        assert!((m1[(0, 1)] - h.table().a(5)).abs() < 1e-12);
        assert!(s.evenness_residual(8) < 1e-10);
    }

    #[test]
    fn resolvent_agrees_with_atoms() {
        let h = hull();
        let j = h.truncation(&DyadicInt::from_integer(1, 32).unwrap(), 64).unwrap();
        let s = j.spectral_measure().unwrap();
        let z = Complex64::new(0.3, 0.1);
        let r = j.resolvent(z, h.params().xi, DEFAULT_ETA_MIN).unwrap();
        let st = s.stieltjes(z);
        for p in 0..2 {
            for q in 0..2 {
                assert!((r.m[p][q] - st[p][q]).norm() < 1e-10);
            }
        }
        assert!(r.herglotz_min_eigenvalue() >= -1e-14);
        assert!(matches!(
            j.resolvent(Complex64::new(0.3, 0.0), h.params().xi, DEFAULT_ETA_MIN),
            Err(Error::NearSpectrum { .. })
        ));
    }

    #[test]
    fn far_field_resolvent() {
        let h = hull();
        let j = h.truncation(&DyadicInt::from_integer(3, 32).unwrap(), 32).unwrap();
        let r = j.resolvent(Complex64::new(10.0, 0.0), h.params().xi, DEFAULT_ETA_MIN).unwrap();
        assert!((r.m[0][0].re + 0.1).abs() < 0.01);
        assert!((r.m[1][1].re + 0.1).abs() < 0.01);
    }

    #[test]
    fn window_too_wide_for_precision() {
        let h = hull();
        let kappa = DyadicInt::from_integer(1, 4).unwrap();
        assert!(h.truncation(&kappa, 8).is_ok());
        assert!(matches!(h.truncation(&kappa, 9), Err(Error::PrecisionExhausted { .. })));
    }

    #[test]
    fn jminus_first_polynomial_exact() {
        let t = CoeffTable::shared_float(&Lambda::from_f64(4.0), 16).unwrap();
        assert_eq!(jminus_renorm_check(&t, 0, &[-1.0, 0.5, 2.0]).unwrap(), 0.0);
    }
}
