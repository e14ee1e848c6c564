//! Worked examples with independently known values.

use std::sync::Arc;

use lpjacobi::coeffs::CoeffTable;
use lpjacobi::dynamics::{self, CriticalOrbit, MapParams, PreimageTree};
use lpjacobi::hull::Hull;
use lpjacobi::{ruelle, DyadicInt, Lambda};
use num_rational::BigRational;

fn lam(s: &str) -> Lambda {
    s.parse().unwrap()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn first_rows_at_lambda_four() {
    let t = CoeffTable::build(&lam("4"), 4).unwrap();
    let rows = t.exact_rows().unwrap();
    let expect = [q(0, 1), q(4, 1), q(1, 1), q(3, 1), q(1, 3), q(11, 3), q(9, 11), q(35, 11)];
    assert_eq!(&rows[..8], &expect);
}

#[test]
fn integer_index_lookup_is_exact() {
    let t = CoeffTable::build(&lam("4"), 8).unwrap();
    let c = t.a_at(&DyadicInt::from_integer(3, 32).unwrap());
    assert_eq!(c.value, 3f64.sqrt());
    assert_eq!(c.error_bound, 0.0);
    assert_eq!(c.representative, 3);
}

#[test]
fn preimage_tree_round_trip() {
    let p = MapParams::new(4.0).unwrap();
    let tree = PreimageTree::new(&p, 1.0, 10).unwrap();
    assert_eq!(tree.leaves().len(), 1 << 10);
    // Forward iteration amplifies the leaf rounding by up to |T'|^10 = (2ξ)^10,
    // about 2e7 · 1.1e-16 ≈ 4e-9 at λ = 4; the observed 1.8e-9 sits within that.
    let r = tree.forward_residual(&p);
    let amplification = (2.0 * p.xi).powi(10) * f64::EPSILON;
    assert!(r < amplification, "{r} vs {amplification}");
    assert!(r < 1e-8);
}

#[test]
fn balanced_quadrature_is_normalized_and_even() {
    let p = MapParams::new(4.0).unwrap();
    for d in [4, 8, 12] {
        let quad = dynamics::balanced_quadrature(&p, d).unwrap();
        assert!((quad.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!(quad.integrate(|x| x).abs() < 1e-12);
        assert!(quad.integrate(|x| x.powi(3)).abs() < 1e-10);
    }
}

#[test]
fn w_at_critical_point() {
    let orbit = CriticalOrbit::new(MapParams::new(4.0).unwrap());
    // w_0^0 = 1/λ and w_0^1 = (1/λ)/(1 − 1/λ) = 1/3 at λ = 4
    assert_eq!(orbit.w0(0), 0.25);
    assert!((orbit.w(0.0, 1) - 1.0 / 3.0).abs() < 1e-15);
    for n in 0..12 {
        let direct = dynamics::w_preimage_sum(orbit.params(), 0.3, n).unwrap();
        assert!((orbit.w(0.3, n) - direct).abs() < 1e-13);
    }
}

#[test]
fn window_around_zero() {
    let hull = Hull::new(&lam("4")).unwrap();
    let zero = DyadicInt::from_integer(0, 32).unwrap();
    let j = hull.truncation(&zero, 3).unwrap();
    assert_eq!(j.size(), 6);
    // bond into site m carries a_m
    assert_eq!(j.coupling(0), 0.0);
    assert_eq!(j.coupling(1), 2.0);
    assert_eq!(j.coupling(2), 1.0);
    assert!(j.diag.iter().all(|&d| d == 0.0));
    let a_minus1 = hull.table().a_shifted(&zero, -1);
    assert_eq!(j.coupling(-1), a_minus1);
    // both halves decouple at a_0 = 0
    assert!(j.offdiag.contains(&0.0));
}

#[test]
fn first_ruelle_step_has_closed_form() {
    let hull = Hull::new(&lam("4")).unwrap();
    let orbit = Arc::new(CriticalOrbit::new(*hull.params()));
    let one = DyadicInt::from_integer(1, 32).unwrap();
    let f = ruelle::f0_recurrence(&one, 3, hull.table(), &orbit).unwrap();
    assert_eq!(f.get(1), 0.25);
    let hs = ruelle::iterate_h(&one, 3, hull.table(), &orbit).unwrap();
    assert_eq!(hs.iter().map(|h| h.coeffs().len()).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    for (n, h) in hs.iter().enumerate().skip(1) {
        assert!(h.min_coeff_eigenvalue() >= -1e-12, "h_{n}");
    }
}
