//! Criterion benchmarks for dbar-core; see `benches/`. Fixtures shared by
//! the bench targets live here.

use dbar_core::orthopoly::{compute_moments, compute_orthopolys, moment_rule};
use dbar_core::{Complex64, Domain, EFPotential, EquilibriumDomain, OrthoPolySet, PolynomialCurve, Weight};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Ellipse potential `t₀ = 1, t₂ = 0.2`.
pub fn ellipse_potential() -> EFPotential {
    EFPotential::new(1.0, vec![c(0.0, 0.0), c(0.2, 0.0)]).unwrap()
}

pub fn ellipse_weight(big_n: usize) -> Weight {
    Weight::new(ellipse_potential(), big_n, Domain::disk(c(0.0, 0.0), 3.0).unwrap(), 1.0).unwrap()
}

pub fn ellipse_domain() -> EquilibriumDomain {
    let r = (1.0f64 / 0.84).sqrt();
    let curve = PolynomialCurve::new(r, vec![c(0.0, 0.0), c(0.4 * r, 0.0)], 512).unwrap();
    EquilibriumDomain::from_curve(curve, ellipse_potential(), 1.0).unwrap()
}

pub fn polys(w: &Weight, n_max: usize) -> OrthoPolySet {
    let rule = moment_rule(w, n_max, 1).unwrap();
    let m = compute_moments(w, n_max, &rule).unwrap();
    compute_orthopolys(&m, w.big_n).unwrap()
}
