//! The Elbau-Felder potential `V(z) = (1/t₀)(|z|² − 2 Re Σ t_k z^k)` and the
//! cut-off weight `e^{−N V(z)} χ_D(z)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Shape};

/// Maximum degree of the polynomial part of `V`.
pub const MAX_POTENTIAL_DEGREE: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EFPotential {
    pub t0: f64,
    /// `t₁ … t_{n+1}`; `t[0]` is `t₁`.
    #[serde(with = "crate::cpair::vec")]
    pub t: Vec<Complex64>,
}

impl EFPotential {
    /// Checks `t₀ > 0` and the degree bound. The admissibility conditions
    /// `t₁ = 0`, `|t₂| < 1/2` are reported by [`validate`] instead.
    pub fn new(t0: f64, t: Vec<Complex64>) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::invalid(format!("t0 must be > 0, got {t0}")));
        }
        if t.len() > MAX_POTENTIAL_DEGREE {
            return Err(Error::invalid(format!(
                "potential degree {} exceeds {MAX_POTENTIAL_DEGREE}",
                t.len()
            )));
        }
        Ok(EFPotential { t0, t })
    }

    /// Rotation-invariant potential `|z|²/t₀`.
    pub fn ginibre(t0: f64) -> Self {
        EFPotential { t0, t: vec![Complex64::new(0.0, 0.0)] }
    }

    pub fn t_k(&self, k: usize) -> Complex64 {
        if k == 0 || k > self.t.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.t[k - 1]
        }
    }

    /// True when every `t_k` is real (V is then symmetric under z ↦ z̄).
    pub fn has_real_coefficients(&self) -> bool {
        self.t.iter().all(|c| c.im == 0.0)
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        eval_v(self, z)
    }
}

pub fn eval_v(p: &EFPotential, z: Complex64) -> f64 {
    // Horner for Σ_{k≥1} t_k z^k
    let mut s = Complex64::new(0.0, 0.0);
    for c in p.t.iter().rev() {
        s = (s + c) * z;
    }
    (z.norm_sqr() - 2.0 * s.re) / p.t0
}

/// Replaces `t₀` by `γ t₀`, which realizes `V/γ` exactly.
pub fn scale_gamma(p: &EFPotential, gamma: f64) -> Result<EFPotential> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be > 0, got {gamma}")));
    }
    Ok(EFPotential { t0: p.t0 * gamma, t: p.t.clone() })
}

/// The weight `e^{−N V} χ_D` together with the ratio `γ = n/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightJson", into = "WeightJson")]
pub struct Weight {
    pub potential: EFPotential,
    pub big_n: usize,
    pub cutoff: Domain,
    pub gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct WeightJson {
    t0: f64,
    #[serde(with = "crate::cpair::vec")]
    t: Vec<Complex64>,
    #[serde(rename = "N")]
    n: usize,
    #[serde(default = "one")]
    gamma: f64,
    cutoff: Domain,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<WeightJson> for Weight {
    type Error = Error;
    fn try_from(j: WeightJson) -> Result<Self> {
        Weight::new(EFPotential::new(j.t0, j.t)?, j.n, j.cutoff, j.gamma)
    }
}

impl From<Weight> for WeightJson {
    fn from(w: Weight) -> Self {
        WeightJson { t0: w.potential.t0, t: w.potential.t, n: w.big_n, gamma: w.gamma, cutoff: w.cutoff }
    }
}

impl Weight {
    pub fn new(potential: EFPotential, big_n: usize, cutoff: Domain, gamma: f64) -> Result<Self> {
        if big_n == 0 {
            return Err(Error::invalid("N must be >= 1"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be > 0, got {gamma}")));
        }
        if !cutoff.contains(Complex64::new(0.0, 0.0)).unwrap_or(false) {
            return Err(Error::invalid("the cutoff domain must contain the origin"));
        }
        Ok(Weight { potential, big_n, cutoff, gamma })
    }

    /// `N·V(z)`.
    pub fn exponent(&self, z: Complex64) -> f64 {
        self.big_n as f64 * self.potential.eval(z)
    }

    /// `e^{−N V(z)}` without the indicator; callers integrate over `D`.
    pub fn density(&self, z: Complex64) -> f64 {
        (-self.exponent(z)).exp()
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        eval_weight(self, z)
    }
}

/// `e^{−N V(z)}` inside the cutoff and 0 outside. Points on the sampled
/// boundary count as inside (χ_D on ∂D is a null set).
pub fn eval_weight(w: &Weight, z: Complex64) -> f64 {
    match w.cutoff.contains(z) {
        Ok(false) => 0.0,
        _ => w.density(z),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    T1Nonzero(f64),
    T2TooLarge(f64),
    NonPositive { count: usize, worst: [f64; 2], value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::T1Nonzero(v) => write!(f, "t₁ ≠ 0 (|t₁| = {v})"),
            Violation::T2TooLarge(v) => write!(f, "|t₂| ≥ 1/2 (|t₂| = {v})"),
            Violation::NonPositive { count, worst, value } => write!(
                f,
                "t₀V ≤ 0 at {count} sample points (worst {value:e} at {}{:+}i)",
                worst[0], worst[1]
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub samples_checked: usize,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `t₀ V` on a uniform grid over `D` plus a ring on `∂D` and
/// checks the coefficient conditions.
pub fn validate(w: &Weight, sample_count: usize) -> Result<ValidationReport> {
    if sample_count < 100 {
        return Err(Error::invalid("validation needs at least 100 samples"));
    }
    let p = &w.potential;
    let mut violations = Vec::new();
    let t1 = p.t_k(1).norm();
    if t1 != 0.0 {
        violations.push(Violation::T1Nonzero(t1));
    }
    let t2 = p.t_k(2).norm();
    if t2 >= 0.5 {
        violations.push(Violation::T2TooLarge(t2));
    }

    let side = (sample_count as f64).sqrt().ceil() as usize;
    let [x0, x1, y0, y1] = w.cutoff.bounding_box();
    let mut points = Vec::with_capacity(side * side + 4 * side);
    for i in 0..side {
        for j in 0..side {
            let z = Complex64::new(
                x0 + (i as f64 + 0.5) * (x1 - x0) / side as f64,
                y0 + (j as f64 + 0.5) * (y1 - y0) / side as f64,
            );
            if w.cutoff.contains(z).unwrap_or(false) {
                points.push(z);
            }
        }
    }
    let ring = match w.cutoff.shape() {
        Shape::Disk { .. } | Shape::CurveInterior(_) => w.cutoff.boundary().samples(4 * side),
    };
    points.extend(ring);

    let mut count = 0;
    let mut worst = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for z in &points {
        if z.norm() < 1e-12 {
            continue;
        }
        let v = p.t0 * p.eval(*z);
        if v <= 0.0 {
            count += 1;
        }
        if v < worst.0 {
            worst = (v, *z);
        }
    }
    if count > 0 {
        violations.push(Violation::NonPositive { count, worst: [worst.1.re, worst.1.im], value: worst.0 });
    }
    Ok(ValidationReport { violations, samples_checked: points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk(r: f64) -> Domain {
        Domain::disk(c(0.0, 0.0), r).unwrap()
    }

    #[test]
    fn eval_v_examples() {
        assert!((EFPotential::ginibre(1.0).eval(c(1.0, 1.0)) - 2.0).abs() < 1e-15);
        let p = EFPotential::new(1.0, vec![c(0.0, 0.0), c(0.2, 0.0)]).unwrap();
        assert!((p.eval(c(1.0, 0.0)) - 0.6).abs() < 1e-15);
        assert!((EFPotential::ginibre(0.5).eval(c(1.0, 0.0)) - 2.0).abs() < 1e-15);
        assert_eq!(p.eval(c(0.0, 0.0)), 0.0);
    }

    #[test]
    fn weight_examples() {
        let w = Weight::new(EFPotential::ginibre(1.0), 1, disk(3.0), 1.0).unwrap();
        assert_eq!(eval_weight(&w, c(0.0, 0.0)), 1.0);
        assert_eq!(eval_weight(&w, c(4.0, 0.0)), 0.0);
        assert!((eval_weight(&w, c(1.0, 0.0)) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn weight_requires_origin_in_cutoff() {
        let off = Domain::disk(c(5.0, 0.0), 1.0).unwrap();
        assert!(Weight::new(EFPotential::ginibre(1.0), 1, off, 1.0).is_err());
        assert!(Weight::new(EFPotential::ginibre(1.0), 0, disk(1.0), 1.0).is_err());
    }

    #[test]
    fn scale_gamma_examples() {
        let p = EFPotential::ginibre(1.0);
        assert_eq!(scale_gamma(&p, 1.0).unwrap(), p);
        assert!((scale_gamma(&p, 2.0).unwrap().eval(c(1.0, 1.0)) - 1.0).abs() < 1e-15);
        let q = EFPotential::new(0.25, vec![c(0.0, 0.0), c(0.1, 0.0)]).unwrap();
        let s = scale_gamma(&q, 0.5).unwrap();
        assert!((s.eval(c(1.0, 0.0)) - 6.4).abs() < 1e-12);
        assert!(scale_gamma(&p, 0.0).is_err());
        assert!(scale_gamma(&p, -1.0).is_err());
    }

    #[test]
    fn validate_examples() {
        let ok = Weight::new(EFPotential::new(1.0, vec![c(0.0, 0.0), c(0.2, 0.0)]).unwrap(), 1, disk(2.0), 1.0)
            .unwrap();
        assert!(validate(&ok, 10_000).unwrap().is_admissible());

        let big = Weight::new(EFPotential::new(1.0, vec![c(0.0, 0.0), c(0.6, 0.0)]).unwrap(), 1, disk(2.0), 1.0)
            .unwrap();
        let rep = validate(&big, 10_000).unwrap();
        assert!(rep.violations.iter().any(|v| v.to_string().starts_with("|t₂| ≥ 1/2")));

        let t1 = Weight::new(EFPotential::new(1.0, vec![c(0.1, 0.0), c(0.0, 0.0)]).unwrap(), 1, disk(2.0), 1.0)
            .unwrap();
        let rep = validate(&t1, 1000).unwrap();
        assert!(rep.violations.iter().any(|v| v.to_string().starts_with("t₁ ≠ 0")));
        assert!(validate(&t1, 50).is_err());
    }

    #[test]
    fn weight_json_schema() {
        let w: Weight = serde_json::from_str(
            r#"{"t0":1.0,"t":[[0,0],[0.2,0]],"N":2,"gamma":1.0,"cutoff":{"shape":"disk","center":[0,0],"radius":3}}"#,
        )
        .unwrap();
        assert_eq!(w.big_n, 2);
        assert!((w.potential.t_k(2).re - 0.2).abs() < 1e-15);
        let back = serde_json::to_value(&w).unwrap();
        assert_eq!(back["N"], 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn real_coefficients_give_conjugation_symmetry(
                x in -2.0f64..2.0, y in -2.0f64..2.0, t2 in -0.45f64..0.45, t3 in -0.3f64..0.3
            ) {
                let p = EFPotential::new(0.7, vec![c(0.0, 0.0), c(t2, 0.0), c(t3, 0.0)]).unwrap();
                let z = c(x, y);
                prop_assert!((p.eval(z) - p.eval(z.conj())).abs() < 1e-12);
            }

            #[test]
            fn gamma_scaling_composes(g1 in 0.1f64..3.0, g2 in 0.1f64..3.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
                let p = EFPotential::new(0.8, vec![c(0.0, 0.0), c(0.1, 0.05)]).unwrap();
                let z = c(x, y);
                let once = scale_gamma(&p, g1 * g2).unwrap().eval(z);
                let twice = scale_gamma(&scale_gamma(&p, g1).unwrap(), g2).unwrap().eval(z);
                prop_assert!((once - twice).abs() < 1e-14 * (1.0 + once.abs()));
                prop_assert!((once - p.eval(z) / (g1 * g2)).abs() < 1e-12 * (1.0 + once.abs()));
            }

            #[test]
            fn weight_bounded_by_one_when_v_nonnegative(x in -2.0f64..2.0, y in -2.0f64..2.0) {
                let p = EFPotential::new(1.0, vec![c(0.0, 0.0), c(0.2, 0.0)]).unwrap();
                let w = Weight::new(p, 3, disk(2.5), 1.0).unwrap();
                prop_assert!(eval_weight(&w, c(x, y)) <= 1.0);
            }
        }
    }
}
