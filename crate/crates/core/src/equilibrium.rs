//! Equilibrium domains bounded by polynomial curves: harmonic moments, the
//! inverse moment problem, the effective potential `E(z)`, the weighted
//! logarithmic energy and the area potential `V₀(z) = ∬_D log|z − w|² d²w`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polygon_winding, Domain, PolynomialCurve, QuadratureRule, StarFibration, DEFAULT_NODE_COUNT};
use crate::gfunction::BoundaryAntiderivative;
use crate::potential::EFPotential;
use crate::quadrature::adaptive_gauss;

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-10;
/// Evaluation points closer than this to the boundary are rejected.
pub const BAND: f64 = 1e-8;

/// Area `t₀ = A/π` and exterior moments `t_k = (1/2πik)∮ z̄ z^{−k} dz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMoments {
    pub t0: f64,
    /// `t₁ … t_{k_max}`.
    #[serde(with = "crate::cpair::vec")]
    pub t: Vec<Complex64>,
}

impl HarmonicMoments {
    pub fn new(t0: f64, t: Vec<Complex64>) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::invalid(format!("t0 must be > 0, got {t0}")));
        }
        Ok(HarmonicMoments { t0, t })
    }

    pub fn of_potential(p: &EFPotential) -> Self {
        HarmonicMoments { t0: p.t0, t: p.t.clone() }
    }

    pub fn t_k(&self, k: usize) -> Complex64 {
        if k == 0 || k > self.t.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.t[k - 1]
        }
    }
}

pub fn moments_of_curve(curve: &PolynomialCurve, k_max: usize) -> Result<HarmonicMoments> {
    if k_max == 0 {
        return Err(Error::invalid("k_max must be >= 1"));
    }
    if !polygon_winding(&curve.samples(curve.node_count().max(1024)), Complex64::new(0.0, 0.0)).0 {
        return Err(Error::OriginOutside);
    }
    Ok(raw_moments(curve, k_max))
}

fn raw_moments(curve: &PolynomialCurve, k_max: usize) -> HarmonicMoments {
    let m = curve.node_count().max(512);
    let h = 2.0 * PI / m as f64;
    let mut area = 0.0;
    let mut t = vec![Complex64::new(0.0, 0.0); k_max];
    for j in 0..m {
        let th = h * j as f64;
        let z = curve.point(th);
        let zbar_dz = z.conj() * curve.tangent(th) * h;
        area += zbar_dz.im / 2.0;
        let inv = 1.0 / z;
        let mut p = inv;
        for (k, tk) in t.iter_mut().enumerate() {
            *tk += zbar_dz * p / Complex64::new(0.0, 2.0 * PI * (k + 1) as f64);
            p *= inv;
        }
    }
    HarmonicMoments { t0: area / PI, t }
}

/// A solved (or prescribed) equilibrium domain `D₊`.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumDomain {
    pub curve: PolynomialCurve,
    pub gamma: f64,
    /// The potential whose equilibrium support this is (`t₀` already
    /// multiplied by γ).
    pub potential: EFPotential,
    pub target: HarmonicMoments,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "E0_stddev")]
    pub e0_stddev: f64,
    pub iterations: usize,
    pub residual: f64,
    #[serde(skip)]
    log_potential: LogPotential,
}

impl EquilibriumDomain {
    /// Wraps a known boundary curve and computes `E₀`.
    pub fn from_curve(curve: PolynomialCurve, potential: EFPotential, gamma: f64) -> Result<Self> {
        let k_max = potential.t.len().max(1);
        let got = moments_of_curve(&curve, k_max)?;
        let target = HarmonicMoments::of_potential(&potential);
        let residual = moment_residual(&got, &target, k_max);
        let log_potential = LogPotential::new(&Domain::curve(curve.clone()));
        let mut eq = EquilibriumDomain {
            curve,
            gamma,
            potential,
            target,
            e0: 0.0,
            e0_stddev: 0.0,
            iterations: 0,
            residual,
            log_potential,
        };
        let (mean, sd) = e0_of_domain(&eq, &eq.potential)?;
        eq.e0 = mean;
        eq.e0_stddev = sd;
        Ok(eq)
    }

    /// Equilibrium disk of the rotation-invariant potential `|z|²/t₀`.
    pub fn disk(t0: f64) -> Result<Self> {
        let curve = PolynomialCurve::new(t0.sqrt(), vec![], DEFAULT_NODE_COUNT)?;
        Self::from_curve(curve, EFPotential::ginibre(t0), 1.0)
    }

    pub fn domain(&self) -> Domain {
        Domain::curve(self.curve.clone()).labeled("D+")
    }

    pub fn log_potential(&self) -> &LogPotential {
        &self.log_potential
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

fn moment_residual(got: &HarmonicMoments, target: &HarmonicMoments, k_max: usize) -> f64 {
    let mut s = (got.t0 - target.t0).powi(2);
    for k in 1..=k_max {
        s += (got.t_k(k) - target.t_k(k)).norm_sqr();
    }
    s.sqrt()
}

fn residual_vector(curve: &PolynomialCurve, target: &HarmonicMoments, k_max: usize) -> DVector<f64> {
    let m = raw_moments(curve, k_max);
    let mut f = DVector::zeros(1 + 2 * k_max);
    f[0] = m.t0 - target.t0;
    for k in 1..=k_max {
        let d = m.t_k(k) - target.t_k(k);
        f[2 * k - 1] = d.re;
        f[2 * k] = d.im;
    }
    f
}

fn unpack(x: &DVector<f64>, node_count: usize) -> PolynomialCurve {
    let a = (0..(x.len() - 1) / 2).map(|j| Complex64::new(x[1 + 2 * j], x[2 + 2 * j])).collect();
    PolynomialCurve::raw(x[0], a, node_count)
}

/// Newton solve of the moment equations for a curve of the given degree
/// (coefficients `a₀ … a_degree`). The unknowns are `(r; Re a_j, Im a_j)`
/// and the equations `t₀; Re t_k, Im t_k` for `k ≤ degree + 1`.
///
/// `t₁ = 0` is not imposed here; [`crate::potential::validate`] reports it.
pub fn solve_domain(
    target: &HarmonicMoments,
    degree: usize,
    initial: Option<&PolynomialCurve>,
) -> Result<EquilibriumDomain> {
    let k_max = degree + 1;
    if target.t.len() > k_max {
        return Err(Error::invalid(format!(
            "{} moments supplied but a degree-{degree} curve only fixes t_1..t_{k_max}",
            target.t.len()
        )));
    }
    let dim = 1 + 2 * k_max;
    let node_count = initial.map(|c| c.node_count()).unwrap_or(DEFAULT_NODE_COUNT);
    let mut x = DVector::zeros(dim);
    match initial {
        Some(c) => {
            x[0] = c.r();
            for (j, a) in c.coefficients().iter().take(k_max).enumerate() {
                x[1 + 2 * j] = a.re;
                x[2 + 2 * j] = a.im;
            }
        }
        None => x[0] = target.t0.sqrt(),
    }

    let mut f = residual_vector(&unpack(&x, node_count), target, k_max);
    let mut iterations = 0;
    while f.norm() >= NEWTON_TOL {
        if iterations == NEWTON_MAX_ITER {
            return Err(Error::NonConvergence { iterations, residual: f.norm() });
        }
        iterations += 1;
        let h = 1e-7 * x[0].max(1.0);
        let cols: Vec<DVector<f64>> = (0..dim)
            .into_par_iter()
            .map(|j| {
                let mut xp = x.clone();
                xp[j] += h;
                (residual_vector(&unpack(&xp, node_count), target, k_max) - &f) / h
            })
            .collect();
        let jac = DMatrix::from_columns(&cols);
        let step = jac
            .lu()
            .solve(&(-&f))
            .ok_or(Error::NonConvergence { iterations, residual: f.norm() })?;
        let mut lambda = 1.0;
        loop {
            let trial = &x + &step * lambda;
            if trial[0] > 0.0 {
                let ft = residual_vector(&unpack(&trial, node_count), target, k_max);
                if ft.norm() < f.norm() {
                    x = trial;
                    f = ft;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return Err(Error::NonConvergence { iterations, residual: f.norm() });
            }
        }
    }

    let raw = unpack(&x, node_count);
    let curve = PolynomialCurve::new(raw.r(), raw.coefficients().to_vec(), node_count)?;
    let k_pot = target.t.len().max(1);
    let mut t = target.t.clone();
    t.resize(k_pot, Complex64::new(0.0, 0.0));
    let potential = EFPotential::new(target.t0, t)?;
    let mut eq = EquilibriumDomain::from_curve(curve, potential, 1.0)?;
    eq.target = target.clone();
    eq.iterations = iterations;
    eq.residual = f.norm();
    Ok(eq)
}

/// Evaluator of `V₀(z) = ∬_D log|z − w|² d²w` by two independent routes.
///
/// `Direct`: for interior `z` the star rule is re-centered at `z` and the
/// radial integral is done exactly,
/// `∫₀¹ log(ρ²|d|²) ρ dρ = (log|d|² − 1)/2`, leaving a spectrally accurate
/// trapezoid sum in θ. Exterior points integrate exactly along rays from
/// the centroid `c`: with `ζ = c + ρβ`, `β = b(θ) − c`, `p = (z − c)/β`,
/// `∫₀¹ ρ log|ζ − z|² dρ = log|β|²/2 + 2Re[F(1) − F(0)]` where
/// `F(ρ) = (ρ² − p²)/2·log(ρ − p) − ρ²/4 − pρ/2`; the θ integral is adaptive.
///
/// `Contour`: the boundary representation through the antiderivative Ω of
/// `z̄ dz`, anchored at `θ = 0`.
#[derive(Debug, Clone, Default)]
pub struct LogPotential {
    domain: Option<Domain>,
    fib: Option<StarFibration>,
    plain: Option<QuadratureRule>,
    center: Option<Complex64>,
    anchor: Option<BoundaryAntiderivative>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AreaPotentialMethod {
    Direct,
    Contour,
}

impl LogPotential {
    pub fn new(domain: &Domain) -> Self {
        let m = domain.boundary().node_count().max(512);
        let fib = StarFibration::new(domain, 64, m);
        let c = domain.centroid();
        let (plain, center) = match fib.rule_about(c) {
            Ok(rule) => (rule, Some(c)),
            Err(_) => (crate::geometry::default_area_quadrature(domain, (64, m)), None),
        };
        LogPotential {
            domain: Some(domain.clone()),
            fib: Some(fib),
            plain: Some(plain),
            center,
            anchor: Some(BoundaryAntiderivative::new(domain.boundary(), 0.0)),
        }
    }

    fn domain(&self) -> &Domain {
        self.domain.as_ref().expect("constructed with a domain")
    }

    pub fn eval(&self, z: Complex64, method: AreaPotentialMethod) -> Result<f64> {
        let d = self.domain();
        if d.distance_to_boundary(z) < BAND {
            return Err(Error::OnBoundary(format!("{z}"), BAND));
        }
        let inside = d.contains(z)?;
        match method {
            AreaPotentialMethod::Direct => Ok(self.direct(z, inside)),
            AreaPotentialMethod::Contour => Ok(self.contour(z, inside)),
        }
    }

    fn direct(&self, z: Complex64, inside: bool) -> f64 {
        if inside {
            let fib = self.fib.as_ref().expect("built");
            if let Ok(ang) = fib.angular_weights(z) {
                let (bnd, _, _) = fib.boundary_samples();
                return bnd.iter().zip(&ang).map(|(b, j)| j * ((b - z).norm_sqr().ln() - 1.0) / 2.0).sum();
            }
        } else if let Some(c) = self.center {
            return self.exterior_rays(c, z);
        }
        let rule = self.plain.as_ref().expect("built");
        rule.nodes.iter().zip(&rule.weights).map(|(p, w)| w * (p - z).norm_sqr().ln()).sum()
    }

    fn exterior_rays(&self, c: Complex64, z: Complex64) -> f64 {
        let curve = self.domain().boundary();
        let f = |th: f64| {
            let beta = curve.point(th) - c;
            let jac = (beta.conj() * curve.tangent(th)).im;
            let p = (z - c) / beta;
            let big_f = |r: f64| (r * r - p * p) / 2.0 * (r - p).ln() - r * r / 4.0 - p * r / 2.0;
            let radial = beta.norm_sqr().ln() / 2.0 + 2.0 * (big_f(1.0) - big_f(0.0)).re;
            Complex64::new(jac * radial, 0.0)
        };
        adaptive_gauss(&f, 0.0, 2.0 * PI, 64, 1e-12).re
    }

    fn contour(&self, z: Complex64, inside: bool) -> f64 {
        let om = self.anchor.as_ref().expect("built");
        let z0 = om.zeta0();
        let area = self.domain().area();
        let i = om.cauchy_integral(z, false);
        let mut v = area * (z - z0).norm_sqr().ln() - i.im;
        if inside {
            v += PI * (z.norm_sqr() - z0.norm_sqr());
        }
        v
    }
}

/// `V₀(z)` for a single point; builds the quadrature data on each call.
pub fn area_potential(domain: &Domain, z: Complex64, method: AreaPotentialMethod) -> Result<f64> {
    LogPotential::new(domain).eval(z, method)
}

/// `E(z) = V(z) − V₀(z)/(π t₀)` with `V₀` over `D₊`.
#[allow(non_snake_case)]
pub fn effective_E(domain: &EquilibriumDomain, potential: &EFPotential, z: Complex64) -> Result<f64> {
    let v0 = domain.log_potential.eval(z, AreaPotentialMethod::Direct)?;
    Ok(potential.eval(z) - v0 / (PI * potential.t0))
}

/// Deterministic interior samples `c + ρ(b(θ) − c)` of `D₊`.
pub fn interior_samples(domain: &EquilibriumDomain, count_r: usize, count_theta: usize, rho_max: f64) -> Vec<Complex64> {
    let d = domain.domain();
    let c = d.centroid();
    let mut out = Vec::with_capacity(count_r * count_theta);
    for i in 0..count_r {
        let rho = rho_max * (i as f64 + 0.5) / count_r as f64;
        for j in 0..count_theta {
            let th = 2.0 * PI * (j as f64 + 0.5 + 0.37 * i as f64) / count_theta as f64;
            out.push(c + (domain.curve.point(th) - c) * rho);
        }
    }
    out
}

/// Mean and standard deviation of `E` over 100 interior samples.
#[allow(non_snake_case)]
pub fn E0_of_domain(domain: &EquilibriumDomain, potential: &EFPotential) -> Result<(f64, f64)> {
    e0_of_domain(domain, potential)
}

fn e0_of_domain(domain: &EquilibriumDomain, potential: &EFPotential) -> Result<(f64, f64)> {
    let pts = interior_samples(domain, 10, 10, 0.9);
    let vals = pts.iter().map(|z| effective_E(domain, potential, *z)).collect::<Result<Vec<_>>>()?;
    Ok(mean_sd(&vals))
}

pub(crate) fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// CSV rows `x,y,E,inside_flag`.
pub fn e_field_csv(domain: &EquilibriumDomain, potential: &EFPotential, points: &[Complex64]) -> Result<String> {
    let d = domain.domain();
    let mut s = String::from("x,y,E,inside_flag\n");
    for z in points {
        let e = effective_E(domain, potential, *z)?;
        let inside = d.contains(*z)? as u8;
        s.push_str(&format!("{:.16e},{:.16e},{:.16e},{inside}\n", z.re, z.im, e));
    }
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub value: f64,
    pub potential_part: f64,
    pub log_part: f64,
    pub quadrature_meta: String,
}

/// `I(ν) = ∫V dν + ∬ log|z − ζ|^{−1} dν dν` for ν uniform on `domain`.
pub fn energy(domain: &Domain, potential: &EFPotential) -> Result<EnergyReport> {
    energy_with(domain, &|z| potential.eval(z))
}

/// [`energy`] for an arbitrary external field.
pub fn energy_with(domain: &Domain, v: &(dyn Fn(Complex64) -> f64 + Sync)) -> Result<EnergyReport> {
    let (radial, angular) = (32, 128);
    let outer = StarFibration::new(domain, radial, angular).rule_about(domain.centroid())?;
    let lp = LogPotential::new(domain);
    let area = domain.area();
    let potential_part = outer.nodes.iter().zip(&outer.weights).map(|(z, w)| w * v(*z)).sum::<f64>() / area;
    let v0: Vec<f64> = outer.nodes.par_iter().map(|z| lp.direct(*z, true)).collect();
    let log_part = -outer.weights.iter().zip(&v0).map(|(w, x)| w * x).sum::<f64>() / (2.0 * area * area);
    Ok(EnergyReport {
        value: potential_part + log_part,
        potential_part,
        log_part,
        quadrature_meta: format!("outer star fibration {radial}x{angular}, inner exact-radial polar rule"),
    })
}
