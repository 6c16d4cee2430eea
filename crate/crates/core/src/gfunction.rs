//! The boundary antiderivative Ω of `z̄ dz`, the two g-functions with
//! `g(z) ~ log z` at infinity, and the undressing `Y_n ↦ Ψ_n`.
//!
//! With `Ω(θ) = ∫_{θ₀}^{θ} z̄ z' dθ` along Γ (anchor ζ₀ = h(e^{iθ₀})):
//!
//! * V1: `g = log(z − ζ₀) + (i/2πt₀)∮ Ω(ζ) dζ/(ζ − z)`
//! * V2: `g = log(z − ζ₀) + (i/2πt₀)∮ Ω₀(ζ) dζ/(ζ − z) − (1/2πt₀)∬_{D₊} ζ/(ζ − z) d²ζ`
//!
//! where `Ω₀ = Ω − (|ζ|² − |ζ₀|²)/2` is purely imaginary on Γ.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dbar::{dbar_fd, dbar_fd_scalar, DbarResidualReport, YMatrix};
use crate::equilibrium::{effective_E, mean_sd, EquilibriumDomain, BAND};
use crate::error::{Error, Result};
use crate::geometry::{Domain, PolynomialCurve};
use crate::mat2::Mat2;
use crate::potential::EFPotential;
use crate::quadrature::{adaptive_gauss, TrigPoly};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const CONTOUR_TOL: f64 = 1e-14;
const CONTOUR_PANELS: usize = 32;
/// Exponents with real part above this raise [`Error::Overflow`].
pub const MAX_EXPONENT: f64 = 700.0;

/// Ω and Ω₀ along Γ, anchored at `θ₀`. Ω is integrated exactly from the
/// Fourier series of `z̄ z'`, so the identities `Ω + Ω̄ = |ζ|² − |ζ₀|²` and
/// `Re Ω₀ = 0` hold to rounding.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryAntiderivative {
    pub curve: PolynomialCurve,
    pub zeta0_theta: f64,
    #[serde(with = "crate::cpair::vec")]
    pub omega_values: Vec<Complex64>,
    #[serde(with = "crate::cpair::vec")]
    pub omega0_values: Vec<Complex64>,
    #[serde(skip)]
    density: TrigPoly,
    #[serde(skip)]
    zeta0: Complex64,
}

impl BoundaryAntiderivative {
    pub fn new(curve: &PolynomialCurve, zeta0_theta: f64) -> Self {
        let density = curve.series().conj().mul(&curve.series().derivative());
        let zeta0 = curve.point(zeta0_theta);
        let mut out = BoundaryAntiderivative {
            curve: curve.clone(),
            zeta0_theta,
            omega_values: Vec::new(),
            omega0_values: Vec::new(),
            density,
            zeta0,
        };
        let m = curve.node_count();
        let h = 2.0 * PI / m as f64;
        for j in 0..m {
            let th = zeta0_theta + h * j as f64;
            out.omega_values.push(out.omega(th));
            out.omega0_values.push(out.omega0(th));
        }
        out
    }

    pub fn zeta0(&self) -> Complex64 {
        self.zeta0
    }

    /// Node parameters `θ₀ + 2πj/M` matching `omega_values`.
    pub fn node_thetas(&self) -> Vec<f64> {
        let m = self.omega_values.len();
        (0..m).map(|j| self.zeta0_theta + 2.0 * PI * j as f64 / m as f64).collect()
    }

    /// `Ω(θ)` for `θ ∈ [θ₀, θ₀ + 2π]`.
    pub fn omega(&self, theta: f64) -> Complex64 {
        self.density.integrate(self.zeta0_theta, theta)
    }

    pub fn omega0(&self, theta: f64) -> Complex64 {
        self.omega(theta) - (self.curve.point(theta).norm_sqr() - self.zeta0.norm_sqr()) / 2.0
    }

    /// `Ω₊(ζ₀)`, the value after one full loop; equals `2i·area`.
    pub fn loop_value(&self) -> Complex64 {
        self.omega(self.zeta0_theta + 2.0 * PI)
    }

    /// `∮ Ω_*(ζ) dζ/(ζ − z)` over `[θ₀, θ₀ + 2π]`, with Ω₀ when `use_omega0`.
    pub fn cauchy_integral(&self, z: Complex64, use_omega0: bool) -> Complex64 {
        let f = |th: f64| {
            let om = if use_omega0 { self.omega0(th) } else { self.omega(th) };
            om * self.curve.tangent(th) / (self.curve.point(th) - z)
        };
        adaptive_gauss(&f, self.zeta0_theta, self.zeta0_theta + 2.0 * PI, CONTOUR_PANELS, CONTOUR_TOL)
    }
}

pub fn build_antiderivative(curve: &PolynomialCurve, zeta0_theta: f64) -> BoundaryAntiderivative {
    BoundaryAntiderivative::new(curve, zeta0_theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum GVersion {
    V1,
    V2,
}

#[derive(Debug, Clone, Serialize)]
pub struct GFunction {
    pub version: GVersion,
    #[serde(skip)]
    pub domain: EquilibriumDomain,
    pub t0_eff: f64,
    pub anchor: BoundaryAntiderivative,
    #[serde(with = "crate::cpair")]
    pub cut_direction: Complex64,
    #[serde(skip)]
    plus: Domain,
}

impl GFunction {
    /// `t0_eff` is taken from `domain.potential`, which already carries γ.
    /// The cut of `log(z − ζ₀)` runs along the outward normal at ζ₀.
    pub fn new(version: GVersion, domain: &EquilibriumDomain, zeta0_theta: f64) -> Result<Self> {
        let u = domain.curve.outward_normal(zeta0_theta);
        Self::with_cut(version, domain, zeta0_theta, u)
    }

    /// Like [`GFunction::new`] with an explicit cut direction; the ray from
    /// ζ₀ must leave D₊ without coming back.
    pub fn with_cut(version: GVersion, domain: &EquilibriumDomain, zeta0_theta: f64, direction: Complex64) -> Result<Self> {
        if !(direction.norm() > 0.0 && direction.is_finite()) {
            return Err(Error::invalid("cut direction must be a nonzero finite complex number"));
        }
        let u = direction / direction.norm();
        let anchor = BoundaryAntiderivative::new(&domain.curve, zeta0_theta);
        let plus = domain.domain();
        let z0 = anchor.zeta0();
        let reach = 3.0 * domain.curve.max_modulus() + z0.norm();
        for k in 1..=400 {
            let p = z0 + u * (reach * k as f64 / 400.0);
            if plus.distance_to_boundary(p) > BAND && plus.contains(p)? {
                return Err(Error::invalid(format!("cut ray from {z0} along {u} re-enters D+")));
            }
        }
        Ok(GFunction { version, domain: domain.clone(), t0_eff: domain.potential.t0, anchor, cut_direction: u, plus })
    }

    pub fn zeta0(&self) -> Complex64 {
        self.anchor.zeta0()
    }

    fn check_point(&self, z: Complex64) -> Result<bool> {
        if self.plus.distance_to_boundary(z) < BAND {
            return Err(Error::OnBoundary(format!("{z}"), BAND));
        }
        let w = (z - self.zeta0()) * self.cut_direction.conj();
        if w.re > 0.0 && w.im.abs() < BAND {
            return Err(Error::OnBranchCut(format!("{z}")));
        }
        self.plus.contains(z)
    }

    /// Distance from `z` to the cut ray.
    pub fn distance_to_cut(&self, z: Complex64) -> f64 {
        let w = (z - self.zeta0()) * self.cut_direction.conj();
        if w.re > 0.0 {
            w.im.abs()
        } else {
            w.norm()
        }
    }

    /// `(1/π)∬_{D₊} ζ/(ζ − z) d²ζ`, computed through the Pompeiu formula
    /// `(1/2πi)∮ |ζ|² dζ/(ζ − z) − |z|²·χ_{D₊}(z)`.
    pub fn area_term(&self, z: Complex64) -> Result<Complex64> {
        let inside = self.check_point(z)?;
        let c = &self.anchor.curve;
        let f = |th: f64| c.point(th).norm_sqr() * c.tangent(th) / (c.point(th) - z);
        let th0 = self.anchor.zeta0_theta;
        let contour = adaptive_gauss(&f, th0, th0 + 2.0 * PI, CONTOUR_PANELS, CONTOUR_TOL) / (2.0 * PI * I);
        Ok(if inside { contour - z.norm_sqr() } else { contour })
    }
}

/// `log w` with its cut along the ray `{s·u : s > 0}`.
pub fn cut_log(w: Complex64, u: Complex64) -> Complex64 {
    (-w * u.conj()).ln() + (-u).ln()
}

pub fn g_eval(gf: &GFunction, z: Complex64) -> Result<Complex64> {
    let inside = gf.check_point(z)?;
    let t0 = gf.t0_eff;
    let log = cut_log(z - gf.zeta0(), gf.cut_direction);
    match gf.version {
        GVersion::V1 => Ok(log + I / (2.0 * PI * t0) * gf.anchor.cauchy_integral(z, false)),
        GVersion::V2 => {
            // contour parts of the Ω₀ term and of the Pompeiu area term in one pass
            let a = &gf.anchor;
            let c = &a.curve;
            let f = |th: f64| {
                let p = c.point(th);
                (a.omega0(th) * I + p.norm_sqr() * I / 2.0) * c.tangent(th) / (p - z)
            };
            let th0 = a.zeta0_theta;
            let contour = adaptive_gauss(&f, th0, th0 + 2.0 * PI, CONTOUR_PANELS, CONTOUR_TOL) / (2.0 * PI * t0);
            let area = if inside { z.norm_sqr() / (2.0 * t0) } else { 0.0 };
            Ok(log + contour + area)
        }
    }
}

/// Analytic `∂̄g`: `z/(2t₀)` in D₊ for V2, zero elsewhere.
pub fn dbar_g_target(gf: &GFunction, z: Complex64) -> Result<Complex64> {
    let inside = gf.check_point(z)?;
    Ok(match gf.version {
        GVersion::V2 if inside => z / (2.0 * gf.t0_eff),
        _ => Complex64::new(0.0, 0.0),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarResidual {
    #[serde(with = "crate::cpair")]
    pub z: Complex64,
    #[serde(with = "crate::cpair")]
    pub fd: Complex64,
    #[serde(with = "crate::cpair")]
    pub target: Complex64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DbarGReport {
    pub points: Vec<ScalarResidual>,
    pub max_abs_err: f64,
    /// `max |fd − target| / |target|` over points with a nonzero target.
    pub max_rel_err: f64,
    pub fd_step: f64,
}

fn check_stencil(gf: &GFunction, z: Complex64, step: f64) -> Result<()> {
    if gf.plus.distance_to_boundary(z) <= 10.0 * step || gf.distance_to_cut(z) <= 10.0 * step {
        return Err(Error::invalid(format!("point {z} lies within 10 steps of the contour or the cut")));
    }
    Ok(())
}

pub fn dbar_g_check(gf: &GFunction, points: &[Complex64], step: f64) -> Result<DbarGReport> {
    for z in points {
        check_stencil(gf, *z, step)?;
    }
    let rows = points
        .par_iter()
        .map(|z| {
            let target = dbar_g_target(gf, *z)?;
            let fd = dbar_fd_scalar(&|s| g_eval(gf, s).unwrap_or(Complex64::new(f64::NAN, 0.0)), *z, step);
            Ok(ScalarResidual { z: *z, fd, target, abs_err: (fd - target).norm() })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs_err = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    let max_rel_err = rows
        .iter()
        .filter(|r| r.target.norm() > 0.0)
        .map(|r| r.abs_err / r.target.norm())
        .fold(0.0, f64::max);
    Ok(DbarGReport { points: rows, max_abs_err, max_rel_err, fd_step: step })
}

/// Difference `g − log z` with the imaginary part reduced to `(−π, π]`.
pub fn g_minus_log(gf: &GFunction, z: Complex64) -> Result<Complex64> {
    let d = g_eval(gf, z)? - z.ln();
    Ok(Complex64::new(d.re, d.im - 2.0 * PI * (d.im / (2.0 * PI)).round()))
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    /// `p` in `|g(z) − log z| ≈ C|z|^{−p}`.
    pub exponent: f64,
    pub log_c: f64,
    pub radii: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

/// Least-squares fit of the decay of `g − log z` along `direction`.
pub fn decay_fit(gf: &GFunction, radii: &[f64], direction: Complex64) -> Result<DecayFit> {
    if radii.len() < 2 {
        return Err(Error::invalid("need at least two radii"));
    }
    let u = direction / direction.norm();
    let magnitudes = radii.iter().map(|r| g_minus_log(gf, u * *r).map(|d| d.norm())).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = magnitudes.iter().map(|m| m.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit { exponent: -slope, log_c: my - slope * mx, radii: radii.to_vec(), magnitudes })
}

#[derive(Debug, Clone, Serialize)]
pub struct SingleValuedness {
    pub radius: f64,
    /// Jump of g across the cut on the circle, extrapolated to zero offset.
    #[serde(with = "crate::cpair")]
    pub jump: Complex64,
    /// `|e^{n·jump} − 1|`.
    pub defect: f64,
}

/// Continues g once around the circle `|z| = radius` and compares
/// `e^{ng}` at the end to the start. The only discontinuity met on the way
/// is the cut, so the monodromy is the jump across it.
pub fn single_valuedness(gf: &GFunction, n: u32, radius: f64) -> Result<SingleValuedness> {
    let z0 = gf.zeta0();
    let u = gf.cut_direction;
    // |z0 + s u| = radius
    let b = (z0 * u.conj()).re;
    let s = -b + (b * b - z0.norm_sqr() + radius * radius).sqrt();
    if !(s > 0.0) {
        return Err(Error::invalid(format!("circle of radius {radius} does not meet the cut")));
    }
    let p = z0 + u * s;
    let delta = 1e-4 * radius;
    let jump_at = |d: f64| -> Result<Complex64> {
        // crossing counterclockwise: from the clockwise side to the other
        let t = Complex64::from_polar(1.0, p.arg()) * I;
        Ok(g_eval(gf, p + t * d)? - g_eval(gf, p - t * d)?)
    };
    let jump = jump_at(delta)? * 2.0 - jump_at(2.0 * delta)?;
    let defect = ((jump * n as f64).exp() - 1.0).norm();
    Ok(SingleValuedness { radius, jump, defect })
}

#[derive(Debug, Clone, Serialize)]
pub struct PropositionReport {
    pub version: GVersion,
    pub interior_mean: f64,
    pub interior_stddev: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub interior_count: usize,
    pub exterior_count: usize,
    /// `max |V − 2Re g − E(z)|` over exterior samples.
    pub exterior_max_err: f64,
    /// `min (E(z) − E₀)` over exterior samples.
    pub exterior_min_excess: f64,
}

/// Interior combination whose constancy is being tested.
fn interior_combination(gf: &GFunction, potential: &EFPotential, z: Complex64, g: Complex64) -> f64 {
    let base = potential.eval(z) - 2.0 * g.re;
    match gf.version {
        GVersion::V1 => base - (z.norm_sqr() - gf.zeta0().norm_sqr()) / gf.t0_eff,
        GVersion::V2 => base,
    }
}

/// On D₊: `V − 2Re g − (|z|² − |ζ₀|²)/t₀` (V1) or `V − 2Re g` (V2) is the
/// constant E₀; off D̄₊ both reduce to `E(z)`.
pub fn verify_proposition(gf: &GFunction, potential: &EFPotential, samples: &[Complex64]) -> Result<PropositionReport> {
    let rows = samples
        .par_iter()
        .map(|z| {
            let g = g_eval(gf, *z)?;
            let inside = gf.plus.contains(*z)?;
            let e = if inside { f64::NAN } else { effective_E(&gf.domain, potential, *z)? };
            Ok((inside, interior_combination(gf, potential, *z, g), potential.eval(*z) - 2.0 * g.re, e))
        })
        .collect::<Result<Vec<_>>>()?;
    let interior: Vec<f64> = rows.iter().filter(|r| r.0).map(|r| r.1).collect();
    let (interior_mean, interior_stddev) = if interior.is_empty() { (f64::NAN, f64::NAN) } else { mean_sd(&interior) };
    let e0 = gf.domain.e0;
    let mut exterior_max_err = 0.0f64;
    let mut exterior_min_excess = f64::INFINITY;
    for r in rows.iter().filter(|r| !r.0) {
        exterior_max_err = exterior_max_err.max((r.2 - r.3).abs());
        exterior_min_excess = exterior_min_excess.min(r.3 - e0);
    }
    Ok(PropositionReport {
        version: gf.version,
        interior_mean,
        interior_stddev,
        e0,
        interior_count: interior.len(),
        exterior_count: rows.len() - interior.len(),
        exterior_max_err,
        exterior_min_excess,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpSample {
    pub theta: f64,
    #[serde(with = "crate::cpair")]
    pub d: Complex64,
    #[serde(with = "crate::cpair")]
    pub predicted: Complex64,
    /// `|d/predicted − 1|`.
    pub mismatch: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpReport {
    pub eps: f64,
    pub n: u32,
    /// s in `d ≈ e^{s·n·Ω_*/t₀}`, fixed at the first sample.
    pub sign: f64,
    pub sign_consistent: bool,
    pub max_mismatch: f64,
    pub samples: Vec<JumpSample>,
}

impl JumpReport {
    /// Rows `theta,abs_d,arg_d,predicted_abs,predicted_arg`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,abs_d,arg_d,predicted_abs,predicted_arg\n");
        for j in &self.samples {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                j.theta,
                j.d.norm(),
                j.d.arg(),
                j.predicted.norm(),
                j.predicted.arg()
            ));
        }
        s
    }
}

/// Compares `d = e^{n g(z_in)}/e^{n g(z_out)}` at `h(e^{iθ}) ∓ ε·normal` with
/// `e^{±nΩ_*/t₀}` (Ω for V1, Ω₀ for V2).
pub fn jump_check(gf: &GFunction, thetas: &[f64], eps: f64, n: u32) -> Result<JumpReport> {
    if thetas.is_empty() {
        return Err(Error::invalid("no theta samples"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be > 0, got {eps}")));
    }
    let a = &gf.anchor;
    let th0 = a.zeta0_theta;
    let rows = thetas
        .par_iter()
        .map(|th| {
            let t = th0 + (th - th0).rem_euclid(2.0 * PI);
            let p = a.curve.point(t);
            let nu = a.curve.outward_normal(t);
            let (zi, zo) = (p - nu * eps, p + nu * eps);
            if gf.distance_to_cut(zi) < BAND || gf.distance_to_cut(zo) < BAND {
                return Err(Error::OnBranchCut(format!("{p}")));
            }
            let d = ((g_eval(gf, zi)? - g_eval(gf, zo)?) * n as f64).exp();
            let om = match gf.version {
                GVersion::V1 => a.omega(t),
                GVersion::V2 => a.omega0(t),
            };
            Ok((t, d, om * (n as f64 / gf.t0_eff)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mism = |d: Complex64, x: Complex64, s: f64| (d / (x * s).exp() - 1.0).norm();
    let (_, d1, x1) = rows[0];
    let sign = if mism(d1, x1, -1.0) <= mism(d1, x1, 1.0) { -1.0 } else { 1.0 };
    let mut consistent = true;
    let mut samples = Vec::with_capacity(rows.len());
    for (theta, d, x) in rows {
        let m = mism(d, x, sign);
        if m > mism(d, x, -sign) {
            consistent = false;
        }
        samples.push(JumpSample { theta, d, predicted: (x * sign).exp(), mismatch: m });
    }
    let max_mismatch = samples.iter().map(|s| s.mismatch).fold(0.0, f64::max);
    Ok(JumpReport { eps, n, sign, sign_consistent: consistent, max_mismatch, samples })
}

/// `Ψ = e^{cσ₃} Y e^{−(ng + c)σ₃}` entrywise in log space.
pub fn undress_value(y: &Mat2, n: usize, g: Complex64, c: f64) -> Result<Mat2> {
    let ng = g * n as f64;
    let expo = [[-ng, ng + 2.0 * c], [-ng - 2.0 * c, ng]];
    let mut out = Mat2::zero();
    for i in 0..2 {
        for j in 0..2 {
            let yij = y.get(i, j);
            if yij == Complex64::new(0.0, 0.0) {
                continue;
            }
            let l = yij.ln() + expo[i][j];
            if l.re > MAX_EXPONENT {
                return Err(Error::Overflow(l.re));
            }
            out.0[i][j] = l.exp();
        }
    }
    Ok(out)
}

/// Constant `c` of the diagonal conjugation.
pub fn undress_shift(gf: &GFunction, n: usize) -> f64 {
    let n = n as f64;
    match gf.version {
        GVersion::V1 => n * gf.domain.e0 / 2.0 - n * gf.zeta0().norm_sqr() / (2.0 * gf.t0_eff),
        GVersion::V2 => n * gf.domain.e0 / 2.0,
    }
}

pub fn undress(y: &YMatrix<'_>, gf: &GFunction, z: Complex64) -> Result<Mat2> {
    let g = g_eval(gf, z)?;
    undress_value(&y.eval(z)?, y.n, g, undress_shift(gf, y.n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// Inside D₊.
    Plus,
    /// In D but outside D̄₊.
    Remainder,
    /// Outside the cutoff D.
    Outside,
}

#[derive(Debug, Clone, Serialize)]
pub struct UndressedReport {
    pub version: GVersion,
    pub plus: DbarResidualReport,
    pub remainder: DbarResidualReport,
    pub outside: DbarResidualReport,
}

impl UndressedReport {
    pub fn max_rel_err(&self) -> f64 {
        self.plus.max_rel_err.max(self.remainder.max_rel_err)
    }
}

/// Finite-difference check of the ∂̄-problem for Ψ_n:
///
/// * V2 in D₊: `∂̄Ψ + (nz/2t₀)Ψσ₃ = conj(Ψ)·[[0, −1], [0, 0]]`
/// * V2 in D∖D̄₊: `∂̄Ψ = conj(Ψ)·[[0, −e^{−n(E − E₀)}], [0, 0]]`
/// * V1 in D₊: `∂̄Ψ = conj(Ψ)·[[0, −e^{−n|z|²/t₀}], [0, 0]]`
/// * V1 in D∖D̄₊: `∂̄Ψ = conj(Ψ)·[[0, −e^{−n(E − E₀ + |ζ₀|²/t₀)}], [0, 0]]`
/// * outside D: `∂̄Ψ = 0`.
///
/// Requires `gf.domain.potential` to be the γ-scaled potential of `y.weight`.
pub fn verify_undressed_dbar(y: &YMatrix<'_>, gf: &GFunction, points: &[Complex64], step: f64) -> Result<UndressedReport> {
    let want = crate::potential::scale_gamma(&y.weight.potential, y.weight.gamma)?;
    let have = &gf.domain.potential;
    let t_diff = (0..want.t.len().max(have.t.len())).map(|k| (want.t_k(k + 1) - have.t_k(k + 1)).norm()).fold(0.0, f64::max);
    if (want.t0 - have.t0).abs() > 1e-12 * want.t0 || t_diff > 1e-12 {
        return Err(Error::invalid("the g-function domain does not belong to the weight's scaled potential"));
    }
    let n = y.n as f64;
    let t0 = gf.t0_eff;
    let e0 = gf.domain.e0;
    let mut classified = Vec::with_capacity(points.len());
    for z in points {
        check_stencil(gf, *z, step)?;
        if y.weight.cutoff.distance_to_boundary(*z) <= 10.0 * step {
            return Err(Error::invalid(format!("point {z} lies within 10 steps of the cutoff boundary")));
        }
        let region = if gf.plus.contains(*z)? {
            Region::Plus
        } else if y.weight.cutoff.contains(*z)? {
            Region::Remainder
        } else {
            Region::Outside
        };
        classified.push((*z, region));
    }
    let rows = classified
        .par_iter()
        .map(|(z, region)| {
            let z = *z;
            let psi = undress(y, gf, z)?;
            let mut lhs = dbar_fd(&|s| undress(y, gf, s), z, step)?;
            let k = match (gf.version, region) {
                (_, Region::Outside) => 0.0,
                (GVersion::V2, Region::Plus) => {
                    lhs = lhs + psi.times_sigma3().scale(z * (n / (2.0 * t0)));
                    1.0
                }
                (GVersion::V2, Region::Remainder) => {
                    (-n * (effective_E(&gf.domain, have, z)? - e0)).exp()
                }
                (GVersion::V1, Region::Plus) => (-n * z.norm_sqr() / t0).exp(),
                (GVersion::V1, Region::Remainder) => {
                    (-n * (effective_E(&gf.domain, have, z)? - e0 + gf.zeta0().norm_sqr() / t0)).exp()
                }
            };
            let pc = psi.conj();
            let rhs = Mat2::new(Complex64::new(0.0, 0.0), -pc.get(0, 0) * k, Complex64::new(0.0, 0.0), -pc.get(1, 0) * k);
            Ok((*region, (z, lhs, rhs)))
        })
        .collect::<Result<Vec<_>>>()?;
    let part = |r: Region| {
        let v = rows.iter().filter(|x| x.0 == r).map(|x| x.1).collect();
        DbarResidualReport::from_values(v, step, y.cauchy_rule.describe())
    };
    Ok(UndressedReport {
        version: gf.version,
        plus: part(Region::Plus),
        remainder: part(Region::Remainder),
        outside: part(Region::Outside),
    })
}

/// CSV rows `x,y,re_g,im_g,region` with region 1 in D₊ and 0 outside.
pub fn g_field_csv(gf: &GFunction, points: &[Complex64]) -> Result<String> {
    let vals = points
        .par_iter()
        .map(|z| Ok((g_eval(gf, *z)?, gf.plus.contains(*z)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut s = String::from("x,y,re_g,im_g,region\n");
    for (z, (g, inside)) in points.iter().zip(vals) {
        s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e},{}\n", z.re, z.im, g.re, g.im, inside as u8));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dbar::{cauchy_transform, CauchyRule};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ellipse() -> EquilibriumDomain {
        let curve = PolynomialCurve::new(1.091_089_451_179_962, vec![c(0.0, 0.0), c(0.436_435_780_471_984_8, 0.0)], 512).unwrap();
        EquilibriumDomain::from_curve(curve, EFPotential::new(1.0, vec![c(0.0, 0.0), c(0.2, 0.0)]).unwrap(), 1.0).unwrap()
    }

    fn disk_v1() -> GFunction {
        GFunction::with_cut(GVersion::V1, &EquilibriumDomain::disk(1.0).unwrap(), 0.0, I).unwrap()
    }

    #[test]
    fn antiderivative_on_circle() {
        let r = 0.8;
        let a = BoundaryAntiderivative::new(&PolynomialCurve::new(r, vec![], 256).unwrap(), 0.0);
        for th in [0.0, 0.5, 2.0, 5.5] {
            assert!((a.omega(th) - I * r * r * th).norm() < 1e-12);
            assert!((a.omega0(th) - a.omega(th)).norm() < 1e-12);
        }
        assert!((a.loop_value() - I * 2.0 * PI * r * r).norm() < 1e-12);
        assert_eq!(a.omega_values[0], c(0.0, 0.0));
    }

    #[test]
    fn antiderivative_identities_on_ellipse() {
        let eq = ellipse();
        let a = BoundaryAntiderivative::new(&eq.curve, 0.7);
        let area = eq.domain().area();
        assert!((a.loop_value() - I * 2.0 * area).norm() < 1e-10);
        for (th, (om, om0)) in a.node_thetas().iter().zip(a.omega_values.iter().zip(&a.omega0_values)) {
            let p = eq.curve.point(*th);
            assert!(((om + om.conj()).re - (p.norm_sqr() - a.zeta0().norm_sqr())).abs() < 1e-12);
            assert!(om0.re.abs() < 1e-12);
        }
    }

    #[test]
    fn disk_g_is_log() {
        let gf = disk_v1();
        assert!((g_eval(&gf, c(3.0, 0.0)).unwrap() - 3.0f64.ln()).norm() < 1e-8);
        let z = c(10.0, 10.0);
        assert!((g_eval(&gf, z).unwrap() - z.ln()).norm() < 1e-8);
        for k in 0..20 {
            let z = Complex64::from_polar(1.3 + 0.2 * k as f64, 0.3 + 0.31 * k as f64);
            assert!(g_minus_log(&gf, z).unwrap().norm() < 1e-8, "{z}");
        }
    }

    #[test]
    fn point_rejection() {
        let gf = GFunction::new(GVersion::V1, &EquilibriumDomain::disk(1.0).unwrap(), 0.0).unwrap();
        assert!(matches!(g_eval(&gf, c(3.0, 0.0)), Err(Error::OnBranchCut(_))));
        assert!(matches!(g_eval(&gf, c(0.0, 1.0)), Err(Error::OnBoundary(_, _))));
        assert!(GFunction::with_cut(GVersion::V1, &EquilibriumDomain::disk(1.0).unwrap(), 0.0, c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn far_field_is_log() {
        let eq = ellipse();
        for v in [GVersion::V1, GVersion::V2] {
            let gf = GFunction::new(v, &eq, 0.0).unwrap();
            for z in [c(1e6, 1.0), c(-3e5, 9.5e5), c(0.0, -1e6)] {
                assert!(g_minus_log(&gf, z).unwrap().norm() < 1e-5);
            }
            let fit = decay_fit(&gf, &[10.0, 20.0, 40.0, 80.0, 160.0], c(0.6, 0.8)).unwrap();
            assert!(fit.exponent >= 1.0 - 1e-6, "{v:?}: {}", fit.exponent);
        }
    }

    #[test]
    fn versions_differ_by_interior_quadratic() {
        let eq = ellipse();
        let g1 = GFunction::new(GVersion::V1, &eq, 0.0).unwrap();
        let g2 = GFunction::new(GVersion::V2, &eq, 0.0).unwrap();
        let z0 = g1.zeta0();
        for z in [c(0.1, 0.2), c(-0.9, -0.1), c(2.0, 1.5), c(-0.2, 1.3)] {
            let inside = g1.plus.contains(z).unwrap();
            let want = if inside { (z.norm_sqr() - z0.norm_sqr()) / 2.0 } else { 0.0 };
            assert!((g_eval(&g2, z).unwrap() - g_eval(&g1, z).unwrap() - want).norm() < 1e-10, "{z}");
        }
    }

    #[test]
    fn area_term_matches_area_quadrature() {
        let eq = ellipse();
        let gf = GFunction::new(GVersion::V2, &eq, 0.0).unwrap();
        let rule = CauchyRule::new(&eq.domain(), 64, 512);
        for z in [c(0.3, -0.2), c(-1.0, 0.4), c(1.8, 0.9)] {
            let dual = cauchy_transform(&|s| s, &rule, z).unwrap();
            assert!((gf.area_term(z).unwrap() - dual).norm() < 1e-8, "{z}");
        }
    }

    #[test]
    fn dbar_of_g() {
        let eq = EquilibriumDomain::disk(1.0).unwrap();
        let g2 = GFunction::with_cut(GVersion::V2, &eq, 0.0, I).unwrap();
        let r = dbar_g_check(&g2, &[c(0.4, 0.0)], 1e-4).unwrap();
        assert!((r.points[0].fd - 0.2).norm() < 1e-4);
        let r = dbar_g_check(&g2, &[c(1.7, -0.8), c(-2.0, 0.3)], 1e-3).unwrap();
        assert!(r.max_abs_err < 1e-6);
        let g1 = GFunction::with_cut(GVersion::V1, &eq, 0.0, I).unwrap();
        let r = dbar_g_check(&g1, &[c(0.2, 0.3), c(-0.5, -0.1)], 1e-3).unwrap();
        assert!(r.max_abs_err < 1e-6);
        assert!(dbar_g_check(&g1, &[c(0.9999, 0.0)], 1e-3).is_err());
    }

    #[test]
    fn proposition_on_disk() {
        let eq = EquilibriumDomain::disk(1.0).unwrap();
        let pts = [c(0.2, 0.1), c(-0.5, 0.3), c(0.0, -0.7), c(0.6, 0.6), c(0.0, 2.0), c(-1.4, -1.4), c(2.0, 0.0)];
        for v in [GVersion::V1, GVersion::V2] {
            let gf = GFunction::with_cut(v, &eq, 0.0, I).unwrap();
            let rep = verify_proposition(&gf, &eq.potential, &pts).unwrap();
            assert!((rep.interior_mean - 1.0).abs() < 1e-5 && rep.interior_stddev < 1e-5);
            assert!(rep.exterior_max_err < 1e-5);
            assert!(rep.exterior_min_excess > 0.0);
        }
    }

    #[test]
    fn proposition_on_ellipse() {
        let eq = ellipse();
        let pts = crate::equilibrium::interior_samples(&eq, 4, 6, 0.9);
        let means: Vec<f64> = [GVersion::V1, GVersion::V2]
            .iter()
            .map(|v| {
                let gf = GFunction::new(*v, &eq, 0.0).unwrap();
                let rep = verify_proposition(&gf, &eq.potential, &pts).unwrap();
                assert!(rep.interior_stddev < 1e-5, "{v:?}: {}", rep.interior_stddev);
                assert!((rep.interior_mean - eq.e0).abs() < 1e-5);
                rep.interior_mean
            })
            .collect();
        assert!((means[0] - means[1]).abs() < 1e-4);
    }

    #[test]
    fn jump_relations() {
        let eq = EquilibriumDomain::disk(1.0).unwrap();
        let thetas = [PI / 2.0, 1.0, 2.5, 4.0];
        let g2 = GFunction::new(GVersion::V2, &eq, 0.0).unwrap();
        let r = jump_check(&g2, &thetas, 1e-4, 1).unwrap();
        assert!(r.samples.iter().all(|s| (s.d.norm() - 1.0).abs() < 1e-3));
        let g1 = GFunction::new(GVersion::V1, &eq, 0.0).unwrap();
        let mut last = f64::INFINITY;
        for eps in [1e-3, 1e-4, 1e-5] {
            let r = jump_check(&g1, &thetas, eps, 1).unwrap();
            assert!(r.sign_consistent && r.sign == -1.0);
            assert!(r.max_mismatch < last);
            last = r.max_mismatch;
        }
        assert!(last < 1e-3);
        let r = jump_check(&g1, &thetas, 1e-4, 0).unwrap();
        assert!(r.samples.iter().all(|s| s.d == c(1.0, 0.0)));
        assert!(r.to_csv().starts_with("theta,abs_d"));
    }

    #[test]
    fn exponential_is_single_valued() {
        let eq = ellipse();
        for v in [GVersion::V1, GVersion::V2] {
            let gf = GFunction::new(v, &eq, 0.0).unwrap();
            let sv = single_valuedness(&gf, 3, 3.0 * eq.curve.max_modulus()).unwrap();
            assert!(sv.jump.re.abs() < 1e-6 && (sv.jump.im.abs() - 2.0 * PI).abs() < 1e-6, "{v:?}: {}", sv.jump);
            assert!(sv.defect < 1e-8);
        }
    }

    #[test]
    fn undress_algebra() {
        let y = Mat2::new(c(1.5, 0.2), c(-0.3, 0.7), c(0.1, -2.0), c(0.4, 0.4));
        let g = c(0.3, -1.1);
        let psi = undress_value(&y, 0, g, 0.0).unwrap();
        assert!((psi - y).max_abs() < 1e-15);
        let psi = undress_value(&y, 5, g, 1.7).unwrap();
        assert!((psi.det() - y.det()).norm() < 1e-12 * y.det().norm().max(1.0));
        assert!(matches!(undress_value(&y, 1000, c(1.0, 0.0), 0.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn field_csv() {
        let s = g_field_csv(&disk_v1(), &[c(0.1, 0.1), c(2.0, 0.0)]).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "x,y,re_g,im_g,region");
        assert!(lines[1].ends_with(",1") && lines[2].ends_with(",0"));
    }
}
