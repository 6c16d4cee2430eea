//! Planar domains: disks and interiors of polynomial curves, with boundary
//! and area quadrature.
//!
//! A polynomial curve is the image of the unit circle under
//! `h(w) = r w + a₀ + a₁ w⁻¹ + … + a_n w⁻ⁿ`. Every boundary handled here is
//! stored as a finite Fourier series in the parameter θ, so boundary
//! points, tangents and the antiderivative of `z̄ dz` are exact.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gauss, gauss_legendre_unit, TrigPoly};

pub const DEFAULT_NODE_COUNT: usize = 512;
const SIMPLICITY_SAMPLES: usize = 512;
const BOUNDARY_TOL: f64 = 1e-12;

/// Boundary curve `θ ↦ h(e^{iθ})`, traced counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCurve {
    r: f64,
    a: Vec<Complex64>,
    node_count: usize,
    reversed: bool,
    series: TrigPoly,
    tangent: TrigPoly,
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    r: f64,
    #[serde(with = "crate::cpair::vec", default)]
    a: Vec<Complex64>,
    #[serde(default = "default_node_count")]
    node_count: usize,
}

fn default_node_count() -> usize {
    DEFAULT_NODE_COUNT
}

impl Serialize for PolynomialCurve {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CurveJson { r: self.r, a: self.a.clone(), node_count: self.node_count }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolynomialCurve {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CurveJson::deserialize(d)?;
        PolynomialCurve::new(j.r, j.a, j.node_count).map_err(serde::de::Error::custom)
    }
}

impl PolynomialCurve {
    /// Validated constructor: checks `r > 0`, normalizes the orientation to
    /// counterclockwise and rejects self-intersecting curves.
    pub fn new(r: f64, a: Vec<Complex64>, node_count: usize) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("curve needs r > 0, got {r}")));
        }
        if a.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::invalid("curve coefficients must be finite"));
        }
        if node_count < 16 {
            return Err(Error::invalid(format!("node_count must be >= 16, got {node_count}")));
        }
        let mut curve = Self::raw(r, a, node_count);
        if curve.signed_area() < 0.0 {
            curve = curve.with_orientation(true);
        }
        curve.check_simple()?;
        Ok(curve)
    }

    /// Unchecked constructor used inside iterative solvers.
    pub(crate) fn raw(r: f64, a: Vec<Complex64>, node_count: usize) -> Self {
        let n = a.len();
        // z(θ) = r e^{iθ} + Σ a_k e^{-ikθ}: Fourier indices -n..=1
        let lo = if n == 0 { 1 } else { -(n as i64 - 1) };
        let len = (2 - lo) as usize;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        coeffs[(1 - lo) as usize] = Complex64::new(r, 0.0);
        for (k, c) in a.iter().enumerate() {
            coeffs[(-(k as i64) - lo) as usize] += c;
        }
        let series = TrigPoly::new(lo, coeffs);
        let tangent = series.derivative();
        PolynomialCurve { r, a, node_count, reversed: false, series, tangent }
    }

    fn with_orientation(self, reversed: bool) -> Self {
        let base = Self::raw(self.r, self.a, self.node_count);
        if !reversed {
            return base;
        }
        // θ ↦ -θ flips every Fourier index
        let hi = base.series.lowest() + base.series.terms().count() as i64 - 1;
        let coeffs: Vec<Complex64> = (base.series.lowest()..=hi).rev().map(|k| base.series.coeff(k)).collect();
        let series = TrigPoly::new(-hi, coeffs);
        let tangent = series.derivative();
        PolynomialCurve { reversed: true, series, tangent, ..base }
    }

    /// Circle of radius `radius` about `center`.
    pub fn circle(center: Complex64, radius: f64, node_count: usize) -> Result<Self> {
        Self::new(radius, vec![center], node_count)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.a
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn with_node_count(&self, node_count: usize) -> Self {
        PolynomialCurve { node_count, ..self.clone() }
    }

    /// True when the parameter had to be reversed to trace the curve
    /// counterclockwise.
    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// Fourier series of `θ ↦ z(θ)`.
    pub fn series(&self) -> &TrigPoly {
        &self.series
    }

    /// Boundary point at parameter θ.
    pub fn point(&self, theta: f64) -> Complex64 {
        self.series.eval(theta)
    }

    /// `dz/dθ` at parameter θ.
    pub fn tangent(&self, theta: f64) -> Complex64 {
        self.tangent.eval(theta)
    }

    /// Outward unit normal at θ.
    pub fn outward_normal(&self, theta: f64) -> Complex64 {
        let t = self.tangent(theta);
        -Complex64::i() * t / t.norm()
    }

    pub fn samples(&self, m: usize) -> Vec<Complex64> {
        let h = 2.0 * PI / m as f64;
        (0..m).map(|j| self.point(h * j as f64)).collect()
    }

    fn signed_area(&self) -> f64 {
        let m = self.node_count.max(64);
        let h = 2.0 * PI / m as f64;
        let s: Complex64 = (0..m)
            .map(|j| {
                let t = h * j as f64;
                self.point(t).conj() * self.tangent(t)
            })
            .sum();
        0.5 * (s * h).im
    }

    /// Pairwise segment-intersection test on the sampled 512-gon.
    pub fn check_simple(&self) -> Result<()> {
        let p = self.samples(SIMPLICITY_SAMPLES);
        let m = p.len();
        let seg = |i: usize| (p[i], p[(i + 1) % m]);
        let boxes: Vec<[f64; 4]> = (0..m)
            .map(|i| {
                let (a, b) = seg(i);
                [a.re.min(b.re), a.re.max(b.re), a.im.min(b.im), a.im.max(b.im)]
            })
            .collect();
        for i in 0..m {
            for j in (i + 2)..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let (bi, bj) = (&boxes[i], &boxes[j]);
                if bi[1] < bj[0] || bj[1] < bi[0] || bi[3] < bj[2] || bj[3] < bi[2] {
                    continue;
                }
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                if segments_cross(a, b, c, d) {
                    return Err(Error::SelfIntersection(i, j));
                }
            }
        }
        Ok(())
    }

    /// Winding number of the curve about `z` from the contour integral
    /// `(1/2πi)∮ dζ/(ζ - z)`; accurate close to the curve.
    pub fn winding(&self, z: Complex64) -> f64 {
        let f = |t: f64| self.tangent(t) / (self.point(t) - z);
        let v = adaptive_gauss(&f, 0.0, 2.0 * PI, 32, 1e-10);
        (v / Complex64::new(0.0, 2.0 * PI)).re
    }

    /// Closest boundary parameter and distance.
    pub fn nearest(&self, z: Complex64) -> (f64, f64) {
        let m = self.node_count.max(256);
        let h = 2.0 * PI / m as f64;
        let (mut best_t, mut best_d) = (0.0, f64::INFINITY);
        for j in 0..m {
            let t = h * j as f64;
            let d = (self.point(t) - z).norm();
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        let second = self.tangent.derivative();
        let mut t = best_t;
        for _ in 0..20 {
            let diff = self.point(t) - z;
            let dz = self.tangent(t);
            let g = (diff.conj() * dz).re;
            let gp = dz.norm_sqr() + (diff.conj() * second.eval(t)).re;
            if gp <= 0.0 {
                break;
            }
            let step = (g / gp).clamp(-h, h);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let d = (self.point(t) - z).norm();
        if d < best_d {
            (t.rem_euclid(2.0 * PI), d)
        } else {
            (best_t, best_d)
        }
    }

    /// Largest modulus over the sampled boundary.
    pub fn max_modulus(&self) -> f64 {
        self.samples(self.node_count).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    ((b - a).conj() * (c - a)).im
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0
}

/// Evaluates `h(e^{iθ}) = r e^{iθ} + Σ_k a_k e^{-ikθ}`.
pub fn curve_point(curve: &PolynomialCurve, theta: f64) -> Complex64 {
    curve.point(theta)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk { center: Complex64, radius: f64 },
    CurveInterior(PolynomialCurve),
}

/// A bounded, simply connected domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    shape: Shape,
    label: String,
    boundary: PolynomialCurve,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
enum DomainJson {
    Disk {
        #[serde(with = "crate::cpair")]
        center: Complex64,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Curve {
        curve: PolynomialCurve,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

impl Serialize for Domain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let label = Some(self.label.clone());
        match &self.shape {
            Shape::Disk { center, radius } => {
                DomainJson::Disk { center: *center, radius: *radius, label }.serialize(s)
            }
            Shape::CurveInterior(c) => DomainJson::Curve { curve: c.clone(), label }.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dom = match DomainJson::deserialize(d)? {
            DomainJson::Disk { center, radius, label } => {
                Domain::disk(center, radius).map(|d| d.labeled(label.unwrap_or_else(|| "disk".into())))
            }
            DomainJson::Curve { curve, label } => {
                Ok(Domain::curve(curve).labeled(label.unwrap_or_else(|| "curve".into())))
            }
        };
        dom.map_err(serde::de::Error::custom)
    }
}

impl Domain {
    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("disk radius must be > 0, got {radius}")));
        }
        let boundary = PolynomialCurve::raw(radius, vec![center], DEFAULT_NODE_COUNT);
        Ok(Domain { shape: Shape::Disk { center, radius }, label: "disk".into(), boundary })
    }

    pub fn curve(curve: PolynomialCurve) -> Self {
        Domain { boundary: curve.clone(), shape: Shape::CurveInterior(curve), label: "curve".into() }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// The boundary as a counterclockwise polynomial curve (a disk is the
    /// degree-zero curve `h(w) = R w + c`).
    pub fn boundary(&self) -> &PolynomialCurve {
        &self.boundary
    }

    pub fn area(&self) -> f64 {
        area(self)
    }

    pub fn contains(&self, z: Complex64) -> Result<bool> {
        contains(self, z)
    }

    pub fn centroid(&self) -> Complex64 {
        match &self.shape {
            Shape::Disk { center, .. } => *center,
            Shape::CurveInterior(curve) => {
                // ∬ ζ d²ζ = (1/2i) ∮ |ζ|² dζ
                let rule = boundary_quadrature(curve);
                let s: Complex64 = rule.nodes.iter().zip(&rule.dz).map(|(z, dz)| z.norm_sqr() * dz).sum();
                s / Complex64::new(0.0, 2.0) / self.area()
            }
        }
    }

    pub fn distance_to_boundary(&self, z: Complex64) -> f64 {
        match &self.shape {
            Shape::Disk { center, radius } => ((z - center).norm() - radius).abs(),
            Shape::CurveInterior(c) => c.nearest(z).1,
        }
    }

    /// Axis-aligned bounding box `[xmin, xmax, ymin, ymax]`.
    pub fn bounding_box(&self) -> [f64; 4] {
        match &self.shape {
            Shape::Disk { center, radius } => {
                [center.re - radius, center.re + radius, center.im - radius, center.im + radius]
            }
            Shape::CurveInterior(c) => {
                let pts = c.samples(c.node_count().max(1024));
                let pad = 1e-3 * c.max_modulus();
                let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
                for p in pts {
                    b[0] = b[0].min(p.re);
                    b[1] = b[1].max(p.re);
                    b[2] = b[2].min(p.im);
                    b[3] = b[3].max(p.im);
                }
                [b[0] - pad, b[1] + pad, b[2] - pad, b[3] + pad]
            }
        }
    }
}

/// Enclosed area: πR² for a disk, `(1/2i)∮ z̄ dz` by the periodic trapezoid
/// rule for a curve.
pub fn area(domain: &Domain) -> f64 {
    match &domain.shape {
        Shape::Disk { radius, .. } => PI * radius * radius,
        Shape::CurveInterior(c) => c.signed_area(),
    }
}

/// Membership test; `Err(OnBoundary)` within 1e-12 of the boundary.
pub fn contains(domain: &Domain, z: Complex64) -> Result<bool> {
    match &domain.shape {
        Shape::Disk { center, radius } => {
            let d = (z - center).norm() - radius;
            if d.abs() < BOUNDARY_TOL {
                Err(Error::OnBoundary(format!("{z}"), BOUNDARY_TOL))
            } else {
                Ok(d < 0.0)
            }
        }
        Shape::CurveInterior(c) => {
            let m = c.node_count().max(1024);
            let poly = c.samples(m);
            let (inside, dist) = polygon_winding(&poly, z);
            let scale = c.max_modulus();
            if dist > 1e-2 * scale {
                return Ok(inside);
            }
            let (_, d) = c.nearest(z);
            if d < BOUNDARY_TOL {
                return Err(Error::OnBoundary(format!("{z}"), BOUNDARY_TOL));
            }
            Ok(c.winding(z) > 0.5)
        }
    }
}

/// Even-odd crossing test plus distance from `z` to the polygon.
pub(crate) fn polygon_winding(poly: &[Complex64], z: Complex64) -> (bool, f64) {
    let m = poly.len();
    let mut inside = false;
    let mut dist = f64::INFINITY;
    for i in 0..m {
        let a = poly[i];
        let b = poly[(i + 1) % m];
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if x > z.re {
                inside = !inside;
            }
        }
        let ab = b - a;
        let t = (((z - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
        dist = dist.min((a + ab * t - z).norm());
    }
    (inside, dist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    Boundary,
    Area,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AreaMode {
    StarFibration,
    MaskedGrid,
}

/// Nodes and weights of a quadrature rule. Boundary rules carry the complex
/// line elements `dz_j` separately; their `weights` are the θ spacings.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub dz: Vec<Complex64>,
    pub resolution: (usize, usize),
    pub mode: Option<AreaMode>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_j f(z_j)` for an area rule.
    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(z, w)| f(*z) * *w).sum()
    }

    /// `Σ f(z_j) dz_j` for a boundary rule.
    pub fn contour(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.nodes.iter().zip(&self.dz).map(|(z, dz)| f(*z) * dz).sum()
    }

    pub fn describe(&self) -> String {
        match (self.kind, self.mode) {
            (RuleKind::Boundary, _) => format!("boundary trapezoid M={}", self.resolution.0),
            (RuleKind::Area, Some(AreaMode::MaskedGrid)) => {
                format!("masked grid {}x{}", self.resolution.0, self.resolution.1)
            }
            (RuleKind::Area, _) => {
                format!("star fibration {}x{}", self.resolution.0, self.resolution.1)
            }
        }
    }
}

/// Uniform trapezoid nodes `θ_j = 2πj/M` with `dz_j = z'(θ_j)·2π/M`.
pub fn boundary_quadrature(curve: &PolynomialCurve) -> QuadratureRule {
    let m = curve.node_count();
    let h = 2.0 * PI / m as f64;
    let thetas = (0..m).map(|j| h * j as f64);
    QuadratureRule {
        kind: RuleKind::Boundary,
        nodes: thetas.clone().map(|t| curve.point(t)).collect(),
        weights: vec![h; m],
        dz: thetas.map(|t| curve.tangent(t) * h).collect(),
        resolution: (m, 1),
        mode: None,
    }
}

/// Tensor rule on a domain that is star-shaped about a chosen center:
/// `ζ(ρ, θ) = c + ρ (b(θ) - c)`, Gauss-Legendre in ρ ∈ [0, 1] and the
/// periodic trapezoid rule in θ, weighted by the exact Jacobian
/// `ρ·Im(conj(b - c) b'(θ))`.
///
/// Centering the rule at an evaluation point `z` makes `|ζ - z|` carry a
/// factor ρ, which cancels the Cauchy kernel `1/(ζ - z)`.
#[derive(Debug, Clone)]
pub struct StarFibration {
    rho: Vec<f64>,
    rho_w: Vec<f64>,
    bnd: Vec<Complex64>,
    dbnd: Vec<Complex64>,
    dtheta: f64,
}

impl StarFibration {
    pub fn new(domain: &Domain, radial: usize, angular: usize) -> Self {
        let (rho, rho_w) = gauss_legendre_unit(radial);
        let b = domain.boundary();
        let h = 2.0 * PI / angular as f64;
        StarFibration {
            rho,
            rho_w,
            bnd: (0..angular).map(|j| b.point(h * j as f64)).collect(),
            dbnd: (0..angular).map(|j| b.tangent(h * j as f64)).collect(),
            dtheta: h,
        }
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.rho.len(), self.bnd.len())
    }

    pub fn boundary_samples(&self) -> (&[Complex64], &[Complex64], f64) {
        (&self.bnd, &self.dbnd, self.dtheta)
    }

    /// Per-angle Jacobian factors `Im(conj(b - c) b')·Δθ`; fails when a ray
    /// from `center` meets the boundary more than once.
    pub fn angular_weights(&self, center: Complex64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.bnd.len());
        for (b, db) in self.bnd.iter().zip(&self.dbnd) {
            let j = ((b - center).conj() * db).im;
            if j <= 0.0 {
                return Err(Error::NotStarShaped(format!("{center}")));
            }
            out.push(j * self.dtheta);
        }
        Ok(out)
    }

    pub fn rule_about(&self, center: Complex64) -> Result<QuadratureRule> {
        let ang = self.angular_weights(center)?;
        let mut nodes = Vec::with_capacity(self.rho.len() * self.bnd.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (b, ja) in self.bnd.iter().zip(&ang) {
            for (r, wr) in self.rho.iter().zip(&self.rho_w) {
                nodes.push(center + (b - center) * *r);
                weights.push(wr * r * ja);
            }
        }
        Ok(QuadratureRule {
            kind: RuleKind::Area,
            nodes,
            weights,
            dz: Vec::new(),
            resolution: self.resolution(),
            mode: Some(AreaMode::StarFibration),
        })
    }

    /// `∬ f d²ζ` with the rule centered at `center`.
    pub fn integrate_about(
        &self,
        center: Complex64,
        f: impl Fn(Complex64) -> Complex64,
    ) -> Result<Complex64> {
        let ang = self.angular_weights(center)?;
        let mut total = Complex64::new(0.0, 0.0);
        for (b, ja) in self.bnd.iter().zip(&ang) {
            let mut s = Complex64::new(0.0, 0.0);
            for (r, wr) in self.rho.iter().zip(&self.rho_w) {
                s += f(center + (b - center) * *r) * (wr * r);
            }
            total += s * *ja;
        }
        Ok(total)
    }

    /// Cauchy-kernel integral `∬ f(ζ)/(ζ - z) d²ζ` with the rule centered at
    /// `z` itself (z must be interior and the domain star-shaped about it).
    pub fn cauchy_about(&self, z: Complex64, f: impl Fn(Complex64) -> Complex64) -> Result<Complex64> {
        let ang = self.angular_weights(z)?;
        let mut total = Complex64::new(0.0, 0.0);
        for (b, ja) in self.bnd.iter().zip(&ang) {
            let d = b - z;
            let mut s = Complex64::new(0.0, 0.0);
            for (r, wr) in self.rho.iter().zip(&self.rho_w) {
                // ρ from the Jacobian cancels 1/|ζ - z| = 1/(ρ|d|)
                s += f(z + d * *r) * *wr;
            }
            total += s * *ja / d;
        }
        Ok(total)
    }
}

/// Area quadrature over a domain.
///
/// `StarFibration` centers at the centroid and uses `resolution =
/// (radial, angular)`; `MaskedGrid` is the midpoint rule on the bounding
/// box restricted by [`contains`], `resolution = (nx, ny)`.
pub fn area_quadrature(domain: &Domain, mode: AreaMode, resolution: (usize, usize)) -> Result<QuadratureRule> {
    match mode {
        AreaMode::StarFibration => {
            StarFibration::new(domain, resolution.0, resolution.1).rule_about(domain.centroid())
        }
        AreaMode::MaskedGrid => {
            let [x0, x1, y0, y1] = domain.bounding_box();
            let (nx, ny) = resolution;
            let dx = (x1 - x0) / nx as f64;
            let dy = (y1 - y0) / ny as f64;
            let mut nodes = Vec::new();
            for i in 0..nx {
                for j in 0..ny {
                    let z = Complex64::new(x0 + (i as f64 + 0.5) * dx, y0 + (j as f64 + 0.5) * dy);
                    if domain.contains(z).unwrap_or(false) {
                        nodes.push(z);
                    }
                }
            }
            let weights = vec![dx * dy; nodes.len()];
            Ok(QuadratureRule {
                kind: RuleKind::Area,
                nodes,
                weights,
                dz: Vec::new(),
                resolution,
                mode: Some(AreaMode::MaskedGrid),
            })
        }
    }
}

/// Star rule when the domain allows it, masked grid 400×400 otherwise.
pub fn default_area_quadrature(domain: &Domain, resolution: (usize, usize)) -> QuadratureRule {
    area_quadrature(domain, AreaMode::StarFibration, resolution)
        .or_else(|_| area_quadrature(domain, AreaMode::MaskedGrid, (400, 400)))
        .expect("masked grid never fails")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const ELL_R: f64 = 1.091_089_451_179_962;
    const ELL_A1: f64 = 0.436_435_780_471_984_8;

    fn ellipse(m: usize) -> PolynomialCurve {
        PolynomialCurve::new(ELL_R, vec![c(0.0, 0.0), c(ELL_A1, 0.0)], m).unwrap()
    }

    fn unit_circle(m: usize) -> PolynomialCurve {
        PolynomialCurve::new(1.0, vec![], m).unwrap()
    }

    #[test]
    fn curve_point_examples() {
        let u = unit_circle(64);
        assert!((curve_point(&u, 0.0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((curve_point(&u, PI / 2.0) - c(0.0, 1.0)).norm() < 1e-15);
        let e = ellipse(512);
        assert!((curve_point(&e, 0.0).re - 1.527_525_231_651_947).abs() < 1e-7);
        assert!((curve_point(&e, 0.3) - curve_point(&e, 0.3 + 2.0 * PI)).norm() < 1e-14);
    }

    #[test]
    fn area_examples() {
        assert!((Domain::disk(c(0.0, 0.0), 1.0).unwrap().area() - PI).abs() < 1e-15);
        assert!((Domain::curve(unit_circle(512)).area() - PI).abs() < 1e-12);
        assert!((Domain::curve(ellipse(512)).area() - PI).abs() < 1e-8);
    }

    #[test]
    fn contains_examples() {
        let d = Domain::disk(c(0.0, 0.0), 1.0).unwrap();
        assert!(d.contains(c(0.0, 0.0)).unwrap());
        assert!(!d.contains(c(2.0, 0.0)).unwrap());
        assert!(d.contains(c(1.0, 0.0)).is_err());
        let e = Domain::curve(ellipse(512));
        assert!(e.contains(c(1.4, 0.0)).unwrap());
        assert!(!e.contains(c(0.0, 0.7)).unwrap());
        assert!(e.contains(c(0.0, 0.65)).unwrap());
        let p = e.boundary().point(1.0);
        assert!(e.contains(p).is_err());
    }

    #[test]
    fn near_boundary_membership_is_resolved_by_winding() {
        let e = Domain::curve(ellipse(512));
        let curve = e.boundary();
        for k in 0..12 {
            let t = 0.37 + k as f64 * 0.5;
            let p = curve.point(t);
            let n = curve.outward_normal(t);
            assert!(e.contains(p - n * 1e-7).unwrap());
            assert!(!e.contains(p + n * 1e-7).unwrap());
        }
    }

    #[test]
    fn boundary_quadrature_examples() {
        let rule = boundary_quadrature(&unit_circle(64));
        let zbar = rule.contour(|z| z.conj());
        assert!((zbar - c(0.0, 2.0 * PI)).norm() < 1e-13);
        assert!(rule.contour(|z| z).norm() < 1e-13);
        let rule = boundary_quadrature(&ellipse(256));
        let t2 = rule.contour(|z| z.conj() / (z * z)) / c(0.0, 4.0 * PI);
        assert!((t2 - c(0.2, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn holomorphic_monomials_integrate_to_zero() {
        let curves = [
            unit_circle(128),
            ellipse(128),
            PolynomialCurve::new(1.0, vec![c(0.1, -0.2), c(0.0, 0.1), c(0.05, 0.0), c(-0.03, 0.02)], 128).unwrap(),
        ];
        for curve in &curves {
            let rule = boundary_quadrature(curve);
            for m in 0..=5 {
                assert!(rule.contour(|z| z.powu(m)).norm() < 1e-12, "m={m}");
            }
            let signed = (rule.contour(|z| z.conj()) / c(0.0, 2.0)).re;
            assert!((signed - Domain::curve(curve.clone()).area()).abs() < 1e-12);
        }
    }

    #[test]
    fn orientation_is_normalized() {
        // |a₁| > r traces the ellipse clockwise
        let curve = PolynomialCurve::new(0.5, vec![c(0.0, 0.0), c(1.0, 0.0)], 256).unwrap();
        assert!(curve.is_reversed());
        let d = Domain::curve(curve);
        assert!((d.area() - PI * 0.75).abs() < 1e-12);
        assert!(d.contains(c(0.0, 0.0)).unwrap());
    }

    #[test]
    fn self_intersection_is_rejected() {
        // strong w^{-2} term produces loops
        let err = PolynomialCurve::new(1.0, vec![c(0.0, 0.0), c(0.0, 0.0), c(0.9, 0.0)], 512).unwrap_err();
        assert!(matches!(err, Error::SelfIntersection(_, _)));
        assert!(PolynomialCurve::new(0.0, vec![], 64).is_err());
    }

    #[test]
    fn star_fibration_examples() {
        let d = Domain::disk(c(0.0, 0.0), 1.0).unwrap();
        let rule = area_quadrature(&d, AreaMode::StarFibration, (32, 64)).unwrap();
        assert!((rule.weights.iter().sum::<f64>() - PI).abs() < 1e-12);
        let m2 = rule.integrate(|z| c(z.norm_sqr(), 0.0));
        assert!((m2.re - PI / 2.0).abs() < 1e-12);
        assert!(rule.weights.iter().all(|w| *w >= 0.0));
        let grid = area_quadrature(&d, AreaMode::MaskedGrid, (400, 400)).unwrap();
        assert!((grid.weights.iter().sum::<f64>() - PI).abs() < 2e-3);
    }

    #[test]
    fn star_and_grid_agree_on_gaussian() {
        let domains = [
            Domain::disk(c(0.3, -0.2), 1.5).unwrap(),
            Domain::curve(ellipse(512)),
        ];
        for d in &domains {
            let f = |z: Complex64| c((-z.norm_sqr()).exp(), 0.0);
            let star = area_quadrature(d, AreaMode::StarFibration, (48, 128)).unwrap().integrate(f);
            let grid = area_quadrature(d, AreaMode::MaskedGrid, (400, 400)).unwrap().integrate(f);
            assert!((star - grid).norm() < 2e-3, "{star} vs {grid}");
        }
    }

    #[test]
    fn non_star_center_is_rejected() {
        let d = Domain::disk(c(0.0, 0.0), 1.0).unwrap();
        let fib = StarFibration::new(&d, 8, 32);
        assert!(fib.rule_about(c(2.0, 0.0)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = Domain::curve(ellipse(256));
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"shape\":\"curve\""));
        let back: Domain = serde_json::from_str(&s).unwrap();
        assert_eq!(back.boundary().coefficients(), d.boundary().coefficients());
        let disk: Domain = serde_json::from_str(r#"{"shape":"disk","center":[0,0],"radius":3}"#).unwrap();
        assert!((disk.area() - 9.0 * PI).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn membership_matches_dense_polygon(seed in 0u64..1000) {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let curve = PolynomialCurve::new(
                    1.0,
                    vec![c(0.0, 0.0), c(rng.gen_range(-0.2..0.2), 0.0), c(0.0, rng.gen_range(-0.1..0.1))],
                    512,
                ).unwrap();
                let d = Domain::curve(curve.clone());
                let dense = curve.samples(8192);
                for _ in 0..60 {
                    let z = c(rng.gen_range(-1.6..1.6), rng.gen_range(-1.6..1.6));
                    let (inside, dist) = polygon_winding(&dense, z);
                    if dist > 1e-5 {
                        prop_assert_eq!(d.contains(z).unwrap(), inside);
                    }
                }
            }
        }
    }
}
