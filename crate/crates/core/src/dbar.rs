//! The matrix `Y_n` built from planar orthogonal polynomials, its
//! ∂̄-problem `∂̄Y = conj(Y)(I − G)`, area Cauchy transforms and the
//! explicit model solutions `Ψ₀`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Domain, QuadratureRule, StarFibration};
use crate::mat2::Mat2;
use crate::orthopoly::{eval_P, OrthoPolySet};
use crate::potential::Weight;
use crate::quadrature::adaptive_gauss;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Points closer than this to the boundary are rejected by
/// [`cauchy_indicator`].
pub const INDICATOR_TOL: f64 = 1e-10;

/// Quadrature data for `(1/π)∬_D f(ζ)/(ζ − z) d²ζ`.
///
/// Interior points use the star rule re-centered at `z`, whose radial
/// Jacobian cancels the kernel. Exterior points use the rule centered at
/// the centroid. When the domain is not star-shaped about an interior
/// `z`, the centroid rule is used with the subtraction `f − f(z)` and the
/// exact indicator transform.
#[derive(Debug, Clone)]
pub struct CauchyRule {
    domain: Domain,
    fib: StarFibration,
    plain: QuadratureRule,
}

impl CauchyRule {
    pub fn new(domain: &Domain, radial: usize, angular: usize) -> Self {
        let fib = StarFibration::new(domain, radial, angular);
        let plain = fib
            .rule_about(domain.centroid())
            .unwrap_or_else(|_| crate::geometry::default_area_quadrature(domain, (radial, angular)));
        CauchyRule { domain: domain.clone(), fib, plain }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn describe(&self) -> String {
        let (r, a) = self.fib.resolution();
        format!("star fibration {r}x{a} centered at the evaluation point")
    }
}

/// `(1/π)∬_D f(ζ)/(ζ − z) d²ζ`.
pub fn cauchy_transform(f: &(dyn Fn(Complex64) -> Complex64 + Sync), rule: &CauchyRule, z: Complex64) -> Result<Complex64> {
    let inside = match rule.domain.contains(z) {
        Ok(v) => v,
        Err(_) => return Err(Error::OnBoundary(format!("{z}"), 1e-12)),
    };
    if !inside {
        let s: Complex64 = rule.plain.nodes.iter().zip(&rule.plain.weights).map(|(p, w)| f(*p) * *w / (p - z)).sum();
        return Ok(s / PI);
    }
    match rule.fib.cauchy_about(z, f) {
        Ok(v) => Ok(v / PI),
        Err(Error::NotStarShaped(_)) => {
            let fz = f(z);
            let s: Complex64 = rule
                .plain
                .nodes
                .iter()
                .zip(&rule.plain.weights)
                .map(|(p, w)| if *p == z { ZERO } else { (f(*p) - fz) * *w / (p - z) })
                .sum();
            Ok(s / PI + fz * cauchy_indicator(&rule.domain, z)?)
        }
        Err(e) => Err(e),
    }
}

/// `(1/π)∬_D d²ζ/(ζ − z) = S(z) − z̄·[z ∈ D]` with
/// `S(z) = (1/2πi)∮ ζ̄ dζ/(ζ − z)`.
pub fn cauchy_indicator(domain: &Domain, z: Complex64) -> Result<Complex64> {
    if domain.distance_to_boundary(z) < INDICATOR_TOL {
        return Err(Error::OnBoundary(format!("{z}"), INDICATOR_TOL));
    }
    let inside = domain.contains(z).map_err(|_| Error::OnBoundary(format!("{z}"), INDICATOR_TOL))?;
    let c = domain.boundary();
    let g = |t: f64| {
        let p = c.point(t);
        p.conj() * c.tangent(t) / (p - z)
    };
    let s = adaptive_gauss(&g, 0.0, 2.0 * PI, 32, 1e-14) / Complex64::new(0.0, 2.0 * PI);
    Ok(if inside { s - z.conj() } else { s })
}

/// Pointwise evaluator of `Y_n`.
#[derive(Debug, Clone)]
pub struct YMatrix<'a> {
    pub n: usize,
    pub weight: &'a Weight,
    pub polys: &'a OrthoPolySet,
    pub cauchy_rule: CauchyRule,
}

impl<'a> YMatrix<'a> {
    pub fn new(n: usize, weight: &'a Weight, polys: &'a OrthoPolySet, radial: usize, angular: usize) -> Result<Self> {
        if n == 0 || n > polys.n_max {
            return Err(Error::IndexOutOfRange { index: n, max: polys.n_max });
        }
        Ok(YMatrix { n, weight, polys, cauchy_rule: CauchyRule::new(&weight.cutoff, radial, angular) })
    }

    /// Default resolution tuned for degrees up to about 12.
    pub fn with_default_rule(n: usize, weight: &'a Weight, polys: &'a OrthoPolySet) -> Result<Self> {
        Self::new(n, weight, polys, 64 + 4 * n, 256)
    }

    pub fn eval(&self, z: Complex64) -> Result<Mat2> {
        let n = self.n;
        let h = self.polys.norms[n - 1];
        let w = self.weight;
        let p = self.polys;
        let fn_ = |s: Complex64| eval_P(p, n, s).expect("n checked").conj() * w.density(s);
        let fm = |s: Complex64| eval_P(p, n - 1, s).expect("n checked").conj() * w.density(s);
        let y12 = cauchy_transform(&fn_, &self.cauchy_rule, z)?;
        let y22 = cauchy_transform(&fm, &self.cauchy_rule, z)? * (-PI / h);
        let y11 = eval_P(p, n, z)?;
        let y21 = eval_P(p, n - 1, z)? * (-PI / h);
        Ok(Mat2::new(y11, y12, y21, y22))
    }
}

/// Entry formula for `Y_n(z)` with a freshly built default rule.
pub fn assemble_y(n: usize, w: &Weight, polys: &OrthoPolySet, z: Complex64) -> Result<Mat2> {
    YMatrix::with_default_rule(n, w, polys)?.eval(z)
}

/// `[[1, e^{−NV}χ_D], [0, 1]]`.
pub fn jump_matrix_g(w: &Weight, z: Complex64) -> Mat2 {
    Mat2::new(ONE, Complex64::new(w.eval(z), 0.0), ZERO, ONE)
}

/// Central-difference `∂̄F = ((F(z+h) − F(z−h)) + i(F(z+ih) − F(z−ih)))/(4h)`.
pub fn dbar_fd(f: &dyn Fn(Complex64) -> Result<Mat2>, z: Complex64, step: f64) -> Result<Mat2> {
    if !(step > 0.0) {
        return Err(Error::invalid(format!("fd step must be > 0, got {step}")));
    }
    let h = Complex64::new(step, 0.0);
    let ih = Complex64::new(0.0, step);
    let dx = f(z + h)? - f(z - h)?;
    let dy = f(z + ih)? - f(z - ih)?;
    Ok((dx + dy.scale(Complex64::new(0.0, 1.0))).scale(Complex64::new(0.25 / step, 0.0)))
}

/// Scalar form of [`dbar_fd`].
pub fn dbar_fd_scalar(f: &dyn Fn(Complex64) -> Complex64, z: Complex64, step: f64) -> Complex64 {
    let h = Complex64::new(step, 0.0);
    let ih = Complex64::new(0.0, step);
    ((f(z + h) - f(z - h)) + Complex64::new(0.0, 1.0) * (f(z + ih) - f(z - ih))) / (4.0 * step)
}

#[derive(Debug, Clone, Serialize)]
pub struct PointResidual {
    #[serde(with = "crate::cpair")]
    pub z: Complex64,
    pub fd: [[[f64; 2]; 2]; 2],
    pub rhs: [[[f64; 2]; 2]; 2],
    pub abs_err: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DbarResidualReport {
    pub points: Vec<PointResidual>,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub fd_step: f64,
    pub quadrature: String,
}

fn as_pairs(m: &Mat2) -> [[[f64; 2]; 2]; 2] {
    let e = |i: usize, j: usize| [m.get(i, j).re, m.get(i, j).im];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

impl DbarResidualReport {
    /// Assembles the report from aligned `(z, fd, rhs)` triples. The
    /// relative error at a point is `max|fd − rhs| / max|rhs|` over the
    /// four entries; points with a vanishing right-hand side contribute
    /// their absolute error instead.
    pub fn from_values(values: Vec<(Complex64, Mat2, Mat2)>, fd_step: f64, quadrature: String) -> Self {
        let mut points = Vec::with_capacity(values.len());
        let (mut max_abs, mut max_rel) = (0.0f64, 0.0f64);
        for (z, fd, rhs) in values {
            let abs_err = (fd - rhs).max_abs();
            let scale = rhs.max_abs();
            let rel_err = if scale > 0.0 { abs_err / scale } else { abs_err };
            max_abs = max_abs.max(abs_err);
            max_rel = max_rel.max(rel_err);
            points.push(PointResidual { z, fd: as_pairs(&fd), rhs: as_pairs(&rhs), abs_err, rel_err });
        }
        DbarResidualReport { points, max_abs_err: max_abs, max_rel_err: max_rel, fd_step, quadrature }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    /// Rows `x,y,entry,abs_err` per point and matrix entry.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,entry,abs_err\n");
        for p in &self.points {
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let d = Complex64::new(p.fd[i][j][0] - p.rhs[i][j][0], p.fd[i][j][1] - p.rhs[i][j][1]);
                s.push_str(&format!("{:.16e},{:.16e},{}{},{:.16e}\n", p.z.re, p.z.im, i + 1, j + 1, d.norm()));
            }
        }
        s
    }
}

/// Checks `∂̄Y_n = conj(Y_n)(I − G)` by central differences at `points`,
/// each of which must lie farther than `10·step` from `∂D`.
pub fn verify_dbar_problem(
    n: usize,
    w: &Weight,
    polys: &OrthoPolySet,
    points: &[Complex64],
    step: f64,
) -> Result<DbarResidualReport> {
    let y = YMatrix::with_default_rule(n, w, polys)?;
    verify_dbar_with(&y, points, step)
}

pub fn verify_dbar_with(y: &YMatrix<'_>, points: &[Complex64], step: f64) -> Result<DbarResidualReport> {
    for z in points {
        if y.weight.cutoff.distance_to_boundary(*z) <= 10.0 * step {
            return Err(Error::invalid(format!("point {z} lies within 10 steps of the boundary")));
        }
    }
    let values = points
        .par_iter()
        .map(|z| {
            let fd = dbar_fd(&|s| y.eval(s), *z, step)?;
            let rhs = y.eval(*z)?.conj() * (Mat2::identity() - jump_matrix_g(y.weight, *z));
            Ok((*z, fd, rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DbarResidualReport::from_values(values, step, y.cauchy_rule.describe()))
}

/// `Ψ₀ = [[1, (1/π)∬_{D₊} d²ζ/(ζ − z)], [0, 1]]`.
pub fn model_psi0_naive(domain_plus: &Domain, z: Complex64) -> Result<Mat2> {
    Ok(Mat2::new(ONE, cauchy_indicator(domain_plus, z)?, ZERO, ONE))
}

/// Model solution with the Gaussian kernel: off-diagonal entry
/// `(1/π)∬_{D₊} e^{−n|ζ|²/(γt₀)}/(ζ − z) d²ζ`.
pub fn model_psi0_gauss(rule: &CauchyRule, n: usize, gamma: f64, t0: f64, z: Complex64) -> Result<Mat2> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let a = n as f64 / (gamma * t0);
    let f = move |s: Complex64| Complex64::new((-a * s.norm_sqr()).exp(), 0.0);
    Ok(Mat2::new(ONE, cauchy_transform(&f, rule, z)?, ZERO, ONE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PolynomialCurve;
    use crate::orthopoly::{compute_moments, compute_orthopolys, moment_rule};
    use crate::potential::EFPotential;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk(r: f64) -> Domain {
        Domain::disk(c(0.0, 0.0), r).unwrap()
    }

    fn ellipse() -> Domain {
        Domain::curve(PolynomialCurve::new(1.091_089_451_179_962, vec![c(0.0, 0.0), c(0.436_435_780_471_984_8, 0.0)], 512).unwrap())
    }

    fn ginibre_setup(big_n: usize, radius: f64, n_max: usize) -> (Weight, OrthoPolySet) {
        let w = Weight::new(EFPotential::ginibre(1.0), big_n, disk(radius), 1.0).unwrap();
        let set = compute_orthopolys(&compute_moments(&w, n_max, &moment_rule(&w, n_max, 1).unwrap()).unwrap(), big_n)
            .unwrap();
        (w, set)
    }

    // (1/π)∬_{|ζ|<R} e^{-a|ζ|²}/(ζ - z) = -(1/(a z))(1 - e^{-a min(|z|,R)²})
    fn gauss_disk_oracle(a: f64, radius: f64, z: Complex64) -> Complex64 {
        let m = z.norm().min(radius);
        -(1.0 - (-a * m * m).exp()) / (a * z)
    }

    #[test]
    fn cauchy_examples() {
        let rule = CauchyRule::new(&disk(1.0), 48, 128);
        let one = |_: Complex64| ONE;
        assert!(cauchy_transform(&one, &rule, c(0.0, 0.0)).unwrap().norm() < 1e-10);
        assert!((cauchy_transform(&one, &rule, c(2.0, 0.0)).unwrap() + 0.5).norm() < 1e-10);
        assert_eq!(cauchy_transform(&|_| ZERO, &rule, c(0.3, 0.1)).unwrap(), ZERO);
        let z = c(0.3, -0.5);
        assert!((cauchy_transform(&one, &rule, z).unwrap() + z.conj()).norm() < 1e-10);
    }

    #[test]
    fn gaussian_transform_matches_radial_oracle() {
        let rule = CauchyRule::new(&disk(1.5), 64, 128);
        for (k, z) in [c(0.3, 0.2), c(-0.9, 0.7), c(0.0, 1.3), c(2.0, -1.0), c(0.05, 0.0)].iter().enumerate() {
            let a = 1.0 + k as f64;
            let f = move |s: Complex64| Complex64::new((-a * s.norm_sqr()).exp(), 0.0);
            let got = cauchy_transform(&f, &rule, *z).unwrap();
            let want = gauss_disk_oracle(a, 1.5, *z);
            assert!((got - want).norm() < 1e-10, "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn indicator_examples() {
        let d = disk(1.0);
        assert!((cauchy_indicator(&d, c(0.3, 0.4)).unwrap() + c(0.3, -0.4)).norm() < 1e-12);
        assert!((cauchy_indicator(&d, c(0.0, 2.0)).unwrap() - c(0.0, 0.5)).norm() < 1e-12);
        let e = ellipse();
        let far = c(3e4, -2e4);
        let v = cauchy_indicator(&e, far).unwrap() * far;
        assert!((v + e.area() / PI).norm() < 1e-4);
        assert!(cauchy_indicator(&d, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn indicator_matches_area_quadrature_on_ellipse() {
        let e = ellipse();
        let rule = CauchyRule::new(&e, 64, 256);
        let pts = [c(0.2, 0.1), c(-1.2, 0.2), c(0.5, -0.4), c(1.8, 0.0), c(0.0, 1.2), c(-2.0, -1.5)];
        for z in pts {
            let a = cauchy_indicator(&e, z).unwrap();
            let b = cauchy_transform(&|_| ONE, &rule, z).unwrap();
            assert!((a - b).norm() < 1e-6, "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn fd_examples() {
        let z = c(1.0, 1.0);
        assert!((dbar_fd_scalar(&|s| s.conj(), z, 1e-5) - 1.0).norm() < 1e-10);
        assert!(dbar_fd_scalar(&|s| s, z, 1e-5).norm() < 1e-10);
        assert!((dbar_fd_scalar(&|s| Complex64::new(s.norm_sqr(), 0.0), z, 1e-4) - c(1.0, 1.0)).norm() < 1e-8);
    }

    #[test]
    fn jump_matrix_examples() {
        let (w, _) = ginibre_setup(1, 2.0, 0);
        assert_eq!(jump_matrix_g(&w, c(0.0, 0.0)), Mat2::new(ONE, ONE, ZERO, ONE));
        assert!((jump_matrix_g(&w, c(1.0, 0.0)).get(0, 1).re - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(jump_matrix_g(&w, c(3.0, 0.0)), Mat2::identity());
    }

    #[test]
    fn y_entries_and_normalization() {
        let (w, set) = ginibre_setup(2, 3.0, 4);
        let y = YMatrix::with_default_rule(2, &w, &set).unwrap();
        assert!(y.eval(c(0.0, 0.0)).unwrap().get(0, 0).norm() < 1e-12);
        // radial weight: (Y)₁₂(0) vanishes by angular orthogonality
        assert!(y.eval(c(0.0, 0.0)).unwrap().get(0, 1).norm() < 1e-12);
        let z = c(0.7, -0.2);
        let v = y.eval(z).unwrap();
        let ratio = v.get(1, 0) / eval_P(&set, 1, z).unwrap();
        assert!((ratio + PI / set.norms[1]).norm() < 1e-12);

        let y1 = YMatrix::with_default_rule(1, &w, &set).unwrap();
        let big = c(1e6, 0.0);
        let m = y1.eval(big).unwrap();
        let normalized = Mat2::new(m.get(0, 0) / big, m.get(0, 1) * big, m.get(1, 0) / big, m.get(1, 1) * big);
        assert!((normalized - Mat2::identity()).max_abs() < 1e-5);
    }

    #[test]
    fn dbar_residual_ginibre() {
        let (w, set) = ginibre_setup(3, 2.0, 4);
        let pts: Vec<_> = (0..10).map(|k| Complex64::from_polar(0.3 + 0.12 * k as f64, 0.7 * k as f64 + 0.1)).collect();
        let rep = verify_dbar_problem(3, &w, &set, &pts, 1e-4).unwrap();
        assert!(rep.max_rel_err < 1e-4, "{}", rep.max_rel_err);
        let coarse = verify_dbar_problem(3, &w, &set, &pts, 1e-3).unwrap();
        let fine = verify_dbar_problem(3, &w, &set, &pts, 5e-4).unwrap();
        assert!(coarse.max_abs_err / fine.max_abs_err >= 3.5);
        let outside = [c(2.5, 0.0), c(0.0, -3.0)];
        // truncation on the cubic entries is h²|P'''|/6, so use a smaller step
        let rep = verify_dbar_problem(3, &w, &set, &outside, 1e-5).unwrap();
        assert!(rep.max_abs_err < 1e-8, "{}", rep.max_abs_err);
        assert!(verify_dbar_problem(3, &w, &set, &[c(1.9995, 0.0)], 1e-4).is_err());
        assert_eq!(rep.to_csv().lines().count(), 1 + 2 * 4);
    }

    #[test]
    fn polynomial_entries_are_holomorphic() {
        let (w, set) = ginibre_setup(2, 2.0, 3);
        let y = YMatrix::with_default_rule(3, &w, &set).unwrap();
        for z in [c(0.4, 0.3), c(1.2, -0.8)] {
            let d = dbar_fd(&|s| y.eval(s), z, 1e-5).unwrap();
            assert!(d.get(0, 0).norm() < 1e-8 && d.get(1, 0).norm() < 1e-8);
        }
    }

    #[test]
    fn model_naive() {
        let d = disk(1.0);
        let m = model_psi0_naive(&d, c(2.0, 0.0)).unwrap();
        assert!((m - Mat2::new(ONE, c(-0.5, 0.0), ZERO, ONE)).max_abs() < 1e-12);
        let z = c(0.2, 0.3);
        let r = dbar_fd(&|s| model_psi0_naive(&d, s), z, 1e-4).unwrap();
        assert!((r - Mat2::new(ZERO, -ONE, ZERO, ZERO)).max_abs() < 1e-6);
        for big in [1e2, 1e4] {
            let zb = c(0.0, big);
            let dev = (model_psi0_naive(&d, zb).unwrap() - Mat2::identity()).max_abs() * big;
            assert!(dev <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn model_gauss() {
        let d = disk(1.0);
        let rule = CauchyRule::new(&d, 64, 128);
        assert!(model_psi0_gauss(&rule, 1, 1.0, 1.0, c(0.0, 0.0)).unwrap().get(0, 1).norm() < 1e-14);
        let z = c(0.3, -0.4);
        let r = dbar_fd(&|s| model_psi0_gauss(&rule, 2, 1.0, 1.0, s), z, 1e-4).unwrap();
        assert!((r.get(0, 1) + (-2.0 * z.norm_sqr()).exp()).norm() < 1e-5);
        let far = c(1.6, 0.8);
        let vals: Vec<f64> = [4, 8, 16].iter().map(|n| model_psi0_gauss(&rule, *n, 1.0, 1.0, far).unwrap().get(0, 1).norm()).collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2]);
        assert!((vals[2] - gauss_disk_oracle(16.0, 1.0, far).norm()).abs() < 1e-10);
    }
}
