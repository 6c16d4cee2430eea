//! Moment matrices, monic planar orthogonal polynomials and the partition
//! function `Z_N = N! ∏ h_n`, with a Monte Carlo oracle for small `N`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{polygon_winding, AreaMode, QuadratureRule, Shape, StarFibration};
use crate::potential::Weight;

/// Degree cap for double precision.
pub const MAX_DEGREE: usize = 30;
const CHUNK: usize = 4096;
const MC_BLOCK: usize = 1 << 16;

#[derive(Debug, Clone, Serialize)]
pub struct MomentMatrix {
    /// `M_jk = ∬ z^j z̄^k e^{−NV} d²z`.
    pub entries: Vec<Vec<Complex64>>,
    /// Same moments of the rescaled monomials `(z/ρ)^j`.
    pub scaled: Vec<Vec<Complex64>>,
    pub scale_rho: f64,
    pub quadrature_meta: String,
}

impl MomentMatrix {
    pub fn n_max(&self) -> usize {
        self.scaled.len() - 1
    }
}

/// `ρ = √(γ t₀ max(n_max, 1) / N)`.
pub fn scale_radius(w: &Weight, n_max: usize) -> f64 {
    (w.gamma * w.potential.t0 * n_max.max(1) as f64 / w.big_n as f64).sqrt()
}

/// A star rule on the cutoff domain that resolves moments up to `n_max`.
pub fn moment_rule(w: &Weight, n_max: usize, refine: usize) -> Result<QuadratureRule> {
    let radial = refine * (48 + 4 * n_max);
    let angular = refine * (128 + 8 * n_max);
    let rule = StarFibration::new(&w.cutoff, radial, angular).rule_about(w.cutoff.centroid());
    match rule {
        Ok(r) => Ok(r),
        Err(Error::NotStarShaped(_)) => {
            crate::geometry::area_quadrature(&w.cutoff, AreaMode::MaskedGrid, (400 * refine, 400 * refine))
        }
        Err(e) => Err(e),
    }
}

pub fn compute_moments(w: &Weight, n_max: usize, rule: &QuadratureRule) -> Result<MomentMatrix> {
    if n_max > MAX_DEGREE {
        return Err(Error::invalid(format!("n_max {n_max} exceeds {MAX_DEGREE}")));
    }
    let rho = scale_radius(w, n_max);
    let dim = n_max + 1;
    let zero = Complex64::new(0.0, 0.0);

    let partial: Vec<Vec<Complex64>> = rule
        .nodes
        .par_chunks(CHUNK)
        .zip(rule.weights.par_chunks(CHUNK))
        .map(|(nodes, weights)| {
            let mut acc = vec![zero; dim * dim];
            let mut pw = vec![zero; dim];
            for (z, wt) in nodes.iter().zip(weights) {
                let f = wt * w.density(*z);
                if f == 0.0 {
                    continue;
                }
                let u = z / rho;
                pw[0] = Complex64::new(1.0, 0.0);
                for j in 1..dim {
                    pw[j] = pw[j - 1] * u;
                }
                for j in 0..dim {
                    let fj = pw[j] * f;
                    for k in 0..dim {
                        acc[j * dim + k] += fj * pw[k].conj();
                    }
                }
            }
            acc
        })
        .collect();
    let mut sum = vec![zero; dim * dim];
    for p in &partial {
        for (s, v) in sum.iter_mut().zip(p) {
            *s += v;
        }
    }

    let mut scaled = vec![vec![zero; dim]; dim];
    for j in 0..dim {
        for k in 0..dim {
            scaled[j][k] = (sum[j * dim + k] + sum[k * dim + j].conj()) * 0.5;
        }
    }
    let entries = (0..dim)
        .map(|j| (0..dim).map(|k| scaled[j][k] * rho.powi((j + k) as i32)).collect())
        .collect();
    let m = MomentMatrix { entries, scaled, scale_rho: rho, quadrature_meta: rule.describe() };
    cholesky(&gram_of(&m))?;
    Ok(m)
}

// A_ij = <z^j, z^i> = M_ji, so that <c, d> = d^H A c.
fn gram_of(m: &MomentMatrix) -> Vec<Vec<Complex64>> {
    let dim = m.scaled.len();
    (0..dim).map(|i| (0..dim).map(|j| m.scaled[j][i]).collect()).collect()
}

/// Lower-triangular `L` with `A = L Lᴴ`.
fn cholesky(a: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let n = a.len();
    let mut l = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let mut d = a[j][j].re;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::CholeskyBreakdown { index: j, pivot: d });
        }
        let djj = d.sqrt();
        l[j][j] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / djj;
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthoPolySet {
    /// Row `n` holds `c_0 … c_{n-1}, 1` (monic, ascending powers of z).
    pub coeffs: Vec<Vec<Complex64>>,
    pub norms: Vec<f64>,
    pub log_norms: Vec<f64>,
    pub n_max: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub scale_rho: f64,
    pub quadrature_meta: String,
    #[serde(skip)]
    scaled_coeffs: Vec<Vec<Complex64>>,
}

pub fn compute_orthopolys(m: &MomentMatrix, big_n: usize) -> Result<OrthoPolySet> {
    let l = cholesky(&gram_of(m))?;
    let dim = l.len();
    let rho = m.scale_rho;
    let mut scaled_coeffs = Vec::with_capacity(dim);
    let mut coeffs = Vec::with_capacity(dim);
    let mut norms = Vec::with_capacity(dim);
    let mut log_norms = Vec::with_capacity(dim);
    for n in 0..dim {
        // Lᴴ x = e_n by back substitution, then a = L_nn x
        let mut x = vec![Complex64::new(0.0, 0.0); n + 1];
        x[n] = Complex64::new(1.0 / l[n][n].re, 0.0);
        for i in (0..n).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for (k, xk) in x.iter().enumerate().take(n + 1).skip(i + 1) {
                s += l[k][i].conj() * xk;
            }
            x[i] = -s / l[i][i].re;
        }
        let lnn = l[n][n].re;
        let mut a: Vec<Complex64> = x.iter().map(|v| v * lnn).collect();
        a[n] = Complex64::new(1.0, 0.0);
        let log_h = 2.0 * lnn.ln() + 2.0 * n as f64 * rho.ln();
        coeffs.push(a.iter().enumerate().map(|(j, c)| c * rho.powi((n - j) as i32)).collect::<Vec<_>>());
        scaled_coeffs.push(a);
        norms.push(log_h.exp());
        log_norms.push(log_h);
    }
    Ok(OrthoPolySet {
        coeffs,
        norms,
        log_norms,
        n_max: dim - 1,
        big_n,
        scale_rho: rho,
        quadrature_meta: m.quadrature_meta.clone(),
        scaled_coeffs,
    })
}

impl OrthoPolySet {
    /// Builds a set from explicit monic coefficient rows and norms.
    pub fn from_parts(coeffs: Vec<Vec<Complex64>>, norms: Vec<f64>, big_n: usize) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() != norms.len() {
            return Err(Error::invalid("coefficient rows and norms must match"));
        }
        for (n, row) in coeffs.iter().enumerate() {
            if row.len() != n + 1 || row[n] != Complex64::new(1.0, 0.0) {
                return Err(Error::invalid(format!("row {n} is not monic of degree {n}")));
            }
        }
        if norms.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::invalid("norms must be positive"));
        }
        Ok(OrthoPolySet {
            n_max: coeffs.len() - 1,
            scaled_coeffs: coeffs.clone(),
            coeffs,
            log_norms: norms.iter().map(|h| h.ln()).collect(),
            norms,
            big_n,
            scale_rho: 1.0,
            quadrature_meta: "explicit".into(),
        })
    }

    pub fn eval(&self, n: usize, z: Complex64) -> Result<Complex64> {
        eval_p(self, n, z)
    }

    /// Coefficients of `P_n(ρu)/ρⁿ` in powers of `u = z/ρ`.
    pub fn scaled_coefficients(&self, n: usize) -> &[Complex64] {
        &self.scaled_coeffs[n]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    /// `n,h_n,log_h_n` rows in 17-digit scientific notation.
    pub fn norms_csv(&self) -> String {
        let mut s = String::from("n,h_n,log_h_n\n");
        for (n, (h, lh)) in self.norms.iter().zip(&self.log_norms).enumerate() {
            s.push_str(&format!("{n},{h:.16e},{lh:.16e}\n"));
        }
        s
    }
}

/// Horner evaluation of `P_n(z)`.
#[allow(non_snake_case)]
pub fn eval_P(set: &OrthoPolySet, n: usize, z: Complex64) -> Result<Complex64> {
    eval_p(set, n, z)
}

fn eval_p(set: &OrthoPolySet, n: usize, z: Complex64) -> Result<Complex64> {
    if n > set.n_max {
        return Err(Error::IndexOutOfRange { index: n, max: set.n_max });
    }
    let u = z / set.scale_rho;
    let mut acc = Complex64::new(0.0, 0.0);
    for c in set.scaled_coeffs[n].iter().rev() {
        acc = acc * u + c;
    }
    Ok(acc * set.scale_rho.powi(n as i32))
}

/// `⟨P_n, P_m⟩` re-evaluated on `rule`.
pub fn gram(set: &OrthoPolySet, w: &Weight, rule: &QuadratureRule) -> Vec<Vec<Complex64>> {
    let dim = set.n_max + 1;
    let zero = Complex64::new(0.0, 0.0);
    let partial: Vec<Vec<Complex64>> = rule
        .nodes
        .par_chunks(CHUNK)
        .zip(rule.weights.par_chunks(CHUNK))
        .map(|(nodes, weights)| {
            let mut acc = vec![zero; dim * dim];
            let mut vals = vec![zero; dim];
            for (z, wt) in nodes.iter().zip(weights) {
                let f = wt * w.density(*z);
                if f == 0.0 {
                    continue;
                }
                for (n, v) in vals.iter_mut().enumerate() {
                    *v = eval_p(set, n, *z).expect("n in range");
                }
                for n in 0..dim {
                    for m in 0..dim {
                        acc[n * dim + m] += vals[n] * vals[m].conj() * f;
                    }
                }
            }
            acc
        })
        .collect();
    let mut sum = vec![zero; dim * dim];
    for p in &partial {
        for (s, v) in sum.iter_mut().zip(p) {
            *s += v;
        }
    }
    (0..dim).map(|n| sum[n * dim..(n + 1) * dim].to_vec()).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrthogonalityResidual {
    /// `max |⟨P_n,P_m⟩| / √(h_n h_m)` over `m ≠ n`.
    pub off_diagonal: f64,
    /// `max |⟨P_n,P_n⟩ − h_n| / h_n`.
    pub diagonal: f64,
}

pub fn orthogonality_residual(set: &OrthoPolySet, w: &Weight, rule: &QuadratureRule) -> OrthogonalityResidual {
    let g = gram(set, w, rule);
    let mut off = 0.0f64;
    let mut diag = 0.0f64;
    for (n, row) in g.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            if n == m {
                diag = diag.max((v.re - set.norms[n]).abs().max(v.im.abs()) / set.norms[n]);
            } else {
                off = off.max(v.norm() / (set.norms[n] * set.norms[m]).sqrt());
            }
        }
    }
    OrthogonalityResidual { off_diagonal: off, diagonal: diag }
}

/// `log Z_N = log N! + Σ_{n<N} log h_n`.
pub fn partition_function(set: &OrthoPolySet, big_n: usize) -> Result<f64> {
    if big_n > set.n_max + 1 {
        return Err(Error::IndexOutOfRange { index: big_n, max: set.n_max + 1 });
    }
    let log_fact: f64 = (2..=big_n).map(|k| (k as f64).ln()).sum();
    Ok(log_fact + set.log_norms[..big_n].iter().sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub log_z: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Shifted running sums of `e^{ℓ}` and `e^{2ℓ}` for log-space averaging.
#[derive(Clone, Copy)]
struct LogMoments {
    shift: f64,
    s1: f64,
    s2: f64,
    count: usize,
}

impl LogMoments {
    fn from_logs(logs: &[f64]) -> Self {
        let shift = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut s1, mut s2) = (0.0, 0.0);
        if shift.is_finite() {
            for l in logs {
                let e = (l - shift).exp();
                s1 += e;
                s2 += e * e;
            }
        }
        LogMoments { shift, s1, s2, count: logs.len() }
    }

    fn merge(self, o: LogMoments) -> LogMoments {
        if !o.shift.is_finite() {
            return LogMoments { count: self.count + o.count, ..self };
        }
        if !self.shift.is_finite() {
            return LogMoments { count: self.count + o.count, ..o };
        }
        let shift = self.shift.max(o.shift);
        let (a, b) = ((self.shift - shift).exp(), (o.shift - shift).exp());
        LogMoments {
            shift,
            s1: self.s1 * a + o.s1 * b,
            s2: self.s2 * a * a + o.s2 * b * b,
            count: self.count + o.count,
        }
    }
}

/// Uniform sampling of `D^N` for `N ≤ 3`. Returns `log Z_N` and the
/// standard error of that logarithm (delta method).
pub fn zn_monte_carlo(w: &Weight, big_n: usize, samples: usize, seed: u64) -> Result<McEstimate> {
    if !(1..=3).contains(&big_n) {
        return Err(Error::invalid(format!("Monte Carlo supports N in 1..=3, got {big_n}")));
    }
    if samples < 1_000_000 {
        return Err(Error::invalid(format!("need at least 1e6 samples, got {samples}")));
    }
    let sampler = UniformSampler::new(w);
    let blocks = samples.div_ceil(MC_BLOCK);
    let moments: Vec<LogMoments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = MC_BLOCK.min(samples - b * MC_BLOCK);
            let mut logs = Vec::with_capacity(len);
            let mut z = [Complex64::new(0.0, 0.0); 3];
            for _ in 0..len {
                for zi in z.iter_mut().take(big_n) {
                    *zi = sampler.draw(&mut rng);
                }
                let mut l = 0.0;
                for i in 0..big_n {
                    l -= w.exponent(z[i]);
                    for j in i + 1..big_n {
                        l += (z[i] - z[j]).norm_sqr().ln();
                    }
                }
                logs.push(l);
            }
            LogMoments::from_logs(&logs)
        })
        .collect();
    let total = moments.into_iter().reduce(LogMoments::merge).expect("at least one block");
    let s = total.count as f64;
    let mean = total.s1 / s;
    let var = (total.s2 / s - mean * mean).max(0.0) * s / (s - 1.0);
    Ok(McEstimate {
        log_z: mean.ln() + total.shift + big_n as f64 * sampler.area.ln(),
        stderr: var.sqrt() / (mean * s.sqrt()),
        samples,
    })
}

/// Alias with the conventional capitalization.
#[allow(non_snake_case)]
pub fn zN_monte_carlo(w: &Weight, big_n: usize, samples: usize, seed: u64) -> Result<McEstimate> {
    zn_monte_carlo(w, big_n, samples, seed)
}

enum Sampler {
    Disk { center: Complex64, radius: f64 },
    Polygon { poly: Vec<Complex64>, bbox: [f64; 4] },
}

struct UniformSampler {
    kind: Sampler,
    area: f64,
}

impl UniformSampler {
    fn new(w: &Weight) -> Self {
        let kind = match w.cutoff.shape() {
            Shape::Disk { center, radius } => Sampler::Disk { center: *center, radius: *radius },
            Shape::CurveInterior(c) => Sampler::Polygon { poly: c.samples(2048), bbox: w.cutoff.bounding_box() },
        };
        UniformSampler { kind, area: w.cutoff.area() }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        match &self.kind {
            Sampler::Disk { center, radius } => {
                let r = radius * rng.gen::<f64>().sqrt();
                center + Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
            }
            Sampler::Polygon { poly, bbox } => loop {
                let z = Complex64::new(rng.gen_range(bbox[0]..bbox[1]), rng.gen_range(bbox[2]..bbox[3]));
                if polygon_winding(poly, z).0 {
                    return z;
                }
            },
        }
    }
}

/// Zeros of `P_n` as companion-matrix eigenvalues. Scaled coefficients
/// below `1e-11` are flushed so that exact zero roots deflate cleanly.
pub fn zeros(set: &OrthoPolySet, n: usize) -> Result<Vec<Complex64>> {
    if n > set.n_max {
        return Err(Error::IndexOutOfRange { index: n, max: set.n_max });
    }
    let c: Vec<Complex64> = set.scaled_coeffs[n]
        .iter()
        .map(|c| if c.norm() < 1e-11 { Complex64::new(0.0, 0.0) } else { *c })
        .collect();
    let trailing = c.iter().take_while(|v| v.norm() == 0.0).count().min(n);
    let mut roots = vec![Complex64::new(0.0, 0.0); trailing];
    let p = &c[trailing..];
    let d = p.len() - 1;
    if d > 0 {
        let mut comp = DMatrix::<Complex64>::zeros(d, d);
        for i in 1..d {
            comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..d {
            comp[(i, d - 1)] = -p[i];
        }
        let (_, t) = comp.schur().unpack();
        roots.extend((0..d).map(|i| t[(i, i)]));
    }
    Ok(roots.into_iter().map(|r| r * set.scale_rho).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::potential::EFPotential;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ginibre(n: usize, radius: f64) -> Weight {
        Weight::new(EFPotential::ginibre(1.0), n, Domain::disk(c(0.0, 0.0), radius).unwrap(), 1.0).unwrap()
    }

    // π ∫₀^{s_max} s^n e^{-a s} ds by repeated integration by parts
    fn radial_oracle(n: usize, a: f64, s_max: f64) -> f64 {
        let x = a * s_max;
        let mut term = 1.0;
        let mut tail = 1.0;
        for k in 1..=n {
            term *= x / k as f64;
            tail += term;
        }
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        PI * fact / a.powi(n as i32 + 1) * (1.0 - (-x).exp() * tail)
    }

    fn set_for(w: &Weight, n_max: usize) -> OrthoPolySet {
        let rule = moment_rule(w, n_max, 1).unwrap();
        compute_orthopolys(&compute_moments(w, n_max, &rule).unwrap(), w.big_n).unwrap()
    }

    #[test]
    fn ginibre_moment_examples() {
        let w = ginibre(1, 6.0);
        let m = compute_moments(&w, 2, &moment_rule(&w, 2, 1).unwrap()).unwrap();
        assert!((m.entries[0][0].re - PI * (1.0 - (-36.0f64).exp())).abs() < 1e-10);
        assert!(m.entries[1][0].norm() < 1e-12);
        assert!((m.entries[1][1].re - radial_oracle(1, 1.0, 36.0)).abs() < 1e-9);
    }

    #[test]
    fn ginibre_polys_are_monomials() {
        let set = set_for(&ginibre(1, 6.0), 6);
        for row in &set.coeffs {
            for c in &row[..row.len() - 1] {
                assert!(c.norm() < 1e-10, "{c}");
            }
        }
        assert!((eval_P(&set, 2, c(2.0, 0.0)).unwrap() - 4.0).norm() < 1e-9);
        assert_eq!(eval_P(&set, 0, c(0.3, 7.0)).unwrap(), c(1.0, 0.0));
        assert!(matches!(eval_P(&set, 7, c(0.0, 0.0)), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn ginibre_norm_n2() {
        let set = set_for(&ginibre(2, 6.0), 3);
        assert!((set.norms[2] - PI / 4.0).abs() < 1e-8);
        for (n, h) in set.norms.iter().enumerate() {
            let want = radial_oracle(n, 2.0, 36.0);
            assert!((h - want).abs() / want < 1e-10);
        }
    }

    #[test]
    fn explicit_set_and_partition_function() {
        let set = OrthoPolySet::from_parts(vec![vec![c(1.0, 0.0)], vec![c(-1.0, 0.0), c(1.0, 0.0)]], vec![2.0, 3.0], 1)
            .unwrap();
        assert!((eval_P(&set, 1, c(3.0, 0.0)).unwrap() - 2.0).norm() < 1e-15);
        assert!((partition_function(&set, 1).unwrap() - 2.0f64.ln()).abs() < 1e-15);
        let ones = OrthoPolySet::from_parts(
            (0..3).map(|n| (0..=n).map(|j| c((j == n) as u8 as f64, 0.0)).collect()).collect(),
            vec![1.0; 3],
            3,
        )
        .unwrap();
        assert!((partition_function(&ones, 3).unwrap() - 6.0f64.ln()).abs() < 1e-14);
        assert!(partition_function(&ones, 4).is_err());
    }

    #[test]
    fn degree_zero() {
        let w = ginibre(1, 2.0);
        let set = set_for(&w, 0);
        assert_eq!(set.coeffs, vec![vec![c(1.0, 0.0)]]);
        assert!((set.norms[0] - radial_oracle(0, 1.0, 4.0)).abs() < 1e-12);
    }

    #[test]
    fn partition_function_n2() {
        let set = set_for(&ginibre(2, 6.0), 1);
        let want = (2.0 * radial_oracle(0, 2.0, 36.0) * radial_oracle(1, 2.0, 36.0)).ln();
        assert!((partition_function(&set, 2).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn orthogonality_for_t2_potential() {
        let p = EFPotential::new(1.0, vec![c(0.0, 0.0), c(0.2, 0.0)]).unwrap();
        let w = Weight::new(p, 2, Domain::disk(c(0.0, 0.0), 4.0).unwrap(), 1.0).unwrap();
        let set = set_for(&w, 8);
        let res = orthogonality_residual(&set, &w, &moment_rule(&w, 8, 2).unwrap());
        assert!(res.off_diagonal < 1e-8, "{res:?}");
        assert!(res.diagonal < 1e-8, "{res:?}");
        // V is symmetric under z -> -z, so odd/even coefficients decouple
        assert!(set.coeffs[4][1].norm() < 1e-10 && set.coeffs[4][2].norm() > 1e-3);
    }

    #[test]
    fn zeros_of_monomials_and_known_polynomial() {
        let set = set_for(&ginibre(1, 6.0), 8);
        for n in 0..=8 {
            let z = zeros(&set, n).unwrap();
            assert_eq!(z.len(), n);
            assert!(z.iter().all(|r| r.norm() < 1e-6));
        }
        // (z-1)(z-2i) = z² - (1+2i) z + 2i
        let q = OrthoPolySet::from_parts(
            vec![vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 2.0), c(-1.0, -2.0), c(1.0, 0.0)]],
            vec![1.0; 3],
            1,
        )
        .unwrap();
        let mut r = zeros(&q, 2).unwrap();
        r.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((r[0] - 1.0).norm() < 1e-12 && (r[1] - c(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let w = ginibre(1, 3.0);
        let a = zn_monte_carlo(&w, 2, 1_000_000, 7).unwrap();
        let b = zn_monte_carlo(&w, 2, 1_000_000, 7).unwrap();
        assert_eq!(a.log_z.to_bits(), b.log_z.to_bits());
        assert!(zn_monte_carlo(&w, 4, 1_000_000, 7).is_err());
        assert!(zn_monte_carlo(&w, 1, 10, 7).is_err());
    }

    #[test]
    fn monte_carlo_n1_matches_h0() {
        let w = ginibre(1, 3.0);
        let est = zn_monte_carlo(&w, 1, 2_000_000, 11).unwrap();
        let want = radial_oracle(0, 1.0, 9.0).ln();
        assert!((est.log_z - want).abs() < 4.0 * est.stderr, "{est:?} vs {want}");
    }

    #[test]
    fn csv_has_full_precision() {
        let set = set_for(&ginibre(1, 6.0), 1);
        let csv = set.norms_csv();
        assert!(csv.starts_with("n,h_n,log_h_n\n0,3.1415926535897"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn h0_grows_with_domain() {
        let mut prev = 0.0;
        for r in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let h0 = set_for(&ginibre(1, r), 0).norms[0];
            assert!(h0 > prev);
            prev = h0;
        }
    }
}
