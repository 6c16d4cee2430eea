//! One-dimensional quadrature building blocks: Gauss-Legendre rules, an
//! adaptive composite Gauss integrator for complex integrands, and exact
//! trigonometric-polynomial arithmetic for boundary parametrizations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the three-term recurrence, started from the
/// Tricomi approximation of the roots.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[m - 1] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to [0, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|t| 0.5 * t).collect(),
    )
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

fn gl_panel(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> Complex64 {
    let (x, w) = gl16();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = Complex64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        s += f(mid + half * xi) * *wi;
    }
    s * half
}

/// Globally adaptive composite 16-point Gauss-Legendre integration of a
/// complex integrand over [a, b].
///
/// Starts from `initial_panels` equal panels, each carrying the error
/// estimate |I(panel) − I(halves)|, and repeatedly bisects the worst
/// panel until the summed estimate is within `abs_tol`. A budget of
/// `MAX_PANELS` panels bounds the cost when the integrand itself is noisy
/// (e.g. `1/(ζ − z)` with z very close to the contour).
pub fn adaptive_gauss(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    initial_panels: usize,
    abs_tol: f64,
) -> Complex64 {
    let min_width = 1e-12 * (b - a).abs();
    let mut heap = BinaryHeap::with_capacity(2 * initial_panels);
    let mut err_total = 0.0;
    let h = (b - a) / initial_panels as f64;
    for k in 0..initial_panels {
        let lo = a + h * k as f64;
        let hi = if k + 1 == initial_panels { b } else { lo + h };
        let p = Panel::new(f, lo, hi);
        err_total += p.err;
        heap.push(p);
    }
    while err_total > abs_tol && heap.len() < MAX_PANELS {
        let worst = heap.pop().expect("non-empty");
        if (worst.b - worst.a).abs() < min_width {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (l, r) = (Panel::new(f, worst.a, mid), Panel::new(f, mid, worst.b));
        err_total += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
    }
    // sum in position order so the result does not depend on heap layout
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).expect("finite"));
    panels.iter().map(|p| p.value).sum()
}

const MAX_PANELS: usize = 8_000;

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl Panel {
    fn new(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> Self {
        let mid = 0.5 * (a + b);
        let whole = gl_panel(f, a, b);
        let value = gl_panel(f, a, mid) + gl_panel(f, mid, b);
        Panel { a, b, value, err: (value - whole).norm() }
    }
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Periodic trapezoid rule for a 2π-periodic integrand sampled at
/// `θ_j = 2πj/m`.
pub fn periodic_trapezoid(f: impl Fn(f64) -> Complex64, m: usize) -> Complex64 {
    let h = 2.0 * PI / m as f64;
    (0..m).map(|j| f(h * j as f64)).sum::<Complex64>() * h
}

/// A finite Fourier series `Σ c_k e^{ikθ}` for `k` in `lo..lo+len`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    lo: i64,
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn new(lo: i64, coeffs: Vec<Complex64>) -> Self {
        TrigPoly { lo, coeffs }
    }

    pub fn lowest(&self) -> i64 {
        self.lo
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k - self.lo;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.lo + i as i64, *c))
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.terms()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta))
            .sum()
    }

    pub fn derivative(&self) -> TrigPoly {
        TrigPoly {
            lo: self.lo,
            coeffs: self
                .terms()
                .map(|(k, c)| c * Complex64::new(0.0, k as f64))
                .collect(),
        }
    }

    /// Series of the pointwise complex conjugate.
    pub fn conj(&self) -> TrigPoly {
        let hi = self.lo + self.coeffs.len() as i64 - 1;
        TrigPoly {
            lo: -hi,
            coeffs: self.coeffs.iter().rev().map(|c| c.conj()).collect(),
        }
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        TrigPoly { lo: self.lo + other.lo, coeffs }
    }

    /// Exact `∫_a^b` of the series.
    pub fn integrate(&self, a: f64, b: f64) -> Complex64 {
        self.terms()
            .map(|(k, c)| {
                if k == 0 {
                    c * (b - a)
                } else {
                    let kf = k as f64;
                    c * (Complex64::from_polar(1.0, kf * b) - Complex64::from_polar(1.0, kf * a))
                        / Complex64::new(0.0, kf)
                }
            })
            .sum()
    }
}
