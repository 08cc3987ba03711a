//! Globally adaptive Gauss–Legendre quadrature for vector-valued integrands,
//! with a half-line variant.
//!
//! Each panel is integrated by the 10-point rule on the whole panel and on its
//! two halves; the difference is the panel's error estimate and the halves'
//! sum its value. The panel with the largest estimate is split until the total
//! estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const GL_POINTS: usize = 10;

fn gauss_legendre() -> &'static ([f64; GL_POINTS], [f64; GL_POINTS]) {
    static RULE: OnceLock<([f64; GL_POINTS], [f64; GL_POINTS])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        let mut nodes = [0.0; GL_POINTS];
        let mut weights = [0.0; GL_POINTS];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-10, rel_tol: 1e-10, max_panels: 20_000 }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions { abs_tol: tol, rel_tol: tol, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error_estimate: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rule<F: FnMut(f64) -> Vec<f64>>(f: &mut F, a: f64, b: f64, dim: usize) -> Result<Vec<f64>> {
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = vec![0.0; dim];
    for (x, w) in nodes.iter().zip(weights) {
        let fx = f(mid + half * x);
        if fx.len() != dim {
            return Err(Error::NumericalFailure("integrand changed dimension".into()));
        }
        for (acc_k, v) in acc.iter_mut().zip(&fx) {
            *acc_k += w * half * v;
        }
    }
    if acc.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(format!("non-finite integrand on [{a:e}, {b:e}]")));
    }
    Ok(acc)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn panel<F: FnMut(f64) -> Vec<f64>>(f: &mut F, a: f64, b: f64, dim: usize) -> Result<Panel> {
    let whole = rule(f, a, b, dim)?;
    let m = 0.5 * (a + b);
    let left = rule(f, a, m, dim)?;
    let right = rule(f, m, b, dim)?;
    let value: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
    let diff: Vec<f64> = value.iter().zip(&whole).map(|(v, w)| v - w).collect();
    Ok(Panel { a, b, value, error: sup_norm(&diff) })
}

/// Integrates a vector-valued `f` of length `dim` over `[a, b]`, starting from
/// the given interior breakpoints.
pub fn integrate_vec<F>(mut f: F, dim: usize, points: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Vec<f64>,
{
    if points.len() < 2 || points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("quadrature breakpoints must increase".into()));
    }
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        heap.push(panel(&mut f, w[0], w[1], dim)?);
    }
    loop {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        for p in heap.iter() {
            err += p.error;
            for (t, v) in total.iter_mut().zip(&p.value) {
                *t += v;
            }
        }
        let target = opts.abs_tol.max(opts.rel_tol * sup_norm(&total));
        if err <= target {
            return Ok(QuadResult { value: total, error_estimate: err, panels: heap.len() });
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::NumericalFailure(format!(
                "quadrature did not converge: error estimate {err:e} > {target:e} after {} panels",
                heap.len()
            )));
        }
        let mut worst = heap.pop().expect("non-empty heap");
        let m = 0.5 * (worst.a + worst.b);
        if !(worst.a < m && m < worst.b) {
            // panel can no longer be split in floating point
            worst.error = 0.0;
            heap.push(worst);
            continue;
        }
        heap.push(panel(&mut f, worst.a, m, dim)?);
        heap.push(panel(&mut f, m, worst.b, dim)?);
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    Ok(integrate_vec(|x| vec![f(x)], 1, &[a, 0.5 * (a + b), b], opts)?.value[0])
}

/// `∫₀^∞ f(t) dt`: `[0, 1]` directly and `[1, ∞)` through `t = 1/s`.
///
/// Both pieces are laid out on `[-1, 1]` (`u ≥ 0` is `t = u`, `u < 0` is
/// `s = −u`) so that `t → 0` and `t → ∞` both sit next to `u = 0`, where
/// floating point keeps full resolution. `t = u/(1−u)` cannot resolve the
/// tail past `t ≈ 1e16`.
pub fn integrate_half_line_vec<F>(mut f: F, dim: usize, opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Vec<f64>,
{
    let g = move |u: f64| {
        if u >= 0.0 {
            f(u)
        } else {
            let s = -u;
            let jac = 1.0 / (s * s);
            if !jac.is_finite() {
                return vec![0.0; dim];
            }
            let mut v = f(1.0 / s);
            v.iter_mut().for_each(|x| *x *= jac);
            v
        }
    };
    integrate_vec(g, dim, &[-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0], opts)
}

pub fn integrate_half_line<F: FnMut(f64) -> f64>(mut f: F, opts: QuadOptions) -> Result<f64> {
    Ok(integrate_half_line_vec(|t| vec![f(t)], 1, opts)?.value[0])
}
