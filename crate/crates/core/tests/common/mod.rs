//! Independent reference computations. Everything here works from raw matrix
//! entries with nalgebra's own eigensolver, never through the library's
//! spectral calculus.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use petz_core::matrix::ComplexMatrix;
use petz_core::states::DensityMatrix;

pub type M = DMatrix<Complex<f64>>;

const ZERO: f64 = 1e-12;

fn eig(a: &M) -> (Vec<f64>, M) {
    let e = SymmetricEigen::new(a.clone());
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// `Σ g(λ) |v⟩⟨v|`, with `g` only applied to eigenvalues above the zero threshold.
fn func(a: &M, g: impl Fn(f64) -> f64) -> M {
    let (vals, vecs) = eig(a);
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let n = a.nrows();
    let mut out = M::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        if v.abs() <= ZERO * scale {
            continue;
        }
        let col = vecs.column(k);
        out += (&col * col.adjoint()).scale(g(v));
    }
    out
}

pub fn tr(a: &M) -> Complex<f64> {
    a.trace()
}

/// Row-major vectorization: `vec(A X B) = (A ⊗ Bᵀ) vec(X)`.
fn vec_rows(x: &M) -> nalgebra::DVector<Complex<f64>> {
    let n = x.nrows();
    nalgebra::DVector::from_fn(n * n, |k, _| x[(k / n, k % n)])
}

/// `S_f(ρ‖σ) = ⟨√ρ, f(L) √ρ⟩` with `L = σ ⊗ (ρ⁺)ᵀ` built as a `d²×d²` matrix.
/// `None` if `√ρ` has weight on `ker L` and `f(0⁺) = +∞`.
pub fn superoperator_s_f(rho: &DensityMatrix, sigma: &DensityMatrix, f: impl Fn(f64) -> f64, f_zero: f64) -> Option<f64> {
    let r = rho.matrix();
    let rho_plus = func(r, |x| 1.0 / x);
    let sqrt_rho = func(r, f64::sqrt);
    let l = sigma.matrix().kronecker(&rho_plus.transpose());
    let l = (&l + l.adjoint()).scale(0.5);
    let x = vec_rows(&sqrt_rho);
    let (vals, vecs) = eig(&l);
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut total = 0.0;
    for (k, &v) in vals.iter().enumerate() {
        let w = vecs.column(k).dotc(&x).norm_sqr();
        if w < 1e-15 {
            continue;
        }
        if v.abs() <= ZERO * scale {
            if f_zero.is_infinite() {
                return None;
            }
            total += w * f_zero;
        } else {
            total += w * f(v);
        }
    }
    Some(total)
}

/// `Σ p_j f(q_j / p_j)` over `p_j > 0` for the diagonals of commuting states.
pub fn classical_f_divergence(p: &[f64], q: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    p.iter().zip(q).filter(|(p, _)| **p > 0.0).map(|(p, q)| p * f(q / p)).sum()
}

/// `Tr ρ log ρ − Tr ρ log σ` for invertible σ.
pub fn umegaki_trace_formula(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let r = rho.matrix();
    let log_rho = func(r, f64::ln);
    let log_sigma = func(sigma.matrix(), f64::ln);
    (tr(&(r * log_rho)) - tr(&(r * log_sigma))).re
}

/// `Σ_{ij} |a_ij − b_ij|²` square-rooted.
pub fn hs_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `ρ^{1/2} ρ_N^{−1/2} X ρ_N^{−1/2} ρ^{1/2}` evaluated by explicit index sums.
pub fn petz_entrywise(rho: &M, rho_n: &M, x: &M) -> M {
    let s = func(rho, f64::sqrt);
    let t = func(rho_n, |v| 1.0 / v.sqrt());
    let n = rho.nrows();
    let left = M::from_fn(n, n, |i, j| (0..n).map(|k| s[(i, k)] * t[(k, j)]).sum());
    let right = M::from_fn(n, n, |i, j| (0..n).map(|k| t[(i, k)] * s[(k, j)]).sum());
    let mid = M::from_fn(n, n, |i, j| (0..n).map(|k| left[(i, k)] * x[(k, j)]).sum());
    M::from_fn(n, n, |i, j| (0..n).map(|k| mid[(i, k)] * right[(k, j)]).sum())
}
