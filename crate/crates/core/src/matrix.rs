//! Dense complex Hermitian linear algebra.
//!
//! Everything downstream goes through [`eigh`] and [`spectral_apply`]: the
//! functional calculus honours the pseudo-inverse convention, i.e. eigenvalues
//! at or below the zero threshold are treated as exactly zero and, in pseudo
//! mode, are mapped to zero whatever the function does there.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = nalgebra::Complex<f64>;

/// Dense square complex matrix, row/column indexed as usual.
pub type ComplexMatrix = DMatrix<C64>;

/// Relative tolerance of the Hermiticity test.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative numerical rank cutoff applied to spectra.
pub const ZERO_THRESHOLD_REL: f64 = 1e-12;

const EIGEN_MAX_ITER: usize = 10_000;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(dim, dim)
}

pub fn from_real_diagonal(diag: &[f64]) -> ComplexMatrix {
    let n = diag.len();
    let mut m = zeros(n);
    for (i, &d) in diag.iter().enumerate() {
        m[(i, i)] = c64(d, 0.0);
    }
    m
}

/// Builds a square matrix from row-major real and imaginary parts.
pub fn from_row_major(dim: usize, re: &[f64], im: &[f64]) -> Result<ComplexMatrix> {
    if re.len() != dim * dim || im.len() != dim * dim {
        return invalid(format!(
            "expected {} entries, got re={} im={}",
            dim * dim,
            re.len(),
            im.len()
        ));
    }
    if re.iter().chain(im).any(|v| !v.is_finite()) {
        return invalid("matrix entries must be finite");
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |i, j| {
        c64(re[i * dim + j], im[i * dim + j])
    }))
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().sum()
}

pub fn max_abs_entry(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation `|A - A*|`.
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(a: &ComplexMatrix) -> bool {
    a.is_square() && hermiticity_defect(a) <= HERMITIAN_TOL * (1.0 + max_abs_entry(a))
}

/// `(A + A*) / 2`.
pub fn hermitize(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

fn check_square(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() || a.nrows() == 0 {
        return invalid(format!("matrix must be square and non-empty, got {}x{}", a.nrows(), a.ncols()));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return invalid("matrix entries must be finite");
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
    pub zero_threshold: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_zero(&self, lambda: f64) -> bool {
        lambda.abs() <= self.zero_threshold
    }

    /// Eigenvalues with sub-threshold entries replaced by exact zeros.
    pub fn clean_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|&l| if self.is_zero(l) { 0.0 } else { l })
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| !self.is_zero(l)).count()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Smallest eigenvalue above the zero threshold, if any.
    pub fn min_nonzero_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|&l| !self.is_zero(l))
            .fold(None, |acc: Option<f64>, l| Some(acc.map_or(l, |a| a.min(l))))
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|x| x, false).expect("identity is finite")
    }

    /// `Σ g(λ) P_λ`; see [`spectral_apply`].
    pub fn apply<G: Fn(f64) -> f64>(&self, g: G, pseudo: bool) -> Result<ComplexMatrix> {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let zero = self.is_zero(lambda);
            let value = if zero && pseudo {
                0.0
            } else {
                let arg = if zero { 0.0 } else { lambda };
                let v = g(arg);
                if !v.is_finite() {
                    return Err(Error::DomainError(format!(
                        "function is {v} at eigenvalue {arg:e}"
                    )));
                }
                v
            };
            for i in 0..n {
                scaled[(i, k)] *= value;
            }
        }
        Ok(&scaled * self.eigenvectors.adjoint())
    }

    /// Orthogonal projection onto the span of eigenvectors with `λ > threshold`.
    pub fn support_projector(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut out = zeros(n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            if lambda > self.zero_threshold {
                let v = self.eigenvectors.column(k);
                out += &v * v.adjoint();
            }
        }
        out
    }
}

/// Hermitian eigen-decomposition with eigenvalues sorted in descending order.
///
/// The zero threshold is `1e-12 · max(1, |λ_max|)`.
pub fn eigh(a: &ComplexMatrix) -> Result<SpectralDecomposition> {
    check_square(a)?;
    if !is_hermitian(a) {
        return invalid(format!(
            "matrix is not Hermitian (defect {:e})",
            hermiticity_defect(a)
        ));
    }
    let n = a.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(hermitize(a), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the solver's order among ties
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    let lambda_max = eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        zero_threshold: ZERO_THRESHOLD_REL * lambda_max.max(1.0),
    })
}

/// Applies `g` through the spectral decomposition of a Hermitian `a`.
///
/// With `pseudo` set, eigenvalues treated as zero map to zero and `g` is only
/// evaluated on the nonzero part of the spectrum (`x ↦ x⁻¹` yields the
/// Moore–Penrose inverse). Otherwise `g` must be finite on every eigenvalue.
pub fn spectral_apply<G: Fn(f64) -> f64>(a: &ComplexMatrix, g: G, pseudo: bool) -> Result<ComplexMatrix> {
    eigh(a)?.apply(g, pseudo)
}

pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_square(a)?;
    let svd = a
        .clone()
        .try_svd(false, false, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Schatten p-norm; `p = f64::INFINITY` gives the operator norm.
pub fn schatten_norm(a: &ComplexMatrix, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return invalid(format!("Schatten exponent must be in [1, inf], got {p}"));
    }
    let sv = singular_values(a)?;
    if p.is_infinite() {
        return Ok(sv.iter().fold(0.0, |m: f64, &s| m.max(s)));
    }
    if p == 1.0 {
        return Ok(sv.iter().sum());
    }
    if p == 2.0 {
        return Ok(frobenius(a));
    }
    Ok(sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
}

pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    schatten_norm(a, 1.0).expect("finite square matrix")
}

/// Hilbert–Schmidt norm ‖A‖₂.
pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    schatten_norm(a, f64::INFINITY).expect("finite square matrix")
}

/// `Tr[A* B]`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return invalid(format!("dimension mismatch {:?} vs {:?}", a.shape(), b.shape()));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

pub fn support_projector(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(eigh(a)?.support_projector())
}

/// Wire form `{"dim": d, "re": [...], "im": [...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(a: &ComplexMatrix) -> Self {
        let dim = a.nrows();
        let mut re = Vec::with_capacity(dim * dim);
        let mut im = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                re.push(a[(i, j)].re);
                im.push(a[(i, j)].im);
            }
        }
        MatrixJson { dim, re, im }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        from_row_major(self.dim, &self.re, &self.im)
    }
}
