//! The relative modular operator `Δ_{σ,ρ}(X) = σ X ρ⁺` on the
//! Hilbert–Schmidt space, handled through the eigenbases of σ and ρ.

use crate::error::{invalid, Error, Result};
use crate::matrix::{c64, ComplexMatrix, SpectralDecomposition};
use crate::states::DensityMatrix;

/// Component weights at or below this count as exactly zero (`0·∞ = 0`).
pub const WEIGHT_ZERO_TOL: f64 = 1e-18;

/// A real function applied to the spectrum of `Δ`.
///
/// `limit_at_zero` declares `f(0⁺)` as an extended real; it is used at the
/// eigenvalue 0 instead of evaluating `f` there.
pub trait SpectralFunction {
    fn value(&self, x: f64) -> f64;

    fn limit_at_zero(&self) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64) -> f64> SpectralFunction for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// One eigen-component `P^σ_i · P^ρ_j` of `Δ` restricted to `supp ρ` on the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointEntry {
    /// `μ_i / λ_j`.
    pub eigenvalue: f64,
    /// `λ_j |⟨φ_i|ψ_j⟩|²`, the weight of `√ρ` on this component.
    pub weight: f64,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone)]
pub struct RelativeModularOperator {
    sigma: SpectralDecomposition,
    rho: SpectralDecomposition,
    /// Cleaned eigenvalues of σ and ρ.
    mu: Vec<f64>,
    lambda: Vec<f64>,
    joint: Vec<JointEntry>,
}

/// Result of `f(Δ) X`, with components where `f(0⁺) = +∞` meets a nonzero
/// weight left out of `value` and reported by `infinite`.
#[derive(Debug, Clone)]
pub struct ModularApplication {
    pub value: ComplexMatrix,
    pub infinite: bool,
}

impl RelativeModularOperator {
    pub fn build(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<Self> {
        if sigma.dim() != rho.dim() {
            return invalid(format!("dimension mismatch: σ is {}, ρ is {}", sigma.dim(), rho.dim()));
        }
        let s = sigma.spectral().clone();
        let r = rho.spectral().clone();
        let mu = s.clean_eigenvalues();
        let lambda = r.clean_eigenvalues();
        let overlap = s.eigenvectors.adjoint() * &r.eigenvectors;
        let mut joint = Vec::new();
        for (j, &l) in lambda.iter().enumerate() {
            if l <= 0.0 {
                continue;
            }
            for (i, &m) in mu.iter().enumerate() {
                joint.push(JointEntry {
                    eigenvalue: m.max(0.0) / l,
                    weight: l * overlap[(i, j)].norm_sqr(),
                    i,
                    j,
                });
            }
        }
        Ok(RelativeModularOperator { sigma: s, rho: r, mu, lambda, joint })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn joint(&self) -> &[JointEntry] {
        &self.joint
    }

    pub fn sigma_spectral(&self) -> &SpectralDecomposition {
        &self.sigma
    }

    pub fn rho_spectral(&self) -> &SpectralDecomposition {
        &self.rho
    }

    fn check_dim(&self, x: &ComplexMatrix) -> Result<()> {
        let n = self.dim();
        if x.nrows() != n || x.ncols() != n {
            return invalid(format!("expected a {n}×{n} matrix, got {}×{}", x.nrows(), x.ncols()));
        }
        Ok(())
    }

    /// `σ X ρ⁺`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.apply_function(&|e: f64| e, x).map(|a| a.value)
    }

    /// `‖Δ‖ = ‖σ‖ · ‖ρ⁺‖`.
    pub fn operator_norm(&self) -> f64 {
        let max_mu = self.mu.iter().copied().fold(0.0, f64::max);
        let min_lambda = self.lambda.iter().copied().filter(|&l| l > 0.0).fold(f64::INFINITY, f64::min);
        max_mu / min_lambda
    }

    /// `Σ_{i,j: λ_j > 0} f(μ_i/λ_j) P^σ_i X P^ρ_j`.
    pub fn apply_function<F: SpectralFunction + ?Sized>(
        &self,
        f: &F,
        x: &ComplexMatrix,
    ) -> Result<ModularApplication> {
        self.check_dim(x)?;
        let phi = &self.sigma.eigenvectors;
        let psi = &self.rho.eigenvectors;
        let mut y = phi.adjoint() * x * psi;
        let mut infinite = false;
        let n = self.dim();
        for j in 0..n {
            let l = self.lambda[j];
            for i in 0..n {
                if l <= 0.0 {
                    y[(i, j)] = c64(0.0, 0.0);
                    continue;
                }
                let e = self.mu[i] / l;
                let weight = y[(i, j)].norm_sqr();
                let v = match (e == 0.0, f.limit_at_zero()) {
                    (true, Some(limit)) => limit,
                    _ => f.value(e),
                };
                if v.is_finite() {
                    y[(i, j)] *= v;
                } else if weight <= WEIGHT_ZERO_TOL {
                    y[(i, j)] = c64(0.0, 0.0);
                } else if e == 0.0 && v == f64::INFINITY && f.limit_at_zero().is_some() {
                    infinite = true;
                    y[(i, j)] = c64(0.0, 0.0);
                } else {
                    return Err(Error::DomainError(format!(
                        "f({e:e}) = {v} on a component of weight {weight:e}"
                    )));
                }
            }
        }
        Ok(ModularApplication { value: phi * y * psi.adjoint(), infinite })
    }
}
