//! The Petz recovery map `ℛ_ρ(X) = ρ^{1/2} ρ_N^{−1/2} X ρ_N^{−1/2} ρ^{1/2}`
//! with `ρ_N = E(ρ)` and pseudo-inverse square roots.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::matrix::{eigh, hermitize, trace, trace_norm, ComplexMatrix};
use crate::states::{make_density, DensityMatrix};
use crate::subalgebra::{choi_matrix, SubalgebraSpec};

/// Tolerance for the `X ∈ 𝒩` check in [`PetzChannel::apply`].
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// `E(ρ)` as a density matrix.
pub fn reduced_state(spec: &SubalgebraSpec, rho: &DensityMatrix) -> Result<DensityMatrix> {
    make_density(&hermitize(&spec.conditional_expectation(rho.matrix())?))
}

#[derive(Debug, Clone)]
pub struct PetzChannel {
    rho: DensityMatrix,
    rho_n: DensityMatrix,
    spec: SubalgebraSpec,
    sqrt_rho: ComplexMatrix,
    inv_sqrt_rho_n: ComplexMatrix,
}

impl PetzChannel {
    pub fn build(rho: &DensityMatrix, spec: &SubalgebraSpec) -> Result<Self> {
        if rho.dim() != spec.dim() {
            return invalid(format!("state has dim {}, spec has dim {}", rho.dim(), spec.dim()));
        }
        let rho_n = reduced_state(spec, rho)?;
        Ok(PetzChannel {
            sqrt_rho: rho.sqrt(),
            inv_sqrt_rho_n: rho_n.power(-0.5),
            rho: rho.clone(),
            rho_n,
            spec: spec.clone(),
        })
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn rho_n(&self) -> &DensityMatrix {
        &self.rho_n
    }

    pub fn spec(&self) -> &SubalgebraSpec {
        &self.spec
    }

    /// Applies the channel to `X ∈ 𝒩`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !self.spec.contains(x, MEMBERSHIP_TOL)? {
            return invalid("input does not lie in the subalgebra");
        }
        Ok(self.apply_unchecked(x))
    }

    fn apply_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.sqrt_rho * &self.inv_sqrt_rho_n * x * &self.inv_sqrt_rho_n * &self.sqrt_rho
    }

    /// Choi matrix of `ℛ_ρ ∘ E` on the full matrix algebra.
    pub fn choi(&self) -> Result<ComplexMatrix> {
        choi_matrix(self.spec.dim(), |u| Ok(self.apply_unchecked(&self.spec.conditional_expectation(u)?)))
    }

    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(&hermitize(&self.choi()?))?.min_eigenvalue())
    }

    /// Largest `|Tr ℛ_ρ(X) − Tr X|` over `X = P E(|a⟩⟨b|) P`, `P` the support of `ρ_N`.
    pub fn trace_preservation_defect(&self) -> Result<f64> {
        let d = self.spec.dim();
        let p = self.rho_n.support_projector();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let mut unit = crate::matrix::zeros(d);
                unit[(a, b)] = crate::matrix::c64(1.0, 0.0);
                let x = &p * self.spec.conditional_expectation(&unit)? * &p;
                worst = worst.max((trace(&self.apply_unchecked(&x)) - trace(&x)).norm());
            }
        }
        Ok(worst)
    }
}

/// `e_ρ = ‖ℛ_ρ(σ_N) − σ‖₁` and `e_σ = ‖ℛ_σ(ρ_N) − ρ‖₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveryErrors {
    pub e_rho: f64,
    pub e_sigma: f64,
    /// `supp σ_N ⊄ supp ρ_N`: `ℛ_ρ(σ_N)` loses trace.
    pub rho_map_loses_trace: bool,
    /// `supp ρ_N ⊄ supp σ_N`.
    pub sigma_map_loses_trace: bool,
}

fn support_leak(inner: &DensityMatrix, outer: &DensityMatrix) -> bool {
    let p = outer.support_projector();
    let leak = 1.0 - trace(&(&p * inner.matrix())).re;
    leak > 1e-10
}

pub fn recovery_errors(rho: &DensityMatrix, sigma: &DensityMatrix, spec: &SubalgebraSpec) -> Result<RecoveryErrors> {
    let petz_rho = PetzChannel::build(rho, spec)?;
    let petz_sigma = PetzChannel::build(sigma, spec)?;
    let rho_n = petz_rho.rho_n();
    let sigma_n = petz_sigma.rho_n();
    let e_rho = trace_norm(&(petz_rho.apply_unchecked(sigma_n.matrix()) - sigma.matrix()));
    let e_sigma = trace_norm(&(petz_sigma.apply_unchecked(rho_n.matrix()) - rho.matrix()));
    Ok(RecoveryErrors {
        e_rho,
        e_sigma,
        rho_map_loses_trace: support_leak(sigma_n, rho_n),
        sigma_map_loses_trace: support_leak(rho_n, sigma_n),
    })
}
