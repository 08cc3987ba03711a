//! Density matrices: validation and seeded sampling.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::{c64, eigh, hermitize, kron, trace, ComplexMatrix, SpectralDecomposition, C64};
use crate::subalgebra::SubalgebraSpec;

/// Most negative eigenvalue accepted in a density matrix.
pub const PSD_TOL: f64 = 1e-12;
/// Largest trace defect that is silently renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// A validated quantum state with its cached spectral decomposition.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    spectral: SpectralDecomposition,
    rank: usize,
}

impl DensityMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_invertible(&self) -> bool {
        self.rank == self.dim()
    }

    /// Pseudo-power `ρ^p`: only the support is raised to `p`, the kernel maps to 0.
    pub fn power(&self, p: f64) -> ComplexMatrix {
        self.spectral
            .apply(|x| x.powf(p), true)
            .expect("pseudo powers of a nonzero spectrum are finite")
    }

    pub fn sqrt(&self) -> ComplexMatrix {
        self.power(0.5)
    }

    pub fn pseudo_inverse(&self) -> ComplexMatrix {
        self.power(-1.0)
    }

    pub fn support_projector(&self) -> ComplexMatrix {
        self.spectral.support_projector()
    }

    /// ‖ρ‖, the largest eigenvalue.
    pub fn norm(&self) -> f64 {
        self.spectral.max_eigenvalue()
    }

    /// ‖ρ⁺‖, the reciprocal of the smallest nonzero eigenvalue.
    pub fn pseudo_inverse_norm(&self) -> f64 {
        1.0 / self
            .spectral
            .min_nonzero_eigenvalue()
            .expect("a density matrix has nonzero spectrum")
    }

    /// ‖ρ⁻¹‖ for invertible states, `None` otherwise.
    pub fn inverse_norm(&self) -> Option<f64> {
        self.is_invertible().then(|| self.pseudo_inverse_norm())
    }
}

/// Validates `a` as a density matrix, renormalizing a trace within `1e-9` of 1.
pub fn make_density(a: &ComplexMatrix) -> Result<DensityMatrix> {
    let spectral = eigh(a)?;
    let min = spectral.min_eigenvalue();
    if min < -PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let tr = trace(a).re;
    if (tr - 1.0).abs() > RENORMALIZE_TOL {
        return Err(Error::NotNormalized { trace: tr });
    }
    let matrix = hermitize(a).unscale(tr);
    let spectral = SpectralDecomposition {
        eigenvalues: spectral.eigenvalues.iter().map(|l| l / tr).collect(),
        ..spectral
    };
    let rank = spectral.rank();
    Ok(DensityMatrix { matrix, spectral, rank })
}

/// Clips negative eigenvalues to zero and renormalizes the trace.
pub fn project_to_density(a: &ComplexMatrix) -> Result<DensityMatrix> {
    let s = eigh(a)?;
    let clipped = s.apply(|x| x.max(0.0), false)?;
    let tr = trace(&clipped).re;
    if tr <= 0.0 {
        return invalid("matrix has no positive part");
    }
    make_density(&clipped.unscale(tr))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorKind {
    Ginibre,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Ginibre,
    Diagonal,
    /// `ρ₁ ⊗ ρ₂` with `dim = factors[0] · factors[1]`, both factors full rank.
    Product { factors: [usize; 2], factor_kind: FactorKind },
    /// A pair that is exactly Petz-recoverable for a given subalgebra, with σ
    /// perturbed by `epsilon` times a unit traceless Hermitian matrix.
    PerturbedRecoverable { epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub dim: usize,
    pub rank: usize,
    pub seed: u64,
    pub kind: SamplerKind,
}

impl SamplerConfig {
    pub fn ginibre(dim: usize, rank: usize, seed: u64) -> Self {
        SamplerConfig { dim, rank, seed, kind: SamplerKind::Ginibre }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.rank == 0 || self.rank > self.dim {
            return invalid(format!("need 1 <= rank <= dim, got rank {} dim {}", self.rank, self.dim));
        }
        match self.kind {
            SamplerKind::Product { factors, .. } => {
                if factors[0] * factors[1] != self.dim || factors.contains(&0) {
                    return invalid(format!("factors {factors:?} do not multiply to dim {}", self.dim));
                }
                if self.rank != self.dim {
                    return invalid("product sampler draws full-rank factors; rank must equal dim");
                }
            }
            SamplerKind::PerturbedRecoverable { epsilon } => {
                if !(epsilon >= 0.0 && epsilon.is_finite()) {
                    return invalid(format!("epsilon must be finite and >= 0, got {epsilon}"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based generator for one trial: keyed by `seed`, stream chosen by
/// hashing `(seed, trial_index)`.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(splitmix64(seed));
    rng.set_stream(splitmix64(seed ^ splitmix64(trial_index.wrapping_add(1))));
    rng
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// `G G* / Tr(G G*)` with `G` a `dim × rank` complex Ginibre matrix.
pub fn sample_ginibre<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let g = ginibre_matrix(dim, rank, rng);
    let w = &g * g.adjoint();
    let tr = trace(&w).re;
    make_density(&hermitize(&w).unscale(tr))
}

/// Diagonal state with `rank` exponential weights on random positions.
pub fn sample_diagonal<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let mut weights: Vec<f64> = (0..dim)
        .map(|k| if k < rank { rng.sample::<f64, _>(Exp1) + f64::MIN_POSITIVE } else { 0.0 })
        .collect();
    weights.shuffle(rng);
    let total: f64 = weights.iter().sum();
    let diag: Vec<f64> = weights.iter().map(|w| w / total).collect();
    make_density(&crate::matrix::from_real_diagonal(&diag))
}

fn sample_factor<R: Rng + ?Sized>(kind: FactorKind, dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    match kind {
        FactorKind::Ginibre => sample_ginibre(dim, dim, rng),
        FactorKind::Diagonal => sample_diagonal(dim, dim, rng),
    }
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre_matrix(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Random traceless Hermitian matrix with unit Hilbert–Schmidt norm.
pub fn traceless_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre_matrix(dim, dim, rng);
    let mut h = hermitize(&g);
    let shift = trace(&h) / c64(dim as f64, 0.0);
    for i in 0..dim {
        h[(i, i)] -= shift;
    }
    let n = crate::matrix::frobenius(&h);
    if n > 0.0 {
        h.unscale(n)
    } else {
        h
    }
}

/// Samples one state for the single-state sampler kinds.
pub fn sample_with<R: Rng + ?Sized>(config: &SamplerConfig, rng: &mut R) -> Result<DensityMatrix> {
    config.validate()?;
    match config.kind {
        SamplerKind::Ginibre => sample_ginibre(config.dim, config.rank, rng),
        SamplerKind::Diagonal => sample_diagonal(config.dim, config.rank, rng),
        SamplerKind::Product { factors, factor_kind } => {
            let a = sample_factor(factor_kind, factors[0], rng)?;
            let b = sample_factor(factor_kind, factors[1], rng)?;
            make_density(&kron(a.matrix(), b.matrix()))
        }
        SamplerKind::PerturbedRecoverable { .. } => {
            invalid("perturbed-recoverable samples a pair; use sample_recoverable")
        }
    }
}

/// Samples from the config's own stream (trial index 0).
pub fn sample(config: &SamplerConfig) -> Result<DensityMatrix> {
    sample_with(config, &mut trial_rng(config.seed, 0))
}

/// An exactly recoverable pair `(ρ, σ₀)` plus a fixed perturbation direction
/// `H`, traceless with `‖H‖ = λ_min(σ₀)`: `σ₀ + εH` stays positive definite for
/// `ε < 1`, so ε is a relative size and clipping only happens beyond that.
#[derive(Debug, Clone)]
pub struct RecoverablePair {
    pub rho: DensityMatrix,
    pub sigma_exact: DensityMatrix,
    pub perturbation: ComplexMatrix,
}

impl RecoverablePair {
    /// `σ(ε)`: `σ₀ + ε·H`, clipped back to a density matrix.
    pub fn sigma_at(&self, epsilon: f64) -> Result<DensityMatrix> {
        if epsilon == 0.0 {
            return Ok(self.sigma_exact.clone());
        }
        project_to_density(&(self.sigma_exact.matrix() + self.perturbation.scale(epsilon)))
    }
}

fn dirichlet_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// States of the form `B (⊕ₖ pₖ ρₖ ⊗ ωₖ) B*` and `B (⊕ₖ qₖ σₖ ⊗ ωₖ) B*` with a
/// shared multiplicity part `ωₖ`; these saturate the monotonicity inequality
/// for the given subalgebra.
pub fn sample_recoverable<R: Rng + ?Sized>(spec: &SubalgebraSpec, rng: &mut R) -> Result<RecoverablePair> {
    let dim = spec.dim();
    let k = spec.blocks().len();
    let p = dirichlet_weights(k, rng);
    let q = dirichlet_weights(k, rng);
    let mut rho_rot = crate::matrix::zeros(dim);
    let mut sigma_rot = crate::matrix::zeros(dim);
    let mut offset = 0;
    for (idx, &(n, m)) in spec.blocks().iter().enumerate() {
        let omega = sample_ginibre(m, m, rng)?;
        let rk = sample_ginibre(n, n, rng)?;
        let sk = sample_ginibre(n, n, rng)?;
        let rb = kron(rk.matrix(), omega.matrix()).scale(p[idx]);
        let sb = kron(sk.matrix(), omega.matrix()).scale(q[idx]);
        let size = n * m;
        rho_rot.view_mut((offset, offset), (size, size)).copy_from(&rb);
        sigma_rot.view_mut((offset, offset), (size, size)).copy_from(&sb);
        offset += size;
    }
    let rho = make_density(&hermitize(&spec.from_rotated(&rho_rot)))?;
    let sigma_exact = make_density(&hermitize(&spec.from_rotated(&sigma_rot)))?;
    let h = traceless_hermitian(dim, rng);
    let h_norm = crate::matrix::operator_norm(&h);
    let perturbation = if h_norm > 0.0 { h.scale(sigma_exact.spectral().min_eigenvalue() / h_norm) } else { h };
    Ok(RecoverablePair { rho, sigma_exact, perturbation })
}

/// `(ρ₁⊗ρ₂, ρ₁⊗σ₂)`: recoverable for the subalgebra `1 ⊗ M_{n₂}`.
pub fn sample_product_pair<R: Rng + ?Sized>(
    n1: usize,
    n2: usize,
    rng: &mut R,
) -> Result<(DensityMatrix, DensityMatrix)> {
    let r1 = sample_ginibre(n1, n1, rng)?;
    let r2 = sample_ginibre(n2, n2, rng)?;
    let s2 = sample_ginibre(n2, n2, rng)?;
    Ok((
        make_density(&kron(r1.matrix(), r2.matrix()))?,
        make_density(&kron(r1.matrix(), s2.matrix()))?,
    ))
}
