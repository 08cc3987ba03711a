//! Recovery-error bounds through `disc(1/2)` and the β-free discrepancy.

use super::{
    generic_gap_constant, BoundReport, TrialStates, FLAG_INFINITE_GAP, FLAG_RHO_SINGULAR, FLAG_SIGMA_N_SINGULAR,
    FLAG_SIGMA_SINGULAR, FLAG_SUPPORT_MISMATCH,
};
use crate::error::Result;
use crate::matrix::frobenius;
use crate::monotone::{check_beta, MonotoneDecreasingRep};
use crate::recovery::recovery_errors;
use crate::states::DensityMatrix;

/// How far the spectrum of `reduced` sticks out of `[λ_min, λ_max]` of `full` (negative if it does).
fn containment_margin(reduced: &DensityMatrix, full: &DensityMatrix) -> f64 {
    let (r, f) = (reduced.spectral(), full.spectral());
    (r.min_eigenvalue() - f.min_eigenvalue()).min(f.max_eigenvalue() - r.max_eigenvalue())
}

/// `‖ℛ_ρ(σ_N) − σ‖₁ ≤ 2 ‖σ_N^{1/2} ρ_N^{−1/2} ρ^{1/2} − σ^{1/2}‖₂`, its mirror
/// image, and the two weakenings of the mirror through `‖ρ_N‖‖σ_N⁻¹‖` and
/// `‖ρ‖‖σ⁻¹‖`. The report's `discrepancy` is the pseudo-power `disc(1/2)`;
/// the chain itself runs on [`TrialStates::recovery_discrepancy`].
pub fn recovery_chain(st: &TrialStates) -> Result<BoundReport> {
    let pseudo = st.discrepancy(0.5)?;
    let disc = st.recovery_discrepancy();
    let errors = recovery_errors(&st.rho, &st.sigma, &st.spec)?;
    let swapped_op = st.rho_n.sqrt() * st.sigma_n.power(-0.5) * st.sigma.sqrt() - st.rho.sqrt();
    let swapped = 2.0 * frobenius(&swapped_op);

    let mut r = BoundReport { beta: Some(0.5), discrepancy: pseudo, delta_norm: st.delta_norm(), ..BoundReport::new("recovery_chain") }
        .constant("recovery_discrepancy", disc)
        .constant("e_rho", errors.e_rho)
        .constant("e_sigma", errors.e_sigma)
        .rhs("rho_recovery", 2.0 * disc)
        .rhs("sigma_recovery_swapped", swapped)
        .margin("rho_recovery", 2.0 * disc - errors.e_rho)
        .margin("sigma_recovery_swapped", swapped - errors.e_sigma)
        .margin("rho_n_spectrum_contained", containment_margin(&st.rho_n, &st.rho))
        .margin("sigma_n_spectrum_contained", containment_margin(&st.sigma_n, &st.sigma));
    if !st.sigma_supported_in_rho() {
        r = r.flag(FLAG_SUPPORT_MISMATCH);
    }

    let Some(sigma_n_inv) = st.sigma_n.inverse_norm() else {
        return Ok(r.flag(FLAG_SIGMA_N_SINGULAR).flag(FLAG_SIGMA_SINGULAR));
    };
    let factored_op = st.rho_n.sqrt()
        * st.sigma_n.power(-0.5)
        * (st.sigma.sqrt() - st.sigma_n.sqrt() * st.rho_n.power(-0.5) * st.rho.sqrt());
    let factored = 2.0 * frobenius(&factored_op);
    let reduced_bound = 2.0 * (st.rho_n.norm() * sigma_n_inv).sqrt() * disc;
    r = r
        .rhs("sigma_recovery_factored", factored)
        .rhs("sigma_recovery_reduced_norms", reduced_bound)
        .margin("swapped_le_factored", factored - swapped)
        .margin("factored_le_reduced_norms", reduced_bound - factored)
        .margin("sigma_recovery_reduced_norms", reduced_bound - errors.e_sigma);

    let Some(sigma_inv) = st.sigma.inverse_norm() else {
        return Ok(r.flag(FLAG_SIGMA_SINGULAR));
    };
    let full_bound = 2.0 * (st.rho.norm() * sigma_inv).sqrt() * disc;
    Ok(r.rhs("sigma_recovery_full_norms", full_bound)
        .margin("reduced_le_full_norms", full_bound - reduced_bound)
        .margin("sigma_recovery_full_norms", full_bound - errors.e_sigma))
}

/// Recovery errors against a power of the `f`-gap: `gap ≥ K disc(1/2)^{4(1+c)}`
/// combined with the recovery chain.
///
/// Needs `supp σ ⊆ supp ρ`; otherwise the gap can vanish while `ℛ_ρ(σ_N) ≠ σ`
/// (e.g. `𝒩 = ℳ`, ρ singular), and no margins are recorded.
pub fn recovery_corollary(rep: &MonotoneDecreasingRep, st: &TrialStates) -> Result<BoundReport> {
    let gap = st.gap(rep)?;
    let disc = st.discrepancy(0.5)?;
    let delta_norm = st.delta_norm();
    let growth = rep.growth_at(0.5);
    let (k, e) = generic_gap_constant(0.5, delta_norm, growth)?;
    let errors = recovery_errors(&st.rho, &st.sigma, &st.spec)?;
    let disc_bound = if gap == f64::INFINITY { f64::INFINITY } else { (gap.max(0.0) / k).powf(1.0 / e) };
    let mut r = BoundReport {
        function: Some(rep.name().into()),
        gap,
        beta: Some(0.5),
        discrepancy: disc,
        delta_norm,
        ..BoundReport::new("recovery_corollary")
    }
    .constant("gap_exponent", 1.0 / e)
    .constant("K_gap", k)
    .rhs("rho_recovery", 2.0 * disc_bound);
    if gap == f64::INFINITY {
        r = r.flag(FLAG_INFINITE_GAP);
    }
    if !st.sigma_supported_in_rho() {
        return Ok(r.flag(FLAG_SUPPORT_MISMATCH).rhs("e_rho", errors.e_rho));
    }
    r = r.margin("rho_recovery", 2.0 * disc_bound - errors.e_rho);
    match st.sigma_n.inverse_norm() {
        Some(inv) => {
            let m = (st.rho_n.norm() * inv).sqrt().max(1.0);
            let rhs = 2.0 * m * disc_bound;
            Ok(r.constant("K", 2.0 * m * k.powf(-1.0 / e))
                .rhs("max_recovery", rhs)
                .margin("max_recovery", rhs - errors.e_rho.max(errors.e_sigma)))
        }
        None => Ok(r.constant("K", 2.0 * k.powf(-1.0 / e)).flag(FLAG_SIGMA_N_SINGULAR)),
    }
}

/// `‖σ_N^β ρ_N^{−β} − σ^β ρ^{−β}‖₂ ≤ ‖ρ^{−1/2}‖ disc(β)`.
///
/// For singular ρ the left side is taken on `supp ρ` (right multiplication by
/// its projector), which is what `(…)ρ^{−1/2}` equals there.
pub fn beta_free_discrepancy(beta: f64, st: &TrialStates) -> Result<BoundReport> {
    check_beta(beta)?;
    let disc = st.discrepancy(beta)?;
    let free = st.sigma_n.power(beta) * st.rho_n.power(-beta) - st.sigma.power(beta) * st.rho.power(-beta);
    let printed = frobenius(&free);
    let projected = frobenius(&(free * st.rho.support_projector()));
    let rhs = st.rho.pseudo_inverse_norm().sqrt() * disc;
    let mut r = BoundReport { beta: Some(beta), discrepancy: disc, delta_norm: st.delta_norm(), ..BoundReport::new("beta_free_discrepancy") }
        .rhs("bound", rhs)
        .rhs("lhs_on_support", projected)
        .rhs("lhs_full", printed);
    if st.rho.is_invertible() {
        r = r.margin("beta_free", rhs - printed);
    } else {
        r = r.flag(FLAG_RHO_SINGULAR).margin("beta_free_on_support", rhs - projected);
    }
    Ok(r)
}
