//! Gap lower bounds obtained by optimizing the main inequality over `T`.

use std::f64::consts::PI;

use super::{
    decay_coefficient, lemma_opt, q_beta, theorem_exponents, BoundReport, TrialStates, FLAG_GRID_C,
    FLAG_INFINITE_GAP, FLAG_SIGMA_SINGULAR, FLAG_SUPPORT_MISMATCH,
};
use crate::entropy::{quasi_entropy, renyi_from_power};
use crate::error::{invalid, Result};
use crate::monotone::{check_beta, Growth, MonotoneDecreasingRep};
use crate::recovery::recovery_errors;

/// `(K, E)` with `gap ≥ K · disc(β)^E`, from the main inequality with
/// `C_{T,β} ≤ C T^{2c}` and the closed-form minimum over `T`.
///
/// With `a, b` the decaying and growing exponents (`b` including `c`) and
/// `K₀ = 2(1/β + ‖Δ‖/(1−β))`: `E = 2(a+b)/a` and
/// `K = (π/sin βπ)^E ((a+b)/(ab))^{−E} (a K₀)^{−2b/a} b^{−2} C^{−1}`.
pub fn generic_gap_constant(beta: f64, delta_norm: f64, growth: Growth) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let (a, n) = theorem_exponents(beta);
    let b = n + growth.exponent;
    let k0 = decay_coefficient(beta, delta_norm);
    let e = 2.0 * (a + b) / a;
    let k = (PI / (beta * PI).sin()).powf(e) * ((a + b) / (a * b)).powf(-e) * (a * k0).powf(-2.0 * b / a)
        / (b * b * growth.constant);
    Ok((k, e))
}

fn base_report(bound: &str, rep: &MonotoneDecreasingRep, beta: f64, st: &TrialStates) -> Result<BoundReport> {
    let gap = st.gap(rep)?;
    let mut r = BoundReport {
        function: Some(rep.name().into()),
        gap,
        beta: Some(beta),
        discrepancy: st.discrepancy(beta)?,
        delta_norm: st.delta_norm(),
        ..BoundReport::new(bound)
    };
    if gap == f64::INFINITY {
        r = r.flag(FLAG_INFINITE_GAP);
    }
    Ok(r)
}

/// `gap − K·disc^E`, `+∞` for an infinite gap.
fn lower_bound_margin(gap: f64, rhs: f64) -> f64 {
    if gap == f64::INFINITY {
        f64::INFINITY
    } else {
        gap - rhs
    }
}

/// Monotonicity itself: the margin is the gap.
pub fn dpi_report(rep: &MonotoneDecreasingRep, st: &TrialStates) -> Result<BoundReport> {
    let gap = st.gap(rep)?;
    let mut r = BoundReport { function: Some(rep.name().into()), gap, delta_norm: st.delta_norm(), ..BoundReport::new("dpi") }
        .margin("gap_nonnegative", gap);
    if gap == f64::INFINITY {
        r = r.flag(FLAG_INFINITE_GAP);
    }
    Ok(r)
}

pub fn generic_corollary_bound(rep: &MonotoneDecreasingRep, beta: f64, st: &TrialStates) -> Result<BoundReport> {
    check_beta(beta)?;
    let growth = rep.growth_at(beta);
    let mut r = base_report("generic_corollary", rep, beta, st)?;
    let (k, e) = generic_gap_constant(beta, r.delta_norm, growth)?;
    let rhs = k * r.discrepancy.powf(e);
    let (a, n) = theorem_exponents(beta);
    let k0 = decay_coefficient(beta, r.delta_norm);
    if r.gap > 0.0 && r.gap.is_finite() {
        let big_n = (growth.constant * r.gap).sqrt();
        let (_, t_star) = lemma_opt(k0, a, big_n, n + growth.exponent)?;
        r = r.constant("T_star", t_star);
    }
    if !rep.is_builtin() {
        r = r.flag(FLAG_GRID_C);
    }
    let margin = lower_bound_margin(r.gap, rhs);
    Ok(r.constant("C", growth.constant)
        .constant("c", growth.exponent)
        .constant("K_decay", k0)
        .constant("K", k)
        .constant("exponent", e)
        .rhs("lower_bound", rhs)
        .margin("gap_lower_bound", margin))
}

/// Printed constants for `f = −log`: `K^L_β` for `β < 1/2` (exponent
/// `1/(β(1−β))`), `K^U_β` for `β ≥ 1/2` (exponent `2/(1−β)`).
pub fn log_closed_form_constant(beta: f64, delta_norm: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let s = (beta * PI).sin();
    if beta < 0.5 {
        let q = q_beta(beta);
        let p = 1.0 / (beta * (1.0 - beta));
        let k = (PI * q * beta / s).powf(p)
            * (1.0 + beta / (1.0 - beta) * delta_norm).powf(-q * p)
            * 2f64.powf(-q * p)
            * (q / (2.0 * (1.0 - beta))).powi(-2);
        Ok((k, p))
    } else {
        let p = 2.0 / (1.0 - beta);
        let k = (PI * beta * (1.0 - beta) / s).powf(p)
            * ((1.0 - beta) / beta + delta_norm).powf(-beta * p)
            * 2f64.powf(-beta * p)
            / (beta * beta);
        Ok((k, p))
    }
}

/// Exponent obtained by optimizing the power-function bound:
/// `(1+α(1−β))/(β(1−β))` for `β < 1/2`, `(2β+α(1−β))/(β(1−β))` otherwise.
pub fn power_proof_exponent(alpha: f64, beta: f64) -> f64 {
    let lead = if beta < 0.5 { 1.0 } else { 2.0 * beta };
    (lead + alpha * (1.0 - beta)) / (beta * (1.0 - beta))
}

/// Exponents as displayed alongside the power corollary statement:
/// `(4−2β+α(1−β))/(1−β²)` for `β < 1/2`, `(2(1+β)+α(1−β))/(1−β²)` otherwise.
pub fn power_displayed_exponent(alpha: f64, beta: f64) -> f64 {
    let lead = if beta < 0.5 { 4.0 - 2.0 * beta } else { 2.0 * (1.0 + beta) };
    (lead + alpha * (1.0 - beta)) / (1.0 - beta * beta)
}

/// Printed constants `K^L_{α,β}` (`β < 1/2`) and `K^U_{α,β}` (`β ≥ 1/2`) for
/// `f = −x^α`, paired with [`power_proof_exponent`].
pub fn power_closed_form_constant(alpha: f64, beta: f64, delta_norm: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("power must lie in (0, 1), got {alpha}"));
    }
    let sb = (beta * PI).sin();
    let sa = (alpha * PI).sin();
    let bb = beta * (1.0 - beta);
    let am = alpha * (1.0 - beta);
    let e = power_proof_exponent(alpha, beta);
    let k = if beta < 0.5 {
        let q = am + q_beta(beta);
        (1.0 + beta / (1.0 - beta) * delta_norm).powf(-q / bb)
            * 2f64.powf(-q / bb)
            * (sa / PI)
            * (PI * beta * q / ((1.0 + am) * sb)).powf(e)
            * (q / (2.0 * (1.0 - beta))).powi(-2)
    } else {
        let q = 2.0 * beta * beta + am;
        ((1.0 - beta) / beta + delta_norm).powf(-q / bb)
            * 2f64.powf(-q / bb)
            * (sa / PI)
            * (PI * (1.0 - beta) * q / ((2.0 * beta + am) * sb)).powf(e)
            * (q / (2.0 * beta)).powi(-2)
    };
    Ok((k, e))
}

fn relative_difference(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

pub fn corollary_log_bound(beta: f64, st: &TrialStates) -> Result<BoundReport> {
    let rep = MonotoneDecreasingRep::neg_log();
    let r = base_report("corollary_log", &rep, beta, st)?;
    let (k, e) = log_closed_form_constant(beta, r.delta_norm)?;
    let (kg, eg) = generic_gap_constant(beta, r.delta_norm, rep.growth_at(beta))?;
    let rhs = k * r.discrepancy.powf(e);
    let margin = lower_bound_margin(r.gap, rhs);
    Ok(r.constant(if beta < 0.5 { "K_L" } else { "K_U" }, k)
        .constant("exponent", e)
        .constant("generic_K", kg)
        .constant("generic_exponent", eg)
        .constant("closed_vs_generic_rel", relative_difference(k, kg).max(relative_difference(e, eg)))
        .rhs("lower_bound", rhs)
        .margin("gap_lower_bound", margin))
}

pub fn corollary_power_bound(alpha: f64, beta: f64, st: &TrialStates) -> Result<BoundReport> {
    let rep = MonotoneDecreasingRep::neg_power(alpha)?;
    let r = base_report("corollary_power", &rep, beta, st)?;
    let (k, e) = power_closed_form_constant(alpha, beta, r.delta_norm)?;
    let (kg, eg) = generic_gap_constant(beta, r.delta_norm, rep.growth_at(beta))?;
    let displayed = power_displayed_exponent(alpha, beta);
    let rhs = k * r.discrepancy.powf(e);
    let displayed_rhs = k * r.discrepancy.powf(displayed);
    let margin = lower_bound_margin(r.gap, rhs);
    Ok(r.constant("alpha", alpha)
        .constant(if beta < 0.5 { "K_L" } else { "K_U" }, k)
        .constant("exponent", e)
        .constant("displayed_exponent", displayed)
        .constant("generic_K", kg)
        .constant("generic_exponent", eg)
        .constant("closed_vs_generic_rel", relative_difference(k, kg).max(relative_difference(e, eg)))
        .rhs("lower_bound", rhs)
        .rhs("displayed_exponent_lower_bound", displayed_rhs)
        .margin("gap_lower_bound", margin))
}

/// Rényi divergence of order `α ∈ (0, 1)`: the bound through `K^U_{1−α}` and
/// `disc(1/2)^{6−2α}`, and for invertible σ the recovery-error form in both
/// directions. `gap` here is the Rényi gap.
///
/// The recovery-error form is only evaluated when `supp σ ⊆ supp ρ` (for
/// invertible σ: ρ invertible too); see [`super::recovery_corollary`].
pub fn renyi_bound(alpha: f64, st: &TrialStates) -> Result<BoundReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("Rényi order must lie in (0, 1), got {alpha}"));
    }
    let p = MonotoneDecreasingRep::neg_power(1.0 - alpha)?;
    let full = renyi_from_power(alpha, quasi_entropy(&p, &st.delta)?)?;
    let reduced = renyi_from_power(alpha, quasi_entropy(&p, &st.delta_n)?)?;
    let gap = full.value - reduced.value;
    let disc = st.discrepancy(0.5)?;
    let delta_norm = st.delta_norm();
    let (k, power_exp) = power_closed_form_constant(1.0 - alpha, 0.5, delta_norm)?;
    let e = 6.0 - 2.0 * alpha;
    let inv = 1.0 / (1.0 - alpha);
    let rhs = inv * (k * disc.powf(e)).ln_1p();
    let mut r = BoundReport { gap, beta: Some(0.5), discrepancy: disc, delta_norm, ..BoundReport::new("renyi") }
        .constant("alpha", alpha)
        .constant("K_U", k)
        .constant("exponent", e)
        .constant("power_exponent", power_exp)
        .rhs("theorem", rhs)
        .margin("theorem", gap - rhs);

    let Some(sigma_inv_norm) = st.sigma.inverse_norm() else {
        return Ok(r.flag(FLAG_SIGMA_SINGULAR));
    };
    if !st.sigma_supported_in_rho() {
        return Ok(r.flag(FLAG_SUPPORT_MISMATCH));
    }
    let errors = recovery_errors(&st.rho, &st.sigma, &st.spec)?;
    let worst = errors.e_rho.max(errors.e_sigma);
    let m = (st.rho.norm() * sigma_inv_norm).sqrt();
    let remax = inv * (0.5 / m * k * worst.powf(e)).ln_1p();
    // the same statement solved for the recovery error
    let inverted_lhs = worst.powf(e);
    let inverted_rhs = 2.0 * m / k * ((1.0 - alpha) * gap).exp_m1();
    // what the two recovery inequalities actually give: max ≤ 2m · disc
    let rigorous = inv * (k * (worst / (2.0 * m)).powf(e)).ln_1p();
    r = r
        .constant("K_hat", 0.5 / m * k)
        .constant("rho_sigma_inv_factor", m)
        .rhs("max_recovery_error", worst)
        .rhs("recovery_form", remax)
        .rhs("recovery_form_inverted", inverted_rhs)
        .rhs("recovery_form_inverted_lhs", inverted_lhs)
        .rhs("recovery_form_rigorous", rigorous)
        .margin("recovery_form", gap - remax)
        // scaled by K/2m so that roundoff in the gap is not amplified
        .margin("recovery_form_inverted", ((1.0 - alpha) * gap).exp_m1() - 0.5 / m * k * inverted_lhs)
        .margin("recovery_form_rigorous", gap - rigorous);
    Ok(r)
}
