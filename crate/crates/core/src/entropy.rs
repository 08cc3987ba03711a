//! Quasi-relative entropies `S_f(ρ‖σ) = ⟨√ρ, f(Δ_{σ,ρ}) √ρ⟩`, the resolvent
//! family `S_(t)`, and reconstruction of `S_f` from `S_(t)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::modular::{RelativeModularOperator, SpectralFunction, WEIGHT_ZERO_TOL};
use crate::monotone::MonotoneDecreasingRep;
use crate::quadrature::{integrate_half_line, QuadOptions};
use crate::states::DensityMatrix;

/// A possibly infinite entropy value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    /// `+∞` when `f(0⁺) = +∞` meets weight on `ker σ`.
    pub value: f64,
    /// Sum over the components where `f` is finite.
    pub finite_part: f64,
    /// Whether `value` equals `finite_part`.
    pub finite_part_valid: bool,
    /// Smallest eigenvalue of `Δ` carrying nonzero weight.
    pub min_weighted_eigenvalue: f64,
    /// `supp ρ ⊆ supp σ`, judged by the weight on the eigenvalue 0.
    pub support_included: bool,
}

impl EntropyValue {
    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

/// `Σ_{i,j} f(μ_i/λ_j) λ_j |⟨φ_i|ψ_j⟩|²` over the modular joint data.
pub fn quasi_entropy<F: SpectralFunction + ?Sized>(f: &F, delta: &RelativeModularOperator) -> Result<EntropyValue> {
    let mut finite_part = 0.0;
    let mut infinite = false;
    let mut min_weighted = f64::INFINITY;
    let mut kernel_weight = 0.0;
    for entry in delta.joint() {
        let (e, w) = (entry.eigenvalue, entry.weight);
        if w <= WEIGHT_ZERO_TOL {
            continue;
        }
        min_weighted = min_weighted.min(e);
        if e == 0.0 {
            kernel_weight += w;
        }
        let v = match (e == 0.0, f.limit_at_zero()) {
            (true, Some(limit)) => limit,
            _ => f.value(e),
        };
        if v.is_finite() {
            finite_part += v * w;
        } else if e == 0.0 && v == f64::INFINITY && f.limit_at_zero().is_some() {
            infinite = true;
        } else {
            return Err(Error::DomainError(format!("f({e:e}) = {v} on a component of weight {w:e}")));
        }
    }
    Ok(EntropyValue {
        value: if infinite { f64::INFINITY } else { finite_part },
        finite_part,
        finite_part_valid: !infinite,
        min_weighted_eigenvalue: min_weighted,
        support_included: kernel_weight <= WEIGHT_ZERO_TOL,
    })
}

pub fn s_f(rep: &MonotoneDecreasingRep, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyValue> {
    quasi_entropy(rep, &RelativeModularOperator::build(sigma, rho)?)
}

/// `S_(t) = Tr[(t + Δ)⁻¹ ρ]` from precomputed joint data.
pub fn s_t_modular(t: f64, delta: &RelativeModularOperator) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("t must be positive, got {t}"));
    }
    Ok(delta.joint().iter().map(|e| e.weight / (t + e.eigenvalue)).sum())
}

pub fn s_t(t: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    s_t_modular(t, &RelativeModularOperator::build(sigma, rho)?)
}

/// `S(ρ‖σ)` with `f = −log`.
pub fn umegaki(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyValue> {
    s_f(&MonotoneDecreasingRep::neg_log(), rho, sigma)
}

/// `S_{p_α}(ρ‖σ) = −Tr ρ^{1−α} σ^α`.
pub fn power_quasi(alpha: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyValue> {
    s_f(&MonotoneDecreasingRep::neg_power(alpha)?, rho, sigma)
}

/// `S_α(ρ‖σ) = (α−1)⁻¹ log Tr ρ^α σ^{1−α}`, for `α ∈ (0, 1)`.
pub fn renyi(alpha: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyValue> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("Rényi order must lie in (0, 1), got {alpha}"));
    }
    let p = power_quasi(1.0 - alpha, rho, sigma)?;
    renyi_from_power(alpha, p)
}

/// Turns `S_{p_{1−α}}` into the Rényi divergence of order α.
pub fn renyi_from_power(alpha: f64, power: EntropyValue) -> Result<EntropyValue> {
    let overlap = -power.value;
    if !(overlap > 0.0) {
        return Err(Error::NumericalFailure(format!("Tr ρ^α σ^(1−α) = {overlap} is not positive")));
    }
    let value = overlap.ln() / (alpha - 1.0);
    Ok(EntropyValue { value, finite_part: value, ..power })
}

/// `S_(t) − 1/(t+1) = Σ w(1−e)/((t+e)(t+1))`, using `Σw = Tr ρ = 1`.
///
/// The weights sum to 1 only up to roundoff; keeping that `1e-16/(t+1)`
/// residue would make `∫ t^α (…) dt` diverge for power densities.
fn resolvent_excess(t: f64, delta: &RelativeModularOperator) -> f64 {
    delta
        .joint()
        .iter()
        .map(|e| e.weight * (1.0 - e.eigenvalue) / ((t + e.eigenvalue) * (t + 1.0)))
        .sum()
}

/// `S_(t) − t/(t²+1)`, both `1/t` tails cancelled analytically.
fn centered_resolvent(t: f64, delta: &RelativeModularOperator) -> f64 {
    resolvent_excess(t, delta) + (1.0 - t) / ((t + 1.0) * (t * t + 1.0))
}

fn check_reconstructible(rep: &MonotoneDecreasingRep, tol: f64) -> Result<()> {
    if rep.a() != 0.0 {
        return Err(Error::Unsupported(format!(
            "reconstruction from S_(t) needs a = 0; {} has a = {}",
            rep.name(),
            rep.a()
        )));
    }
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    Ok(())
}

fn kernel_blocks(rep: &MonotoneDecreasingRep, delta: &RelativeModularOperator) -> bool {
    rep.at_zero().is_infinite()
        && delta
            .joint()
            .iter()
            .any(|e| e.eigenvalue == 0.0 && e.weight > WEIGHT_ZERO_TOL)
}

/// `S_f = −a − b + ∫₀^∞ (S_(t) − t/(t²+1)) dμ_f(t)` by quadrature.
pub fn integral_reconstruction(
    rep: &MonotoneDecreasingRep,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: f64,
) -> Result<f64> {
    check_reconstructible(rep, tol)?;
    let delta = RelativeModularOperator::build(sigma, rho)?;
    if kernel_blocks(rep, &delta) {
        return invalid("supp ρ is not contained in supp σ; the entropy is +∞");
    }
    let integral = integrate_half_line(
        |t| rep.density(t) * centered_resolvent(t, &delta),
        QuadOptions::with_tol(tol / 10.0),
    )?;
    Ok(-rep.a() - rep.b() + integral)
}

/// `S_f(ρ‖σ) − S_f(ρ_N‖σ_N) = ∫₀^∞ (S_(t)(ρ‖σ) − S_(t)(ρ_N‖σ_N)) dμ_f(t)`.
pub fn integral_gap_reconstruction(
    rep: &MonotoneDecreasingRep,
    (rho, sigma): (&DensityMatrix, &DensityMatrix),
    (rho_n, sigma_n): (&DensityMatrix, &DensityMatrix),
    tol: f64,
) -> Result<f64> {
    check_reconstructible(rep, tol)?;
    let full = RelativeModularOperator::build(sigma, rho)?;
    let reduced = RelativeModularOperator::build(sigma_n, rho_n)?;
    if kernel_blocks(rep, &full) {
        return invalid("supp ρ is not contained in supp σ; the gap is +∞");
    }
    integrate_half_line(
        |t| rep.density(t) * (resolvent_excess(t, &full) - resolvent_excess(t, &reduced)),
        QuadOptions::with_tol(tol / 10.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::from_real_diagonal;
    use crate::states::make_density;

    fn diag(v: &[f64]) -> DensityMatrix {
        make_density(&from_real_diagonal(v)).unwrap()
    }

    #[test]
    fn equal_states() {
        let r = diag(&[0.3, 0.7]);
        assert!(umegaki(&r, &r).unwrap().value.abs() < 1e-15);
        assert!((power_quasi(0.4, &r, &r).unwrap().value + 1.0).abs() < 1e-15);
        assert!((s_t(1.0, &r, &r).unwrap() - 0.5).abs() < 1e-15);
        assert!(renyi(0.5, &r, &r).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn commuting_examples() {
        let (r, s) = (diag(&[0.5, 0.5]), diag(&[0.25, 0.75]));
        let u = umegaki(&r, &s).unwrap();
        assert!((u.value - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((s_t(1.0, &r, &s).unwrap() - 8.0 / 15.0).abs() < 1e-15);
        let p = power_quasi(0.5, &r, &s).unwrap();
        assert!((p.value + (0.125f64.sqrt() + 0.375f64.sqrt())).abs() < 1e-15);
        let ren = renyi(0.5, &r, &s).unwrap();
        assert!((ren.value + 2.0 * (0.125f64.sqrt() + 0.375f64.sqrt()).ln()).abs() < 1e-14);
    }

    #[test]
    fn kernel_overlap_is_infinite() {
        let u = umegaki(&diag(&[0.5, 0.5]), &diag(&[1.0, 0.0])).unwrap();
        assert!(u.is_infinite() && !u.support_included && !u.finite_part_valid);
        let p = power_quasi(0.5, &diag(&[0.5, 0.5]), &diag(&[1.0, 0.0])).unwrap();
        assert!(!p.is_infinite());
    }

    #[test]
    fn resolvent_tail() {
        let (r, s) = (diag(&[0.5, 0.5]), diag(&[0.25, 0.75]));
        assert!((1e9 * s_t(1e9, &r, &s).unwrap() - 1.0).abs() < 1e-8);
        assert!(s_t(0.0, &r, &s).is_err());
    }

    #[test]
    fn reconstruction_examples() {
        let (r, s) = (diag(&[0.5, 0.5]), diag(&[0.25, 0.75]));
        let v = integral_reconstruction(&MonotoneDecreasingRep::neg_log(), &r, &s, 1e-8).unwrap();
        assert!((v - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-6);
        let half = MonotoneDecreasingRep::neg_power(0.5).unwrap();
        let v = integral_reconstruction(&half, &r, &r, 1e-8).unwrap();
        assert!((v + 1.0).abs() < 1e-6);
        let lin = MonotoneDecreasingRep::neg_log_linear(0.5).unwrap();
        assert!(matches!(integral_reconstruction(&lin, &r, &s, 1e-8), Err(Error::Unsupported(_))));
    }
}
