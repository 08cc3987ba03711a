//! Intermediate quantities of the main inequality's proof, evaluated
//! numerically: the contraction `U`, the resolvent differences `w_t`, and
//! the integral identity tying them to the discrepancy.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{BoundReport, TrialStates};
use crate::entropy::s_t_modular;
use crate::error::Result;
use crate::matrix::{c64, frobenius, ComplexMatrix};
use crate::modular::RelativeModularOperator;
use crate::monotone::{check_beta, MonotoneDecreasingRep};
use crate::quadrature::{integrate_half_line, integrate_half_line_vec, QuadOptions};
use crate::states::ginibre_matrix;

#[derive(Debug, Clone, Copy)]
pub struct InternalsOptions {
    /// Random inputs used to test that `U` is a contraction.
    pub contraction_samples: usize,
    pub seed: u64,
    /// Absolute tolerance for the matrix-valued half-line quadrature.
    pub quad_tol: f64,
}

impl Default for InternalsOptions {
    fn default() -> Self {
        InternalsOptions { contraction_samples: 8, seed: 0, quad_tol: 1e-8 }
    }
}

struct Resolvents<'a> {
    st: &'a TrialStates,
    sqrt_rho: ComplexMatrix,
    sqrt_rho_n: ComplexMatrix,
    /// `ρ_N^{−1/2} ρ^{1/2}`, the right factor of `U`.
    u_right: ComplexMatrix,
}

impl<'a> Resolvents<'a> {
    fn new(st: &'a TrialStates) -> Self {
        let sqrt_rho = st.rho.sqrt();
        Resolvents {
            u_right: st.rho_n.power(-0.5) * &sqrt_rho,
            sqrt_rho_n: st.rho_n.sqrt(),
            sqrt_rho,
            st,
        }
    }

    /// `U(X) = E(X) ρ_N^{−1/2} ρ^{1/2}`.
    fn u(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(self.st.spec.conditional_expectation(x)? * &self.u_right)
    }

    fn resolvent(delta: &RelativeModularOperator, t: f64, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(delta.apply_function(&|e: f64| 1.0 / (t + e), x)?.value)
    }

    /// `w_t = U (t+Δ_N)⁻¹ ρ_N^{1/2} − (t+Δ)⁻¹ ρ^{1/2}`.
    ///
    /// For `t > 1` this uses `(t+Δ)⁻¹ = 1/t − Δ(t+Δ)⁻¹/t` and drops the
    /// `(U ρ_N^{1/2} − ρ^{1/2})/t` term, which vanishes exactly but in floating
    /// point leaves a `1e-16/t` tail that spoils the `t^β w_t` integral.
    fn w(&self, t: f64) -> Result<ComplexMatrix> {
        if t <= 1.0 {
            let reduced = Self::resolvent(&self.st.delta_n, t, &self.sqrt_rho_n)?;
            let full = Self::resolvent(&self.st.delta, t, &self.sqrt_rho)?;
            return Ok(self.u(&reduced)? - full);
        }
        let h = |e: f64| e / (t + e);
        let reduced = self.st.delta_n.apply_function(&h, &self.sqrt_rho_n)?.value;
        let full = self.st.delta.apply_function(&h, &self.sqrt_rho)?.value;
        Ok((full - self.u(&reduced)?).unscale(t))
    }
}

fn flatten(m: &ComplexMatrix) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn unflatten(v: &[f64], n: usize) -> ComplexMatrix {
    ComplexMatrix::from_iterator(n, n, v.chunks(2).map(|p| c64(p[0], p[1])))
}

/// Evaluates, with margins:
/// - `‖U X‖₂ ≤ ‖X‖₂` on random inputs,
/// - `S_(t)(ρ‖σ) − S_(t)(ρ_N‖σ_N) ≥ t ‖w_t‖₂²` and `‖w_t‖₂ ≤ 2/t` on `t_grid`,
/// - `∫ t ‖w_t‖₂² dμ_f ≤ gap` (for `a = 0`),
/// - `−(sin βπ/π) ∫ t^β w_t dt = σ_N^β ρ_N^{−β} ρ^{1/2} − σ^β ρ^{1/2−β}` to `1e-5`.
pub fn proof_internals(
    rep: &MonotoneDecreasingRep,
    beta: f64,
    st: &TrialStates,
    t_grid: &[f64],
    opts: InternalsOptions,
) -> Result<BoundReport> {
    check_beta(beta)?;
    let res = Resolvents::new(st);
    let n = st.rho.dim();
    let gap = st.gap(rep)?;

    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut contraction = f64::INFINITY;
    for _ in 0..opts.contraction_samples {
        let x = ginibre_matrix(n, n, &mut rng);
        let x = x.unscale(frobenius(&x));
        contraction = contraction.min(1.0 - frobenius(&res.u(&x)?));
    }
    let anchor = frobenius(&(res.u(&res.sqrt_rho_n)? - &res.sqrt_rho));

    let mut per_t_gap = f64::INFINITY;
    let mut decay = f64::INFINITY;
    let mut max_w = 0.0f64;
    for &t in t_grid {
        let w = frobenius(&res.w(t)?);
        let resolvent_gap = s_t_modular(t, &st.delta)? - s_t_modular(t, &st.delta_n)?;
        per_t_gap = per_t_gap.min(resolvent_gap - t * w * w);
        decay = decay.min(2.0 / t - w);
        max_w = max_w.max(w);
    }

    let mut fail: Option<crate::Error> = None;
    let quad = integrate_half_line_vec(
        |t| match res.w(t) {
            Ok(w) => flatten(&w.scale(t.powf(beta))),
            Err(e) => {
                fail.get_or_insert(e);
                vec![0.0; 2 * n * n]
            }
        },
        2 * n * n,
        QuadOptions { abs_tol: opts.quad_tol, rel_tol: 1e-10, ..Default::default() },
    )?;
    if let Some(e) = fail {
        return Err(e);
    }
    let integral = unflatten(&quad.value, n).scale(-(beta * PI).sin() / PI);
    let identity_error = frobenius(&(integral - st.discrepancy_operator(beta)?));

    let mut r = BoundReport {
        function: Some(rep.name().into()),
        gap,
        beta: Some(beta),
        discrepancy: st.discrepancy(beta)?,
        delta_norm: st.delta_norm(),
        ..BoundReport::new("proof_internals")
    }
    .constant("max_w_norm", max_w)
    .constant("quadrature_panels", quad.panels as f64)
    .rhs("integral_identity_error", identity_error)
    .rhs("anchor_error", anchor)
    .margin("u_contraction", contraction)
    .margin("u_anchor", 1e-10 - anchor)
    .margin("per_t_gap", per_t_gap)
    .margin("w_decay", decay)
    .margin("integral_identity", 1e-5 - identity_error);

    if rep.a() == 0.0 && gap.is_finite() {
        let weighted = integrate_half_line(
            |t| {
                let w = res.w(t).map(|w| frobenius(&w)).unwrap_or(f64::NAN);
                t * w * w * rep.density(t)
            },
            QuadOptions::with_tol(1e-9),
        )?;
        r = r.rhs("weighted_w_integral", weighted).margin("weighted_w_le_gap", gap - weighted);
    }
    Ok(r)
}
