//! Stability bounds relating the entropy gap `S_f(ρ‖σ) − S_f(ρ_N‖σ_N)` to
//! the discrepancy `‖σ_N^β ρ_N^{−β} ρ^{1/2} − σ^β ρ^{1/2−β}‖₂`, and to
//! Petz recovery errors.

mod chain;
mod corollaries;
mod internals;

pub use chain::{beta_free_discrepancy, recovery_chain, recovery_corollary};
pub use corollaries::{
    corollary_log_bound, corollary_power_bound, dpi_report, generic_corollary_bound, generic_gap_constant,
    log_closed_form_constant, power_closed_form_constant, power_displayed_exponent, power_proof_exponent,
    renyi_bound,
};
pub use internals::{proof_internals, InternalsOptions};

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::entropy::quasi_entropy;
use crate::error::{invalid, Result};
use crate::matrix::{frobenius, ComplexMatrix};
use crate::modular::RelativeModularOperator;
use crate::monotone::{check_beta, MonotoneDecreasingRep};
use crate::recovery::reduced_state;
use crate::states::DensityMatrix;
use crate::subalgebra::SubalgebraSpec;

pub const FLAG_INFINITE_GAP: &str = "infinite-gap";
pub const FLAG_GRID_C: &str = "grid-estimated-C";
pub const FLAG_SIGMA_N_SINGULAR: &str = "sigma_N-singular";
pub const FLAG_SIGMA_SINGULAR: &str = "sigma-singular";
pub const FLAG_RHO_SINGULAR: &str = "rho-singular";
/// `supp σ ⊄ supp ρ`: recovery-error corollaries do not apply.
pub const FLAG_SUPPORT_MISMATCH: &str = "sigma-support-exceeds-rho";

/// `‖σ^{1/2}(1 − P_ρ)‖₂` above this counts as `supp σ ⊄ supp ρ`.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Default pass tolerance on margins.
pub const MARGIN_TOL: f64 = 1e-8;

/// One evaluated bound. Margins are slacks: positive means the bound holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(serialize_with = "ser_ext")]
    pub gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(serialize_with = "ser_ext")]
    pub discrepancy: f64,
    #[serde(serialize_with = "ser_ext")]
    pub delta_norm: f64,
    #[serde(serialize_with = "ser_ext_map")]
    pub constants: BTreeMap<String, f64>,
    #[serde(serialize_with = "ser_ext_map")]
    pub rhs_values: BTreeMap<String, f64>,
    #[serde(serialize_with = "ser_ext_map")]
    pub margins: BTreeMap<String, f64>,
    pub flags: BTreeSet<String>,
}

impl BoundReport {
    pub fn new(bound: &str) -> Self {
        BoundReport {
            bound: bound.into(),
            function: None,
            gap: 0.0,
            beta: None,
            discrepancy: 0.0,
            delta_norm: 0.0,
            constants: BTreeMap::new(),
            rhs_values: BTreeMap::new(),
            margins: BTreeMap::new(),
            flags: BTreeSet::new(),
        }
    }

    pub fn constant(mut self, key: &str, value: f64) -> Self {
        self.constants.insert(key.into(), value);
        self
    }

    pub fn rhs(mut self, key: &str, value: f64) -> Self {
        self.rhs_values.insert(key.into(), value);
        self
    }

    pub fn margin(mut self, key: &str, value: f64) -> Self {
        self.margins.insert(key.into(), value);
        self
    }

    pub fn flag(mut self, flag: &str) -> Self {
        self.flags.insert(flag.into());
        self
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.values().copied().fold(f64::INFINITY, f64::min)
    }

    /// Every margin is at least `−tol` (NaN fails).
    pub fn passed(&self, tol: f64) -> bool {
        self.margins.values().all(|m| *m >= -tol)
    }
}

/// Extended reals as JSON: finite numbers stay numbers, the rest become strings.
pub fn ext_real_json(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        "nan".into()
    }
}

pub(crate) fn ser_ext<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    ext_real_json(*x).serialize(s)
}

pub(crate) fn ser_ext_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &ext_real_json(*v))?;
    }
    map.end()
}

/// ρ, σ, their reductions and both modular operators for one trial.
#[derive(Debug, Clone)]
pub struct TrialStates {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub rho_n: DensityMatrix,
    pub sigma_n: DensityMatrix,
    pub spec: SubalgebraSpec,
    /// `Δ_{σ,ρ}`.
    pub delta: RelativeModularOperator,
    /// `Δ_{σ_N,ρ_N}`.
    pub delta_n: RelativeModularOperator,
}

impl TrialStates {
    pub fn new(rho: &DensityMatrix, sigma: &DensityMatrix, spec: &SubalgebraSpec) -> Result<Self> {
        if rho.dim() != spec.dim() || sigma.dim() != spec.dim() {
            return invalid(format!(
                "dims differ: ρ {}, σ {}, spec {}",
                rho.dim(),
                sigma.dim(),
                spec.dim()
            ));
        }
        let rho_n = reduced_state(spec, rho)?;
        let sigma_n = reduced_state(spec, sigma)?;
        Ok(TrialStates {
            delta: RelativeModularOperator::build(sigma, rho)?,
            delta_n: RelativeModularOperator::build(&sigma_n, &rho_n)?,
            rho: rho.clone(),
            sigma: sigma.clone(),
            rho_n,
            sigma_n,
            spec: spec.clone(),
        })
    }

    /// `S_f(ρ‖σ) − S_f(ρ_N‖σ_N)`, `+∞` when the full entropy is infinite.
    pub fn gap(&self, rep: &MonotoneDecreasingRep) -> Result<f64> {
        let full = quasi_entropy(rep, &self.delta)?;
        if full.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let reduced = quasi_entropy(rep, &self.delta_n)?;
        Ok(full.value - reduced.value)
    }

    pub fn delta_norm(&self) -> f64 {
        self.delta.operator_norm()
    }

    pub fn discrepancy_operator(&self, beta: f64) -> Result<ComplexMatrix> {
        check_beta(beta)?;
        let left = self.sigma_n.power(beta) * self.rho_n.power(-beta) * self.rho.sqrt();
        let right = self.sigma.power(beta) * self.rho.power(0.5 - beta);
        Ok(left - right)
    }

    /// `‖σ_N^β ρ_N^{−β} ρ^{1/2} − σ^β ρ^{1/2−β}‖₂` with pseudo-powers.
    pub fn discrepancy(&self, beta: f64) -> Result<f64> {
        Ok(frobenius(&self.discrepancy_operator(beta)?))
    }
}

impl TrialStates {
    /// `‖σ_N^{1/2} ρ_N^{−1/2} ρ^{1/2} − σ^{1/2}‖₂`: the β = 1/2 discrepancy with
    /// `σ^{1/2}` in place of `σ^{1/2} ρ^0 = σ^{1/2} P_ρ`. The two agree iff
    /// `supp σ ⊆ supp ρ`; recovery errors are controlled by this one.
    pub fn recovery_discrepancy(&self) -> f64 {
        let a = self.sigma_n.sqrt() * self.rho_n.power(-0.5) * self.rho.sqrt();
        frobenius(&(a - self.sigma.sqrt()))
    }

    /// `‖σ^{1/2}(1 − P_ρ)‖₂`.
    pub fn support_excess(&self) -> f64 {
        let outside = crate::matrix::identity(self.rho.dim()) - self.rho.support_projector();
        frobenius(&(self.sigma.sqrt() * outside))
    }

    pub fn sigma_supported_in_rho(&self) -> bool {
        self.support_excess() <= SUPPORT_TOL
    }
}

pub fn discrepancy_norm(
    beta: f64,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    spec: &SubalgebraSpec,
) -> Result<f64> {
    TrialStates::new(rho, sigma, spec)?.discrepancy(beta)
}

/// `2 (1/β + ‖Δ‖/(1−β))`, the coefficient of the decaying term.
pub fn decay_coefficient(beta: f64, delta_norm: f64) -> f64 {
    2.0 * (1.0 / beta + delta_norm / (1.0 - beta))
}

/// `1 − 2β + 2β²`.
pub(crate) fn q_beta(beta: f64) -> f64 {
    1.0 - 2.0 * beta + 2.0 * beta * beta
}

/// `(k, n)`: exponents of `T` in the decaying and growing terms.
pub fn theorem_exponents(beta: f64) -> (f64, f64) {
    if beta <= 0.5 {
        (beta, q_beta(beta) / (2.0 * (1.0 - beta)))
    } else {
        (1.0 - beta, beta)
    }
}

/// Right side of the main inequality for a given `C_{T,β}`.
pub fn theorem_rhs(beta: f64, t: f64, c_value: f64, delta_norm: f64, gap: f64) -> f64 {
    if gap == f64::INFINITY {
        return f64::INFINITY;
    }
    let (k, n) = theorem_exponents(beta);
    decay_coefficient(beta, delta_norm) * t.powf(-k) + t.powf(n) * c_value.sqrt() * gap.max(0.0).sqrt()
}

pub fn theorem_bound(rep: &MonotoneDecreasingRep, beta: f64, t: f64, delta_norm: f64, gap: f64) -> Result<f64> {
    let c = rep.c_constant(t, beta)?;
    Ok(theorem_rhs(beta, t, c.value, delta_norm, gap))
}

/// `(π / sin βπ) ‖σ_N^β ρ_N^{−β} ρ^{1/2} − σ^β ρ^{1/2−β}‖₂`.
pub fn theorem_lhs(beta: f64, discrepancy: f64) -> f64 {
    PI / (beta * PI).sin() * discrepancy
}

/// 40 log-spaced points on `[1e-3, 1e6]`.
pub fn theorem_t_grid() -> Vec<f64> {
    (0..40).map(|k| 10f64.powf(-3.0 + 9.0 * k as f64 / 39.0)).collect()
}

/// Checks the main inequality at every `T` of [`theorem_t_grid`].
pub fn theorem_check(rep: &MonotoneDecreasingRep, beta: f64, st: &TrialStates) -> Result<BoundReport> {
    check_beta(beta)?;
    let gap = st.gap(rep)?;
    let disc = st.discrepancy(beta)?;
    let delta_norm = st.delta_norm();
    let lhs = theorem_lhs(beta, disc);
    let mut best = (f64::INFINITY, f64::NAN);
    let mut slack = f64::INFINITY;
    let mut grid_estimated = false;
    for t in theorem_t_grid() {
        let c = rep.c_constant(t, beta)?;
        grid_estimated |= c.grid_estimated;
        let rhs = theorem_rhs(beta, t, c.value, delta_norm, gap);
        slack = slack.min(rhs - lhs);
        if rhs < best.0 {
            best = (rhs, t);
        }
    }
    let mut report = BoundReport {
        function: Some(rep.name().into()),
        gap,
        beta: Some(beta),
        discrepancy: disc,
        delta_norm,
        ..BoundReport::new("theorem")
    }
    .constant("T_best", best.1)
    .rhs("lhs", lhs)
    .rhs("min_over_T", best.0)
    .margin("all_T", slack);
    if gap == f64::INFINITY {
        report = report.flag(FLAG_INFINITE_GAP);
    }
    if grid_estimated {
        report = report.flag(FLAG_GRID_C);
    }
    Ok(report)
}

/// Minimum of `K T^{−k} + N T^n` over `T > 0` and its minimizer.
pub fn lemma_opt(big_k: f64, k: f64, big_n: f64, n: f64) -> Result<(f64, f64)> {
    if [big_k, k, big_n, n].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return invalid(format!("lemma needs positive finite inputs, got K={big_k} k={k} N={big_n} n={n}"));
    }
    let min = (1.0 / k + 1.0 / n) * (k * big_k).powf(n / (k + n)) * (n * big_n).powf(k / (k + n));
    let t_star = (k * big_k / (n * big_n)).powf(1.0 / (k + n));
    Ok((min, t_star))
}
