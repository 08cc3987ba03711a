//! Experiment configuration and the deterministic trial layout derived from it.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::monotone::MonotoneDecreasingRep;
use crate::subalgebra::SubalgebraSpec;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// A subalgebra given by name (resolved per dimension) or in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecDescriptor {
    /// `pinching`, `trivial`, `full` or `partial-trace`.
    Named(String),
    Explicit(SubalgebraSpec),
}

fn smallest_factor(d: usize) -> usize {
    (2..=d).find(|p| d % p == 0).unwrap_or(d)
}

impl SpecDescriptor {
    /// The subalgebra at `dim`, or `None` if an explicit spec has another size.
    ///
    /// `partial-trace` at `d = p·m` (`p` the smallest prime factor) is
    /// `1_p ⊗ M_m`; at prime `d` that is the trivial algebra.
    pub fn resolve(&self, dim: usize) -> Result<Option<SubalgebraSpec>> {
        match self {
            SpecDescriptor::Explicit(spec) => Ok((spec.dim() == dim).then(|| spec.clone())),
            SpecDescriptor::Named(name) => Ok(Some(match name.as_str() {
                "pinching" => SubalgebraSpec::pinching(dim),
                "trivial" => SubalgebraSpec::trivial(dim),
                "full" => SubalgebraSpec::full(dim),
                "partial-trace" => {
                    let p = smallest_factor(dim);
                    SubalgebraSpec::second_factor(p, dim / p)
                }
                other => return invalid(format!("unknown subalgebra {other:?}")),
            })),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SpecDescriptor::Named(name) => name.clone(),
            SpecDescriptor::Explicit(spec) => format!("blocks{:?}", spec.blocks()),
        }
    }
}

/// Rank of a sampled state relative to its dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rank {
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "dim-1")]
    Deficient,
}

impl Rank {
    pub fn at(self, dim: usize) -> usize {
        match self {
            Rank::Full => dim,
            Rank::Deficient => (dim - 1).max(1),
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rank::Full => "full",
            Rank::Deficient => "dim-1",
        })
    }
}

fn full_rank() -> Vec<Rank> {
    vec![Rank::Full]
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_internals_points() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub dims: Vec<usize>,
    pub specs: Vec<SpecDescriptor>,
    /// `neg-log`, `neg-power:<α>`, `neg-log-linear:<a>`, or bare `neg-power`
    /// for every α of `alpha_grid`.
    pub functions: Vec<String>,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    /// Ranks cycled through for ρ.
    #[serde(default = "full_rank")]
    pub ranks: Vec<Rank>,
    /// Ranks cycled through for σ.
    #[serde(default = "full_rank")]
    pub sigma_ranks: Vec<Rank>,
    /// ε ladder for `sweep`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    /// Log-spaced `t` points on `[1e-3, 1e3]` for the proof-internal checks; 0 skips them.
    #[serde(default = "default_internals_points")]
    pub internals_points: usize,
}

/// One trial's sampling parameters.
#[derive(Debug, Clone)]
pub struct TrialCase {
    pub index: usize,
    pub dim: usize,
    pub spec: SubalgebraSpec,
    pub spec_label: String,
    pub rho_rank: Rank,
    pub sigma_rank: Rank,
}

fn in_unit_interval(xs: &[f64]) -> bool {
    xs.iter().all(|x| *x > 0.0 && *x < 1.0)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| crate::Error::InvalidInput(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return invalid("dims must be a non-empty list of positive integers");
        }
        if self.dims.iter().any(|d| *d > 64) {
            return invalid("dims above 64 are not supported");
        }
        if self.specs.is_empty() || self.functions.is_empty() {
            return invalid("specs and functions must be non-empty");
        }
        if self.alpha_grid.is_empty() || self.beta_grid.is_empty() {
            return invalid("alpha_grid and beta_grid must be non-empty");
        }
        if !in_unit_interval(&self.alpha_grid) {
            return invalid(format!("alpha_grid must lie in (0, 1): {:?}", self.alpha_grid));
        }
        if !in_unit_interval(&self.beta_grid) {
            return invalid(format!("beta_grid must lie in (0, 1): {:?}", self.beta_grid));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return invalid(format!("tolerance must be finite and >= 0, got {}", self.tolerance));
        }
        if self.ranks.is_empty() || self.sigma_ranks.is_empty() {
            return invalid("ranks and sigma_ranks must be non-empty");
        }
        if self.epsilons.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return invalid("epsilons must be finite and >= 0");
        }
        self.functions()?;
        if self.cases_per_round()?.is_empty() {
            return invalid("no spec matches any of the requested dims");
        }
        Ok(())
    }

    /// Resolved function list, bare `neg-power` expanded over `alpha_grid`.
    pub fn functions(&self) -> Result<Vec<MonotoneDecreasingRep>> {
        let mut out = Vec::new();
        for name in &self.functions {
            if name == "neg-power" {
                for &a in &self.alpha_grid {
                    out.push(MonotoneDecreasingRep::neg_power(a)?);
                }
            } else {
                out.push(MonotoneDecreasingRep::from_name(name)?);
            }
        }
        Ok(out)
    }

    fn cases_per_round(&self) -> Result<Vec<(usize, SubalgebraSpec, String)>> {
        let mut out = Vec::new();
        for &d in &self.dims {
            for desc in &self.specs {
                if let Some(spec) = desc.resolve(d)? {
                    out.push((d, spec, desc.label()));
                }
            }
        }
        Ok(out)
    }

    /// Trial `i` takes `(dim, spec)` pair `i mod P`, then cycles ρ ranks, then σ ranks.
    pub fn cases(&self) -> Result<Vec<TrialCase>> {
        let base = self.cases_per_round()?;
        let (nr, ns) = (self.ranks.len(), self.sigma_ranks.len());
        Ok((0..self.trials)
            .map(|i| {
                let (dim, spec, label) = base[i % base.len()].clone();
                let round = i / base.len();
                TrialCase {
                    index: i,
                    dim,
                    spec,
                    spec_label: label,
                    rho_rank: self.ranks[round % nr],
                    sigma_rank: self.sigma_ranks[(round / nr) % ns],
                }
            })
            .collect())
    }

    /// SHA-256 of the canonical JSON, without `output_path`.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_path = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let n = self.internals_points;
        match n {
            0 => Vec::new(),
            1 => vec![1.0],
            _ => (0..n).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / (n - 1) as f64)).collect(),
        }
    }
}
