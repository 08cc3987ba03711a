//! Batch runner: samples trials from an [`ExperimentConfig`], evaluates every
//! bound, and renders deterministic JSON / CSV output.
//!
//! Trials run in parallel; results are collected in trial order and nothing
//! time-dependent is written, so equal configs give byte-identical output.

mod config;

pub use config::{ExperimentConfig, Rank, SpecDescriptor, TrialCase, DEFAULT_TOLERANCE};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    beta_free_discrepancy, corollary_log_bound, corollary_power_bound, dpi_report, ext_real_json,
    generic_corollary_bound, proof_internals, recovery_chain, recovery_corollary, renyi_bound, theorem_check,
    BoundReport, InternalsOptions, TrialStates, FLAG_INFINITE_GAP,
};
use crate::entropy::{integral_gap_reconstruction, integral_reconstruction, s_f};
use crate::error::{invalid, Error, Result};
use crate::monotone::MonotoneDecreasingRep;
use crate::recovery::recovery_errors;
use crate::states::{sample_ginibre, sample_recoverable, trial_rng, DensityMatrix};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const REPORT_FORMAT: &str = "report_v1";
pub const SWEEP_HEADER: &str = "epsilon,gap,disc_b50,err_rho,err_sigma,rhs_log,rhs_pow,rhs_renyi";

/// Largest reconstruction error `reconstruct` accepts.
pub const RECONSTRUCT_TOL: f64 = 1e-5;
/// At ε = 0 the sweep pair is exactly recoverable.
pub const EXACT_GAP_TOL: f64 = 1e-9;
pub const EXACT_DISC_TOL: f64 = 1e-8;

/// What a run produced: the file contents, a one-paragraph summary and the exit code.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub summary: String,
    pub output: Vec<u8>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fingerprints {
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub rho_n: Vec<f64>,
    pub sigma_n: Vec<f64>,
}

fn eigenvalues(m: &DensityMatrix) -> Vec<f64> {
    m.spectral().eigenvalues.clone()
}

impl Fingerprints {
    fn of(st: &TrialStates) -> Self {
        Fingerprints {
            rho: eigenvalues(&st.rho),
            sigma: eigenvalues(&st.sigma),
            rho_n: eigenvalues(&st.rho_n),
            sigma_n: eigenvalues(&st.sigma_n),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub config_hash: String,
    pub dim: usize,
    pub spec: String,
    pub rho_rank: String,
    pub sigma_rank: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fingerprints: Option<Fingerprints>,
    pub reports: Vec<BoundReport>,
    pub errors: Vec<String>,
    pub passed: bool,
}

impl TrialRecord {
    fn new(case: &TrialCase, hash: &str) -> Self {
        TrialRecord {
            trial_index: case.index,
            config_hash: hash.into(),
            dim: case.dim,
            spec: case.spec_label.clone(),
            rho_rank: case.rho_rank.to_string(),
            sigma_rank: case.sigma_rank.to_string(),
            fingerprints: None,
            reports: Vec::new(),
            errors: Vec::new(),
            passed: false,
        }
    }

    fn push(&mut self, label: &str, r: Result<BoundReport>) {
        match r {
            Ok(r) => self.reports.push(r),
            Err(e) => self.errors.push(format!("{label}: {e}")),
        }
    }

    fn infinite_gap(&self) -> bool {
        self.reports.iter().any(|r| r.flags.contains(FLAG_INFINITE_GAP))
    }
}

fn sample_pair(config: &ExperimentConfig, case: &TrialCase) -> Result<(DensityMatrix, DensityMatrix)> {
    let mut rng = trial_rng(config.seed, case.index as u64);
    let rho = sample_ginibre(case.dim, case.rho_rank.at(case.dim), &mut rng)?;
    let sigma = sample_ginibre(case.dim, case.sigma_rank.at(case.dim), &mut rng)?;
    Ok((rho, sigma))
}

fn internals_options(config: &ExperimentConfig, case: &TrialCase) -> InternalsOptions {
    InternalsOptions { seed: config.seed ^ (case.index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15), ..Default::default() }
}

/// Every bound for one trial.
pub fn evaluate_trial(
    config: &ExperimentConfig,
    functions: &[MonotoneDecreasingRep],
    case: &TrialCase,
    hash: &str,
) -> TrialRecord {
    let mut rec = TrialRecord::new(case, hash);
    let st = match sample_pair(config, case).and_then(|(rho, sigma)| TrialStates::new(&rho, &sigma, &case.spec)) {
        Ok(st) => st,
        Err(e) => {
            rec.errors.push(format!("sampling: {e}"));
            return rec;
        }
    };
    rec.fingerprints = Some(Fingerprints::of(&st));
    let t_grid = config.t_grid();

    for f in functions {
        rec.push("dpi", dpi_report(f, &st));
        for &b in &config.beta_grid {
            rec.push("theorem", theorem_check(f, b, &st));
            rec.push("generic_corollary", generic_corollary_bound(f, b, &st));
            if !t_grid.is_empty() {
                rec.push("proof_internals", proof_internals(f, b, &st, &t_grid, internals_options(config, case)));
            }
        }
        rec.push("recovery_corollary", recovery_corollary(f, &st));
    }
    for &b in &config.beta_grid {
        rec.push("corollary_log", corollary_log_bound(b, &st));
        rec.push("beta_free_discrepancy", beta_free_discrepancy(b, &st));
        for &a in &config.alpha_grid {
            rec.push("corollary_power", corollary_power_bound(a, b, &st));
        }
    }
    for &a in &config.alpha_grid {
        rec.push("renyi", renyi_bound(a, &st));
    }
    rec.push("recovery_chain", recovery_chain(&st));

    rec.passed = rec.errors.is_empty() && rec.reports.iter().all(|r| r.passed(config.tolerance));
    rec
}

/// The worst margin seen and where.
#[derive(Debug, Clone, Serialize)]
pub struct WorstMargin {
    pub trial_index: usize,
    pub bound: String,
    pub margin_name: String,
    #[serde(serialize_with = "ser_f64")]
    pub margin: f64,
}

fn ser_f64<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    ext_real_json(*x).serialize(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub infinite_gap: usize,
    pub errors: usize,
    pub margins_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<WorstMargin>,
}

impl VerifySummary {
    fn from_records(records: &[TrialRecord]) -> Self {
        let mut worst: Option<WorstMargin> = None;
        let mut margins_checked = 0;
        for rec in records {
            for r in &rec.reports {
                for (name, &m) in &r.margins {
                    margins_checked += 1;
                    let worse = worst.as_ref().is_none_or(|w| m < w.margin || m.is_nan());
                    if worse {
                        worst = Some(WorstMargin {
                            trial_index: rec.trial_index,
                            bound: r.bound.clone(),
                            margin_name: name.clone(),
                            margin: m,
                        });
                    }
                }
            }
        }
        let passed = records.iter().filter(|r| r.passed).count();
        VerifySummary {
            trials: records.len(),
            passed,
            failed: records.len() - passed,
            infinite_gap: records.iter().filter(|r| r.infinite_gap()).count(),
            errors: records.iter().map(|r| r.errors.len()).sum(),
            margins_checked,
            worst,
        }
    }

    fn render(&self) -> String {
        let mut s = format!(
            "trials {}  passed {}  failed {}  infinite-gap {}  errors {}  margins {}",
            self.trials, self.passed, self.failed, self.infinite_gap, self.errors, self.margins_checked
        );
        if let Some(w) = &self.worst {
            let _ = write!(s, "\nworst margin {:.3e} ({}:{} in trial {})", w.margin, w.bound, w.margin_name, w.trial_index);
        }
        s
    }
}

#[derive(Serialize)]
struct VerifyFile<'a> {
    format: &'static str,
    command: &'static str,
    config_hash: &'a str,
    config: &'a ExperimentConfig,
    summary: &'a VerifySummary,
    trials: &'a [TrialRecord],
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

/// Runs every bound on every trial. Exit 0 iff every margin is at least `−tolerance`
/// and nothing errored.
pub fn run_verify(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let functions = config.functions()?;
    let cases = config.cases()?;
    let hash = config.hash();
    let records: Vec<TrialRecord> =
        cases.par_iter().map(|case| evaluate_trial(config, &functions, case, &hash)).collect();
    let summary = VerifySummary::from_records(&records);
    let output = to_json(&VerifyFile {
        format: REPORT_FORMAT,
        command: "verify",
        config_hash: &hash,
        config,
        summary: &summary,
        trials: &records,
    });
    let exit_code = if summary.failed == 0 { EXIT_PASS } else { EXIT_FAIL };
    Ok(RunOutcome { exit_code, summary: summary.render(), output })
}

/// One CSV row of the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub gap: f64,
    pub disc_b50: f64,
    pub err_rho: f64,
    pub err_sigma: f64,
    pub rhs_log: f64,
    pub rhs_pow: f64,
    pub rhs_renyi: f64,
}

fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        "nan".into()
    }
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        [self.epsilon, self.gap, self.disc_b50, self.err_rho, self.err_sigma, self.rhs_log, self.rhs_pow, self.rhs_renyi]
            .iter()
            .map(|x| csv_number(*x))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn sweep_trial(
    config: &ExperimentConfig,
    f: &MonotoneDecreasingRep,
    ladder: &[f64],
    case: &TrialCase,
) -> Result<(Vec<SweepRow>, Vec<String>)> {
    let mut rng = trial_rng(config.seed, case.index as u64);
    let pair = sample_recoverable(&case.spec, &mut rng)?;
    let alpha = config.alpha_grid[0];
    let mut rows = Vec::with_capacity(ladder.len());
    let mut failures = Vec::new();
    for &eps in ladder {
        let sigma = pair.sigma_at(eps)?;
        let st = TrialStates::new(&pair.rho, &sigma, &case.spec)?;
        let errors = recovery_errors(&pair.rho, &sigma, &case.spec)?;
        let log = corollary_log_bound(0.5, &st)?;
        let pow = corollary_power_bound(alpha, 0.5, &st)?;
        let ren = renyi_bound(alpha, &st)?;
        let chain = recovery_chain(&st)?;
        let row = SweepRow {
            epsilon: eps,
            gap: st.gap(f)?,
            disc_b50: st.discrepancy(0.5)?,
            err_rho: errors.e_rho,
            err_sigma: errors.e_sigma,
            rhs_log: log.rhs_values["lower_bound"],
            rhs_pow: pow.rhs_values["lower_bound"],
            rhs_renyi: ren.rhs_values["theorem"],
        };
        for r in [&log, &pow, &ren, &chain] {
            if !r.passed(config.tolerance) {
                failures.push(format!("trial {} eps {eps:e}: {} min margin {:e}", case.index, r.bound, r.min_margin()));
            }
        }
        if eps == 0.0 && !(row.gap.abs() <= EXACT_GAP_TOL && row.disc_b50 <= EXACT_DISC_TOL) {
            failures.push(format!(
                "trial {}: exact pair has gap {:e}, discrepancy {:e}",
                case.index, row.gap, row.disc_b50
            ));
        }
        rows.push(row);
    }
    Ok((rows, failures))
}

/// Perturbed-recoverable pairs along the `epsilons` ladder (largest first), one
/// CSV row per (trial, ε). `gap` is for the first configured function; the
/// right-hand sides are the log and power corollaries and the Rényi bound at
/// β = 1/2 and the first α of the grid.
pub fn run_sweep(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    if config.epsilons.is_empty() {
        return invalid("sweep needs a non-empty `epsilons` ladder");
    }
    let f = config.functions()?.remove(0);
    let mut ladder = config.epsilons.clone();
    ladder.sort_by(|a, b| b.total_cmp(a));
    let cases = config.cases()?;
    let results: Vec<_> = cases.par_iter().map(|case| sweep_trial(config, &f, &ladder, case)).collect();

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    let mut failures = Vec::new();
    let mut rows = 0;
    for (case, res) in cases.iter().zip(results) {
        match res {
            Ok((trial_rows, trial_failures)) => {
                for row in &trial_rows {
                    csv.push_str(&row.to_csv());
                    csv.push('\n');
                }
                rows += trial_rows.len();
                failures.extend(trial_failures);
            }
            Err(e) => failures.push(format!("trial {}: {e}", case.index)),
        }
    }
    let mut summary = format!("trials {}  rows {}  failures {}", cases.len(), rows, failures.len());
    for msg in failures.iter().take(10) {
        let _ = write!(summary, "\n  {msg}");
    }
    let exit_code = if failures.is_empty() { EXIT_PASS } else { EXIT_FAIL };
    Ok(RunOutcome { exit_code, summary, output: csv.into_bytes() })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconstructStatus {
    Ok,
    /// The representation has `a ≠ 0`.
    Unsupported,
    /// `S_f(ρ‖σ) = +∞`; nothing to reconstruct.
    Infinite,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructEntry {
    pub function: String,
    pub status: ReconstructStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(serialize_with = "ser_f64")]
    pub spectral: f64,
    #[serde(serialize_with = "ser_f64")]
    pub integral: f64,
    #[serde(serialize_with = "ser_f64")]
    pub gap_spectral: f64,
    #[serde(serialize_with = "ser_f64")]
    pub gap_integral: f64,
    #[serde(serialize_with = "ser_f64")]
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructRecord {
    pub trial_index: usize,
    pub config_hash: String,
    pub dim: usize,
    pub spec: String,
    pub entries: Vec<ReconstructEntry>,
    pub internals: Vec<BoundReport>,
    pub errors: Vec<String>,
}

const RECONSTRUCT_QUAD_TOL: f64 = 1e-9;

fn reconstruct_entry(f: &MonotoneDecreasingRep, st: &TrialStates) -> Result<ReconstructEntry> {
    let spectral = s_f(f, &st.rho, &st.sigma)?;
    let gap_spectral = st.gap(f)?;
    let mut entry = ReconstructEntry {
        function: f.name().into(),
        status: ReconstructStatus::Ok,
        message: None,
        spectral: spectral.value,
        integral: f64::NAN,
        gap_spectral,
        gap_integral: f64::NAN,
        error: f64::NAN,
    };
    if spectral.is_infinite() {
        entry.status = ReconstructStatus::Infinite;
        return Ok(entry);
    }
    let full = integral_reconstruction(f, &st.rho, &st.sigma, RECONSTRUCT_QUAD_TOL);
    let gap = integral_gap_reconstruction(
        f,
        (&st.rho, &st.sigma),
        (&st.rho_n, &st.sigma_n),
        RECONSTRUCT_QUAD_TOL,
    );
    match (full, gap) {
        (Ok(v), Ok(g)) => {
            entry.integral = v;
            entry.gap_integral = g;
            entry.error = (v - spectral.value).abs().max((g - gap_spectral).abs());
        }
        (Err(Error::Unsupported(msg)), _) | (_, Err(Error::Unsupported(msg))) => {
            entry.status = ReconstructStatus::Unsupported;
            entry.message = Some(msg);
        }
        (Err(e), _) | (_, Err(e)) => {
            entry.status = ReconstructStatus::Failed;
            entry.message = Some(e.to_string());
        }
    }
    Ok(entry)
}

fn reconstruct_trial(
    config: &ExperimentConfig,
    functions: &[MonotoneDecreasingRep],
    case: &TrialCase,
    hash: &str,
) -> ReconstructRecord {
    let mut rec = ReconstructRecord {
        trial_index: case.index,
        config_hash: hash.into(),
        dim: case.dim,
        spec: case.spec_label.clone(),
        entries: Vec::new(),
        internals: Vec::new(),
        errors: Vec::new(),
    };
    let st = match sample_pair(config, case).and_then(|(rho, sigma)| TrialStates::new(&rho, &sigma, &case.spec)) {
        Ok(st) => st,
        Err(e) => {
            rec.errors.push(format!("sampling: {e}"));
            return rec;
        }
    };
    let t_grid = config.t_grid();
    for f in functions {
        match reconstruct_entry(f, &st) {
            Ok(entry) => rec.entries.push(entry),
            Err(e) => rec.errors.push(format!("{}: {e}", f.name())),
        }
        if t_grid.is_empty() {
            continue;
        }
        for &b in &config.beta_grid {
            match proof_internals(f, b, &st, &t_grid, internals_options(config, case)) {
                Ok(r) => rec.internals.push(r),
                Err(e) => rec.errors.push(format!("proof_internals {}: {e}", f.name())),
            }
        }
    }
    rec
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructSummary {
    pub trials: usize,
    pub reconstructed: usize,
    pub unsupported: usize,
    pub infinite: usize,
    pub failed: usize,
    pub internals_failed: usize,
    #[serde(serialize_with = "ser_f64")]
    pub max_error: f64,
}

#[derive(Serialize)]
struct ReconstructFile<'a> {
    format: &'static str,
    command: &'static str,
    config_hash: &'a str,
    config: &'a ExperimentConfig,
    summary: &'a ReconstructSummary,
    trials: &'a [ReconstructRecord],
}

/// Spectral entropies and gaps against their integral representations, plus the
/// proof-internal checks. Exit 0 iff the largest error is at most
/// [`RECONSTRUCT_TOL`] and nothing failed; unsupported functions are only recorded.
pub fn run_reconstruct(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let functions = config.functions()?;
    let cases = config.cases()?;
    let hash = config.hash();
    let records: Vec<ReconstructRecord> =
        cases.par_iter().map(|case| reconstruct_trial(config, &functions, case, &hash)).collect();

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut max_error: f64 = 0.0;
    for entry in records.iter().flat_map(|r| &r.entries) {
        let key = match entry.status {
            ReconstructStatus::Ok => {
                max_error = if entry.error.is_nan() { f64::NAN } else { max_error.max(entry.error) };
                "ok"
            }
            ReconstructStatus::Unsupported => "unsupported",
            ReconstructStatus::Infinite => "infinite",
            ReconstructStatus::Failed => "failed",
        };
        *counts.entry(key).or_default() += 1;
    }
    let internals_failed = records
        .iter()
        .map(|r| r.internals.iter().filter(|i| !i.passed(config.tolerance)).count() + r.errors.len())
        .sum();
    let summary = ReconstructSummary {
        trials: records.len(),
        reconstructed: counts.get("ok").copied().unwrap_or(0),
        unsupported: counts.get("unsupported").copied().unwrap_or(0),
        infinite: counts.get("infinite").copied().unwrap_or(0),
        failed: counts.get("failed").copied().unwrap_or(0),
        internals_failed,
        max_error,
    };
    let output = to_json(&ReconstructFile {
        format: REPORT_FORMAT,
        command: "reconstruct",
        config_hash: &hash,
        config,
        summary: &summary,
        trials: &records,
    });
    let ok = max_error <= RECONSTRUCT_TOL && summary.failed == 0 && internals_failed == 0;
    let text = format!(
        "trials {}  reconstructed {}  unsupported {}  infinite {}  failed {}  internals-failed {}  max error {:.3e}",
        summary.trials,
        summary.reconstructed,
        summary.unsupported,
        summary.infinite,
        summary.failed,
        summary.internals_failed,
        summary.max_error
    );
    Ok(RunOutcome { exit_code: if ok { EXIT_PASS } else { EXIT_FAIL }, summary: text, output })
}
