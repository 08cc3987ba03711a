//! End-to-end acceptance run: one line per criterion, nonzero exit if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{classical_f_divergence, superoperator_s_f, umegaki_trace_formula};
use petz_core::bounds::*;
use petz_core::entropy::{s_f, umegaki};
use petz_core::harness::SpecDescriptor;
use petz_core::monotone::{pick_coefficients, stieltjes_density, verify_representation, MonotoneDecreasingRep, STIELTJES_OFFSET};
use petz_core::recovery::recovery_errors;
use petz_core::states::{sample_diagonal, sample_ginibre, sample_product_pair, trial_rng, DensityMatrix};
use petz_core::subalgebra::SubalgebraSpec;

const SEED: u64 = 20_240_611;
const TRIALS: usize = 200;
const DIMS: [usize; 5] = [2, 3, 4, 6, 8];
const SPEC_KINDS: [&str; 4] = ["pinching", "trivial", "full", "partial-trace"];
const ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];
const TOL: f64 = 1e-8;

struct Trial {
    rho: DensityMatrix,
    sigma: DensityMatrix,
    st: TrialStates,
}

fn spec(kind: &str, dim: usize) -> SubalgebraSpec {
    SpecDescriptor::Named(kind.into()).resolve(dim).unwrap().unwrap()
}

/// Trial `i`: dimension `i mod 5`, spec kind `(i/5) mod 4`, and the rank
/// pattern `(i/20) mod 4` over (ρ, σ) ∈ {full, dim−1}².
fn population(n: usize) -> Vec<Trial> {
    (0..n)
        .map(|i| {
            let d = DIMS[i % DIMS.len()];
            let pattern = (i / 20) % 4;
            let rho_rank = if pattern & 1 == 1 { d - 1 } else { d };
            let sigma_rank = if pattern & 2 == 2 { d - 1 } else { d };
            let mut rng = trial_rng(SEED, i as u64);
            let rho = sample_ginibre(d, rho_rank, &mut rng).unwrap();
            let sigma = sample_ginibre(d, sigma_rank, &mut rng).unwrap();
            let st = TrialStates::new(&rho, &sigma, &spec(SPEC_KINDS[(i / 5) % 4], d)).unwrap();
            Trial { rho, sigma, st }
        })
        .collect()
}

fn functions() -> Vec<MonotoneDecreasingRep> {
    let mut v = vec![MonotoneDecreasingRep::neg_log()];
    v.extend(ALPHAS.iter().map(|a| MonotoneDecreasingRep::neg_power(*a).unwrap()));
    v
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

/// Smallest value seen, NaN-sticky.
#[derive(Clone, Copy)]
struct Worst(f64);

impl Worst {
    fn new() -> Self {
        Worst(f64::INFINITY)
    }
    fn see(&mut self, x: f64) {
        self.0 = if x.is_nan() || self.0.is_nan() { f64::NAN } else { self.0.min(x) };
    }
    fn at_least(self, floor: f64) -> bool {
        self.0 >= floor
    }
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn dpi_suite(pop: &[Trial]) -> Verdict {
    let start = Instant::now();
    let fs = functions();
    let mut worst = Worst::new();
    let mut evaluated = 0;
    let mut infinite = 0;
    for t in pop {
        let d = t.rho.dim();
        for kind in SPEC_KINDS {
            let st = TrialStates::new(&t.rho, &t.sigma, &spec(kind, d)).unwrap();
            for f in &fs {
                let gap = st.gap(f).unwrap();
                infinite += usize::from(gap == f64::INFINITY);
                worst.see(gap);
                evaluated += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst.at_least(-1e-9) && elapsed < Duration::from_secs(60),
        format!("{evaluated} gaps ({infinite} infinite), min gap {:.2e}, {elapsed:.1?}", worst.0),
    )
}

fn theorem_suite(pop: &[Trial]) -> Verdict {
    let start = Instant::now();
    let fs = functions();
    let mut worst = Worst::new();
    let mut checks = 0;
    for t in pop {
        for f in &fs {
            for b in [0.2, 0.5, 0.8] {
                worst.see(theorem_check(f, b, &t.st).unwrap().margins["all_T"]);
                checks += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let grid = theorem_t_grid().len();
    verdict(
        worst.at_least(-TOL) && grid == 40 && elapsed < Duration::from_secs(120),
        format!("{checks} checks × {grid} T, min margin {:.2e}, {elapsed:.1?}", worst.0),
    )
}

fn log_corollary(pop: &[Trial]) -> Verdict {
    let mut worst = Worst::new();
    let mut constant_err: f64 = 0.0;
    let mut generic_err: f64 = 0.0;
    let mut exponent_ok = true;
    let (k, n) = theorem_exponents(0.5);
    for t in pop {
        let r = corollary_log_bound(0.5, &t.st).unwrap();
        worst.see(r.margins["gap_lower_bound"]);
        // gap ≥ (π disc / min_T[K T^{−k} + T^n])^4 with N = 1
        let m = lemma_opt(decay_coefficient(0.5, r.delta_norm), k, 1.0, n).unwrap().0;
        let expected = (PI / m).powi(4);
        let display = (PI / 4.0).powi(4) * (1.0 + r.delta_norm).powi(-2);
        constant_err = constant_err
            .max((r.constants["K_U"] / expected - 1.0).abs())
            .max((r.constants["K_U"] / display - 1.0).abs());
        generic_err = generic_err.max(r.constants["closed_vs_generic_rel"]);
        exponent_ok &= r.constants["exponent"] == 4.0;
    }
    verdict(
        worst.at_least(-TOL) && constant_err <= 1e-9 && generic_err <= 1e-9 && exponent_ok,
        format!(
            "min margin {:.2e}, K_U vs lemma and (π/4)⁴(1+‖Δ‖)⁻² {constant_err:.1e}, closed vs generic {generic_err:.1e}",
            worst.0
        ),
    )
}

fn power_corollary(pop: &[Trial]) -> Verdict {
    let mut half = Worst::new();
    let mut off = Worst::new();
    let mut exponents_ok = true;
    for t in pop {
        for a in ALPHAS {
            let r = corollary_power_bound(a, 0.5, &t.st).unwrap();
            half.see(r.margins["gap_lower_bound"]);
            exponents_ok &= (r.constants["exponent"] - (4.0 + 2.0 * a)).abs() < 1e-12;
            for b in [0.3, 0.7] {
                let r = corollary_power_bound(a, b, &t.st).unwrap();
                off.see(r.margins["gap_lower_bound"]);
                exponents_ok &= (r.constants["exponent"] - power_proof_exponent(a, b)).abs() < 1e-12;
            }
        }
    }
    verdict(
        half.at_least(-TOL) && off.at_least(-TOL) && exponents_ok,
        format!("min margin β=1/2 {:.2e}, β∈{{0.3,0.7}} {:.2e}, exponents ok {exponents_ok}", half.0, off.0),
    )
}

fn renyi_suite(pop: &[Trial]) -> Verdict {
    let mut worst = Worst::new();
    let mut exponent_ok = true;
    let (mut used, mut mismatch) = (0, 0);
    for t in pop.iter().filter(|t| t.sigma.is_invertible()) {
        used += 1;
        for a in ALPHAS {
            let r = renyi_bound(a, &t.st).unwrap();
            worst.see(r.min_margin());
            exponent_ok &= r.constants["exponent"] == 6.0 - 2.0 * a;
            if r.flags.contains(FLAG_SUPPORT_MISMATCH) {
                mismatch += 1;
            }
        }
    }
    verdict(
        worst.at_least(-TOL) && exponent_ok && used > 0,
        format!(
            "{used} invertible-σ trials, min margin {:.2e}, exponent 6−2α {exponent_ok}, \
             recovery form skipped on {mismatch} (trial, α) with supp σ ⊄ supp ρ",
            worst.0
        ),
    )
}

fn chain_suite(pop: &[Trial]) -> Verdict {
    let mut worst = Worst::new();
    let mut complete = 0;
    for t in pop {
        let r = recovery_chain(&t.st).unwrap();
        worst.see(r.min_margin());
        complete += usize::from(
            ["rho_recovery", "sigma_recovery_reduced_norms", "sigma_recovery_full_norms"]
                .iter()
                .all(|k| r.margins.contains_key(*k)),
        );
    }
    verdict(
        worst.at_least(-TOL),
        format!("min margin {:.2e}, all three inequalities on {complete}/{} trials", worst.0, pop.len()),
    )
}

fn exactness() -> Verdict {
    let fs = functions();
    let (mut gap, mut disc, mut err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    // and the converse: generic pairs for the same algebra are not recovered
    let mut generic_min = f64::INFINITY;
    let mut pairs = 0;
    for (n1, n2) in [(2, 2), (2, 3), (3, 2), (2, 4), (4, 2)] {
        let spec = SubalgebraSpec::second_factor(n1, n2);
        for s in 0..10u64 {
            let mut rng = trial_rng(SEED ^ 0x7, (n1 * 10 + n2) as u64 * 100 + s);
            let (rho, sigma) = sample_product_pair(n1, n2, &mut rng).unwrap();
            let st = TrialStates::new(&rho, &sigma, &spec).unwrap();
            for f in &fs {
                gap = gap.max(st.gap(f).unwrap().abs());
            }
            for b in [0.25, 0.5, 0.75] {
                disc = disc.max(st.discrepancy(b).unwrap());
            }
            let e = recovery_errors(&rho, &sigma, &spec).unwrap();
            err = err.max(e.e_rho).max(e.e_sigma);

            let other = sample_ginibre(n1 * n2, n1 * n2, &mut rng).unwrap();
            let st = TrialStates::new(&rho, &other, &spec).unwrap();
            let e = recovery_errors(&rho, &other, &spec).unwrap();
            generic_min = generic_min.min(st.gap(&fs[0]).unwrap()).min(st.discrepancy(0.5).unwrap()).min(e.e_sigma);
            pairs += 1;
        }
    }
    verdict(
        gap <= 1e-9 && disc <= 1e-8 && err <= 1e-8 && generic_min > 1e-6,
        format!(
            "{pairs} product pairs: max |gap| {gap:.1e}, max disc {disc:.1e}, max recovery error {err:.1e}; \
             generic pairs min {generic_min:.1e}"
        ),
    )
}

fn oracles(pop: &[Trial]) -> Verdict {
    let fs = functions();
    let mut superop: f64 = 0.0;
    let mut infinite_mismatch = 0;
    let mut compared = 0;
    for t in pop.iter().filter(|t| t.rho.dim() <= 4) {
        for f in &fs {
            let got = s_f(f, &t.rho, &t.sigma).unwrap();
            match superoperator_s_f(&t.rho, &t.sigma, |x| f.eval(x), f.at_zero()) {
                Some(want) => superop = superop.max((got.value - want).abs()),
                None => infinite_mismatch += usize::from(!got.is_infinite()),
            }
            compared += 1;
        }
    }
    let mut classical: f64 = 0.0;
    let mut umegaki_err: f64 = 0.0;
    for i in 0..60u64 {
        let d = 2 + (i % 7) as usize;
        let mut rng = trial_rng(SEED ^ 0x8, i);
        let p = sample_diagonal(d, if i % 3 == 0 { d - 1 } else { d }, &mut rng).unwrap();
        let q = sample_diagonal(d, d, &mut rng).unwrap();
        let pd: Vec<f64> = (0..d).map(|k| p.matrix()[(k, k)].re).collect();
        let qd: Vec<f64> = (0..d).map(|k| q.matrix()[(k, k)].re).collect();
        for f in &fs {
            let got = s_f(f, &p, &q).unwrap().value;
            classical = classical.max((got - classical_f_divergence(&pd, &qd, |x| f.eval(x))).abs());
        }
        let rho = sample_ginibre(d, d, &mut rng).unwrap();
        let sigma = sample_ginibre(d, d, &mut rng).unwrap();
        let got = umegaki(&rho, &sigma).unwrap().value;
        umegaki_err = umegaki_err.max((got - umegaki_trace_formula(&rho, &sigma)).abs());
    }
    verdict(
        superop <= 1e-8 && infinite_mismatch == 0 && classical <= 1e-10 && umegaki_err <= 1e-9,
        format!(
            "superoperator {superop:.1e} over {compared}, classical {classical:.1e}, Umegaki {umegaki_err:.1e}"
        ),
    )
}

fn representation() -> Verdict {
    let xs = log_grid(1e-2, 1e2, 41);
    let mut rep_err: f64 = 0.0;
    let mut density_err: f64 = 0.0;
    let mut pick_err: f64 = 0.0;
    for f in functions() {
        rep_err = rep_err.max(verify_representation(&f, &xs).unwrap());
        let pick = |z| f.pick_function(z).unwrap();
        for &x in &xs {
            let got = stieltjes_density(&pick, x, STIELTJES_OFFSET).unwrap();
            density_err = density_err.max((got / f.density(x) - 1.0).abs());
        }
        // Re log i = 0 and Re i^α = cos(απ/2)
        let (a, b) = pick_coefficients(&pick).unwrap();
        let b_expected = f.power().map_or(0.0, |alpha| (alpha * PI / 2.0).cos());
        pick_err = pick_err.max(a.abs()).max((b - b_expected).abs()).max((b - f.b()).abs());
    }
    let half = MonotoneDecreasingRep::neg_power(0.5).unwrap();
    let (_, b) = pick_coefficients(&|z| half.pick_function(z).unwrap()).unwrap();
    let sin_half = (b - (PI / 4.0).sin()).abs();
    verdict(
        rep_err <= 1e-6 && density_err <= 1e-3 && pick_err <= 1e-6 && sin_half <= 1e-6,
        format!(
            "representation {rep_err:.1e}, density rel {density_err:.1e}, Pick (a, b) {pick_err:.1e}, \
             b = sin(π/4) at α=1/2 within {sin_half:.1e}"
        ),
    )
}

fn internals(pop: &[Trial]) -> Verdict {
    let start = Instant::now();
    let grid = log_grid(1e-3, 1e3, 20);
    let fs = [MonotoneDecreasingRep::neg_log(), MonotoneDecreasingRep::neg_power(0.5).unwrap()];
    let mut worst = Worst::new();
    let mut identity: f64 = 0.0;
    let mut checked = 0;
    for (i, t) in pop.iter().take(50).enumerate() {
        for f in &fs {
            let opts = InternalsOptions { seed: SEED ^ i as u64, ..Default::default() };
            let r = proof_internals(f, 0.5, &t.st, &grid, opts).unwrap();
            worst.see(r.min_margin());
            identity = identity.max(r.rhs_values["integral_identity_error"]);
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst.at_least(-TOL) && identity <= 1e-5 && elapsed < Duration::from_secs(120),
        format!("{checked} runs × 20 t, min margin {:.2e}, identity error {identity:.1e}, {elapsed:.1?}", worst.0),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"trials": 24, "dims": [2, 3, 4], "specs": ["pinching", "trivial", "full", "partial-trace"],
            "functions": ["neg-log", "neg-power"], "alpha_grid": [0.5], "beta_grid": [0.5],
            "seed": 5, "ranks": ["full", "dim-1"], "sigma_ranks": ["full", "dim-1"], "internals_points": 4}"#,
    )
    .unwrap();
    let run = |out: &str| {
        let path = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_petz"))
            .args(["verify", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&path)
            .output()
            .unwrap()
            .status;
        (status.code(), std::fs::read(path).unwrap())
    };
    let (code_a, a) = run("a.json");
    let (code_b, b) = run("b.json");
    verdict(
        a == b && code_a == Some(0) && code_b == Some(0) && !a.is_empty(),
        format!("{} bytes, identical {}, exit codes {code_a:?} {code_b:?}", a.len(), a == b),
    )
}

fn main() -> ExitCode {
    let pop = population(TRIALS);
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("data processing inequality", Box::new(|| dpi_suite(&pop))),
        ("main theorem over the T grid", Box::new(|| theorem_suite(&pop))),
        ("log corollary at β = 1/2", Box::new(|| log_corollary(&pop))),
        ("power corollary", Box::new(|| power_corollary(&pop))),
        ("Rényi bounds", Box::new(|| renyi_suite(&pop))),
        ("recovery chain", Box::new(|| chain_suite(&pop))),
        ("exactness on product pairs", Box::new(exactness)),
        ("oracle equivalence", Box::new(|| oracles(&pop))),
        ("integral representations", Box::new(representation)),
        ("proof internals", Box::new(|| internals(&pop))),
        ("determinism of verify", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let v = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| verdict(false, "panicked".into()));
        failed += usize::from(!v.pass);
        println!("criterion {:>2} {} {name}: {}", k + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
