mod common;

use common::{classical_f_divergence, petz_entrywise, superoperator_s_f, umegaki_trace_formula};
use petz_core::entropy::{power_quasi, renyi, s_f, s_t, umegaki};
use petz_core::matrix::{c64, from_real_diagonal, frobenius};
use petz_core::modular::RelativeModularOperator;
use petz_core::monotone::MonotoneDecreasingRep;
use petz_core::recovery::{reduced_state, PetzChannel};
use petz_core::states::{make_density, sample_diagonal, sample_ginibre, trial_rng, DensityMatrix};
use petz_core::subalgebra::SubalgebraSpec;

fn diag(v: &[f64]) -> DensityMatrix {
    make_density(&from_real_diagonal(v)).unwrap()
}

fn reps() -> Vec<MonotoneDecreasingRep> {
    let mut v = vec![MonotoneDecreasingRep::neg_log()];
    for a in [0.25, 0.5, 0.75] {
        v.push(MonotoneDecreasingRep::neg_power(a).unwrap());
    }
    v
}

#[test]
fn s_f_matches_superoperator() {
    let mut worst: f64 = 0.0;
    for i in 0..40u64 {
        let mut rng = trial_rng(101, i);
        let d = 2 + (i % 3) as usize;
        let rho_rank = if i % 2 == 0 { d } else { d - 1 };
        let rho = sample_ginibre(d, rho_rank, &mut rng).unwrap();
        let sigma = sample_ginibre(d, d, &mut rng).unwrap();
        for f in reps() {
            let got = s_f(&f, &rho, &sigma).unwrap();
            let want = superoperator_s_f(&rho, &sigma, |x| f.eval(x), f.at_zero()).unwrap();
            worst = worst.max((got.value - want).abs());
        }
    }
    assert!(worst <= 1e-8, "worst {worst:e}");
}

#[test]
fn infinite_exactly_when_superoperator_says_so() {
    let mut rng = trial_rng(102, 0);
    let rho = sample_ginibre(3, 3, &mut rng).unwrap();
    let sigma = sample_ginibre(3, 2, &mut rng).unwrap();
    let f = MonotoneDecreasingRep::neg_log();
    assert!(s_f(&f, &rho, &sigma).unwrap().is_infinite());
    assert!(superoperator_s_f(&rho, &sigma, |x| f.eval(x), f.at_zero()).is_none());
    // power functions stay finite: f(0) = 0
    let p = MonotoneDecreasingRep::neg_power(0.5).unwrap();
    let got = s_f(&p, &rho, &sigma).unwrap().value;
    let want = superoperator_s_f(&rho, &sigma, |x| p.eval(x), p.at_zero()).unwrap();
    assert!((got - want).abs() < 1e-10);
}

#[test]
fn commuting_states_match_classical_divergence() {
    let mut worst: f64 = 0.0;
    for i in 0..40u64 {
        let mut rng = trial_rng(103, i);
        let d = 2 + (i % 5) as usize;
        let rho = sample_diagonal(d, d, &mut rng).unwrap();
        let sigma = sample_diagonal(d, d, &mut rng).unwrap();
        let p: Vec<f64> = (0..d).map(|k| rho.matrix()[(k, k)].re).collect();
        let q: Vec<f64> = (0..d).map(|k| sigma.matrix()[(k, k)].re).collect();
        for f in reps() {
            let got = s_f(&f, &rho, &sigma).unwrap().value;
            let want = classical_f_divergence(&p, &q, |x| f.eval(x));
            worst = worst.max((got - want).abs());
        }
    }
    assert!(worst <= 1e-10, "worst {worst:e}");
}

#[test]
fn umegaki_matches_trace_formula() {
    for i in 0..30u64 {
        let mut rng = trial_rng(104, i);
        let d = 2 + (i % 7) as usize;
        let rho = sample_ginibre(d, d, &mut rng).unwrap();
        let sigma = sample_ginibre(d, d, &mut rng).unwrap();
        let got = umegaki(&rho, &sigma).unwrap().value;
        let want = umegaki_trace_formula(&rho, &sigma);
        assert!((got - want).abs() <= 1e-9, "trial {i}: {got} vs {want}");
    }
}

#[test]
fn commuting_example_values() {
    let rho = diag(&[0.5, 0.5]);
    let sigma = diag(&[0.25, 0.75]);
    let kl = 0.5 * (4.0f64 / 3.0).ln();
    assert!((umegaki(&rho, &sigma).unwrap().value - kl).abs() < 1e-14);
    assert!((s_t(1.0, &rho, &sigma).unwrap() - 8.0 / 15.0).abs() < 1e-14);
    let power = -((1.0f64 / 8.0).sqrt() + (3.0f64 / 8.0).sqrt());
    assert!((power_quasi(0.5, &rho, &sigma).unwrap().value - power).abs() < 1e-14);
    assert!((renyi(0.5, &rho, &sigma).unwrap().value - (-2.0 * (-power).ln())).abs() < 1e-14);
    assert!(umegaki(&rho, &diag(&[1.0, 0.0])).unwrap().is_infinite());
}

#[test]
fn modular_operator_examples() {
    let delta = RelativeModularOperator::build(&diag(&[0.25, 0.75]), &diag(&[0.5, 0.5])).unwrap();
    let mut eig: Vec<(f64, f64)> =
        delta.joint().iter().filter(|e| e.weight > 1e-15).map(|e| (e.eigenvalue, e.weight)).collect();
    eig.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(eig.len(), 2);
    assert!((eig[0].0 - 0.5).abs() < 1e-14 && (eig[1].0 - 1.5).abs() < 1e-14);
    assert!(eig.iter().all(|(_, w)| (w - 0.5).abs() < 1e-14));
    assert!((delta.operator_norm() - 1.5).abs() < 1e-14);

    let skewed = RelativeModularOperator::build(&diag(&[0.5, 0.5]), &diag(&[0.99, 0.01])).unwrap();
    assert!((skewed.operator_norm() - 50.0).abs() < 1e-9);

    // X = I with diagonal states: σ ρ⁻¹ entrywise
    let (s, r) = (diag(&[0.2, 0.8]), diag(&[0.6, 0.4]));
    let d = RelativeModularOperator::build(&s, &r).unwrap();
    let y = d.apply(&petz_core::matrix::identity(2)).unwrap();
    assert!((y[(0, 0)] - c64(0.2 / 0.6, 0.0)).norm() < 1e-14);
    assert!((y[(1, 1)] - c64(0.8 / 0.4, 0.0)).norm() < 1e-14);
}

#[test]
fn petz_map_matches_entrywise_products() {
    for i in 0..10u64 {
        let mut rng = trial_rng(105, i);
        let rho = sample_ginibre(4, 4, &mut rng).unwrap();
        let sigma = sample_ginibre(4, 4, &mut rng).unwrap();
        let spec = SubalgebraSpec::second_factor(2, 2);
        let ch = PetzChannel::build(&rho, &spec).unwrap();
        let sigma_n = reduced_state(&spec, &sigma).unwrap();
        let got = ch.apply(sigma_n.matrix()).unwrap();
        let want = petz_entrywise(rho.matrix(), ch.rho_n().matrix(), sigma_n.matrix());
        assert!(frobenius(&(got - want)) < 1e-12);
    }
}
