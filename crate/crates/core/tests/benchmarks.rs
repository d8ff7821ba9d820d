//! End-to-end synthesis on two classic benchmark plants: a third-order
//! unstable chain with two outputs, and the lateral dynamics of an aircraft
//! with a single measured state.

use sofkit_core::care::{solve_care, solve_lyapunov, LinearSystem, SystemMode, Weights};
use sofkit_core::eig::min_eig_sym;
use sofkit_core::matrix::Matrix;
use sofkit_core::sim::{check_dissipation, simulate_closed_loop, spectral_abscissa};
use sofkit_core::sof::{precheck_structure, synthesize_sof, theorem2_block, SofOptions, SofStatus};

type M = Matrix<f64>;

fn chain_system() -> (LinearSystem<f64>, Weights<f64>, M) {
    let a = M::from_rows(&[
        vec![0.0, 1.0, 0.0],
        vec![0.0, 1.0, 1.0],
        vec![0.0, 13.0, 0.0],
    ])
    .unwrap();
    let b = M::from_rows(&[vec![0.0], vec![0.0], vec![1.0]]).unwrap();
    let c = M::from_rows(&[vec![0.0, 5.0, -1.0], vec![-1.0, -1.0, 0.0]]).unwrap();
    let sys = LinearSystem::new(a, b, c, None, SystemMode::NoD).unwrap();
    let q = M::diag(&[1.0, 3.0, 0.1]);
    let r = M::from_rows(&[vec![1e-4]]).unwrap();
    let weights = Weights::new(q, r).unwrap();
    let f_ref = M::from_rows(&[vec![6.8981, 84.9224]]).unwrap();
    (sys, weights, f_ref)
}

fn aircraft_system() -> (LinearSystem<f64>, Weights<f64>, M) {
    let a = M::from_rows(&[
        vec![-0.0366, 0.0271, 0.0188, -0.4555],
        vec![0.0482, -1.0100, 0.0024, -4.0208],
        vec![0.1002, 0.3681, -0.7070, 1.4200],
        vec![0.0, 0.0, 1.0, 0.0],
    ])
    .unwrap();
    let b = M::from_rows(&[
        vec![0.4422, 0.1761],
        vec![3.5446, -7.5922],
        vec![-5.5200, 4.4900],
        vec![0.0, 0.0],
    ])
    .unwrap();
    let c = M::from_rows(&[vec![0.0, 1.0, 0.0, 0.0]]).unwrap();
    let sys = LinearSystem::new(a, b, c, None, SystemMode::NoD).unwrap();
    let weights = Weights::new(M::identity(4), M::identity(2)).unwrap();
    let f_ref = M::from_rows(&[vec![2.8334], vec![8.8618]]).unwrap();
    (sys, weights, f_ref)
}

#[test]
fn chain_reference_gain_stabilizes() {
    // The reference gain stabilizes, but the strict LMI with the CARE P is
    // (marginally) infeasible for this plant: the optimal margin is a small
    // negative number. Certify stability spectrally and check the
    // certificate value is only marginally below zero.
    let (sys, weights, f_ref) = chain_system();
    let care = solve_care(&sys.a, &sys.b, &weights.q, &weights.r).unwrap();
    let block = theorem2_block(&sys, &care.p, &weights.q, &weights.r, &f_ref, false).unwrap();
    let margin = min_eig_sym(&block).unwrap();
    assert!(margin > -1e-3 && margin < 0.0, "margin {margin}");
    let a_cl = &sys.a + &sys.b.matmul(&f_ref).matmul(&sys.c);
    assert!(spectral_abscissa(&a_cl).unwrap() < -1.0);
}

#[test]
fn chain_synthesis_matches_or_beats_reference() {
    let (sys, weights, f_ref) = chain_system();
    let res = synthesize_sof(&sys, &weights, &SofOptions::default()).unwrap();
    assert_eq!(res.status, SofStatus::Stabilizing, "abscissa {}", res.closed_loop_abscissa);
    assert!(res.closed_loop_abscissa < -1e-9);
    let alpha_ref = min_eig_sym(
        &theorem2_block(&sys, &res.p, &weights.q, &weights.r, &f_ref, false).unwrap(),
    )
    .unwrap();
    assert!(
        res.alpha >= alpha_ref - 1e-6,
        "alpha {} below reference {}",
        res.alpha,
        alpha_ref
    );
}

#[test]
fn chain_no_structural_obstruction() {
    let (sys, weights, _) = chain_system();
    let care = solve_care(&sys.a, &sys.b, &weights.q, &weights.r).unwrap();
    let rep = precheck_structure(&sys, &care.p, &weights.r).unwrap();
    assert!(!rep.obstruction);
}

#[test]
fn chain_dissipation_with_lyapunov_storage() {
    // The CARE P does not certify this loop (margin < 0), so audit the
    // dissipation inequality with a storage built from the closed-loop
    // Lyapunov equation instead.
    let (sys, weights, _) = chain_system();
    let res = synthesize_sof(&sys, &weights, &SofOptions::default()).unwrap();
    assert_eq!(res.status, SofStatus::Stabilizing);
    let a_cl = &sys.a + &sys.b.matmul(&res.f).matmul(&sys.c);
    let p_lyap = solve_lyapunov(&a_cl, &Matrix::identity(3)).unwrap();
    let traj =
        simulate_closed_loop(&sys, &res.f, Some(&p_lyap), &[], &[1.0, -0.5, 0.25], 0.0, 2.0)
            .unwrap();
    assert!(!traj.diverged());
    for w in traj.storage.windows(2) {
        assert!(w[1] < w[0] + 1e-9 * traj.storage[0]);
    }
    let rep = check_dissipation(&traj, &p_lyap, &weights.r).unwrap();
    assert!(rep.ok, "max violation {}", rep.max_violation);
}

#[test]
fn aircraft_open_loop_unstable() {
    let (sys, _, _) = aircraft_system();
    assert!(spectral_abscissa(&sys.a).unwrap() > 0.0);
}

#[test]
fn aircraft_reference_gain_stabilizes() {
    // Single-output geometry: the strict LMI is infeasible outright (the
    // optimum sits near the reference gain with a clearly negative margin)
    // yet the loop is exponentially stable — the canonical "maximize alpha,
    // then check eigenvalues" outcome.
    let (sys, _weights, f_ref) = aircraft_system();
    let a_cl = &sys.a + &sys.b.matmul(&f_ref).matmul(&sys.c);
    assert!(spectral_abscissa(&a_cl).unwrap() < -0.1);
}

#[test]
fn aircraft_synthesis_matches_or_beats_reference() {
    let (sys, weights, f_ref) = aircraft_system();
    let res = synthesize_sof(&sys, &weights, &SofOptions::default()).unwrap();
    assert_eq!(res.status, SofStatus::Stabilizing, "abscissa {}", res.closed_loop_abscissa);
    let alpha_ref = min_eig_sym(
        &theorem2_block(&sys, &res.p, &weights.q, &weights.r, &f_ref, false).unwrap(),
    )
    .unwrap();
    assert!(
        res.alpha >= alpha_ref - 1e-6,
        "alpha {} below reference {}",
        res.alpha,
        alpha_ref
    );
}
