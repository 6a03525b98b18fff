mod common;

use std::time::Instant;

use common::{model, run, run_system, zero_input, DG};
use dissipact::diagnostics::{constraint_residual, dissipation_report, structure_report};
use dissipact::integrators::{consistent_initialization, Scheme, SolverOptions};
use dissipact::zoo::{build_all, build_model, derivative_constraint_input, describe, list, ModelSpec};
use dissipact::{Energy, EnergyModel, Error, InputSignal, Matrix, Vector};

#[test]
fn every_model_is_structured_and_consistent() {
    let start = Instant::now();
    let models = build_all().unwrap();
    assert_eq!(models.len(), 15);
    for m in &models {
        let rep = structure_report(&m.system);
        assert!(rep.passed, "{}", m.name);
        assert_eq!(rep.skew_defect, 0.0, "{}", m.name);
        assert_eq!(rep.sym_defect, 0.0, "{}", m.name);
        assert!(rep.min_eig_r >= -1e-10, "{}: {:e}", m.name, rep.min_eig_r);
        let u0 = m.default_input.eval(0.0);
        let z = consistent_initialization(&m.system, &m.z0, &u0, &SolverOptions::default()).unwrap();
        assert_eq!(z, m.z0, "{} initial data is not consistent", m.name);
        assert!(m.notes.len() > m.name.len());
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn every_model_dissipates_without_input() {
    for m in build_all().unwrap() {
        let input = zero_input(&m.system);
        let schemes: &[Scheme] = if m.name == "cahn_hilliard" { &[DG] } else { &[Scheme::Midpoint, DG] };
        for &scheme in schemes {
            let traj = run(&m, scheme, &input, m.default_tau, 100);
            let rep = dissipation_report(&m.system, &traj, &input).unwrap();
            assert!(
                rep.dissipative() && rep.balanced(),
                "{} / {scheme:?}: violation {:e}, balance {:e}, tolerance {:e}",
                m.name,
                rep.max_violation,
                rep.balance_max_residual,
                rep.tolerance
            );
        }
    }
}

#[test]
fn registry_lookup_and_parameter_errors() {
    assert_eq!(list().len(), 15);
    assert!(matches!(describe("nope"), Err(Error::UnknownModel(_))));
    assert!(matches!(build_model(&ModelSpec::new("nope")), Err(Error::UnknownModel(_))));
    let bad = [
        ModelSpec::new("ph_iso").with_param("stiffness", -1.0),
        ModelSpec::new("ph_iso").with_param("colour", 1.0),
        ModelSpec::new("ph_iso").with_grid(4),
        ModelSpec::new("gradient_flow").with_param("double_well", 0.5),
        ModelSpec::new("cahn_hilliard").with_grid(1),
    ];
    for spec in bad {
        assert!(matches!(build_model(&spec), Err(Error::InvalidParams(_))), "{spec:?}");
    }
    let info = describe("vibrating_string").unwrap();
    assert_eq!(info.grid, Some(32));
    let m = build_model(&ModelSpec::new("dc_network").with_param("r_g", 3.0)).unwrap();
    assert!(m.notes.contains("r_g=3"));
    assert_eq!(m.params["r_g"], 3.0);
}

#[test]
fn dc_network_initial_currents() {
    let m = model("dc_network");
    let z = m.z0.as_vector();
    // Unit resistors and capacitances: I_G = V1 and I_R = V2.
    assert_eq!(z[3], z[1]);
    assert_eq!(z[4], z[2]);
    assert_eq!(m.default_input.eval(0.5 * std::f64::consts::PI)[0], 1.0);
}

#[test]
fn small_string_layout() {
    let m = build_model(&ModelSpec::new("vibrating_string").with_grid(2)).unwrap();
    let d = m.system.system_dims();
    assert_eq!((d.n1, d.n2, d.n3, d.m), (0, 5, 0, 2));
    assert_eq!(m.system.r(), &Matrix::zeros(5, 5));
    // Each node couples to the cells on either side.
    let j = m.system.j();
    assert_eq!(j.view((0, 2), (2, 3)).into_owned(), Matrix::from_row_slice(2, 3, &[-1.0, 1.0, 0.0, 0.0, -1.0, 1.0]));
}

#[test]
fn augmented_initial_state_satisfies_the_constraint() {
    let m = build_model(&ModelSpec::new("mech_augmented").with_param("g", 0.4)).unwrap();
    let z = m.z0.as_vector();
    let g = m.system.energy_model().gradient(z);
    assert!(g[6].abs() < 1e-15, "B x − g = {}", g[6]);
    assert!(matches!(m.system.energy_model(), EnergyModel::AugmentedQuadratic(_)));
    let input = zero_input(&m.system);
    let traj = run(&m, Scheme::Midpoint, &input, 0.01, 100);
    let res = constraint_residual(&m.system, &traj, &input).unwrap();
    assert!(res.iter().all(|r| *r < 1e-10));
}

#[test]
fn stokes_energy_decreases_strictly_once_stress_builds() {
    let m = model("viscoelastic_stokes");
    let input = zero_input(&m.system);
    let traj = run(&m, Scheme::Midpoint, &input, m.default_tau, 50);
    for w in traj.energies.windows(2) {
        assert!(w[1] < w[0]);
    }
    let res = constraint_residual(&m.system, &traj, &input).unwrap();
    assert!(res.iter().all(|r| *r <= 1e-10));
}

#[test]
fn poroelastic_energy_drop_is_the_flux_dissipation() {
    let m = model("poroelasticity");
    let input = zero_input(&m.system);
    let tau = 0.02;
    let traj = run(&m, Scheme::Midpoint, &input, tau, 50);
    let n = 8;
    let h = 1.0 / 9.0;
    let c = h; // storage·h
    let bp = dissipact::zoo::laplacian_dirichlet_1d(n, 1.0).unwrap() * h;
    for k in 0..50 {
        let p_mid = (traj.states[k].rows(n, n) + traj.states[k + 1].rows(n, n)) * (0.5 / c);
        let drop = traj.energies[k] - traj.energies[k + 1];
        let flux = tau * p_mid.dot(&(&bp * &p_mid));
        assert!((drop - flux).abs() <= 1e-12 * (1.0 + flux), "step {k}: {drop} vs {flux}");
    }
}

/// Terminal displacement of the relaxed model at `ε` against the constrained one.
fn perturbation_gap(eps: f64) -> f64 {
    let tau = 1.0;
    let steps = 5;
    let dae = model("index2_semiexplicit");
    let dae_traj = run(&dae, Scheme::Midpoint, &zero_input(&dae.system), tau, steps);
    let m_inv = common::quadratic_matrix(dae.system.energy_model());
    let u_dae = &m_inv * dae_traj.last_state().rows(0, 4);
    let sp = build_model(&ModelSpec::new("index2_singular_perturbation").with_param("epsilon", eps)).unwrap();
    let sp_traj = run(&sp, Scheme::Midpoint, &zero_input(&sp.system), tau, steps);
    (sp_traj.last_state().rows(0, 4) - u_dae).norm()
}

#[test]
fn singular_perturbation_approaches_the_constrained_model() {
    let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|&e| perturbation_gap(e)).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    assert!(gaps[2] < 1e-4, "{gaps:?}");
}

#[test]
fn derivative_input_needs_an_analytic_signal() {
    let pl = InputSignal::piecewise_linear(vec![0.0, 1.0], vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
    let err = derivative_constraint_input(InputSignal::zero(4), &pl).unwrap_err();
    assert!(matches!(err, Error::NotDifferentiable(_)));
    let ok = derivative_constraint_input(InputSignal::zero(4), &InputSignal::sine(&[1.0, 2.0], 3.0, 0.0)).unwrap();
    let v = ok.eval(0.0);
    assert_eq!(v.as_slice(), &[0.0, 0.0, 0.0, 0.0, 3.0, 6.0]);
}

#[test]
fn derivative_constraint_tracks_a_moving_target() {
    let m = model("index2_derivative_constraint");
    let g = InputSignal::sine(&[0.3, -0.2], 2.0, 0.0);
    let input = derivative_constraint_input(InputSignal::zero(4), &g).unwrap();
    let traj = run(&m, Scheme::Midpoint, &input, 0.01, 100);
    let res = constraint_residual(&m.system, &traj, &input).unwrap();
    assert!(res.iter().all(|r| *r <= 1e-10));
    // The velocity constraint holds at the stage, B Δu = τ g'(tⁿ⁺½); the
    // position constraint then drifts only at second order.
    let b = Matrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    let dg = g.derivative().unwrap();
    for k in 0..100 {
        let du = traj.states[k + 1].rows(0, 4) - traj.states[k].rows(0, 4);
        assert!((&b * du - dg.eval(traj.grid.midpoint(k)) * 0.01).amax() < 1e-12);
    }
    let offset0 = &b * traj.states[0].rows(0, 4) - g.eval(0.0);
    let offset = &b * traj.last_state().rows(0, 4) - g.eval(1.0);
    assert!((offset - offset0).amax() < 1e-4);
}

#[test]
fn oscillator_oracle_starts_at_the_initial_state() {
    for name in ["ph_iso", "vibrating_string"] {
        let m = model(name);
        let oracle = m.oracle.clone().unwrap();
        assert!((oracle(0.0) - m.z0.as_vector()).amax() < 1e-15, "{name}");
    }
}

#[test]
fn double_well_gradient_flow_stays_monotone_at_large_steps() {
    let m = build_model(&ModelSpec::new("gradient_flow").with_param("double_well", 1.0)).unwrap();
    assert!(!m.system.energy_model().is_quadratic());
    let input = zero_input(&m.system);
    let traj = run(&m, DG, &input, 0.1, 200);
    let rep = dissipation_report(&m.system, &traj, &input).unwrap();
    assert!(rep.dissipative());
    let z = run_system(&m.system, &Vector::from_element(8, 0.0), &input, 0.1, 5, DG);
    assert_eq!(z.last_state().amax(), 0.0, "the barrier state is an equilibrium");
}
