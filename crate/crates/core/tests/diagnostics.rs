mod common;

use common::{model, run, zero_input, DG};
use dissipact::diagnostics::{certificate_tolerance, constraint_drift, constraint_residual, dissipation_report};
use dissipact::integrators::Scheme;
use dissipact::zoo::{ggl_input, index2_constraint_input};
use dissipact::{Energy, Error, InputSignal, Vector};

#[test]
fn unforced_runs_certify_dissipation() {
    for name in ["ph_iso", "dc_network", "poroelasticity", "mech_nonholonomic", "viscoelastic_stokes"] {
        let m = model(name);
        let input = zero_input(&m.system);
        let traj = run(&m, Scheme::Midpoint, &input, m.default_tau, 50);
        let rep = dissipation_report(&m.system, &traj, &input).unwrap();
        assert!(rep.unforced && rep.monotone_when_unforced);
        assert!(rep.dissipative() && rep.balanced(), "{name}: {:e} / {:e}", rep.max_violation, rep.balance_max_residual);
        assert_eq!(rep.tolerance, certificate_tolerance(&traj));
        assert_eq!(rep.per_step.len(), 50);
        for s in &rep.per_step {
            assert!(s.dissipation >= 0.0);
            assert_eq!(s.supply, 0.0);
        }
    }
}

#[test]
fn lossless_string_has_zero_increments() {
    let m = model("vibrating_string");
    let input = zero_input(&m.system);
    let traj = run(&m, Scheme::Midpoint, &input, 0.01, 100);
    let rep = dissipation_report(&m.system, &traj, &input).unwrap();
    for s in &rep.per_step {
        assert!(s.delta_h.abs() <= rep.tolerance);
        assert_eq!(s.dissipation, 0.0);
    }
}

#[test]
fn forced_circuit_balance_recomputed_from_states() {
    let m = model("dc_network");
    let input = InputSignal::sine(&[2.0], 3.0, 0.0);
    let tau = 0.01;
    let traj = run(&m, Scheme::Midpoint, &input, tau, 200);
    let rep = dissipation_report(&m.system, &traj, &input).unwrap();
    assert!(!rep.unforced && rep.dissipative() && rep.balanced());
    assert!(rep.per_step.iter().any(|s| s.supply.abs() > 1e-4));
    assert!(rep.per_step.iter().any(|s| s.delta_h > 1e-4), "the source must pump energy in at times");
    let inv = [1.0, 1.0, 1.0]; // 1/L, 1/C1, 1/C2 at the defaults
    for (n, s) in rep.per_step.iter().enumerate() {
        let (z0, z1) = (&traj.states[n], &traj.states[n + 1]);
        let mid = (z0 + z1) * 0.5;
        let v = Vector::from_vec(vec![
            tau * inv[0] * mid[0],
            tau * inv[1] * mid[1],
            tau * inv[2] * mid[2],
            tau * mid[3],
            tau * mid[4],
        ]);
        let u = input.eval((n as f64 + 0.5) * tau);
        let y = m.system.b().transpose() * &v / tau;
        assert!((s.supply - tau * y.dot(&u)).abs() < 1e-15);
        assert!((y - &traj.outputs[n]).amax() < 1e-14);
        assert!((s.dissipation - v.dot(&(m.system.r() * &v)) / tau).abs() < 1e-15);
        assert!(s.violation <= rep.tolerance);
    }
}

#[test]
fn energy_gain_is_flagged() {
    let m = model("ph_iso");
    let input = zero_input(&m.system);
    let mut traj = run(&m, Scheme::Midpoint, &input, 0.05, 20);
    traj.states[10] *= 1.01;
    let rep = dissipation_report(&m.system, &traj, &input).unwrap();
    assert!(!rep.dissipative());
    assert!(rep.max_violation > 1e-4);
}

#[test]
fn index2_stage_constraints_hold_with_inputs() {
    let m = model("index2_semiexplicit");
    let input = index2_constraint_input(InputSignal::sine(&[1.0, 0.0, -0.5, 0.2], 2.0, 0.0), InputSignal::sine(&[0.3, -0.1], 1.0, 0.4));
    let traj = run(&m, Scheme::Midpoint, &input, 0.01, 100);
    let res = constraint_residual(&m.system, &traj, &input).unwrap();
    assert_eq!(res.len(), 100);
    assert!(res.iter().all(|r| *r <= 1e-10), "{:e}", res.iter().cloned().fold(0.0, f64::max));
    assert_eq!(constraint_drift(&m.system, &traj, &input).unwrap().len(), 101);
}

#[test]
fn ggl_stage_constraints_hold_with_moving_constraint() {
    let m = model("mech_ggl");
    let g = InputSignal::sine(&[0.2], 1.5, 0.0);
    let input = ggl_input(InputSignal::sine(&[0.0, 1.0, 0.0], 1.0, 0.0), &g).unwrap();
    assert_eq!(input.dim(), 5);
    for scheme in [Scheme::Midpoint, DG] {
        let traj = run(&m, scheme, &input, 0.01, 100);
        let res = constraint_residual(&m.system, &traj, &input).unwrap();
        assert!(res.iter().all(|r| *r <= 1e-10), "{:e}", res.iter().cloned().fold(0.0, f64::max));
    }
}

#[test]
fn ordinary_models_have_no_constraints() {
    let m = model("ph_iso");
    let input = zero_input(&m.system);
    let traj = run(&m, Scheme::Midpoint, &input, 0.1, 5);
    assert_eq!(constraint_residual(&m.system, &traj, &input).unwrap_err(), Error::NoAlgebraicRows);
}

#[test]
fn reports_are_pure_functions_of_the_trajectory() {
    let m = model("cahn_hilliard");
    let input = zero_input(&m.system);
    let traj = run(&m, DG, &input, 0.1, 30);
    let a = dissipation_report(&m.system, &traj, &input).unwrap();
    let b = dissipation_report(&m.system, &traj, &input).unwrap();
    assert_eq!(a, b);
    for (k, z) in traj.states.iter().enumerate() {
        let h = m.system.energy_model().value(&z.rows(0, 16).into_owned());
        assert_eq!(h, traj.energies[k]);
    }
    for (s, r) in a.per_step.iter().zip(&traj.balance_residuals) {
        assert!((s.balance_residual - r).abs() < 1e-15);
    }
}

#[test]
fn foreign_trajectories_are_rejected() {
    let m = model("ph_iso");
    let other = model("dc_network");
    let input = zero_input(&m.system);
    let traj = run(&m, Scheme::Midpoint, &input, 0.1, 5);
    let err = dissipation_report(&other.system, &traj, &InputSignal::zero(1)).unwrap_err();
    assert!(matches!(err, Error::TrajectoryMismatch(_)));
    let mut short = traj.clone();
    short.states.pop();
    assert!(matches!(dissipation_report(&m.system, &short, &input), Err(Error::TrajectoryMismatch(_))));
    assert!(matches!(dissipation_report(&m.system, &traj, &InputSignal::zero(3)), Err(Error::TrajectoryMismatch(_))));
}
