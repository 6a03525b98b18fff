//! Energy-balance certificates and numerical self-checks on trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{Energy, EnergyModel};
use crate::error::{Error, Result};
use crate::input::InputSignal;
use crate::integrators::{algebraic_rows, stage, Trajectory};
use crate::linalg::Vector;
use crate::system::{default_tol_psd, validate, EnergyBasedSystem, StructuredSystem, ValidationReport};

/// Per-step energy bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepBalance {
    pub t_mid: f64,
    /// `Hⁿ⁺¹ − Hⁿ`.
    pub delta_h: f64,
    /// `τ⟨y^{n+½}, u^{n+½}⟩`.
    pub supply: f64,
    /// `⟨v, R v⟩/τ ≥ 0`.
    pub dissipation: f64,
    /// `ΔH − supply`; non-positive up to round-off.
    pub violation: f64,
    /// `ΔH − supply + dissipation`; zero up to the solver tolerance.
    pub balance_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    /// `maxₙ (Hⁿ⁺¹ − Hⁿ − τ⟨y, u⟩)`.
    pub max_violation: f64,
    /// Whether the input is identically zero.
    pub unforced: bool,
    /// `Hⁿ⁺¹ ≤ Hⁿ + tolerance` for all `n`; vacuously true for forced runs.
    pub monotone_when_unforced: bool,
    pub balance_max_residual: f64,
    /// Certificate tolerance `10·abs_tol·(1 + maxₙ |Hⁿ|)`.
    pub tolerance: f64,
    pub per_step: Vec<StepBalance>,
}

impl DissipationReport {
    /// The dissipation inequality holds at every step.
    pub fn dissipative(&self) -> bool {
        self.max_violation <= self.tolerance && self.monotone_when_unforced
    }

    /// Dissipative and the discrete power balance closes.
    pub fn balanced(&self) -> bool {
        self.dissipative() && self.balance_max_residual <= self.tolerance
    }
}

/// Certificate tolerance tied to the Newton tolerance of the run.
pub fn certificate_tolerance(traj: &Trajectory) -> f64 {
    let hmax = traj.energies.iter().fold(0.0_f64, |a, h| a.max(h.abs()));
    10.0 * traj.solver.abs_tol * (1.0 + hmax)
}

fn check_belongs<S: EnergyBasedSystem + ?Sized>(sys: &S, traj: &Trajectory) -> Result<()> {
    let d = sys.dims();
    if traj.dims != d {
        return Err(Error::TrajectoryMismatch(format!("system dims {d}, trajectory dims {}", traj.dims)));
    }
    let n = traj.outputs.len();
    if traj.states.len() != n + 1 || traj.times.len() != n + 1 || traj.energies.len() != n + 1 {
        return Err(Error::TrajectoryMismatch("inconsistent series lengths".into()));
    }
    if traj.states.iter().any(|z| z.len() != d.n()) || traj.outputs.iter().any(|y| y.len() != d.m) {
        return Err(Error::TrajectoryMismatch("state or output length differs from the system".into()));
    }
    Ok(())
}

fn state_energy<S: EnergyBasedSystem + ?Sized>(sys: &S, z: &Vector) -> f64 {
    sys.energy().value(&z.rows(0, sys.dims().n_energy()).into_owned())
}

/// Recomputes the energy balance of every step from the states alone.
pub fn dissipation_report<S: EnergyBasedSystem + ?Sized>(
    sys: &S,
    traj: &Trajectory,
    input: &InputSignal,
) -> Result<DissipationReport> {
    check_belongs(sys, traj)?;
    if input.dim() != sys.dims().m {
        return Err(Error::TrajectoryMismatch(format!(
            "input has {} components, system has {} ports",
            input.dim(),
            sys.dims().m
        )));
    }
    let energies: Vec<f64> = traj.states.iter().map(|z| state_energy(sys, z)).collect();
    let hmax = energies.iter().fold(0.0_f64, |a, h| a.max(h.abs()));
    let tolerance = 10.0 * traj.solver.abs_tol * (1.0 + hmax);
    let tau = traj.grid.tau;
    let mut per_step = Vec::with_capacity(traj.steps());
    for n in 0..traj.steps() {
        let t_mid = traj.grid.midpoint(n);
        let u = input.eval(t_mid);
        let st = stage(sys, traj.scheme, traj.times[n], tau, &traj.states[n], &traj.states[n + 1], &u)?;
        let delta_h = energies[n + 1] - energies[n];
        let supply = tau * st.y.dot(&u);
        let dissipation = st.dissipation / tau;
        per_step.push(StepBalance {
            t_mid,
            delta_h,
            supply,
            dissipation,
            violation: delta_h - supply,
            balance_residual: delta_h - supply + dissipation,
        });
    }
    let max_violation = per_step.iter().map(|s| s.violation).fold(f64::NEG_INFINITY, f64::max);
    let balance_max_residual = per_step.iter().map(|s| s.balance_residual.abs()).fold(0.0, f64::max);
    let unforced = input.is_zero();
    let monotone_when_unforced = !unforced || per_step.iter().all(|s| s.delta_h <= tolerance);
    Ok(DissipationReport { max_violation, unforced, monotone_when_unforced, balance_max_residual, tolerance, per_step })
}

/// Structural report with the default positive semi-definiteness tolerance.
pub fn structure_report(sys: &StructuredSystem) -> ValidationReport {
    validate(sys, default_tol_psd(sys.r()))
}

/// Worst relative error `‖fd − ∇H‖∞ / (‖∇H‖∞ + 1e−8)` of central differences
/// with step `h` over `samples` seeded points in `[−2, 2]ⁿ`.
pub fn gradient_fd_check(model: &EnergyModel, samples: usize, h: f64, seed: u64) -> f64 {
    let n = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x = Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-2.0..2.0)));
        let g = model.gradient(&x);
        let mut fd = Vector::zeros(n);
        let mut xp = x.clone();
        for i in 0..n {
            xp[i] = x[i] + h;
            let hp = model.value(&xp);
            xp[i] = x[i] - h;
            let hm = model.value(&xp);
            xp[i] = x[i];
            fd[i] = (hp - hm) / (2.0 * h);
        }
        let err = (&fd - &g).amax() / (g.amax() + 1e-8);
        worst = worst.max(err);
    }
    worst
}

/// Norm of the algebraic rows of the continuous residual at each step's
/// stage values `(z^{n+½}, Δz/τ, u^{n+½})`, with the scheme's stage gradient.
pub fn constraint_residual<S: EnergyBasedSystem + ?Sized>(
    sys: &S,
    traj: &Trajectory,
    input: &InputSignal,
) -> Result<Vec<f64>> {
    check_belongs(sys, traj)?;
    if traj.states.is_empty() {
        return Err(Error::TrajectoryMismatch("empty trajectory".into()));
    }
    let u0 = input.eval(traj.grid.t0);
    let constant_w = sys.constant_coefficients().is_some();
    let w0 = algebraic_rows(sys, traj.grid.t0, &traj.states[0], &u0)?.w;
    if w0.ncols() == 0 {
        return Err(Error::NoAlgebraicRows);
    }
    let tau = traj.grid.tau;
    let mut out = Vec::with_capacity(traj.steps());
    for n in 0..traj.steps() {
        let u = input.eval(traj.grid.midpoint(n));
        let st = stage(sys, traj.scheme, traj.times[n], tau, &traj.states[n], &traj.states[n + 1], &u)?;
        let w = if constant_w {
            w0.clone()
        } else {
            let mid = (&traj.states[n] + &traj.states[n + 1]) * 0.5;
            algebraic_rows(sys, traj.grid.midpoint(n), &mid, &u)?.w
        };
        out.push((w.transpose() * &st.residual).norm() / tau);
    }
    Ok(out)
}

/// Algebraic-row residual at the grid points (informational; the schemes
/// enforce the constraints at stage values only).
pub fn constraint_drift<S: EnergyBasedSystem + ?Sized>(sys: &S, traj: &Trajectory, input: &InputSignal) -> Result<Vec<f64>> {
    check_belongs(sys, traj)?;
    traj.states
        .iter()
        .zip(&traj.times)
        .map(|(z, &t)| algebraic_rows(sys, t, z, &input.eval(t)).map(|a| a.residual.norm()))
        .collect()
}
