use super::step::{stage, Stepper};
use super::{Scheme, SolverOptions, TimeGrid};
use crate::energy::Energy;
use crate::error::{dim_mismatch, Error, Result};
use crate::input::InputSignal;
use crate::linalg::Vector;
use crate::system::{EnergyBasedSystem, StatePartition, SystemDims};

/// Result of a time integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub scheme: Scheme,
    pub solver: SolverOptions,
    pub dims: SystemDims,
    /// `t⁰, …, tᴺ`.
    pub times: Vec<f64>,
    /// `z⁰, …, zᴺ`.
    pub states: Vec<Vector>,
    /// `y^{n+½}`, one per step.
    pub outputs: Vec<Vector>,
    /// `H(zⁿ)`, recomputed from `states`.
    pub energies: Vec<f64>,
    /// `Hⁿ⁺¹ − Hⁿ − τ⟨y, u⟩ + ⟨v, R v⟩/τ` per step.
    pub balance_residuals: Vec<f64>,
    pub newton_iterations: Vec<usize>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.outputs.len()
    }

    pub fn state(&self, n: usize) -> StatePartition {
        StatePartition::new(self.dims, self.states[n].clone()).expect("stored states match dims")
    }

    pub fn last_state(&self) -> &Vector {
        self.states.last().expect("trajectory has at least one state")
    }

    pub fn energy_increments(&self) -> Vec<f64> {
        self.energies.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Energy of a full state vector.
pub(crate) fn state_energy<S: EnergyBasedSystem + ?Sized>(sys: &S, z: &Vector) -> f64 {
    sys.energy().value(&z.rows(0, sys.dims().n_energy()).into_owned())
}

/// Integrates over `grid` from `z0`; `u` is sampled at step midpoints.
pub fn integrate<S: EnergyBasedSystem + ?Sized>(
    sys: &S,
    z0: &StatePartition,
    input: &InputSignal,
    grid: &TimeGrid,
    scheme: Scheme,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    integrate_with_progress(sys, z0, input, grid, scheme, opts, &mut |_, _| {})
}

/// As [`integrate`], calling `progress(n, N)` after each completed step.
pub fn integrate_with_progress<S: EnergyBasedSystem + ?Sized>(
    sys: &S,
    z0: &StatePartition,
    input: &InputSignal,
    grid: &TimeGrid,
    scheme: Scheme,
    opts: &SolverOptions,
    progress: &mut dyn FnMut(usize, usize),
) -> Result<Trajectory> {
    grid.check()?;
    input.check()?;
    let d = sys.dims();
    if z0.dims() != d {
        return Err(dim_mismatch("initial state", d.to_string(), z0.dims().to_string()));
    }
    if input.dim() != d.m {
        return Err(dim_mismatch("input signal", d.m, input.dim()));
    }
    let stepper = Stepper::new(sys, scheme, grid.tau, *opts)?;
    let n_steps = grid.steps();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut outputs = Vec::with_capacity(n_steps);
    let mut iterations = Vec::with_capacity(n_steps);
    times.push(grid.t0);
    states.push(z0.as_vector().clone());
    for n in 0..n_steps {
        let t_n = grid.time(n);
        let zn = &states[n];
        let predictor = (n > 0).then(|| zn * 2.0 - &states[n - 1]);
        let u_mid = input.eval(grid.midpoint(n));
        let out = stepper.step(t_n, zn, &u_mid, predictor.as_ref()).map_err(|e| Error::StepFailed {
            step: n,
            time: t_n,
            source: Box::new(e),
        })?;
        times.push(grid.time(n + 1));
        states.push(out.z_next);
        outputs.push(out.y_mid);
        iterations.push(out.iterations);
        progress(n + 1, n_steps);
    }
    let energies: Vec<f64> = states.iter().map(|z| state_energy(sys, z)).collect();
    let mut balance = Vec::with_capacity(n_steps);
    for n in 0..n_steps {
        let u_mid = input.eval(grid.midpoint(n));
        let st = stage(sys, scheme, grid.time(n), grid.tau, &states[n], &states[n + 1], &u_mid)?;
        balance.push(energies[n + 1] - energies[n] - grid.tau * st.y.dot(&u_mid) + st.dissipation / grid.tau);
    }
    Ok(Trajectory {
        grid: *grid,
        scheme,
        solver: *opts,
        dims: d,
        times,
        states,
        outputs,
        energies,
        balance_residuals: balance,
        newton_iterations: iterations,
    })
}
