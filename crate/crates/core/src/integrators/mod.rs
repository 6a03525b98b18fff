//! Implicit midpoint and discrete-gradient time stepping.
//!
//! Both schemes advance the full state `z = [z1; z2; z3]`. With
//! `Δ = zⁿ⁺¹ − zⁿ`, a stage gradient `g` and `v = [Δ1; τ g2; τ (z3ⁿ + z3ⁿ⁺¹)/2]`
//! a step solves
//!
//! ```text
//! [τ g1; Δ2; 0] = (J − R) v + τ B u(tⁿ⁺½),     y = Bᵀ v / τ.
//! ```
//!
//! The midpoint scheme takes `g = ∇H((zⁿ + zⁿ⁺¹)/2)`, the discrete-gradient
//! scheme `g = ∇̄H(zⁿ, zⁿ⁺¹)`.

mod driver;
mod init;
mod newton;
mod step;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::energy::DiscreteGradientKind;
use crate::error::{Error, Result};

pub use driver::{integrate, integrate_with_progress, Trajectory};
pub use init::{algebraic_rows, consistent_initialization, AlgebraicRows};
pub use newton::{newton_solve, NewtonOutcome};
pub use step::{stage, step, step_discrete_gradient, step_midpoint, Stage, StepOutcome, Stepper};

/// Globalization of the Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Damping {
    None,
    /// Halve the step (at most 20 times) while the residual norm does not decrease.
    #[default]
    Backtracking,
}

/// Source of the Newton iteration matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMode {
    /// Exact derivative when the energy has a Hessian, forward differences otherwise.
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Absolute residual tolerance. Step solvers scale it by `1 + ‖zⁿ‖`.
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iters: usize,
    pub damping: Damping,
    pub jacobian: JacobianMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_iters: 25,
            damping: Damping::Backtracking,
            jacobian: JacobianMode::Analytic,
        }
    }
}

impl SolverOptions {
    pub fn check(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParams("solver tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParams("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Equidistant grid `tⁿ = t0 + n τ`, `n = 0, …, N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_end: f64,
    pub tau: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, tau: f64) -> Result<Self> {
        let g = Self { t0, t_end, tau };
        g.check()?;
        Ok(g)
    }

    /// Grid with `steps` steps of size `tau` starting at zero.
    pub fn with_steps(tau: f64, steps: usize) -> Result<Self> {
        Self::new(0.0, tau * steps as f64, tau)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParams(format!("step size must be positive, got {}", self.tau)));
        }
        if !(self.t_end > self.t0) {
            return Err(Error::InvalidParams("t_end must exceed t0".into()));
        }
        Ok(())
    }

    /// `N = round((t_end − t0)/τ)`.
    pub fn steps(&self) -> usize {
        ((self.t_end - self.t0) / self.tau).round().max(1.0) as usize
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.tau
    }

    pub fn midpoint(&self, n: usize) -> f64 {
        self.t0 + (n as f64 + 0.5) * self.tau
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "scheme", content = "kind")]
pub enum Scheme {
    #[default]
    Midpoint,
    DiscreteGradient(DiscreteGradientKind),
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Midpoint => f.write_str("midpoint"),
            Scheme::DiscreteGradient(_) => f.write_str("discrete-gradient"),
        }
    }
}
