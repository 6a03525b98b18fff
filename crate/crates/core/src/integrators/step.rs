use nalgebra::{Dyn, LU};

use super::newton::{fd_jacobian, newton_solve, solve_dense, NewtonOutcome};
use super::{JacobianMode, Scheme, SolverOptions};
use crate::energy::{DiscreteGradientKind, Energy};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::system::{EnergyBasedSystem, StatePartition, SystemDims};

/// Stage quantities of one step `zⁿ → zⁿ⁺¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    /// Stage gradient on `[z1; z2]`.
    pub g: Vector,
    /// `[Δ1; τ g2; τ z3ⁿ⁺½]`.
    pub v: Vector,
    /// `[τ g1; Δ2; 0] − (J − R) v − τ B u`; zero for an exact step.
    pub residual: Vector,
    /// `Bᵀ v / τ`.
    pub y: Vector,
    /// `⟨v, R v⟩`.
    pub dissipation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub z_next: Vector,
    pub y_mid: Vector,
    pub iterations: usize,
    pub residual_norm: f64,
}

fn stage_gradient<S: EnergyBasedSystem + ?Sized>(sys: &S, scheme: Scheme, zn: &Vector, x: &Vector) -> Result<Vector> {
    let ne = sys.dims().n_energy();
    let e0 = zn.rows(0, ne).into_owned();
    let e1 = x.rows(0, ne).into_owned();
    match scheme {
        Scheme::Midpoint => Ok(sys.energy().gradient(&((e0 + e1) * 0.5))),
        Scheme::DiscreteGradient(kind) => sys.energy().discrete_gradient(&e0, &e1, kind),
    }
}

/// Evaluates the stage of the step `zn → zn1` at `t_n`, with `u_mid = u(tⁿ⁺½)`.
pub fn stage<S: EnergyBasedSystem + ?Sized>(
    sys: &S,
    scheme: Scheme,
    t_n: f64,
    tau: f64,
    zn: &Vector,
    zn1: &Vector,
    u_mid: &Vector,
) -> Result<Stage> {
    let d = sys.dims();
    if zn.len() != d.n() {
        return Err(dim_mismatch("state", d.n(), zn.len()));
    }
    if zn1.len() != d.n() {
        return Err(dim_mismatch("next state", d.n(), zn1.len()));
    }
    if u_mid.len() != d.m {
        return Err(dim_mismatch("input", d.m, u_mid.len()));
    }
    let g = stage_gradient(sys, scheme, zn, zn1)?;
    let mid = (zn + zn1) * 0.5;
    let c = sys.coefficients(t_n + 0.5 * tau, &mid);
    let (v, lhs) = stage_vectors(d, tau, zn, zn1, &g);
    let rv = &c.r * &v;
    let residual = lhs - (&c.j - &c.r) * &v - &c.b * u_mid * tau;
    let y = c.b.transpose() * &v / tau;
    Ok(Stage { dissipation: v.dot(&rv), g, v, residual, y })
}

fn stage_vectors(d: SystemDims, tau: f64, zn: &Vector, x: &Vector, g: &Vector) -> (Vector, Vector) {
    let (n1, n2, n3, ne) = (d.n1, d.n2, d.n3, d.n_energy());
    let mut v = Vector::zeros(d.n());
    let mut lhs = Vector::zeros(d.n());
    v.rows_mut(0, n1).copy_from(&(x.rows(0, n1) - zn.rows(0, n1)));
    v.rows_mut(n1, n2).copy_from(&(g.rows(n1, n2) * tau));
    v.rows_mut(ne, n3).copy_from(&((x.rows(ne, n3) + zn.rows(ne, n3)) * (0.5 * tau)));
    lhs.rows_mut(0, n1).copy_from(&(g.rows(0, n1) * tau));
    lhs.rows_mut(n1, n2).copy_from(&(x.rows(n1, n2) - zn.rows(n1, n2)));
    (v, lhs)
}

/// Exact `∂F/∂zⁿ⁺¹` given `dg = ∂g/∂[z1; z2]ⁿ⁺¹` and constant coefficients.
fn assemble_jacobian(d: SystemDims, jr: &Matrix, dg: &Matrix, tau: f64) -> Matrix {
    let (n, n1, n2, n3, ne) = (d.n(), d.n1, d.n2, d.n3, d.n_energy());
    let mut dlhs = Matrix::zeros(n, n);
    let mut dv = Matrix::zeros(n, n);
    dlhs.view_mut((0, 0), (n1, ne)).copy_from(&(dg.rows(0, n1) * tau));
    dlhs.view_mut((n1, n1), (n2, n2)).fill_with_identity();
    dv.view_mut((0, 0), (n1, n1)).fill_with_identity();
    dv.view_mut((n1, 0), (n2, ne)).copy_from(&(dg.rows(n1, n2) * tau));
    for i in 0..n3 {
        dv[(ne + i, ne + i)] = 0.5 * tau;
    }
    dlhs - jr * dv
}

/// One-step map for a fixed system, scheme and step size.
///
/// Linear problems (quadratic energy, constant coefficients, and a stage
/// gradient that is the midpoint gradient by definition) are stepped with a
/// single pre-factorized solve. Everything else goes through Newton.
pub struct Stepper<'a, S: EnergyBasedSystem + ?Sized> {
    sys: &'a S,
    scheme: Scheme,
    tau: f64,
    opts: SolverOptions,
    constant_jacobian: Option<Matrix>,
    linear: Option<LU<f64, Dyn, Dyn>>,
}

impl<'a, S: EnergyBasedSystem + ?Sized> Stepper<'a, S> {
    pub fn new(sys: &'a S, scheme: Scheme, tau: f64, opts: SolverOptions) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParams(format!("step size must be positive, got {tau}")));
        }
        opts.check()?;
        let energy = sys.energy();
        if scheme == Scheme::DiscreteGradient(DiscreteGradientKind::AnalyticQuadratic) && !energy.is_quadratic() {
            return Err(Error::IllegalKind {
                kind: DiscreteGradientKind::AnalyticQuadratic.to_string(),
                energy: energy.kind_name().to_string(),
            });
        }
        let d = sys.dims();
        let mut constant_jacobian = None;
        let mut linear = None;
        if let Some(c) = sys.constant_coefficients() {
            if energy.is_quadratic() && opts.jacobian == JacobianMode::Analytic {
                let zero = Vector::zeros(d.n_energy());
                if let Some(h) = energy.hessian(&zero) {
                    let jac = assemble_jacobian(d, &c.j_minus_r(), &(h * 0.5), tau);
                    let exact_midpoint = matches!(
                        scheme,
                        Scheme::Midpoint | Scheme::DiscreteGradient(DiscreteGradientKind::AnalyticQuadratic)
                    );
                    if exact_midpoint && d.n() > 0 {
                        let lu = jac.clone().lu();
                        if !lu.is_invertible() {
                            return Err(Error::SingularJacobian);
                        }
                        linear = Some(lu);
                    }
                    constant_jacobian = Some(jac);
                }
            }
        }
        Ok(Self { sys, scheme, tau, opts, constant_jacobian, linear })
    }

    pub fn is_linear(&self) -> bool {
        self.linear.is_some()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    fn residual(&self, t_n: f64, zn: &Vector, x: &Vector, u_mid: &Vector) -> Result<Vector> {
        let d = self.sys.dims();
        let g = stage_gradient(self.sys, self.scheme, zn, x)?;
        let (v, lhs) = stage_vectors(d, self.tau, zn, x, &g);
        let c = match self.sys.constant_coefficients() {
            Some(c) => std::borrow::Cow::Borrowed(c),
            None => self.sys.coefficients(t_n + 0.5 * self.tau, &((zn + x) * 0.5)),
        };
        Ok(lhs - c.j_minus_r() * v - &c.b * u_mid * self.tau)
    }

    fn analytic_jacobian(&self, zn: &Vector, x: &Vector) -> Option<Matrix> {
        if let Some(j) = &self.constant_jacobian {
            return Some(j.clone());
        }
        let c = self.sys.constant_coefficients()?;
        if self.opts.jacobian != JacobianMode::Analytic {
            return None;
        }
        // The discrete gradient of a non-quadratic energy has no closed-form
        // derivative here.
        if matches!(self.scheme, Scheme::DiscreteGradient(_)) && !self.sys.energy().is_quadratic() {
            return None;
        }
        let ne = self.sys.dims().n_energy();
        let mid = (zn.rows(0, ne) + x.rows(0, ne)) * 0.5;
        let h = self.sys.energy().hessian(&mid)?;
        Some(assemble_jacobian(self.sys.dims(), &c.j_minus_r(), &(h * 0.5), self.tau))
    }

    /// Advances `zn` at time `t_n` with midpoint input `u_mid`. `predictor`
    /// seeds Newton; the linear path ignores it.
    pub fn step(&self, t_n: f64, zn: &Vector, u_mid: &Vector, predictor: Option<&Vector>) -> Result<StepOutcome> {
        let d = self.sys.dims();
        if zn.len() != d.n() {
            return Err(dim_mismatch("state", d.n(), zn.len()));
        }
        if u_mid.len() != d.m {
            return Err(dim_mismatch("input", d.m, u_mid.len()));
        }
        let abs_tol = self.opts.abs_tol * (1.0 + zn.norm());
        let (z_next, iterations, residual_norm) = if let Some(lu) = &self.linear {
            let mut x = zn.clone();
            let mut r = self.residual(t_n, zn, &x, u_mid)?;
            let tol = abs_tol + self.opts.rel_tol * r.norm();
            let mut iterations = 0;
            loop {
                if r.norm() <= tol {
                    break;
                }
                if iterations >= self.opts.max_iters {
                    return Err(Error::NewtonDivergence { iterations, residual: r.norm(), tolerance: tol });
                }
                let dx = lu.solve(&r).ok_or(Error::SingularJacobian)?;
                x -= dx;
                r = self.residual(t_n, zn, &x, u_mid)?;
                iterations += 1;
            }
            (x, iterations, r.norm())
        } else {
            let x0 = predictor.cloned().unwrap_or_else(|| zn.clone());
            let opts = SolverOptions { abs_tol, ..self.opts };
            // Dimensions were checked above, so evaluation cannot fail.
            let f = |x: &Vector| self.residual(t_n, zn, x, u_mid).expect("dimensions checked");
            let jac = |x: &Vector| match self.analytic_jacobian(zn, x) {
                Some(j) => j,
                None => {
                    let mut g = f;
                    let fx = g(x);
                    fd_jacobian(&mut g, x, &fx)
                }
            };
            let out = newton_solve(f, jac, &x0, &opts)?;
            polish(f, jac, out, 1e-3 * abs_tol)
        };
        let g = stage_gradient(self.sys, self.scheme, zn, &z_next)?;
        let (v, _) = stage_vectors(d, self.tau, zn, &z_next, &g);
        let c = self.sys.coefficients(t_n + 0.5 * self.tau, &((zn + &z_next) * 0.5));
        let y_mid = c.b.transpose() * v / self.tau;
        Ok(StepOutcome { z_next, y_mid, iterations, residual_norm })
    }
}

/// Extra Newton steps after the stopping rule is met, kept while the residual
/// at least halves and stays above `floor`.
///
/// The relative part of the stopping rule scales with the first residual,
/// which for stiff rows can leave an error in `⟨v, F⟩` far above the
/// energy-certificate tolerance; near the round-off floor the loop stops by
/// itself.
fn polish<F, Jf>(f: F, jac: Jf, out: NewtonOutcome, floor: f64) -> (Vector, usize, f64)
where
    F: Fn(&Vector) -> Vector,
    Jf: Fn(&Vector) -> Matrix,
{
    let NewtonOutcome { mut x, mut iterations, residual_norm: mut norm } = out;
    for _ in 0..3 {
        if norm <= floor {
            break;
        }
        let r = f(&x);
        let Ok(dx) = solve_dense(jac(&x), &r) else { break };
        let trial = &x - dx;
        let trial_norm = f(&trial).norm();
        if !(trial_norm <= 0.5 * norm) {
            break;
        }
        x = trial;
        norm = trial_norm;
        iterations += 1;
    }
    (x, iterations, norm)
}

/// One step of the given scheme starting at `t_n`.
pub fn step<S: EnergyBasedSystem + ?Sized>(
    sys: &S,
    scheme: Scheme,
    t_n: f64,
    z_n: &StatePartition,
    u_mid: &Vector,
    tau: f64,
    opts: &SolverOptions,
) -> Result<(StatePartition, Vector)> {
    let out = Stepper::new(sys, scheme, tau, *opts)?.step(t_n, z_n.as_vector(), u_mid, None)?;
    Ok((StatePartition::new(sys.dims(), out.z_next)?, out.y_mid))
}

/// Implicit midpoint step.
pub fn step_midpoint<S: EnergyBasedSystem + ?Sized>(
    sys: &S,
    z_n: &StatePartition,
    u_mid: &Vector,
    tau: f64,
    opts: &SolverOptions,
) -> Result<(StatePartition, Vector)> {
    step(sys, Scheme::Midpoint, 0.0, z_n, u_mid, tau, opts)
}

/// Discrete-gradient step.
pub fn step_discrete_gradient<S: EnergyBasedSystem + ?Sized>(
    sys: &S,
    z_n: &StatePartition,
    u_mid: &Vector,
    tau: f64,
    kind: DiscreteGradientKind,
    opts: &SolverOptions,
) -> Result<(StatePartition, Vector)> {
    step(sys, Scheme::DiscreteGradient(kind), 0.0, z_n, u_mid, tau, opts)
}
