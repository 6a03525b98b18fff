use super::newton::fd_jacobian;
use super::SolverOptions;
use crate::energy::Energy;
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{left_null_space, lstsq_min_norm, numerical_rank, Matrix, Vector};
use crate::system::{continuous_residual, EnergyBasedSystem, StatePartition};

/// The purely algebraic rows of the continuous model at a given instant.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicRows {
    /// Orthonormal basis `W` of the left null space of `∂F/∂ż`; the algebraic
    /// rows are `Wᵀ F`, which do not depend on `ż`.
    pub w: Matrix,
    /// `Wᵀ F(z, 0, u)`.
    pub residual: Vector,
}

/// `∂F/∂ż = [−(J−R)[:, z1] | [0; I; 0] | 0]`.
fn derivative_coefficient<S: EnergyBasedSystem + ?Sized>(sys: &S, t: f64, z: &Vector) -> Matrix {
    let d = sys.dims();
    let c = sys.coefficients(t, z);
    let jr = c.j_minus_r();
    let mut e = Matrix::zeros(d.n(), d.n());
    e.view_mut((0, 0), (d.n(), d.n1)).copy_from(&(-jr.columns(0, d.n1)));
    e.view_mut((d.n1, d.n1), (d.n2, d.n2)).fill_with_identity();
    e
}

/// Algebraic rows and their residual at `(t, z, u)`.
pub fn algebraic_rows<S: EnergyBasedSystem + ?Sized>(sys: &S, t: f64, z: &Vector, u: &Vector) -> Result<AlgebraicRows> {
    let w = left_null_space(&derivative_coefficient(sys, t, z));
    let f = continuous_residual(sys, t, z, &Vector::zeros(z.len()), u)?;
    Ok(AlgebraicRows { residual: w.transpose() * f, w })
}

/// `∂F(z, 0, u)/∂z` for constant coefficients and an energy with a Hessian.
fn analytic_state_jacobian<S: EnergyBasedSystem + ?Sized>(sys: &S, z: &Vector) -> Option<Matrix> {
    let c = sys.constant_coefficients()?;
    let d = sys.dims();
    let (n, n1, n2, ne) = (d.n(), d.n1, d.n2, d.n_energy());
    let h = sys.energy().hessian(&z.rows(0, ne).into_owned())?;
    let mut dlhs = Matrix::zeros(n, n);
    dlhs.view_mut((0, 0), (n1, ne)).copy_from(&h.rows(0, n1));
    let mut dv = Matrix::zeros(n, n);
    dv.view_mut((n1, 0), (n2, ne)).copy_from(&h.rows(n1, n2));
    dv.view_mut((ne, ne), (d.n3, d.n3)).fill_with_identity();
    Some(dlhs - c.j_minus_r() * dv)
}

/// Adjusts `z_guess` so the algebraic rows hold at `t = 0`.
///
/// Gauss–Newton with minimum-norm updates on the smallest column set that
/// attains the full rank: `z3` first, then `z3 ∪ z1`, then the whole state.
/// Data that is already consistent to `rel_tol·(1 + ‖z‖)` is returned as is.
pub fn consistent_initialization<S: EnergyBasedSystem + ?Sized>(
    sys: &S,
    z_guess: &StatePartition,
    u0: &Vector,
    opts: &SolverOptions,
) -> Result<StatePartition> {
    consistent_initialization_at(sys, 0.0, z_guess, u0, opts)
}

pub(crate) fn consistent_initialization_at<S: EnergyBasedSystem + ?Sized>(
    sys: &S,
    t0: f64,
    z_guess: &StatePartition,
    u0: &Vector,
    opts: &SolverOptions,
) -> Result<StatePartition> {
    let d = sys.dims();
    if z_guess.dims() != d {
        return Err(dim_mismatch("initial guess", d.to_string(), z_guess.dims().to_string()));
    }
    if u0.len() != d.m {
        return Err(dim_mismatch("input", d.m, u0.len()));
    }
    let mut z = z_guess.as_vector().clone();
    let rows = algebraic_rows(sys, t0, &z, u0)?;
    let w = rows.w;
    if w.ncols() == 0 {
        return Ok(z_guess.clone());
    }
    let accept = |z: &Vector| opts.rel_tol * (1.0 + z.norm());
    let mut c = rows.residual;
    if c.norm() <= accept(&z) {
        return Ok(z_guess.clone());
    }
    let constraint = |z: &Vector| -> Vector {
        let f = continuous_residual(sys, t0, z, &Vector::zeros(z.len()), u0).expect("dimensions checked");
        w.transpose() * f
    };
    let jacobian = |z: &Vector, c: &Vector| -> Matrix {
        match analytic_state_jacobian(sys, z) {
            Some(j) => w.transpose() * j,
            None => {
                let mut f = |y: &Vector| constraint(y);
                fd_jacobian(&mut f, z, c)
            }
        }
    };
    let ne = d.n_energy();
    let subsets: [Vec<usize>; 3] = [
        (ne..d.n()).collect(),
        (0..d.n1).chain(ne..d.n()).collect(),
        (0..d.n()).collect(),
    ];
    let jc = jacobian(&z, &c);
    let full_rank = numerical_rank(&jc);
    let cols = subsets
        .iter()
        .find(|s| !s.is_empty() && numerical_rank(&jc.select_columns(s.iter())) == full_rank)
        .cloned()
        .unwrap_or_else(|| subsets[2].clone());
    let mut iterations = 0;
    let mut jc = jc;
    while iterations < opts.max_iters {
        let dz = lstsq_min_norm(&jc.select_columns(cols.iter()), &(-&c));
        let mut trial = z.clone();
        for (k, &i) in cols.iter().enumerate() {
            trial[i] += dz[k];
        }
        let trial_c = constraint(&trial);
        iterations += 1;
        if !(trial_c.norm() < c.norm()) {
            break;
        }
        z = trial;
        c = trial_c;
        if c.norm() <= opts.abs_tol * (1.0 + z.norm()) {
            break;
        }
        jc = jacobian(&z, &c);
    }
    if c.norm() > accept(&z) {
        return Err(Error::InconsistentInitialData { residual: c.norm(), iterations });
    }
    StatePartition::new(d, z)
}
