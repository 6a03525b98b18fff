use super::{Damping, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vector,
    pub iterations: usize,
    pub residual_norm: f64,
}

/// Solves `F(x) = 0` until `‖F(x)‖ ≤ abs_tol + rel_tol·‖F(x0)‖`.
///
/// `abs_tol` is used as given here; callers that want a state-relative
/// tolerance scale it beforehand.
pub fn newton_solve<F, Jf>(mut residual: F, mut jacobian: Jf, x0: &Vector, opts: &SolverOptions) -> Result<NewtonOutcome>
where
    F: FnMut(&Vector) -> Vector,
    Jf: FnMut(&Vector) -> Matrix,
{
    let mut x = x0.clone();
    let mut r = residual(&x);
    let mut norm = r.norm();
    let tol = opts.abs_tol + opts.rel_tol * norm;
    if norm <= tol {
        return Ok(NewtonOutcome { x, iterations: 0, residual_norm: norm });
    }
    for it in 1..=opts.max_iters {
        let jac = jacobian(&x);
        let dx = solve_dense(jac, &r)?;
        let mut alpha = 1.0;
        let mut trial = &x - &dx;
        let mut trial_r = residual(&trial);
        let mut trial_norm = trial_r.norm();
        if opts.damping == Damping::Backtracking {
            let mut halvings = 0;
            while !(trial_norm < norm) && halvings < 20 {
                alpha *= 0.5;
                trial = &x - &dx * alpha;
                trial_r = residual(&trial);
                trial_norm = trial_r.norm();
                halvings += 1;
            }
        }
        if !trial_norm.is_finite() {
            return Err(Error::NewtonDivergence { iterations: it, residual: trial_norm, tolerance: tol });
        }
        x = trial;
        r = trial_r;
        norm = trial_norm;
        if norm <= tol {
            return Ok(NewtonOutcome { x, iterations: it, residual_norm: norm });
        }
    }
    Err(Error::NewtonDivergence { iterations: opts.max_iters, residual: norm, tolerance: tol })
}

/// Dense LU solve of `A x = b`.
pub(crate) fn solve_dense(a: Matrix, b: &Vector) -> Result<Vector> {
    if a.nrows() == 0 {
        return Ok(Vector::zeros(0));
    }
    let x = a.lu().solve(b).ok_or(Error::SingularJacobian)?;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularJacobian)
    }
}

/// Forward-difference Jacobian with step `1e−7·(1 + |xⱼ|)`.
pub(crate) fn fd_jacobian<F: FnMut(&Vector) -> Vector>(f: &mut F, x: &Vector, fx: &Vector) -> Matrix {
    let n = x.len();
    let mut jac = Matrix::zeros(fx.len(), n);
    let mut xp = x.clone();
    for j in 0..n {
        let h = 1e-7 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let col = (f(&xp) - fx) / h;
        jac.set_column(j, &col);
        xp[j] = x[j];
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_map_in_one_iteration() {
        let a = Matrix::from_row_slice(2, 2, &[3.0, 1.0, -1.0, 2.0]);
        let b = Vector::from_vec(vec![1.0, 4.0]);
        let out = newton_solve(|x| &a * x - &b, |_| a.clone(), &Vector::from_vec(vec![10.0, -3.0]), &SolverOptions::default()).unwrap();
        assert_eq!(out.iterations, 1);
        assert!((&a * &out.x - &b).amax() < 1e-14);
    }

    #[test]
    fn textbook_square_root() {
        // The relative part of the stopping rule would end at |x − 2| ≈ 3e−11.
        let opts = SolverOptions { rel_tol: 1e-15, ..Default::default() };
        let out = newton_solve(
            |x| Vector::from_element(1, x[0] * x[0] - 4.0),
            |x| Matrix::from_element(1, 1, 2.0 * x[0]),
            &Vector::from_element(1, 3.0),
            &opts,
        )
        .unwrap();
        assert!((out.x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_jacobian_reported() {
        let r = newton_solve(
            |x| Vector::from_element(1, x[0] + 1.0),
            |_| Matrix::zeros(1, 1),
            &Vector::from_element(1, 0.0),
            &SolverOptions::default(),
        );
        assert_eq!(r.unwrap_err(), Error::SingularJacobian);
    }

    #[test]
    fn divergence_reported() {
        // atan has no damping-free convergence from far away, and with a
        // single iteration allowed the tolerance cannot be met.
        let opts = SolverOptions { max_iters: 1, damping: Damping::None, ..Default::default() };
        let r = newton_solve(
            |x| Vector::from_element(1, x[0].atan()),
            |x| Matrix::from_element(1, 1, 1.0 / (1.0 + x[0] * x[0])),
            &Vector::from_element(1, 3.0),
            &opts,
        );
        assert!(matches!(r, Err(Error::NewtonDivergence { .. })));
    }

    #[test]
    fn backtracking_rescues_atan() {
        let out = newton_solve(
            |x| Vector::from_element(1, x[0].atan()),
            |x| Matrix::from_element(1, 1, 1.0 / (1.0 + x[0] * x[0])),
            &Vector::from_element(1, 3.0),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(out.x[0].abs() < 1e-10);
    }

    #[test]
    fn fd_jacobian_of_quadratic() {
        let mut f = |x: &Vector| Vector::from_vec(vec![x[0] * x[1], x[0] * x[0]]);
        let x = Vector::from_vec(vec![1.5, -2.0]);
        let fx = f(&x);
        let j = fd_jacobian(&mut f, &x, &fx);
        let exact = Matrix::from_row_slice(2, 2, &[-2.0, 1.5, 3.0, 0.0]);
        assert!((j - exact).amax() < 1e-6);
    }
}
