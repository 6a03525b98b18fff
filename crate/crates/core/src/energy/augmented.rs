use super::Energy;
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{max_abs, sym_defect, symmetrize, Matrix, Vector};

/// Mechanical energy with a vanishing constraint term,
/// `H = ½⟨y, M y⟩ + ½⟨x, K x⟩ + ⟨λ, Bc x − g⟩`, on `z1 = [x; y; λ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedQuadraticEnergy {
    stiffness: Matrix,
    mass: Matrix,
    constraint: Matrix,
    offset: Vector,
}

impl AugmentedQuadraticEnergy {
    pub fn new(stiffness: Matrix, mass: Matrix, constraint: Matrix, offset: Vector) -> Result<Self> {
        let nx = stiffness.nrows();
        if stiffness.ncols() != nx || mass.nrows() != nx || mass.ncols() != nx {
            return Err(dim_mismatch("augmented K/M", format!("{nx}x{nx}"), format!("{}x{}", mass.nrows(), mass.ncols())));
        }
        if constraint.ncols() != nx || constraint.nrows() != offset.len() {
            return Err(dim_mismatch(
                "augmented constraint",
                format!("{}x{nx}", offset.len()),
                format!("{}x{}", constraint.nrows(), constraint.ncols()),
            ));
        }
        for (name, m) in [("K", &stiffness), ("M", &mass)] {
            if sym_defect(m) > 1e-12 * (1.0 + max_abs(m)) {
                return Err(Error::StructureViolation(format!("augmented {name} is not symmetric")));
            }
        }
        Ok(Self {
            stiffness: symmetrize(&stiffness),
            mass: symmetrize(&mass),
            constraint,
            offset,
        })
    }

    pub fn stiffness(&self) -> &Matrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &Matrix {
        &self.mass
    }

    pub fn constraint(&self) -> &Matrix {
        &self.constraint
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    fn sizes(&self) -> (usize, usize) {
        (self.stiffness.nrows(), self.constraint.nrows())
    }
}

impl Energy for AugmentedQuadraticEnergy {
    fn block_sizes(&self) -> (usize, usize) {
        let (nx, nl) = self.sizes();
        (2 * nx + nl, 0)
    }

    fn value(&self, z: &Vector) -> f64 {
        let (nx, nl) = self.sizes();
        let x = z.rows(0, nx);
        let y = z.rows(nx, nx);
        let lam = z.rows(2 * nx, nl);
        0.5 * y.dot(&(&self.mass * y)) + 0.5 * x.dot(&(&self.stiffness * x))
            + lam.dot(&(&self.constraint * x - &self.offset))
    }

    fn gradient(&self, z: &Vector) -> Vector {
        let (nx, nl) = self.sizes();
        let x = z.rows(0, nx);
        let y = z.rows(nx, nx);
        let lam = z.rows(2 * nx, nl);
        let mut g = Vector::zeros(2 * nx + nl);
        g.rows_mut(0, nx).copy_from(&(&self.stiffness * x + self.constraint.transpose() * lam));
        g.rows_mut(nx, nx).copy_from(&(&self.mass * y));
        g.rows_mut(2 * nx, nl).copy_from(&(&self.constraint * x - &self.offset));
        g
    }

    fn hessian(&self, _z: &Vector) -> Option<Matrix> {
        let (nx, nl) = self.sizes();
        let mut h = Matrix::zeros(2 * nx + nl, 2 * nx + nl);
        h.view_mut((0, 0), (nx, nx)).copy_from(&self.stiffness);
        h.view_mut((nx, nx), (nx, nx)).copy_from(&self.mass);
        h.view_mut((0, 2 * nx), (nx, nl)).copy_from(&self.constraint.transpose());
        h.view_mut((2 * nx, 0), (nl, nx)).copy_from(&self.constraint);
        Some(h)
    }

    fn is_quadratic(&self) -> bool {
        true
    }

    fn secant_defect(&self, _z: &Vector, _zp: &Vector) -> Option<f64> {
        Some(0.0)
    }
}
