use super::Energy;
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{max_abs, sym_defect, symmetrize, Matrix, Vector};

/// `H = ½⟨z1, M1 z1⟩ + ½⟨z2, M2 z2⟩ + ⟨z1, M12 z2⟩`.
///
/// The coupling block `M12` is zero for the block-diagonal form used by
/// structure-preserving projection; it is needed for energies such as the
/// singularly perturbed index-2 model where `H` mixes `z1` and `z2`.
/// Definiteness is not required.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticEnergy {
    m1: Matrix,
    m2: Matrix,
    m12: Option<Matrix>,
}

fn checked_symmetric(name: &str, m: Matrix) -> Result<Matrix> {
    if m.nrows() != m.ncols() {
        return Err(dim_mismatch(name, "square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    let tol = 1e-12 * (1.0 + max_abs(&m));
    let defect = sym_defect(&m);
    if defect > tol {
        return Err(Error::StructureViolation(format!(
            "{name} is not symmetric (defect {defect:.3e})"
        )));
    }
    Ok(symmetrize(&m))
}

impl QuadraticEnergy {
    pub fn new(m1: Matrix, m2: Matrix) -> Result<Self> {
        Ok(Self {
            m1: checked_symmetric("M1", m1)?,
            m2: checked_symmetric("M2", m2)?,
            m12: None,
        })
    }

    /// Adds the mixed term `⟨z1, M12 z2⟩`.
    pub fn with_coupling(mut self, m12: Matrix) -> Result<Self> {
        if m12.nrows() != self.m1.nrows() || m12.ncols() != self.m2.nrows() {
            return Err(dim_mismatch(
                "M12",
                format!("{}x{}", self.m1.nrows(), self.m2.nrows()),
                format!("{}x{}", m12.nrows(), m12.ncols()),
            ));
        }
        self.m12 = if m12.iter().all(|v| *v == 0.0) { None } else { Some(m12) };
        Ok(self)
    }

    pub fn m1(&self) -> &Matrix {
        &self.m1
    }

    pub fn m2(&self) -> &Matrix {
        &self.m2
    }

    pub fn coupling(&self) -> Option<&Matrix> {
        self.m12.as_ref()
    }

    pub fn is_block_diagonal(&self) -> bool {
        self.m12.is_none()
    }

    /// Smallest eigenvalue of the full Hessian; negative means indefinite.
    pub fn min_eigenvalue(&self) -> f64 {
        crate::linalg::min_sym_eigenvalue(&self.full_matrix())
    }

    pub fn full_matrix(&self) -> Matrix {
        let (n1, n2) = (self.m1.nrows(), self.m2.nrows());
        let mut h = Matrix::zeros(n1 + n2, n1 + n2);
        h.view_mut((0, 0), (n1, n1)).copy_from(&self.m1);
        h.view_mut((n1, n1), (n2, n2)).copy_from(&self.m2);
        if let Some(c) = &self.m12 {
            h.view_mut((0, n1), (n1, n2)).copy_from(c);
            h.view_mut((n1, 0), (n2, n1)).copy_from(&c.transpose());
        }
        h
    }
}

impl Energy for QuadraticEnergy {
    fn block_sizes(&self) -> (usize, usize) {
        (self.m1.nrows(), self.m2.nrows())
    }

    fn value(&self, x: &Vector) -> f64 {
        let n1 = self.m1.nrows();
        let z1 = x.rows(0, n1);
        let z2 = x.rows(n1, self.m2.nrows());
        let mut h = 0.5 * z1.dot(&(&self.m1 * z1)) + 0.5 * z2.dot(&(&self.m2 * z2));
        if let Some(c) = &self.m12 {
            h += z1.dot(&(c * z2));
        }
        h
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let n1 = self.m1.nrows();
        let n2 = self.m2.nrows();
        let z1 = x.rows(0, n1);
        let z2 = x.rows(n1, n2);
        let mut g = Vector::zeros(n1 + n2);
        let mut g1 = &self.m1 * z1;
        let mut g2 = &self.m2 * z2;
        if let Some(c) = &self.m12 {
            g1 += c * z2;
            g2 += c.transpose() * z1;
        }
        g.rows_mut(0, n1).copy_from(&g1);
        g.rows_mut(n1, n2).copy_from(&g2);
        g
    }

    fn hessian(&self, _x: &Vector) -> Option<Matrix> {
        Some(self.full_matrix())
    }

    fn is_quadratic(&self) -> bool {
        true
    }

    fn secant_defect(&self, _z: &Vector, _zp: &Vector) -> Option<f64> {
        Some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_network_energy_value() {
        // ½LI² + ½C1V1² + ½C2V2² with z2 = (LI, C1V1, C2V2), all parameters one.
        let e = QuadraticEnergy::new(Matrix::zeros(0, 0), Matrix::identity(3, 3)).unwrap();
        let x = Vector::from_vec(vec![1.0, 1.0, 1.0]);
        assert_eq!(e.value(&x), 1.5);
    }

    #[test]
    fn zero_state_zero_energy() {
        let e = QuadraticEnergy::new(Matrix::identity(2, 2), Matrix::identity(1, 1)).unwrap();
        assert_eq!(e.value(&Vector::zeros(3)), 0.0);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(QuadraticEnergy::new(m, Matrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn coupling_enters_gradient() {
        let e = QuadraticEnergy::new(Matrix::identity(1, 1), Matrix::zeros(1, 1))
            .unwrap()
            .with_coupling(Matrix::from_element(1, 1, 2.0))
            .unwrap();
        let g = e.gradient(&Vector::from_vec(vec![1.0, 3.0]));
        assert_eq!(g.as_slice(), &[7.0, 2.0]);
        assert!(!e.is_block_diagonal());
    }
}
