use super::Energy;
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{max_abs, min_sym_eigenvalue, sym_defect, symmetrize, Matrix, Vector};

/// `W(s) = ¼ (s² − 1)²`.
pub fn double_well(s: f64) -> f64 {
    let a = s * s - 1.0;
    0.25 * a * a
}

/// `W'(s) = s (s² − 1)`.
pub fn double_well_derivative(s: f64) -> f64 {
    s * (s * s - 1.0)
}

fn double_well_second(s: f64) -> f64 {
    3.0 * s * s - 1.0
}

/// Lattice energy `H(x) = ½⟨x, K x⟩ + (1/ε) Σᵢ hᵢ W(xᵢ)`.
///
/// `K` already carries the interface scaling (it is the discretized `ε𝒦`),
/// `well_weight` is `1/ε` and `weights` are nodal quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleWellLatticeEnergy {
    stiffness: Matrix,
    well_weight: f64,
    weights: Vector,
    split: (usize, usize),
}

impl DoubleWellLatticeEnergy {
    pub fn new(stiffness: Matrix, well_weight: f64, weights: Vector, split: (usize, usize)) -> Result<Self> {
        let n = weights.len();
        if stiffness.nrows() != n || stiffness.ncols() != n {
            return Err(dim_mismatch(
                "double-well stiffness",
                format!("{n}x{n}"),
                format!("{}x{}", stiffness.nrows(), stiffness.ncols()),
            ));
        }
        if split.0 + split.1 != n {
            return Err(dim_mismatch("double-well split", n, split.0 + split.1));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParams("quadrature weights must be positive".into()));
        }
        if !(well_weight > 0.0) {
            return Err(Error::InvalidParams("well weight must be positive".into()));
        }
        let scale = 1.0 + max_abs(&stiffness);
        if sym_defect(&stiffness) > 1e-12 * scale {
            return Err(Error::StructureViolation("double-well stiffness is not symmetric".into()));
        }
        let stiffness = symmetrize(&stiffness);
        if min_sym_eigenvalue(&stiffness) < -1e-10 * scale {
            return Err(Error::StructureViolation(
                "double-well stiffness is not positive semi-definite".into(),
            ));
        }
        Ok(Self { stiffness, well_weight, weights, split })
    }

    pub fn stiffness(&self) -> &Matrix {
        &self.stiffness
    }

    pub fn well_weight(&self) -> f64 {
        self.well_weight
    }

    pub fn weights(&self) -> &Vector {
        &self.weights
    }

    pub fn split(&self) -> (usize, usize) {
        self.split
    }
}

impl Energy for DoubleWellLatticeEnergy {
    fn block_sizes(&self) -> (usize, usize) {
        self.split
    }

    fn value(&self, x: &Vector) -> f64 {
        let wells: f64 = x.iter().zip(self.weights.iter()).map(|(s, h)| h * double_well(*s)).sum();
        0.5 * x.dot(&(&self.stiffness * x)) + self.well_weight * wells
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let mut g = &self.stiffness * x;
        for i in 0..x.len() {
            g[i] += self.well_weight * self.weights[i] * double_well_derivative(x[i]);
        }
        g
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        let mut h = self.stiffness.clone();
        for i in 0..x.len() {
            h[(i, i)] += self.well_weight * self.weights[i] * double_well_second(x[i]);
        }
        Some(h)
    }

    // The quadratic part has zero defect. For the quartic W,
    // W(b) − W(a) − W'(m)(b − a) = W'''(m)(b − a)³/24 = m (b − a)³/4.
    fn secant_defect(&self, z: &Vector, zp: &Vector) -> Option<f64> {
        let s: f64 = (0..z.len())
            .map(|i| {
                let d = zp[i] - z[i];
                let m = 0.5 * (zp[i] + z[i]);
                self.weights[i] * 0.25 * m * d * d * d
            })
            .sum();
        Some(self.well_weight * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar() -> DoubleWellLatticeEnergy {
        DoubleWellLatticeEnergy::new(Matrix::zeros(1, 1), 1.0, Vector::from_element(1, 1.0), (1, 0)).unwrap()
    }

    #[test]
    fn well_minimum() {
        assert_eq!(scalar().value(&Vector::from_element(1, 1.0)), 0.0);
    }

    #[test]
    fn polynomial_derivative() {
        assert_eq!(scalar().gradient(&Vector::from_element(1, 2.0))[0], 6.0);
    }

    #[test]
    fn closed_form_defect_matches_direct_difference() {
        let k = Matrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let e = DoubleWellLatticeEnergy::new(k, 3.0, Vector::from_vec(vec![0.5, 0.25]), (2, 0)).unwrap();
        let z = Vector::from_vec(vec![0.3, -1.2]);
        let zp = Vector::from_vec(vec![1.1, 0.4]);
        let mid = (&z + &zp) * 0.5;
        let direct = e.value(&zp) - e.value(&z) - e.gradient(&mid).dot(&(&zp - &z));
        assert!((e.secant_defect(&z, &zp).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_weights() {
        let r = DoubleWellLatticeEnergy::new(Matrix::zeros(1, 1), 1.0, Vector::from_element(1, 0.0), (1, 0));
        assert!(r.is_err());
    }
}
