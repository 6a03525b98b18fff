//! Energy functions `H(z1, z2)`, their gradients and discrete gradients.
//!
//! Every model acts on the stacked energy variable `x = [z1; z2]`; the
//! algebraic block `z3` never enters the energy.

mod augmented;
mod composite;
mod double_well;
mod quadratic;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use augmented::AugmentedQuadraticEnergy;
pub use composite::CompositeEnergy;
pub use double_well::{double_well, double_well_derivative, DoubleWellLatticeEnergy};
pub use quadratic::QuadraticEnergy;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{vstack, Matrix, Vector};

/// Behaviour shared by all energy functions.
pub trait Energy: Send + Sync + fmt::Debug {
    /// Sizes `(n1, n2)` of the two energy blocks.
    fn block_sizes(&self) -> (usize, usize);

    fn value(&self, x: &Vector) -> f64;

    fn gradient(&self, x: &Vector) -> Vector;

    /// Analytic Hessian, when available. Integrators fall back to finite
    /// differences otherwise.
    fn hessian(&self, _x: &Vector) -> Option<Matrix> {
        None
    }

    /// True when `H` is a polynomial of degree at most two, so that the
    /// midpoint gradient is an exact secant.
    fn is_quadratic(&self) -> bool {
        false
    }

    /// `H(zp) − H(z) − ⟨∇H((z+zp)/2), zp − z⟩` evaluated without
    /// cancellation, when a closed form exists. `None` selects the direct
    /// difference of energy values.
    fn secant_defect(&self, _z: &Vector, _zp: &Vector) -> Option<f64> {
        None
    }
}

/// Construction used for the two-point gradient `∇̄H(z, z')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DiscreteGradientKind {
    /// Midpoint gradient plus a secant correction along `z' − z`.
    #[default]
    #[serde(rename = "gonzalez")]
    GonzalezMidpoint,
    /// `∇H((z + z')/2)`, exact for quadratic energies only.
    AnalyticQuadratic,
}

impl fmt::Display for DiscreteGradientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscreteGradientKind::GonzalezMidpoint => f.write_str("gonzalez"),
            DiscreteGradientKind::AnalyticQuadratic => f.write_str("analytic-quadratic"),
        }
    }
}

/// The energy attached to a structured system.
#[derive(Debug, Clone)]
pub enum EnergyModel {
    Quadratic(QuadraticEnergy),
    DoubleWellLattice(DoubleWellLatticeEnergy),
    AugmentedQuadratic(AugmentedQuadraticEnergy),
    Composite(CompositeEnergy),
    Custom(Arc<dyn Energy>),
}

impl EnergyModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            EnergyModel::Quadratic(_) => "quadratic",
            EnergyModel::DoubleWellLattice(_) => "double_well",
            EnergyModel::AugmentedQuadratic(_) => "augmented_quadratic",
            EnergyModel::Composite(_) => "composite",
            EnergyModel::Custom(_) => "custom",
        }
    }

    fn inner(&self) -> &dyn Energy {
        match self {
            EnergyModel::Quadratic(e) => e,
            EnergyModel::DoubleWellLattice(e) => e,
            EnergyModel::AugmentedQuadratic(e) => e,
            EnergyModel::Composite(e) => e,
            EnergyModel::Custom(e) => e.as_ref(),
        }
    }

    pub fn dim(&self) -> usize {
        let (a, b) = self.block_sizes();
        a + b
    }

    fn stack(&self, z1: &Vector, z2: &Vector) -> Result<Vector> {
        let (n1, n2) = self.block_sizes();
        if z1.len() != n1 {
            return Err(dim_mismatch("energy z1", n1, z1.len()));
        }
        if z2.len() != n2 {
            return Err(dim_mismatch("energy z2", n2, z2.len()));
        }
        Ok(vstack(&[z1, z2]))
    }

    /// `H(z1, z2)`.
    pub fn energy(&self, z1: &Vector, z2: &Vector) -> Result<f64> {
        let x = self.stack(z1, z2)?;
        Ok(self.value(&x))
    }

    /// `(∂z1 H, ∂z2 H)`.
    pub fn gradient_blocks(&self, z1: &Vector, z2: &Vector) -> Result<(Vector, Vector)> {
        let x = self.stack(z1, z2)?;
        let g = self.gradient(&x);
        let n1 = z1.len();
        Ok((g.rows(0, n1).into_owned(), g.rows(n1, z2.len()).into_owned()))
    }

    /// Two-point discrete gradient `∇̄H(z, zp)` on the stacked energy variable.
    ///
    /// Satisfies `⟨∇̄H(z, zp), zp − z⟩ = H(zp) − H(z)` and `∇̄H(z, z) = ∇H(z)`.
    pub fn discrete_gradient(
        &self,
        z: &Vector,
        zp: &Vector,
        kind: DiscreteGradientKind,
    ) -> Result<Vector> {
        let n = self.dim();
        if z.len() != n {
            return Err(dim_mismatch("discrete gradient z", n, z.len()));
        }
        if zp.len() != n {
            return Err(dim_mismatch("discrete gradient zp", n, zp.len()));
        }
        match kind {
            DiscreteGradientKind::AnalyticQuadratic => {
                if !self.is_quadratic() {
                    return Err(Error::IllegalKind {
                        kind: kind.to_string(),
                        energy: self.kind_name().to_string(),
                    });
                }
                Ok(self.gradient(&((z + zp) * 0.5)))
            }
            DiscreteGradientKind::GonzalezMidpoint => Ok(gonzalez(self, z, zp)),
        }
    }
}

fn gonzalez(energy: &dyn Energy, z: &Vector, zp: &Vector) -> Vector {
    let mid = (z + zp) * 0.5;
    let grad_mid = energy.gradient(&mid);
    let step = zp - z;
    let guard = 1e-14 * (1.0 + z.norm() + zp.norm());
    if step.norm() < guard {
        return grad_mid;
    }
    let defect = energy
        .secant_defect(z, zp)
        .unwrap_or_else(|| energy.value(zp) - energy.value(z) - grad_mid.dot(&step));
    grad_mid + step.clone() * (defect / step.norm_squared())
}

impl Energy for EnergyModel {
    fn block_sizes(&self) -> (usize, usize) {
        self.inner().block_sizes()
    }

    fn value(&self, x: &Vector) -> f64 {
        self.inner().value(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.inner().gradient(x)
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        self.inner().hessian(x)
    }

    fn is_quadratic(&self) -> bool {
        self.inner().is_quadratic()
    }

    fn secant_defect(&self, z: &Vector, zp: &Vector) -> Option<f64> {
        self.inner().secant_defect(z, zp)
    }
}

impl From<QuadraticEnergy> for EnergyModel {
    fn from(e: QuadraticEnergy) -> Self {
        EnergyModel::Quadratic(e)
    }
}

impl From<DoubleWellLatticeEnergy> for EnergyModel {
    fn from(e: DoubleWellLatticeEnergy) -> Self {
        EnergyModel::DoubleWellLattice(e)
    }
}

impl From<AugmentedQuadraticEnergy> for EnergyModel {
    fn from(e: AugmentedQuadraticEnergy) -> Self {
        EnergyModel::AugmentedQuadratic(e)
    }
}

impl From<CompositeEnergy> for EnergyModel {
    fn from(e: CompositeEnergy) -> Self {
        EnergyModel::Composite(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn scalar_double_well() -> EnergyModel {
        DoubleWellLatticeEnergy::new(Matrix::zeros(1, 1), 1.0, Vector::from_element(1, 1.0), (1, 0))
            .unwrap()
            .into()
    }

    #[test]
    fn consistency_at_coincident_points() {
        let e = scalar_double_well();
        let z = Vector::from_element(1, 0.3);
        let dg = e.discrete_gradient(&z, &z, DiscreteGradientKind::GonzalezMidpoint).unwrap();
        assert_eq!(dg, e.gradient(&z));
    }

    #[test]
    fn double_well_secant_example() {
        let e = scalar_double_well();
        let r = e
            .discrete_gradient(
                &Vector::from_element(1, 0.0),
                &Vector::from_element(1, 2.0),
                DiscreteGradientKind::GonzalezMidpoint,
            )
            .unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_gonzalez_is_midpoint_gradient() {
        let m1 = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let m2 = Matrix::from_row_slice(1, 1, &[3.0]);
        let e: EnergyModel = QuadraticEnergy::new(m1, m2).unwrap().into();
        let z = Vector::from_vec(vec![0.1, -0.4, 0.9]);
        let zp = Vector::from_vec(vec![1.1, 0.4, -0.2]);
        let a = e.discrete_gradient(&z, &zp, DiscreteGradientKind::GonzalezMidpoint).unwrap();
        let b = e.discrete_gradient(&z, &zp, DiscreteGradientKind::AnalyticQuadratic).unwrap();
        assert!((a - b).amax() < 1e-13);
    }

    #[test]
    fn analytic_kind_rejected_for_double_well() {
        let e = scalar_double_well();
        let z = Vector::from_element(1, 0.0);
        let err = e.discrete_gradient(&z, &z, DiscreteGradientKind::AnalyticQuadratic);
        assert!(matches!(err, Err(Error::IllegalKind { .. })));
    }

    #[test]
    fn dimension_checks() {
        let e = scalar_double_well();
        let bad = Vector::zeros(2);
        assert!(matches!(
            e.discrete_gradient(&bad, &bad, DiscreteGradientKind::GonzalezMidpoint),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(e.energy(&bad, &Vector::zeros(0)).is_err());
    }
}
