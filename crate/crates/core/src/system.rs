//! Structured energy-based systems
//! `[∂z1 H; ż2; 0] = (J − R)[ż1; ∂z2 H; z3] + B u`, `y = Bᵀ[ż1; ∂z2 H; z3]`.

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use nalgebra::DVectorView;
use serde::{Deserialize, Serialize};

use crate::energy::{Energy, EnergyModel};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{
    antisymmetrize, max_abs, min_sym_eigenvalue, skew_defect, sym_defect, symmetrize, vstack, Matrix, Vector,
};

/// Block sizes of the state `z = [z1; z2; z3]` and the port dimension `m`.
///
/// A zero-sized block plays the role of the empty vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemDims {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub m: usize,
}

impl SystemDims {
    pub fn new(n1: usize, n2: usize, n3: usize, m: usize) -> Result<Self> {
        if n1 + n2 + n3 == 0 {
            return Err(Error::InvalidParams("state dimension n1+n2+n3 must be at least 1".into()));
        }
        Ok(Self { n1, n2, n3, m })
    }

    /// Total state dimension.
    pub fn n(&self) -> usize {
        self.n1 + self.n2 + self.n3
    }

    /// Dimension of the energy variable `[z1; z2]`.
    pub fn n_energy(&self) -> usize {
        self.n1 + self.n2
    }
}

impl fmt::Display for SystemDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n1={}, n2={}, n3={}, m={})", self.n1, self.n2, self.n3, self.m)
    }
}

/// A state vector together with its block partition.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePartition {
    z: Vector,
    dims: SystemDims,
}

impl StatePartition {
    pub fn new(dims: SystemDims, z: Vector) -> Result<Self> {
        if z.len() != dims.n() {
            return Err(dim_mismatch("state", dims.n(), z.len()));
        }
        Ok(Self { z, dims })
    }

    pub fn zeros(dims: SystemDims) -> Self {
        Self { z: Vector::zeros(dims.n()), dims }
    }

    pub fn from_blocks(dims: SystemDims, z1: &Vector, z2: &Vector, z3: &Vector) -> Result<Self> {
        if z1.len() != dims.n1 {
            return Err(dim_mismatch("z1", dims.n1, z1.len()));
        }
        if z2.len() != dims.n2 {
            return Err(dim_mismatch("z2", dims.n2, z2.len()));
        }
        if z3.len() != dims.n3 {
            return Err(dim_mismatch("z3", dims.n3, z3.len()));
        }
        Ok(Self { z: vstack(&[z1, z2, z3]), dims })
    }

    pub fn dims(&self) -> SystemDims {
        self.dims
    }

    pub fn as_vector(&self) -> &Vector {
        &self.z
    }

    pub fn into_vector(self) -> Vector {
        self.z
    }

    pub fn z1(&self) -> DVectorView<'_, f64> {
        self.z.rows(0, self.dims.n1)
    }

    pub fn z2(&self) -> DVectorView<'_, f64> {
        self.z.rows(self.dims.n1, self.dims.n2)
    }

    pub fn z3(&self) -> DVectorView<'_, f64> {
        self.z.rows(self.dims.n1 + self.dims.n2, self.dims.n3)
    }

    /// The energy variable `[z1; z2]`.
    pub fn energy_part(&self) -> DVectorView<'_, f64> {
        self.z.rows(0, self.dims.n_energy())
    }
}

/// The constant coefficient matrices `J`, `R`, `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub j: Matrix,
    pub r: Matrix,
    pub b: Matrix,
}

impl Coefficients {
    pub fn j_minus_r(&self) -> Matrix {
        &self.j - &self.r
    }
}

/// Anything the time integrators can step: dimensions, an energy and
/// (possibly time- or state-dependent) coefficients.
pub trait EnergyBasedSystem: Send + Sync {
    fn dims(&self) -> SystemDims;

    fn energy(&self) -> &EnergyModel;

    /// Coefficients evaluated at time `t` and state `z`.
    fn coefficients(&self, t: f64, z: &Vector) -> Cow<'_, Coefficients>;

    /// `Some` when the coefficients do not depend on `(t, z)`.
    fn constant_coefficients(&self) -> Option<&Coefficients> {
        None
    }
}

/// Outcome of a structural check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub skew_defect: f64,
    pub sym_defect: f64,
    pub min_eig_r: f64,
    pub dim_consistent: bool,
    pub passed: bool,
}

/// A system with constant coefficients.
#[derive(Debug, Clone)]
pub struct StructuredSystem {
    dims: SystemDims,
    coeffs: Coefficients,
    energy: EnergyModel,
}

/// Default positive semi-definiteness tolerance `1e−10·(1 + ‖R‖max)`.
pub fn default_tol_psd(r: &Matrix) -> f64 {
    1e-10 * (1.0 + max_abs(r))
}

fn check_shape(what: &str, m: &Matrix, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(dim_mismatch(what, format!("{rows}x{cols}"), format!("{}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// Builds a validated system. `J` is antisymmetrized and `R` symmetrized when
/// their defects are below `1e−12·(1 + ‖·‖max)`; larger defects and an
/// indefinite `R` raise [`Error::StructureViolation`].
pub fn assemble(dims: SystemDims, j: Matrix, r: Matrix, b: Matrix, energy: EnergyModel) -> Result<StructuredSystem> {
    let n = dims.n();
    check_shape("J", &j, n, n)?;
    check_shape("R", &r, n, n)?;
    check_shape("B", &b, n, dims.m)?;
    let (e1, e2) = energy.block_sizes();
    if (e1, e2) != (dims.n1, dims.n2) {
        return Err(dim_mismatch("energy blocks", format!("({}, {})", dims.n1, dims.n2), format!("({e1}, {e2})")));
    }
    let tol_j = 1e-12 * (1.0 + max_abs(&j));
    let sd = skew_defect(&j);
    if sd > tol_j {
        return Err(Error::StructureViolation(format!("J is not skew-symmetric (defect {sd:.3e})")));
    }
    let tol_r = 1e-12 * (1.0 + max_abs(&r));
    let rd = sym_defect(&r);
    if rd > tol_r {
        return Err(Error::StructureViolation(format!("R is not symmetric (defect {rd:.3e})")));
    }
    let j = antisymmetrize(&j);
    let r = symmetrize(&r);
    let min_eig = min_sym_eigenvalue(&r);
    if min_eig < -default_tol_psd(&r) {
        return Err(Error::StructureViolation(format!(
            "R is not positive semi-definite (min eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(StructuredSystem { dims, coeffs: Coefficients { j, r, b }, energy })
}

impl StructuredSystem {
    /// Stores the matrices as given, without any structural check. Meant for
    /// inspecting user input with [`validate`].
    pub fn from_parts_unchecked(dims: SystemDims, j: Matrix, r: Matrix, b: Matrix, energy: EnergyModel) -> Self {
        Self { dims, coeffs: Coefficients { j, r, b }, energy }
    }

    pub fn j(&self) -> &Matrix {
        &self.coeffs.j
    }

    pub fn r(&self) -> &Matrix {
        &self.coeffs.r
    }

    pub fn b(&self) -> &Matrix {
        &self.coeffs.b
    }

    pub fn coefficients_ref(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn energy_model(&self) -> &EnergyModel {
        &self.energy
    }

    pub fn system_dims(&self) -> SystemDims {
        self.dims
    }

    /// `[B1; B2; B3]` split by rows.
    pub fn b_blocks(&self) -> (Matrix, Matrix, Matrix) {
        let d = self.dims;
        let b = &self.coeffs.b;
        (
            b.rows(0, d.n1).into_owned(),
            b.rows(d.n1, d.n2).into_owned(),
            b.rows(d.n1 + d.n2, d.n3).into_owned(),
        )
    }

    /// Continuous residual `[∂z1H; ż2; 0] − (J−R)[ż1; ∂z2H; z3] − B u`.
    pub fn residual(&self, z: &StatePartition, zdot: &StatePartition, u: &Vector) -> Result<Vector> {
        continuous_residual(self, 0.0, z.as_vector(), zdot.as_vector(), u)
    }

    /// `y = B1ᵀ ż1 + B2ᵀ ∂z2H + B3ᵀ z3`.
    pub fn output(&self, zdot1: &Vector, grad2: &Vector, z3: &Vector) -> Result<Vector> {
        let d = self.dims;
        if zdot1.len() != d.n1 {
            return Err(dim_mismatch("output zdot1", d.n1, zdot1.len()));
        }
        if grad2.len() != d.n2 {
            return Err(dim_mismatch("output grad2", d.n2, grad2.len()));
        }
        if z3.len() != d.n3 {
            return Err(dim_mismatch("output z3", d.n3, z3.len()));
        }
        Ok(self.coeffs.b.transpose() * vstack(&[zdot1, grad2, z3]))
    }
}

impl EnergyBasedSystem for StructuredSystem {
    fn dims(&self) -> SystemDims {
        self.dims
    }

    fn energy(&self) -> &EnergyModel {
        &self.energy
    }

    fn coefficients(&self, _t: f64, _z: &Vector) -> Cow<'_, Coefficients> {
        Cow::Borrowed(&self.coeffs)
    }

    fn constant_coefficients(&self) -> Option<&Coefficients> {
        Some(&self.coeffs)
    }
}

/// Structural report: skew and symmetry defects, smallest eigenvalue of `R`
/// and block consistency. Never fails; an invalid system yields `passed = false`.
pub fn validate(sys: &StructuredSystem, tol_psd: f64) -> ValidationReport {
    validate_coefficients(sys.dims, &sys.coeffs, sys.energy.block_sizes(), tol_psd)
}

fn validate_coefficients(dims: SystemDims, c: &Coefficients, energy_blocks: (usize, usize), tol_psd: f64) -> ValidationReport {
    let n = dims.n();
    let dim_consistent = c.j.shape() == (n, n)
        && c.r.shape() == (n, n)
        && c.b.shape() == (n, dims.m)
        && energy_blocks == (dims.n1, dims.n2);
    let square = |m: &Matrix| m.nrows() == m.ncols();
    let skew = if square(&c.j) { skew_defect(&c.j) } else { f64::INFINITY };
    let sym = if square(&c.r) { sym_defect(&c.r) } else { f64::INFINITY };
    let min_eig = if square(&c.r) { min_sym_eigenvalue(&c.r) } else { f64::NEG_INFINITY };
    ValidationReport {
        skew_defect: skew,
        sym_defect: sym,
        min_eig_r: min_eig,
        dim_consistent,
        passed: skew == 0.0 && sym == 0.0 && min_eig >= -tol_psd && dim_consistent,
    }
}

/// Time- or state-dependent coefficients supplied by a callback.
pub type CoefficientFn = dyn Fn(f64, &Vector) -> Coefficients + Send + Sync;

/// System whose `J`, `R`, `B` depend on `(t, z)`. `J` and `R` are
/// antisymmetrized / symmetrized on every evaluation; positive
/// semi-definiteness of `R` is the caller's responsibility and can be
/// spot-checked with [`VaryingSystem::validate_at`].
#[derive(Clone)]
pub struct VaryingSystem {
    dims: SystemDims,
    energy: EnergyModel,
    coefficients: Arc<CoefficientFn>,
}

impl fmt::Debug for VaryingSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VaryingSystem").field("dims", &self.dims).field("energy", &self.energy).finish()
    }
}

impl VaryingSystem {
    pub fn new(dims: SystemDims, energy: EnergyModel, coefficients: Arc<CoefficientFn>) -> Result<Self> {
        if energy.block_sizes() != (dims.n1, dims.n2) {
            return Err(dim_mismatch("energy blocks", format!("({}, {})", dims.n1, dims.n2), format!("{:?}", energy.block_sizes())));
        }
        Ok(Self { dims, energy, coefficients })
    }

    pub fn validate_at(&self, t: f64, z: &Vector) -> ValidationReport {
        let c = self.coefficients(t, z);
        validate_coefficients(self.dims, &c, self.energy.block_sizes(), default_tol_psd(&c.r))
    }
}

impl EnergyBasedSystem for VaryingSystem {
    fn dims(&self) -> SystemDims {
        self.dims
    }

    fn energy(&self) -> &EnergyModel {
        &self.energy
    }

    fn coefficients(&self, t: f64, z: &Vector) -> Cow<'_, Coefficients> {
        let c = (self.coefficients)(t, z);
        Cow::Owned(Coefficients { j: antisymmetrize(&c.j), r: symmetrize(&c.r), b: c.b })
    }
}

/// Continuous residual for any system at time `t`.
pub fn continuous_residual<S: EnergyBasedSystem + ?Sized>(
    sys: &S,
    t: f64,
    z: &Vector,
    zdot: &Vector,
    u: &Vector,
) -> Result<Vector> {
    let d = sys.dims();
    if z.len() != d.n() {
        return Err(dim_mismatch("residual z", d.n(), z.len()));
    }
    if zdot.len() != d.n() {
        return Err(dim_mismatch("residual zdot", d.n(), zdot.len()));
    }
    if u.len() != d.m {
        return Err(dim_mismatch("residual u", d.m, u.len()));
    }
    let c = sys.coefficients(t, z);
    let g = sys.energy().gradient(&z.rows(0, d.n_energy()).into_owned());
    let mut lhs = Vector::zeros(d.n());
    lhs.rows_mut(0, d.n1).copy_from(&g.rows(0, d.n1));
    lhs.rows_mut(d.n1, d.n2).copy_from(&zdot.rows(d.n1, d.n2));
    let mut v = Vector::zeros(d.n());
    v.rows_mut(0, d.n1).copy_from(&zdot.rows(0, d.n1));
    v.rows_mut(d.n1, d.n2).copy_from(&g.rows(d.n1, d.n2));
    v.rows_mut(d.n_energy(), d.n3).copy_from(&z.rows(d.n_energy(), d.n3));
    Ok(lhs - c.j_minus_r() * v - &c.b * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::QuadraticEnergy;

    fn scalar_system() -> StructuredSystem {
        let dims = SystemDims::new(0, 1, 0, 1).unwrap();
        let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), Matrix::identity(1, 1)).unwrap();
        assemble(
            dims,
            Matrix::zeros(1, 1),
            Matrix::from_element(1, 1, 0.5),
            Matrix::identity(1, 1),
            energy.into(),
        )
        .unwrap()
    }

    fn oscillator() -> StructuredSystem {
        let dims = SystemDims::new(0, 2, 0, 0).unwrap();
        let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), Matrix::identity(2, 2)).unwrap();
        assemble(
            dims,
            Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 0),
            energy.into(),
        )
        .unwrap()
    }

    #[test]
    fn scalar_case_is_valid() {
        let sys = scalar_system();
        assert!(validate(&sys, 1e-10).passed);
    }

    #[test]
    fn symplectic_block_has_no_skew_defect() {
        let r = validate(&oscillator(), 1e-10);
        assert_eq!(r.skew_defect, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn negative_r_fails_validation() {
        let dims = SystemDims::new(0, 1, 0, 0).unwrap();
        let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), Matrix::identity(1, 1)).unwrap();
        let sys = StructuredSystem::from_parts_unchecked(
            dims,
            Matrix::zeros(1, 1),
            Matrix::from_element(1, 1, -1.0),
            Matrix::zeros(1, 0),
            energy.clone().into(),
        );
        let r = validate(&sys, 1e-10);
        assert_eq!(r.min_eig_r, -1.0);
        assert!(!r.passed);
        let err = assemble(dims, Matrix::zeros(1, 1), Matrix::from_element(1, 1, -1.0), Matrix::zeros(1, 0), energy.into());
        assert!(matches!(err, Err(Error::StructureViolation(_))));
    }

    #[test]
    fn small_defects_are_removed() {
        let dims = SystemDims::new(0, 2, 0, 0).unwrap();
        let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), Matrix::identity(2, 2)).unwrap();
        let j = Matrix::from_row_slice(2, 2, &[0.0, 1.0 + 1e-14, -1.0, 0.0]);
        let sys = assemble(dims, j, Matrix::zeros(2, 2), Matrix::zeros(2, 0), energy.clone().into()).unwrap();
        assert_eq!(skew_defect(sys.j()), 0.0);
        let j = Matrix::from_row_slice(2, 2, &[0.0, 1.1, -1.0, 0.0]);
        assert!(assemble(dims, j, Matrix::zeros(2, 2), Matrix::zeros(2, 0), energy.into()).is_err());
    }

    #[test]
    fn shape_errors() {
        let dims = SystemDims::new(0, 2, 0, 0).unwrap();
        let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), Matrix::identity(2, 2)).unwrap();
        let err = assemble(dims, Matrix::zeros(3, 3), Matrix::zeros(2, 2), Matrix::zeros(2, 0), energy.into());
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        assert!(SystemDims::new(0, 0, 0, 1).is_err());
    }

    #[test]
    fn equilibrium_residual_is_zero() {
        let sys = scalar_system();
        let d = sys.system_dims();
        let z = StatePartition::zeros(d);
        let r = sys.residual(&z, &z, &Vector::zeros(1)).unwrap();
        assert_eq!(r.amax(), 0.0);
    }

    #[test]
    fn oscillator_closed_form_satisfies_residual() {
        // ż2 = J z2 with J = [[0,1],[-1,0]]: z2(t) = (cos t, −sin t).
        let sys = oscillator();
        let d = sys.system_dims();
        for k in 0..20 {
            let t = 0.37 * k as f64;
            let z = StatePartition::new(d, Vector::from_vec(vec![t.cos(), -t.sin()])).unwrap();
            let zd = StatePartition::new(d, Vector::from_vec(vec![-t.sin(), -t.cos()])).unwrap();
            let r = sys.residual(&z, &zd, &Vector::zeros(0)).unwrap();
            assert!(r.amax() <= 1e-12);
        }
    }

    #[test]
    fn residual_column_extraction() {
        // Perturbing zdot by e_k changes the residual by the k-th column of ∂F/∂ż.
        let dims = SystemDims::new(1, 1, 1, 1).unwrap();
        let energy = QuadraticEnergy::new(Matrix::identity(1, 1), Matrix::from_element(1, 1, 2.0)).unwrap();
        let j = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, -1.0, 0.0, 0.5, -2.0, -0.5, 0.0]);
        let r = Matrix::from_diagonal(&Vector::from_vec(vec![0.3, 0.1, 0.0]));
        let sys = assemble(dims, j.clone(), r.clone(), Matrix::from_column_slice(3, 1, &[1.0, 0.0, 1.0]), energy.into()).unwrap();
        let z = StatePartition::new(dims, Vector::from_vec(vec![0.2, -0.3, 0.9])).unwrap();
        let zd = StatePartition::new(dims, Vector::from_vec(vec![0.1, 0.4, -0.2])).unwrap();
        let u = Vector::from_element(1, 0.7);
        let base = sys.residual(&z, &zd, &u).unwrap();
        let jr = &j - &r;
        for k in 0..3 {
            let mut zp = zd.as_vector().clone();
            zp[k] += 1.0;
            let pert = sys.residual(&z, &StatePartition::new(dims, zp).unwrap(), &u).unwrap();
            let col = pert - &base;
            let expected = match k {
                0 => -jr.column(0).into_owned(),
                1 => Vector::from_vec(vec![0.0, 1.0, 0.0]),
                _ => Vector::zeros(3),
            };
            assert!((col - expected).amax() < 1e-14, "column {k}");
        }
    }

    #[test]
    fn output_maps() {
        let sys = scalar_system();
        let y = sys.output(&Vector::zeros(0), &Vector::from_element(1, 3.0), &Vector::zeros(0)).unwrap();
        assert_eq!(y[0], 3.0);
        assert!(sys.output(&Vector::zeros(1), &Vector::zeros(1), &Vector::zeros(0)).is_err());
    }
}
