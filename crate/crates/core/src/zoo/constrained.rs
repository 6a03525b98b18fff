//! Constrained models: the index-2 family and the mechanical variants.

use super::{diag, inverse, place, place_skew, Built, Params};
use crate::energy::{AugmentedQuadraticEnergy, QuadraticEnergy};
use crate::error::Result;
use crate::input::InputSignal;
use crate::linalg::{vstack, Matrix, Vector};
use crate::system::{assemble, SystemDims};

/// Input `[f; g]` for the semi-explicit and perturbed index-2 models.
pub fn index2_constraint_input(f: InputSignal, g: InputSignal) -> InputSignal {
    InputSignal::Stacked { parts: vec![f, g] }
}

/// Input `[f; g']` for the derivative-constraint variant; `g` must have an
/// analytic derivative.
pub fn derivative_constraint_input(f: InputSignal, g: &InputSignal) -> Result<InputSignal> {
    Ok(InputSignal::Stacked { parts: vec![f, g.derivative()?] })
}

/// Input `[f; g'; g]` for the stabilized mechanical model.
pub fn ggl_input(f: InputSignal, g: &InputSignal) -> Result<InputSignal> {
    Ok(InputSignal::Stacked { parts: vec![f, g.derivative()?, g.clone()] })
}

/// Shared data of the index-2 examples: `M`, `A` on four unknowns and two
/// constraints `B`.
struct Index2Data {
    m: Matrix,
    a: Matrix,
    b: Matrix,
    u0: Vector,
    lambda0: Vector,
}

fn tridiag(n: usize, d: f64, off: f64) -> Matrix {
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            d
        } else if i.abs_diff(j) == 1 {
            off
        } else {
            0.0
        }
    })
}

/// Multiplier of the hidden constraint `B u' = g'` with `g' = 0`:
/// `λ = (B M⁻¹ Bᵀ)⁻¹ B M⁻¹ r` for the force residual `r`.
fn hidden_multiplier(m: &Matrix, b: &Matrix, r: &Vector) -> Vector {
    let minv = inverse(m);
    let s = b * &minv * b.transpose();
    s.lu().solve(&(b * minv * r)).expect("B has full row rank")
}

fn index2_data(p: &Params) -> Index2Data {
    let m = tridiag(4, 4.0, 1.0) * (p.get("mass") / 6.0);
    let a = tridiag(4, 2.0, -1.0) * p.get("stiffness");
    let b = Matrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    let u0 = Vector::from_vec(vec![1.0, -1.0, 0.5, -0.5]);
    let lambda0 = hidden_multiplier(&m, &b, &(-(&a * &u0)));
    Index2Data { m, a, b, u0, lambda0 }
}

/// `z2 = M u`, `z3 = λ`, `R = Diag(A, 0)`, input `[f; g]`.
pub(super) fn index2_semiexplicit(p: &Params) -> Result<Built> {
    let d = index2_data(p);
    let dims = SystemDims::new(0, 4, 2, 6)?;
    let mut j = Matrix::zeros(6, 6);
    place_skew(&mut j, 0, 4, &(-d.b.transpose()));
    let mut r = Matrix::zeros(6, 6);
    place(&mut r, 0, 0, &d.a);
    let b = diag(&[1.0, 1.0, 1.0, 1.0, -1.0, -1.0]);
    let z0 = vstack(&[&(&d.m * &d.u0), &d.lambda0]);
    let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), inverse(&d.m))?;
    let system = assemble(dims, j, r, b, energy.into())?;
    Built::new(system, z0, 0.01)
}

/// `z1 = u`, `z2 = ελ`, `H = ½⟨u, A u⟩ + ⟨u, Bᵀλ⟩`, `R = Diag(M, I)`,
/// input `[f; g]` entering as `[f; g/ε]`.
///
/// The energy is indefinite and the relaxed system has modes growing like
/// `exp(c t/ε)`; the default step is large compared to `ε` so the midpoint
/// amplification of those modes stays close to one.
pub(super) fn index2_singular_perturbation(p: &Params) -> Result<Built> {
    let d = index2_data(p);
    let eps = p.get("epsilon");
    let dims = SystemDims::new(4, 2, 0, 6)?;
    let mut r = Matrix::zeros(6, 6);
    place(&mut r, 0, 0, &d.m);
    place(&mut r, 4, 4, &Matrix::identity(2, 2));
    let b = diag(&[1.0, 1.0, 1.0, 1.0, 1.0 / eps, 1.0 / eps]);
    let energy = QuadraticEnergy::new(d.a, Matrix::zeros(2, 2))?.with_coupling(d.b.transpose() / eps)?;
    let z0 = vstack(&[&d.u0, &(&d.lambda0 * eps)]);
    let system = assemble(dims, Matrix::zeros(6, 6), r, b, energy.into())?;
    Built::new(system, z0, 1.0)
}

/// `z1 = u`, `z3 = λ`, `H = ½⟨u, A u⟩`, `R = Diag(M, 0)`, input `[f; g']`.
pub(super) fn index2_derivative_constraint(p: &Params) -> Result<Built> {
    let d = index2_data(p);
    let dims = SystemDims::new(4, 0, 2, 6)?;
    let mut j = Matrix::zeros(6, 6);
    place_skew(&mut j, 0, 4, &(-d.b.transpose()));
    let mut r = Matrix::zeros(6, 6);
    place(&mut r, 0, 0, &d.m);
    let b = diag(&[1.0, 1.0, 1.0, 1.0, -1.0, -1.0]);
    let z0 = vstack(&[&d.u0, &d.lambda0]);
    let energy = QuadraticEnergy::new(d.a, Matrix::zeros(0, 0))?;
    let system = assemble(dims, j, r, b, energy.into())?;
    Built::new(system, z0, 0.01)
}

/// Three masses on a spring chain, one constraint coupling the first two.
struct MechData {
    m: Matrix,
    k: Matrix,
    d: Matrix,
    b: Matrix,
    x0: Vector,
    y0: Vector,
}

fn mech_data(p: &Params) -> MechData {
    MechData {
        m: diag(&[1.0, 2.0, 1.0]) * p.get("mass"),
        k: tridiag(3, 2.0, -1.0) * p.get("stiffness"),
        d: Matrix::identity(3, 3) * p.get("damping"),
        b: Matrix::from_row_slice(1, 3, &[1.0, -1.0, 0.0]),
        x0: Vector::from_vec(vec![0.5, 0.5, -0.5]),
        y0: Vector::from_vec(vec![0.2, 0.2, -0.3]),
    }
}

impl MechData {
    /// Multiplier keeping the velocity constraint, for `f = 0`.
    fn lambda0(&self) -> Vector {
        hidden_multiplier(&self.m, &self.b, &(-(&self.k * &self.x0) - &self.d * &self.y0))
    }
}

/// `z2 = [x; M y]`, `z3 = λ`, constraint `B y = g`, input `[f; g]`.
pub(super) fn mech_nonholonomic(p: &Params) -> Result<Built> {
    let d = mech_data(p);
    let dims = SystemDims::new(0, 6, 1, 4)?;
    let mut j = Matrix::zeros(7, 7);
    place_skew(&mut j, 0, 3, &Matrix::identity(3, 3));
    place_skew(&mut j, 3, 6, &(-d.b.transpose()));
    let mut r = Matrix::zeros(7, 7);
    place(&mut r, 3, 3, &d.d);
    let mut b = Matrix::zeros(7, 4);
    place(&mut b, 3, 0, &Matrix::identity(3, 3));
    b[(6, 3)] = -1.0;
    let mut m2 = Matrix::zeros(6, 6);
    place(&mut m2, 0, 0, &d.k);
    place(&mut m2, 3, 3, &inverse(&d.m));
    let z0 = vstack(&[&d.x0, &(&d.m * &d.y0), &d.lambda0()]);
    let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), m2)?;
    let system = assemble(dims, j, r, b, energy.into())?;
    Built::new(system, z0, 0.01)
}

/// `z2 = [K x; M y]`, `z3 = [λ; μ]`, constraints `B y = g'` and `B x = g`,
/// input `[f; g'; g]`.
pub(super) fn mech_ggl(p: &Params) -> Result<Built> {
    let d = mech_data(p);
    let dims = SystemDims::new(0, 6, 2, 5)?;
    let bt = d.b.transpose();
    let mut j = Matrix::zeros(8, 8);
    place_skew(&mut j, 0, 3, &d.k);
    place_skew(&mut j, 0, 7, &(-&bt));
    place_skew(&mut j, 3, 6, &(-&bt));
    let mut r = Matrix::zeros(8, 8);
    place(&mut r, 3, 3, &d.d);
    let mut b = Matrix::zeros(8, 5);
    place(&mut b, 3, 0, &Matrix::identity(3, 3));
    b[(6, 3)] = -1.0;
    b[(7, 4)] = -1.0;
    let mut m2 = Matrix::zeros(6, 6);
    place(&mut m2, 0, 0, &inverse(&d.k));
    place(&mut m2, 3, 3, &inverse(&d.m));
    let z0 = vstack(&[&(&d.k * &d.x0), &(&d.m * &d.y0), &d.lambda0(), &Vector::zeros(1)]);
    let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), m2)?;
    let system = assemble(dims, j, r, b, energy.into())?;
    Built::new(system, z0, 0.01)
}

/// `z1 = [x; y; λ]`, `H = ½⟨y, M y⟩ + ½⟨x, K x⟩ + ⟨λ, B x − g⟩` with constant
/// `g`, force input.
pub(super) fn mech_augmented(p: &Params) -> Result<Built> {
    let mut d = mech_data(p);
    let g = p.get("g");
    d.x0 += Vector::from_vec(vec![0.5, -0.5, 0.0]) * g;
    let dims = SystemDims::new(7, 0, 0, 3)?;
    let mut j = Matrix::zeros(7, 7);
    place_skew(&mut j, 0, 3, &(-&d.m));
    let mut r = Matrix::zeros(7, 7);
    place(&mut r, 0, 0, &d.d);
    let mut b = Matrix::zeros(7, 3);
    place(&mut b, 0, 0, &Matrix::identity(3, 3));
    let z0 = vstack(&[&d.x0, &d.y0, &d.lambda0()]);
    let energy = AugmentedQuadraticEnergy::new(d.k, d.m, d.b, Vector::from_element(1, g))?;
    let system = assemble(dims, j, r, b, energy.into())?;
    Built::new(system, z0, 0.01)
}
