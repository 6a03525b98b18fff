use std::f64::consts::PI;
use std::sync::Arc;

use super::discretization::laplacian_dirichlet_1d;
use super::{diag, inverse, place, place_skew, Built, Params};
use crate::energy::{DoubleWellLatticeEnergy, EnergyModel, QuadraticEnergy};
use crate::error::Result;
use crate::linalg::{vstack, Matrix, Vector};
use crate::system::{assemble, SystemDims};

/// `z2 = [q; p]`, `H = ½k q² + p²/(2m)`, force input on the momentum row.
pub(super) fn ph_iso(p: &Params) -> Result<Built> {
    let (k, m, c) = (p.get("stiffness"), p.get("mass"), p.get("damping"));
    let (q0, p0) = (p.get("q0"), p.get("p0"));
    let dims = SystemDims::new(0, 2, 0, 1)?;
    let j = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let r = diag(&[0.0, c]);
    let b = Matrix::from_column_slice(2, 1, &[0.0, 1.0]);
    let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), diag(&[k, 1.0 / m]))?;
    let system = assemble(dims, j, r, b, energy.into())?;
    let mut built = Built::new(system, Vector::from_vec(vec![q0, p0]), 0.01)?;
    built.oracle = Some(Arc::new(move |t| {
        let (q, v) = damped_oscillator(k, m, c, q0, p0 / m, t);
        Vector::from_vec(vec![q, m * v])
    }));
    Ok(built)
}

/// Position and velocity of `m q'' + c q' + k q = 0`.
pub(crate) fn damped_oscillator(k: f64, m: f64, c: f64, q0: f64, v0: f64, t: f64) -> (f64, f64) {
    let w0sq = k / m;
    let g = c / (2.0 * m);
    let disc = g * g - w0sq;
    if disc.abs() <= 1e-14 * w0sq {
        let a = v0 + g * q0;
        let e = (-g * t).exp();
        (e * (q0 + a * t), e * (a - g * (q0 + a * t)))
    } else if disc < 0.0 {
        let wd = (-disc).sqrt();
        let a = (v0 + g * q0) / wd;
        let e = (-g * t).exp();
        let (s, co) = (wd * t).sin_cos();
        let q = e * (q0 * co + a * s);
        let dq = e * (-g * (q0 * co + a * s) + wd * (-q0 * s + a * co));
        (q, dq)
    } else {
        let sq = disc.sqrt();
        let (r1, r2) = (-g + sq, -g - sq);
        let b = (v0 - r1 * q0) / (r2 - r1);
        let a = q0 - b;
        let (e1, e2) = ((r1 * t).exp(), (r2 * t).exp());
        (a * e1 + b * e2, a * r1 * e1 + b * r2 * e2)
    }
}

pub(crate) fn node_positions(nodes: usize) -> Vec<f64> {
    let h = 1.0 / (nodes + 1) as f64;
    (1..=nodes).map(|i| i as f64 * h).collect()
}

/// `z1 = u` on interior nodes, `J = 0`, `R = friction·h·I`,
/// `H = ½∫|u'|²` or its double-well extension, distributed force input.
pub(super) fn gradient_flow(p: &Params) -> Result<Built> {
    let n = p.grid();
    let h = 1.0 / (n + 1) as f64;
    let stiffness = laplacian_dirichlet_1d(n, 1.0)? * h;
    let energy: EnergyModel = if p.get("double_well") == 1.0 {
        let eps = p.get("epsilon");
        DoubleWellLatticeEnergy::new(stiffness * eps, 1.0 / eps, Vector::from_element(n, h), (n, 0))?.into()
    } else {
        QuadraticEnergy::new(stiffness, Matrix::zeros(0, 0))?.into()
    };
    let dims = SystemDims::new(n, 0, 0, n)?;
    let r = Matrix::identity(n, n) * (p.get("friction") * h);
    let b = Matrix::identity(n, n) * h;
    let system = assemble(dims, Matrix::zeros(n, n), r, b, energy)?;
    let u0 = Vector::from_iterator(n, node_positions(n).into_iter().map(|x| (PI * x).sin() + 0.5 * (3.0 * PI * x).sin()));
    Built::new(system, u0, 0.01)
}

/// Quasi-static poroelasticity, `z = [u; C p; •]`:
/// `A u = Dᵀ p + f`, `C p' = −D u' − B p + g`, `H = ½⟨u, A u⟩ + ½⟨p, C p⟩`.
pub(super) fn poroelasticity(p: &Params) -> Result<Built> {
    let n = p.grid();
    let h = 1.0 / (n + 1) as f64;
    let a = laplacian_dirichlet_1d(n, 1.0)? * (h * p.get("elasticity"));
    let bp = laplacian_dirichlet_1d(n, 1.0)? * (h * p.get("permeability"));
    let c = Matrix::identity(n, n) * (h * p.get("storage"));
    let d = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if i == j + 1 {
            -1.0
        } else {
            0.0
        }
    }) * p.get("coupling");
    let dims = SystemDims::new(n, n, 0, 2 * n)?;
    let mut j = Matrix::zeros(2 * n, 2 * n);
    place_skew(&mut j, 0, n, &d.transpose());
    let mut r = Matrix::zeros(2 * n, 2 * n);
    place(&mut r, n, n, &bp);
    let b = Matrix::identity(2 * n, 2 * n);
    let p0 = Vector::from_iterator(n, node_positions(n).into_iter().map(|x| (PI * x).sin()));
    let u0 = a.clone().lu().solve(&(d.transpose() * &p0)).expect("A is positive definite");
    let z2 = &c * &p0;
    let energy = QuadraticEnergy::new(a, inverse(&c))?;
    let system = assemble(dims, j, r, b, energy.into())?;
    Built::new(system, vstack(&[&u0, &z2]), 0.01)
}

/// `D z1' + z2' = (J2 − R2) M2 z2`, `0 = M1 z1 − Dᵀ M2 z2`, no ports.
pub(super) fn index1_class(p: &Params) -> Result<Built> {
    let d = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
    let m1 = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let m2 = Matrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.2, 1.0, 0.2, 0.0, 0.2, 1.0]);
    let j2 = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0]);
    let r2 = diag(&[1.0, 0.0, 0.5]) * p.get("damping");
    let dims = SystemDims::new(2, 3, 0, 0)?;
    let mut j = Matrix::zeros(5, 5);
    place_skew(&mut j, 0, 2, &d.transpose());
    place(&mut j, 2, 2, &j2);
    let mut r = Matrix::zeros(5, 5);
    place(&mut r, 2, 2, &r2);
    let z2 = Vector::from_vec(vec![1.0, 0.0, -0.5]);
    let z1 = m1.clone().lu().solve(&(d.transpose() * &m2 * &z2)).expect("M1 is positive definite");
    let energy = QuadraticEnergy::new(m1, m2)?;
    let system = assemble(dims, j, r, Matrix::zeros(5, 0), energy.into())?;
    Built::new(system, vstack(&[&z1, &z2]), 0.01)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillator_regimes_satisfy_the_ode() {
        for (k, m, c) in [(1.0, 1.0, 0.1), (1.0, 1.0, 2.0), (4.0, 0.5, 5.0), (1.0, 1.0, 0.0)] {
            let h = 1e-4;
            for t in [0.0, 0.7, 2.3] {
                let (q, v) = damped_oscillator(k, m, c, 1.0, -0.3, t + h);
                let (qm, vm) = damped_oscillator(k, m, c, 1.0, -0.3, t - h);
                let (q0, v0) = damped_oscillator(k, m, c, 1.0, -0.3, t);
                let acc = (v - vm) / (2.0 * h);
                assert!(((q - qm) / (2.0 * h) - v0).abs() < 1e-6);
                assert!((m * acc + c * v0 + k * q0).abs() < 1e-6);
            }
            assert_eq!(damped_oscillator(k, m, c, 1.0, -0.3, 0.0).0, 1.0);
        }
    }
}
