//! Spatially discretized PDE models.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use super::discretization::{difference_counts, mac_stokes_operators, stiffness_neumann_1d};
use super::lumped::node_positions;
use super::{place, place_skew, Built, Params};
use crate::energy::{DoubleWellLatticeEnergy, Energy, QuadraticEnergy};
use crate::error::Result;
use crate::linalg::{vstack, Matrix, Vector};
use crate::system::{assemble, SystemDims};

/// `z2 = [hρẇ; h∂ₓw]` on `N` interior nodes and `N + 1` cells, fixed ends,
/// `H = Σ h(ρ/2 ẇ² + T/2 (∂ₓw)²)`, nodal force input. The initial shape is
/// the lowest mode, so the semi-discrete solution is known exactly.
pub(super) fn vibrating_string(p: &Params) -> Result<Built> {
    let n = p.grid();
    let h = 1.0 / (n + 1) as f64;
    let (rho, tension) = (p.get("density"), p.get("tension"));
    let g = difference_counts(n);
    let dims = SystemDims::new(0, 2 * n + 1, 0, n)?;
    let mut j = Matrix::zeros(2 * n + 1, 2 * n + 1);
    place_skew(&mut j, 0, n, &(-g.transpose()));
    let mut m2 = Matrix::zeros(2 * n + 1, 2 * n + 1);
    m2.view_mut((0, 0), (n, n)).fill_diagonal(1.0 / (h * rho));
    m2.view_mut((n, n), (n + 1, n + 1)).fill_diagonal(tension / h);
    let mut b = Matrix::zeros(2 * n + 1, n);
    place(&mut b, 0, 0, &Matrix::identity(n, n));
    let w0 = Vector::from_iterator(n, node_positions(n).into_iter().map(|x| (PI * x).sin()));
    let strain0 = &g * &w0;
    let z0 = vstack(&[&Vector::zeros(n), &strain0]);
    let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), m2)?;
    let system = assemble(dims, j, Matrix::zeros(2 * n + 1, 2 * n + 1), b, energy.into())?;
    let mut built = Built::new(system, z0, 0.01)?;
    let omega = (tension / rho).sqrt() * 2.0 / h * (PI * h / 2.0).sin();
    built.oracle = Some(Arc::new(move |t| {
        let (s, c) = (omega * t).sin_cos();
        vstack(&[&(&w0 * (-h * rho * omega * s)), &(&strain0 * c)])
    }));
    Ok(built)
}

/// Viscoelastic Stokes flow on the unit square, `nx = ny = grid` cells.
///
/// `z2 = [ρ W_v v; ε W_T T]`, `z3 = p` with the last cell's pressure pinned
/// to remove the constant mode, `H = ½ηρ|v|² + ½ε|T|²` in the weighted
/// norms, `∂z2 H = [η v; T]`, and `R = Diag(0, W_T, 0)`. The inputs are a
/// body force and a stress source in the same weighted pairing.
pub(super) fn viscoelastic_stokes(p: &Params) -> Result<Built> {
    let n = p.grid();
    let (rho, eta, eps) = (p.get("density"), p.get("viscosity"), p.get("relaxation"));
    let ops = mac_stokes_operators(n, n)?;
    let (nv, nt) = (ops.n_velocity(), ops.n_stress());
    let np = ops.n_cells() - 1;
    let wv = Matrix::from_diagonal(&ops.velocity_weights);
    let wt = Matrix::from_diagonal(&ops.stress_weights);
    let wp = Matrix::from_diagonal(&ops.pressure_weights.rows(0, np).into_owned());
    let div = ops.div.rows(0, np).into_owned();
    let ntot = nv + nt + np;
    let dims = SystemDims::new(0, nv + nt, np, nv + nt)?;
    let mut j = Matrix::zeros(ntot, ntot);
    place_skew(&mut j, nv, 0, &(&wt * &ops.sym_grad));
    place_skew(&mut j, nv + nt, 0, &(-(&wp * div)));
    let mut r = Matrix::zeros(ntot, ntot);
    place(&mut r, nv, nv, &wt);
    let mut b = Matrix::zeros(ntot, nv + nt);
    place(&mut b, 0, 0, &wv);
    place(&mut b, nv, nv, &wt);
    let mut m2 = Matrix::zeros(nv + nt, nv + nt);
    for i in 0..nv {
        m2[(i, i)] = eta / (rho * ops.velocity_weights[i]);
    }
    for i in 0..nt {
        m2[(nv + i, nv + i)] = 1.0 / (eps * ops.stress_weights[i]);
    }
    let v0 = stream_function_velocity(&ops);
    let z0 = vstack(&[&(&wv * v0 * rho), &Vector::zeros(nt), &Vector::zeros(np)]);
    let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), m2)?;
    let system = assemble(dims, j, r, b, energy.into())?;
    Built::new(system, z0, 0.01)
}

/// Discrete curl of `ψ = sin(πx) sin(πy)` sampled at the cell corners;
/// divergence free to round-off and zero normal flux on the boundary.
fn stream_function_velocity(ops: &super::MacOperators) -> Vector {
    let (nx, ny) = (ops.nx, ops.ny);
    let psi = |i: usize, j: usize| (PI * i as f64 / nx as f64).sin() * (PI * j as f64 / ny as f64).sin();
    let mut v = Vector::zeros(ops.n_velocity());
    for j in 0..ny {
        for i in 1..nx {
            v[ops.u_index(i, j)] = (psi(i, j + 1) - psi(i, j)) * ny as f64;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            v[ops.v_index(i, j)] = -(psi(i + 1, j) - psi(i, j)) * nx as f64;
        }
    }
    v
}

/// Cahn–Hilliard on `N` cells of `(0, 1)` with Neumann ends.
///
/// `z1 = u`, `z3 = h·w` (the chemical potential in the nodal-quadrature
/// pairing), `J = [[0, I], [−I, 0]]`, `R = Diag(0, (σ/h²)K)`, and
/// `H = ½ε⟨u, K u⟩ + (1/ε) Σ h W(uᵢ)`; a mass source enters the `u` row.
pub(super) fn cahn_hilliard(p: &Params) -> Result<Built> {
    let n = p.grid();
    let h = 1.0 / n as f64;
    let (eps, sigma) = (p.get("epsilon"), p.get("mobility"));
    let k = stiffness_neumann_1d(n, 1.0)?;
    let energy = DoubleWellLatticeEnergy::new(&k * eps, 1.0 / eps, Vector::from_element(n, h), (n, 0))?;
    let dims = SystemDims::new(n, 0, n, n)?;
    let mut j = Matrix::zeros(2 * n, 2 * n);
    place_skew(&mut j, 0, n, &Matrix::identity(n, n));
    let mut r = Matrix::zeros(2 * n, 2 * n);
    place(&mut r, n, n, &(k * (sigma / (h * h))));
    let mut b = Matrix::zeros(2 * n, n);
    place(&mut b, n, 0, &Matrix::identity(n, n));
    let width = SQRT_2 * eps;
    let u0 = Vector::from_iterator(
        n,
        (0..n).map(|i| {
            let x = (i as f64 + 0.5) * h;
            ((x - 0.45) / width).tanh() + 0.2 * (3.0 * PI * x).cos()
        }),
    );
    let w0 = energy.gradient(&u0);
    let system = assemble(dims, j, r, b, energy.into())?;
    Built::new(system, vstack(&[&u0, &w0]), 0.01)
}
