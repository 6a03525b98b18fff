use super::{diag, place_skew, Built, Params};
use crate::energy::QuadraticEnergy;
use crate::error::Result;
use crate::input::InputSignal;
use crate::linalg::{Matrix, Vector};
use crate::system::{assemble, SystemDims};

/// `z2 = [L I; C1 V1; C2 V2]`, `z3 = [I_G; I_R]`, generator voltage `E_G`
/// as the single input.
pub(super) fn dc_network(p: &Params) -> Result<Built> {
    let (rg, rl, rr) = (p.get("r_g"), p.get("r_l"), p.get("r_r"));
    let (l, c1, c2) = (p.get("l"), p.get("c1"), p.get("c2"));
    let dims = SystemDims::new(0, 3, 2, 1)?;
    #[rustfmt::skip]
    let j = Matrix::from_row_slice(5, 5, &[
        0.0, -1.0, 1.0, 0.0, 0.0,
        1.0, 0.0, 0.0, -1.0, 0.0,
        -1.0, 0.0, 0.0, 0.0, -1.0,
        0.0, 1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0, 0.0,
    ]);
    let r = diag(&[rl, 0.0, 0.0, rg, rr]);
    let mut b = Matrix::zeros(5, 1);
    b[(3, 0)] = 1.0;
    let energy = QuadraticEnergy::new(Matrix::zeros(0, 0), diag(&[1.0 / l, 1.0 / c1, 1.0 / c2]))?;
    let system = assemble(dims, j, r, b, energy.into())?;
    // Unit flux and charges; the resistor currents follow from the algebraic
    // rows with the source off at t = 0.
    let (v1, v2) = (1.0 / c1, 1.0 / c2);
    let z0 = Vector::from_vec(vec![1.0, 1.0, 1.0, v1 / rg, v2 / rr]);
    let mut built = Built::new(system, z0, 0.01)?;
    built.input = InputSignal::sine(&[p.get("e_g")], p.get("omega"), 0.0);
    Ok(built)
}

/// Source, resistor and parallel LC between two nodes. `z1 = q_C`,
/// `z2 = ψ_L`, `z3 = [i_S; φ1; φ2]`, source voltage as input.
pub(super) fn rlc_circuit(p: &Params) -> Result<Built> {
    let (cap, ind, g) = (p.get("capacitance"), p.get("inductance"), p.get("conductance"));
    let dims = SystemDims::new(1, 1, 3, 1)?;
    // Incidence columns A_S = [1; 0], A_R = [1; −1], A_L = A_C = [0; 1].
    let a_c = Matrix::from_column_slice(2, 1, &[0.0, 1.0]);
    let a_l = a_c.clone();
    let a_s = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
    let a_r = Matrix::from_column_slice(2, 1, &[1.0, -1.0]);
    let mut j = Matrix::zeros(5, 5);
    place_skew(&mut j, 0, 3, &a_c.transpose());
    place_skew(&mut j, 1, 3, &a_l.transpose());
    place_skew(&mut j, 2, 3, &a_s.transpose());
    let mut r = Matrix::zeros(5, 5);
    r.view_mut((3, 3), (2, 2)).copy_from(&(&a_r * a_r.transpose() * g));
    let mut b = Matrix::zeros(5, 1);
    b[(2, 0)] = -1.0;
    let energy = QuadraticEnergy::new(diag(&[1.0 / cap]), diag(&[1.0 / ind]))?;
    let system = assemble(dims, j, r, b, energy.into())?;
    // Charged capacitor, no flux: φ2 = q/C = 1, φ1 = u_S = 0, and the source
    // current balances the resistor current at node 1.
    let z0 = Vector::from_vec(vec![cap, 0.0, g, 0.0, 1.0]);
    Built::new(system, z0, 0.01)
}
