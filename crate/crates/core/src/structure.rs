//! Power-preserving interconnection and structure-preserving projection.

use crate::energy::{CompositeEnergy, EnergyModel, QuadraticEnergy};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{
    block_diag, condition_number, lstsq_min_norm, max_abs, min_sym_eigenvalue, numerical_rank, skew_defect, sym_defect,
    Matrix, Vector,
};
use crate::system::{assemble, default_tol_psd, StructuredSystem, SystemDims};

/// Coupling `u = (F_skew − F_sym) y + ũ` of two systems' stacked ports.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub f_skew: Matrix,
    pub f_sym: Matrix,
    /// Keep `ũ` as the input of the composed system; otherwise it has no ports.
    pub residual_inputs: bool,
}

impl Coupling {
    /// No coupling: the direct sum with all ports kept.
    pub fn decoupled(m: usize) -> Self {
        Self { f_skew: Matrix::zeros(m, m), f_sym: Matrix::zeros(m, m), residual_inputs: true }
    }

    fn check(&self, m: usize) -> Result<()> {
        for (name, f) in [("F_skew", &self.f_skew), ("F_sym", &self.f_sym)] {
            if f.shape() != (m, m) {
                return Err(dim_mismatch(name, format!("{m}x{m}"), format!("{}x{}", f.nrows(), f.ncols())));
            }
        }
        let tol = |f: &Matrix| 1e-12 * (1.0 + max_abs(f));
        if skew_defect(&self.f_skew) > tol(&self.f_skew) {
            return Err(Error::StructureViolation("F_skew is not skew-symmetric".into()));
        }
        if sym_defect(&self.f_sym) > tol(&self.f_sym) {
            return Err(Error::StructureViolation("F_sym is not symmetric".into()));
        }
        if min_sym_eigenvalue(&self.f_sym) < -default_tol_psd(&self.f_sym) {
            return Err(Error::StructureViolation("F_sym is not positive semi-definite".into()));
        }
        Ok(())
    }
}

/// Position of a subsystem's local state index in the interleaved layout
/// `[z1A; z1B; z2A; z2B; z3A; z3B]`.
fn interleave(d: SystemDims, other: SystemDims, first: bool) -> Vec<usize> {
    let n1 = d.n1 + other.n1;
    let n2 = d.n2 + other.n2;
    let (o1, o2, o3) = if first { (0, n1, n1 + n2) } else { (other.n1, n1 + other.n2, n1 + n2 + other.n3) };
    (0..d.n1)
        .map(|i| o1 + i)
        .chain((0..d.n2).map(|i| o2 + i))
        .chain((0..d.n3).map(|i| o3 + i))
        .collect()
}

/// Composes two systems through their ports.
///
/// With the block-permuted direct sums `J̄`, `R̄`, `B̄`, the composed system has
/// `J = J̄ + B̄ F_skew B̄ᵀ`, `R = R̄ + B̄ F_sym B̄ᵀ` and energy `H_A + H_B`.
pub fn interconnect(a: &StructuredSystem, b: &StructuredSystem, coupling: &Coupling) -> Result<StructuredSystem> {
    let (da, db) = (a.system_dims(), b.system_dims());
    let m = da.m + db.m;
    coupling.check(m)?;
    let dims = SystemDims::new(da.n1 + db.n1, da.n2 + db.n2, da.n3 + db.n3, if coupling.residual_inputs { m } else { 0 })?;
    let n = dims.n();
    let mut jbar = Matrix::zeros(n, n);
    let mut rbar = Matrix::zeros(n, n);
    let mut bbar = Matrix::zeros(n, m);
    for (sys, idx, col0) in [(a, interleave(da, db, true), 0), (b, interleave(db, da, false), da.m)] {
        for (i, &gi) in idx.iter().enumerate() {
            for (j, &gj) in idx.iter().enumerate() {
                jbar[(gi, gj)] = sys.j()[(i, j)];
                rbar[(gi, gj)] = sys.r()[(i, j)];
            }
            for k in 0..sys.b().ncols() {
                bbar[(gi, col0 + k)] = sys.b()[(i, k)];
            }
        }
    }
    let j = &jbar + &bbar * &coupling.f_skew * bbar.transpose();
    let r = &rbar + &bbar * &coupling.f_sym * bbar.transpose();
    let b_new = if coupling.residual_inputs { bbar } else { Matrix::zeros(n, 0) };
    let energy = match (a.energy_model(), b.energy_model()) {
        (EnergyModel::Quadratic(qa), EnergyModel::Quadratic(qb)) => {
            let mut q = QuadraticEnergy::new(block_diag(&[qa.m1(), qb.m1()]), block_diag(&[qa.m2(), qb.m2()]))?;
            if qa.coupling().is_some() || qb.coupling().is_some() {
                let za = Matrix::zeros(da.n1, da.n2);
                let zb = Matrix::zeros(db.n1, db.n2);
                q = q.with_coupling(block_diag(&[qa.coupling().unwrap_or(&za), qb.coupling().unwrap_or(&zb)]))?;
            }
            EnergyModel::Quadratic(q)
        }
        (ea, eb) => EnergyModel::Composite(CompositeEnergy::new(vec![ea.clone(), eb.clone()])),
    };
    assemble(dims, j, r, b_new, energy)
}

/// Trial bases `V1`, `V2`, `V3` for Petrov–Galerkin reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBasis {
    pub v1: Matrix,
    pub v2: Matrix,
    pub v3: Matrix,
}

impl ProjectionBasis {
    pub fn identity(d: SystemDims) -> Self {
        Self { v1: Matrix::identity(d.n1, d.n1), v2: Matrix::identity(d.n2, d.n2), v3: Matrix::identity(d.n3, d.n3) }
    }
}

/// A reduced system together with the maps between full and reduced states.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub system: StructuredSystem,
    pub basis: ProjectionBasis,
    m2v2: Matrix,
    gram: Matrix,
}

impl Reduction {
    /// `w̃ = [w1; V2ᵀM2V2 w2; w3] ↦ [V1 w1; V2 w2; V3 w3]`.
    pub fn lift(&self, w: &Vector) -> Vector {
        let (r1, r2, r3) = (self.basis.v1.ncols(), self.basis.v2.ncols(), self.basis.v3.ncols());
        let w2 = if r2 == 0 {
            Vector::zeros(0)
        } else {
            self.gram.clone().lu().solve(&w.rows(r1, r2).into_owned()).expect("reduced mass was checked invertible")
        };
        crate::linalg::vstack(&[
            &(&self.basis.v1 * w.rows(0, r1)),
            &(&self.basis.v2 * w2),
            &(&self.basis.v3 * w.rows(r1 + r2, r3)),
        ])
    }

    /// Reduced coordinates of a full state: least squares on `z1`, `z3` and
    /// `w̃2 = V2ᵀ M2 z2`.
    pub fn restrict(&self, z: &Vector) -> Vector {
        let d = self.full_dims();
        let w1 = lstsq_min_norm(&self.basis.v1, &z.rows(0, d.0).into_owned());
        let w2 = self.m2v2.transpose() * z.rows(d.0, d.1);
        let w3 = lstsq_min_norm(&self.basis.v3, &z.rows(d.0 + d.1, d.2).into_owned());
        crate::linalg::vstack(&[&w1, &w2, &w3])
    }

    fn full_dims(&self) -> (usize, usize, usize) {
        (self.basis.v1.nrows(), self.basis.v2.nrows(), self.basis.v3.nrows())
    }
}

/// Threshold on the condition number of `V2ᵀ M2 V2`.
pub const REDUCED_MASS_CONDITION_LIMIT: f64 = 1e12;

/// Petrov–Galerkin projection with test space `Diag(V1, M2 V2, V3)`.
///
/// Requires a block-diagonal quadratic energy `½⟨z1, M1 z1⟩ + ½⟨z2, M2 z2⟩`.
pub fn petrov_galerkin(sys: &StructuredSystem, basis: &ProjectionBasis) -> Result<Reduction> {
    let d = sys.system_dims();
    let q = match sys.energy_model() {
        EnergyModel::Quadratic(q) if q.is_block_diagonal() => q,
        _ => return Err(Error::NonQuadraticEnergy),
    };
    for (name, v, rows) in [("V1", &basis.v1, d.n1), ("V2", &basis.v2, d.n2), ("V3", &basis.v3, d.n3)] {
        if v.nrows() != rows {
            return Err(dim_mismatch(name, format!("{rows} rows"), format!("{} rows", v.nrows())));
        }
        let rank = numerical_rank(v);
        if v.ncols() > rows || rank < v.ncols() {
            return Err(Error::RankDeficientBasis { block: name.to_string(), rank, cols: v.ncols() });
        }
    }
    let m2v2 = q.m2() * &basis.v2;
    let gram = basis.v2.transpose() * &m2v2;
    let gram = (&gram + gram.transpose()) * 0.5;
    let m2_reduced = if gram.nrows() == 0 {
        Matrix::zeros(0, 0)
    } else {
        let condition = condition_number(&gram);
        if !(condition <= REDUCED_MASS_CONDITION_LIMIT) {
            return Err(Error::SingularReducedMass { condition });
        }
        let inv = gram.clone().try_inverse().ok_or(Error::SingularReducedMass { condition })?;
        (&inv + inv.transpose()) * 0.5
    };
    let v = block_diag(&[&basis.v1, &m2v2, &basis.v3]);
    let vt = v.transpose();
    let j = &vt * sys.j() * &v;
    let r = &vt * sys.r() * &v;
    let b = &vt * sys.b();
    let m1_reduced = basis.v1.transpose() * q.m1() * &basis.v1;
    let m1_reduced = (&m1_reduced + m1_reduced.transpose()) * 0.5;
    let energy = QuadraticEnergy::new(m1_reduced, m2_reduced)?;
    let dims = SystemDims::new(basis.v1.ncols(), basis.v2.ncols(), basis.v3.ncols(), d.m)?;
    // Congruences keep J skew and R symmetric up to round-off; assemble removes it.
    let j = (&j - j.transpose()) * 0.5;
    let r = (&r + r.transpose()) * 0.5;
    let system = assemble(dims, j, r, b, energy.into())?;
    Ok(Reduction { system, basis: basis.clone(), m2v2, gram })
}
