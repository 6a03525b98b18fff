#![allow(dead_code)]

use dissipact::energy::{Energy, QuadraticEnergy};
use dissipact::integrators::{integrate, Scheme, SolverOptions, TimeGrid, Trajectory};
use dissipact::zoo::{build_model, ModelSpec, ZooModel};
use dissipact::{DiscreteGradientKind, EnergyBasedSystem, EnergyModel, InputSignal, Matrix, StatePartition, StructuredSystem, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DG: Scheme = Scheme::DiscreteGradient(DiscreteGradientKind::GonzalezMidpoint);

pub fn model(name: &str) -> ZooModel {
    build_model(&ModelSpec::new(name)).unwrap()
}

pub fn zero_input(sys: &StructuredSystem) -> InputSignal {
    InputSignal::zero(sys.system_dims().m)
}

pub fn run(m: &ZooModel, scheme: Scheme, input: &InputSignal, tau: f64, steps: usize) -> Trajectory {
    run_system(&m.system, m.z0.as_vector(), input, tau, steps, scheme)
}

pub fn run_system(sys: &StructuredSystem, z0: &Vector, input: &InputSignal, tau: f64, steps: usize, scheme: Scheme) -> Trajectory {
    let grid = TimeGrid::with_steps(tau, steps).unwrap();
    let z0 = StatePartition::new(sys.system_dims(), z0.clone()).unwrap();
    integrate(sys, &z0, input, &grid, scheme, &SolverOptions::default()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-scale..scale)))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_iterator(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)))
}

/// `L Lᵀ + shift·I`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Matrix {
    let l = random_matrix(rng, n, n);
    &l * l.transpose() + Matrix::identity(n, n) * shift
}

pub fn random_skew(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = random_matrix(rng, n, n);
    &a - a.transpose()
}

/// Full Hessian of a quadratic (or augmented quadratic) energy.
pub fn quadratic_matrix(e: &EnergyModel) -> Matrix {
    match e {
        EnergyModel::Quadratic(q) => q.full_matrix(),
        other => other.hessian(&Vector::zeros(other.dim())).expect("quadratic energy"),
    }
}

/// One midpoint step of a linear model, written out as a dense linear system
/// `A zⁿ⁺¹ = b` directly from the scheme's defining equations.
pub fn direct_midpoint_step(sys: &StructuredSystem, zn: &Vector, u_mid: &Vector, tau: f64) -> Vector {
    let d = sys.system_dims();
    let (n, n1, ne) = (d.n(), d.n1, d.n_energy());
    let h = quadratic_matrix(sys.energy_model());
    // lhs = [τ ∂z1H(mid); z2ⁿ⁺¹ − z2ⁿ; 0], v = [z1ⁿ⁺¹ − z1ⁿ; τ ∂z2H(mid); τ z3(mid)]
    let mut lhs_x = Matrix::zeros(n, n);
    let mut lhs_n = Matrix::zeros(n, n);
    let mut v_x = Matrix::zeros(n, n);
    let mut v_n = Matrix::zeros(n, n);
    for i in 0..n1 {
        for j in 0..ne {
            lhs_x[(i, j)] = 0.5 * tau * h[(i, j)];
            lhs_n[(i, j)] = 0.5 * tau * h[(i, j)];
        }
        v_x[(i, i)] = 1.0;
        v_n[(i, i)] = -1.0;
    }
    for i in n1..ne {
        lhs_x[(i, i)] = 1.0;
        lhs_n[(i, i)] = -1.0;
        for j in 0..ne {
            v_x[(i, j)] = 0.5 * tau * h[(i, j)];
            v_n[(i, j)] = 0.5 * tau * h[(i, j)];
        }
    }
    for i in ne..n {
        v_x[(i, i)] = 0.5 * tau;
        v_n[(i, i)] = 0.5 * tau;
    }
    let jr = sys.j() - sys.r();
    let a = &lhs_x - &jr * &v_x;
    let rhs = -((&lhs_n - &jr * &v_n) * zn) + sys.b() * u_mid * tau;
    a.lu().solve(&rhs).unwrap()
}

/// Relative residual of `⟨∂z1H, ż1⟩ + ⟨∂z2H, ż2⟩ = −⟨v, R v⟩ + ⟨v, B u⟩` with
/// `v = [ż1; ∂z2H; z3]`.
pub fn power_balance_defect<S: EnergyBasedSystem + ?Sized>(sys: &S, z: &Vector, zdot: &Vector, u: &Vector) -> f64 {
    let d = sys.dims();
    let (n1, n2, ne) = (d.n1, d.n2, d.n_energy());
    let g = sys.energy().gradient(&z.rows(0, ne).into_owned());
    let c = sys.coefficients(0.0, z);
    let v = dissipact::linalg::vstack(&[
        &zdot.rows(0, n1).into_owned(),
        &g.rows(n1, n2).into_owned(),
        &z.rows(ne, d.n3).into_owned(),
    ]);
    let lhs = g.dot(&zdot.rows(0, ne).into_owned());
    let diss = v.dot(&(&c.r * &v));
    let supply = v.dot(&(&c.b * u));
    let rhs = -diss + supply;
    (lhs - rhs).abs() / (lhs.abs() + diss.abs() + supply.abs()).max(1e-300)
}

pub fn quadratic(m1: Matrix, m2: Matrix) -> EnergyModel {
    QuadraticEnergy::new(m1, m2).unwrap().into()
}
