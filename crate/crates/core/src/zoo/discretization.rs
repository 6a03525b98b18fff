//! Finite-difference building blocks for the PDE models.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

fn check_nodes(nodes: usize, length: f64) -> Result<f64> {
    if nodes == 0 {
        return Err(Error::InvalidParams("at least one interior node is required".into()));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidParams(format!("interval length must be positive, got {length}")));
    }
    Ok(length / (nodes + 1) as f64)
}

/// `(1/h²)·tridiag(−1, 2, −1)` on the interior nodes of `(0, length)`,
/// `h = length/(nodes + 1)`.
pub fn laplacian_dirichlet_1d(nodes: usize, length: f64) -> Result<Matrix> {
    let h = check_nodes(nodes, length)?;
    let s = 1.0 / (h * h);
    Ok(Matrix::from_fn(nodes, nodes, |i, j| {
        if i == j {
            2.0 * s
        } else if i.abs_diff(j) == 1 {
            -s
        } else {
            0.0
        }
    }))
}

/// Forward differences from interior nodes to the `nodes + 1` cells,
/// `(D w)ⱼ = (wⱼ − wⱼ₋₁)/h` with zero boundary values, so `DᵀD` is the
/// Dirichlet Laplacian and `[[0, −Dᵀ], [D, 0]]` is exactly skew.
pub fn difference_dirichlet_1d(nodes: usize, length: f64) -> Result<Matrix> {
    let h = check_nodes(nodes, length)?;
    Ok(difference_counts(nodes) / h)
}

/// The unscaled incidence matrix behind [`difference_dirichlet_1d`].
pub(crate) fn difference_counts(nodes: usize) -> Matrix {
    let mut g = Matrix::zeros(nodes + 1, nodes);
    for i in 0..nodes {
        g[(i, i)] = 1.0;
        g[(i + 1, i)] = -1.0;
    }
    g
}

/// `(1/h)·T` with `T = tridiag(−1, 2, −1)` and Neumann rows `[1, −1]` at the
/// ends, on `nodes` cell centres of `(0, length)`. Satisfies
/// `⟨K u, u⟩ = (1/h) Σ (uᵢ₊₁ − uᵢ)²`, so `K` is symmetric positive
/// semi-definite with the constants as kernel.
pub fn stiffness_neumann_1d(nodes: usize, length: f64) -> Result<Matrix> {
    if nodes < 2 {
        return Err(Error::InvalidParams("at least two nodes are required".into()));
    }
    let h = length / nodes as f64;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParams(format!("interval length must be positive, got {length}")));
    }
    let mut k = Matrix::zeros(nodes, nodes);
    for i in 0..nodes - 1 {
        k[(i, i)] += 1.0;
        k[(i + 1, i + 1)] += 1.0;
        k[(i, i + 1)] -= 1.0;
        k[(i + 1, i)] -= 1.0;
    }
    Ok(k / h)
}

/// Staggered-grid operators on the unit square with `nx × ny` cells.
///
/// Velocity components live on interior faces (`u` on vertical faces, `v` on
/// horizontal ones; boundary faces carry the homogeneous Dirichlet data),
/// pressure and the diagonal stresses in cells, and the shear stress at
/// interior corners.
#[derive(Debug, Clone, PartialEq)]
pub struct MacOperators {
    pub nx: usize,
    pub ny: usize,
    /// Discrete divergence, cells × velocities.
    pub div: Matrix,
    /// Discrete symmetric gradient, stresses × velocities, rows ordered
    /// `[T_xx (cells); T_yy (cells); T_xy (interior corners)]`.
    pub sym_grad: Matrix,
    /// Quadrature weight per velocity unknown (control-volume area).
    pub velocity_weights: Vector,
    /// Quadrature weight per stress unknown; shear entries count twice.
    pub stress_weights: Vector,
    /// Cell areas.
    pub pressure_weights: Vector,
}

impl MacOperators {
    pub fn n_velocity(&self) -> usize {
        self.div.ncols()
    }

    pub fn n_stress(&self) -> usize {
        self.sym_grad.nrows()
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Index of `u` on the vertical face `x = i·hx`, `1 ≤ i ≤ nx − 1`.
    pub fn u_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx - 1) + (i - 1)
    }

    /// Index of `v` on the horizontal face `y = j·hy`, `1 ≤ j ≤ ny − 1`.
    pub fn v_index(&self, i: usize, j: usize) -> usize {
        (self.nx - 1) * self.ny + (j - 1) * self.nx + i
    }
}

/// Divergence and symmetric gradient on the staggered grid. With the weights
/// `W` returned alongside, `(W_T S)ᵀ` and `(W_p D)ᵀ` are the exact adjoints
/// used to assemble a skew-symmetric Stokes operator.
pub fn mac_stokes_operators(nx: usize, ny: usize) -> Result<MacOperators> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidParams(format!("grid must be at least 2x2, got {nx}x{ny}")));
    }
    let hx = 1.0 / nx as f64;
    let hy = 1.0 / ny as f64;
    let area = hx * hy;
    let nu = (nx - 1) * ny;
    let nvel = nu + nx * (ny - 1);
    let ncell = nx * ny;
    let ncorner = (nx - 1) * (ny - 1);
    let ops_shape = MacOperators {
        nx,
        ny,
        div: Matrix::zeros(0, 0),
        sym_grad: Matrix::zeros(0, 0),
        velocity_weights: Vector::zeros(0),
        stress_weights: Vector::zeros(0),
        pressure_weights: Vector::zeros(0),
    };
    let ui = |i: usize, j: usize| (i >= 1 && i < nx).then(|| ops_shape.u_index(i, j));
    let vi = |i: usize, j: usize| (j >= 1 && j < ny).then(|| ops_shape.v_index(i, j));
    let mut div = Matrix::zeros(ncell, nvel);
    let mut sg = Matrix::zeros(2 * ncell + ncorner, nvel);
    for j in 0..ny {
        for i in 0..nx {
            let c = j * nx + i;
            if let Some(k) = ui(i + 1, j) {
                div[(c, k)] += 1.0 / hx;
                sg[(c, k)] += 1.0 / hx;
            }
            if let Some(k) = ui(i, j) {
                div[(c, k)] -= 1.0 / hx;
                sg[(c, k)] -= 1.0 / hx;
            }
            if let Some(k) = vi(i, j + 1) {
                div[(c, k)] += 1.0 / hy;
                sg[(ncell + c, k)] += 1.0 / hy;
            }
            if let Some(k) = vi(i, j) {
                div[(c, k)] -= 1.0 / hy;
                sg[(ncell + c, k)] -= 1.0 / hy;
            }
        }
    }
    // Shear rate ½(∂u/∂y + ∂v/∂x) at the interior corner (i·hx, j·hy).
    for j in 1..ny {
        for i in 1..nx {
            let r = 2 * ncell + (j - 1) * (nx - 1) + (i - 1);
            sg[(r, ops_shape.u_index(i, j))] += 0.5 / hy;
            sg[(r, ops_shape.u_index(i, j - 1))] -= 0.5 / hy;
            sg[(r, ops_shape.v_index(i, j))] += 0.5 / hx;
            sg[(r, ops_shape.v_index(i - 1, j))] -= 0.5 / hx;
        }
    }
    let mut stress_weights = Vector::from_element(2 * ncell + ncorner, area);
    stress_weights.rows_mut(2 * ncell, ncorner).fill(2.0 * area);
    Ok(MacOperators {
        div,
        sym_grad: sg,
        velocity_weights: Vector::from_element(nvel, area),
        stress_weights,
        pressure_weights: Vector::from_element(ncell, area),
        ..ops_shape
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, sym_defect};

    #[test]
    fn single_node_laplacian() {
        let l = laplacian_dirichlet_1d(1, 2.0).unwrap();
        assert_eq!(l[(0, 0)], 2.0);
        assert!(laplacian_dirichlet_1d(0, 1.0).is_err());
    }

    #[test]
    fn laplacian_eigenvalues() {
        let (n, len) = (3, 1.0);
        let h = len / (n + 1) as f64;
        let l = laplacian_dirichlet_1d(n, len).unwrap();
        assert_eq!(sym_defect(&l), 0.0);
        let mut eig: Vec<f64> = l.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        for (k, e) in eig.iter().enumerate() {
            let kk = (k + 1) as f64;
            let exact = 2.0 / (h * h) * (1.0 - (kk * std::f64::consts::PI * h / len).cos());
            assert!((e - exact).abs() <= 1e-12 * exact.max(1.0), "{e} vs {exact}");
        }
    }

    #[test]
    fn difference_pair_composes_to_laplacian() {
        let d = difference_dirichlet_1d(5, 1.0).unwrap();
        let l = laplacian_dirichlet_1d(5, 1.0).unwrap();
        assert!(max_abs(&(d.transpose() * &d - &l)) < 1e-10);
        let ones = d * Vector::from_element(5, 1.0);
        assert!(ones[0] != 0.0 && ones[5] != 0.0);
        assert!(ones.rows(1, 4).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn neumann_kernel_is_constant() {
        let k = stiffness_neumann_1d(6, 1.0).unwrap();
        assert!((k * Vector::from_element(6, 1.0)).amax() == 0.0);
    }

    #[test]
    fn constant_velocity_divergence_touches_boundary_cells_only() {
        let ops = mac_stokes_operators(4, 3).unwrap();
        let d = &ops.div * Vector::from_element(ops.n_velocity(), 1.0);
        for j in 0..3 {
            for i in 0..4 {
                let interior = i > 0 && i < 3 && j > 0 && j < 2;
                if interior {
                    assert_eq!(d[j * 4 + i], 0.0);
                }
            }
        }
        assert!(d.amax() > 0.0);
    }

    #[test]
    fn stream_function_velocity_is_divergence_free() {
        let ops = mac_stokes_operators(5, 4).unwrap();
        let (nx, ny) = (5, 4);
        let psi = |i: usize, j: usize| {
            let (x, y) = (i as f64 / nx as f64, j as f64 / ny as f64);
            (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin()
        };
        let mut vel = Vector::zeros(ops.n_velocity());
        for j in 0..ny {
            for i in 1..nx {
                vel[ops.u_index(i, j)] = (psi(i, j + 1) - psi(i, j)) * ny as f64;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                vel[ops.v_index(i, j)] = -(psi(i + 1, j) - psi(i, j)) * nx as f64;
            }
        }
        assert!((&ops.div * vel).amax() < 1e-12);
    }
}
