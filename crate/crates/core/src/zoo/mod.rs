//! Ready-to-run reference models with consistent initial data.
//!
//! Every model is built from a [`ModelSpec`]: a name, a map of scalar
//! parameters (unknown keys are rejected, physical constants must be
//! positive) and an optional spatial resolution for the discretized PDEs.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input::InputSignal;
use crate::linalg::{Matrix, Vector};
use crate::system::{StatePartition, StructuredSystem};

mod circuits;
mod constrained;
mod continuum;
pub mod discretization;
mod lumped;

pub use constrained::{derivative_constraint_input, ggl_input, index2_constraint_input};
pub use discretization::{
    difference_dirichlet_1d, laplacian_dirichlet_1d, mac_stokes_operators, stiffness_neumann_1d, MacOperators,
};

/// Declarative description of a model instance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = Some(grid);
        self
    }
}

/// Closed-form state `z(t)`.
pub type Oracle = Arc<dyn Fn(f64) -> Vector + Send + Sync>;

#[derive(Clone)]
pub struct ZooModel {
    pub name: &'static str,
    pub system: StructuredSystem,
    pub z0: StatePartition,
    pub default_input: InputSignal,
    pub oracle: Option<Oracle>,
    /// Human-readable summary including every parameter value used.
    pub notes: String,
    pub default_tau: f64,
    pub params: BTreeMap<String, f64>,
    pub grid: Option<usize>,
}

impl fmt::Debug for ZooModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZooModel")
            .field("name", &self.name)
            .field("dims", &self.system.system_dims())
            .field("energy", &self.system.energy_model().kind_name())
            .field("default_tau", &self.default_tau)
            .field("oracle", &self.oracle.is_some())
            .field("notes", &self.notes)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    /// Strictly positive physical constant.
    Positive,
    NonNegative,
    /// Any finite value (initial data, offsets).
    Real,
    /// `0` or `1`.
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamDef {
    pub name: &'static str,
    pub default: f64,
    pub kind: ParamKind,
    pub help: &'static str,
}

const fn param(name: &'static str, default: f64, kind: ParamKind, help: &'static str) -> ParamDef {
    ParamDef { name, default, kind, help }
}

/// Static description of a zoo entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamDef],
    /// Default spatial resolution; `None` for lumped models.
    pub grid: Option<usize>,
    /// Smallest accepted resolution.
    pub min_grid: usize,
}

use ParamKind::*;

const MECH_PARAMS: &[ParamDef] = &[
    param("mass", 1.0, Positive, "scale of the mass matrix"),
    param("stiffness", 1.0, Positive, "scale of the stiffness matrix"),
    param("damping", 0.1, NonNegative, "scale of the damping matrix"),
];

const INDEX2_PARAMS: &[ParamDef] = &[
    param("mass", 1.0, Positive, "scale of the mass matrix"),
    param("stiffness", 1.0, Positive, "scale of the stiffness matrix"),
];

static MODELS: &[ModelInfo] = &[
    ModelInfo {
        name: "ph_iso",
        summary: "mass-spring-damper in canonical port-Hamiltonian form, force input",
        params: &[
            param("stiffness", 1.0, Positive, "spring constant k"),
            param("mass", 1.0, Positive, "mass m"),
            param("damping", 0.1, NonNegative, "damping c; 0 gives the conservative oscillator"),
            param("q0", 1.0, Real, "initial displacement"),
            param("p0", 0.0, Real, "initial momentum"),
        ],
        grid: None,
        min_grid: 0,
    },
    ModelInfo {
        name: "gradient_flow",
        summary: "gradient system J = 0, R = friction·mass on a 1-D Dirichlet grid",
        params: &[
            param("friction", 1.0, Positive, "scale of R"),
            param("double_well", 0.0, Flag, "1 adds the double-well potential"),
            param("epsilon", 0.1, Positive, "interface width for the double-well variant"),
        ],
        grid: Some(8),
        min_grid: 1,
    },
    ModelInfo {
        name: "poroelasticity",
        summary: "linear poroelasticity, displacement and pressure on a 1-D grid",
        params: &[
            param("elasticity", 1.0, Positive, "scale of the elasticity matrix A"),
            param("permeability", 1.0, Positive, "scale of the conductivity matrix B"),
            param("storage", 1.0, Positive, "storage coefficient, C = storage·I"),
            param("coupling", 1.0, Positive, "Biot coupling scale of D"),
        ],
        grid: Some(8),
        min_grid: 1,
    },
    ModelInfo {
        name: "index1_class",
        summary: "index-1 DAE with a kinematic coupling D and algebraic z1",
        params: &[param("damping", 1.0, NonNegative, "scale of R2")],
        grid: None,
        min_grid: 0,
    },
    ModelInfo {
        name: "index2_semiexplicit",
        summary: "semi-explicit index-2 DAE M u' + A u + Bᵀλ = f, B u = g",
        params: INDEX2_PARAMS,
        grid: None,
        min_grid: 0,
    },
    ModelInfo {
        name: "index2_singular_perturbation",
        summary: "the index-2 DAE with the constraint relaxed by ε λ' = (g − B u)/ε",
        params: &[
            param("mass", 1.0, Positive, "scale of the mass matrix"),
            param("stiffness", 1.0, Positive, "scale of the stiffness matrix"),
            param("epsilon", 1e-2, Positive, "perturbation parameter"),
        ],
        grid: None,
        min_grid: 0,
    },
    ModelInfo {
        name: "index2_derivative_constraint",
        summary: "the index-2 DAE with B u = g replaced by B u' = g'",
        params: INDEX2_PARAMS,
        grid: None,
        min_grid: 0,
    },
    ModelInfo {
        name: "dc_network",
        summary: "DC power network: line, two capacitors, generator and load resistors",
        params: &[
            param("r_g", 1.0, Positive, "generator resistance"),
            param("r_l", 1.0, Positive, "line resistance"),
            param("r_r", 1.0, Positive, "load resistance"),
            param("l", 1.0, Positive, "line inductance"),
            param("c1", 1.0, Positive, "generator-side capacitance"),
            param("c2", 1.0, Positive, "load-side capacitance"),
            param("e_g", 1.0, Real, "amplitude of the default sinusoidal source"),
            param("omega", 1.0, Positive, "frequency of the default source"),
        ],
        grid: None,
        min_grid: 0,
    },
    ModelInfo {
        name: "rlc_nonlinear_circuit",
        summary: "modified nodal analysis of a source-resistor-LC circuit with node potentials",
        params: &[
            param("capacitance", 1.0, Positive, "C"),
            param("inductance", 1.0, Positive, "L"),
            param("conductance", 1.0, Positive, "G of the resistor"),
        ],
        grid: None,
        min_grid: 0,
    },
    ModelInfo {
        name: "mech_nonholonomic",
        summary: "damped spring chain with a velocity-level constraint",
        params: MECH_PARAMS,
        grid: None,
        min_grid: 0,
    },
    ModelInfo {
        name: "mech_ggl",
        summary: "constrained spring chain in stabilized (GGL) form",
        params: MECH_PARAMS,
        grid: None,
        min_grid: 0,
    },
    ModelInfo {
        name: "mech_augmented",
        summary: "constrained spring chain with the constraint added to the energy",
        params: &[
            param("mass", 1.0, Positive, "scale of the mass matrix"),
            param("stiffness", 1.0, Positive, "scale of the stiffness matrix"),
            param("damping", 0.1, NonNegative, "scale of the damping matrix"),
            param("g", 0.0, Real, "constant constraint value in B x = g"),
        ],
        grid: None,
        min_grid: 0,
    },
    ModelInfo {
        name: "vibrating_string",
        summary: "1-D wave equation, momentum and strain on a staggered grid",
        params: &[
            param("density", 1.0, Positive, "mass density ρ"),
            param("tension", 1.0, Positive, "tension T"),
        ],
        grid: Some(32),
        min_grid: 1,
    },
    ModelInfo {
        name: "viscoelastic_stokes",
        summary: "viscoelastic Stokes flow on a staggered grid of the unit square",
        params: &[
            param("density", 1.0, Positive, "ρ"),
            param("viscosity", 1.0, Positive, "η"),
            param("relaxation", 1.0, Positive, "relaxation time ε of the stress"),
        ],
        grid: Some(6),
        min_grid: 2,
    },
    ModelInfo {
        name: "cahn_hilliard",
        summary: "Cahn-Hilliard equation with Neumann boundary, double-well energy",
        params: &[
            param("epsilon", 0.1, Positive, "interface width ε"),
            param("mobility", 1.0, Positive, "mobility σ"),
        ],
        grid: Some(16),
        min_grid: 2,
    },
];

/// Registered model names, in registry order.
pub fn list() -> Vec<&'static str> {
    MODELS.iter().map(|m| m.name).collect()
}

pub fn describe(name: &str) -> Result<&'static ModelInfo> {
    MODELS.iter().find(|m| m.name == name).ok_or_else(|| Error::UnknownModel(name.to_string()))
}

/// Parameter values after defaults and validation.
#[derive(Debug, Clone)]
pub(crate) struct Params {
    values: BTreeMap<String, f64>,
    grid: Option<usize>,
}

impl Params {
    fn resolve(info: &ModelInfo, spec: &ModelSpec) -> Result<Self> {
        for key in spec.params.keys() {
            if !info.params.iter().any(|p| p.name == key) {
                let known: Vec<_> = info.params.iter().map(|p| p.name).collect();
                return Err(Error::InvalidParams(format!(
                    "unknown parameter `{key}` for {} (known: {})",
                    info.name,
                    known.join(", ")
                )));
            }
        }
        let mut values = BTreeMap::new();
        for p in info.params {
            let v = spec.params.get(p.name).copied().unwrap_or(p.default);
            let ok = v.is_finite()
                && match p.kind {
                    Positive => v > 0.0,
                    NonNegative => v >= 0.0,
                    Real => true,
                    Flag => v == 0.0 || v == 1.0,
                };
            if !ok {
                let want = match p.kind {
                    Positive => "a positive number",
                    NonNegative => "a non-negative number",
                    Real => "a finite number",
                    Flag => "0 or 1",
                };
                return Err(Error::InvalidParams(format!("{}.{} must be {want}, got {v}", info.name, p.name)));
            }
            values.insert(p.name.to_string(), v);
        }
        let grid = match (info.grid, spec.grid) {
            (None, Some(_)) => {
                return Err(Error::InvalidParams(format!("{} has no spatial grid", info.name)));
            }
            (Some(_), Some(g)) if g < info.min_grid => {
                return Err(Error::InvalidParams(format!(
                    "{} needs a grid of at least {}, got {g}",
                    info.name, info.min_grid
                )));
            }
            (Some(d), g) => Some(g.unwrap_or(d)),
            (None, None) => None,
        };
        Ok(Self { values, grid })
    }

    pub(crate) fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    pub(crate) fn grid(&self) -> usize {
        self.grid.expect("grid models have a default resolution")
    }

    fn summary(&self) -> String {
        let mut parts: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if let Some(g) = self.grid {
            parts.push(format!("grid={g}"));
        }
        parts.join(", ")
    }
}

/// What each constructor returns; [`build_model`] adds the bookkeeping.
pub(crate) struct Built {
    pub system: StructuredSystem,
    pub z0: StatePartition,
    pub input: InputSignal,
    pub oracle: Option<Oracle>,
    pub tau: f64,
}

impl Built {
    pub(crate) fn new(system: StructuredSystem, z0: Vector, tau: f64) -> Result<Self> {
        let d = system.system_dims();
        Ok(Self {
            z0: StatePartition::new(d, z0)?,
            input: InputSignal::zero(d.m),
            system,
            oracle: None,
            tau,
        })
    }
}

pub fn build_model(spec: &ModelSpec) -> Result<ZooModel> {
    let info = describe(&spec.name)?;
    let p = Params::resolve(info, spec)?;
    let built = match info.name {
        "ph_iso" => lumped::ph_iso(&p),
        "gradient_flow" => lumped::gradient_flow(&p),
        "poroelasticity" => lumped::poroelasticity(&p),
        "index1_class" => lumped::index1_class(&p),
        "index2_semiexplicit" => constrained::index2_semiexplicit(&p),
        "index2_singular_perturbation" => constrained::index2_singular_perturbation(&p),
        "index2_derivative_constraint" => constrained::index2_derivative_constraint(&p),
        "dc_network" => circuits::dc_network(&p),
        "rlc_nonlinear_circuit" => circuits::rlc_circuit(&p),
        "mech_nonholonomic" => constrained::mech_nonholonomic(&p),
        "mech_ggl" => constrained::mech_ggl(&p),
        "mech_augmented" => constrained::mech_augmented(&p),
        "vibrating_string" => continuum::vibrating_string(&p),
        "viscoelastic_stokes" => continuum::viscoelastic_stokes(&p),
        "cahn_hilliard" => continuum::cahn_hilliard(&p),
        other => unreachable!("registered model {other} has no constructor"),
    }?;
    Ok(ZooModel {
        name: info.name,
        notes: format!("{}; {}", info.summary, p.summary()),
        system: built.system,
        z0: built.z0,
        default_input: built.input,
        oracle: built.oracle,
        default_tau: built.tau,
        params: p.values,
        grid: p.grid,
    })
}

/// Builds every registered model with default parameters.
pub fn build_all() -> Result<Vec<ZooModel>> {
    list().into_iter().map(|n| build_model(&ModelSpec::new(n))).collect()
}

/// Copies `m` into `target` with its top-left corner at `(r, c)`.
pub(crate) fn place(target: &mut Matrix, r: usize, c: usize, m: &Matrix) {
    target.view_mut((r, c), (m.nrows(), m.ncols())).copy_from(m);
}

/// Places `m` at `(r, c)` and `−mᵀ` at `(c, r)`.
pub(crate) fn place_skew(target: &mut Matrix, r: usize, c: usize, m: &Matrix) {
    place(target, r, c, m);
    place(target, c, r, &(-m.transpose()));
}

pub(crate) fn diag(values: &[f64]) -> Matrix {
    Matrix::from_diagonal(&Vector::from_row_slice(values))
}

pub(crate) fn inverse(m: &Matrix) -> Matrix {
    m.clone().try_inverse().expect("zoo matrices are invertible by construction")
}
