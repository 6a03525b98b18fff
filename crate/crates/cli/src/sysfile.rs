//! User-defined systems as TOML documents.
//!
//! ```toml
//! J = [[0.0, 1.0], [-1.0, 0.0]]
//! R = [[0.0, 0.0], [0.0, 0.1]]
//! B = [[0.0], [1.0]]
//! z0 = [1.0, 0.0]
//!
//! [dims]
//! n1 = 0
//! n2 = 2
//! n3 = 0
//! m = 1
//!
//! [energy]
//! kind = "quadratic"
//! m1 = []
//! m2 = [[1.0, 0.0], [0.0, 1.0]]
//! ```
//!
//! Matrices are arrays of rows. An optional `[input]` table holds the
//! default input signal.

use std::path::Path;

use dissipact::energy::{AugmentedQuadraticEnergy, DoubleWellLatticeEnergy, QuadraticEnergy};
use dissipact::{assemble, EnergyModel, Error, InputSignal, Matrix, StatePartition, StructuredSystem, SystemDims, Vector};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsSection {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnergySpec {
    /// `½⟨z1, m1 z1⟩ + ⟨z1, m12 z2⟩ + ½⟨z2, m2 z2⟩`.
    Quadratic {
        m1: Rows,
        m2: Rows,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m12: Option<Rows>,
    },
    DoubleWell {
        stiffness: Rows,
        well_weight: f64,
        weights: Vec<f64>,
        /// Sizes of the `z1` and `z2` parts of the lattice variable.
        split: [usize; 2],
    },
    /// `½⟨y, mass y⟩ + ½⟨x, stiffness x⟩ + ⟨λ, constraint x − offset⟩` on `z1 = [x; y; λ]`.
    AugmentedQuadratic { stiffness: Rows, mass: Rows, constraint: Rows, offset: Vec<f64> },
}

/// The on-disk form of a system with its initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(rename = "J")]
    pub j: Rows,
    #[serde(rename = "R")]
    pub r: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    pub z0: Vec<f64>,
    pub dims: DimsSection,
    pub energy: EnergySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSignal>,
}

/// An assembled and validated system file.
#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub system: StructuredSystem,
    pub z0: StatePartition,
    pub input: InputSignal,
}

fn rows_of(m: &Matrix) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(what: &str, rows: &Rows, nrows: usize, ncols: usize) -> Result<Matrix, Error> {
    let mismatch = |found: String| Error::DimensionMismatch {
        what: what.to_string(),
        expected: format!("{nrows}x{ncols}"),
        found,
    };
    if rows.len() != nrows {
        return Err(mismatch(format!("{} rows", rows.len())));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(mismatch(format!("a row of length {}", bad.len())));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Square matrix whose size is read off the rows.
fn square(what: &str, rows: &Rows) -> Result<Matrix, Error> {
    matrix(what, rows, rows.len(), rows.len())
}

impl EnergySpec {
    fn from_model(e: &EnergyModel) -> Result<Self, CliError> {
        Ok(match e {
            EnergyModel::Quadratic(q) => EnergySpec::Quadratic {
                m1: rows_of(q.m1()),
                m2: rows_of(q.m2()),
                m12: q.coupling().map(rows_of),
            },
            EnergyModel::DoubleWellLattice(d) => EnergySpec::DoubleWell {
                stiffness: rows_of(d.stiffness()),
                well_weight: d.well_weight(),
                weights: d.weights().iter().copied().collect(),
                split: [d.split().0, d.split().1],
            },
            EnergyModel::AugmentedQuadratic(a) => EnergySpec::AugmentedQuadratic {
                stiffness: rows_of(a.stiffness()),
                mass: rows_of(a.mass()),
                constraint: rows_of(a.constraint()),
                offset: a.offset().iter().copied().collect(),
            },
            other => {
                return Err(CliError::invalid(
                    "energy",
                    format!("{} energies have no file representation", other.kind_name()),
                ))
            }
        })
    }

    fn build(&self) -> Result<EnergyModel, Error> {
        Ok(match self {
            EnergySpec::Quadratic { m1, m2, m12 } => {
                let (m1, m2) = (square("energy.m1", m1)?, square("energy.m2", m2)?);
                let mut q = QuadraticEnergy::new(m1.clone(), m2.clone())?;
                if let Some(c) = m12 {
                    q = q.with_coupling(matrix("energy.m12", c, m1.nrows(), m2.nrows())?)?;
                }
                q.into()
            }
            EnergySpec::DoubleWell { stiffness, well_weight, weights, split } => DoubleWellLatticeEnergy::new(
                square("energy.stiffness", stiffness)?,
                *well_weight,
                Vector::from_column_slice(weights),
                (split[0], split[1]),
            )?
            .into(),
            EnergySpec::AugmentedQuadratic { stiffness, mass, constraint, offset } => {
                let k = square("energy.stiffness", stiffness)?;
                AugmentedQuadraticEnergy::new(
                    k.clone(),
                    square("energy.mass", mass)?,
                    matrix("energy.constraint", constraint, offset.len(), k.nrows())?,
                    Vector::from_column_slice(offset),
                )?
                .into()
            }
        })
    }
}

impl SystemFile {
    pub fn from_system(system: &StructuredSystem, z0: &StatePartition, input: Option<&InputSignal>) -> Result<Self, CliError> {
        let d = system.system_dims();
        Ok(Self {
            j: rows_of(system.j()),
            r: rows_of(system.r()),
            b: rows_of(system.b()),
            z0: z0.as_vector().iter().copied().collect(),
            dims: DimsSection { n1: d.n1, n2: d.n2, n3: d.n3, m: d.m },
            energy: EnergySpec::from_model(system.energy_model())?,
            input: input.cloned(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("system files serialize to TOML")
    }

    /// Assembles the system; the structure is validated on the way.
    pub fn build(&self) -> Result<LoadedSystem, CliError> {
        let d = SystemDims::new(self.dims.n1, self.dims.n2, self.dims.n3, self.dims.m)?;
        let n = d.n();
        let j = matrix("J", &self.j, n, n)?;
        let r = matrix("R", &self.r, n, n)?;
        let b = matrix("B", &self.b, n, d.m)?;
        let energy = self.energy.build()?;
        let system = assemble(d, j, r, b, energy)?;
        let z0 = StatePartition::new(d, Vector::from_column_slice(&self.z0))?;
        let input = self.input.clone().unwrap_or(InputSignal::zero(d.m));
        input.check()?;
        if input.dim() != d.m {
            return Err(Error::DimensionMismatch {
                what: "input".into(),
                expected: d.m.to_string(),
                found: input.dim().to_string(),
            }
            .into());
        }
        Ok(LoadedSystem { system, z0, input })
    }
}

pub fn parse_system_file(text: &str) -> Result<LoadedSystem, CliError> {
    let file: SystemFile = toml::from_str(text).map_err(|e| CliError::from_toml(text, e))?;
    file.build()
}

pub fn load_system_file(path: &Path) -> Result<LoadedSystem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_system_file(&text)
}
