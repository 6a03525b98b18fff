//! Run configuration: a TOML document with top-level run options and the
//! sections `model`, `grid`, `input`, `solver` and `outputs`.
//!
//! ```toml
//! scheme = "discrete-gradient"
//! check = "full"
//!
//! [model]
//! name = "cahn_hilliard"
//! grid = 16
//! params = { epsilon = 0.1 }
//!
//! [grid]
//! tau = 0.1
//! t_end = 20.0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use dissipact::integrators::{Scheme, SolverOptions, TimeGrid};
use dissipact::zoo::{describe, ModelSpec};
use dissipact::{DiscreteGradientKind, InputSignal};
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    #[default]
    Midpoint,
    DiscreteGradient,
}

/// Which certificates decide the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckLevel {
    None,
    /// The dissipation inequality at every step.
    #[default]
    Dissipation,
    /// Dissipation, power balance, structure, gradient self-check and
    /// stage constraint residuals.
    Full,
}

/// Either a zoo model or a system file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    Zoo(ModelSpec),
    SystemFile(PathBuf),
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    system: Option<PathBuf>,
}

impl Serialize for ModelSource {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let section = match self {
            ModelSource::Zoo(spec) => ModelSection {
                name: Some(spec.name.clone()),
                params: spec.params.clone(),
                grid: spec.grid,
                system: None,
            },
            ModelSource::SystemFile(p) => ModelSection { system: Some(p.clone()), ..Default::default() },
        };
        section.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModelSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ModelSource;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a model name or a table with `name` or `system`")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ModelSource, E> {
                Ok(ModelSource::Zoo(ModelSpec::new(v)))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<ModelSource, A::Error> {
                let s = ModelSection::deserialize(de::value::MapAccessDeserializer::new(map))?;
                match (s.name, s.system) {
                    (Some(name), None) => Ok(ModelSource::Zoo(ModelSpec { name, params: s.params, grid: s.grid })),
                    (None, Some(path)) if s.params.is_empty() && s.grid.is_none() => Ok(ModelSource::SystemFile(path)),
                    (None, Some(_)) => Err(de::Error::custom("`params` and `grid` apply to zoo models only")),
                    _ => Err(de::Error::custom("give exactly one of `name` or `system`")),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub t0: f64,
    pub t_end: f64,
    pub tau: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { t0: 0.0, t_end: 1.0, tau: 0.01 }
    }
}

/// Artifacts to write and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub dir: PathBuf,
    pub trajectory_csv: bool,
    pub energy_csv: bool,
    pub report_json: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { dir: PathBuf::from("dissipact-out"), trajectory_csv: true, energy_csv: true, report_json: true }
    }
}

/// A fully resolved simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub scheme: SchemeName,
    /// Construction used when `scheme` is the discrete gradient.
    #[serde(default)]
    pub discrete_gradient: DiscreteGradientKind,
    #[serde(default)]
    pub check: CheckLevel,
    /// Seed of the sampled gradient self-check.
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSource,
    #[serde(default)]
    pub grid: GridSpec,
    /// Defaults to the model's own input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSignal>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub outputs: Outputs,
}

impl RunSpec {
    pub fn new(model: ModelSource) -> Self {
        Self {
            scheme: SchemeName::default(),
            discrete_gradient: DiscreteGradientKind::default(),
            check: CheckLevel::default(),
            seed: 0,
            model,
            grid: GridSpec::default(),
            input: None,
            solver: SolverOptions::default(),
            outputs: Outputs::default(),
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self.scheme {
            SchemeName::Midpoint => Scheme::Midpoint,
            SchemeName::DiscreteGradient => Scheme::DiscreteGradient(self.discrete_gradient),
        }
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        TimeGrid::new(self.grid.t0, self.grid.t_end, self.grid.tau).map_err(|e| CliError::invalid("grid", e.to_string()))
    }

    /// Checks value ranges that the document syntax cannot express.
    pub fn check_values(&self) -> Result<(), CliError> {
        let g = &self.grid;
        if !(g.tau > 0.0) || !g.tau.is_finite() {
            return Err(CliError::invalid("grid.tau", format!("must be positive and finite, got {}", g.tau)));
        }
        if !g.t0.is_finite() || !g.t_end.is_finite() || !(g.t_end > g.t0) {
            return Err(CliError::invalid("grid.t_end", format!("must exceed t0 = {}, got {}", g.t0, g.t_end)));
        }
        self.solver.check().map_err(|e| CliError::invalid("solver", e.to_string()))?;
        if let Some(input) = &self.input {
            input.check().map_err(|e| CliError::invalid("input", e.to_string()))?;
        }
        if let ModelSource::Zoo(spec) = &self.model {
            describe(&spec.name).map_err(|e| CliError::invalid("model.name", e.to_string()))?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run specs serialize to TOML")
    }
}

/// Parses and checks a run configuration.
pub fn parse_config(text: &str) -> Result<RunSpec, CliError> {
    let spec: RunSpec = toml::from_str(text).map_err(|e| CliError::from_toml(text, e))?;
    spec.check_values()?;
    Ok(spec)
}
