//! Time-parameterized inputs `t ↦ u(t) ∈ ℝᵐ`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// An input signal. Components are stored as plain `Vec<f64>` so the type
/// serializes without matrix-library features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSignal {
    Zero { m: usize },
    Constant { value: Vec<f64> },
    /// `u(t) = offset + slope·t`.
    Affine { offset: Vec<f64>, slope: Vec<f64> },
    /// `uᵢ(t) = amplitudeᵢ · sin(ω t + φ)`.
    Sine { amplitude: Vec<f64>, omega: f64, phase: f64 },
    /// Linear interpolation between samples, held constant outside the range.
    PiecewiseLinear { times: Vec<f64>, values: Vec<Vec<f64>> },
    /// Concatenation of independent signals.
    Stacked { parts: Vec<InputSignal> },
}

impl InputSignal {
    pub fn zero(m: usize) -> Self {
        InputSignal::Zero { m }
    }

    pub fn constant(value: &[f64]) -> Self {
        InputSignal::Constant { value: value.to_vec() }
    }

    pub fn sine(amplitude: &[f64], omega: f64, phase: f64) -> Self {
        InputSignal::Sine { amplitude: amplitude.to_vec(), omega, phase }
    }

    pub fn piecewise_linear(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let s = InputSignal::PiecewiseLinear { times, values };
        s.check()?;
        Ok(s)
    }

    /// Checks internal consistency (matching lengths, sorted sample times).
    pub fn check(&self) -> Result<()> {
        match self {
            InputSignal::Zero { .. } | InputSignal::Constant { .. } => Ok(()),
            InputSignal::Affine { offset, slope } => {
                if offset.len() != slope.len() {
                    return Err(Error::InvalidParams("affine input: offset and slope lengths differ".into()));
                }
                Ok(())
            }
            InputSignal::Sine { omega, phase, .. } => {
                if !omega.is_finite() || !phase.is_finite() {
                    return Err(Error::InvalidParams("sine input: omega and phase must be finite".into()));
                }
                Ok(())
            }
            InputSignal::PiecewiseLinear { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::InvalidParams(
                        "piecewise-linear input needs one value per sample time".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidParams("piecewise-linear sample times must increase".into()));
                }
                let m = values[0].len();
                if values.iter().any(|v| v.len() != m) {
                    return Err(Error::InvalidParams("piecewise-linear samples differ in length".into()));
                }
                Ok(())
            }
            InputSignal::Stacked { parts } => parts.iter().try_for_each(|p| p.check()),
        }
    }

    /// Port dimension `m`.
    pub fn dim(&self) -> usize {
        match self {
            InputSignal::Zero { m } => *m,
            InputSignal::Constant { value } => value.len(),
            InputSignal::Affine { offset, .. } => offset.len(),
            InputSignal::Sine { amplitude, .. } => amplitude.len(),
            InputSignal::PiecewiseLinear { values, .. } => values.first().map_or(0, |v| v.len()),
            InputSignal::Stacked { parts } => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    pub fn eval(&self, t: f64) -> Vector {
        match self {
            InputSignal::Zero { m } => Vector::zeros(*m),
            InputSignal::Constant { value } => Vector::from_column_slice(value),
            InputSignal::Affine { offset, slope } => {
                Vector::from_iterator(offset.len(), offset.iter().zip(slope).map(|(a, b)| a + b * t))
            }
            InputSignal::Sine { amplitude, omega, phase } => {
                let s = (omega * t + phase).sin();
                Vector::from_iterator(amplitude.len(), amplitude.iter().map(|a| a * s))
            }
            InputSignal::PiecewiseLinear { times, values } => interpolate(times, values, t),
            InputSignal::Stacked { parts } => {
                let blocks: Vec<Vector> = parts.iter().map(|p| p.eval(t)).collect();
                let refs: Vec<&Vector> = blocks.iter().collect();
                crate::linalg::vstack(&refs)
            }
        }
    }

    /// Exact time derivative. Sampled signals have none and are rejected.
    pub fn derivative(&self) -> Result<InputSignal> {
        match self {
            InputSignal::Zero { m } => Ok(InputSignal::Zero { m: *m }),
            InputSignal::Constant { value } => Ok(InputSignal::Zero { m: value.len() }),
            InputSignal::Affine { slope, .. } => Ok(InputSignal::Constant { value: slope.clone() }),
            InputSignal::Sine { amplitude, omega, phase } => Ok(InputSignal::Sine {
                amplitude: amplitude.iter().map(|a| a * omega).collect(),
                omega: *omega,
                phase: phase + FRAC_PI_2,
            }),
            InputSignal::PiecewiseLinear { .. } => Err(Error::NotDifferentiable(
                "piecewise-linear samples have no analytic derivative".into(),
            )),
            InputSignal::Stacked { parts } => Ok(InputSignal::Stacked {
                parts: parts.iter().map(|p| p.derivative()).collect::<Result<_>>()?,
            }),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            InputSignal::Zero { .. } => true,
            InputSignal::Constant { value } => value.iter().all(|v| *v == 0.0),
            InputSignal::Affine { offset, slope } => offset.iter().chain(slope).all(|v| *v == 0.0),
            InputSignal::Sine { amplitude, .. } => amplitude.iter().all(|v| *v == 0.0),
            InputSignal::PiecewiseLinear { values, .. } => values.iter().flatten().all(|v| *v == 0.0),
            InputSignal::Stacked { parts } => parts.iter().all(|p| p.is_zero()),
        }
    }
}

fn interpolate(times: &[f64], values: &[Vec<f64>], t: f64) -> Vector {
    let m = values.first().map_or(0, |v| v.len());
    if times.is_empty() {
        return Vector::zeros(m);
    }
    if t <= times[0] {
        return Vector::from_column_slice(&values[0]);
    }
    let last = times.len() - 1;
    if t >= times[last] {
        return Vector::from_column_slice(&values[last]);
    }
    let k = times.partition_point(|s| *s <= t) - 1;
    let w = (t - times[k]) / (times[k + 1] - times[k]);
    Vector::from_iterator(m, (0..m).map(|i| (1.0 - w) * values[k][i] + w * values[k + 1][i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_clamping() {
        let s = InputSignal::piecewise_linear(vec![0.0, 1.0, 3.0], vec![vec![0.0], vec![2.0], vec![0.0]]).unwrap();
        assert_eq!(s.eval(-1.0)[0], 0.0);
        assert_eq!(s.eval(0.5)[0], 1.0);
        assert_eq!(s.eval(2.0)[0], 1.0);
        assert_eq!(s.eval(10.0)[0], 0.0);
        assert!(s.derivative().is_err());
    }

    #[test]
    fn unsorted_samples_rejected() {
        assert!(InputSignal::piecewise_linear(vec![1.0, 0.0], vec![vec![0.0], vec![1.0]]).is_err());
    }

    #[test]
    fn sine_derivative_matches_finite_difference() {
        let s = InputSignal::sine(&[2.0, -1.0], 3.0, 0.4);
        let d = s.derivative().unwrap();
        let h = 1e-6;
        for t in [0.0, 0.3, 1.7] {
            let fd = (s.eval(t + h) - s.eval(t - h)) / (2.0 * h);
            assert!((fd - d.eval(t)).amax() < 1e-8);
        }
    }

    #[test]
    fn stacked_dimension() {
        let s = InputSignal::Stacked { parts: vec![InputSignal::zero(2), InputSignal::constant(&[1.0])] };
        assert_eq!(s.dim(), 3);
        assert_eq!(s.eval(0.0).as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(s.derivative().unwrap().eval(5.0).as_slice(), &[0.0, 0.0, 0.0]);
    }
}
