//! Space-time profiles of the coupling κ(x, t).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Time dependence of a spatially uniform coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile {
    Constant { value: f64 },
    /// offset + slope·t
    Linear { offset: f64, slope: f64 },
    /// amplitude·exp(−(t − center)²/(2 width²))
    GaussianPulse { amplitude: f64, center: f64, width: f64 },
}

impl TimeProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TimeProfile::Constant { value } => value.is_finite(),
            TimeProfile::Linear { offset, slope } => offset.is_finite() && slope.is_finite(),
            TimeProfile::GaussianPulse { amplitude, center, width } => {
                amplitude.is_finite() && center.is_finite() && width > 0.0 && width.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid time profile {self:?}")))
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant { value } => value,
            TimeProfile::Linear { offset, slope } => offset + slope * t,
            TimeProfile::GaussianPulse { amplitude, center, width } => {
                amplitude * (-(t - center).powi(2) / (2.0 * width * width)).exp()
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant { .. } => 0.0,
            TimeProfile::Linear { slope, .. } => slope,
            TimeProfile::GaussianPulse { width, center, .. } => -(t - center) / (width * width) * self.value(t),
        }
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant { .. } | TimeProfile::Linear { .. } => 0.0,
            TimeProfile::GaussianPulse { width, center, .. } => {
                let w2 = width * width;
                ((t - center).powi(2) / (w2 * w2) - 1.0 / w2) * self.value(t)
            }
        }
    }

    /// Times at which the integrand may change character.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            TimeProfile::GaussianPulse { center, width, .. } => vec![center - width, center, center + width],
            _ => Vec::new(),
        }
    }

    /// Whether κ(t) ≥ 0 on [a, b].
    pub fn nonnegative_on(&self, a: f64, b: f64) -> bool {
        match *self {
            TimeProfile::Constant { value } => value >= 0.0,
            TimeProfile::Linear { .. } => self.value(a) >= 0.0 && self.value(b) >= 0.0,
            TimeProfile::GaussianPulse { amplitude, .. } => amplitude >= 0.0,
        }
    }
}

/// Regular 3-D grid of sample nodes; each node stands for one cell of volume
/// Π spacing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub shape: [usize; 3],
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) || self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::Precondition(format!("grid spacing must be positive and finite: {self:?}")));
        }
        if self.shape.contains(&0) {
            return Err(Error::Precondition(format!("grid shape has an empty axis: {:?}", self.shape)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Coordinates of node `index` (x fastest).
    pub fn node(&self, index: usize) -> [f64; 3] {
        let i = index % self.shape[0];
        let j = (index / self.shape[0]) % self.shape[1];
        let k = index / (self.shape[0] * self.shape[1]);
        let idx = [i, j, k];
        std::array::from_fn(|d| self.origin[d] + idx[d] as f64 * self.spacing[d])
    }

    pub fn nodes(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(|n| self.node(n))
    }

    pub fn translated(&self, shift: [f64; 3]) -> GridSpec {
        GridSpec { origin: std::array::from_fn(|d| self.origin[d] + shift[d]), ..self.clone() }
    }
}

/// κ(x, t).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingProfile {
    /// κ δ³(x − location) δ(t − time).
    PointImpulse { strength: f64, location: [f64; 3], time: f64 },
    /// κ(t), the same everywhere.
    Uniform { profile: TimeProfile },
    /// Node samples `values[k][n]` at `times[k]`, linear in time between
    /// samples and zero outside them. A single sample is held constant.
    SampledGrid { grid: GridSpec, times: Vec<f64>, values: Vec<Vec<f64>> },
}

impl CouplingProfile {
    pub fn constant(value: f64) -> Self {
        CouplingProfile::Uniform { profile: TimeProfile::Constant { value } }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CouplingProfile::PointImpulse { strength, location, time } => {
                if !(strength.is_finite() && time.is_finite() && location.iter().all(|v| v.is_finite())) {
                    return Err(Error::Precondition("point impulse parameters must be finite".into()));
                }
                Ok(())
            }
            CouplingProfile::Uniform { profile } => profile.validate(),
            CouplingProfile::SampledGrid { grid, times, values } => {
                grid.validate()?;
                if times.is_empty() {
                    return Err(Error::Precondition("sampled coupling has no time samples".into()));
                }
                if times.len() != values.len() {
                    return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Precondition("sample times must be strictly increasing".into()));
                }
                for v in values {
                    if v.len() != grid.len() {
                        return Err(Error::DimensionMismatch { expected: grid.len(), found: v.len() });
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::Precondition("coupling samples must be finite".into()));
                    }
                }
                Ok(())
            }
        }
    }

    /// Interpolation weights `(k, w)` over time samples at `t`.
    pub(crate) fn sample_weights(times: &[f64], t: f64) -> Vec<(usize, f64)> {
        if times.len() == 1 {
            return vec![(0, 1.0)];
        }
        let (first, last) = (times[0], times[times.len() - 1]);
        if t < first || t > last {
            return Vec::new();
        }
        let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
        let (a, b) = (times[k - 1], times[k]);
        let w = (t - a) / (b - a);
        vec![(k - 1, 1.0 - w), (k, w)]
    }

    /// Whether κ is nonnegative everywhere on the window.
    pub fn nonnegative_on(&self, t0: f64, t: f64) -> bool {
        match self {
            CouplingProfile::PointImpulse { strength, .. } => *strength >= 0.0,
            CouplingProfile::Uniform { profile } => profile.nonnegative_on(t0, t),
            CouplingProfile::SampledGrid { values, .. } => values.iter().flatten().all(|&v| v >= 0.0),
        }
    }

    /// Same profile moved by `shift` in space.
    pub fn translated(&self, shift: [f64; 3]) -> CouplingProfile {
        match self {
            CouplingProfile::PointImpulse { strength, location, time } => CouplingProfile::PointImpulse {
                strength: *strength,
                location: std::array::from_fn(|d| location[d] + shift[d]),
                time: *time,
            },
            CouplingProfile::Uniform { .. } => self.clone(),
            CouplingProfile::SampledGrid { grid, times, values } => CouplingProfile::SampledGrid {
                grid: grid.translated(shift),
                times: times.clone(),
                values: values.clone(),
            },
        }
    }
}
