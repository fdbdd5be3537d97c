use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Unit-vector tolerance for analyzer directions.
pub const UNIT_TOL: f64 = 1e-12;

/// Spin-analyzer directions for the species-1 and species-2 particles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerPair {
    pub n1: [f64; 3],
    pub n2: [f64; 3],
}

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl AnalyzerPair {
    /// Both directions must be unit vectors within [`UNIT_TOL`].
    pub fn new(n1: [f64; 3], n2: [f64; 3]) -> Result<Self> {
        let pair = AnalyzerPair { n1, n2 };
        pair.validate()?;
        Ok(pair)
    }

    /// Normalises the inputs first; zero vectors are rejected.
    pub fn normalized(n1: [f64; 3], n2: [f64; 3]) -> Result<Self> {
        let unit = |v: [f64; 3]| -> Result<[f64; 3]> {
            let n = norm(&v);
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::Precondition(format!("analyzer direction {v:?} has no direction")));
            }
            Ok([v[0] / n, v[1] / n, v[2] / n])
        };
        Self::new(unit(n1)?, unit(n2)?)
    }

    /// Directions from polar and azimuthal angles.
    pub fn from_angles(theta1: f64, phi1: f64, theta2: f64, phi2: f64) -> Self {
        let dir = |t: f64, p: f64| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
        AnalyzerPair { n1: dir(theta1, phi1), n2: dir(theta2, phi2) }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("n1", &self.n1), ("n2", &self.n2)] {
            let dev = (norm(v) - 1.0).abs();
            if !(dev <= UNIT_TOL) {
                return Err(Error::Precondition(format!("analyzer {name} = {v:?} is not a unit vector (|n| - 1 = {dev:e})")));
            }
        }
        Ok(())
    }

    /// n1 · n2
    pub fn dot(&self) -> f64 {
        self.n1[0] * self.n2[0] + self.n1[1] * self.n2[1] + self.n1[2] * self.n2[2]
    }

    /// n1z · n2z
    pub fn zz(&self) -> f64 {
        self.n1[2] * self.n2[2]
    }
}

/// −(1 − s)·n1z n2z − s·n1·n2, the correlation with entanglement weight `s`.
pub fn correlation_with_weight(weight: f64, analyzers: &AnalyzerPair) -> f64 {
    -(1.0 - weight) * analyzers.zz() - weight * analyzers.dot()
}

/// Closed-form correlation after entangling angle `gamma`: weight sin 2γ.
pub fn correlation_closed_form(gamma: f64, analyzers: &AnalyzerPair) -> f64 {
    correlation_with_weight((2.0 * gamma).sin(), analyzers)
}

/// One measured (or computed) correlation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSample {
    pub analyzers: AnalyzerPair,
    pub value: f64,
}

impl CorrelationSample {
    /// Exact correlations lie in [−1, 1]; values outside by more than 1e−9
    /// are rejected. Noisy measurements can be built from the public fields.
    pub fn new(analyzers: AnalyzerPair, value: f64) -> Result<Self> {
        if !(value.abs() <= 1.0 + 1e-9) {
            return Err(Error::Domain(format!("correlation {value} outside [-1, 1]")));
        }
        Ok(CorrelationSample { analyzers, value })
    }
}

/// Deterministic, roughly uniform directions on the sphere (Fibonacci lattice).
pub fn sphere_grid(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unit() {
        assert!(matches!(AnalyzerPair::new([1.0, 0.0, 0.0], [0.0, 2.0, 0.0]), Err(Error::Precondition(_))));
        assert!(AnalyzerPair::normalized([0.0; 3], [1.0, 0.0, 0.0]).is_err());
        let p = AnalyzerPair::normalized([3.0, 0.0, 4.0], [0.0, 0.0, -2.0]).unwrap();
        assert!((p.zz() + 0.8).abs() < 1e-15);
    }

    #[test]
    fn sphere_grid_is_unit() {
        for v in sphere_grid(37) {
            assert!((norm(&v) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_endpoints() {
        let p = AnalyzerPair::new([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(correlation_closed_form(0.0, &p), -1.0);
        let q = AnalyzerPair::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        assert!(correlation_closed_form(std::f64::consts::FRAC_PI_4, &q).abs() < 1e-15);
    }

    #[test]
    fn sample_range() {
        let p = AnalyzerPair::new([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]).unwrap();
        assert!(CorrelationSample::new(p, -1.0 - 1e-12).is_ok());
        assert!(CorrelationSample::new(p, 1.1).is_err());
    }
}
