//! Least-squares estimate of sin 2γ from measured correlations.
//!
//! With `y = C + n1z n2z` and `x = n1z n2z − n1·n2`, the model is `y = s·x`,
//! fitted through the origin.

use serde::{Deserialize, Serialize};

use super::analyzers::CorrelationSample;
use crate::{Error, Result};

/// Σx² below this (per sample) leaves the slope undetermined.
pub const RANK_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Fitted sin 2γ.
    pub two_gamma: f64,
    /// Euclidean norm of the residual vector.
    pub residual: f64,
    /// Standard error of the slope; zero with exactly two samples and a perfect fit.
    pub standard_error: f64,
    pub samples: usize,
}

impl FitReport {
    /// The entangling angle γ, if the fitted value lies in [−1, 1].
    pub fn gamma(&self) -> Option<f64> {
        (self.two_gamma.abs() <= 1.0).then(|| 0.5 * self.two_gamma.asin())
    }
}

/// Regressor and response for one sample.
pub fn design_point(s: &CorrelationSample) -> (f64, f64) {
    let a = &s.analyzers;
    let zz = a.zz();
    (zz - a.dot(), s.value + zz)
}

pub fn fit_two_gamma(samples: &[CorrelationSample]) -> Result<FitReport> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Estimation(format!("need at least 2 samples, got {n}")));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(design_point).collect();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    if sxx <= RANK_TOL * n as f64 {
        return Err(Error::Estimation(format!(
            "analyzer settings do not determine the slope (sum of squared regressors {sxx:.3e})"
        )));
    }
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let slope = sxy / sxx;
    let residual = pts.iter().map(|(x, y)| (y - slope * x).powi(2)).sum::<f64>().sqrt();
    let sigma = residual / ((n - 1) as f64).sqrt();
    Ok(FitReport { two_gamma: slope, residual, standard_error: sigma / sxx.sqrt(), samples: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eprb::analyzers::{correlation_closed_form, AnalyzerPair};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal, UnitSphere};

    fn random_pair(rng: &mut ChaCha8Rng) -> AnalyzerPair {
        let a: [f64; 3] = UnitSphere.sample(rng);
        let b: [f64; 3] = UnitSphere.sample(rng);
        AnalyzerPair::normalized(a, b).unwrap()
    }

    #[test]
    fn recovers_exact_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let gamma = 0.37;
        let samples: Vec<_> = (0..40)
            .map(|_| {
                let a = random_pair(&mut rng);
                CorrelationSample::new(a, correlation_closed_form(gamma, &a)).unwrap()
            })
            .collect();
        let fit = fit_two_gamma(&samples).unwrap();
        assert!((fit.two_gamma - (2.0 * gamma).sin()).abs() < 1e-13);
        assert!(fit.residual < 1e-12);
        assert!((fit.gamma().unwrap() - gamma).abs() < 1e-12);
    }

    #[test]
    fn noisy_fit_is_within_a_few_standard_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let gamma = 0.2;
        let samples: Vec<_> = (0..500)
            .map(|_| {
                let a = random_pair(&mut rng);
                let c = (correlation_closed_form(gamma, &a) + noise.sample(&mut rng)).clamp(-1.0, 1.0);
                CorrelationSample::new(a, c).unwrap()
            })
            .collect();
        let fit = fit_two_gamma(&samples).unwrap();
        assert!(fit.standard_error > 0.0);
        assert!((fit.two_gamma - (2.0 * gamma).sin()).abs() < 5.0 * fit.standard_error);
    }

    #[test]
    fn too_few_samples() {
        let a = AnalyzerPair::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        let s = CorrelationSample::new(a, 0.0).unwrap();
        assert!(matches!(fit_two_gamma(&[s]), Err(Error::Estimation(_))));
        assert!(matches!(fit_two_gamma(&[]), Err(Error::Estimation(_))));
    }

    #[test]
    fn parallel_z_analyzers_are_degenerate() {
        // n1 = n2 = ±z gives x = 0 for every sample.
        let up = AnalyzerPair::new([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]).unwrap();
        let down = AnalyzerPair::new([0.0, 0.0, -1.0], [0.0, 0.0, -1.0]).unwrap();
        let s = [CorrelationSample::new(up, -1.0).unwrap(), CorrelationSample::new(down, -1.0).unwrap()];
        assert!(matches!(fit_two_gamma(&s), Err(Error::Estimation(_))));
    }
}
