//! Gaussian wavepackets and their free evolution.

use serde::{Deserialize, Serialize};

use super::green::greens_function_1d;
use crate::quadrature::{AdaptiveIntegrator, Tolerance};
use crate::{Error, Result, C64};

/// ψ(x) = (α/π)^{3/4} exp(−α|x − center|²/2 + i m velocity·(x − center)),
/// specified at the scenario's start time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wavepacket {
    pub center: [f64; 3],
    pub velocity: [f64; 3],
    /// Width parameter α (inverse length squared).
    pub alpha: f64,
    pub mass: f64,
}

impl Wavepacket {
    pub fn new(center: [f64; 3], velocity: [f64; 3], alpha: f64, mass: f64) -> Result<Self> {
        let wp = Wavepacket { center, velocity, alpha, mass };
        wp.validate()?;
        Ok(wp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Precondition(format!("width parameter must be positive, got {}", self.alpha)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::Precondition(format!("mass must be positive, got {}", self.mass)));
        }
        if self.center.iter().chain(&self.velocity).any(|v| !v.is_finite()) {
            return Err(Error::Precondition("packet center and velocity must be finite".into()));
        }
        Ok(())
    }

    /// Width parameter of |ψ|² after `elapsed`: α/(1 + α²t²/m²).
    pub fn width_param(&self, elapsed: f64) -> f64 {
        let r = self.alpha * elapsed / self.mass;
        self.alpha / (1.0 + r * r)
    }

    /// Center of |ψ|² after `elapsed`.
    pub fn center_at(&self, elapsed: f64) -> [f64; 3] {
        std::array::from_fn(|d| self.center[d] + self.velocity[d] * elapsed)
    }

    /// Initial amplitude along one axis.
    pub fn amplitude_1d(&self, axis: usize, x: f64) -> C64 {
        propagate_gaussian_1d(self, axis, x, 0.0)
    }

    /// Initial amplitude ψ(x).
    pub fn amplitude(&self, x: [f64; 3]) -> C64 {
        propagate_gaussian(self, x, 0.0)
    }

    /// |ψ(x, elapsed)|² from the closed form (A/π)^{3/2} exp(−A|x − c|²).
    pub fn density(&self, x: [f64; 3], elapsed: f64) -> f64 {
        let a = self.width_param(elapsed);
        let c = self.center_at(elapsed);
        let r2: f64 = (0..3).map(|d| (x[d] - c[d]).powi(2)).sum();
        (a / std::f64::consts::PI).powf(1.5) * (-a * r2).exp()
    }
}

/// The packet's component along `axis` after free evolution for `elapsed`.
///
/// With s = 1 + iαt/m this is
/// (α/π)^{1/4} s^{−1/2} exp(−α(x − x₀ − vt)²/(2s) + imv(x − x₀) − imv²t/2).
/// Negative `elapsed` propagates backwards.
pub fn propagate_gaussian_1d(wp: &Wavepacket, axis: usize, x: f64, elapsed: f64) -> C64 {
    let (alpha, m) = (wp.alpha, wp.mass);
    let (x0, v) = (wp.center[axis], wp.velocity[axis]);
    let s = C64::new(1.0, alpha * elapsed / m);
    let u = x - x0 - v * elapsed;
    let exponent = C64::new(-alpha * u * u / 2.0, 0.0) / s + C64::new(0.0, m * v * (x - x0) - m * v * v * elapsed / 2.0);
    (alpha / std::f64::consts::PI).powf(0.25) / s.sqrt() * exponent.exp()
}

/// ∫ψ(x′) G(x′ − x, elapsed) d³x′ in closed form.
pub fn propagate_gaussian(wp: &Wavepacket, x: [f64; 3], elapsed: f64) -> C64 {
    (0..3).map(|d| propagate_gaussian_1d(wp, d, x[d], elapsed)).product()
}

/// One propagation bracket ∫ψ(x′) G(x′ − x, elapsed) dx′ along `axis`, by
/// direct quadrature of the oscillatory integrand. Used to validate the
/// closed form.
pub fn bracket_by_quadrature(wp: &Wavepacket, axis: usize, x: f64, elapsed: f64) -> Result<C64> {
    let half = 14.0 / wp.alpha.sqrt();
    let x0 = wp.center[axis];
    let q = AdaptiveIntegrator::new(Tolerance::new(1e-13, 1e-11)).with_max_panels(20_000);
    let est = q.try_integrate_with_breaks(x0 - half, x0 + half, &[x0], |xp| {
        Ok(wp.amplitude_1d(axis, xp) * greens_function_1d(xp - x, elapsed, wp.mass)?)
    })?;
    Ok(est.value)
}
