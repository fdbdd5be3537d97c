//! The first-order entanglement integral
//!
//!   L(t) = 2 ∫_{t0}^{t} dt″ ∫ d³x κ(x, t″) |ψ₁(x, t″)|² |ψ₂(x, t″)|²,
//!
//! evaluated along independent paths, and the correlation it implies.
//!
//! The integrand is written in terms of densities: each pair of propagation
//! brackets, one conjugated, is a freely propagated packet and its conjugate.
//! [`super::wavepacket::bracket_by_quadrature`] checks one bracket directly.

use log::warn;
use serde::{Deserialize, Serialize};

use super::coupling::CouplingProfile;
use super::wavepacket::{propagate_gaussian, propagate_gaussian_1d, Wavepacket};
use crate::eprb::analyzers::{correlation_with_weight, AnalyzerPair};
use crate::quadrature::{AdaptiveIntegrator, Tolerance};
use crate::{Error, Result};

use std::f64::consts::PI;

/// Two packets (species 1 spin up, species 2 spin down), a coupling and a
/// time window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldScenario {
    pub wp1: Wavepacket,
    pub wp2: Wavepacket,
    pub coupling: CouplingProfile,
    pub epsilon: f64,
    pub t0: f64,
    pub t: f64,
    pub analyzers: AnalyzerPair,
}

impl FieldScenario {
    pub fn validate(&self) -> Result<()> {
        self.wp1.validate()?;
        self.wp2.validate()?;
        self.coupling.validate()?;
        self.analyzers.validate()?;
        if !(self.t0.is_finite() && self.t.is_finite()) || self.t < self.t0 {
            return Err(Error::Precondition(format!("need t >= t0, got t0={}, t={}", self.t0, self.t)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Precondition(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        Ok(())
    }

    /// Both packets and the coupling moved by `shift`.
    pub fn translated(&self, shift: [f64; 3]) -> FieldScenario {
        let mv = |wp: &Wavepacket| Wavepacket { center: std::array::from_fn(|d| wp.center[d] + shift[d]), ..*wp };
        FieldScenario { wp1: mv(&self.wp1), wp2: mv(&self.wp2), coupling: self.coupling.translated(shift), ..self.clone() }
    }

    fn relative(&self) -> ([f64; 3], [f64; 3]) {
        let dx = std::array::from_fn(|d| self.wp1.center[d] - self.wp2.center[d]);
        let dv = std::array::from_fn(|d| self.wp1.velocity[d] - self.wp2.velocity[d]);
        (dx, dv)
    }

    /// Time and distance of closest approach of the packet centers, if the
    /// relative velocity is nonzero.
    pub fn closest_approach(&self) -> Option<(f64, f64)> {
        let (dx, dv) = self.relative();
        let v2 = dot(&dv, &dv);
        if v2 == 0.0 {
            return None;
        }
        let tau = -dot(&dv, &dx) / v2;
        let d2 = (dot(&dx, &dx) - dot(&dv, &dx).powi(2) / v2).max(0.0);
        Some((self.t0 + tau, d2.sqrt()))
    }

    fn time_breaks(&self) -> Vec<f64> {
        let mut b = Vec::new();
        if let Some((tm, _)) = self.closest_approach() {
            b.push(tm);
        }
        match &self.coupling {
            CouplingProfile::Uniform { profile } => b.extend(profile.breakpoints()),
            CouplingProfile::SampledGrid { times, .. } => b.extend(times.iter().copied()),
            CouplingProfile::PointImpulse { time, .. } => b.push(*time),
        }
        b
    }

    fn require_shared_shape(&self) -> Result<(f64, f64)> {
        if self.wp1.alpha != self.wp2.alpha || self.wp1.mass != self.wp2.mass {
            return Err(Error::Precondition(
                "the Gaussian closed form needs packets with equal width parameter and mass".into(),
            ));
        }
        Ok((self.wp1.alpha, self.wp1.mass))
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Tolerances for the numerical paths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LSettings {
    pub time: Tolerance,
    pub space: Tolerance,
    /// Spatial boxes extend this many density standard deviations past each center.
    pub box_sigmas: f64,
    pub max_panels: usize,
}

impl Default for LSettings {
    fn default() -> Self {
        LSettings {
            time: Tolerance::new(1e-15, 1e-9),
            space: Tolerance::new(1e-15, 1e-10),
            box_sigmas: 8.0,
            max_panels: 20_000,
        }
    }
}

/// ∫ |ψ₁|²|ψ₂|² dx along one axis, from propagated amplitudes.
fn axis_overlap(s: &FieldScenario, axis: usize, elapsed: f64, set: &LSettings, q: &AdaptiveIntegrator) -> Result<f64> {
    let (a1, a2) = (s.wp1.width_param(elapsed), s.wp2.width_param(elapsed));
    let (c1, c2) = (s.wp1.center_at(elapsed)[axis], s.wp2.center_at(elapsed)[axis]);
    let (w1, w2) = (set.box_sigmas / (2.0 * a1).sqrt(), set.box_sigmas / (2.0 * a2).sqrt());
    let lo = (c1 - w1).min(c2 - w2);
    let hi = (c1 + w1).max(c2 + w2);
    let peak = (a1 * c1 + a2 * c2) / (a1 + a2);
    let est = q.integrate_with_breaks(lo, hi, &[c1, c2, peak], |x| {
        propagate_gaussian_1d(&s.wp1, axis, x, elapsed).norm_sqr() * propagate_gaussian_1d(&s.wp2, axis, x, elapsed).norm_sqr()
    })?;
    Ok(est.value)
}

fn grid_sum(
    coupling: &CouplingProfile,
    t: f64,
    mut density_product: impl FnMut([f64; 3]) -> f64,
) -> f64 {
    let CouplingProfile::SampledGrid { grid, times, values } = coupling else {
        unreachable!("grid sum on a non-grid coupling")
    };
    let weights = CouplingProfile::sample_weights(times, t);
    if weights.is_empty() {
        return 0.0;
    }
    let vol = grid.cell_volume();
    let mut acc = 0.0;
    for (n, x) in grid.nodes().enumerate() {
        let kappa: f64 = weights.iter().map(|&(k, w)| w * values[k][n]).sum();
        if kappa != 0.0 {
            acc += kappa * density_product(x);
        }
    }
    acc * vol
}

fn window_contains(s: &FieldScenario, t: f64) -> bool {
    t >= s.t0 && t <= s.t
}

/// L(t) by numerical integration of the density overlap, with densities taken
/// from the propagated amplitudes.
pub fn entanglement_l_quadrature(s: &FieldScenario) -> Result<f64> {
    entanglement_l_quadrature_with(s, &LSettings::default())
}

pub fn entanglement_l_quadrature_with(s: &FieldScenario, set: &LSettings) -> Result<f64> {
    s.validate()?;
    let time_q = AdaptiveIntegrator::new(set.time).with_max_panels(set.max_panels);
    let space_q = AdaptiveIntegrator::new(set.space).with_max_panels(set.max_panels);
    let rho = |wp: &Wavepacket, x: [f64; 3], e: f64| propagate_gaussian(wp, x, e).norm_sqr();
    match &s.coupling {
        CouplingProfile::PointImpulse { strength, location, time } => {
            if !window_contains(s, *time) {
                warn!("point impulse at t={time} lies outside the window [{}, {}]", s.t0, s.t);
                return Ok(0.0);
            }
            let e = time - s.t0;
            Ok(2.0 * strength * rho(&s.wp1, *location, e) * rho(&s.wp2, *location, e))
        }
        CouplingProfile::Uniform { profile } => {
            let est = time_q.try_integrate_with_breaks(s.t0, s.t, &s.time_breaks(), |t| {
                let kappa = profile.value(t);
                if kappa == 0.0 {
                    return Ok(0.0);
                }
                let e = t - s.t0;
                let mut overlap = 1.0;
                for axis in 0..3 {
                    overlap *= axis_overlap(s, axis, e, set, &space_q)?;
                }
                Ok(2.0 * kappa * overlap)
            })?;
            Ok(est.value)
        }
        CouplingProfile::SampledGrid { .. } => {
            let est = time_q.integrate_with_breaks(s.t0, s.t, &s.time_breaks(), |t| {
                let e = t - s.t0;
                2.0 * grid_sum(&s.coupling, t, |x| rho(&s.wp1, x, e) * rho(&s.wp2, x, e))
            })?;
            Ok(est.value)
        }
    }
}

/// Integrand of the uniform-coupling closed form at time `t`:
/// (1/√2) κ (A/π)^{3/2} exp(−A|c₁ − c₂|²/2).
pub fn uniform_gaussian_integrand(s: &FieldScenario, kappa: f64, t: f64) -> f64 {
    let e = t - s.t0;
    let a = s.wp1.width_param(e);
    let sep2 = dist2(&s.wp1.center_at(e), &s.wp2.center_at(e));
    std::f64::consts::FRAC_1_SQRT_2 * kappa * (a / PI).powf(1.5) * (-0.5 * a * sep2).exp()
}

/// Integrand of the Gaussian form before the spatial integral:
/// 2κ (A/π)³ exp(−A(|x − c₁|² + |x − c₂|²)).
pub fn gaussian_density_product(s: &FieldScenario, x: [f64; 3], t: f64) -> f64 {
    let e = t - s.t0;
    let a = s.wp1.width_param(e);
    let (c1, c2) = (s.wp1.center_at(e), s.wp2.center_at(e));
    2.0 * (a / PI).powi(3) * (-a * (dist2(&x, &c1) + dist2(&x, &c2))).exp()
}

/// L(t) from the Gaussian closed form; analytic in space for uniform
/// coupling, a node sum for sampled coupling. Needs equal α and m.
pub fn entanglement_l_gaussian(s: &FieldScenario) -> Result<f64> {
    entanglement_l_gaussian_with(s, &LSettings::default())
}

pub fn entanglement_l_gaussian_with(s: &FieldScenario, set: &LSettings) -> Result<f64> {
    s.validate()?;
    s.require_shared_shape()?;
    let q = AdaptiveIntegrator::new(set.time).with_max_panels(set.max_panels);
    match &s.coupling {
        CouplingProfile::PointImpulse { .. } => entanglement_l_point(s),
        CouplingProfile::Uniform { profile } => Ok(q
            .integrate_with_breaks(s.t0, s.t, &s.time_breaks(), |t| uniform_gaussian_integrand(s, profile.value(t), t))?
            .value),
        CouplingProfile::SampledGrid { .. } => Ok(q
            .integrate_with_breaks(s.t0, s.t, &s.time_breaks(), |t| {
                grid_sum(&s.coupling, t, |x| gaussian_density_product(s, x, t))
            })?
            .value),
    }
}

/// Closed form for an impulsive point coupling:
/// 2κ (A/π)³ exp(−A(|x_I − c₁|² + |x_I − c₂|²)) at the impulse time.
/// Zero, with a warning, when the impulse falls outside the window.
pub fn entanglement_l_point(s: &FieldScenario) -> Result<f64> {
    s.validate()?;
    let CouplingProfile::PointImpulse { strength, location, time } = &s.coupling else {
        return Err(Error::Precondition("point formula needs a point-impulse coupling".into()));
    };
    s.require_shared_shape()?;
    if !window_contains(s, *time) {
        warn!("point impulse at t={time} lies outside the window [{}, {}]", s.t0, s.t);
        return Ok(0.0);
    }
    Ok(strength * gaussian_density_product(s, *location, *time))
}

/// The smoothness ratios behind the steepest-descent estimate, each of
/// which should be small.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// |κ̇/κ| / |α Δv·Δx| at the saddle.
    pub slope_ratio: f64,
    /// |κ̈/κ| / (α|Δv|²) at the saddle.
    pub curvature_ratio: f64,
    /// Distance from the saddle to the nearer window edge, in units of the
    /// time-Gaussian width 1/(√α|Δv|).
    pub window_margin: f64,
    /// α|t_min − t0|/m; the estimate takes the packet width as fixed.
    pub spreading: f64,
}

impl ValidityReport {
    /// Both smoothness ratios at or below `threshold`.
    pub fn holds(&self, threshold: f64) -> bool {
        self.slope_ratio <= threshold && self.curvature_ratio <= threshold
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteepestDescent {
    pub l_approx: f64,
    pub t_c: f64,
    pub t_min: f64,
    pub d_min: f64,
    pub validity: ValidityReport,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        (num / den).abs()
    }
}

/// Saddle-point estimate ακ(t_min)/(π|Δv|) · exp(−α d_min²/2) for uniform
/// coupling. The saddle t_c is taken at t_min.
pub fn steepest_descent_l(s: &FieldScenario) -> Result<SteepestDescent> {
    s.validate()?;
    let CouplingProfile::Uniform { profile } = &s.coupling else {
        return Err(Error::Precondition("steepest descent needs a spatially uniform coupling".into()));
    };
    let (alpha, mass) = s.require_shared_shape()?;
    let (t_min, d_min) = s.closest_approach().ok_or_else(|| {
        Error::DegenerateKinematics("packets share a velocity, so the separation has no minimum in time".into())
    })?;
    let (dx, dv) = s.relative();
    let speed = dot(&dv, &dv).sqrt();
    let t_c = t_min;
    let kappa = profile.value(t_c);
    let l_approx = alpha * kappa / (PI * speed) * (-0.5 * alpha * d_min * d_min).exp();
    let (k1, k2) = (profile.derivative(t_c), profile.second_derivative(t_c));
    let validity = ValidityReport {
        slope_ratio: ratio(ratio(k1, kappa), alpha * dot(&dv, &dx)),
        curvature_ratio: ratio(ratio(k2, kappa), alpha * speed * speed),
        window_margin: (t_min - s.t0).min(s.t - t_min) * alpha.sqrt() * speed,
        spreading: alpha * (t_min - s.t0).abs() / mass,
    };
    Ok(SteepestDescent { l_approx, t_c, t_min, d_min, validity })
}

/// −(1 − εL) n1z n2z − εL n1·n2, warning when εL leaves [0, 1].
pub fn correlation_field(s: &FieldScenario, l: f64) -> f64 {
    let w = s.epsilon * l;
    if !(0.0..=1.0).contains(&w) {
        warn!("epsilon*L = {w} is outside [0, 1]; the first-order correlation is not interpretable there");
    }
    correlation_with_weight(w, &s.analyzers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::coupling::{GridSpec, TimeProfile};

    fn z_pair() -> AnalyzerPair {
        AnalyzerPair::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).unwrap()
    }

    fn scenario(wp1: Wavepacket, wp2: Wavepacket, coupling: CouplingProfile, t0: f64, t: f64) -> FieldScenario {
        FieldScenario { wp1, wp2, coupling, epsilon: 0.01, t0, t, analyzers: z_pair() }
    }

    fn at_rest() -> FieldScenario {
        let a = Wavepacket::new([0.0, 0.0, 0.0], [0.0; 3], 3.0, 1.0).unwrap();
        let b = Wavepacket::new([0.2, -0.1, 0.0], [0.0; 3], 3.0, 1.0).unwrap();
        scenario(a, b, CouplingProfile::constant(0.7), 0.0, 1.5)
    }

    fn head_on(alpha: f64, mass: f64, miss: f64) -> FieldScenario {
        let a = Wavepacket::new([-5.0, miss, 0.0], [1.0, 0.0, 0.0], alpha, mass).unwrap();
        let b = Wavepacket::new([5.0, 0.0, 0.0], [-1.0, 0.0, 0.0], alpha, mass).unwrap();
        scenario(a, b, CouplingProfile::constant(1.0), 0.0, 10.0)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let mut s = at_rest();
        s.coupling = CouplingProfile::constant(0.0);
        assert_eq!(entanglement_l_quadrature(&s).unwrap(), 0.0);
        assert_eq!(entanglement_l_gaussian(&s).unwrap(), 0.0);
    }

    #[test]
    fn paths_agree_at_rest_and_head_on() {
        for s in [at_rest(), head_on(2.0, 1.0, 0.0), head_on(2.0, 3.0, 0.6)] {
            let q = entanglement_l_quadrature(&s).unwrap();
            let g = entanglement_l_gaussian(&s).unwrap();
            assert!(rel(q, g) < 1e-6, "{q} vs {g}");
            assert!(q > 0.0);
        }
    }

    #[test]
    fn uniform_closed_form_matches_spatial_integral() {
        let s = head_on(1.5, 2.0, 0.4);
        let q = AdaptiveIntegrator::new(Tolerance::new(0.0, 1e-13));
        for t in [1.0, 4.0, 5.0, 7.5] {
            let e = t - s.t0;
            let a = s.wp1.width_param(e);
            let (c1, c2) = (s.wp1.center_at(e), s.wp2.center_at(e));
            let mut spatial = 2.0 * (a / PI).powi(3);
            for d in 0..3 {
                let lo = c1[d].min(c2[d]) - 12.0 / a.sqrt();
                let hi = c1[d].max(c2[d]) + 12.0 / a.sqrt();
                let mid = 0.5 * (c1[d] + c2[d]);
                spatial *= q
                    .integrate_with_breaks(lo, hi, &[mid], |x| (-a * ((x - c1[d]).powi(2) + (x - c2[d]).powi(2))).exp())
                    .unwrap()
                    .value;
            }
            let closed = uniform_gaussian_integrand(&s, 1.0, t);
            assert!(rel(closed, spatial) < 1e-10, "t={t}: {closed} vs {spatial}");
        }
    }

    #[test]
    fn far_packets_are_exponentially_small() {
        let a = Wavepacket::new([-20.0, 0.0, 0.0], [0.0; 3], 2.0, 1.0).unwrap();
        let b = Wavepacket::new([20.0, 0.0, 0.0], [0.0; 3], 2.0, 1.0).unwrap();
        let s = scenario(a, b, CouplingProfile::constant(1.0), 0.0, 2.0);
        assert!(entanglement_l_quadrature(&s).unwrap() < 1e-8 * 2.0);
    }

    #[test]
    fn point_impulse_closed_form() {
        let a = Wavepacket::new([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], 2.0, 1.0).unwrap();
        let b = Wavepacket::new([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 2.0, 1.0).unwrap();
        let at = |loc: [f64; 3], time: f64| {
            scenario(a, b, CouplingProfile::PointImpulse { strength: 0.8, location: loc, time }, 0.0, 3.0)
        };
        let aa = a.width_param(1.0);
        let l0 = entanglement_l_point(&at([0.0; 3], 1.0)).unwrap();
        assert!(rel(l0, 1.6 * (aa / PI).powi(3)) < 1e-12);
        for dir in [[0.3, 0.0, 0.0], [0.0, 0.3, 0.0], [0.0, 0.0, -0.3]] {
            let l = entanglement_l_point(&at(dir, 1.0)).unwrap();
            assert!(((l / l0).ln() + 2.0 * aa * 0.09).abs() < 1e-10);
        }
        // Quadrature path uses propagated amplitudes instead of the closed form.
        let q = entanglement_l_quadrature(&at([0.1, 0.2, 0.0], 1.3)).unwrap();
        assert!(rel(q, entanglement_l_point(&at([0.1, 0.2, 0.0], 1.3)).unwrap()) < 1e-12);
        assert_eq!(entanglement_l_point(&at([0.0; 3], 3.5)).unwrap(), 0.0);
        let start = at([0.0; 3], 0.0);
        let expect = 1.6 * (2.0 / PI).powi(3) * (-4.0f64).exp();
        assert!(rel(entanglement_l_point(&start).unwrap(), expect) < 1e-12);
    }

    #[test]
    fn grid_paths_agree_and_translate() {
        let grid = GridSpec { origin: [-1.0, -1.0, -1.0], spacing: [0.25, 0.25, 0.5], shape: [9, 9, 5] };
        let n = grid.len();
        let values: Vec<Vec<f64>> = (0..3).map(|k| (0..n).map(|i| 0.1 + 0.01 * ((i * 7 + k) % 5) as f64).collect()).collect();
        let coupling = CouplingProfile::SampledGrid { grid, times: vec![0.0, 0.6, 1.2], values };
        let a = Wavepacket::new([-0.3, 0.0, 0.1], [0.5, 0.0, 0.0], 4.0, 1.0).unwrap();
        let b = Wavepacket::new([0.3, 0.1, 0.0], [-0.5, 0.0, 0.0], 4.0, 1.0).unwrap();
        let s = scenario(a, b, coupling, 0.0, 1.2);
        let q = entanglement_l_quadrature(&s).unwrap();
        let g = entanglement_l_gaussian(&s).unwrap();
        assert!(rel(q, g) < 1e-8);
        let moved = s.translated([1.7, -0.4, 2.2]);
        assert!((entanglement_l_gaussian(&moved).unwrap() - g).abs() < 1e-10);
        assert!((entanglement_l_quadrature(&moved).unwrap() - q).abs() < 1e-10);
    }

    #[test]
    fn time_varying_coupling_paths_agree() {
        let mut s = head_on(3.0, 2.0, 0.3);
        s.coupling = CouplingProfile::Uniform { profile: TimeProfile::GaussianPulse { amplitude: 2.0, center: 4.5, width: 1.0 } };
        let q = entanglement_l_quadrature(&s).unwrap();
        let g = entanglement_l_gaussian(&s).unwrap();
        assert!(rel(q, g) < 1e-6);
    }

    #[test]
    fn closed_form_needs_matching_packets() {
        let mut s = at_rest();
        s.wp2.alpha = 2.0;
        assert!(matches!(entanglement_l_gaussian(&s), Err(Error::Precondition(_))));
        assert!(entanglement_l_quadrature(&s).unwrap() > 0.0);
    }

    #[test]
    fn closest_approach_geometry() {
        let a = Wavepacket::new([3.0, 0.0, 0.0], [-2.0, 0.0, 0.0], 1.0, 1.0).unwrap();
        let b = Wavepacket::new([0.0; 3], [0.0; 3], 1.0, 1.0).unwrap();
        let s = scenario(a, b, CouplingProfile::constant(1.0), 1.0, 5.0);
        let (tm, dm) = s.closest_approach().unwrap();
        assert!((tm - 2.5).abs() < 1e-15 && dm.abs() < 1e-15);
    }

    #[test]
    fn steepest_descent_in_its_regime() {
        let s = head_on(4.0, 4000.0, 0.0);
        let sd = steepest_descent_l(&s).unwrap();
        assert!(sd.validity.holds(0.05));
        assert!(rel(sd.l_approx, 4.0 / (PI * 2.0)) < 1e-12);
        let q = entanglement_l_quadrature(&s).unwrap();
        assert!(rel(sd.l_approx, q) < 0.05, "{} vs {q}", sd.l_approx);
        let miss = head_on(4.0, 4000.0, 0.5);
        let sd = steepest_descent_l(&miss).unwrap();
        assert!((sd.d_min - 0.5).abs() < 1e-12);
        assert!(rel(sd.l_approx, entanglement_l_quadrature(&miss).unwrap()) < 0.05);
    }

    #[test]
    fn steepest_descent_rejects_equal_velocities() {
        assert!(matches!(steepest_descent_l(&at_rest()), Err(Error::DegenerateKinematics(_))));
    }

    #[test]
    fn validity_flags_a_fast_pulse() {
        let mut s = head_on(4.0, 4000.0, 0.0);
        s.coupling = CouplingProfile::Uniform { profile: TimeProfile::GaussianPulse { amplitude: 1.0, center: 5.2, width: 0.05 } };
        assert!(!steepest_descent_l(&s).unwrap().validity.holds(0.05));
    }

    #[test]
    fn correlation_field_limits() {
        let mut s = at_rest();
        s.analyzers = AnalyzerPair::normalized([0.2, 0.3, 0.9], [-0.4, 0.1, 0.5]).unwrap();
        let zz = s.analyzers.zz();
        assert!((correlation_field(&s, 0.0) + zz).abs() < 1e-15);
        s.epsilon = 1.0;
        assert!((correlation_field(&s, 1.0) + s.analyzers.dot()).abs() < 1e-15);
        s.analyzers = AnalyzerPair::new([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]).unwrap();
        assert!((correlation_field(&s, 1.0) + 1.0).abs() < 1e-15);
    }
}
