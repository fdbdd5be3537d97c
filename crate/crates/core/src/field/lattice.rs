//! A 1-D periodic lattice on which the field dynamics can be solved exactly.
//!
//! Sites sit at `j·a`. The kinetic term is the central-difference Laplacian,
//! diagonal in the momentum basis with energies (1 − cos k a)/(m a²). A
//! continuum coupling κ(x) becomes κ(x_j)/a on site j, and packet amplitudes
//! are sampled as √a·ψ(x_j) and renormalised.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::wavepacket::Wavepacket;
use crate::eprb::analyzers::{correlation_with_weight, AnalyzerPair};
use crate::eprb::fock_model::{g_component, push_correlation_terms, push_pair_operator};
use crate::fock::{
    build_one_body, build_two_body, expectation, FockOperator, FockSpace, FockVector, Mode, ModeSet, OneBodyCoeffs,
    Sector, SpectralPropagator, Species, Spin, TwoBodyCoeffs,
};
use crate::quadrature::{AdaptiveIntegrator, Tolerance};
use crate::{Error, Result, C64};

/// Largest lattice handled by exact evolution.
pub const MAX_EXACT_SITES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub sites: usize,
    pub spacing: f64,
    pub mass: f64,
}

impl LatticeConfig {
    pub fn new(sites: usize, spacing: f64, mass: f64) -> Result<Self> {
        let c = LatticeConfig { sites, spacing, mass };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::Precondition(format!("lattice needs at least 2 sites, got {}", self.sites)));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite() && self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::Precondition(format!(
                "lattice spacing and mass must be positive, got a={}, m={}",
                self.spacing, self.mass
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.sites as f64 * self.spacing
    }

    pub fn position(&self, j: usize) -> f64 {
        j as f64 * self.spacing
    }

    /// −(1/2m)∇² with periodic central differences.
    pub fn kinetic_matrix(&self) -> DMatrix<f64> {
        let n = self.sites;
        let h = 1.0 / (2.0 * self.mass * self.spacing * self.spacing);
        let mut t = DMatrix::zeros(n, n);
        for j in 0..n {
            t[(j, j)] += 2.0 * h;
            t[(j, (j + 1) % n)] -= h;
            t[(j, (j + n - 1) % n)] -= h;
        }
        t
    }

    /// Kinetic energy of momentum index `j`.
    pub fn energy(&self, j: usize) -> f64 {
        let k = 2.0 * PI * j as f64 / self.sites as f64;
        (1.0 - k.cos()) / (self.mass * self.spacing * self.spacing)
    }

    /// Samples √a·ψ(x_j) of the packet's x component, using the nearest
    /// periodic image of each site, normalised to one.
    pub fn packet_amplitudes(&self, wp: &Wavepacket) -> Result<DVector<C64>> {
        wp.validate()?;
        if wp.mass != self.mass {
            return Err(Error::Precondition(format!(
                "packet mass {} differs from lattice mass {}",
                wp.mass, self.mass
            )));
        }
        let len = self.length();
        let v = DVector::from_fn(self.sites, |j, _| {
            let off = (self.position(j) - wp.center[0]).rem_euclid(len);
            let off = if off >= 0.5 * len { off - len } else { off };
            wp.amplitude_1d(0, wp.center[0] + off) * self.spacing.sqrt()
        });
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::Precondition("packet has no weight on the lattice".into()));
        }
        Ok(v / C64::new(norm, 0.0))
    }
}

/// exp(−iTτ) applied through the momentum basis.
#[derive(Clone, Debug)]
pub struct LatticePropagator {
    energies: Vec<f64>,
    /// twiddle[j·n + x] = e^{2πi jx/n}
    twiddle: Vec<C64>,
}

impl LatticePropagator {
    pub fn new(config: &LatticeConfig) -> Result<Self> {
        config.validate()?;
        let n = config.sites;
        let twiddle = (0..n * n)
            .map(|i| C64::from_polar(1.0, 2.0 * PI * ((i / n) * (i % n) % n) as f64 / n as f64))
            .collect();
        Ok(LatticePropagator { energies: (0..n).map(|j| config.energy(j)).collect(), twiddle })
    }

    pub fn sites(&self) -> usize {
        self.energies.len()
    }

    /// Momentum components ψ̂_j = Σ_x e^{−2πi jx/n} ψ_x.
    pub fn to_momentum(&self, psi: &DVector<C64>) -> DVector<C64> {
        let n = self.sites();
        DVector::from_fn(n, |j, _| (0..n).map(|x| self.twiddle[j * n + x].conj() * psi[x]).sum())
    }

    /// Position amplitudes after time τ, from momentum components.
    pub fn from_momentum(&self, hat: &DVector<C64>, tau: f64) -> DVector<C64> {
        let n = self.sites();
        let phased: Vec<C64> = (0..n).map(|j| hat[j] * C64::from_polar(1.0, -self.energies[j] * tau)).collect();
        DVector::from_fn(n, |x, _| (0..n).map(|j| self.twiddle[j * n + x] * phased[j]).sum::<C64>() / n as f64)
    }

    pub fn apply(&self, tau: f64, psi: &DVector<C64>) -> Result<DVector<C64>> {
        if psi.len() != self.sites() {
            return Err(Error::DimensionMismatch { expected: self.sites(), found: psi.len() });
        }
        Ok(self.from_momentum(&self.to_momentum(psi), tau))
    }

    pub fn matrix(&self, tau: f64) -> DMatrix<C64> {
        let n = self.sites();
        let mut m = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut e = DVector::zeros(n);
            e[c] = C64::new(1.0, 0.0);
            m.set_column(c, &self.from_momentum(&self.to_momentum(&e), tau));
        }
        m
    }
}

/// Two packets on a lattice with a static site coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeScenario {
    pub config: LatticeConfig,
    /// Species-1 spin-up packet; only its x components are used.
    pub packet1: Wavepacket,
    /// Species-2 spin-down packet; only its x components are used.
    pub packet2: Wavepacket,
    /// Continuum coupling κ(x_j) at each site.
    pub coupling: Vec<f64>,
    pub epsilon: f64,
    pub t0: f64,
    pub t: f64,
    pub analyzers: AnalyzerPair,
}

impl LatticeScenario {
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        config: LatticeConfig,
        packet1: Wavepacket,
        packet2: Wavepacket,
        kappa: f64,
        epsilon: f64,
        t0: f64,
        t: f64,
        analyzers: AnalyzerPair,
    ) -> Self {
        LatticeScenario { coupling: vec![kappa; config.sites], config, packet1, packet2, epsilon, t0, t, analyzers }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.analyzers.validate()?;
        if self.coupling.len() != self.config.sites {
            return Err(Error::DimensionMismatch { expected: self.config.sites, found: self.coupling.len() });
        }
        if self.coupling.iter().any(|k| !k.is_finite()) {
            return Err(Error::Precondition("site couplings must be finite".into()));
        }
        if !(self.t0.is_finite() && self.t.is_finite()) || self.t < self.t0 {
            return Err(Error::Precondition(format!("need t >= t0, got t0={}, t={}", self.t0, self.t)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Precondition(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        Ok(())
    }

    /// κ(x_j)/a.
    pub fn site_coupling(&self) -> Vec<f64> {
        self.coupling.iter().map(|k| k / self.config.spacing).collect()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        LatticeScenario { epsilon, ..self.clone() }
    }
}

const UP1: (Species, Spin) = (Species::One, Spin::Up);
const DOWN2: (Species, Spin) = (Species::Two, Spin::Down);

/// Fock-space pieces for exact evolution in the one-particle-per-species sector.
pub struct LatticeExact {
    space: Arc<FockSpace>,
    h0: FockOperator,
    h1: FockOperator,
    xi: FockOperator,
    psi0: FockVector,
    elapsed: f64,
}

/// Kinetic term Σ T_xy a†_{r i x} a_{r i y} over all channels.
pub fn lattice_kinetic_operator(space: &Arc<FockSpace>, config: &LatticeConfig) -> Result<FockOperator> {
    let t = config.kinetic_matrix();
    let mut c = OneBodyCoeffs::new(space.modes().clone());
    for r in Species::ALL {
        for i in Spin::ALL {
            for x in 0..config.sites {
                for y in 0..config.sites {
                    if t[(x, y)] != 0.0 {
                        c.push(Mode::at(r, i, x), Mode::at(r, i, y), C64::new(t[(x, y)], 0.0))?;
                    }
                }
            }
        }
    }
    build_one_body(space, &c)
}

/// Σ_x κ_x G_x with the entangling generator acting locally on each site.
pub fn lattice_interaction_operator(space: &Arc<FockSpace>, site_coupling: &[f64]) -> Result<FockOperator> {
    let mut c = TwoBodyCoeffs::new(space.modes().clone());
    for (x, &k) in site_coupling.iter().enumerate() {
        if k != 0.0 {
            push_pair_operator(&mut c, Some(x), Some(x), C64::new(k, 0.0), g_component)?;
        }
    }
    build_two_body(space, &c)
}

/// Σ_{x,y} ξ̃ a†_{2j′}(y) a†_{1i′}(x) a_{1i}(x) a_{2j}(y).
pub fn lattice_correlation_operator(space: &Arc<FockSpace>, sites: usize, analyzers: &AnalyzerPair) -> Result<FockOperator> {
    analyzers.validate()?;
    let mut c = TwoBodyCoeffs::new(space.modes().clone());
    for x in 0..sites {
        for y in 0..sites {
            push_correlation_terms(&mut c, analyzers, Some(x), Some(y))?;
        }
    }
    build_two_body(space, &c)
}

/// Σ_{x,y} ψ₁(x)ψ₂(y) a†_{1↑}(x) a†_{2↓}(y)|0⟩.
pub fn lattice_initial_state(space: &Arc<FockSpace>, sc: &LatticeScenario) -> Result<FockVector> {
    let p1 = sc.config.packet_amplitudes(&sc.packet1)?;
    let p2 = sc.config.packet_amplitudes(&sc.packet2)?;
    let mut v = FockVector::zeros(space.clone());
    for x in 0..sc.config.sites {
        for y in 0..sc.config.sites {
            let amp = p1[x] * p2[y];
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            let term = FockVector::created(space.clone(), &[Mode::at(UP1.0, UP1.1, x), Mode::at(DOWN2.0, DOWN2.1, y)])?;
            v = v.add(&term.scale(amp))?;
        }
    }
    Ok(v)
}

impl LatticeExact {
    pub fn new(sc: &LatticeScenario) -> Result<Self> {
        sc.validate()?;
        let n = sc.config.sites;
        if n > MAX_EXACT_SITES {
            return Err(Error::Resource(format!(
                "exact lattice evolution is limited to {MAX_EXACT_SITES} sites, got {n}"
            )));
        }
        let space = FockSpace::new(ModeSet::lattice(n)?, Sector::PerSpecies { species1: 1, species2: 1 })?;
        let h0 = lattice_kinetic_operator(&space, &sc.config)?;
        let h1 = lattice_interaction_operator(&space, &sc.site_coupling())?;
        let xi = lattice_correlation_operator(&space, n, &sc.analyzers)?;
        let psi0 = lattice_initial_state(&space, sc)?;
        Ok(LatticeExact { space, h0, h1, xi, psi0, elapsed: sc.t - sc.t0 })
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn kinetic(&self) -> &FockOperator {
        &self.h0
    }

    pub fn interaction(&self) -> &FockOperator {
        &self.h1
    }

    pub fn correlation_operator(&self) -> &FockOperator {
        &self.xi
    }

    pub fn initial_state(&self) -> &FockVector {
        &self.psi0
    }

    /// State after the scenario window under H0 + εH1.
    pub fn evolved_state(&self, epsilon: f64) -> Result<FockVector> {
        let h = self.h0.add(&self.h1.scale(C64::new(epsilon, 0.0)))?;
        SpectralPropagator::new(&h)?.apply(self.elapsed, &self.psi0)
    }

    /// ⟨ψ(t)|Ξ|ψ(t)⟩ for coupling strength ε.
    pub fn correlation(&self, epsilon: f64) -> Result<f64> {
        let psi = self.evolved_state(epsilon)?;
        let c = expectation(&psi, &self.xi)?;
        debug_assert!(c.im.abs() < 1e-10);
        Ok(c.re)
    }
}

/// Exact C(t) by evolving the two-particle state on the lattice.
pub fn lattice_exact_correlation(sc: &LatticeScenario) -> Result<f64> {
    LatticeExact::new(sc)?.correlation(sc.epsilon)
}

/// Lattice L(t) = 2∫dt Σ_x κ_x |ψ₁(x,t)|²|ψ₂(x,t)|² under free lattice evolution.
pub fn lattice_entanglement_l(sc: &LatticeScenario) -> Result<f64> {
    sc.validate()?;
    let prop = LatticePropagator::new(&sc.config)?;
    let h1 = prop.to_momentum(&sc.config.packet_amplitudes(&sc.packet1)?);
    let h2 = prop.to_momentum(&sc.config.packet_amplitudes(&sc.packet2)?);
    let kappa = sc.site_coupling();
    let dv = sc.packet1.velocity[0] - sc.packet2.velocity[0];
    let mut breaks = Vec::new();
    if dv != 0.0 {
        breaks.push(sc.t0 - (sc.packet1.center[0] - sc.packet2.center[0]) / dv);
    }
    let q = AdaptiveIntegrator::new(Tolerance::new(1e-15, 1e-11)).with_max_panels(20_000);
    let est = q.integrate_with_breaks(sc.t0, sc.t, &breaks, |t| {
        let tau = t - sc.t0;
        let p1 = prop.from_momentum(&h1, tau);
        let p2 = prop.from_momentum(&h2, tau);
        2.0 * kappa.iter().enumerate().map(|(x, k)| k * p1[x].norm_sqr() * p2[x].norm_sqr()).sum::<f64>()
    })?;
    Ok(est.value)
}

/// First-order C(t) from the lattice L(t).
pub fn lattice_perturbative_correlation(sc: &LatticeScenario) -> Result<f64> {
    let l = lattice_entanglement_l(sc)?;
    Ok(correlation_with_weight(sc.epsilon * l, &sc.analyzers))
}

/// Continuum 1-D counterpart of the lattice L(t) for constant κ:
/// 2∫κ √(A/2π) exp(−A(c₁ − c₂)²/2) dt, with x components only.
pub fn continuum_l_1d(wp1: &Wavepacket, wp2: &Wavepacket, kappa: f64, t0: f64, t: f64) -> Result<f64> {
    if wp1.alpha != wp2.alpha || wp1.mass != wp2.mass {
        return Err(Error::Precondition("packets must share width parameter and mass".into()));
    }
    let q = AdaptiveIntegrator::new(Tolerance::new(1e-15, 1e-11));
    let est = q.integrate(t0, t, |s| {
        let e = s - t0;
        let a = wp1.width_param(e);
        let d = wp1.center_at(e)[0] - wp2.center_at(e)[0];
        2.0 * kappa * (a / (2.0 * PI)).sqrt() * (-0.5 * a * d * d).exp()
    })?;
    Ok(est.value)
}

/// Exact and first-order correlations across ε, with the log-log slope of
/// their difference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderScan {
    pub epsilons: Vec<f64>,
    pub exact: Vec<f64>,
    pub perturbative: Vec<f64>,
    pub slope: f64,
}

impl OrderScan {
    pub fn residuals(&self) -> Vec<f64> {
        self.exact.iter().zip(&self.perturbative).map(|(e, p)| (e - p).abs()).collect()
    }
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Estimation("slope fit needs at least two matched points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Estimation("slope fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Estimation("slope fit needs distinct abscissae".into()));
    }
    Ok(sxy / sxx)
}

/// Compare exact and first-order correlations over `epsilons`.
pub fn perturbation_order_scan(sc: &LatticeScenario, epsilons: &[f64]) -> Result<OrderScan> {
    let exact_model = LatticeExact::new(sc)?;
    let l = lattice_entanglement_l(sc)?;
    let mut exact = Vec::with_capacity(epsilons.len());
    let mut perturbative = Vec::with_capacity(epsilons.len());
    for &e in epsilons {
        exact.push(exact_model.correlation(e)?);
        perturbative.push(correlation_with_weight(e * l, &sc.analyzers));
    }
    let res: Vec<f64> = exact.iter().zip(&perturbative).map(|(a, b)| (a - b).abs()).collect();
    let slope = loglog_slope(epsilons, &res)?;
    Ok(OrderScan { epsilons: epsilons.to_vec(), exact, perturbative, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_one_body as one_body, number_operator};
    use crate::linalg::expm_hermitian;

    fn config(sites: usize) -> LatticeConfig {
        LatticeConfig::new(sites, 1.0, 1.0).unwrap()
    }

    fn analyzers() -> AnalyzerPair {
        AnalyzerPair::normalized([0.3, 0.2, 0.9], [0.8, -0.1, 0.4]).unwrap()
    }

    fn small_scenario(sites: usize, epsilon: f64) -> LatticeScenario {
        let c = config(sites);
        let a = Wavepacket::new([1.0, 0.0, 0.0], [0.4, 0.0, 0.0], 1.0, 1.0).unwrap();
        let b = Wavepacket::new([sites as f64 - 3.0, 0.0, 0.0], [-0.4, 0.0, 0.0], 1.0, 1.0).unwrap();
        LatticeScenario::uniform(c, a, b, 1.0, epsilon, 0.0, 2.5, analyzers())
    }

    #[test]
    fn spectrum_matches_kinetic_matrix() {
        let c = LatticeConfig::new(7, 0.5, 1.3).unwrap();
        let t = c.kinetic_matrix();
        let mut eig: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
        let mut expect: Vec<f64> = (0..7).map(|j| c.energy(j)).collect();
        eig.sort_by(f64::total_cmp);
        expect.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn propagator_matches_dense_exponential_and_composes() {
        let c = LatticeConfig::new(6, 0.7, 0.9).unwrap();
        let prop = LatticePropagator::new(&c).unwrap();
        let t = c.kinetic_matrix().map(|v| C64::new(v, 0.0));
        let u = prop.matrix(0.8);
        assert!((&u - expm_hermitian(&t, 0.8)).iter().all(|z| z.norm() < 1e-12));
        let composed = prop.matrix(0.3) * prop.matrix(1.1);
        assert!((composed - prop.matrix(1.4)).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn packet_amplitudes_are_normalised_and_periodic() {
        let c = config(10);
        let wp = Wavepacket::new([0.0, 0.0, 0.0], [0.0; 3], 1.0, 1.0).unwrap();
        let v = c.packet_amplitudes(&wp).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-14);
        assert!((v[1] - v[9]).norm() < 1e-14);
        let heavy = Wavepacket::new([0.0; 3], [0.0; 3], 1.0, 2.0).unwrap();
        assert!(c.packet_amplitudes(&heavy).is_err());
    }

    #[test]
    fn correlation_operator_is_product_of_spin_sums() {
        let sc = small_scenario(3, 0.0);
        let space = FockSpace::new(ModeSet::lattice(3).unwrap(), Sector::PerSpecies { species1: 1, species2: 1 }).unwrap();
        let xi = lattice_correlation_operator(&space, 3, &sc.analyzers).unwrap();
        let spin_sum = |r: Species, n: &[f64; 3]| {
            let s = crate::eprb::first_quantized::spin_projection(n);
            let mut c = OneBodyCoeffs::new(space.modes().clone());
            for x in 0..3 {
                for i in Spin::ALL {
                    for j in Spin::ALL {
                        c.push(Mode::at(r, i, x), Mode::at(r, j, x), s[(i.index(), j.index())]).unwrap();
                    }
                }
            }
            one_body(&space, &c).unwrap()
        };
        let prod = spin_sum(Species::One, &sc.analyzers.n1).mul(&spin_sum(Species::Two, &sc.analyzers.n2)).unwrap();
        assert!(xi.max_abs_diff(&prod).unwrap() < 1e-13);
        assert!(xi.is_hermitian());
    }

    #[test]
    fn hamiltonian_is_hermitian_and_conserves_number() {
        let sc = small_scenario(4, 0.3);
        let ex = LatticeExact::new(&sc).unwrap();
        assert!(ex.kinetic().is_hermitian() && ex.interaction().is_hermitian());
        let n = number_operator(ex.space()).unwrap();
        assert!(ex.interaction().commutator(&n).unwrap().max_abs() < 1e-12);
        assert!((ex.initial_state().norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn no_coupling_no_entanglement() {
        let sc = small_scenario(5, 0.0);
        let zz = sc.analyzers.zz();
        assert!((lattice_exact_correlation(&sc).unwrap() + zz).abs() < 1e-12);
        assert!((lattice_perturbative_correlation(&sc).unwrap() + zz).abs() < 1e-15);
        let mut at_start = small_scenario(5, 0.5);
        at_start.t = at_start.t0;
        assert!((lattice_exact_correlation(&at_start).unwrap() + zz).abs() < 1e-12);
    }

    #[test]
    fn first_order_agrees_at_small_coupling() {
        let sc = small_scenario(6, 1e-3);
        let exact = lattice_exact_correlation(&sc).unwrap();
        let pert = lattice_perturbative_correlation(&sc).unwrap();
        assert!((exact - pert).abs() < 1e-5, "{exact} vs {pert}");
        assert!((exact + sc.analyzers.zz()).abs() > 1e-6, "coupling has no visible effect");
    }

    #[test]
    fn residual_is_odd_order_in_coupling() {
        // Flipping the relative sign of the two spin configurations maps
        // H(ε) to H(−ε) and fixes the initial state, so C + n1z n2z is odd in
        // ε and the first-order residual starts at ε³.
        let sc = small_scenario(6, 0.0);
        let scan = perturbation_order_scan(&sc, &[1e-1, 3e-2, 1e-2, 3e-3]).unwrap();
        assert!((scan.slope - 3.0).abs() < 0.1, "slope {}", scan.slope);
        let ex = LatticeExact::new(&sc).unwrap();
        let zz = sc.analyzers.zz();
        let (p, m) = (ex.correlation(0.2).unwrap() + zz, ex.correlation(-0.2).unwrap() + zz);
        assert!((p + m).abs() < 1e-12);
    }

    #[test]
    fn too_many_sites_is_a_resource_error() {
        let sc = small_scenario(MAX_EXACT_SITES + 1, 0.1);
        assert!(matches!(LatticeExact::new(&sc), Err(Error::Resource(_))));
        assert!(lattice_entanglement_l(&sc).is_ok());
    }

    #[test]
    fn refinement_approaches_continuum() {
        let length = 24.0;
        let a = Wavepacket::new([8.0, 0.0, 0.0], [0.5, 0.0, 0.0], 1.0, 1.0).unwrap();
        let b = Wavepacket::new([14.0, 0.0, 0.0], [-0.5, 0.0, 0.0], 1.0, 1.0).unwrap();
        let cont = continuum_l_1d(&a, &b, 1.0, 0.0, 8.0).unwrap();
        let errs: Vec<f64> = [0.5, 0.25, 0.125]
            .iter()
            .map(|&h| {
                let c = LatticeConfig::new((length / h) as usize, h, 1.0).unwrap();
                let sc = LatticeScenario::uniform(c, a, b, 1.0, 0.0, 0.0, 8.0, analyzers());
                (lattice_entanglement_l(&sc).unwrap() - cont).abs()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 1e-2 * cont);
    }

    #[test]
    fn slope_fit_recovers_powers() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(2.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.5).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
    }
}
