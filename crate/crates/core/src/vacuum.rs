//! The unitary V(θ) = exp(θW) that rotates the vacuum into the two-packet
//! state, with W = c†d† − dc for the smeared modes
//! c† = Σ ψ₁₁(x) a†_{1↑}(x) and d† = Σ ψ₂₂(y) a†_{2↓}(y).
//!
//! W connects particle-number sectors, so everything here lives on the full
//! Fock space of at most twelve modes.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::field::lattice::{
    lattice_correlation_operator, lattice_initial_state, lattice_interaction_operator, lattice_kinetic_operator,
    LatticeScenario,
};
use crate::fock::{
    exp_hermitian, expectation, unitarity_error, FockOperator, FockSpace, FockVector, Mode, ModeSet, Sector,
    SpectralPropagator, Species, Spin,
};
use crate::{Error, Result, C64};

/// Amplitudes below this magnitude count as outside the support.
pub const SUPPORT_TOL: f64 = 1e-14;
/// Deviation above which a mode outside the support is a locality violation.
pub const LOCALITY_TOL: f64 = 1e-10;
/// Largest unitarity error accepted by [`transform_operator`].
pub const UNITARY_TOL: f64 = 1e-10;

const NORM_TOL: f64 = 1e-12;

/// Packet amplitudes for the species-1 spin-up and species-2 spin-down modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAmplitude {
    pub psi11: Vec<(Mode, C64)>,
    pub psi22: Vec<(Mode, C64)>,
}

impl PairAmplitude {
    /// Site-resolved amplitudes, site `j` at index `j`.
    pub fn on_sites(psi11: &[C64], psi22: &[C64]) -> Result<Self> {
        let p = PairAmplitude {
            psi11: psi11.iter().enumerate().map(|(j, &a)| (Mode::at(Species::One, Spin::Up, j), a)).collect(),
            psi22: psi22.iter().enumerate().map(|(j, &a)| (Mode::at(Species::Two, Spin::Down, j), a)).collect(),
        };
        p.validate()?;
        Ok(p)
    }

    /// The four-mode case: one amplitude per species, each of unit modulus.
    pub fn single(psi11: C64, psi22: C64) -> Result<Self> {
        let p = PairAmplitude {
            psi11: vec![(Mode::new(Species::One, Spin::Up), psi11)],
            psi22: vec![(Mode::new(Species::Two, Spin::Down), psi22)],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (list, species, spin) in [(&self.psi11, Species::One, Spin::Up), (&self.psi22, Species::Two, Spin::Down)] {
            if list.iter().any(|(m, _)| m.species != species || m.spin != spin) {
                return Err(Error::Precondition(format!("pair amplitude lists a mode outside the {species:?}/{spin:?} channel")));
            }
            let norm: f64 = list.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::Precondition(format!("pair amplitude norm is {norm}, expected 1")));
            }
        }
        Ok(())
    }

    /// Amplitude of `mode` in its own channel; zero for channels that carry none.
    pub fn amplitude(&self, mode: &Mode) -> C64 {
        self.psi11
            .iter()
            .chain(&self.psi22)
            .find(|(m, _)| m == mode)
            .map_or(C64::new(0.0, 0.0), |(_, a)| *a)
    }

    pub fn in_support(&self, mode: &Mode) -> bool {
        self.amplitude(mode).norm() > SUPPORT_TOL
    }
}

fn require_full(space: &FockSpace) -> Result<()> {
    if space.sector() != Sector::All {
        return Err(Error::Precondition("the vacuum rotation needs the full Fock space".into()));
    }
    Ok(())
}

fn smeared_creation(space: &Arc<FockSpace>, amps: &[(Mode, C64)]) -> Result<FockOperator> {
    let mut acc = FockOperator::zero(space.clone());
    for (m, a) in amps {
        if space.modes().position(m).is_none() {
            return Err(Error::DimensionMismatch { expected: space.modes().len(), found: space.modes().len() + 1 });
        }
        acc = acc.add(&FockOperator::creation(space.clone(), m)?.scale(*a))?;
    }
    Ok(acc)
}

/// W = c†d† − dc on the full space.
pub fn build_w(space: &Arc<FockSpace>, pair: &PairAmplitude) -> Result<FockOperator> {
    require_full(space)?;
    pair.validate()?;
    let c_dag = smeared_creation(space, &pair.psi11)?;
    let d_dag = smeared_creation(space, &pair.psi22)?;
    let raise = c_dag.mul(&d_dag)?;
    raise.sub(&raise.adjoint())
}

/// c†d†|0⟩, assembled from single creation strings.
pub fn pair_state(space: &Arc<FockSpace>, pair: &PairAmplitude) -> Result<FockVector> {
    let mut v = FockVector::zeros(space.clone());
    for (m1, a1) in &pair.psi11 {
        for (m2, a2) in &pair.psi22 {
            v = v.add(&FockVector::created(space.clone(), &[*m1, *m2])?.scale(a1 * a2))?;
        }
    }
    Ok(v)
}

/// exp(θW) by diagonalising the Hermitian iW.
pub fn build_v(space: &Arc<FockSpace>, pair: &PairAmplitude, theta: f64) -> Result<FockOperator> {
    let w = build_w(space, pair)?;
    exp_hermitian(&w.scale(C64::new(0.0, 1.0)), theta)
}

/// 1 + sin θ W + (1 − cos θ) W², valid because W³ = −W.
pub fn build_v_closed(space: &Arc<FockSpace>, pair: &PairAmplitude, theta: f64) -> Result<FockOperator> {
    let w = build_w(space, pair)?;
    let w2 = w.mul(&w)?;
    FockOperator::identity(space.clone())
        .add(&w.scale(C64::new(theta.sin(), 0.0)))?
        .add(&w2.scale(C64::new(1.0 - theta.cos(), 0.0)))
}

/// V†AV; a precondition error if `v` is not unitary.
pub fn transform_operator(v: &FockOperator, a: &FockOperator) -> Result<FockOperator> {
    let err = unitarity_error(v);
    if err > UNITARY_TOL {
        return Err(Error::Precondition(format!("transforming operator is not unitary (error {err:.3e})")));
    }
    v.adjoint().mul(a)?.mul(v)
}

/// [a_mode, W] from its closed form: ψ₁₁(x) d† for species-1 spin-up,
/// −ψ₂₂(x) c† for species-2 spin-down, zero otherwise.
pub fn commutator_phi_w(space: &Arc<FockSpace>, pair: &PairAmplitude, mode: &Mode) -> Result<FockOperator> {
    require_full(space)?;
    pair.validate()?;
    space.modes().require(mode)?;
    match (mode.species, mode.spin) {
        (Species::One, Spin::Up) => Ok(smeared_creation(space, &pair.psi22)?.scale(pair.amplitude(mode))),
        (Species::Two, Spin::Down) => Ok(smeared_creation(space, &pair.psi11)?.scale(-pair.amplitude(mode))),
        _ => Ok(FockOperator::zero(space.clone())),
    }
}

/// Outcome of the vacuum-representation checks. Error fields are maxima of
/// absolute entrywise or vector deviations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VacuumRepReport {
    pub rotation_error: f64,
    pub invariance_error: f64,
    /// Modes outside their amplitude's support whose annihilator moved by more than [`LOCALITY_TOL`].
    pub locality_violations: Vec<(Mode, f64)>,
    /// Largest deviation among modes outside the support.
    pub outside_max_deviation: f64,
    /// Deviation of each mode inside the support.
    pub interior_deviations: Vec<(Mode, f64)>,
}

/// ‖V(θ)|0⟩ − cos θ|0⟩ − sin θ|ψ₀⟩‖.
pub fn rotation_error(space: &Arc<FockSpace>, pair: &PairAmplitude, theta: f64) -> Result<f64> {
    let v = build_v(space, pair, theta)?;
    let vac = FockVector::vacuum(space.clone())?;
    let expect = vac.scale(C64::new(theta.cos(), 0.0)).add(&pair_state(space, pair)?.scale(C64::new(theta.sin(), 0.0)))?;
    v.apply(&vac)?.distance(&expect)
}

/// Compare V†a_mV with a_m for every mode at θ = π/2.
pub fn locality_support_check(space: &Arc<FockSpace>, pair: &PairAmplitude) -> Result<VacuumRepReport> {
    let v = build_v(space, pair, FRAC_PI_2)?;
    let mut report = VacuumRepReport::default();
    for m in space.modes().iter() {
        let a = FockOperator::annihilation(space.clone(), m)?;
        let dev = transform_operator(&v, &a)?.max_abs_diff(&a)?;
        if pair.in_support(m) {
            report.interior_deviations.push((*m, dev));
        } else {
            report.outside_max_deviation = report.outside_max_deviation.max(dev);
            if dev > LOCALITY_TOL {
                report.locality_violations.push((*m, dev));
            }
        }
    }
    Ok(report)
}

/// Deviations of the partial sums Σ_{k≤n} θᵏ/k! ad_Wᵏ(a_mode) from exact
/// conjugation, for n = 0..=order, with ad_W(A) = [A, W].
pub fn bch_partial_sums(
    space: &Arc<FockSpace>,
    pair: &PairAmplitude,
    mode: &Mode,
    order: usize,
    theta: f64,
) -> Result<Vec<f64>> {
    if order < 1 {
        return Err(Error::Precondition("expansion order must be at least 1".into()));
    }
    let w = build_w(space, pair)?;
    let v = build_v(space, pair, theta)?;
    let a = FockOperator::annihilation(space.clone(), mode)?;
    let exact = transform_operator(&v, &a)?;
    let mut term = a.clone();
    let mut sum = a;
    let mut devs = vec![sum.max_abs_diff(&exact)?];
    for k in 1..=order {
        term = term.commutator(&w)?.scale(C64::new(theta / k as f64, 0.0));
        sum = sum.add(&term)?;
        devs.push(sum.max_abs_diff(&exact)?);
    }
    Ok(devs)
}

/// Deviation of the order-`order` partial sum at θ = π/2.
pub fn bch_expansion_check(space: &Arc<FockSpace>, pair: &PairAmplitude, mode: &Mode, order: usize) -> Result<f64> {
    Ok(*bch_partial_sums(space, pair, mode, order, FRAC_PI_2)?.last().expect("nonempty"))
}

/// Pair amplitudes sampled from a lattice scenario's packets.
pub fn lattice_pair_amplitude(sc: &LatticeScenario) -> Result<PairAmplitude> {
    let p1 = sc.config.packet_amplitudes(&sc.packet1)?;
    let p2 = sc.config.packet_amplitudes(&sc.packet2)?;
    PairAmplitude::on_sites(p1.as_slice(), p2.as_slice())
}

/// One sampled time of the invariance check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceSample {
    pub elapsed: f64,
    /// ⟨ψ₀|U†ΞU|ψ₀⟩
    pub standard: f64,
    /// ⟨0|V†U†ΞUV|0⟩
    pub vacuum: f64,
}

/// Evaluate the lattice correlation both ways on the full Fock space at each
/// elapsed time.
pub fn matrix_element_invariance(sc: &LatticeScenario, elapsed: &[f64]) -> Result<Vec<InvarianceSample>> {
    sc.validate()?;
    let n = sc.config.sites;
    let space = FockSpace::full(ModeSet::lattice(n)?)?;
    let h = lattice_kinetic_operator(&space, &sc.config)?
        .add(&lattice_interaction_operator(&space, &sc.site_coupling())?.scale(C64::new(sc.epsilon, 0.0)))?;
    let xi = lattice_correlation_operator(&space, n, &sc.analyzers)?;
    let pair = lattice_pair_amplitude(sc)?;
    let v = build_v(&space, &pair, FRAC_PI_2)?;
    let psi0 = lattice_initial_state(&space, sc)?;
    let vac = FockVector::vacuum(space.clone())?;
    let prop = SpectralPropagator::new(&h)?;
    let mut out = Vec::with_capacity(elapsed.len());
    for &tau in elapsed {
        let u = prop.unitary(tau);
        let xi_t = transform_operator(&u, &xi)?;
        let xi_v = transform_operator(&v, &xi_t)?;
        let standard = expectation(&psi0, &xi_t)?;
        let vacuum = expectation(&vac, &xi_v)?;
        out.push(InvarianceSample { elapsed: tau, standard: standard.re, vacuum: vacuum.re });
    }
    Ok(out)
}
