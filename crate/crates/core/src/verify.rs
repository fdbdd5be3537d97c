//! Invariant suites. Each check records the measured deviation next to its
//! tolerance so a report shows how close every invariant is to its bound.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::eprb::analyzers::{correlation_closed_form, correlation_with_weight, sphere_grid, AnalyzerPair, CorrelationSample};
use crate::eprb::estimator::fit_two_gamma;
use crate::eprb::first_quantized::{
    build_u_e, build_xi, correlation_1q, entangling_unitary_closed, entangling_unitary_exp, sandwich, total_spin,
    total_spin_state,
};
use crate::eprb::fock_model::{
    build_fock_g, build_fock_xi, build_total_spin, fock_total_spin_state, total_spin_squared, FockEprbModel,
};
use crate::field::coupling::{CouplingProfile, GridSpec, TimeProfile};
use crate::field::entanglement::{
    entanglement_l_gaussian, entanglement_l_point, entanglement_l_quadrature, FieldScenario,
};
use crate::field::green::{greens_function, greens_function_1d};
use crate::field::lattice::{
    lattice_correlation_operator, perturbation_order_scan, LatticeConfig, LatticeExact, LatticePropagator,
    LatticeScenario,
};
use crate::field::wavepacket::{bracket_by_quadrature, propagate_gaussian_1d, Wavepacket};
use crate::fock::{
    apply_creation, build_two_body, expectation, number_operator, FockOperator, FockSpace, FockVector, Mode,
    ModeSet, Sector, Species, SpectralPropagator, Spin, TwoBodyCoeffs,
};
use crate::linalg::{expm_hermitian, unitarity_error as dense_unitarity_error};
use crate::quadrature::AdaptiveIntegrator;
use crate::vacuum::{
    build_v, build_v_closed, build_w, locality_support_check, matrix_element_invariance, pair_state,
    rotation_error, transform_operator, bch_expansion_check, PairAmplitude,
};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Algebra,
    Eprb,
    Field,
    VacuumRep,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Algebra, Suite::Eprb, Suite::Field, Suite::VacuumRep];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Eprb => "eprb",
            Suite::Field => "field",
            Suite::VacuumRep => "vacuum-rep",
        }
    }

    /// Suites named by `s`; `all` expands to every suite.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Ok(vec![s.parse()?])
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown suite '{s}' (expected algebra, eprb, field, vacuum-rep or all)")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Direction of the bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(f, "{status} [{}] {}: {:.3e} {op} {:.1e}", self.suite, self.name, self.measured, self.tolerance)
    }
}

struct Recorder {
    suite: Suite,
    checks: Vec<Check>,
}

impl Recorder {
    fn push(&mut self, name: impl Into<String>, measured: f64, tolerance: f64, bound: Bound) {
        let passed = match bound {
            Bound::AtMost => measured <= tolerance,
            Bound::AtLeast => measured >= tolerance,
        };
        self.checks.push(Check { suite: self.suite, name: name.into(), measured, tolerance, bound, passed });
    }

    fn at_most(&mut self, name: impl Into<String>, measured: f64, tolerance: f64) {
        self.push(name, measured, tolerance, Bound::AtMost)
    }

    fn at_least(&mut self, name: impl Into<String>, measured: f64, floor: f64) {
        self.push(name, measured, floor, Bound::AtLeast)
    }
}

/// Run one suite. Errors from the underlying computations abort the suite.
pub fn run_suite(suite: Suite) -> Result<Vec<Check>> {
    let mut r = Recorder { suite, checks: Vec::new() };
    match suite {
        Suite::Algebra => algebra(&mut r)?,
        Suite::Eprb => eprb(&mut r)?,
        Suite::Field => field(&mut r)?,
        Suite::VacuumRep => vacuum_rep(&mut r)?,
    }
    Ok(r.checks)
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn dense_max_abs(m: &DMatrix<C64>) -> f64 {
    max_of(m.iter().map(|z| z.norm()))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// A fixed, normalised vector with every amplitude nonzero.
fn spread_vector(space: &Arc<FockSpace>, seed: f64) -> Result<FockVector> {
    let amps = DVector::from_fn(space.dim(), |k, _| {
        let k = k as f64;
        C64::new((1.3 * k + seed).sin() + 0.1, (0.7 * k * seed + 0.4).cos())
    });
    FockVector::new(space.clone(), amps)?.normalized()
}

/// Pairs of directions from a Fibonacci grid, offset so each pair differs.
fn analyzer_grid(n: usize) -> Vec<AnalyzerPair> {
    let dirs = sphere_grid(n);
    (0..n).map(|k| AnalyzerPair { n1: dirs[k], n2: dirs[(7 * k + 3) % n] }).collect()
}

fn rotate(v: [f64; 3], axis: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let dot = axis[0] * v[0] + axis[1] * v[1] + axis[2] * v[2];
    let cross = [axis[1] * v[2] - axis[2] * v[1], axis[2] * v[0] - axis[0] * v[2], axis[0] * v[1] - axis[1] * v[0]];
    std::array::from_fn(|d| v[d] * c + cross[d] * s + axis[d] * dot * (1.0 - c))
}

fn algebra(r: &mut Recorder) -> Result<()> {
    let sets = [("4-mode", ModeSet::eprb4()), ("8-mode", ModeSet::lattice(2)?), ("12-mode", ModeSet::lattice(3)?)];
    for (label, modes) in sets {
        let space = FockSpace::full(modes)?;
        let ann: Vec<FockOperator> =
            space.modes().iter().map(|m| FockOperator::annihilation(space.clone(), m)).collect::<Result<_>>()?;
        let cre: Vec<FockOperator> = ann.iter().map(FockOperator::adjoint).collect();
        let id = FockOperator::identity(space.clone());
        let (mut aa, mut cc, mut ac) = (0.0f64, 0.0f64, 0.0f64);
        for p in 0..ann.len() {
            for q in 0..ann.len() {
                aa = aa.max(ann[p].anticommutator(&ann[q])?.max_abs());
                cc = cc.max(cre[p].anticommutator(&cre[q])?.max_abs());
                let mixed = ann[p].anticommutator(&cre[q])?;
                ac = ac.max(if p == q { mixed.max_abs_diff(&id)? } else { mixed.max_abs() });
            }
        }
        r.at_most(format!("{label} {{a, a}} = 0"), aa, 1e-12);
        r.at_most(format!("{label} {{a+, a+}} = 0"), cc, 1e-12);
        r.at_most(format!("{label} {{a, a+}} = delta"), ac, 1e-12);
    }

    for (label, modes) in [("4-mode", ModeSet::eprb4()), ("8-mode", ModeSet::lattice(2)?)] {
        let space = FockSpace::full(modes)?;
        let mut worst = 0.0f64;
        for &state in space.states() {
            let v = FockVector::basis(space.clone(), state)?;
            for m in space.modes().iter() {
                worst = worst.max(apply_creation(m, &apply_creation(m, &v)?)?.norm());
            }
        }
        r.at_most(format!("{label} double creation vanishes on every basis state"), worst, 0.0);
    }

    let eprb_space = FockSpace::full(ModeSet::eprb4())?;
    let lattice_space =
        FockSpace::new(ModeSet::lattice(4)?, Sector::PerSpecies { species1: 1, species2: 1 })?;
    let lattice_h = {
        let config = LatticeConfig::new(4, 1.0, 1.0)?;
        crate::field::lattice::lattice_kinetic_operator(&lattice_space, &config)?.add(
            &crate::field::lattice::lattice_interaction_operator(&lattice_space, &[0.3, 1.0, 0.2, 0.7])?,
        )?
    };
    for (label, h) in [("4-mode generator", build_fock_g(&eprb_space)?), ("4-site lattice Hamiltonian", lattice_h)] {
        let space = h.space().clone();
        let prop = SpectralPropagator::new(&h)?;
        let u = spread_vector(&space, 0.3)?;
        let w = spread_vector(&space, 1.7)?;
        let (mut norm_dev, mut inner_dev) = (0.0f64, 0.0f64);
        for angle in [0.1, 1.0, 4.5, -2.2] {
            let (ut, wt) = (prop.apply(angle, &u)?, prop.apply(angle, &w)?);
            norm_dev = norm_dev.max((ut.norm() - 1.0).abs());
            inner_dev = inner_dev.max((ut.inner(&wt)? - u.inner(&w)?).norm());
        }
        r.at_most(format!("{label}: evolution preserves norm"), norm_dev, 1e-12);
        r.at_most(format!("{label}: evolution preserves inner products"), inner_dev, 1e-11);
    }

    let space = FockSpace::full(ModeSet::lattice(3)?)?;
    let n_op = number_operator(&space)?;
    // Number-conserving coefficients with no particular structure.
    let coeffs = TwoBodyCoeffs::from_fn(space.modes().clone(), |o1, o2, i1, i2| {
        let h = |m: Mode| m.species.index() * 7 + m.spin.index() * 3 + m.site.unwrap_or(0);
        let k = (h(o1) * 31 + h(o2) * 17 + h(i1) * 5 + h(i2)) as f64;
        C64::new((0.37 * k).sin(), (0.11 * k).cos()) * 0.1
    });
    let generic = build_two_body(&space, &coeffs)?;
    r.at_most("12-mode generic two-body operator commutes with N", generic.commutator(&n_op)?.max_abs(), 1e-12);
    let g = build_fock_g(&eprb_space)?;
    r.at_most(
        "4-mode generator commutes with N",
        g.commutator(&number_operator(&eprb_space)?)?.max_abs(),
        1e-12,
    );

    let spaces = [
        FockSpace::full(ModeSet::lattice(3)?)?,
        FockSpace::new(ModeSet::lattice(3)?, Sector::Total(3))?,
        FockSpace::new(ModeSet::lattice(8)?, Sector::PerSpecies { species1: 1, species2: 1 })?,
    ];
    let mismatches: usize = spaces
        .iter()
        .map(|s| (0..s.dim()).filter(|&i| s.index_of(s.state(i)) != Some(i)).count())
        .sum();
    r.at_most("basis index round trip mismatches", mismatches as f64, 0.0);
    Ok(())
}

fn eprb(r: &mut Recorder) -> Result<()> {
    let gammas: Vec<f64> = (0..20).map(|k| k as f64 * PI / 19.0 * 0.5 - 0.3).collect();
    let pairs = analyzer_grid(50);

    let unit = max_of(gammas.iter().map(|&g| build_u_e(g).map(|u| dense_unitarity_error(&u))).collect::<Result<Vec<_>>>()?);
    r.at_most("entangling unitary is unitary", unit, 1e-12);
    let routes = max_of(gammas.iter().map(|&g| dense_max_abs(&(entangling_unitary_exp(g) - entangling_unitary_closed(g)))));
    r.at_most("entangling unitary: exponential and closed form agree", routes, 1e-12);

    let fock = FockEprbModel::new()?;
    let (mut corr, mut closed) = (0.0f64, 0.0f64);
    for &g in &gammas {
        for a in &pairs {
            let c1 = correlation_1q(g, a)?;
            corr = corr.max((fock.correlation(g, a)? - c1).abs());
            closed = closed.max((c1 - correlation_closed_form(g, a)).abs());
        }
    }
    r.at_most("Fock and first-quantized correlations agree", corr, 1e-12);
    r.at_most("first-quantized correlation matches its closed form", closed, 1e-12);

    // Rigid rotations keep n1·n2 fixed.
    let axes = sphere_grid(12);
    let mut spread = 0.0f64;
    for base in pairs.iter().take(5) {
        let values: Vec<f64> = axes
            .iter()
            .enumerate()
            .map(|(k, ax)| {
                let angle = 0.4 + 0.9 * k as f64;
                let a = AnalyzerPair { n1: rotate(base.n1, *ax, angle), n2: rotate(base.n2, *ax, angle) };
                fock.correlation(FRAC_PI_4, &a)
            })
            .collect::<Result<_>>()?;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
        spread = spread.max((values[0] + base.dot()).abs());
    }
    r.at_most("singlet correlation depends only on n1.n2", spread, 1e-12);

    let j1 = total_spin();
    let j1sq = &j1[0] * &j1[0] + &j1[1] * &j1[1] + &j1[2] * &j1[2];
    let fspace = fock.space().clone();
    let jf = build_total_spin(&fspace)?;
    let jfsq = total_spin_squared(&jf)?;
    let (mut dev1, mut devf) = (0.0f64, 0.0f64);
    for (j, jz) in [(0u8, 0i8), (1, -1), (1, 0), (1, 1)] {
        let jj = f64::from(j) * (f64::from(j) + 1.0);
        let v = total_spin_state(j, jz)?;
        dev1 = dev1.max((&j1sq * &v - &v * C64::new(jj, 0.0)).norm());
        dev1 = dev1.max((&j1[2] * &v - &v * C64::new(f64::from(jz), 0.0)).norm());
        let w = fock_total_spin_state(&fspace, j, jz)?;
        devf = devf.max(jfsq.apply(&w)?.distance(&w.scale(C64::new(jj, 0.0)))?);
        devf = devf.max(jf[2].apply(&w)?.distance(&w.scale(C64::new(f64::from(jz), 0.0)))?);
    }
    r.at_most("first-quantized |J, Jz> are eigenvectors of J^2 and Jz", dev1, 1e-12);
    r.at_most("Fock |J, Jz> are eigenvectors of J^2 and Jz", devf, 1e-12);

    let xi_dev = max_of(
        pairs
            .iter()
            .take(10)
            .map(|a| -> Result<f64> {
                let xf = build_fock_xi(&fspace, a)?;
                let v = fock.evolve(0.37, fock.initial_state())?;
                let psi = entangling_unitary_exp(0.37) * crate::eprb::first_quantized::initial_state();
                Ok((expectation(&v, &xf)? - sandwich(&psi, &build_xi(a)?)).norm())
            })
            .collect::<Result<Vec<_>>>()?,
    );
    r.at_most("correlation operators give the same complex expectation", xi_dev, 1e-12);

    let mut fit_dev = 0.0f64;
    for k in 0..=8 {
        let g = FRAC_PI_4 * k as f64 / 8.0;
        let samples: Vec<CorrelationSample> =
            pairs.iter().map(|a| CorrelationSample::new(*a, correlation_closed_form(g, a))).collect::<Result<_>>()?;
        fit_dev = fit_dev.max((fit_two_gamma(&samples)?.two_gamma - (2.0 * g).sin()).abs());
    }
    r.at_most("noiseless fit recovers sin 2gamma on [0, pi/4]", fit_dev, 1e-10);
    Ok(())
}

fn packet(center: [f64; 3], velocity: [f64; 3], alpha: f64, mass: f64) -> Result<Wavepacket> {
    Wavepacket::new(center, velocity, alpha, mass)
}

fn field_scenarios() -> Result<Vec<(&'static str, FieldScenario)>> {
    let z = AnalyzerPair { n1: [0.0, 0.0, 1.0], n2: [0.0, 0.0, 1.0] };
    let mk = |wp1, wp2, coupling, t0, t| FieldScenario { wp1, wp2, coupling, epsilon: 0.01, t0, t, analyzers: z };
    let grid = GridSpec { origin: [-1.0, -1.0, -1.0], spacing: [0.25, 0.25, 0.5], shape: [9, 9, 5] };
    let n = grid.len();
    let values: Vec<Vec<f64>> =
        (0..3).map(|k| (0..n).map(|i| 0.1 + 0.01 * ((i * 7 + k) % 5) as f64).collect()).collect();
    Ok(vec![
        (
            "head-on",
            mk(packet([-5.0, 0.0, 0.0], [1.0, 0.0, 0.0], 3.0, 2.0)?, packet([5.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 3.0, 2.0)?, CouplingProfile::constant(1.0), 0.0, 10.0),
        ),
        (
            "miss distance",
            mk(packet([-5.0, 0.6, 0.0], [1.0, 0.0, 0.0], 3.0, 2.0)?, packet([5.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 3.0, 2.0)?, CouplingProfile::constant(0.8), 0.0, 10.0),
        ),
        (
            "at rest",
            mk(packet([0.0; 3], [0.0; 3], 3.0, 1.0)?, packet([0.2, -0.1, 0.0], [0.0; 3], 3.0, 1.0)?, CouplingProfile::constant(1.0), 0.0, 2.0),
        ),
        (
            "gaussian pulse",
            mk(
                packet([-5.0, 0.3, 0.0], [1.0, 0.0, 0.0], 3.0, 2.0)?,
                packet([5.0, 0.0, 0.0], [-1.0, 0.0, 0.0], 3.0, 2.0)?,
                CouplingProfile::Uniform { profile: TimeProfile::GaussianPulse { amplitude: 2.0, center: 4.5, width: 1.0 } },
                0.0,
                10.0,
            ),
        ),
        (
            "sampled grid",
            mk(
                packet([-0.3, 0.0, 0.1], [0.5, 0.0, 0.0], 4.0, 1.0)?,
                packet([0.3, 0.1, 0.0], [-0.5, 0.0, 0.0], 4.0, 1.0)?,
                CouplingProfile::SampledGrid { grid, times: vec![0.0, 0.6, 1.2], values },
                0.0,
                1.2,
            ),
        ),
    ])
}

fn field_lattice_scenario(sites: usize) -> Result<LatticeScenario> {
    let config = LatticeConfig::new(sites, 1.0, 1.0)?;
    let a = packet([1.0, 0.0, 0.0], [0.4, 0.0, 0.0], 1.0, 1.0)?;
    let b = packet([sites as f64 - 3.0, 0.0, 0.0], [-0.4, 0.0, 0.0], 1.0, 1.0)?;
    let an = AnalyzerPair::normalized([0.3, 0.2, 0.9], [0.8, -0.1, 0.4])?;
    Ok(LatticeScenario::uniform(config, a, b, 1.0, 0.0, 0.0, 3.0, an))
}

fn field(r: &mut Recorder) -> Result<()> {
    let m = 1.3;
    let mut rev = 0.0f64;
    for (x, t) in [([0.3, -0.2, 0.5], 0.7), ([1.0, 0.0, -1.0], 2.5)] {
        rev = rev.max((greens_function(x, -t, m)? - greens_function(x, t, m)?.conj()).norm());
        let product: C64 = (0..3).map(|d| greens_function_1d(x[d], t, m)).product::<Result<C64>>()?;
        rev = rev.max((greens_function(x, t, m)? - product).norm());
    }
    r.at_most("Green's function: time reversal and separability", rev, 1e-14);

    let config = LatticeConfig::new(8, 0.5, 1.0)?;
    let prop = LatticePropagator::new(&config)?;
    let group = max_of([(0.3, 1.1), (2.0, -0.7), (5.0, 4.0)].map(|(t1, t2)| {
        dense_max_abs(&(prop.matrix(t1) * prop.matrix(t2) - prop.matrix(t1 + t2)))
    }));
    r.at_most("lattice propagator group property", group, 1e-12);
    let kin = config.kinetic_matrix().map(|v| C64::new(v, 0.0));
    r.at_most(
        "lattice propagator matches exp(-iTt)",
        dense_max_abs(&(prop.matrix(1.7) - expm_hermitian(&kin, 1.7))),
        1e-12,
    );

    let wp = packet([0.3, -0.5, 1.0], [0.8, 0.1, -0.4], 2.0, 1.5)?;
    let q = AdaptiveIntegrator::default();
    let mut norm_dev = 0.0f64;
    for t in [0.0, 0.5, 2.0, 7.0] {
        let mut total = 1.0;
        for d in 0..3 {
            let c = wp.center_at(t)[d];
            let w = 10.0 / wp.width_param(t).sqrt();
            total *= q.integrate_with_breaks(c - w, c + w, &[c], |x| propagate_gaussian_1d(&wp, d, x, t).norm_sqr())?.value;
        }
        norm_dev = norm_dev.max((total - 1.0).abs());
    }
    r.at_most("free propagation conserves probability", norm_dev, 1e-6);
    let mut bracket = 0.0f64;
    for (axis, x, t) in [(0, 0.7, 0.5), (1, -1.0, 1.3), (2, 1.4, 0.2)] {
        bracket = bracket.max((bracket_by_quadrature(&wp, axis, x, t)? - propagate_gaussian_1d(&wp, axis, x, t)).norm());
    }
    r.at_most("propagated packet: quadrature against closed form", bracket, 1e-6);

    let mut min_l = f64::INFINITY;
    for (name, s) in field_scenarios()? {
        let lq = entanglement_l_quadrature(&s)?;
        let lg = entanglement_l_gaussian(&s)?;
        r.at_most(format!("L paths agree ({name})"), rel(lq, lg), 1e-4);
        min_l = min_l.min(lq).min(lg);
        let shift = [1.7, -0.4, 2.2];
        let moved = s.translated(shift);
        let dev = (entanglement_l_gaussian(&moved)? - lg).abs().max((entanglement_l_quadrature(&moved)? - lq).abs());
        r.at_most(format!("L translation covariance ({name})"), dev, 1e-10);
    }
    let point = FieldScenario {
        coupling: CouplingProfile::PointImpulse { strength: 1.6, location: [0.1, 0.2, 0.0], time: 1.3 },
        ..field_scenarios()?[2].1.clone()
    };
    let (lp, lq) = (entanglement_l_point(&point)?, entanglement_l_quadrature(&point)?);
    r.at_most("L paths agree (point impulse)", rel(lp, lq), 1e-10);
    min_l = min_l.min(lp).min(lq);
    r.at_least("L is nonnegative for nonnegative coupling, every path", min_l, 0.0);

    let sc = field_lattice_scenario(6)?.with_epsilon(0.4);
    let exact = LatticeExact::new(&sc)?;
    let h = exact.kinetic().add(&exact.interaction().scale(C64::new(sc.epsilon, 0.0)))?;
    let u = SpectralPropagator::new(&h)?.unitary(sc.t - sc.t0);
    let xi_t = transform_operator(&u, exact.correlation_operator())?;
    r.at_most("lattice correlation operator Xi(t) is hermitian", xi_t.matrix().hermiticity_error(), 1e-10);
    let c = expectation(exact.initial_state(), &xi_t)?;
    let eprb_space = FockSpace::full(ModeSet::eprb4())?;
    let mut imag = c.im.abs();
    for a in analyzer_grid(8) {
        let xi = build_fock_xi(&eprb_space, &a)?;
        imag = imag.max(expectation(&spread_vector(&eprb_space, 0.9)?, &xi)?.im.abs());
        let lx = lattice_correlation_operator(exact.space(), 6, &a)?;
        imag = imag.max(lx.matrix().hermiticity_error());
    }
    r.at_most("correlation outputs are real", imag, 1e-10);

    // The residual is odd in ε, so its leading term is cubic.
    let eight = field_lattice_scenario(8)?;
    let eps = [1e-1, 3e-2, 1e-2, 3e-3];
    let scan = perturbation_order_scan(&eight, &eps)?;
    r.at_most("8-site residual log-log slope, |slope - 3|", (scan.slope - 3.0).abs(), 0.1);
    let model = LatticeExact::new(&eight)?;
    let c0 = model.correlation(0.0)?;
    let even = max_of(eps.iter().map(|&e| -> f64 {
        match (model.correlation(e), model.correlation(-e)) {
            (Ok(p), Ok(n)) => (p + n - 2.0 * c0).abs(),
            _ => f64::INFINITY,
        }
    }));
    r.at_most("8-site exact correlation has no even part in epsilon", even, 1e-12);
    let zero_dev = (c0 - correlation_with_weight(0.0, &eight.analyzers)).abs();
    r.at_most("8-site exact and first order agree at epsilon = 0", zero_dev, 1e-12);
    Ok(())
}

fn four_mode_pair() -> Result<(Arc<FockSpace>, PairAmplitude)> {
    let space = FockSpace::full(ModeSet::eprb4())?;
    let pair = PairAmplitude::single(C64::from_polar(1.0, 0.4), C64::from_polar(1.0, -1.1))?;
    Ok((space, pair))
}

/// Lattices with amplitudes on part of the sites: 2 and 3 sites with all
/// channels, 4 sites with three channels.
fn local_lattices() -> Result<Vec<(String, Arc<FockSpace>, PairAmplitude)>> {
    let z = C64::new(0.0, 0.0);
    let all = [(Species::One, Spin::Up), (Species::One, Spin::Down), (Species::Two, Spin::Up), (Species::Two, Spin::Down)];
    let mut out = Vec::new();
    let two = FockSpace::full(ModeSet::lattice_channels(2, &all)?)?;
    out.push(("2-site".to_string(), two, PairAmplitude::on_sites(&[C64::new(0.0, 1.0), z], &[z, C64::new(0.6, 0.8)])?));
    let three = FockSpace::full(ModeSet::lattice_channels(3, &all)?)?;
    out.push((
        "3-site".to_string(),
        three,
        PairAmplitude::on_sites(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8), z], &[z, C64::new(0.8, 0.0), C64::new(0.6, 0.0)])?,
    ));
    let four = FockSpace::full(ModeSet::lattice_channels(4, &all[..2].iter().chain(&all[3..]).copied().collect::<Vec<_>>())?)?;
    out.push((
        "4-site".to_string(),
        four,
        PairAmplitude::on_sites(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8), z, z], &[C64::new(0.28, 0.96), z, z, z])?,
    ));
    Ok(out)
}

fn vacuum_rep(r: &mut Recorder) -> Result<()> {
    let (space, pair) = four_mode_pair()?;
    let thetas = [0.0, FRAC_PI_6, FRAC_PI_4, FRAC_PI_2];
    let mut unit = 0.0f64;
    let mut closed = 0.0f64;
    let mut rot = 0.0f64;
    for &th in &thetas {
        let v = build_v(&space, &pair, th)?;
        unit = unit.max(crate::fock::unitarity_error(&v));
        closed = closed.max(v.max_abs_diff(&build_v_closed(&space, &pair, th)?)?);
        rot = rot.max(rotation_error(&space, &pair, th)?);
    }
    r.at_most("V(theta) is unitary", unit, 1e-12);
    r.at_most("V(theta): exponential and closed form agree", closed, 1e-12);
    r.at_most("V(theta)|0> = cos theta |0> + sin theta |psi0>", rot, 1e-12);

    let lattices = local_lattices()?;
    let mut power = 0.0f64;
    let mut skew = 0.0f64;
    for (sp, pr) in std::iter::once((space.clone(), pair.clone())).chain(lattices.iter().map(|(_, s, p)| (s.clone(), p.clone()))) {
        let w = build_w(&sp, &pr)?;
        skew = skew.max(w.add(&w.adjoint())?.max_abs());
        let vac = FockVector::vacuum(sp.clone())?;
        let psi0 = pair_state(&sp, &pr)?;
        let mut v = vac.clone();
        for k in 1..=7usize {
            v = w.apply(&v)?;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let target = if k % 2 == 0 { &vac } else { &psi0 };
            power = power.max(v.distance(&target.scale(C64::new(sign, 0.0)))?);
        }
    }
    r.at_most("W is anti-hermitian", skew, 1e-12);
    r.at_most("W^k|0> alternates between |0> and |psi0>, k <= 7", power, 1e-10);

    let v = build_v(&space, &pair, FRAC_PI_2)?;
    let modes: Vec<Mode> = space.modes().iter().copied().collect();
    let transformed: Vec<FockOperator> = modes
        .iter()
        .map(|m| transform_operator(&v, &FockOperator::annihilation(space.clone(), m)?))
        .collect::<Result<_>>()?;
    let id = FockOperator::identity(space.clone());
    let mut alg = 0.0f64;
    for (p, ap) in transformed.iter().enumerate() {
        for (q, aq) in transformed.iter().enumerate() {
            alg = alg.max(ap.anticommutator(aq)?.max_abs());
            let mixed = ap.anticommutator(&aq.adjoint())?;
            alg = alg.max(if p == q { mixed.max_abs_diff(&id)? } else { mixed.max_abs() });
        }
    }
    r.at_most("transformed ladder operators keep their anticommutators", alg, 1e-12);

    let mut vacuum_dev = 0.0f64;
    let fock = FockEprbModel::new()?;
    let vac = FockVector::vacuum(space.clone())?;
    let psi0 = pair_state(&space, &pair)?;
    for a in analyzer_grid(6) {
        let xi = build_fock_xi(&space, &a)?;
        for gamma in [0.0, 0.3, FRAC_PI_4] {
            let xi_t = transform_operator(&fock.unitary(gamma), &xi)?;
            let standard = expectation(&psi0, &xi_t)?;
            let vacuum = expectation(&vac, &transform_operator(&v, &xi_t)?)?;
            vacuum_dev = vacuum_dev.max((standard - vacuum).norm());
        }
    }
    r.at_most("4-mode matrix elements agree in both representations", vacuum_dev, 1e-10);

    let (loc_space, loc_pair) = (space.clone(), pair.clone());
    let report = locality_support_check(&loc_space, &loc_pair)?;
    r.at_most("4-mode locality outside the support", report.outside_max_deviation, 1e-10);
    for (label, sp, pr) in &lattices {
        let report = locality_support_check(sp, pr)?;
        r.at_most(format!("{label} lattice locality outside the support"), report.outside_max_deviation, 1e-10);
        let inside = max_of(report.interior_deviations.iter().map(|(_, d)| *d));
        r.at_least(format!("{label} lattice operators inside the support do change"), inside, 1e-3);
    }

    let (_, sp, pr) = &lattices[2];
    let bch = bch_expansion_check(sp, pr, &Mode::at(Species::One, Spin::Up, 1), 20)?;
    r.at_most("BCH partial sum at order 20 against exact conjugation", bch, 1e-9);

    let config = LatticeConfig::new(3, 1.0, 1.0)?;
    let a = packet([0.0; 3], [0.5, 0.0, 0.0], 1.0, 1.0)?;
    let b = packet([1.0, 0.0, 0.0], [-0.5, 0.0, 0.0], 1.0, 1.0)?;
    let an = AnalyzerPair::normalized([0.3, -0.2, 0.9], [0.5, 0.5, 0.1])?;
    let sc = LatticeScenario::uniform(config, a, b, 1.0, 0.3, 0.0, 1.0, an);
    let samples = matrix_element_invariance(&sc, &[0.0, 0.4, 1.0])?;
    let inv = max_of(samples.iter().map(|s| (s.standard - s.vacuum).abs()));
    r.at_most("3-site lattice correlation agrees in both representations at 3 times", inv, 1e-10);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(Suite::parse_selection("all").unwrap().len(), 4);
        assert!(matches!(Suite::parse_selection("bogus"), Err(Error::Domain(_))));
    }

    #[test]
    fn recorder_handles_nan_and_bounds() {
        let mut r = Recorder { suite: Suite::Algebra, checks: Vec::new() };
        r.at_most("a", 1e-13, 1e-12);
        r.at_most("b", f64::NAN, 1e-12);
        r.at_least("c", 0.5, 1.0);
        let passed: Vec<bool> = r.checks.iter().map(|c| c.passed).collect();
        assert_eq!(passed, [true, false, false]);
        assert!(r.checks[0].to_string().starts_with("PASS [algebra] a:"));
    }

    #[test]
    fn algebra_and_eprb_suites_pass() {
        for suite in [Suite::Algebra, Suite::Eprb] {
            let checks = run_suite(suite).unwrap();
            assert!(!checks.is_empty());
            for c in &checks {
                assert!(c.passed, "{c}");
            }
        }
    }

    #[test]
    fn field_and_vacuum_suites_pass() {
        for suite in [Suite::Field, Suite::VacuumRep] {
            let checks = run_suite(suite).unwrap();
            for c in &checks {
                assert!(c.passed, "{c}");
            }
        }
    }
}
