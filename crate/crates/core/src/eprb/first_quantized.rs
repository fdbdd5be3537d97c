//! The two-particle model in first quantization.
//!
//! Each particle carries a species label and a spin, giving four
//! single-particle states indexed `2·species + spin`. Two-particle product
//! states are indexed `4·s1 + s2` (particle 1 slow, particle 2 fast), so
//! operators are 16×16 matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::analyzers::AnalyzerPair;
use crate::fock::{Species, Spin};
use crate::linalg::expm_hermitian;
use crate::{Error, Result, C64};

pub const SINGLE_DIM: usize = 4;
pub const PAIR_DIM: usize = 16;

/// Agreement required between the exponential and closed-form unitaries.
pub const UNITARY_ROUTE_TOL: f64 = 1e-12;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A (species, spin) pair.
pub type Channel = (Species, Spin);

/// All four channels in index order.
pub const CHANNELS: [Channel; 4] = [
    (Species::One, Spin::Up),
    (Species::One, Spin::Down),
    (Species::Two, Spin::Up),
    (Species::Two, Spin::Down),
];

pub fn channel_index((r, i): Channel) -> usize {
    2 * r.index() + i.index()
}

pub fn pair_index(p1: Channel, p2: Channel) -> usize {
    SINGLE_DIM * channel_index(p1) + channel_index(p2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Action of a Pauli matrix on a spin basis state: σ|spin⟩ = coeff·|out⟩.
pub fn pauli_apply(axis: Axis, spin: Spin) -> (C64, Spin) {
    match axis {
        Axis::X => (ONE, spin.flip()),
        Axis::Y => (I * spin.alpha(), spin.flip()),
        Axis::Z => (C64::new(spin.alpha(), 0.0), spin),
    }
}

/// 2×2 matrix of n·σ in the (up, down) basis.
pub fn spin_projection(n: &[f64; 3]) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(2, 2);
    for (axis, &w) in [Axis::X, Axis::Y, Axis::Z].iter().zip(n) {
        for spin in Spin::ALL {
            let (c, out) = pauli_apply(*axis, spin);
            m[(out.index(), spin.index())] += c * w;
        }
    }
    m
}

/// Normalised product state |particle 1 in `p1`, particle 2 in `p2`⟩.
pub fn product_state(p1: Channel, p2: Channel) -> DVector<C64> {
    let mut v = DVector::zeros(PAIR_DIM);
    v[pair_index(p1, p2)] = ONE;
    v
}

/// Antisymmetrised state (|p, q⟩ − |q, p⟩)/√2. Vanishes when `p == q`.
pub fn physical_state(p: Channel, q: Channel) -> DVector<C64> {
    (product_state(p, q) - product_state(q, p)) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

/// Whether `v` is antisymmetric under particle exchange within `tol`.
pub fn is_physical(v: &DVector<C64>, tol: f64) -> bool {
    v.len() == PAIR_DIM
        && (0..SINGLE_DIM).all(|a| {
            (0..SINGLE_DIM).all(|b| (v[SINGLE_DIM * a + b] + v[SINGLE_DIM * b + a]).norm() <= tol)
        })
}

const UP1: Channel = (Species::One, Spin::Up);
const DOWN1: Channel = (Species::One, Spin::Down);
const UP2: Channel = (Species::Two, Spin::Up);
const DOWN2: Channel = (Species::Two, Spin::Down);

/// Species-1 up with species-2 down: the unentangled initial state.
pub fn initial_state() -> DVector<C64> {
    physical_state(UP1, DOWN2)
}

/// Species-1 down with species-2 up.
pub fn flipped_state() -> DVector<C64> {
    physical_state(DOWN1, UP2)
}

/// The states of definite total spin `(J, Jz)` built from one particle of each species.
pub fn total_spin_state(j: u8, jz: i8) -> Result<DVector<C64>> {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    match (j, jz) {
        (1, 1) => Ok(physical_state(UP1, UP2)),
        (1, 0) => Ok((initial_state() + flipped_state()) * h),
        (0, 0) => Ok((initial_state() - flipped_state()) * h),
        (1, -1) => Ok(physical_state(DOWN1, DOWN2)),
        _ => Err(Error::Domain(format!("no two-spin state with J = {j}, Jz = {jz}"))),
    }
}

fn outer(a: &DVector<C64>, b: &DVector<C64>) -> DMatrix<C64> {
    a * b.adjoint()
}

/// Generator i(|a⟩⟨b| − |b⟩⟨a|) rotating the initial state into the flipped one.
pub fn build_g() -> DMatrix<C64> {
    let a = initial_state();
    let b = flipped_state();
    (outer(&a, &b) - outer(&b, &a)) * I
}

/// Projector onto span{initial, flipped}.
pub fn entangled_projector() -> DMatrix<C64> {
    let a = initial_state();
    let b = flipped_state();
    outer(&a, &a) + outer(&b, &b)
}

/// exp(−iγg) by eigendecomposition.
pub fn entangling_unitary_exp(gamma: f64) -> DMatrix<C64> {
    expm_hermitian(&build_g(), gamma)
}

/// I′ + cos γ·I₂ − i sin γ·g.
pub fn entangling_unitary_closed(gamma: f64) -> DMatrix<C64> {
    let p2 = entangled_projector();
    let rest = DMatrix::<C64>::identity(PAIR_DIM, PAIR_DIM) - &p2;
    rest + p2 * C64::new(gamma.cos(), 0.0) - build_g() * (I * gamma.sin())
}

/// The entangling unitary, computed both ways; an accuracy error if the two
/// disagree by more than [`UNITARY_ROUTE_TOL`] entrywise.
pub fn build_u_e(gamma: f64) -> Result<DMatrix<C64>> {
    let exp = entangling_unitary_exp(gamma);
    let closed = entangling_unitary_closed(gamma);
    let dev = (&exp - &closed).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > UNITARY_ROUTE_TOL {
        return Err(Error::Accuracy { estimate: gamma, error_bound: dev });
    }
    Ok(exp)
}

/// Projector onto "particle `slot` has species `r`" (slot 1 or 2).
fn species_projector(slot: usize, r: Species) -> DMatrix<C64> {
    DMatrix::from_fn(PAIR_DIM, PAIR_DIM, |row, col| {
        if row != col {
            return ZERO;
        }
        let s = if slot == 1 { row / SINGLE_DIM } else { row % SINGLE_DIM };
        if s / 2 == r.index() {
            ONE
        } else {
            ZERO
        }
    })
}

/// n·σ acting on the spin of particle `slot`, identity elsewhere.
fn slot_spin(slot: usize, n: &[f64; 3]) -> DMatrix<C64> {
    let s = spin_projection(n);
    DMatrix::from_fn(PAIR_DIM, PAIR_DIM, |row, col| {
        let (a, b) = (row / SINGLE_DIM, row % SINGLE_DIM);
        let (c, d) = (col / SINGLE_DIM, col % SINGLE_DIM);
        let (moving, fixed_out, fixed_in, out, inp) =
            if slot == 1 { (a / 2 == c / 2, b, d, a, c) } else { (b / 2 == d / 2, a, c, b, d) };
        if !moving || fixed_out != fixed_in {
            ZERO
        } else {
            s[(out % 2, inp % 2)]
        }
    })
}

/// n·σ_[r]: spin of whichever particle carries species `r`.
pub fn species_spin(r: Species, n: &[f64; 3]) -> DMatrix<C64> {
    species_projector(1, r) * slot_spin(1, n) + species_projector(2, r) * slot_spin(2, n)
}

/// Spin-correlation operator: particle 1 of species 1 with particle 2 of
/// species 2, plus the term with the particles' roles exchanged.
pub fn build_xi(analyzers: &AnalyzerPair) -> Result<DMatrix<C64>> {
    analyzers.validate()?;
    let (n1, n2) = (&analyzers.n1, &analyzers.n2);
    let p1 = species_projector(1, Species::One) * species_projector(2, Species::Two);
    let p2 = species_projector(1, Species::Two) * species_projector(2, Species::One);
    let direct = &p1 * slot_spin(1, n1) * slot_spin(2, n2);
    let exchanged = &p2 * slot_spin(1, n2) * slot_spin(2, n1);
    Ok(direct + exchanged)
}

/// ⟨v| m |v⟩.
pub fn sandwich(v: &DVector<C64>, m: &DMatrix<C64>) -> C64 {
    v.dotc(&(m * v))
}

/// Correlation after entangling angle `gamma`, from the matrix sandwich.
pub fn correlation_1q(gamma: f64, analyzers: &AnalyzerPair) -> Result<f64> {
    let xi = build_xi(analyzers)?;
    let u = build_u_e(gamma)?;
    let psi = &u * initial_state();
    Ok(sandwich(&psi, &xi).re)
}

/// Precomputed pieces for evaluating many correlations.
pub struct FirstQuantizedModel {
    generator: DMatrix<C64>,
}

impl Default for FirstQuantizedModel {
    fn default() -> Self {
        FirstQuantizedModel { generator: build_g() }
    }
}

impl FirstQuantizedModel {
    pub fn generator(&self) -> &DMatrix<C64> {
        &self.generator
    }

    pub fn correlation(&self, gamma: f64, analyzers: &AnalyzerPair) -> Result<f64> {
        let xi = build_xi(analyzers)?;
        let psi = expm_hermitian(&self.generator, gamma) * initial_state();
        Ok(sandwich(&psi, &xi).re)
    }
}

/// Total spin (σ⁽¹⁾ + σ⁽²⁾)/2 along each axis.
pub fn total_spin() -> [DMatrix<C64>; 3] {
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    axes.map(|n| (slot_spin(1, &n) + slot_spin(2, &n)) * C64::new(0.5, 0.0))
}
