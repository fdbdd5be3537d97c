//! The same model on a four-mode Fock space, and the coefficient tensors that
//! the lattice model reuses site by site.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::analyzers::AnalyzerPair;
use super::first_quantized::{pair_index, spin_projection, Channel, CHANNELS};
use crate::fock::{
    build_one_body, build_two_body, expectation, FockOperator, FockSpace, FockVector, Mode, ModeSet, OneBodyCoeffs,
    SpectralPropagator, Species, Spin, TwoBodyCoeffs,
};
use crate::{Error, Result, C64};

fn delta<T: PartialEq>(a: T, b: T) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn is(c: Channel, r: Species, i: Spin) -> f64 {
    delta(c, (r, i))
}

/// Entangling-generator coefficient g(r′i′, s′j′; ri, sj), written out
/// explicitly in Kronecker deltas.
pub fn g_component(out1: Channel, out2: Channel, in1: Channel, in2: Channel) -> C64 {
    use Species::{One, Two};
    use Spin::{Down, Up};
    let a_out = is(out1, One, Up) * is(out2, Two, Down) - is(out1, Two, Down) * is(out2, One, Up);
    let b_in = is(in1, One, Down) * is(in2, Two, Up) - is(in1, Two, Up) * is(in2, One, Down);
    let b_out = is(out1, One, Down) * is(out2, Two, Up) - is(out1, Two, Up) * is(out2, One, Down);
    let a_in = is(in1, One, Up) * is(in2, Two, Down) - is(in1, Two, Down) * is(in2, One, Up);
    C64::new(0.0, 0.5) * (a_out * b_in - b_out * a_in)
}

/// Product-basis matrix element ⟨out1, out2| m |in1, in2⟩ of a 16×16 operator.
pub fn pair_matrix_element(m: &DMatrix<C64>, out1: Channel, out2: Channel, in1: Channel, in2: Channel) -> C64 {
    m[(pair_index(out1, out2), pair_index(in1, in2))]
}

/// Reduced correlation coefficient ⟨i′|n1·σ|i⟩⟨j′|n2·σ|j⟩ for a species-1
/// spin `i` and species-2 spin `j`.
pub fn xi_tilde(analyzers: &AnalyzerPair, i_out: Spin, j_out: Spin, i_in: Spin, j_in: Spin) -> C64 {
    let factor = |n: &[f64; 3], out: Spin, inp: Spin| {
        let flip = C64::new(n[0], n[1] * inp.alpha()) * delta(out, inp.flip());
        let keep = C64::new(n[2] * inp.alpha(), 0.0) * delta(out, inp);
        flip + keep
    };
    factor(&analyzers.n1, i_out, i_in) * factor(&analyzers.n2, j_out, j_in)
}

fn mode(c: Channel, site: Option<usize>) -> Mode {
    Mode { species: c.0, spin: c.1, site }
}

/// Add the two-body operator whose product-basis matrix is `m`, with
/// particle 1 at `site1` and particle 2 at `site2`, scaled by `weight`.
pub fn push_pair_operator(
    c: &mut TwoBodyCoeffs,
    site1: Option<usize>,
    site2: Option<usize>,
    weight: C64,
    mut element: impl FnMut(Channel, Channel, Channel, Channel) -> C64,
) -> Result<()> {
    for o1 in CHANNELS {
        for o2 in CHANNELS {
            for i1 in CHANNELS {
                for i2 in CHANNELS {
                    let v = element(o1, o2, i1, i2);
                    if v != C64::new(0.0, 0.0) {
                        c.push(mode(o1, site1), mode(o2, site2), mode(i1, site1), mode(i2, site2), v * weight)?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Add Σ a†_{2j′}(y) a†_{1i′}(x) ξ̃ a_{1i}(x) a_{2j}(y) for one site pair.
pub fn push_correlation_terms(
    c: &mut TwoBodyCoeffs,
    analyzers: &AnalyzerPair,
    x: Option<usize>,
    y: Option<usize>,
) -> Result<()> {
    for i_out in Spin::ALL {
        for j_out in Spin::ALL {
            for i_in in Spin::ALL {
                for j_in in Spin::ALL {
                    let v = xi_tilde(analyzers, i_out, j_out, i_in, j_in);
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    // The builder carries a factor ½ that this form does not.
                    c.push(
                        Mode { species: Species::One, spin: i_out, site: x },
                        Mode { species: Species::Two, spin: j_out, site: y },
                        Mode { species: Species::One, spin: i_in, site: x },
                        Mode { species: Species::Two, spin: j_in, site: y },
                        v * 2.0,
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// Fock-space entangling generator from the explicit coefficients.
pub fn build_fock_g(space: &Arc<FockSpace>) -> Result<FockOperator> {
    let mut c = TwoBodyCoeffs::new(space.modes().clone());
    push_pair_operator(&mut c, None, None, C64::new(1.0, 0.0), g_component)?;
    build_two_body(space, &c)
}

/// Fock-space correlation operator from the reduced coefficients ξ̃.
pub fn build_fock_xi(space: &Arc<FockSpace>, analyzers: &AnalyzerPair) -> Result<FockOperator> {
    analyzers.validate()?;
    let mut c = TwoBodyCoeffs::new(space.modes().clone());
    push_correlation_terms(&mut c, analyzers, None, None)?;
    build_two_body(space, &c)
}

/// Fock-space image of any 16×16 first-quantized operator.
pub fn build_fock_pair_operator(space: &Arc<FockSpace>, m: &DMatrix<C64>) -> Result<FockOperator> {
    if m.nrows() != 16 || m.ncols() != 16 {
        return Err(Error::DimensionMismatch { expected: 16, found: m.nrows().max(m.ncols()) });
    }
    let mut c = TwoBodyCoeffs::new(space.modes().clone());
    push_pair_operator(&mut c, None, None, C64::new(1.0, 0.0), |a, b, p, q| pair_matrix_element(m, a, b, p, q))?;
    build_two_body(space, &c)
}

/// Total spin ½Σ a† σ a along x, y, z, summed over species and sites.
pub fn build_total_spin(space: &Arc<FockSpace>) -> Result<[FockOperator; 3]> {
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut out = Vec::with_capacity(3);
    for n in axes {
        let s = spin_projection(&n);
        let mut c = OneBodyCoeffs::new(space.modes().clone());
        for m in space.modes().iter() {
            for i_out in Spin::ALL {
                let target = Mode { spin: i_out, ..*m };
                if !space.modes().contains(&target) {
                    continue;
                }
                c.push(target, *m, s[(i_out.index(), m.spin.index())] * 0.5)?;
            }
        }
        out.push(build_one_body(space, &c)?);
    }
    Ok(out.try_into().expect("three axes"))
}

/// J·J from the three components.
pub fn total_spin_squared(j: &[FockOperator; 3]) -> Result<FockOperator> {
    let mut acc = j[0].mul(&j[0])?;
    for k in &j[1..] {
        acc = acc.add(&k.mul(k)?)?;
    }
    Ok(acc)
}

/// a†_p a†_q |0⟩ on the four-mode space.
pub fn fock_pair_state(space: &Arc<FockSpace>, p: Channel, q: Channel) -> Result<FockVector> {
    FockVector::created(space.clone(), &[mode(p, None), mode(q, None)])
}

/// Fock states of definite total spin.
pub fn fock_total_spin_state(space: &Arc<FockSpace>, j: u8, jz: i8) -> Result<FockVector> {
    use Species::{One, Two};
    use Spin::{Down, Up};
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let a = fock_pair_state(space, (One, Up), (Two, Down))?;
    let b = fock_pair_state(space, (One, Down), (Two, Up))?;
    match (j, jz) {
        (1, 1) => fock_pair_state(space, (One, Up), (Two, Up)),
        (1, 0) => Ok(a.add(&b)?.scale(h)),
        (0, 0) => Ok(a.sub(&b)?.scale(h)),
        (1, -1) => fock_pair_state(space, (One, Down), (Two, Down)),
        _ => Err(Error::Domain(format!("no two-spin state with J = {j}, Jz = {jz}"))),
    }
}

/// Four-mode model with the generator diagonalised once.
pub struct FockEprbModel {
    space: Arc<FockSpace>,
    generator: FockOperator,
    propagator: SpectralPropagator,
    initial: FockVector,
}

impl FockEprbModel {
    pub fn new() -> Result<Self> {
        let space = FockSpace::full(ModeSet::eprb4())?;
        let generator = build_fock_g(&space)?;
        let propagator = SpectralPropagator::new(&generator)?;
        let initial = fock_pair_state(&space, (Species::One, Spin::Up), (Species::Two, Spin::Down))?;
        Ok(FockEprbModel { space, generator, propagator, initial })
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn generator(&self) -> &FockOperator {
        &self.generator
    }

    pub fn initial_state(&self) -> &FockVector {
        &self.initial
    }

    /// exp(−iγG)|v⟩.
    pub fn evolve(&self, gamma: f64, v: &FockVector) -> Result<FockVector> {
        self.propagator.apply(gamma, v)
    }

    pub fn unitary(&self, gamma: f64) -> FockOperator {
        self.propagator.unitary(gamma)
    }

    pub fn correlation(&self, gamma: f64, analyzers: &AnalyzerPair) -> Result<f64> {
        let xi = build_fock_xi(&self.space, analyzers)?;
        let psi = self.evolve(gamma, &self.initial)?;
        Ok(expectation(&psi, &xi)?.re)
    }
}

/// Correlation after entangling angle `gamma`, computed in Fock space.
pub fn correlation_fock(gamma: f64, analyzers: &AnalyzerPair) -> Result<f64> {
    FockEprbModel::new()?.correlation(gamma, analyzers)
}
