//! Second-quantized operators from first-quantized matrix elements.
//!
//! One-body: `Z1 = Σ a†_{m'} ζ(m'; m) a_m`.
//! Two-body: `Z2 = ½ Σ a†_{s'} a†_{r'} ζ(r', s'; r, s) a_r a_s`, where the
//! coefficient is the product-basis matrix element with particle 1 in `r` and
//! particle 2 in `s`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::basis::{FockBasisState, FockSpace};
use super::mode::{Mode, ModeSet};
use super::operator::FockOperator;
use super::sparse::CsrMatrix;
use crate::{Error, Result, C64};

/// Sparse coefficients ζ(m'; m) of a one-body operator.
#[derive(Clone, Debug, PartialEq)]
pub struct OneBodyCoeffs {
    modes: ModeSet,
    entries: Vec<(Mode, Mode, C64)>,
}

impl OneBodyCoeffs {
    pub fn new(modes: ModeSet) -> Self {
        OneBodyCoeffs { modes, entries: Vec::new() }
    }

    /// From a dense square matrix indexed by mode position.
    pub fn from_matrix(modes: ModeSet, m: &DMatrix<C64>) -> Result<Self> {
        let n = modes.len();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows().max(m.ncols()) });
        }
        let mut c = Self::new(modes);
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] != C64::new(0.0, 0.0) {
                    let (a, b) = (c.modes.get(i).unwrap(), c.modes.get(j).unwrap());
                    c.entries.push((a, b, m[(i, j)]));
                }
            }
        }
        Ok(c)
    }

    pub fn push(&mut self, out: Mode, input: Mode, value: C64) -> Result<()> {
        self.modes.require(&out)?;
        self.modes.require(&input)?;
        if value != C64::new(0.0, 0.0) {
            self.entries.push((out, input, value));
        }
        Ok(())
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn entries(&self) -> &[(Mode, Mode, C64)] {
        &self.entries
    }
}

/// A two-body coefficient ζ(r', s'; r, s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoBodyTerm {
    pub out1: Mode,
    pub out2: Mode,
    pub in1: Mode,
    pub in2: Mode,
    pub value: C64,
}

/// Sparse coefficients of a two-body operator.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoBodyCoeffs {
    modes: ModeSet,
    terms: Vec<TwoBodyTerm>,
}

impl TwoBodyCoeffs {
    pub fn new(modes: ModeSet) -> Self {
        TwoBodyCoeffs { modes, terms: Vec::new() }
    }

    /// Fill from a function over all mode quadruples `(r', s', r, s)`.
    pub fn from_fn(modes: ModeSet, mut f: impl FnMut(Mode, Mode, Mode, Mode) -> C64) -> Self {
        let list: Vec<Mode> = modes.modes().to_vec();
        let mut terms = Vec::new();
        for &out1 in &list {
            for &out2 in &list {
                for &in1 in &list {
                    for &in2 in &list {
                        let value = f(out1, out2, in1, in2);
                        if value != C64::new(0.0, 0.0) {
                            terms.push(TwoBodyTerm { out1, out2, in1, in2, value });
                        }
                    }
                }
            }
        }
        TwoBodyCoeffs { modes, terms }
    }

    pub fn push(&mut self, out1: Mode, out2: Mode, in1: Mode, in2: Mode, value: C64) -> Result<()> {
        for m in [out1, out2, in1, in2] {
            self.modes.require(&m)?;
        }
        if value != C64::new(0.0, 0.0) {
            self.terms.push(TwoBodyTerm { out1, out2, in1, in2, value });
        }
        Ok(())
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn terms(&self) -> &[TwoBodyTerm] {
        &self.terms
    }
}

fn check_modes(space: &FockSpace, modes: &ModeSet) -> Result<()> {
    if space.modes() != modes {
        return Err(Error::DimensionMismatch { expected: space.modes().len(), found: modes.len() });
    }
    Ok(())
}

/// Apply a string of ladder operations (rightmost first) to a basis state.
fn apply_string(state: FockBasisState, ops: &[(usize, bool)]) -> Option<(FockBasisState, f64)> {
    let mut s = state;
    let mut sign = 1.0;
    for &(pos, create) in ops.iter().rev() {
        let (t, sg) = if create { s.create(pos)? } else { s.annihilate(pos)? };
        s = t;
        sign *= sg;
    }
    Some((s, sign))
}

fn assemble(space: &Arc<FockSpace>, terms: &[(Vec<(usize, bool)>, C64)]) -> Result<FockOperator> {
    let mut trip = Vec::new();
    for (col, &s) in space.states().iter().enumerate() {
        for (ops, value) in terms {
            if let Some((t, sign)) = apply_string(s, ops) {
                let row = space.index_of(t).ok_or_else(|| {
                    Error::Domain("operator maps states outside the space's particle-number sector".into())
                })?;
                trip.push((row, col, value * sign));
            }
        }
    }
    let n = space.dim();
    FockOperator::new(space.clone(), CsrMatrix::from_triplets(n, n, trip))
}

/// Σ a†_{m'} ζ(m'; m) a_m on `space`.
pub fn build_one_body(space: &Arc<FockSpace>, c: &OneBodyCoeffs) -> Result<FockOperator> {
    check_modes(space, c.modes())?;
    let modes = space.modes();
    let terms: Vec<_> = c
        .entries()
        .iter()
        .map(|(o, i, v)| (vec![(modes.require(o).unwrap(), true), (modes.require(i).unwrap(), false)], *v))
        .collect();
    assemble(space, &terms)
}

/// ½ Σ a†_{s'} a†_{r'} ζ(r', s'; r, s) a_r a_s on `space`.
pub fn build_two_body(space: &Arc<FockSpace>, c: &TwoBodyCoeffs) -> Result<FockOperator> {
    check_modes(space, c.modes())?;
    let modes = space.modes();
    let pos = |m: &Mode| modes.require(m).unwrap();
    // Merge identical operator strings before assembly.
    let mut merged: HashMap<[usize; 4], C64> = HashMap::new();
    for t in c.terms() {
        *merged.entry([pos(&t.out2), pos(&t.out1), pos(&t.in1), pos(&t.in2)]).or_default() += t.value * 0.5;
    }
    let mut keys: Vec<_> = merged.keys().copied().collect();
    keys.sort_unstable();
    let terms: Vec<_> = keys
        .into_iter()
        .map(|k| (vec![(k[0], true), (k[1], true), (k[2], false), (k[3], false)], merged[&k]))
        .collect();
    assemble(space, &terms)
}

/// Σ_m a†_m a_m.
pub fn number_operator(space: &Arc<FockSpace>) -> Result<FockOperator> {
    let mut c = OneBodyCoeffs::new(space.modes().clone());
    for &m in space.modes().modes() {
        c.push(m, m, C64::new(1.0, 0.0))?;
    }
    build_one_body(space, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::basis::Sector;
    use crate::fock::mode::{Species, Spin};
    use crate::fock::operator::expectation;
    use crate::fock::vector::FockVector;

    #[test]
    fn number_operator_counts() {
        let space = FockSpace::full(ModeSet::eprb4()).unwrap();
        let n = number_operator(&space).unwrap();
        for (i, s) in space.states().iter().enumerate() {
            assert_eq!(n.element(i, i), C64::new(s.particle_count() as f64, 0.0));
        }
        let vac = FockVector::vacuum(space.clone()).unwrap();
        assert_eq!(expectation(&vac, &n).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn zero_two_body_is_zero_operator() {
        let space = FockSpace::full(ModeSet::eprb4()).unwrap();
        let z = build_two_body(&space, &TwoBodyCoeffs::new(space.modes().clone())).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let space = FockSpace::full(ModeSet::eprb4()).unwrap();
        let other = ModeSet::lattice(1).unwrap();
        assert!(build_one_body(&space, &OneBodyCoeffs::new(other)).is_err());
        assert!(OneBodyCoeffs::from_matrix(ModeSet::eprb4(), &DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn hopping_out_of_sector_is_rejected() {
        let space = FockSpace::new(ModeSet::eprb4(), Sector::PerSpecies { species1: 1, species2: 1 }).unwrap();
        let mut c = OneBodyCoeffs::new(space.modes().clone());
        c.push(Mode::new(Species::Two, Spin::Up), Mode::new(Species::One, Spin::Up), C64::new(1.0, 0.0)).unwrap();
        assert!(matches!(build_one_body(&space, &c), Err(Error::Domain(_))));
    }
}
