use std::sync::Arc;

use nalgebra::DVector;

use super::basis::{FockBasisState, FockSpace};
use super::mode::Mode;
use crate::{Error, Result, C64};

/// Complex amplitudes over the basis of a [`FockSpace`].
#[derive(Clone, Debug)]
pub struct FockVector {
    space: Arc<FockSpace>,
    amps: DVector<C64>,
}

impl FockVector {
    pub fn new(space: Arc<FockSpace>, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: amps.len() });
        }
        Ok(FockVector { space, amps })
    }

    pub fn zeros(space: Arc<FockSpace>) -> Self {
        let n = space.dim();
        FockVector { space, amps: DVector::zeros(n) }
    }

    /// Unit vector on one basis state.
    pub fn basis(space: Arc<FockSpace>, state: FockBasisState) -> Result<Self> {
        let i = space
            .index_of(state)
            .ok_or_else(|| Error::Domain(format!("basis state {:#b} is outside the space", state.0)))?;
        let mut v = Self::zeros(space);
        v.amps[i] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// The no-particle state; the space must contain it.
    pub fn vacuum(space: Arc<FockSpace>) -> Result<Self> {
        Self::basis(space, FockBasisState::VACUUM)
    }

    /// a†_{m1} a†_{m2} ... |0⟩ with the rightmost operator applied first.
    pub fn created(space: Arc<FockSpace>, ops: &[Mode]) -> Result<Self> {
        let mut state = FockBasisState::VACUUM;
        let mut sign = 1.0;
        for m in ops.iter().rev() {
            let p = space.modes().require(m)?;
            match state.create(p) {
                Some((s, sg)) => {
                    state = s;
                    sign *= sg;
                }
                None => return Ok(Self::zeros(space)),
            }
        }
        let mut v = Self::basis(space, state)?;
        v.amps *= C64::new(sign, 0.0);
        Ok(v)
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn amplitude(&self, state: FockBasisState) -> C64 {
        self.space.index_of(state).map(|i| self.amps[i]).unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Domain("cannot normalise a zero or non-finite vector".into()));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    fn check_same(&self, other: &FockVector) -> Result<()> {
        if self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.space.dim(), found: other.space.dim() })
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        self.check_same(other)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn scale(&self, s: C64) -> Self {
        FockVector { space: self.space.clone(), amps: &self.amps * s }
    }

    pub fn add(&self, other: &FockVector) -> Result<Self> {
        self.check_same(other)?;
        Ok(FockVector { space: self.space.clone(), amps: &self.amps + &other.amps })
    }

    pub fn sub(&self, other: &FockVector) -> Result<Self> {
        self.check_same(other)?;
        Ok(FockVector { space: self.space.clone(), amps: &self.amps - &other.amps })
    }

    /// ‖self − other‖.
    pub fn distance(&self, other: &FockVector) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }
}

fn ladder(mode: &Mode, v: &FockVector, create: bool) -> Result<FockVector> {
    let space = v.space();
    let pos = space.modes().require(mode)?;
    let delta = if create { 1 } else { -1 };
    let target = match space.sector().shifted(mode.species, delta) {
        Some(s) if s == space.sector() => space.clone(),
        Some(s) => FockSpace::new(space.modes().clone(), s)?,
        None => {
            // Annihilating out of a zero-particle sector: every component vanishes.
            return Ok(FockVector::zeros(space.clone()));
        }
    };
    let mut out = FockVector::zeros(target.clone());
    for (i, &s) in space.states().iter().enumerate() {
        let a = v.amps[i];
        if a == C64::new(0.0, 0.0) {
            continue;
        }
        let image = if create { s.create(pos) } else { s.annihilate(pos) };
        if let Some((t, sign)) = image {
            let j = target.index_of(t).expect("ladder image outside target sector");
            out.amps[j] += a * sign;
        }
    }
    Ok(out)
}

/// a†_mode |v⟩, with sign (−1)^(occupied modes before `mode`).
///
/// For a sector-restricted `v` the result lives in the sector with one more
/// particle of the mode's species.
pub fn apply_creation(mode: &Mode, v: &FockVector) -> Result<FockVector> {
    ladder(mode, v, true)
}

/// a_mode |v⟩, the adjoint of [`apply_creation`].
pub fn apply_annihilation(mode: &Mode, v: &FockVector) -> Result<FockVector> {
    ladder(mode, v, false)
}
