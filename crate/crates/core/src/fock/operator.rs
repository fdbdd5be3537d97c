use std::sync::Arc;

use super::basis::{FockSpace, Sector};
use super::mode::Mode;
use super::sparse::CsrMatrix;
use super::vector::FockVector;
use crate::{Error, Result, C64};

/// Tolerance for the hermiticity flag.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A linear operator on a [`FockSpace`], stored sparse.
#[derive(Clone, Debug)]
pub struct FockOperator {
    space: Arc<FockSpace>,
    matrix: CsrMatrix,
    hermitian: bool,
}

impl FockOperator {
    pub fn new(space: Arc<FockSpace>, matrix: CsrMatrix) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows().max(matrix.ncols()) });
        }
        let hermitian = matrix.hermiticity_error() <= HERMITIAN_TOL;
        Ok(FockOperator { space, matrix, hermitian })
    }

    pub fn identity(space: Arc<FockSpace>) -> Self {
        let matrix = CsrMatrix::identity(space.dim());
        FockOperator { space, matrix, hermitian: true }
    }

    pub fn zero(space: Arc<FockSpace>) -> Self {
        let n = space.dim();
        FockOperator { space, matrix: CsrMatrix::zeros(n, n), hermitian: true }
    }

    /// a_mode or a†_mode as a matrix on an unrestricted space.
    pub fn ladder(space: Arc<FockSpace>, mode: &Mode, create: bool) -> Result<Self> {
        if space.sector() != Sector::All {
            return Err(Error::Domain("ladder operator matrices need the unrestricted Fock space".into()));
        }
        let pos = space.modes().require(mode)?;
        let trip = space
            .states()
            .iter()
            .enumerate()
            .filter_map(|(col, s)| {
                let image = if create { s.create(pos) } else { s.annihilate(pos) };
                image.map(|(t, sign)| (space.index_of(t).unwrap(), col, C64::new(sign, 0.0)))
            })
            .collect();
        let n = space.dim();
        Self::new(space, CsrMatrix::from_triplets(n, n, trip))
    }

    pub fn creation(space: Arc<FockSpace>, mode: &Mode) -> Result<Self> {
        Self::ladder(space, mode, true)
    }

    pub fn annihilation(space: Arc<FockSpace>, mode: &Mode) -> Result<Self> {
        Self::ladder(space, mode, false)
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Hermitian within [`HERMITIAN_TOL`].
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    fn check_same(&self, other: &FockOperator) -> Result<()> {
        if self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() })
        }
    }

    fn with_matrix(&self, matrix: CsrMatrix) -> Self {
        let hermitian = matrix.hermiticity_error() <= HERMITIAN_TOL;
        FockOperator { space: self.space.clone(), matrix, hermitian }
    }

    pub fn adjoint(&self) -> Self {
        FockOperator { space: self.space.clone(), matrix: self.matrix.adjoint(), hermitian: self.hermitian }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.with_matrix(self.matrix.scale(s))
    }

    pub fn add(&self, other: &FockOperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with_matrix(self.matrix.add(&other.matrix)))
    }

    pub fn sub(&self, other: &FockOperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with_matrix(self.matrix.sub(&other.matrix)))
    }

    /// self · other.
    pub fn mul(&self, other: &FockOperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with_matrix(self.matrix.matmul(&other.matrix)))
    }

    /// [self, other].
    pub fn commutator(&self, other: &FockOperator) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// {self, other}.
    pub fn anticommutator(&self, other: &FockOperator) -> Result<Self> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        if !self.space.same_as(v.space()) {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.space().dim() });
        }
        FockVector::new(self.space.clone(), self.matrix.matvec(v.amplitudes()))
    }

    /// Entrywise max |self − other|.
    pub fn max_abs_diff(&self, other: &FockOperator) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.matrix.max_abs_diff(&other.matrix))
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    /// ⟨row| self |col⟩ on basis indices.
    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix.get(row, col)
    }
}

/// ⟨v|a|v⟩.
pub fn expectation(v: &FockVector, a: &FockOperator) -> Result<C64> {
    let av = a.apply(v)?;
    v.inner(&av)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::mode::ModeSet;

    #[test]
    fn anticommutators_on_four_modes() {
        let space = FockSpace::full(ModeSet::eprb4()).unwrap();
        let id = FockOperator::identity(space.clone());
        let zero = FockOperator::zero(space.clone());
        for m in space.modes().iter() {
            for n in space.modes().iter() {
                let a = FockOperator::annihilation(space.clone(), m).unwrap();
                let b = FockOperator::annihilation(space.clone(), n).unwrap();
                let bd = b.adjoint();
                assert_eq!(a.anticommutator(&b).unwrap().max_abs_diff(&zero).unwrap(), 0.0);
                assert_eq!(a.adjoint().anticommutator(&bd).unwrap().max_abs_diff(&zero).unwrap(), 0.0);
                let expect = if m == n { &id } else { &zero };
                assert_eq!(a.anticommutator(&bd).unwrap().max_abs_diff(expect).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn ladder_needs_full_space() {
        let space = FockSpace::new(ModeSet::eprb4(), Sector::Total(2)).unwrap();
        let m = *space.modes().modes().first().unwrap();
        assert!(FockOperator::creation(space, &m).is_err());
    }
}
