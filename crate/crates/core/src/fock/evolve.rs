use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::basis::FockSpace;
use super::operator::FockOperator;
use super::sparse::CsrMatrix;
use super::vector::FockVector;
use crate::linalg::{eigh, exp_from_eigen};
use crate::{Error, Result, C64};

struct Block {
    indices: Vec<usize>,
    values: DVector<f64>,
    vectors: DMatrix<C64>,
}

/// Spectral decomposition of a Hermitian generator, split into the connected
/// blocks of its sparsity pattern. Reusable for many angles.
pub struct SpectralPropagator {
    space: Arc<FockSpace>,
    blocks: Vec<Block>,
}

impl SpectralPropagator {
    pub fn new(h: &FockOperator) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::Precondition(format!(
                "generator is not hermitian (max |h - h†| = {:e})",
                h.matrix().hermiticity_error()
            )));
        }
        let m = h.matrix();
        let blocks = m
            .connected_components()
            .into_iter()
            .map(|indices| {
                let k = indices.len();
                let local: std::collections::HashMap<usize, usize> =
                    indices.iter().enumerate().map(|(a, &g)| (g, a)).collect();
                let mut dense = DMatrix::<C64>::zeros(k, k);
                for (a, &g) in indices.iter().enumerate() {
                    for (c, v) in m.row(g) {
                        dense[(a, local[&c])] += v;
                    }
                }
                let (values, vectors) = eigh(&dense);
                Block { indices, values, vectors }
            })
            .collect();
        Ok(SpectralPropagator { space: h.space().clone(), blocks })
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    /// Eigenvalues across all blocks, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// exp(−i·angle·h) as an operator.
    pub fn unitary(&self, angle: f64) -> FockOperator {
        let mut trip = Vec::new();
        for b in &self.blocks {
            let u = exp_from_eigen(&b.values, &b.vectors, angle);
            for (a, &r) in b.indices.iter().enumerate() {
                for (c, &col) in b.indices.iter().enumerate() {
                    trip.push((r, col, u[(a, c)]));
                }
            }
        }
        let n = self.space.dim();
        FockOperator::new(self.space.clone(), CsrMatrix::from_triplets(n, n, trip)).expect("propagator shape")
    }

    /// exp(−i·angle·h)|v⟩ without forming the full operator.
    pub fn apply(&self, angle: f64, v: &FockVector) -> Result<FockVector> {
        if !self.space.same_as(v.space()) {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), found: v.space().dim() });
        }
        let amps = v.amplitudes();
        let mut out = DVector::<C64>::zeros(amps.len());
        for b in &self.blocks {
            let local = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&g| amps[g]));
            if local.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            let coeffs = b.vectors.adjoint() * local;
            let phased = DVector::from_iterator(
                coeffs.len(),
                coeffs.iter().zip(b.values.iter()).map(|(c, &e)| c * C64::new(0.0, -angle * e).exp()),
            );
            let image = &b.vectors * phased;
            for (a, &g) in b.indices.iter().enumerate() {
                out[g] = image[a];
            }
        }
        FockVector::new(self.space.clone(), out)
    }
}

/// exp(−i·angle·h)|v⟩ for Hermitian `h`.
pub fn evolve(h: &FockOperator, angle: f64, v: &FockVector) -> Result<FockVector> {
    SpectralPropagator::new(h)?.apply(angle, v)
}

/// exp(−i·angle·h) for Hermitian `h`.
pub fn exp_hermitian(h: &FockOperator, angle: f64) -> Result<FockOperator> {
    Ok(SpectralPropagator::new(h)?.unitary(angle))
}

/// Max entrywise |u†u − 1|.
pub fn unitarity_error(u: &FockOperator) -> f64 {
    let id = FockOperator::identity(u.space().clone());
    u.adjoint().mul(u).and_then(|p| p.max_abs_diff(&id)).unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::builders::number_operator;
    use crate::fock::mode::ModeSet;

    #[test]
    fn zero_angle_is_identity() {
        let space = FockSpace::full(ModeSet::eprb4()).unwrap();
        let n = number_operator(&space).unwrap();
        let u = exp_hermitian(&n, 0.0).unwrap();
        assert!(u.max_abs_diff(&FockOperator::identity(space)).unwrap() < 1e-15);
    }

    #[test]
    fn non_hermitian_generator_rejected() {
        let space = FockSpace::full(ModeSet::eprb4()).unwrap();
        let m = *space.modes().modes().first().unwrap();
        let a = FockOperator::annihilation(space.clone(), &m).unwrap();
        let v = FockVector::vacuum(space).unwrap();
        assert!(matches!(evolve(&a, 1.0, &v), Err(Error::Precondition(_))));
    }

    #[test]
    fn number_operator_phases() {
        let space = FockSpace::full(ModeSet::eprb4()).unwrap();
        let n = number_operator(&space).unwrap();
        let u = exp_hermitian(&n, 0.3).unwrap();
        for (i, s) in space.states().iter().enumerate() {
            let expect = C64::new(0.0, -0.3 * s.particle_count() as f64).exp();
            assert!((u.element(i, i) - expect).norm() < 1e-14);
        }
        assert!(unitarity_error(&u) < 1e-14);
    }
}
