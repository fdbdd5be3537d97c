use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;

use super::mode::{Mode, ModeSet, Species};
use crate::{Error, Result};

/// Largest mode count for which the unrestricted (all particle numbers) space
/// may be materialised.
pub const FULL_SPACE_MODE_LIMIT: usize = 12;

/// Largest number of basis states in any space.
pub const MAX_SPACE_DIM: usize = 1 << FULL_SPACE_MODE_LIMIT;

/// Occupation-number basis state; bit `p` is the occupancy of mode `p` of the
/// owning [`ModeSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockBasisState(pub u64);

impl FockBasisState {
    pub const VACUUM: FockBasisState = FockBasisState(0);

    pub fn is_occupied(self, pos: usize) -> bool {
        self.0 >> pos & 1 == 1
    }

    pub fn particle_count(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Number of occupied modes strictly before `pos`.
    pub fn occupied_before(self, pos: usize) -> u32 {
        (self.0 & ((1u64 << pos) - 1)).count_ones()
    }

    /// a†_pos applied to this state: the image state and its sign, or `None`
    /// when the mode is already occupied.
    pub fn create(self, pos: usize) -> Option<(FockBasisState, f64)> {
        if self.is_occupied(pos) {
            return None;
        }
        let sign = if self.occupied_before(pos) % 2 == 0 { 1.0 } else { -1.0 };
        Some((FockBasisState(self.0 | 1u64 << pos), sign))
    }

    /// a_pos applied to this state.
    pub fn annihilate(self, pos: usize) -> Option<(FockBasisState, f64)> {
        if !self.is_occupied(pos) {
            return None;
        }
        let sign = if self.occupied_before(pos) % 2 == 0 { 1.0 } else { -1.0 };
        Some((FockBasisState(self.0 & !(1u64 << pos)), sign))
    }
}

/// Particle-number restriction of a Fock space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    All,
    Total(usize),
    PerSpecies { species1: usize, species2: usize },
}

impl Sector {
    fn admits(&self, state: u64, mask1: u64, mask2: u64) -> bool {
        match *self {
            Sector::All => true,
            Sector::Total(n) => state.count_ones() as usize == n,
            Sector::PerSpecies { species1, species2 } => {
                (state & mask1).count_ones() as usize == species1
                    && (state & mask2).count_ones() as usize == species2
            }
        }
    }

    /// Sector reached after adding (`delta = 1`) or removing (`delta = -1`) a
    /// particle of `species`. `None` if the particle count would go negative.
    pub fn shifted(&self, species: Species, delta: isize) -> Option<Sector> {
        let add = |n: usize| n.checked_add_signed(delta);
        match *self {
            Sector::All => Some(Sector::All),
            Sector::Total(n) => add(n).map(Sector::Total),
            Sector::PerSpecies { species1, species2 } => match species {
                Species::One => add(species1).map(|s1| Sector::PerSpecies { species1: s1, species2 }),
                Species::Two => add(species2).map(|s2| Sector::PerSpecies { species1, species2: s2 }),
            },
        }
    }
}

/// Enumerate the basis of `mode_set` restricted to `sector`, in ascending
/// bitmask order.
pub fn enumerate_basis(mode_set: &ModeSet, sector: Sector) -> Result<Vec<FockBasisState>> {
    let n = mode_set.len();
    let mask1 = mode_set.species_mask(Species::One);
    let mask2 = mode_set.species_mask(Species::Two);
    let positions = |mask: u64| -> Vec<usize> { (0..n).filter(|p| mask >> p & 1 == 1).collect() };

    let mut states: Vec<u64> = match sector {
        Sector::All => {
            if n > FULL_SPACE_MODE_LIMIT {
                return Err(Error::Resource(format!(
                    "full Fock space over {n} modes exceeds the {FULL_SPACE_MODE_LIMIT}-mode limit"
                )));
            }
            (0..1u64 << n).collect()
        }
        Sector::Total(k) => {
            if k > n {
                return Err(Error::EmptySector { requested: k, modes: n });
            }
            check_dim(binomial(n, k))?;
            (0..n).combinations(k).map(|c| c.iter().fold(0u64, |a, &p| a | 1 << p)).collect()
        }
        Sector::PerSpecies { species1, species2 } => {
            let p1 = positions(mask1);
            let p2 = positions(mask2);
            if species1 > p1.len() {
                return Err(Error::EmptySector { requested: species1, modes: p1.len() });
            }
            if species2 > p2.len() {
                return Err(Error::EmptySector { requested: species2, modes: p2.len() });
            }
            check_dim(binomial(p1.len(), species1).saturating_mul(binomial(p2.len(), species2)))?;
            let c1: Vec<u64> = p1
                .iter()
                .combinations(species1)
                .map(|c| c.iter().fold(0u64, |a, &&p| a | 1 << p))
                .collect();
            let c2: Vec<u64> = p2
                .iter()
                .combinations(species2)
                .map(|c| c.iter().fold(0u64, |a, &&p| a | 1 << p))
                .collect();
            c1.iter().cartesian_product(c2.iter()).map(|(a, b)| a | b).collect()
        }
    };
    debug_assert!(states.iter().all(|&s| sector.admits(s, mask1, mask2)));
    states.sort_unstable();
    Ok(states.into_iter().map(FockBasisState).collect())
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_SPACE_DIM {
        Err(Error::Resource(format!("sector dimension {dim} exceeds the {MAX_SPACE_DIM}-state budget")))
    } else {
        Ok(())
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// A mode set together with an enumerated (sector-restricted) basis.
#[derive(Debug, PartialEq)]
pub struct FockSpace {
    modes: ModeSet,
    sector: Sector,
    states: Vec<FockBasisState>,
    index: HashMap<u64, usize>,
}

impl FockSpace {
    pub fn new(modes: ModeSet, sector: Sector) -> Result<Arc<Self>> {
        let states = enumerate_basis(&modes, sector)?;
        let index = states.iter().enumerate().map(|(i, s)| (s.0, i)).collect();
        Ok(Arc::new(FockSpace { modes, sector, states, index }))
    }

    pub fn full(modes: ModeSet) -> Result<Arc<Self>> {
        Self::new(modes, Sector::All)
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockBasisState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> FockBasisState {
        self.states[index]
    }

    pub fn index_of(&self, state: FockBasisState) -> Option<usize> {
        self.index.get(&state.0).copied()
    }

    /// Bitmask with exactly the given modes occupied.
    pub fn state_with(&self, occupied: &[Mode]) -> Result<FockBasisState> {
        occupied.iter().try_fold(FockBasisState::VACUUM, |acc, m| {
            let p = self.modes.require(m)?;
            Ok(FockBasisState(acc.0 | 1 << p))
        })
    }

    /// Whether two spaces share the same mode set and sector.
    pub fn same_as(&self, other: &FockSpace) -> bool {
        std::ptr::eq(self, other) || (self.modes == other.modes && self.sector == other.sector)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let m4 = ModeSet::eprb4();
        assert_eq!(enumerate_basis(&m4, Sector::All).unwrap().len(), 16);
        assert_eq!(enumerate_basis(&m4, Sector::Total(2)).unwrap().len(), 6);
        assert_eq!(
            enumerate_basis(&m4, Sector::Total(5)),
            Err(Error::EmptySector { requested: 5, modes: 4 })
        );
    }

    #[test]
    fn per_species_sector_matches_brute_force() {
        // 4 sites x 4 channels = 16 modes, one particle of each species.
        let set = ModeSet::lattice(4).unwrap();
        assert_eq!(set.len(), 16);
        let fast = enumerate_basis(&set, Sector::PerSpecies { species1: 1, species2: 1 }).unwrap();
        let m1 = set.species_mask(Species::One);
        let m2 = set.species_mask(Species::Two);
        let brute: Vec<_> = (0u64..1 << 16)
            .filter(|s| (s & m1).count_ones() == 1 && (s & m2).count_ones() == 1)
            .map(FockBasisState)
            .collect();
        assert_eq!(brute.len(), 64);
        assert_eq!(fast, brute);
    }

    #[test]
    fn index_round_trip() {
        let space = FockSpace::full(ModeSet::lattice(2).unwrap()).unwrap();
        for i in 0..space.dim() {
            assert_eq!(space.index_of(space.state(i)), Some(i));
        }
    }

    #[test]
    fn full_space_budget() {
        let set = ModeSet::lattice(4).unwrap();
        assert!(matches!(FockSpace::full(set), Err(Error::Resource(_))));
    }

    #[test]
    fn signed_ladder_on_bits() {
        let s = FockBasisState(0b101);
        assert_eq!(s.create(1), Some((FockBasisState(0b111), -1.0)));
        assert_eq!(s.create(0), None);
        assert_eq!(s.annihilate(2), Some((FockBasisState(0b001), -1.0)));
        assert_eq!(s.annihilate(0), Some((FockBasisState(0b100), 1.0)));
    }
}
