use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Species label. Only distinctness matters; no arithmetic is done on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Species {
    One,
    Two,
}

impl Species {
    pub const ALL: [Species; 2] = [Species::One, Species::Two];

    /// Zero-based index (species 1 -> 0).
    pub fn index(self) -> usize {
        match self {
            Species::One => 0,
            Species::Two => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Species> {
        match i {
            0 => Some(Species::One),
            1 => Some(Species::Two),
            _ => None,
        }
    }
}

/// z-projection of spin; `Up` carries alpha = +1, `Down` alpha = -1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const ALL: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn alpha(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    /// The complementary spin index.
    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Spin> {
        match i {
            0 => Some(Spin::Up),
            1 => Some(Spin::Down),
            _ => None,
        }
    }
}

/// A single fermionic mode. The derived ordering (species, spin, site) is the
/// ordering used for Jordan-Wigner signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub species: Species,
    pub spin: Spin,
    pub site: Option<usize>,
}

impl Mode {
    pub const fn new(species: Species, spin: Spin) -> Self {
        Mode { species, spin, site: None }
    }

    pub const fn at(species: Species, spin: Spin, site: usize) -> Self {
        Mode { species, spin, site: Some(site) }
    }

    pub fn channel(&self) -> (Species, Spin) {
        (self.species, self.spin)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.species {
            Species::One => 1,
            Species::Two => 2,
        };
        let a = match self.spin {
            Spin::Up => "up",
            Spin::Down => "down",
        };
        match self.site {
            Some(x) => write!(f, "[{s}]{a}@{x}"),
            None => write!(f, "[{s}]{a}"),
        }
    }
}

/// Bitmasks are `u64`.
pub const MAX_MODES: usize = 64;

/// Ordered, duplicate-free set of modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModeSet {
    modes: Vec<Mode>,
}

impl ModeSet {
    pub fn new(mut modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Domain("mode set must be nonempty".into()));
        }
        if modes.len() > MAX_MODES {
            return Err(Error::Resource(format!(
                "{} modes exceed the {MAX_MODES}-mode bitmask limit",
                modes.len()
            )));
        }
        modes.sort();
        let before = modes.len();
        modes.dedup();
        if modes.len() != before {
            return Err(Error::Domain("duplicate modes in mode set".into()));
        }
        Ok(ModeSet { modes })
    }

    /// The four modes (species x spin) of the zero-dimensional model.
    pub fn eprb4() -> Self {
        let modes = Species::ALL
            .iter()
            .flat_map(|&r| Spin::ALL.iter().map(move |&i| Mode::new(r, i)))
            .collect();
        ModeSet { modes }
    }

    /// Every channel at every site of a lattice.
    pub fn lattice(sites: usize) -> Result<Self> {
        let channels: Vec<_> = Species::ALL
            .iter()
            .flat_map(|&r| Spin::ALL.iter().map(move |&i| (r, i)))
            .collect();
        Self::lattice_channels(sites, &channels)
    }

    /// A lattice restricted to the given (species, spin) channels.
    pub fn lattice_channels(sites: usize, channels: &[(Species, Spin)]) -> Result<Self> {
        if sites == 0 {
            return Err(Error::Domain("lattice needs at least one site".into()));
        }
        let modes = channels
            .iter()
            .flat_map(|&(r, i)| (0..sites).map(move |x| Mode::at(r, i, x)))
            .collect();
        Self::new(modes)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn get(&self, pos: usize) -> Option<Mode> {
        self.modes.get(pos).copied()
    }

    pub fn position(&self, mode: &Mode) -> Option<usize> {
        self.modes.binary_search(mode).ok()
    }

    /// Position of `mode`, or a domain error naming it.
    pub fn require(&self, mode: &Mode) -> Result<usize> {
        self.position(mode)
            .ok_or_else(|| Error::Domain(format!("mode {mode} is not in the mode set")))
    }

    pub fn contains(&self, mode: &Mode) -> bool {
        self.position(mode).is_some()
    }

    /// Bitmask of all modes belonging to `species`.
    pub fn species_mask(&self, species: Species) -> u64 {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, m)| m.species == species)
            .fold(0u64, |acc, (p, _)| acc | (1u64 << p))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Mode> {
        self.modes.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_species_spin_site() {
        let set = ModeSet::lattice(2).unwrap();
        let order: Vec<_> = set.iter().map(|m| m.to_string()).collect();
        assert_eq!(
            order,
            [
                "[1]up@0", "[1]up@1", "[1]down@0", "[1]down@1", "[2]up@0", "[2]up@1",
                "[2]down@0", "[2]down@1"
            ]
        );
    }

    #[test]
    fn duplicates_rejected() {
        let m = Mode::new(Species::One, Spin::Up);
        assert!(matches!(ModeSet::new(vec![m, m]), Err(Error::Domain(_))));
    }

    #[test]
    fn spin_conventions() {
        assert_eq!(Spin::Up.alpha(), 1.0);
        assert_eq!(Spin::Down.alpha(), -1.0);
        assert_eq!(Spin::Up.flip(), Spin::Down);
    }
}
