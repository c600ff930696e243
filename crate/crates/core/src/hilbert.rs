//! System description and fixed-excitation-number bases.
//!
//! Sites are 0-based everywhere in the library. Output meant for people
//! (CLI tables, CSV comments) shifts them to 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite open-boundary array of coupled cavities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub num_sites: usize,
    /// Nearest-neighbour hopping `J`, the global energy unit.
    pub hopping: f64,
    /// Cavity frequency `omega_c` added per photon; zero in the frame rotating at the band centre.
    pub band_center: f64,
    /// Cavity decay rate `Gamma_c`.
    pub cavity_decay: f64,
}

impl LatticeSpec {
    pub fn new(num_sites: usize) -> Self {
        Self {
            num_sites,
            hopping: 1.0,
            band_center: 0.0,
            cavity_decay: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sites < 2 {
            return Err(Error::Config(format!(
                "lattice needs at least 2 sites, got {}",
                self.num_sites
            )));
        }
        if !self.band_center.is_finite() {
            return Err(Error::Config("band centre is not finite".into()));
        }
        if !(self.hopping > 0.0) || !self.hopping.is_finite() {
            return Err(Error::Config(format!("hopping must be > 0, got {}", self.hopping)));
        }
        if !(self.cavity_decay >= 0.0) {
            return Err(Error::Config(format!(
                "cavity decay must be >= 0, got {}",
                self.cavity_decay
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPoint {
    pub site: usize,
    pub strength: f64,
}

impl CouplingPoint {
    pub fn new(site: usize, strength: f64) -> Self {
        Self { site, strength }
    }
}

/// A three-level giant atom: transition frequency and anharmonicity relative
/// to the band centre, intrinsic decay, and its coupling points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub omega: f64,
    pub anharmonicity: f64,
    pub decay: f64,
    pub points: Vec<CouplingPoint>,
}

impl AtomSpec {
    /// Energy of the level with `n` excitations.
    pub fn level_energy(&self, n: u8) -> f64 {
        match n {
            0 => 0.0,
            1 => self.omega,
            2 => 2.0 * self.omega + self.anharmonicity,
            _ => unreachable!("three-level atom"),
        }
    }

    fn validate(&self, label: &str, num_sites: usize) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Config(format!("{label} has no coupling points")));
        }
        if !(self.decay >= 0.0) {
            return Err(Error::Config(format!(
                "{label} decay must be >= 0, got {}",
                self.decay
            )));
        }
        for (i, p) in self.points.iter().enumerate() {
            if p.site >= num_sites {
                return Err(Error::Config(format!(
                    "{label} coupling point {} sits at site {} outside a lattice of {} sites",
                    i + 1,
                    p.site + 1,
                    num_sites
                )));
            }
            if !p.strength.is_finite() {
                return Err(Error::Config(format!("{label} coupling strength is not finite")));
            }
            if self.points[..i].iter().any(|q| q.site == p.site) {
                return Err(Error::Config(format!(
                    "{label} couples twice to site {}",
                    p.site + 1
                )));
            }
        }
        for (name, v) in [("omega", self.omega), ("anharmonicity", self.anharmonicity)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{label} {name} is not finite")));
            }
        }
        Ok(())
    }
}

/// Full physical configuration: the lattice plus exactly two atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub lattice: LatticeSpec,
    pub atoms: [AtomSpec; 2],
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        self.atoms[0].validate("atom 1", self.lattice.num_sites)?;
        self.atoms[1].validate("atom 2", self.lattice.num_sites)?;
        Ok(())
    }

    pub fn num_sites(&self) -> usize {
        self.lattice.num_sites
    }
}

/// Total excitation number of a subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sector {
    Vacuum,
    Single,
    Double,
}

impl Sector {
    pub fn excitations(self) -> usize {
        match self {
            Sector::Vacuum => 0,
            Sector::Single => 1,
            Sector::Double => 2,
        }
    }

    /// Basis dimension for a lattice of `n` sites.
    pub fn dimension(self, n: usize) -> usize {
        match self {
            Sector::Vacuum => 1,
            Sector::Single => 2 + n,
            Sector::Double => 3 + 2 * n + n * (n + 1) / 2,
        }
    }
}

impl TryFrom<usize> for Sector {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        match n {
            0 => Ok(Sector::Vacuum),
            1 => Ok(Sector::Single),
            2 => Ok(Sector::Double),
            _ => Err(Error::UnsupportedSector(n)),
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.excitations())
    }
}

/// One element of a fixed-excitation basis.
///
/// `OnePhoton` carries the atomic excitations next to a single photon;
/// `TwoPhoton` always has both atoms in the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisState {
    AtomsOnly { n1: u8, n2: u8 },
    OnePhoton { n1: u8, n2: u8, site: usize },
    TwoPhoton { first: usize, second: usize },
}

impl BasisState {
    /// Two photons with the pair stored as `first <= second`.
    pub fn two_photon(a: usize, b: usize) -> Self {
        BasisState::TwoPhoton {
            first: a.min(b),
            second: a.max(b),
        }
    }

    pub fn canonical(self) -> Self {
        match self {
            BasisState::TwoPhoton { first, second } => Self::two_photon(first, second),
            s => s,
        }
    }

    pub fn atoms(&self) -> (u8, u8) {
        match *self {
            BasisState::AtomsOnly { n1, n2 } | BasisState::OnePhoton { n1, n2, .. } => (n1, n2),
            BasisState::TwoPhoton { .. } => (0, 0),
        }
    }

    pub fn photon_count(&self) -> usize {
        match self {
            BasisState::AtomsOnly { .. } => 0,
            BasisState::OnePhoton { .. } => 1,
            BasisState::TwoPhoton { .. } => 2,
        }
    }

    pub fn excitations(&self) -> usize {
        let (n1, n2) = self.atoms();
        n1 as usize + n2 as usize + self.photon_count()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BasisState::AtomsOnly { n1, n2 } => write!(f, "|{n1}{n2}>|vac>"),
            BasisState::OnePhoton { n1, n2, site } => write!(f, "|{n1}{n2}>|{}>", site + 1),
            BasisState::TwoPhoton { first, second } => {
                write!(f, "|00>|{},{}>", first + 1, second + 1)
            }
        }
    }
}

/// Index of the unordered pair `(j, k)`, `j <= k`, in lexicographic order.
pub(crate) fn pair_index(n: usize, j: usize, k: usize) -> usize {
    debug_assert!(j <= k && k < n);
    // rows before j hold n, n-1, ..., n-j+1 pairs
    j * n - j * j.saturating_sub(1) / 2 + (k - j)
}

/// Ordered enumeration of one excitation sector.
///
/// Sector 2 is laid out as `|20>, |11>, |02>`, then `|10>|j>` and `|01>|j>`
/// for ascending `j`, then `|00>|jk>` for `j <= k` in lexicographic order.
/// Sector 1 is `|10>, |01>`, then `|00>|j>`. Sector 0 is the vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    sector: Sector,
    num_sites: usize,
    states: Vec<BasisState>,
}

impl Basis {
    pub fn new(num_sites: usize, sector: Sector) -> Self {
        let n = num_sites;
        let mut states = Vec::with_capacity(sector.dimension(n));
        match sector {
            Sector::Vacuum => states.push(BasisState::AtomsOnly { n1: 0, n2: 0 }),
            Sector::Single => {
                states.push(BasisState::AtomsOnly { n1: 1, n2: 0 });
                states.push(BasisState::AtomsOnly { n1: 0, n2: 1 });
                states.extend((0..n).map(|site| BasisState::OnePhoton { n1: 0, n2: 0, site }));
            }
            Sector::Double => {
                states.push(BasisState::AtomsOnly { n1: 2, n2: 0 });
                states.push(BasisState::AtomsOnly { n1: 1, n2: 1 });
                states.push(BasisState::AtomsOnly { n1: 0, n2: 2 });
                states.extend((0..n).map(|site| BasisState::OnePhoton { n1: 1, n2: 0, site }));
                states.extend((0..n).map(|site| BasisState::OnePhoton { n1: 0, n2: 1, site }));
                for j in 0..n {
                    states.extend((j..n).map(|k| BasisState::TwoPhoton { first: j, second: k }));
                }
            }
        }
        debug_assert_eq!(states.len(), sector.dimension(n));
        Self {
            sector,
            num_sites,
            states,
        }
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn get(&self, i: usize) -> Option<BasisState> {
        self.states.get(i).copied()
    }

    /// Position of `state` in the basis, in O(1).
    pub fn index_of(&self, state: BasisState) -> Result<usize> {
        let n = self.num_sites;
        let state = state.canonical();
        let not_found = || Error::NotFound(state.to_string());
        let site_ok = |s: usize| s < n;
        let idx = match (self.sector, state) {
            (Sector::Vacuum, BasisState::AtomsOnly { n1: 0, n2: 0 }) => 0,
            (Sector::Single, BasisState::AtomsOnly { n1: 1, n2: 0 }) => 0,
            (Sector::Single, BasisState::AtomsOnly { n1: 0, n2: 1 }) => 1,
            (Sector::Single, BasisState::OnePhoton { n1: 0, n2: 0, site }) if site_ok(site) => {
                2 + site
            }
            (Sector::Double, BasisState::AtomsOnly { n1: 2, n2: 0 }) => 0,
            (Sector::Double, BasisState::AtomsOnly { n1: 1, n2: 1 }) => 1,
            (Sector::Double, BasisState::AtomsOnly { n1: 0, n2: 2 }) => 2,
            (Sector::Double, BasisState::OnePhoton { n1: 1, n2: 0, site }) if site_ok(site) => {
                3 + site
            }
            (Sector::Double, BasisState::OnePhoton { n1: 0, n2: 1, site }) if site_ok(site) => {
                3 + n + site
            }
            (Sector::Double, BasisState::TwoPhoton { first, second }) if site_ok(second) => {
                3 + 2 * n + pair_index(n, first, second)
            }
            _ => return Err(not_found()),
        };
        Ok(idx)
    }
}

/// Enumerates the basis of `sector` for the lattice in `spec`.
pub fn enumerate_basis(spec: &SystemSpec, sector: usize) -> Result<Basis> {
    let sector = Sector::try_from(sector)?;
    Ok(Basis::new(spec.num_sites(), sector))
}
