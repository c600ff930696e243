//! Test oracles built independently of the library's basis and operator code.
#![allow(dead_code)]

use std::collections::HashMap;

use std::collections::HashSet;

use giantcz::tomography::{build_choi, CompLabel, Evolved};
use giantcz::{
    build_effective_hamiltonian, build_hamiltonian, evolve, AtomSpec, Basis, BasisState, ChoiMatrix,
    CouplingPoint, LatticeSpec, Sector, StateVector, SystemSpec, TimeGrid,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Local dimension of every subsystem: atoms have three levels, cavities are
/// truncated at two photons.
pub const LOCAL: usize = 3;

/// Sparse matrix on the full product space as a map `(row, col) -> value`.
pub type Triplets = HashMap<(usize, usize), Complex64>;

fn lowering() -> [[f64; 3]; 3] {
    let s2 = 2f64.sqrt();
    [[0.0, 1.0, 0.0], [0.0, 0.0, s2], [0.0, 0.0, 0.0]]
}

fn raising() -> [[f64; 3]; 3] {
    let l = lowering();
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = l[j][i];
        }
    }
    r
}

fn number() -> [[f64; 3]; 3] {
    [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]
}

/// Subsystem order: atom 1, atom 2, cavity 0, ..., cavity N-1.
pub struct ProductSpace {
    pub num_sites: usize,
}

impl ProductSpace {
    pub fn subsystems(&self) -> usize {
        self.num_sites + 2
    }

    pub fn dim(&self) -> usize {
        LOCAL.pow(self.subsystems() as u32)
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        let n = self.subsystems();
        let mut d = vec![0; n];
        let mut x = index;
        for slot in (0..n).rev() {
            d[slot] = x % LOCAL;
            x /= LOCAL;
        }
        d
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &d| acc * LOCAL + d)
    }

    /// `coef * op_a (x) op_b (x) identity` with operators acting on the given
    /// subsystem slots, accumulated into `out`.
    pub fn add_product(&self, out: &mut Triplets, coef: Complex64, factors: &[(usize, [[f64; 3]; 3])]) {
        for col in 0..self.dim() {
            let digits = self.digits(col);
            let mut targets = vec![(digits.clone(), coef)];
            for &(slot, op) in factors.iter().rev() {
                let mut next = Vec::new();
                for (d, amp) in targets {
                    for row in 0..LOCAL {
                        let v = op[row][d[slot]];
                        if v != 0.0 {
                            let mut nd = d.clone();
                            nd[slot] = row;
                            next.push((nd, amp * v));
                        }
                    }
                }
                targets = next;
            }
            for (d, amp) in targets {
                *out.entry((self.index(&d), col)).or_insert(Complex64::new(0.0, 0.0)) += amp;
            }
        }
    }

    /// Hamiltonian written directly as a sum of local operator products.
    pub fn hamiltonian(&self, spec: &SystemSpec, with_decay: bool) -> Triplets {
        let mut h = Triplets::new();
        let n = number();
        let (a, ad) = (lowering(), raising());
        for (slot, atom) in spec.atoms.iter().enumerate() {
            // omega n + alpha/2 n (n - 1) is diagonal in the level index
            let mut diag = [[0.0; 3]; 3];
            for lvl in 0..3u8 {
                diag[lvl as usize][lvl as usize] = atom.level_energy(lvl);
            }
            self.add_product(&mut h, c(1.0, 0.0), &[(slot, diag)]);
            if with_decay {
                self.add_product(&mut h, c(0.0, -0.5 * atom.decay), &[(slot, n)]);
            }
            for p in &atom.points {
                let cav = 2 + p.site;
                self.add_product(&mut h, c(p.strength, 0.0), &[(cav, ad), (slot, a)]);
                self.add_product(&mut h, c(p.strength, 0.0), &[(slot, ad), (cav, a)]);
            }
        }
        let j = spec.lattice.hopping;
        for s in 0..self.num_sites.saturating_sub(1) {
            self.add_product(&mut h, c(-j, 0.0), &[(2 + s, ad), (3 + s, a)]);
            self.add_product(&mut h, c(-j, 0.0), &[(3 + s, ad), (2 + s, a)]);
        }
        for s in 0..self.num_sites {
            self.add_product(&mut h, c(spec.lattice.band_center, 0.0), &[(2 + s, n)]);
            if with_decay {
                self.add_product(&mut h, c(0.0, -0.5 * spec.lattice.cavity_decay), &[(2 + s, n)]);
            }
        }
        h.retain(|_, v| v.norm() > 0.0);
        h
    }

    pub fn excitations(&self, index: usize) -> usize {
        self.digits(index).iter().sum()
    }
}

pub fn random_spec(rng: &mut ChaCha8Rng, num_sites: usize, with_decay: bool) -> SystemSpec {
    let atom = |rng: &mut ChaCha8Rng| {
        let count = rng.random_range(1..=num_sites.min(3));
        let mut sites: Vec<usize> = (0..num_sites).collect();
        for i in 0..count {
            let k = rng.random_range(i..num_sites);
            sites.swap(i, k);
        }
        AtomSpec {
            omega: rng.random_range(-2.0..2.0),
            anharmonicity: rng.random_range(-3.0..0.0),
            decay: if with_decay { rng.random_range(0.0..0.05) } else { 0.0 },
            points: sites[..count]
                .iter()
                .map(|&s| CouplingPoint::new(s, rng.random_range(-0.5..0.5)))
                .collect(),
        }
    };
    let a1 = atom(rng);
    let a2 = atom(rng);
    let mut lattice = LatticeSpec::new(num_sites);
    lattice.hopping = rng.random_range(0.5..1.5);
    lattice.band_center = rng.random_range(-0.3..0.3);
    if with_decay {
        lattice.cavity_decay = rng.random_range(0.0..0.05);
    }
    SystemSpec { lattice, atoms: [a1, a2] }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `exp(-i H t) psi` for Hermitian `H` by eigendecomposition.
pub fn exact_evolution(h: &DMatrix<Complex64>, psi: &[Complex64], t: f64) -> Vec<Complex64> {
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let coeffs = v.adjoint() * nalgebra::DVector::from_column_slice(psi);
    let phased = nalgebra::DVector::from_iterator(
        coeffs.len(),
        coeffs
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(&a, &e)| a * Complex64::from_polar(1.0, -e * t)),
    );
    (v * phased).iter().copied().collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn digits_of(space: &ProductSpace, state: BasisState) -> Vec<usize> {
    let mut d = vec![0; space.subsystems()];
    match state {
        BasisState::AtomsOnly { n1, n2 } => {
            d[0] = n1 as usize;
            d[1] = n2 as usize;
        }
        BasisState::OnePhoton { n1, n2, site } => {
            d[0] = n1 as usize;
            d[1] = n2 as usize;
            d[2 + site] += 1;
        }
        BasisState::TwoPhoton { first, second } => {
            d[2 + first] += 1;
            d[2 + second] += 1;
        }
    }
    d
}

/// Largest entrywise deviation between the library operator and the
/// product-space oracle over sectors 0, 1 and 2. Fails if the oracle couples
/// a basis state to a state of equal excitation number outside the basis.
pub fn oracle_deviation(num_sites: usize, seed: u64, with_decay: bool) -> Result<f64, String> {
    let spec = random_spec(&mut rng(seed), num_sites, with_decay);
    let space = ProductSpace { num_sites };
    let full = space.hamiltonian(&spec, with_decay);
    let mut worst = 0.0f64;
    for sector in 0..=2usize {
        let basis = Basis::new(num_sites, Sector::try_from(sector).unwrap());
        let h = if with_decay {
            build_effective_hamiltonian(&spec, sector)
        } else {
            build_hamiltonian(&spec, sector)
        }
        .map_err(|e| e.to_string())?;
        let idx: Vec<usize> = basis
            .states()
            .iter()
            .map(|&s| space.index(&digits_of(&space, s)))
            .collect();
        let members: HashSet<usize> = idx.iter().copied().collect();
        for (i, &fi) in idx.iter().enumerate() {
            for (j, &fj) in idx.iter().enumerate() {
                let want = full.get(&(fi, fj)).copied().unwrap_or_default();
                worst = worst.max((h.get(i, j) - want).norm());
            }
        }
        for &(r, col) in full.keys() {
            if members.contains(&col) && !members.contains(&r) && space.excitations(r) == sector {
                return Err(format!("sector {sector} couples to a state outside the basis"));
            }
        }
    }
    Ok(worst)
}

/// Choi matrices at `points` equally spaced times up to `t`.
pub fn choi_at(spec: &SystemSpec, t: f64, points: usize) -> Vec<ChoiMatrix> {
    let grid = TimeGrid::new(t, points).unwrap();
    let runs: Vec<(Basis, Vec<StateVector>)> = CompLabel::ALL
        .iter()
        .map(|&label| {
            let basis = Basis::new(spec.num_sites(), label.sector());
            let h = build_effective_hamiltonian(spec, label.sector().excitations()).unwrap();
            let psi0 = StateVector::basis_ket(&basis, label.initial_state()).unwrap();
            let states = evolve(&h, &psi0, &grid, 1e-10).unwrap();
            (basis, states)
        })
        .collect();
    (0..points)
        .map(|i| {
            let ev: [Evolved<'_>; 4] = std::array::from_fn(|m| Evolved {
                time: grid.time(i),
                state: &runs[m].1[i],
                basis: &runs[m].0,
            });
            build_choi(&ev).unwrap()
        })
        .collect()
}
