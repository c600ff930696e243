//! Projected Hamiltonians in a fixed excitation sector.
//!
//! Terms are applied to each basis ket in occupation-number form and the
//! resulting amplitudes collected into a CSR matrix. In the rotating frame the
//! cavities carry no on-site energy.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Basis, BasisState, Sector, SystemSpec};

const HERMITIAN_TOL: f64 = 1e-12;

/// Complex sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(
        dim: usize,
        mut triplets: Vec<(usize, usize, Complex64)>,
        hermitian: bool,
    ) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            if rows.last() == Some(&r) && col_idx.last() == Some(&c) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        let mut keep_cols = Vec::with_capacity(col_idx.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(col_idx).zip(values) {
            if v != Complex64::new(0.0, 0.0) {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            col_idx: keep_cols,
            values: keep_vals,
            hermitian,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new(), true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Iterates over stored `(row, col, value)` entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    /// `y = H x`.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// Largest `|H[i][j] - conj(H[j][i])|` over stored entries.
    pub fn hermitian_defect(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Writes one `row col re im` line per stored entry (0-based basis indices).
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# dim {} nnz {}", self.dim, self.nnz())?;
        for (r, c, v) in self.entries() {
            writeln!(w, "{} {} {:.17e} {:.17e}", r, c, v.re, v.im)?;
        }
        Ok(())
    }
}

/// A basis ket in occupation form: atom levels and sorted photon sites.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Ket {
    atoms: [u8; 2],
    photons: Vec<usize>,
}

impl Ket {
    fn from_state(s: BasisState) -> Self {
        match s {
            BasisState::AtomsOnly { n1, n2 } => Ket {
                atoms: [n1, n2],
                photons: vec![],
            },
            BasisState::OnePhoton { n1, n2, site } => Ket {
                atoms: [n1, n2],
                photons: vec![site],
            },
            BasisState::TwoPhoton { first, second } => Ket {
                atoms: [0, 0],
                photons: vec![first, second],
            },
        }
    }

    fn to_state(&self) -> BasisState {
        let [n1, n2] = self.atoms;
        match self.photons.as_slice() {
            [] => BasisState::AtomsOnly { n1, n2 },
            [site] => BasisState::OnePhoton { n1, n2, site: *site },
            [a, b] => BasisState::two_photon(*a, *b),
            _ => unreachable!("at most two photons"),
        }
    }

    fn occupation(&self, site: usize) -> usize {
        self.photons.iter().filter(|&&p| p == site).count()
    }

    fn remove_photon(&mut self, site: usize) {
        let pos = self.photons.iter().position(|&p| p == site).expect("photon present");
        self.photons.remove(pos);
    }

    fn add_photon(&mut self, site: usize) {
        self.photons.push(site);
        self.photons.sort_unstable();
    }
}

fn check_sector(spec: &SystemSpec, sector: usize) -> Result<Basis> {
    spec.validate()?;
    let sector = Sector::try_from(sector)?;
    Ok(Basis::new(spec.num_sites(), sector))
}

/// Hermitian Hamiltonian of the two atoms and the cavity array, projected
/// onto `sector`.
///
/// Each coupling point exchanges an excitation between its atom and the local
/// cavity through both ladder transitions with the same bare strength; the
/// `|1> <-> |2>` transition picks up the `sqrt(2)` ladder factor.
pub fn build_hamiltonian(spec: &SystemSpec, sector: usize) -> Result<SparseOperator> {
    let basis = check_sector(spec, sector)?;
    assemble(spec, &basis, false)
}

/// Hamiltonian plus the quantum-jump-free decay terms: `-i Gamma_q / 2` per
/// atomic excitation quantum and `-i Gamma_c / 2` per photon.
pub fn build_effective_hamiltonian(spec: &SystemSpec, sector: usize) -> Result<SparseOperator> {
    let basis = check_sector(spec, sector)?;
    assemble(spec, &basis, true)
}

/// Assembles the projected Hamiltonian on an already enumerated basis.
pub fn hamiltonian_on(spec: &SystemSpec, basis: &Basis, with_decay: bool) -> Result<SparseOperator> {
    spec.validate()?;
    if basis.num_sites() != spec.num_sites() {
        return Err(Error::DimensionMismatch {
            expected: spec.num_sites(),
            actual: basis.num_sites(),
        });
    }
    assemble(spec, basis, with_decay)
}

fn assemble(spec: &SystemSpec, basis: &Basis, with_decay: bool) -> Result<SparseOperator> {
    let n = spec.num_sites();
    let hop = spec.lattice.hopping;
    let gamma_c = spec.lattice.cavity_decay;
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::with_capacity(8 * basis.len());
    let mut any_decay = false;

    let push = |target: &Ket, col: usize, amp: f64, triplets: &mut Vec<_>| -> Result<()> {
        let row = basis.index_of(target.to_state())?;
        triplets.push((row, col, Complex64::new(amp, 0.0)));
        Ok(())
    };

    for (col, &state) in basis.states().iter().enumerate() {
        let ket = Ket::from_state(state);

        let mut diag = Complex64::new(0.0, 0.0);
        for (atom, &level) in spec.atoms.iter().zip(&ket.atoms) {
            diag.re += atom.level_energy(level);
            if with_decay {
                diag.im -= 0.5 * atom.decay * level as f64;
            }
        }
        diag.re += spec.lattice.band_center * ket.photons.len() as f64;
        if with_decay {
            diag.im -= 0.5 * gamma_c * ket.photons.len() as f64;
        }
        if diag.im != 0.0 {
            any_decay = true;
        }
        triplets.push((col, col, diag));

        // hopping: -J (a_s a_t^dag + h.c.) for neighbouring s, t
        let mut sites = ket.photons.clone();
        sites.dedup();
        for &s in &sites {
            let n_s = ket.occupation(s) as f64;
            for t in [s.wrapping_sub(1), s + 1] {
                if t >= n {
                    continue;
                }
                let mut out = ket.clone();
                out.remove_photon(s);
                let n_t = out.occupation(t) as f64;
                out.add_photon(t);
                push(&out, col, -hop * (n_s * (n_t + 1.0)).sqrt(), &mut triplets)?;
            }
        }

        for (m, atom) in spec.atoms.iter().enumerate() {
            let level = ket.atoms[m];
            for p in &atom.points {
                // atom lowers, photon created at p.site
                if level >= 1 && ket.photons.len() < 2 {
                    let mut out = ket.clone();
                    out.atoms[m] -= 1;
                    let occ = out.occupation(p.site) as f64;
                    out.add_photon(p.site);
                    let amp = p.strength * (level as f64).sqrt() * (occ + 1.0).sqrt();
                    push(&out, col, amp, &mut triplets)?;
                }
                // atom raises, photon absorbed from p.site
                let occ = ket.occupation(p.site);
                if level <= 1 && occ >= 1 {
                    let mut out = ket.clone();
                    out.atoms[m] += 1;
                    out.remove_photon(p.site);
                    let amp = p.strength * ((level + 1) as f64).sqrt() * (occ as f64).sqrt();
                    push(&out, col, amp, &mut triplets)?;
                }
            }
        }
    }

    let op = SparseOperator::from_triplets(basis.len(), triplets, !any_decay);
    debug_assert!(any_decay || op.hermitian_defect() <= HERMITIAN_TOL * hop);
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{AtomSpec, CouplingPoint, LatticeSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spec(n: usize, g: f64) -> SystemSpec {
        SystemSpec {
            lattice: LatticeSpec::new(n),
            atoms: [
                AtomSpec {
                    omega: 0.3,
                    anharmonicity: -0.5,
                    decay: 0.0,
                    points: vec![CouplingPoint::new(0, g), CouplingPoint::new(2, 0.5 * g)],
                },
                AtomSpec {
                    omega: -0.4,
                    anharmonicity: -0.7,
                    decay: 0.0,
                    points: vec![CouplingPoint::new(1, g), CouplingPoint::new(3, g)],
                },
            ],
        }
    }

    #[test]
    fn triplets_are_summed() {
        let op = SparseOperator::from_triplets(
            2,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(0.5, 0.0)), (1, 1, c(0.0, 0.0))],
            false,
        );
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(0, 1), c(1.5, 0.0));
        assert_eq!(op.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn decoupled_atoms_have_bare_energies() {
        let s = spec(5, 0.0);
        let h = build_hamiltonian(&s, 2).unwrap();
        assert_eq!(h.get(1, 1).re, 0.3 - 0.4);
        assert_eq!(h.get(0, 0).re, 0.6 - 0.5);
        assert_eq!(h.get(2, 2).re, -0.8 - 0.7);
        for k in 0..3 {
            for j in 0..h.dim() {
                if j != k {
                    assert_eq!(h.get(k, j), c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let h = build_hamiltonian(&spec(6, 0.2), 2).unwrap();
        assert!(h.is_hermitian());
        assert!(h.hermitian_defect() <= 1e-12);
    }

    #[test]
    fn bosonic_factors_in_two_photon_block() {
        let s = spec(4, 0.2);
        let basis = Basis::new(4, Sector::Double);
        let h = build_hamiltonian(&s, 2).unwrap();
        let jj = basis.index_of(BasisState::two_photon(1, 1)).unwrap();
        let jk = basis.index_of(BasisState::two_photon(1, 2)).unwrap();
        assert!((h.get(jk, jj).re + 2f64.sqrt()).abs() < 1e-15);
        // atom 1 at site 0: |10>|0> <-> |00>|00> carries sqrt(2) g
        let one = basis.index_of(BasisState::OnePhoton { n1: 1, n2: 0, site: 0 }).unwrap();
        let zz = basis.index_of(BasisState::two_photon(0, 0)).unwrap();
        assert!((h.get(zz, one).re - 2f64.sqrt() * 0.2).abs() < 1e-15);
        // second point of atom 1 at site 2 with strength g / 2
        let z2 = basis.index_of(BasisState::two_photon(0, 2)).unwrap();
        assert!((h.get(z2, one).re - 0.1).abs() < 1e-15);
        let z3 = basis.index_of(BasisState::two_photon(0, 3)).unwrap();
        assert_eq!(h.get(z3, one), Complex64::new(0.0, 0.0));
        // |20> <-> |10>|0>: sqrt(2) g
        assert!((h.get(0, one).re - 2f64.sqrt() * 0.2).abs() < 1e-15);
    }

    #[test]
    fn sparsity_stays_linear_in_dimension() {
        let h = build_hamiltonian(&spec(40, 0.1), 2).unwrap();
        assert!(h.nnz() <= 6 * h.dim() + 200);
    }

    #[test]
    fn decay_terms_on_diagonal() {
        let mut s = spec(5, 0.1);
        s.atoms[0].decay = 0.02;
        s.atoms[1].decay = 0.02;
        s.lattice.cavity_decay = 0.06;
        let h = build_effective_hamiltonian(&s, 2).unwrap();
        assert!(!h.is_hermitian());
        let basis = Basis::new(5, Sector::Double);
        assert!((h.get(0, 0).im + 0.02).abs() < 1e-15);
        assert!((h.get(1, 1).im + 0.02).abs() < 1e-15);
        let pair = basis.index_of(BasisState::two_photon(1, 3)).unwrap();
        assert!((h.get(pair, pair).im + 0.06).abs() < 1e-15);
        let one = basis.index_of(BasisState::OnePhoton { n1: 0, n2: 1, site: 2 }).unwrap();
        assert!((h.get(one, one).im + 0.04).abs() < 1e-15);
    }

    #[test]
    fn zero_decay_matches_hermitian_build() {
        let s = spec(5, 0.1);
        assert_eq!(build_effective_hamiltonian(&s, 2).unwrap(), build_hamiltonian(&s, 2).unwrap());
    }

    #[test]
    fn negative_decay_rejected() {
        let mut s = spec(5, 0.1);
        s.lattice.cavity_decay = -1e-3;
        assert!(matches!(build_effective_hamiltonian(&s, 1), Err(Error::Config(_))));
    }

    #[test]
    fn vacuum_sector_is_zero() {
        let h = build_hamiltonian(&spec(5, 0.1), 0).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.nnz(), 0);
    }

    #[test]
    fn coordinate_dump() {
        let h = build_hamiltonian(&spec(4, 0.1), 1).unwrap();
        let mut buf = Vec::new();
        h.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), h.nnz() + 1);
    }
}
