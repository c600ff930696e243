//! Observables on evolved states: populations, the reduced two-qubit density
//! matrix, the Choi matrix of the gate channel and process fidelities.
//!
//! The computational basis is ordered `|11>, |10>, |01>, |00>` throughout.
//! Choi matrices are normalised by `d = 4`, so a trace-preserving channel has
//! unit trace and the fidelity of two unitary channels is `|Tr(U^dag V) / 4|^2`.

use nalgebra::{Matrix4, SMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{Basis, BasisState, Sector};
use crate::propagator::StateVector;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const PSD_TOL: f64 = 1e-10;

pub type Matrix16 = SMatrix<Complex64, 16, 16>;

/// Atomic labels of the computational subspace, in matrix order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompLabel {
    L11,
    L10,
    L01,
    L00,
}

impl CompLabel {
    pub const ALL: [CompLabel; 4] = [CompLabel::L11, CompLabel::L10, CompLabel::L01, CompLabel::L00];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn atoms(self) -> (u8, u8) {
        match self {
            CompLabel::L11 => (1, 1),
            CompLabel::L10 => (1, 0),
            CompLabel::L01 => (0, 1),
            CompLabel::L00 => (0, 0),
        }
    }

    pub fn from_atoms(n1: u8, n2: u8) -> Option<Self> {
        match (n1, n2) {
            (1, 1) => Some(CompLabel::L11),
            (1, 0) => Some(CompLabel::L10),
            (0, 1) => Some(CompLabel::L01),
            (0, 0) => Some(CompLabel::L00),
            _ => None,
        }
    }

    /// The atomic ket with the cavities in vacuum, in its own sector basis.
    pub fn initial_state(self) -> BasisState {
        let (n1, n2) = self.atoms();
        BasisState::AtomsOnly { n1, n2 }
    }

    pub fn sector(self) -> Sector {
        let (n1, n2) = self.atoms();
        Sector::try_from((n1 + n2) as usize).expect("computational labels have <= 2 excitations")
    }
}

fn population(psi: &StateVector, index: usize) -> Result<f64> {
    if psi.sector != Sector::Double {
        return Err(Error::WrongSector {
            expected: 2,
            actual: psi.sector.excitations(),
        });
    }
    Ok(psi.amplitudes[index].norm_sqr())
}

/// Population of `|20>|vac>`.
pub fn population_20(psi: &StateVector) -> Result<f64> {
    population(psi, 0)
}

/// Population of `|11>|vac>`.
pub fn population_11(psi: &StateVector) -> Result<f64> {
    population(psi, 1)
}

/// Population of `|02>|vac>`.
pub fn population_02(psi: &StateVector) -> Result<f64> {
    population(psi, 2)
}

/// Global index of a bath configuration, shared by all sectors:
/// vacuum, then one photon at `j`, then pairs `j <= k`.
fn bath_index(n: usize, s: &BasisState) -> usize {
    match *s {
        BasisState::AtomsOnly { .. } => 0,
        BasisState::OnePhoton { site, .. } => 1 + site,
        BasisState::TwoPhoton { first, second } => {
            1 + n + crate::hilbert::pair_index(n, first, second)
        }
    }
}

/// Amplitudes `alpha_{m b}` of a state, with `m` a computational atomic label
/// and `b` a bath configuration. Atomic components outside the computational
/// subspace (`|20>`, `|02>`) are dropped.
#[derive(Debug, Clone)]
pub struct AtomBathMatrix {
    /// `(bath index, amplitudes per label)`, sorted by bath index
    columns: Vec<(usize, [Complex64; 4])>,
}

impl AtomBathMatrix {
    pub fn from_state(psi: &StateVector, basis: &Basis) -> Result<Self> {
        if psi.sector != basis.sector() {
            return Err(Error::WrongSector {
                expected: basis.sector().excitations(),
                actual: psi.sector.excitations(),
            });
        }
        if psi.dim() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                actual: psi.dim(),
            });
        }
        let n = basis.num_sites();
        let mut columns: Vec<(usize, [Complex64; 4])> = Vec::new();
        for (s, &amp) in basis.states().iter().zip(&psi.amplitudes) {
            let (n1, n2) = s.atoms();
            let Some(label) = CompLabel::from_atoms(n1, n2) else {
                continue;
            };
            let b = bath_index(n, s);
            match columns.last_mut() {
                Some((last, col)) if *last == b => col[label.index()] = amp,
                _ => {
                    let mut col = [ZERO; 4];
                    col[label.index()] = amp;
                    columns.push((b, col));
                }
            }
        }
        columns.sort_unstable_by_key(|c| c.0);
        // merge equal bath indices that were not adjacent in the basis order
        let mut merged: Vec<(usize, [Complex64; 4])> = Vec::with_capacity(columns.len());
        for (b, col) in columns {
            match merged.last_mut() {
                Some((last, acc)) if *last == b => {
                    for (a, c) in acc.iter_mut().zip(col) {
                        *a += c;
                    }
                }
                _ => merged.push((b, col)),
            }
        }
        Ok(Self { columns: merged })
    }

    /// `M_a M_b^dag`: the 4x4 block `sum_bath alpha_a conj(alpha_b)`.
    pub fn cross_gram(&self, other: &AtomBathMatrix) -> Matrix4<Complex64> {
        let mut out = Matrix4::zeros();
        let (mut i, mut j) = (0, 0);
        while i < self.columns.len() && j < other.columns.len() {
            let (bi, ci) = &self.columns[i];
            let (bj, cj) = &other.columns[j];
            match bi.cmp(bj) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    for r in 0..4 {
                        if ci[r] == ZERO {
                            continue;
                        }
                        for c in 0..4 {
                            out[(r, c)] += ci[r] * cj[c].conj();
                        }
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }
}

/// Reduced two-qubit density matrix over `|11>, |10>, |01>, |00>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix(pub Matrix4<Complex64>);

impl ReducedDensityMatrix {
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

/// Traces out the cavities and keeps the computational atomic block.
/// Population in `|20>`, `|02>` shows up as a trace deficit.
pub fn reduce(psi: &StateVector, basis: &Basis) -> Result<ReducedDensityMatrix> {
    let m = AtomBathMatrix::from_state(psi, basis)?;
    Ok(ReducedDensityMatrix(m.cross_gram(&m)))
}

/// 16x16 Choi matrix, index `4 * input + output`, normalised by 4.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix(pub Matrix16);

impl ChoiMatrix {
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `E(|m><n|)` as a 4x4 block (without the 1/4 normalisation).
    pub fn block(&self, m: usize, n: usize) -> Matrix4<Complex64> {
        self.0.fixed_view::<4, 4>(4 * m, 4 * n).into_owned() * Complex64::new(4.0, 0.0)
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Choi matrix of a unitary channel `rho -> U rho U^dag`.
    pub fn from_unitary(u: &Matrix4<Complex64>) -> Self {
        // |Omega> = 1/2 sum_m |m> (x) U|m>
        let mut omega = SMatrix::<Complex64, 16, 1>::zeros();
        for m in 0..4 {
            for a in 0..4 {
                omega[4 * m + a] = u[(a, m)] * 0.5;
            }
        }
        Self(omega * omega.adjoint())
    }

    pub fn from_diagonal(phases: &[Complex64; 4]) -> Self {
        Self::from_unitary(&Matrix4::from_diagonal(&(*phases).into()))
    }

    /// Channel with output conjugated by the diagonal unitary `w`.
    pub fn conjugate_output(&self, w: &[Complex64; 4]) -> Self {
        let mut out = self.0;
        for r in 0..16 {
            for c in 0..16 {
                out[(r, c)] *= w[r % 4] * w[c % 4].conj();
            }
        }
        Self(out)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.min()
    }
}

/// Ideal two-qubit CZ in label order: `-1` on `|11>`.
pub fn cz_gate() -> [Complex64; 4] {
    [-ONE, ONE, ONE, ONE]
}

pub fn identity_gate() -> [Complex64; 4] {
    [ONE; 4]
}

/// An evolved computational input state.
#[derive(Debug, Clone, Copy)]
pub struct Evolved<'a> {
    pub time: f64,
    pub state: &'a StateVector,
    pub basis: &'a Basis,
}

/// Assembles `sum_{mn} |m><n| (x) E(|m><n|) / 4` from the evolutions of the
/// four computational inputs, given in label order `11, 10, 01, 00`.
///
/// The joint evolution is linear on kets and the cavities start in vacuum, so
/// `E(|m><n|)` is the cross-Gram product `M_m M_n^dag` of the evolved states.
pub fn build_choi(evolved: &[Evolved<'_>; 4]) -> Result<ChoiMatrix> {
    let t0 = evolved[0].time;
    if let Some(e) = evolved.iter().find(|e| (e.time - t0).abs() > 1e-9 * t0.abs().max(1.0)) {
        return Err(Error::Config(format!(
            "Choi inputs evolved to different times ({t0} vs {})",
            e.time
        )));
    }
    let ms = evolved
        .iter()
        .map(|e| AtomBathMatrix::from_state(e.state, e.basis))
        .collect::<Result<Vec<_>>>()?;
    Ok(choi_from_matrices(&ms))
}

pub(crate) fn choi_from_matrices(ms: &[AtomBathMatrix]) -> ChoiMatrix {
    let mut phi = Matrix16::zeros();
    for m in 0..4 {
        for n in m..4 {
            let block = ms[m].cross_gram(&ms[n]) * Complex64::new(0.25, 0.0);
            phi.fixed_view_mut::<4, 4>(4 * m, 4 * n).copy_from(&block);
            if n != m {
                phi.fixed_view_mut::<4, 4>(4 * n, 4 * m).copy_from(&block.adjoint());
            }
        }
    }
    ChoiMatrix(phi)
}

fn hermitian_sqrt(m: &Matrix16, what: &str) -> Result<Matrix16> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut vals = eig.eigenvalues;
    for v in vals.iter_mut() {
        if *v < -PSD_TOL {
            return Err(Error::NumericalIntegrity(format!(
                "{what} has eigenvalue {v:.3e} below -{PSD_TOL:e}"
            )));
        }
        *v = v.max(0.0).sqrt();
    }
    let d = Matrix16::from_diagonal(&vals.map(|v| Complex64::new(v, 0.0)));
    Ok(eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Uhlmann fidelity `[Tr sqrt(sqrt(Phi) Phi_ideal sqrt(Phi))]^2`.
///
/// A rank-one ideal `|psi><psi|` reduces this to `<psi|Phi|psi>`, which
/// avoids amplifying round-off in the null space through the square root.
pub fn process_fidelity(choi: &ChoiMatrix, ideal: &ChoiMatrix) -> Result<f64> {
    let ideal_h = (ideal.0 + ideal.0.adjoint()) * Complex64::new(0.5, 0.0);
    let ideal_eig = SymmetricEigen::new(ideal_h);
    let scale = ideal_eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    if let Some(v) = ideal_eig.eigenvalues.iter().find(|&&v| v < -PSD_TOL) {
        return Err(Error::NumericalIntegrity(format!(
            "ideal Choi matrix has eigenvalue {v:.3e} below -{PSD_TOL:e}"
        )));
    }
    let support: Vec<usize> = (0..16)
        .filter(|&i| ideal_eig.eigenvalues[i] > 1e-12 * scale)
        .collect();
    let s = hermitian_sqrt(&choi.0, "Choi matrix")?;
    if let [k] = support[..] {
        let psi = ideal_eig.eigenvectors.column(k) * Complex64::new(ideal_eig.eigenvalues[k].sqrt(), 0.0);
        let f = (psi.adjoint() * choi.0 * psi)[(0, 0)].re;
        return Ok(f.clamp(0.0, 1.0));
    }
    let inner = s * ideal.0 * s;
    let eig = SymmetricEigen::new((inner + inner.adjoint()) * Complex64::new(0.5, 0.0));
    let cutoff = 1e-14 * eig.eigenvalues.amax();
    let tr: f64 = eig
        .eigenvalues
        .iter()
        .map(|&v| if v > cutoff { v.sqrt() } else { 0.0 })
        .sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// `F = (d F_pro + 1) / (d + 1)` with `d = 4`.
pub fn average_fidelity(process: f64) -> f64 {
    (4.0 * process + 1.0) / 5.0
}

/// `Z(phi1) (x) Z(phi2)` in label order, with `Z(phi) = diag(1, e^{i phi})`.
pub fn local_z(phi1: f64, phi2: f64) -> [Complex64; 4] {
    [
        Complex64::from_polar(1.0, phi1 + phi2),
        Complex64::from_polar(1.0, phi1),
        Complex64::from_polar(1.0, phi2),
        ONE,
    ]
}

fn wrap_phase(p: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = p.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Output-conjugation phases that maximise fidelity against CZ.
///
/// Returns the corrected Choi matrix `(I (x) W) Phi (I (x) W^dag)` with
/// `W = Z(phi1) (x) Z(phi2)`, and the phases.
pub fn correct_local_phases(choi: &ChoiMatrix) -> (ChoiMatrix, f64, f64) {
    correct_local_phases_toward(choi, &cz_gate())
}

/// As [`correct_local_phases`] for an arbitrary diagonal target gate.
///
/// Against a pure target the fidelity reduces to `c^T A conj(c) / 16` with
/// `A_mn = E(|m><n|)[m][n]` and `c_m = conj(v_m) w_m`. It is a first-order
/// trigonometric polynomial in each phase separately, so coordinate ascent
/// with exact one-dimensional maximisation converges quickly. The start point
/// comes from the `<10|rho|00>` and `<01|rho|00>` phases of the `|++>` output.
pub fn correct_local_phases_toward(choi: &ChoiMatrix, target: &[Complex64; 4]) -> (ChoiMatrix, f64, f64) {
    let mut a = Matrix4::<Complex64>::zeros();
    for m in 0..4 {
        for n in 0..4 {
            a[(m, n)] = choi.0[(4 * m + m, 4 * n + n)] * 4.0;
        }
    }
    let score = |p1: f64, p2: f64| -> f64 {
        let w = local_z(p1, p2);
        let c: Vec<Complex64> = (0..4).map(|m| target[m].conj() * w[m]).collect();
        let mut s = ZERO;
        for m in 0..4 {
            for n in 0..4 {
                s += c[m] * c[n].conj() * a[(m, n)];
            }
        }
        s.re / 16.0
    };

    // rho_+ = E(|++><++|) = 1/4 sum_mn E(|m><n|)
    let mut rho_plus = Matrix4::<Complex64>::zeros();
    for m in 0..4 {
        for n in 0..4 {
            rho_plus += choi.block(m, n);
        }
    }
    let (i10, i01, i00) = (1, 2, 3);
    let seed1 = (target[i10] * target[i00].conj()).arg() - rho_plus[(i10, i00)].arg();
    let seed2 = (target[i01] * target[i00].conj()).arg() - rho_plus[(i01, i00)].arg();
    let seed1 = if rho_plus[(i10, i00)].norm() > 1e-14 { seed1 } else { 0.0 };
    let seed2 = if rho_plus[(i01, i00)].norm() > 1e-14 { seed2 } else { 0.0 };

    // labels with qubit 1 excited: 11, 10; qubit 2 excited: 11, 01
    let ascend = |mut p1: f64, mut p2: f64| -> (f64, f64, f64) {
        let mut best = score(p1, p2);
        for _ in 0..500 {
            for (qubit, excited) in [(0usize, [0usize, 1]), (1, [0, 2])] {
                let w = local_z(p1, p2);
                let c: Vec<Complex64> = (0..4).map(|m| target[m].conj() * w[m]).collect();
                let ground: Vec<usize> = (0..4).filter(|m| !excited.contains(m)).collect();
                let mut b = ZERO;
                for &m in &excited {
                    for &n in &ground {
                        b += c[m] * c[n].conj() * a[(m, n)];
                    }
                }
                if b.norm() > 1e-300 {
                    // maximise Re(e^{i delta} b)
                    let delta = -b.arg();
                    if qubit == 0 {
                        p1 += delta;
                    } else {
                        p2 += delta;
                    }
                }
            }
            let s = score(p1, p2);
            let gain = s - best;
            best = best.max(s);
            if gain.abs() < 1e-16 {
                break;
            }
        }
        (best, wrap_phase(p1), wrap_phase(p2))
    };

    let pi = std::f64::consts::PI;
    let mut best = (score(0.0, 0.0), 0.0, 0.0);
    for (d1, d2) in [(0.0, 0.0), (pi, 0.0), (0.0, pi), (pi, pi)] {
        let cand = ascend(seed1 + d1, seed2 + d2);
        if cand.0 > best.0 + 1e-13 {
            best = cand;
        }
    }
    let (_, p1, p2) = best;
    (choi.conjugate_output(&local_z(p1, p2)), p1, p2)
}

/// Summary of a gate run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateResult {
    pub gate_time: f64,
    pub process_fidelity: f64,
    pub average_fidelity: f64,
    pub local_phases: (f64, f64),
}

impl GateResult {
    pub fn new(gate_time: f64, process_fidelity: f64, local_phases: (f64, f64)) -> Self {
        Self {
            gate_time,
            process_fidelity,
            average_fidelity: average_fidelity(process_fidelity),
            local_phases,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn populations() {
        let basis = Basis::new(3, Sector::Double);
        let s = 0.5f64.sqrt();
        let mut amps = vec![ZERO; basis.len()];
        amps[0] = c(s, 0.0);
        amps[1] = c(0.0, s);
        let psi = StateVector::new(Sector::Double, amps);
        assert!((population_20(&psi).unwrap() - 0.5).abs() < 1e-15);
        assert!((population_11(&psi).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(population_02(&psi).unwrap(), 0.0);
        let single = StateVector::new(Sector::Single, vec![ZERO; 5]);
        assert!(matches!(population_20(&single), Err(Error::WrongSector { .. })));
    }

    #[test]
    fn reduce_basis_kets() {
        let basis = Basis::new(4, Sector::Double);
        let psi = StateVector::basis_ket(&basis, BasisState::AtomsOnly { n1: 1, n2: 1 }).unwrap();
        let rho = reduce(&psi, &basis).unwrap();
        assert_eq!(rho.0[(0, 0)], ONE);
        assert_eq!(rho.trace(), 1.0);
        let psi = StateVector::basis_ket(&basis, BasisState::AtomsOnly { n1: 2, n2: 0 }).unwrap();
        assert_eq!(reduce(&psi, &basis).unwrap().0, Matrix4::zeros());
    }

    #[test]
    fn reduce_shared_photon() {
        let basis = Basis::new(4, Sector::Double);
        let s = 0.5f64.sqrt();
        let mut amps = vec![ZERO; basis.len()];
        amps[basis.index_of(BasisState::OnePhoton { n1: 1, n2: 0, site: 2 }).unwrap()] = c(s, 0.0);
        amps[basis.index_of(BasisState::OnePhoton { n1: 0, n2: 1, site: 2 }).unwrap()] = c(s, 0.0);
        let rho = reduce(&StateVector::new(Sector::Double, amps), &basis).unwrap();
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            assert!((rho.0[(i, j)] - c(0.5, 0.0)).norm() < 1e-15);
        }
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_versus_cz() {
        let id = ChoiMatrix::from_diagonal(&identity_gate());
        let cz = ChoiMatrix::from_diagonal(&cz_gate());
        assert!((process_fidelity(&id, &cz).unwrap() - 0.25).abs() < 1e-12);
        assert!((process_fidelity(&cz, &cz).unwrap() - 1.0).abs() < 1e-12);
        assert!((id.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_versus_cz() {
        let mixed = ChoiMatrix(Matrix16::identity() * c(1.0 / 16.0, 0.0));
        let cz = ChoiMatrix::from_diagonal(&cz_gate());
        assert!((process_fidelity(&mixed, &cz).unwrap() - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn negative_choi_rejected() {
        let mut m = Matrix16::identity() * c(1.0 / 16.0, 0.0);
        m[(0, 0)] = c(-1e-6, 0.0);
        let cz = ChoiMatrix::from_diagonal(&cz_gate());
        assert!(matches!(
            process_fidelity(&ChoiMatrix(m), &cz),
            Err(Error::NumericalIntegrity(_))
        ));
    }

    #[test]
    fn average_fidelity_map() {
        assert!((average_fidelity(0.942) - 0.9536).abs() < 1e-12);
        assert!((average_fidelity(0.971) - 0.9768).abs() < 1e-12);
        assert_eq!(average_fidelity(1.0), 1.0);
    }

    #[test]
    fn phase_correction_recovers_local_z() {
        let (a, b) = (0.7, -2.1);
        let z = local_z(a, b);
        let cz = cz_gate();
        let u: [Complex64; 4] = std::array::from_fn(|i| z[i] * cz[i]);
        let choi = ChoiMatrix::from_diagonal(&u);
        let (fixed, p1, p2) = correct_local_phases(&choi);
        assert!((wrap_phase(p1 + a)).abs() < 1e-9, "{p1}");
        assert!((wrap_phase(p2 + b)).abs() < 1e-9, "{p2}");
        let ideal = ChoiMatrix::from_diagonal(&cz);
        assert!((process_fidelity(&fixed, &ideal).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn aligned_channel_untouched() {
        let choi = ChoiMatrix::from_diagonal(&cz_gate());
        let (fixed, p1, p2) = correct_local_phases(&choi);
        assert!(p1.abs() < 1e-10 && p2.abs() < 1e-10);
        assert!((fixed.0 - choi.0).norm() < 1e-10);
    }

    #[test]
    fn corrected_identity_versus_cz_is_one_half() {
        // max over local Z of |Tr(CZ^dag Z(a) (x) Z(b))|^2 / 16 is 8 / 16
        let id = ChoiMatrix::from_diagonal(&identity_gate());
        let (fixed, _, _) = correct_local_phases(&id);
        let f = process_fidelity(&fixed, &ChoiMatrix::from_diagonal(&cz_gate())).unwrap();
        assert!((f - 0.5).abs() < 1e-10, "{f}");
    }

    #[test]
    fn mismatched_times_rejected() {
        let b0 = Basis::new(3, Sector::Vacuum);
        let b1 = Basis::new(3, Sector::Single);
        let b2 = Basis::new(3, Sector::Double);
        let s11 = StateVector::basis_ket(&b2, CompLabel::L11.initial_state()).unwrap();
        let s10 = StateVector::basis_ket(&b1, CompLabel::L10.initial_state()).unwrap();
        let s01 = StateVector::basis_ket(&b1, CompLabel::L01.initial_state()).unwrap();
        let s00 = StateVector::basis_ket(&b0, CompLabel::L00.initial_state()).unwrap();
        let mk = |t, s, b| Evolved { time: t, state: s, basis: b };
        let ok = [mk(0.0, &s11, &b2), mk(0.0, &s10, &b1), mk(0.0, &s01, &b1), mk(0.0, &s00, &b0)];
        let choi = build_choi(&ok).unwrap();
        assert!((choi.0 - ChoiMatrix::from_diagonal(&identity_gate()).0).norm() < 1e-15);
        let bad = [mk(0.0, &s11, &b2), mk(1.0, &s10, &b1), mk(0.0, &s01, &b1), mk(0.0, &s00, &b0)];
        assert!(build_choi(&bad).is_err());
    }
}
