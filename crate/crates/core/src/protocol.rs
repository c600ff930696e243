//! CZ gate recipes: geometry presets, Lamb-shift calibration of `omega2`,
//! population dynamics, gate runs and coupling-strength sweeps.
//!
//! The gate drives `|11> -> |20> -> |11>` through the cavity array with
//! `omega2 ~ omega1 + alpha1`. Both `omega1` and `omega2` sit at dark
//! frequencies of the shared coupling geometry, so the exchange is mediated
//! by virtual photons instead of radiated.

use std::ops::ControlFlow;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{AtomSpec, Basis, CouplingPoint, LatticeSpec, Sector, SystemSpec};
use crate::interference::{self, DfSolution};
use crate::operators::{hamiltonian_on, SparseOperator};
use crate::par;
use crate::propagator::{evolve_with, KrylovSettings, StateVector, TimeGrid};
use crate::tomography::{
    self, choi_from_matrices, correct_local_phases, cz_gate, AtomBathMatrix, ChoiMatrix, CompLabel,
    GateResult,
};

/// Tolerance when checking that configured frequencies sit on dark frequencies.
/// Preset frequencies are quoted to two decimals.
pub const DF_MATCH_TOL: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    TwoPoint { dx: usize },
    ThreePoint { dx: usize, zeta: f64 },
}

impl Geometry {
    /// Distance between the outermost coupling points of one atom.
    pub fn span(&self) -> usize {
        match *self {
            Geometry::TwoPoint { dx } => dx,
            Geometry::ThreePoint { dx, .. } => 2 * dx,
        }
    }

    pub fn layout(&self, x0: usize, g: f64) -> Vec<CouplingPoint> {
        match *self {
            Geometry::TwoPoint { dx } => interference::two_point_layout(x0, dx, g),
            Geometry::ThreePoint { dx, zeta } => interference::three_point_layout(x0, dx, zeta, g),
        }
    }

    pub fn df_solutions(&self) -> Result<Vec<DfSolution>> {
        match *self {
            Geometry::TwoPoint { dx } => interference::df_two_point(dx),
            Geometry::ThreePoint { dx, zeta } => interference::df_three_point(dx, zeta),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Geometry::TwoPoint { dx } | Geometry::ThreePoint { dx, .. } if dx == 0 => {
                Err(Error::Config("coupling-point spacing must be >= 1".into()))
            }
            Geometry::ThreePoint { zeta, .. } if !(zeta >= 0.0 && zeta.is_finite()) => {
                Err(Error::Config(format!("zeta must be >= 0, got {zeta}")))
            }
            _ => Ok(()),
        }
    }
}

/// Where the two atoms' coupling-point sets sit in the chain.
///
/// Atom 2 uses the same geometry as atom 1, shifted by `atom2_offset` sites.
/// With `atom1_start = None` the combined block is centred in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub atom2_offset: i64,
    pub atom1_start: Option<usize>,
}

impl Default for Placement {
    /// Interleaved: atom 2 one site to the right of atom 1, block centred.
    fn default() -> Self {
        Self {
            atom2_offset: 1,
            atom1_start: None,
        }
    }
}

/// How single-qubit phases are handled before comparing against CZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseConvention {
    /// Compare directly in the frame rotating at the band centre.
    #[default]
    None,
    /// Conjugate the output by the local `Z(phi1) (x) Z(phi2)` that maximises
    /// fidelity.
    Optimal,
}

impl FromStr for PhaseConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "optimal" => Ok(Self::Optimal),
            other => Err(Error::Config(format!(
                "unknown phase convention `{other}` (expected `none` or `optimal`)"
            ))),
        }
    }
}

/// Full description of one gate experiment. Energies in `J`, times in `1/J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub num_sites: usize,
    pub geometry: Geometry,
    /// Base coupling strength `g`; the three-point centre couples with `zeta g`.
    pub g: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub gamma_q: f64,
    pub gamma_c: f64,
    pub placement: Placement,
    pub t_max: f64,
    pub dt: f64,
    pub tolerance: f64,
    pub phase_convention: PhaseConvention,
}

impl GateConfig {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        for (name, v) in [
            ("g", self.g),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} is not finite")));
            }
        }
        for (name, v) in [("gamma_q", self.gamma_q), ("gamma_c", self.gamma_c)] {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.dt > 0.0) || !(self.t_max > self.dt) {
            return Err(Error::Config(format!(
                "need 0 < dt < t_max, got dt = {} and t_max = {}",
                self.dt, self.t_max
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be > 0".into()));
        }
        self.atom_starts().map(|_| ())
    }

    /// First coupling site of each atom.
    pub fn atom_starts(&self) -> Result<(usize, usize)> {
        let span = self.geometry.span() as i64;
        let offset = self.placement.atom2_offset;
        let lo = offset.min(0);
        let hi = (span + offset).max(span);
        let block = hi - lo;
        let n = self.num_sites as i64;
        if block >= n {
            return Err(Error::Config(format!(
                "coupling block of {} sites does not fit in {} cavities",
                block + 1,
                n
            )));
        }
        let first = match self.placement.atom1_start {
            Some(s) => s as i64,
            None => (n - 1 - block) / 2 - lo,
        };
        let second = first + offset;
        if first + lo < 0 || first + hi >= n {
            return Err(Error::Config(format!(
                "atom placement starting at site {} runs outside the chain",
                first + 1
            )));
        }
        Ok((first as usize, second as usize))
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        self.validate()?;
        let (s1, s2) = self.atom_starts()?;
        let mut lattice = LatticeSpec::new(self.num_sites);
        lattice.cavity_decay = self.gamma_c;
        let spec = SystemSpec {
            lattice,
            atoms: [
                AtomSpec {
                    omega: self.omega1,
                    anharmonicity: self.alpha1,
                    decay: self.gamma_q,
                    points: self.geometry.layout(s1, self.g),
                },
                AtomSpec {
                    omega: self.omega2,
                    anharmonicity: self.alpha2,
                    decay: self.gamma_q,
                    points: self.geometry.layout(s2, self.g),
                },
            ],
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks that `omega1` is a dark frequency and `omega2` lies near the
    /// opposite one. Returns the matched dark frequencies.
    pub fn check_df_condition(&self, omega2_window: f64) -> Result<(f64, f64)> {
        let sols = self.geometry.df_solutions()?;
        let near = |w: f64| {
            sols.iter()
                .map(|s| s.frequency)
                .min_by(|a, b| (a - w).abs().total_cmp(&(b - w).abs()))
        };
        let w1 = near(self.omega1).ok_or_else(|| Error::Config("geometry has no dark frequency".into()))?;
        if (w1 - self.omega1).abs() > DF_MATCH_TOL {
            return Err(Error::Config(format!(
                "omega1 = {} is not a dark frequency (nearest {w1:.6})",
                self.omega1
            )));
        }
        let w2 = near(-w1).unwrap();
        if (w2 + w1).abs() > 1e-9 || (self.omega2 - w2).abs() > omega2_window {
            return Err(Error::Config(format!(
                "omega2 = {} is not within {omega2_window} of the opposite dark frequency {:.6}",
                self.omega2, -w1
            )));
        }
        Ok((w1, w2))
    }

    /// Photons travel at most `2 J` sites per unit time, so a reflection off
    /// the nearer chain end can come back after `t = d / J`.
    pub fn reflection_warning(&self) -> Option<String> {
        let (s1, s2) = self.atom_starts().ok()?;
        let left = s1.min(s2);
        let right = self.num_sites - 1 - (s1.max(s2) + self.geometry.span());
        let d = left.min(right) as f64;
        (d < self.t_max).then(|| {
            format!(
                "photons reflected from the chain end ({d} sites away) can return after tJ = {d}, before t_max = {}",
                self.t_max
            )
        })
    }

    fn settings(&self) -> KrylovSettings {
        KrylovSettings::with_tolerance(self.tolerance)
    }

    fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::with_spacing(self.t_max, self.dt)
    }

    fn warn_reflections(&self) {
        if let Some(msg) = self.reflection_warning() {
            log::warn!("{msg}");
        }
    }
}

/// Named parameter sets for the two-point and three-point layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Two points, `dx = 4`, dark frequencies `+-sqrt(2) J`.
    TwoPointDx4,
    /// Two points, `dx = 16`, dark frequencies `+-0.39 J`.
    TwoPointDx16,
    /// Three points, `zeta = 1`.
    ThreePointZeta1,
    /// Three points, `zeta = 1.5`.
    ThreePointZeta15,
    /// Three points, `zeta = 1.97`.
    ThreePointZeta197,
    /// CZ run with the `zeta = 1.97` parameters, `g = 0.1 J`.
    CzStrong,
    /// CZ run with the `zeta = 1.97` parameters, `g = 0.05 J`.
    CzWeak,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::TwoPointDx4,
        Preset::TwoPointDx16,
        Preset::ThreePointZeta1,
        Preset::ThreePointZeta15,
        Preset::ThreePointZeta197,
        Preset::CzStrong,
        Preset::CzWeak,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::TwoPointDx4 => "two-point-dx4",
            Preset::TwoPointDx16 => "two-point-dx16",
            Preset::ThreePointZeta1 => "three-point-zeta1",
            Preset::ThreePointZeta15 => "three-point-zeta1.5",
            Preset::ThreePointZeta197 => "three-point-zeta1.97",
            Preset::CzStrong => "cz-g0.1",
            Preset::CzWeak => "cz-g0.05",
        }
    }

    /// Short alias accepted alongside [`Preset::name`].
    pub fn alias(self) -> &'static str {
        match self {
            Preset::TwoPointDx4 => "2d",
            Preset::TwoPointDx16 => "2e",
            Preset::ThreePointZeta1 => "3c",
            Preset::ThreePointZeta15 => "3d",
            Preset::ThreePointZeta197 => "3e",
            Preset::CzStrong => "4a",
            Preset::CzWeak => "4b",
        }
    }

    pub fn config(self) -> GateConfig {
        let base = |geometry, g, omega1, omega2, alpha1, alpha2, t_max| GateConfig {
            num_sites: 100,
            geometry,
            g,
            omega1,
            omega2,
            alpha1,
            alpha2,
            gamma_q: 0.0,
            gamma_c: 0.0,
            placement: Placement::default(),
            t_max,
            dt: 0.1,
            tolerance: 1e-10,
            phase_convention: PhaseConvention::None,
        };
        let s2 = 2f64.sqrt();
        let three = |zeta| Geometry::ThreePoint { dx: 2, zeta };
        match self {
            Preset::TwoPointDx4 => base(Geometry::TwoPoint { dx: 4 }, 0.175, s2, -s2, -2.0 * s2, -3.0, 150.0),
            Preset::TwoPointDx16 => base(Geometry::TwoPoint { dx: 16 }, 0.175, 0.39, -0.39, -0.78, -1.0, 150.0),
            Preset::ThreePointZeta1 => base(three(1.0), 0.1, 1.0, -0.98, -2.0, -1.52, 150.0),
            Preset::ThreePointZeta15 => base(three(1.5), 0.1, 0.71, -0.69, -1.42, -1.31, 150.0),
            Preset::ThreePointZeta197 | Preset::CzStrong => {
                base(three(1.97), 0.1, 0.17, -0.17, -0.34, -0.67, 150.0)
            }
            Preset::CzWeak => base(three(1.97), 0.05, 0.17, -0.17, -0.34, -0.67, 400.0),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s || p.alias() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

pub fn preset(id: &str) -> Result<GateConfig> {
    Ok(id.parse::<Preset>()?.config())
}

/// Index and value of a sampled maximum, refined by a parabola through the
/// sample and its two neighbours.
pub fn refine_peak(times: &[f64], values: &[f64], i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= values.len() {
        return (times[i], values[i]);
    }
    let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return (times[i], b);
    }
    let shift = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    let h = 0.5 * (times[i + 1] - times[i - 1]);
    let peak = b - 0.25 * (a - c) * shift;
    (times[i] + shift * h, peak.max(b))
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Populations of `|11>` and `|20>` after starting in `|11>|vac>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsTrace {
    pub times: Vec<f64>,
    pub n11: Vec<f64>,
    pub n20: Vec<f64>,
    pub norm: Vec<f64>,
}

impl DynamicsTrace {
    /// Index of the first local minimum of `n11` below one half.
    pub fn first_dip(&self) -> Option<usize> {
        (1..self.n11.len().saturating_sub(1))
            .find(|&i| self.n11[i] < 0.5 && self.n11[i] <= self.n11[i - 1] && self.n11[i] <= self.n11[i + 1])
    }

    /// First local maximum of `n11` after [`DynamicsTrace::first_dip`],
    /// refined to `(t, n11)`.
    pub fn first_revival(&self) -> Option<(f64, f64)> {
        let dip = self.first_dip()?;
        (dip + 1..self.n11.len() - 1)
            .find(|&i| self.n11[i] >= self.n11[i - 1] && self.n11[i] > self.n11[i + 1])
            .map(|i| refine_peak(&self.times, &self.n11, i))
    }

    /// Largest `n11` after the first dip (including the end of the trace).
    pub fn max_after_dip(&self) -> Option<f64> {
        let dip = self.first_dip()?;
        self.n11[dip..].iter().copied().reduce(f64::max)
    }
}

fn sector_hamiltonian(spec: &SystemSpec, sector: Sector) -> Result<(Basis, SparseOperator)> {
    let basis = Basis::new(spec.num_sites(), sector);
    let h = hamiltonian_on(spec, &basis, true)?;
    Ok((basis, h))
}

pub fn run_dynamics(config: &GateConfig) -> Result<DynamicsTrace> {
    let spec = config.system_spec()?;
    config.warn_reflections();
    let (basis, h) = sector_hamiltonian(&spec, Sector::Double)?;
    let psi0 = StateVector::basis_ket(&basis, CompLabel::L11.initial_state())?;
    let grid = config.grid()?;
    let mut trace = DynamicsTrace {
        times: Vec::with_capacity(grid.num_points),
        n11: Vec::with_capacity(grid.num_points),
        n20: Vec::with_capacity(grid.num_points),
        norm: Vec::with_capacity(grid.num_points),
    };
    evolve_with(&h, &psi0, &grid, &config.settings(), |_, t, s| {
        trace.times.push(t);
        trace.n11.push(s.amplitudes[1].norm_sqr());
        trace.n20.push(s.amplitudes[0].norm_sqr());
        trace.norm.push(s.norm_sqr());
        ControlFlow::Continue(())
    })?;
    Ok(trace)
}

/// Outcome of the `omega2` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Omega2Calibration {
    pub omega2: f64,
    /// Height of the first `|20>` population peak at the calibrated `omega2`.
    pub transfer: f64,
    pub transfer_time: f64,
}

/// First peak of `n20` after starting in `|11>`: stops once `n20` has fallen
/// to half of its running maximum.
fn first_transfer_peak(config: &GateConfig, omega2: f64) -> Result<(f64, f64)> {
    let mut cfg = config.clone();
    cfg.omega2 = omega2;
    let spec = cfg.system_spec()?;
    let (basis, h) = sector_hamiltonian(&spec, Sector::Double)?;
    let psi0 = StateVector::basis_ket(&basis, CompLabel::L11.initial_state())?;
    let grid = cfg.grid()?;
    let mut times = Vec::new();
    let mut n20 = Vec::new();
    let mut best = 0.0f64;
    evolve_with(&h, &psi0, &grid, &cfg.settings(), |_, t, s| {
        let p = s.amplitudes[0].norm_sqr();
        times.push(t);
        n20.push(p);
        best = best.max(p);
        if best > 0.02 && p < 0.5 * best {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    let i = argmax(&n20);
    let (t, v) = refine_peak(&times, &n20, i);
    Ok((v, t))
}

/// Finds the `omega2` near `omega1 + alpha1` that maximises the first
/// `|11> -> |20>` transfer, which absorbs the Lamb shift of atom 2.
///
/// A uniform scan over the window picks the best bracket, then
/// golden-section search refines it.
pub fn calibrate_omega2(config: &GateConfig, search_halfwidth: f64) -> Result<Omega2Calibration> {
    if !(search_halfwidth > 0.0 && search_halfwidth <= 0.1) {
        return Err(Error::Config(format!(
            "search half-width must be in (0, 0.1], got {search_halfwidth}"
        )));
    }
    config.validate()?;
    let centre = config.omega1 + config.alpha1;
    const SCAN: usize = 11;
    let step = 2.0 * search_halfwidth / (SCAN - 1) as f64;
    let scan_points: Vec<f64> = (0..SCAN).map(|i| centre - search_halfwidth + i as f64 * step).collect();
    let scores = par::map_collect(&scan_points, |&w| first_transfer_peak(config, w).map(|r| r.0));
    let scores = scores.into_iter().collect::<Result<Vec<_>>>()?;
    let best = argmax(&scores);

    let objective = |w: f64| first_transfer_peak(config, w).map(|r| -r.0);
    let lo = scan_points[best.saturating_sub(1)];
    let hi = scan_points[(best + 1).min(SCAN - 1)];
    let omega2 = golden_section(objective, lo, hi, 5e-5)?;
    let (transfer, transfer_time) = first_transfer_peak(config, omega2)?;
    if transfer < 0.05 {
        return Err(Error::Calibration(format!(
            "no |11> -> |20> exchange within tJ = {} (peak transfer {transfer:.3e})",
            config.t_max
        )));
    }
    Ok(Omega2Calibration {
        omega2,
        transfer,
        transfer_time,
    })
}

fn golden_section(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { c } else { d })
}

/// One sample of the gate-fidelity trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelitySample {
    pub t: f64,
    pub process_fidelity: f64,
    pub average_fidelity: f64,
    pub phi1: f64,
    pub phi2: f64,
    /// `1 - Tr(Phi)`: weight leaked out of the computational subspace or lost
    /// to decay.
    pub trace_deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CzRun {
    pub samples: Vec<FidelitySample>,
    pub result: GateResult,
}

/// Evolves the sector-0/1 computational inputs and returns their
/// atom-bath matrices at every grid time.
fn evolve_small(
    spec: &SystemSpec,
    label: CompLabel,
    grid: &TimeGrid,
    settings: &KrylovSettings,
) -> Result<Vec<AtomBathMatrix>> {
    let (basis, h) = sector_hamiltonian(spec, label.sector())?;
    let psi0 = StateVector::basis_ket(&basis, label.initial_state())?;
    let mut out = Vec::with_capacity(grid.num_points);
    let mut failure = None;
    evolve_with(&h, &psi0, grid, settings, |_, _, s| match AtomBathMatrix::from_state(s, &basis) {
        Ok(m) => {
            out.push(m);
            ControlFlow::Continue(())
        }
        Err(e) => {
            failure = Some(e);
            ControlFlow::Break(())
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn score_choi(choi: &ChoiMatrix, convention: PhaseConvention, ideal: &ChoiMatrix) -> Result<(f64, f64, f64)> {
    let (corrected, p1, p2) = match convention {
        PhaseConvention::None => (choi.clone(), 0.0, 0.0),
        PhaseConvention::Optimal => correct_local_phases(choi),
    };
    Ok((tomography::process_fidelity(&corrected, ideal)?, p1, p2))
}

/// Propagates the four computational inputs, builds the Choi matrix at every
/// grid time and reports the best CZ fidelity and when it occurs.
pub fn run_cz(config: &GateConfig) -> Result<CzRun> {
    let spec = config.system_spec()?;
    config.warn_reflections();
    let grid = config.grid()?;
    let settings = config.settings();

    let ((m10, m01), m00) = par::join(
        || {
            par::join(
                || evolve_small(&spec, CompLabel::L10, &grid, &settings),
                || evolve_small(&spec, CompLabel::L01, &grid, &settings),
            )
        },
        || evolve_small(&spec, CompLabel::L00, &grid, &settings),
    );
    let (m10, m01, m00) = (m10?, m01?, m00?);

    let (basis, h) = sector_hamiltonian(&spec, Sector::Double)?;
    let psi0 = StateVector::basis_ket(&basis, CompLabel::L11.initial_state())?;
    let ideal = ChoiMatrix::from_diagonal(&cz_gate());
    let mut samples = Vec::with_capacity(grid.num_points);
    let mut failure = None;
    evolve_with(&h, &psi0, &grid, &settings, |i, t, s| {
        let step = || -> Result<FidelitySample> {
            let m11 = AtomBathMatrix::from_state(s, &basis)?;
            let choi = choi_from_matrices(&[m11, m10[i].clone(), m01[i].clone(), m00[i].clone()]);
            let (f, phi1, phi2) = score_choi(&choi, config.phase_convention, &ideal)?;
            Ok(FidelitySample {
                t,
                process_fidelity: f,
                average_fidelity: tomography::average_fidelity(f),
                phi1,
                phi2,
                trace_deficit: 1.0 - choi.trace(),
            })
        };
        match step() {
            Ok(sample) => {
                samples.push(sample);
                ControlFlow::Continue(())
            }
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let fid: Vec<f64> = samples.iter().map(|s| s.process_fidelity).collect();
    let best = argmax(&fid);
    let (tau, f_max) = refine_peak(&times, &fid, best);
    let result = GateResult::new(tau, f_max.min(1.0), (samples[best].phi1, samples[best].phi2));
    Ok(CzRun { samples, result })
}

/// Simulation horizon used for a sweep point: long enough for one full
/// exchange cycle, whose period grows as `1/g^2`.
pub fn sweep_horizon(g: f64) -> f64 {
    (1.0 / (g * g)).max(150.0)
}

/// Golden-section search for the `omega2` in `centre +- halfwidth` that
/// maximises the peak gate fidelity.
///
/// The transfer-optimal `omega2` from [`calibrate_omega2`] does not return
/// `|11>` with the conditional phase of CZ; the fidelity optimum sits a
/// fraction of `g^2` away. Each evaluation is a full [`run_cz`], truncated at
/// `horizon`.
pub fn tune_omega2_for_gate(config: &GateConfig, centre: f64, halfwidth: f64, horizon: f64) -> Result<f64> {
    if !(halfwidth > 0.0) {
        return Err(Error::Config(format!("tuning half-width must be > 0, got {halfwidth}")));
    }
    let mut cfg = config.clone();
    cfg.t_max = horizon.min(config.t_max);
    let objective = |w: f64| {
        let mut c = cfg.clone();
        c.omega2 = w;
        run_cz(&c).map(|r| -r.result.process_fidelity)
    };
    golden_section(objective, centre - halfwidth, centre + halfwidth, halfwidth / 40.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub g: f64,
    /// `omega2` maximising the first `|11> -> |20>` transfer.
    pub omega2_transfer: f64,
    /// `omega2` used for the reported gate.
    pub omega2: f64,
    pub result: GateResult,
}

/// For each `g`: calibrates `omega2` on the `|20>` transfer, tunes it within
/// `1.5 g^2` for the best gate fidelity and reruns the gate with decay.
/// Failures are kept per point and do not stop the sweep.
pub fn sweep_g(
    config: &GateConfig,
    g_values: &[f64],
    gamma_q: f64,
    gamma_c: f64,
) -> Result<Vec<(f64, Result<SweepPoint>)>> {
    if g_values.is_empty() || g_values.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::Config("coupling strengths must be positive".into()));
    }
    if g_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("coupling strengths must be strictly increasing".into()));
    }
    if !(gamma_q >= 0.0 && gamma_c >= 0.0) {
        return Err(Error::Config("decay rates must be >= 0".into()));
    }
    let run_point = |&g: &f64| -> Result<SweepPoint> {
        let mut cfg = config.clone();
        cfg.g = g;
        cfg.gamma_q = gamma_q;
        cfg.gamma_c = gamma_c;
        cfg.t_max = sweep_horizon(g);
        let cal = calibrate_omega2(&cfg, 0.05)?;
        // a full exchange takes about twice the time to the |20> peak
        let horizon = 2.5 * cal.transfer_time;
        cfg.omega2 = tune_omega2_for_gate(&cfg, cal.omega2, 1.5 * g * g, horizon)?;
        log::info!(
            "g = {g}: omega2 {:.5} from transfer, {:.5} for the gate",
            cal.omega2,
            cfg.omega2
        );
        let run = run_cz(&cfg)?;
        Ok(SweepPoint {
            g,
            omega2_transfer: cal.omega2,
            omega2: cfg.omega2,
            result: run.result,
        })
    };
    let results = par::map_collect(g_values, run_point);
    Ok(g_values.iter().copied().zip(results).collect())
}
