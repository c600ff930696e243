//! Time evolution `psi(t) = exp(-i H t) psi(0)` for sparse, possibly
//! non-Hermitian `H`.
//!
//! Each step builds an Arnoldi basis of dimension `m` at the current state and
//! reuses it for every sample time that the a posteriori error estimate
//! `h[m+1,m] * |e_m^T exp(-i tau H_m) e_1|` allows. No renormalisation is ever
//! applied, so norm lost to decay terms stays lost.

use std::ops::ControlFlow;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Basis, BasisState, Sector};
use crate::operators::SparseOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Amplitudes over the basis of one excitation sector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub sector: Sector,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(sector: Sector, amplitudes: Vec<Complex64>) -> Self {
        Self { sector, amplitudes }
    }

    /// The normalised basis ket `state`.
    pub fn basis_ket(basis: &Basis, state: BasisState) -> Result<Self> {
        let mut amplitudes = vec![ZERO; basis.len()];
        amplitudes[basis.index_of(state)?] = Complex64::new(1.0, 0.0);
        Ok(Self::new(basis.sector(), amplitudes))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Uniform sample times `0, dt, ..., t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    pub num_points: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, num_points: usize) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::Config(format!("t_max must be > 0, got {t_max}")));
        }
        if num_points < 2 {
            return Err(Error::Config(format!(
                "a time grid needs at least 2 points, got {num_points}"
            )));
        }
        Ok(Self { t_max, num_points })
    }

    /// Grid whose spacing is as close to `dt` as possible without exceeding it.
    pub fn with_spacing(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("time step must be > 0, got {dt}")));
        }
        let intervals = (t_max / dt - 1e-9).ceil().max(1.0) as usize;
        Self::new(t_max, intervals + 1)
    }

    pub fn spacing(&self) -> f64 {
        self.t_max / (self.num_points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.num_points {
            self.t_max
        } else {
            i as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.num_points).map(|i| self.time(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovSettings {
    /// Local error tolerance per step, relative to the state norm.
    pub tolerance: f64,
    pub krylov_dim: usize,
    /// Upper bound on Arnoldi restarts for one propagation.
    pub max_steps: usize,
}

impl Default for KrylovSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            krylov_dim: 30,
            max_steps: 1_000_000,
        }
    }
}

impl KrylovSettings {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

/// Evolves `psi0` and returns the state at every grid time. `out[0]` is `psi0`.
pub fn evolve(
    h: &SparseOperator,
    psi0: &StateVector,
    grid: &TimeGrid,
    tol: f64,
) -> Result<Vec<StateVector>> {
    let mut out = Vec::with_capacity(grid.num_points);
    evolve_with(h, psi0, grid, &KrylovSettings::with_tolerance(tol), |_, _, s| {
        out.push(s.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Streams the evolved state to `visit(index, time, state)` at each grid
/// time. Returning `ControlFlow::Break` stops the propagation early.
pub fn evolve_with<F>(
    h: &SparseOperator,
    psi0: &StateVector,
    grid: &TimeGrid,
    settings: &KrylovSettings,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, f64, &StateVector) -> ControlFlow<()>,
{
    if h.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            actual: psi0.dim(),
        });
    }
    if !(settings.tolerance > 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be > 0, got {}",
            settings.tolerance
        )));
    }
    if visit(0, 0.0, psi0).is_break() {
        return Ok(());
    }

    let mut krylov = Krylov::new(h.dim(), settings.krylov_dim.max(2).min(h.dim().max(1)));
    let mut state = psi0.clone();
    let mut t = 0.0;
    let mut next = 1usize;
    let mut tau_guess = 1.0 / h.norm_inf().max(1e-3);
    let mut steps = 0usize;

    while next < grid.num_points {
        steps += 1;
        if steps > settings.max_steps {
            return Err(Error::Convergence {
                t_start: t,
                t_end: grid.time(next),
                reason: format!("step budget of {} exhausted", settings.max_steps),
            });
        }
        let beta = state.norm_sqr().sqrt();
        if beta == 0.0 {
            // zero stays zero
            while next < grid.num_points {
                if visit(next, grid.time(next), &state).is_break() {
                    return Ok(());
                }
                next += 1;
            }
            return Ok(());
        }
        krylov.build(h, &state.amplitudes, beta);

        let remaining = grid.t_max - t;
        let tol = settings.tolerance;
        let mut tau = if krylov.exact { remaining } else { tau_guess.min(remaining) };
        let mut err = krylov.error_estimate(tau);
        while err > tol && !krylov.exact {
            let shrink = 0.9 * (tol / err).powf(1.0 / (krylov.m as f64 + 1.0));
            tau *= shrink.clamp(0.1, 0.7);
            if tau < 1e-12 * grid.t_max.max(1.0) {
                return Err(Error::Convergence {
                    t_start: t,
                    t_end: grid.time(next),
                    reason: format!("step size collapsed (error estimate {err:.3e})"),
                });
            }
            err = krylov.error_estimate(tau);
        }
        if !krylov.exact && err < 0.1 * tol {
            tau_guess = tau * 1.5;
        } else {
            tau_guess = tau;
        }

        // emit every grid time reachable from this basis
        let t_reach = t + tau;
        let mut last_emitted = None;
        while next < grid.num_points && grid.time(next) <= t_reach * (1.0 + 1e-14) {
            let tn = grid.time(next);
            let s = StateVector::new(psi0.sector, krylov.propagate(tn - t, beta));
            if visit(next, tn, &s).is_break() {
                return Ok(());
            }
            last_emitted = Some((tn, s));
            next += 1;
        }
        match last_emitted {
            Some((tn, s)) => {
                t = tn;
                state = s;
            }
            None => {
                state = StateVector::new(psi0.sector, krylov.propagate(tau, beta));
                t = t_reach;
            }
        }
    }
    Ok(())
}

/// Worst deviation of `||psi(t)||^2` from the initial norm over a trajectory.
pub fn propagation_norm_report(states: &[StateVector]) -> f64 {
    match states.first() {
        Some(first) => {
            let reference = first.norm_sqr();
            norm_deviation(states, |_| reference)
        }
        None => 0.0,
    }
}

/// Worst deviation of `||psi_i||^2` from `expected(i)`.
pub fn norm_deviation(states: &[StateVector], expected: impl Fn(usize) -> f64) -> f64 {
    states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.norm_sqr() - expected(i)).abs())
        .fold(0.0, f64::max)
}

/// Arnoldi workspace.
struct Krylov {
    n: usize,
    m_max: usize,
    /// basis vectors, column-major: `v[j * n .. (j + 1) * n]`
    v: Vec<Complex64>,
    /// `(m_max + 1) x m_max` Hessenberg matrix
    hess: DMatrix<Complex64>,
    m: usize,
    /// `h[m+1, m]` of the last build
    residual: f64,
    exact: bool,
    w: Vec<Complex64>,
}

impl Krylov {
    fn new(n: usize, m_max: usize) -> Self {
        Self {
            n,
            m_max,
            v: vec![ZERO; n * (m_max + 1)],
            hess: DMatrix::zeros(m_max + 1, m_max),
            m: 0,
            residual: 0.0,
            exact: false,
            w: vec![ZERO; n],
        }
    }

    fn build(&mut self, h: &SparseOperator, psi: &[Complex64], beta: f64) {
        let n = self.n;
        self.hess.fill(ZERO);
        let inv = 1.0 / beta;
        for (dst, src) in self.v[..n].iter_mut().zip(psi) {
            *dst = src * inv;
        }
        self.exact = false;
        self.m = self.m_max;
        let scale = h.norm_inf().max(1e-300);
        for j in 0..self.m_max {
            let (basis, rest) = self.v.split_at_mut((j + 1) * n);
            h.apply_into(&basis[j * n..], &mut self.w);
            // modified Gram-Schmidt with one reorthogonalisation pass
            for _pass in 0..2 {
                for i in 0..=j {
                    let vi = &basis[i * n..(i + 1) * n];
                    let proj: Complex64 = vi.iter().zip(&self.w).map(|(a, b)| a.conj() * b).sum();
                    self.hess[(i, j)] += proj;
                    for (wk, vk) in self.w.iter_mut().zip(vi) {
                        *wk -= proj * vk;
                    }
                }
            }
            let norm = self.w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm <= 1e-13 * scale {
                self.m = j + 1;
                self.residual = 0.0;
                self.exact = true;
                break;
            }
            self.hess[(j + 1, j)] = Complex64::new(norm, 0.0);
            let inv = 1.0 / norm;
            for (dst, src) in rest[..n].iter_mut().zip(&self.w) {
                *dst = src * inv;
            }
            self.residual = norm;
        }
        if h.is_hermitian() {
            // the projection of a Hermitian operator is Hermitian tridiagonal
            let m = self.m;
            for i in 0..m {
                for j in 0..m {
                    if j > i + 1 || i > j + 1 {
                        self.hess[(i, j)] = ZERO;
                    }
                }
            }
            for i in 0..m {
                self.hess[(i, i)].im = 0.0;
                if i + 1 < m {
                    let s = 0.5 * (self.hess[(i + 1, i)] + self.hess[(i, i + 1)].conj());
                    self.hess[(i + 1, i)] = s;
                    self.hess[(i, i + 1)] = s.conj();
                }
            }
        }
    }

    /// `exp(-i tau H_m) e_1`.
    fn small_exp(&self, tau: f64) -> DVector<Complex64> {
        let m = self.m;
        let a = self.hess.view((0, 0), (m, m)) * Complex64::new(0.0, -tau);
        let e = a.exp();
        e.column(0).into_owned()
    }

    fn error_estimate(&self, tau: f64) -> f64 {
        if self.exact {
            return 0.0;
        }
        let c = self.small_exp(tau);
        self.residual * c[self.m - 1].norm()
    }

    fn propagate(&self, tau: f64, beta: f64) -> Vec<Complex64> {
        let c = self.small_exp(tau);
        let n = self.n;
        let mut out = vec![ZERO; n];
        for (j, cj) in c.iter().enumerate() {
            let coef = cj * beta;
            for (o, v) in out.iter_mut().zip(&self.v[j * n..(j + 1) * n]) {
                *o += coef * v;
            }
        }
        out
    }
}
