//! Cosine-band dispersion and decoherence-free (dark) frequencies.
//!
//! A giant atom with coupling points `x_j` and strengths `g_j` stops radiating
//! into the band at wavenumbers where `sum_j g_j exp(i k x_j) = 0`. Energies
//! are in units of `J` and the band centre sits at zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::CouplingPoint;

const EDGE_TOL: f64 = 1e-9;
const GRID_SAMPLES: usize = 10_000;

/// One solution of the dark-state condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DfSolution {
    pub wavenumber: f64,
    pub frequency: f64,
    /// Branch index `n` of the closed forms; for numerically found roots the
    /// position in ascending-`k` order.
    pub branch: i64,
    /// Root sits at `k = 0` or `k = pi`, where the group velocity vanishes.
    pub band_edge: bool,
}

impl DfSolution {
    fn at(wavenumber: f64, branch: i64) -> Self {
        Self {
            wavenumber,
            frequency: dispersion(wavenumber),
            branch,
            band_edge: wavenumber < EDGE_TOL || (PI - wavenumber) < EDGE_TOL,
        }
    }
}

/// `omega(k) = -2 J cos k` in units of `J`.
pub fn dispersion(k: f64) -> f64 {
    -2.0 * k.cos()
}

/// `sum_j g_j exp(i k x_j)`.
pub fn phasor_sum(points: &[CouplingPoint], k: f64) -> Complex64 {
    points
        .iter()
        .map(|p| Complex64::from_polar(p.strength, k * p.site as f64))
        .sum()
}

fn total_strength(points: &[CouplingPoint]) -> f64 {
    points.iter().map(|p| p.strength.abs()).sum()
}

fn in_band(k: f64) -> bool {
    k > -EDGE_TOL && k < PI + EDGE_TOL
}

fn sort_and_dedup(mut sols: Vec<DfSolution>) -> Vec<DfSolution> {
    sols.sort_by(|a, b| a.wavenumber.total_cmp(&b.wavenumber));
    sols.dedup_by(|a, b| (a.wavenumber - b.wavenumber).abs() < 1e-6);
    sols
}

/// Two equal-strength points a distance `dx` apart: `k = (pi + 2 n pi) / dx`.
pub fn df_two_point(dx: usize) -> Result<Vec<DfSolution>> {
    if dx == 0 {
        return Err(Error::Config("two-point spacing must be >= 1".into()));
    }
    let dx = dx as f64;
    let sols = (0..)
        .map(|n: i64| (n, (PI + 2.0 * PI * n as f64) / dx))
        .take_while(|&(_, k)| in_band(k))
        .filter(|&(_, k)| k > EDGE_TOL)
        .map(|(n, k)| DfSolution::at(k.min(PI), n))
        .collect();
    Ok(sols)
}

/// Three points `(1, zeta, 1)` with spacing `dx`.
///
/// With `z = exp(i k dx)` the condition is `1 + zeta z + z^2 = 0`, whose roots
/// are `z = exp(+-i theta)`, `theta = arccos(-zeta / 2)`. Both signs are kept,
/// which is what yields the symmetric pair for `dx = 2`.
pub fn df_three_point(dx: usize, zeta: f64) -> Result<Vec<DfSolution>> {
    if dx == 0 {
        return Err(Error::Config("three-point spacing must be >= 1".into()));
    }
    if !(zeta >= 0.0) {
        return Err(Error::Config(format!("zeta must be >= 0, got {zeta}")));
    }
    if zeta >= 2.0 {
        return Err(Error::DegenerateMerge(zeta));
    }
    let theta = (-zeta / 2.0).acos();
    let dx = dx as f64;
    let mut sols = Vec::new();
    for n in 0i64.. {
        let base = 2.0 * PI * n as f64;
        if (base - theta) / dx > PI + EDGE_TOL {
            break;
        }
        for k in [(theta + base) / dx, (base - theta) / dx] {
            if k > EDGE_TOL && in_band(k) {
                sols.push(DfSolution::at(k.min(PI), n));
            }
        }
    }
    Ok(sort_and_dedup(sols))
}

/// Finds all in-band roots of the phasor sum for an arbitrary geometry.
///
/// The sum is rotated by `exp(-i k c)` with `c` the midpoint of the outermost
/// points, which makes it real for mirror-symmetric real profiles. Simple
/// roots are bracketed by sign changes of the rotated real part and refined by
/// bisection; touching roots show up as local minima of `|f|^2` and are
/// refined by golden-section search. Candidates are kept only if
/// `|f| <= 1e-10 * sum |g_j|`.
pub fn df_general(points: &[CouplingPoint]) -> Result<Vec<DfSolution>> {
    if points.len() < 2 {
        return Err(Error::Config("need at least two coupling points".into()));
    }
    let scale = total_strength(points);
    if scale == 0.0 {
        return Err(Error::Config("all coupling strengths are zero".into()));
    }
    let lo = points.iter().map(|p| p.site).min().unwrap() as f64;
    let hi = points.iter().map(|p| p.site).max().unwrap() as f64;
    let centre = 0.5 * (lo + hi);
    let rotated = |k: f64| phasor_sum(points, k) * Complex64::from_polar(1.0, -k * centre);
    let re = |k: f64| rotated(k).re;
    let mag2 = |k: f64| phasor_sum(points, k).norm_sqr();

    let ks: Vec<f64> = (0..=GRID_SAMPLES).map(|i| PI * i as f64 / GRID_SAMPLES as f64).collect();
    let vals: Vec<f64> = ks.iter().map(|&k| re(k)).collect();
    let mags: Vec<f64> = ks.iter().map(|&k| mag2(k)).collect();

    let mut candidates = Vec::new();
    for i in 0..GRID_SAMPLES {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            candidates.push(ks[i]);
        } else if a.signum() != b.signum() && b != 0.0 {
            candidates.push(bisect(&re, ks[i], ks[i + 1]));
        }
    }
    if vals[GRID_SAMPLES] == 0.0 {
        candidates.push(PI);
    }
    for i in 1..GRID_SAMPLES {
        if mags[i] <= mags[i - 1] && mags[i] <= mags[i + 1] {
            candidates.push(golden_min(&mag2, ks[i - 1], ks[i + 1]));
        }
    }
    // band edges can be minima without an interior bracket
    for (k, neighbour) in [(0.0, mags[1]), (PI, mags[GRID_SAMPLES - 1])] {
        if mag2(k) <= neighbour {
            candidates.push(k);
        }
    }

    let bound = 1e-10 * scale;
    let mut sols: Vec<DfSolution> = candidates
        .into_iter()
        .filter(|&k| phasor_sum(points, k).norm() <= bound)
        .map(|k| DfSolution::at(k, 0))
        .collect();
    sols = sort_and_dedup(sols);
    for (i, s) in sols.iter_mut().enumerate() {
        s.branch = i as i64;
    }
    Ok(sols)
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Coupling points for equal-strength two-point geometry starting at `x0`.
pub fn two_point_layout(x0: usize, dx: usize, g: f64) -> Vec<CouplingPoint> {
    vec![CouplingPoint::new(x0, g), CouplingPoint::new(x0 + dx, g)]
}

/// Coupling points `(g, zeta g, g)` at `x0, x0 + dx, x0 + 2 dx`.
pub fn three_point_layout(x0: usize, dx: usize, zeta: f64, g: f64) -> Vec<CouplingPoint> {
    vec![
        CouplingPoint::new(x0, g),
        CouplingPoint::new(x0 + dx, zeta * g),
        CouplingPoint::new(x0 + 2 * dx, g),
    ]
}
