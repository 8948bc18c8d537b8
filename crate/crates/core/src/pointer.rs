//! Von Neumann pointer coupled through `exp(-i g O P)` (with hbar = 1).
//!
//! The pointer starts as `Psi(Q) ∝ exp(-Q^2 / (2 sigma^2))` on a uniform
//! periodic grid. Coupling to an eigenpair `(o_k, |o_k>)` displaces it by
//! `g o_k`; displacements are applied in the momentum representation as the
//! phase `exp(-i p g o_k)`, so they are exact up to wrap-around, which the
//! overflow checks rule out.
//!
//! After post-selecting the system on `|phi>` the pointer is
//!
//! ```text
//! Phi(Q) = sum_k <phi|o_k><o_k|psi> Psi(Q - g o_k)
//! ```
//!
//! and to first order its position mean moves by `g Re<O>_w` while its
//! momentum mean moves by `2 g Im<O>_w Var(P)` (`g Im<O>_w / sigma^2` for the
//! Gaussian above).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::qstate::{check_dims, checked_overlap, inner_raw, SpectralObservable, StateVector};
use crate::qstate::WeakValueResult;

pub const DEFAULT_GRID_POINTS: usize = 4096;
pub const MIN_GRID_POINTS: usize = 256;
pub const MIN_HALF_WIDTH_SIGMAS: f64 = 8.0;
/// Default half-width in units of sigma, before adding the displacement.
pub const DEFAULT_HALF_WIDTH_SIGMAS: f64 = 10.0;
/// Amplitude allowed on the outermost grid points after evolution.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Predictions are flagged once `g |w|` exceeds this fraction of sigma.
pub const WEAK_SHIFT_FRACTION: f64 = 0.1;

/// Pointer wavefunction on a uniform periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPointer {
    sigma: f64,
    grid_min: f64,
    dx: f64,
    amplitudes: Vec<C64>,
}

/// Moments of a (post-selected) pointer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointerReadout {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub postselect_prob: f64,
}

impl PointerReadout {
    pub const CSV_HEADER: &'static str = "mean_q,mean_p,var_q,var_p,postselect_prob";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.mean_q, self.mean_p, self.var_q, self.var_p, self.postselect_prob
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}

/// Builds the initial Gaussian pointer centered at zero.
pub fn make_gaussian(sigma: f64, half_width_sigmas: f64, n_points: usize) -> Result<GaussianPointer> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::BadGrid(format!("sigma must be positive, got {sigma}")));
    }
    if !(half_width_sigmas >= MIN_HALF_WIDTH_SIGMAS && half_width_sigmas.is_finite()) {
        return Err(Error::BadGrid(format!(
            "half-width must be at least {MIN_HALF_WIDTH_SIGMAS} sigma, got {half_width_sigmas}"
        )));
    }
    if n_points < MIN_GRID_POINTS || !n_points.is_power_of_two() {
        return Err(Error::BadGrid(format!(
            "grid size must be a power of two >= {MIN_GRID_POINTS}, got {n_points}"
        )));
    }
    let half = half_width_sigmas * sigma;
    let dx = 2.0 * half / n_points as f64;
    let grid_min = -half;
    let raw: Vec<C64> = (0..n_points)
        .map(|j| {
            let q = grid_min + j as f64 * dx;
            C64::new((-q * q / (2.0 * sigma * sigma)).exp(), 0.0)
        })
        .collect();
    let norm = (raw.iter().map(C64::norm_sqr).sum::<f64>() * dx).sqrt();
    Ok(GaussianPointer {
        sigma,
        grid_min,
        dx,
        amplitudes: raw.into_iter().map(|a| a / norm).collect(),
    })
}

impl GaussianPointer {
    /// Default grid: `10 sigma + max_displacement` on each side.
    pub fn with_headroom(sigma: f64, n_points: usize, max_displacement: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::BadGrid(format!("sigma must be positive, got {sigma}")));
        }
        make_gaussian(
            sigma,
            DEFAULT_HALF_WIDTH_SIGMAS + max_displacement.abs() / sigma,
            n_points,
        )
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n_points(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn grid_min(&self) -> f64 {
        self.grid_min
    }

    pub fn grid_max(&self) -> f64 {
        self.position(self.n_points() - 1)
    }

    /// Grid spacing.
    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn position(&self, j: usize) -> f64 {
        self.grid_min + j as f64 * self.dx
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `sum |Psi_j|^2 dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(C64::norm_sqr).sum::<f64>() * self.dx
    }

    fn momentum(&self, m: usize) -> f64 {
        let n = self.n_points();
        let signed = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
        2.0 * PI * signed / (n as f64 * self.dx)
    }

    /// Position and momentum moments, the latter from the spectrum.
    pub fn readout(&self) -> PointerReadout {
        let density = self.density();
        let (mean_q, var_q) = density.moments();

        let spectrum = fft(&self.amplitudes, Direction::Forward);
        let weight: f64 = spectrum.iter().map(C64::norm_sqr).sum();
        let (mut p1, mut p2) = (0.0, 0.0);
        for (m, a) in spectrum.iter().enumerate() {
            let p = self.momentum(m);
            let w = a.norm_sqr() / weight;
            p1 += w * p;
            p2 += w * p * p;
        }
        PointerReadout {
            mean_q,
            mean_p: p1,
            var_q,
            var_p: p2 - p1 * p1,
            postselect_prob: self.norm_sqr(),
        }
    }

    /// `|Psi(Q)|^2` on the grid.
    pub fn density(&self) -> PositionDensity {
        PositionDensity {
            grid_min: self.grid_min,
            dx: self.dx,
            values: self.amplitudes.iter().map(C64::norm_sqr).collect(),
        }
    }

    /// Rejects displacements that would bring the tails within 8 sigma of an edge.
    fn check_headroom(&self, displacements: impl Iterator<Item = f64>) -> Result<()> {
        let center = self.density().moments().0;
        let margin = MIN_HALF_WIDTH_SIGMAS * self.sigma;
        for d in displacements {
            let lo = center + d - margin;
            let hi = center + d + margin;
            if lo < self.grid_min || hi > self.grid_max() {
                return Err(Error::GridOverflow(format!(
                    "displacement {d} needs [{lo}, {hi}] but the grid spans [{}, {}]",
                    self.grid_min,
                    self.grid_max()
                )));
            }
        }
        Ok(())
    }

    /// `sum_k weights_k * Psi(Q - shifts_k)`, unnormalized.
    fn superpose_shifted(&self, terms: &[(C64, f64)]) -> Vec<C64> {
        let spectrum = fft(&self.amplitudes, Direction::Forward);
        let shifted: Vec<C64> = spectrum
            .iter()
            .enumerate()
            .map(|(m, a)| {
                let p = self.momentum(m);
                let phase: C64 = terms
                    .iter()
                    .map(|&(w, d)| w * C64::from_polar(1.0, -p * d))
                    .sum();
                a * phase
            })
            .collect();
        fft(&shifted, Direction::Inverse)
    }

    fn shifted_density(&self, d: f64) -> Vec<f64> {
        self.superpose_shifted(&[(C64::new(1.0, 0.0), d)])
            .iter()
            .map(C64::norm_sqr)
            .collect()
    }
}

/// A probability density sampled on the pointer grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionDensity {
    grid_min: f64,
    dx: f64,
    values: Vec<f64>,
}

impl PositionDensity {
    pub const CSV_HEADER: &'static str = "Q,density";

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn position(&self, j: usize) -> f64 {
        self.grid_min + j as f64 * self.dx
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx
    }

    /// Probability mass on grid points with `lo <= Q < hi`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(j, _)| {
                let q = self.position(*j);
                q >= lo && q < hi
            })
            .map(|(_, v)| v)
            .sum::<f64>()
            * self.dx
    }

    /// `(mean, variance)` of the normalized density.
    pub fn moments(&self) -> (f64, f64) {
        let total: f64 = self.values.iter().sum();
        let mean = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * self.position(j))
            .sum::<f64>()
            / total;
        let var = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * (self.position(j) - mean).powi(2))
            .sum::<f64>()
            / total;
        (mean, var)
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    /// Grid positions of strict local maxima above `floor`.
    pub fn peaks(&self, floor: f64) -> Vec<f64> {
        self.values
            .windows(3)
            .enumerate()
            .filter(|(_, w)| w[1] > floor && w[1] > w[0] && w[1] >= w[2])
            .map(|(j, _)| self.position(j + 1))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for (j, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.position(j), v));
        }
        out
    }
}

/// Couples pre-selected system and pointer, then post-selects the system.
///
/// Returns the renormalized post-selected pointer and its moments;
/// `postselect_prob` is the squared norm before renormalization.
pub fn evolve_and_postselect(
    pre: &StateVector,
    post: &StateVector,
    obs: &SpectralObservable,
    g: f64,
    pointer: &GaussianPointer,
) -> Result<(GaussianPointer, PointerReadout)> {
    check_dims(pre.dim(), post.dim())?;
    check_dims(obs.dim(), pre.dim())?;
    checked_overlap(pre, post)?;
    pointer.check_headroom(obs.eigenvalues().iter().map(|o| g * o))?;

    let terms: Vec<(C64, f64)> = obs
        .eigenpairs()
        .map(|(o, v)| {
            let w = inner_raw(post.amplitudes(), v.amplitudes())
                * inner_raw(v.amplitudes(), pre.amplitudes());
            (w, g * o)
        })
        .collect();
    let phi = pointer.superpose_shifted(&terms);
    let prob = phi.iter().map(C64::norm_sqr).sum::<f64>() * pointer.dx;
    if !(prob > 0.0) {
        return Err(Error::ImpossiblePostselection);
    }
    let scale = prob.sqrt();
    let evolved = GaussianPointer {
        amplitudes: phi.into_iter().map(|a| a / scale).collect(),
        ..pointer.clone()
    };
    let edge = evolved.amplitudes[0]
        .norm()
        .max(evolved.amplitudes[evolved.n_points() - 1].norm());
    if edge >= BOUNDARY_TOL {
        return Err(Error::GridOverflow(format!(
            "boundary amplitude {edge:e} after post-selection"
        )));
    }
    let readout = PointerReadout {
        postselect_prob: prob,
        ..evolved.readout()
    };
    Ok((evolved, readout))
}

/// First-order pointer shifts predicted from a weak value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictedShifts {
    /// `g Re w`.
    pub dq: f64,
    /// `2 g Im w Var(P)`, which the grid evolution reproduces.
    pub dp: f64,
    /// `2 g Im w / sigma^2`, the form often quoted for this Gaussian; it is
    /// twice `dp` under the `exp(-Q^2 / 2 sigma^2)` normalization.
    pub dp_quoted: f64,
    /// `g |w| <= 0.1 sigma`.
    pub weak_regime: bool,
}

pub fn predicted_shifts(wv: &WeakValueResult, g: f64, pointer: &GaussianPointer) -> PredictedShifts {
    let var_p = pointer.readout().var_p;
    let sigma = pointer.sigma();
    PredictedShifts {
        dq: g * wv.re,
        dp: 2.0 * g * wv.im * var_p,
        dp_quoted: 2.0 * g * wv.im / (sigma * sigma),
        weak_regime: g.abs() * wv.value.norm() <= WEAK_SHIFT_FRACTION * sigma,
    }
}

/// Pointer position density without post-selection:
/// `sum_k |<o_k|psi>|^2 |Psi(Q - g o_k)|^2`.
pub fn ensemble_distribution(
    pre: &StateVector,
    obs: &SpectralObservable,
    g: f64,
    pointer: &GaussianPointer,
) -> Result<PositionDensity> {
    check_dims(obs.dim(), pre.dim())?;
    pointer.check_headroom(obs.eigenvalues().iter().map(|o| g * o))?;
    let mut values = vec![0.0; pointer.n_points()];
    for (o, v) in obs.eigenpairs() {
        let weight = inner_raw(v.amplitudes(), pre.amplitudes()).norm_sqr();
        if weight == 0.0 {
            continue;
        }
        for (slot, d) in values.iter_mut().zip(pointer.shifted_density(g * o)) {
            *slot += weight * d;
        }
    }
    Ok(PositionDensity {
        grid_min: pointer.grid_min,
        dx: pointer.dx,
        values,
    })
}

enum Direction {
    Forward,
    Inverse,
}

fn fft(input: &[C64], direction: Direction) -> Vec<C64> {
    let mut planner = FftPlanner::<f64>::new();
    let n = input.len();
    let mut buf = input.to_vec();
    match direction {
        Direction::Forward => planner.plan_fft_forward(n).process(&mut buf),
        Direction::Inverse => {
            planner.plan_fft_inverse(n).process(&mut buf);
            let scale = 1.0 / n as f64;
            buf.iter_mut().for_each(|a| *a *= scale);
        }
    }
    buf
}
