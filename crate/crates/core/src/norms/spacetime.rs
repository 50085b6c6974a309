use num_complex::Complex64;

use crate::discretize::Grid;
use crate::error::{Error, Result};
use crate::solver::{ModeField, Trajectory};

/// A mode field sampled on a uniform time grid over `(t_0, t_0 + T_win)`.
///
/// Time integrals use the trapezoid rule on the samples.
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    times: Vec<f64>,
    slices: Vec<ModeField>,
}

impl SpaceTimeField {
    pub fn new(times: Vec<f64>, slices: Vec<ModeField>) -> Result<Self> {
        if times.len() != slices.len() || times.len() < 2 {
            return Err(Error::InvalidParameter(
                "need at least two time slices, one per sample time".into(),
            ));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
            return Err(Error::InvalidParameter("slice times must be uniformly spaced".into()));
        }
        let first = &slices[0];
        if slices
            .iter()
            .any(|s| s.modes() != first.modes() || s.grid() != first.grid())
        {
            return Err(Error::InvalidParameter("slices must share grid and modes".into()));
        }
        Ok(Self { times, slices })
    }

    /// Built from the snapshots of a trajectory.
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        let (times, slices) = traj.snapshots.iter().cloned().unzip();
        Self::new(times, slices)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[ModeField] {
        &self.slices
    }

    pub fn grid(&self) -> &Grid {
        self.slices[0].grid()
    }

    pub fn modes(&self) -> &[u32] {
        self.slices[0].modes()
    }

    pub fn window(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Trapezoid weights on the sample times.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.times.len();
        let dt = self.times[1] - self.times[0];
        (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * dt } else { dt })
            .collect()
    }

    /// `int_0^T q(f(t)) dt` for a per-slice quantity `q`.
    pub fn integrate(&self, q: impl Fn(&ModeField) -> f64) -> f64 {
        self.weights().iter().zip(&self.slices).map(|(w, s)| w * q(s)).sum()
    }

    /// `int 2 ||f_m(t)||^2 dt` for each stored mode, conjugates included.
    pub fn mode_energies(&self) -> Vec<(u32, f64)> {
        let weights = self.weights();
        self.modes()
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let e: f64 = weights
                    .iter()
                    .zip(&self.slices)
                    .map(|(w, s)| w * 2.0 * s.grid().norm_sqr(&s.amplitudes()[i]))
                    .sum();
                (m, e)
            })
            .collect()
    }

    /// `||f||_{L^2(Omega x (0, T))}`
    pub fn l2_norm(&self) -> f64 {
        self.mode_energies().iter().map(|(_, e)| e).sum::<f64>().sqrt()
    }

    /// Scale every slice by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let slices = self
            .slices
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.scale(c);
                s
            })
            .collect();
        Self {
            times: self.times.clone(),
            slices,
        }
    }

    /// A field `u(x, y, t) = psi(t) * sum_m e^{2 pi i m x} g_m(y)`, mostly for tests.
    pub fn separable(
        grid: Grid,
        modes: Vec<u32>,
        profiles: Vec<Vec<Complex64>>,
        times: Vec<f64>,
        psi: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let base = ModeField::new(grid, modes, profiles)?;
        let slices = times
            .iter()
            .map(|&t| {
                let mut s = base.clone();
                s.scale(psi(t));
                s
            })
            .collect();
        Self::new(times, slices)
    }
}
