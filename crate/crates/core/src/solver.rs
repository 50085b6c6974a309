//! Mode-by-mode evolution of `f_t + b(y) f_x - nu f_yy = 0`.
//!
//! Since `b` depends on `y` only, each Fourier mode `e^{2 pi i m x}` evolves
//! independently under `L_k = -i k b(y) + nu D` (minus `nu k^2` for the full
//! Laplacian). Only `m > 0` is stored; the field is real, so `m < 0` is the
//! complex conjugate and the `m = 0` mean is identically zero.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::discretize::{BoundaryCondition, DiffusionOperator, Grid};
use crate::error::{Error, Result};
use crate::profiles::ShearProfile;
use crate::tridiag::{Factored, Tridiagonal};

/// Number of diffusion eigenmodes mixed into the default initial data.
pub const INITIAL_Y_MODES: usize = 8;

/// x-wavenumber of integer mode `m` on the unit torus.
pub fn wavenumber(m: u32) -> f64 {
    2.0 * PI * f64::from(m)
}

/// The operator `L_k` acting on one x-mode, stored as a complex tridiagonal
/// (cyclic on periodic grids) matrix.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    pub k: f64,
    pub nu: f64,
    pub include_x_diffusion: bool,
    pub matrix: Tridiagonal,
}

impl ModeOperator {
    pub fn n(&self) -> usize {
        self.matrix.len()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.matrix.mul(v)
    }

    /// Dense copy, row-major, for the matrix-exponential oracle.
    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let a = &self.matrix;
        let n = a.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = a.diag[i];
            if i > 0 {
                m[(i, i - 1)] = a.lower[i - 1];
            }
            if i + 1 < n {
                m[(i, i + 1)] = a.upper[i];
            }
        }
        if let Some((tr, bl)) = a.corners {
            m[(0, n - 1)] += tr;
            m[(n - 1, 0)] += bl;
        }
        m
    }
}

/// `L_k = -i k diag(b(y_j)) + nu D - [nu k^2]`.
pub fn build_mode_operator(
    profile: &ShearProfile,
    op: &DiffusionOperator,
    k: f64,
    nu: f64,
    include_x_diffusion: bool,
) -> Result<ModeOperator> {
    if k == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu = {nu} must be positive")));
    }
    let mut matrix = op.to_tridiagonal(nu);
    let x_damping = if include_x_diffusion { nu * k * k } else { 0.0 };
    for (d, &y) in matrix.diag.iter_mut().zip(op.grid().nodes()) {
        *d += Complex64::new(-x_damping, -k * profile.eval(y));
    }
    Ok(ModeOperator {
        k,
        nu,
        include_x_diffusion,
        matrix,
    })
}

/// Crank-Nicolson propagator `(I - dt/2 L)^{-1} (I + dt/2 L)` with the
/// implicit side factored once.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    explicit: Tridiagonal,
    implicit: Factored,
    dt: f64,
}

impl CrankNicolson {
    pub fn new(op: &ModeOperator, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        let half = 0.5 * dt;
        let shifted = |sign: f64| {
            let mut t = op.matrix.clone();
            let scale = |z: &mut Complex64| *z *= sign * half;
            t.lower.iter_mut().for_each(scale);
            t.upper.iter_mut().for_each(scale);
            t.diag.iter_mut().for_each(|z| *z = Complex64::new(1.0, 0.0) + *z * (sign * half));
            if let Some((tr, bl)) = t.corners.as_mut() {
                *tr *= sign * half;
                *bl *= sign * half;
            }
            t
        };
        let explicit = shifted(1.0);
        let implicit = shifted(-1.0).factor()?;
        Ok(Self {
            explicit,
            implicit,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_in_place(&self, state: &mut [Complex64], scratch: &mut [Complex64]) {
        self.explicit.mul_into(state, scratch);
        state.copy_from_slice(scratch);
        self.implicit.solve_in_place(state);
    }
}

/// One Crank-Nicolson step.
pub fn step_crank_nicolson(state: &[Complex64], op: &ModeOperator, dt: f64) -> Result<Vec<Complex64>> {
    let cn = CrankNicolson::new(op, dt)?;
    let mut out = state.to_vec();
    let mut scratch = vec![Complex64::default(); state.len()];
    cn.step_in_place(&mut out, &mut scratch);
    Ok(out)
}

/// How the y-direction is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YScheme {
    /// Second-order differences with Crank-Nicolson in time.
    #[default]
    FiniteDifference,
    /// Periodic grids only: Fourier diffusion in y, advection applied exactly
    /// in physical space, combined by Strang splitting.
    Spectral,
}

/// Strang split step for one mode on a periodic grid:
/// half advection, exact Fourier diffusion, half advection.
#[derive(Clone)]
pub struct SpectralSplit {
    half_advection: Vec<Complex64>,
    diffusion: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for SpectralSplit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralSplit").field("n", &self.diffusion.len()).finish()
    }
}

impl SpectralSplit {
    pub fn new(
        profile: &ShearProfile,
        grid: &Grid,
        k: f64,
        nu: f64,
        dt: f64,
        include_x_diffusion: bool,
    ) -> Result<Self> {
        if grid.bc() != BoundaryCondition::Periodic {
            return Err(Error::InvalidParameter(
                "the spectral y-scheme requires a periodic grid".into(),
            ));
        }
        if k == 0.0 {
            return Err(Error::ZeroWavenumber);
        }
        let n = grid.n_y();
        let x_damping = if include_x_diffusion { (-0.5 * nu * k * k * dt).exp() } else { 1.0 };
        let half_advection = grid
            .nodes()
            .iter()
            .map(|&y| Complex64::from_polar(x_damping, -0.5 * k * profile.eval(y) * dt))
            .collect();
        let diffusion = fft_frequencies(n, grid.length())
            .into_iter()
            .map(|eta| (-nu * eta * eta * dt).exp() / n as f64)
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Ok(Self {
            half_advection,
            diffusion,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
        })
    }

    pub fn step_in_place(&mut self, state: &mut [Complex64]) {
        for (s, a) in state.iter_mut().zip(&self.half_advection) {
            *s *= a;
        }
        self.forward.process_with_scratch(state, &mut self.scratch);
        for (s, d) in state.iter_mut().zip(&self.diffusion) {
            *s *= d;
        }
        self.inverse.process_with_scratch(state, &mut self.scratch);
        for (s, a) in state.iter_mut().zip(&self.half_advection) {
            *s *= a;
        }
    }
}

/// Angular frequencies of an `n`-point DFT on a box of length `length`,
/// in FFT order.
pub fn fft_frequencies(n: usize, length: f64) -> Vec<f64> {
    (0..n)
        .map(|q| {
            let signed = if q <= (n - 1) / 2 { q as f64 } else { q as f64 - n as f64 };
            2.0 * PI * signed / length
        })
        .collect()
}

enum Stepper {
    CrankNicolson(CrankNicolson, Vec<Complex64>),
    Spectral(SpectralSplit),
}

impl Stepper {
    fn step(&mut self, state: &mut [Complex64]) {
        match self {
            Stepper::CrankNicolson(cn, scratch) => cn.step_in_place(state, scratch),
            Stepper::Spectral(split) => split.step_in_place(state),
        }
    }
}

/// Complex amplitudes `f_m(y)` for positive x-modes `m` on a y-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    grid: Grid,
    modes: Vec<u32>,
    amplitudes: Vec<Vec<Complex64>>,
}

impl ModeField {
    pub fn new(grid: Grid, modes: Vec<u32>, amplitudes: Vec<Vec<Complex64>>) -> Result<Self> {
        if modes.len() != amplitudes.len() {
            return Err(Error::InvalidParameter("one amplitude vector per mode required".into()));
        }
        if modes.contains(&0) {
            return Err(Error::ZeroWavenumber);
        }
        if modes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("modes must be strictly increasing".into()));
        }
        if amplitudes.iter().any(|a| a.len() != grid.n_y()) {
            return Err(Error::InvalidParameter("amplitude length must equal n_y".into()));
        }
        Ok(Self {
            grid,
            modes,
            amplitudes,
        })
    }

    /// Zero field on modes `1..=m_max`.
    pub fn zeros(grid: Grid, m_max: u32) -> Self {
        let n = grid.n_y();
        let modes: Vec<u32> = (1..=m_max).collect();
        let amplitudes = vec![vec![Complex64::default(); n]; modes.len()];
        Self {
            grid,
            modes,
            amplitudes,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn modes(&self) -> &[u32] {
        &self.modes
    }

    pub fn amplitudes(&self) -> &[Vec<Complex64>] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.amplitudes
    }

    pub fn mode(&self, m: u32) -> Option<&[Complex64]> {
        self.modes.iter().position(|&x| x == m).map(|i| self.amplitudes[i].as_slice())
    }

    pub fn max_mode(&self) -> u32 {
        self.modes.last().copied().unwrap_or(0)
    }

    /// `||f_m||_{L^2_y}` for each stored mode.
    pub fn mode_norms(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| self.grid.norm(a)).collect()
    }

    /// `||f||_{L^2(T x D)}`, counting each stored mode together with its conjugate.
    pub fn norm(&self) -> f64 {
        self.mode_norms().iter().map(|n| 2.0 * n * n).sum::<f64>().sqrt()
    }

    /// `nu^{1/2} ||d_y f||_{L^2(T x D)}` with the grid's difference stencil.
    pub fn h1y_norm(&self, nu: f64) -> f64 {
        let total: f64 = self.amplitudes.iter().map(|a| 2.0 * self.grid.gradient_norm_sqr(a)).sum();
        (nu * total).sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        for a in &mut self.amplitudes {
            a.iter_mut().for_each(|z| *z *= c);
        }
    }

    /// Field values `f(x_i, y_j)` summing each stored mode and its conjugate
    /// partner explicitly; rows are indexed by `x`.
    pub fn physical_values(&self, xs: &[f64]) -> Vec<Vec<Complex64>> {
        xs.iter()
            .map(|&x| {
                let mut row = vec![Complex64::default(); self.grid.n_y()];
                for (&m, amp) in self.modes.iter().zip(&self.amplitudes) {
                    let phase = wavenumber(m) * x;
                    let plus = Complex64::from_polar(1.0, phase);
                    let minus = Complex64::from_polar(1.0, -phase);
                    for (r, a) in row.iter_mut().zip(amp) {
                        *r += a * plus + a.conj() * minus;
                    }
                }
                row
            })
            .collect()
    }
}

/// Seed-reproducible band-limited data: each mode `m = 1..=m_max` is a random
/// complex combination of the first eight diffusion eigenvectors, and the
/// field is scaled to unit `L^2` norm.
pub fn default_initial_data(op: &DiffusionOperator, m_max: u32, seed: u64) -> Result<ModeField> {
    if m_max == 0 {
        return Err(Error::InvalidParameter("m_max must be at least 1".into()));
    }
    let grid = op.grid().clone();
    let basis = op.eigenbasis();
    let count = INITIAL_Y_MODES.min(basis.vectors.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = ModeField::zeros(grid, m_max);
    for amp in field.amplitudes_mut() {
        for e in &basis.vectors[..count] {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let c = Complex64::new(re, im);
            for (a, &ej) in amp.iter_mut().zip(e) {
                *a += c * ej;
            }
        }
    }
    let norm = field.norm();
    field.scale(1.0 / norm);
    Ok(field)
}

/// Time-sampled diagnostics of one evolution.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub modes: Vec<u32>,
    pub sample_times: Vec<f64>,
    /// `||f(t)||_{L^2(Omega)}`
    pub l2_norms: Vec<f64>,
    /// `||f_m(t)||_{L^2_y}` per sample, in the order of `modes`.
    pub per_mode_norms: Vec<Vec<f64>>,
    /// `nu^{1/2} ||d_y f(t)||`
    pub h1y_history: Vec<f64>,
    pub snapshots: Vec<(f64, ModeField)>,
    /// State at the last sample time.
    pub final_state: Option<ModeField>,
    /// Step size actually used (`t_end / ceil(t_end / dt)`).
    pub dt: f64,
}

impl Trajectory {
    pub fn initial_norm(&self) -> f64 {
        self.l2_norms.first().copied().unwrap_or(0.0)
    }

    pub fn relative_norms(&self) -> Vec<f64> {
        let n0 = self.initial_norm();
        self.l2_norms.iter().map(|n| n / n0).collect()
    }

    pub fn final_time(&self) -> f64 {
        self.sample_times.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub t_end: f64,
    /// Largest step allowed; the step used divides `t_end` evenly.
    pub dt: f64,
    /// Steps between samples.
    pub sample_every: usize,
    /// Record a full snapshot every this many samples.
    pub snapshot_every: Option<usize>,
    pub include_x_diffusion: bool,
    pub scheme: YScheme,
    /// Stop once `||f(t)|| <= stop_below * ||f_in||`.
    pub stop_below: Option<f64>,
    /// Reject `dt` above `0.5 / (k_max max|b|)`.
    pub enforce_dt_max: bool,
}

impl EvolveOptions {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Self {
            t_end,
            dt,
            sample_every: 1,
            snapshot_every: None,
            include_x_diffusion: false,
            scheme: YScheme::FiniteDifference,
            stop_below: None,
            enforce_dt_max: true,
        }
    }
}

/// Accuracy bound `0.5 / (k_max max|b|)` resolving the advective phase.
pub fn dt_max(profile: &ShearProfile, grid: &Grid, m_max: u32) -> f64 {
    let bmax = profile.max_abs_over(grid.nodes());
    if bmax == 0.0 || m_max == 0 {
        f64::INFINITY
    } else {
        0.5 / (wavenumber(m_max) * bmax)
    }
}

/// Advance every stored mode independently and record diagnostics.
///
/// Modes are stepped in parallel between samples; reductions run in mode
/// order so results do not depend on the worker count.
pub fn evolve(field: &ModeField, profile: &ShearProfile, nu: f64, opts: &EvolveOptions) -> Result<Trajectory> {
    if !(opts.t_end > 0.0) || !(opts.dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_end = {} and dt = {} must be positive",
            opts.t_end, opts.dt
        )));
    }
    if opts.sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be at least 1".into()));
    }
    let grid = field.grid().clone();
    let limit = dt_max(profile, &grid, field.max_mode());
    if opts.enforce_dt_max && opts.dt > limit * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "dt = {} exceeds dt_max = {limit:.6e}",
            opts.dt
        )));
    }
    let n_steps = (opts.t_end / opts.dt - 1e-9).ceil().max(1.0) as usize;
    let dt = opts.t_end / n_steps as f64;
    let op = DiffusionOperator::build(grid.clone())?;

    let mut steppers = field
        .modes()
        .iter()
        .map(|&m| {
            let k = wavenumber(m);
            match opts.scheme {
                YScheme::FiniteDifference => {
                    let lk = build_mode_operator(profile, &op, k, nu, opts.include_x_diffusion)?;
                    Ok(Stepper::CrankNicolson(
                        CrankNicolson::new(&lk, dt)?,
                        vec![Complex64::default(); grid.n_y()],
                    ))
                }
                YScheme::Spectral => Ok(Stepper::Spectral(SpectralSplit::new(
                    profile,
                    &grid,
                    k,
                    nu,
                    dt,
                    opts.include_x_diffusion,
                )?)),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut state = field.clone();
    let mut traj = Trajectory {
        modes: field.modes().to_vec(),
        dt,
        ..Default::default()
    };
    record(&mut traj, &state, 0.0, nu, opts.snapshot_every.is_some());
    let n0 = traj.initial_norm();

    let mut step = 0;
    let mut samples = 0usize;
    while step < n_steps {
        let chunk = opts.sample_every.min(n_steps - step);
        let t_next = (step + chunk) as f64 * dt;
        steppers
            .par_iter_mut()
            .zip(state.amplitudes.par_iter_mut())
            .zip(field.modes().par_iter())
            .try_for_each(|((stepper, amp), &m)| {
                for _ in 0..chunk {
                    stepper.step(amp);
                }
                if amp.iter().all(|z| z.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::NonFinite { mode: m, time: t_next })
                }
            })?;
        step += chunk;
        samples += 1;
        let snap = opts.snapshot_every.is_some_and(|every| samples.is_multiple_of(every.max(1)));
        record(&mut traj, &state, t_next, nu, snap);
        if let Some(threshold) = opts.stop_below {
            if n0 > 0.0 && traj.l2_norms.last().copied().unwrap_or(0.0) <= threshold * n0 {
                break;
            }
        }
    }
    traj.final_state = Some(state);
    Ok(traj)
}

fn record(traj: &mut Trajectory, state: &ModeField, t: f64, nu: f64, snapshot: bool) {
    let per_mode = state.mode_norms();
    let l2 = per_mode.iter().map(|n| 2.0 * n * n).sum::<f64>().sqrt();
    traj.sample_times.push(t);
    traj.l2_norms.push(l2);
    traj.per_mode_norms.push(per_mode);
    traj.h1y_history.push(state.h1y_norm(nu));
    if snapshot {
        traj.snapshots.push((t, state.clone()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::ShearProfile;

    fn dirichlet(n: usize) -> DiffusionOperator {
        DiffusionOperator::build(Grid::new(BoundaryCondition::Dirichlet, n).unwrap()).unwrap()
    }

    fn sine_mode(grid: &Grid) -> ModeField {
        let amp = grid.nodes().iter().map(|&y| Complex64::new((PI * y).sin(), 0.0)).collect();
        ModeField::new(grid.clone(), vec![1], vec![amp]).unwrap()
    }

    #[test]
    fn zero_wavenumber_rejected() {
        let op = dirichlet(16);
        let p = ShearProfile::builtin("couette").unwrap();
        assert_eq!(build_mode_operator(&p, &op, 0.0, 1e-2, false).unwrap_err(), Error::ZeroWavenumber);
        assert!(ModeField::new(op.grid().clone(), vec![0], vec![vec![Complex64::default(); 16]]).is_err());
    }

    #[test]
    fn still_profile_reduces_to_diffusion() {
        let op = dirichlet(16);
        let nu = 0.3;
        let k = 2.0 * PI;
        let lk = build_mode_operator(&ShearProfile::still(), &op, k, nu, false).unwrap();
        let full = build_mode_operator(&ShearProfile::still(), &op, k, nu, true).unwrap();
        for i in 0..16 {
            assert!((lk.matrix.diag[i].re - nu * op.main_diag()[i]).abs() < 1e-12);
            assert_eq!(lk.matrix.diag[i].im, 0.0);
            assert!((full.matrix.diag[i].re - nu * op.main_diag()[i] + nu * k * k).abs() < 1e-9);
        }
    }

    #[test]
    fn couette_full_symbol() {
        let op = dirichlet(32);
        let nu = 1e-2;
        let k = 2.0 * PI;
        let lk = build_mode_operator(&ShearProfile::builtin("couette").unwrap(), &op, k, nu, true).unwrap();
        for (d, (&y, &m)) in lk.matrix.diag.iter().zip(op.grid().nodes().iter().zip(op.main_diag())) {
            assert!((d.re - (-nu * k * k + nu * m)).abs() < 1e-9);
            assert!((d.im + k * y).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_amplification() {
        let lambda = Complex64::new(-0.7, 2.0);
        let matrix = Tridiagonal {
            lower: vec![Complex64::default(); 7],
            diag: vec![lambda; 8],
            upper: vec![Complex64::default(); 7],
            corners: None,
        };
        let lk = ModeOperator {
            k: 1.0,
            nu: 1.0,
            include_x_diffusion: false,
            matrix,
        };
        let dt = 0.1;
        let out = step_crank_nicolson(&[Complex64::new(1.0, 0.0); 8], &lk, dt).unwrap();
        let expected = (1.0 + lambda * dt / 2.0) / (1.0 - lambda * dt / 2.0);
        assert!(out.iter().all(|z| (z - expected).norm() < 1e-14));
    }

    #[test]
    fn heat_decay_of_first_sine_mode() {
        let nu = 1e-2;
        let grid = Grid::new(BoundaryCondition::Dirichlet, 255).unwrap();
        let field = sine_mode(&grid);
        let mut opts = EvolveOptions::new(10.0, 0.05);
        opts.sample_every = 20;
        let traj = evolve(&field, &ShearProfile::still(), nu, &opts).unwrap();
        for (t, r) in traj.sample_times.iter().zip(traj.relative_norms()) {
            let exact = (-nu * PI * PI * t).exp();
            assert!((r - exact).abs() < 0.01 * exact, "t = {t}: {r} vs {exact}");
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let grid = Grid::new(BoundaryCondition::Neumann, 32).unwrap();
        let field = ModeField::zeros(grid, 3);
        let traj = evolve(&field, &ShearProfile::builtin("couette").unwrap(), 1e-3, &EvolveOptions::new(1.0, 0.01)).unwrap();
        assert!(traj.l2_norms.iter().all(|&n| n == 0.0));
    }

    #[test]
    fn default_data_contract() {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann, BoundaryCondition::Periodic] {
            let op = DiffusionOperator::build(Grid::new(bc, 64).unwrap()).unwrap();
            let a = default_initial_data(&op, 4, 0).unwrap();
            let b = default_initial_data(&op, 4, 0).unwrap();
            let c = default_initial_data(&op, 4, 1).unwrap();
            assert!((a.norm() - 1.0).abs() < 1e-12);
            assert_eq!(a, b);
            assert_ne!(a, c);
            assert_eq!(a.modes(), &[1, 2, 3, 4]);
            // x-mean of the reconstructed field vanishes
            let xs: Vec<f64> = (0..16).map(|i| i as f64 / 16.0).collect();
            let values = a.physical_values(&xs);
            for j in 0..64 {
                let mean: Complex64 = values.iter().map(|row| row[j]).sum::<Complex64>() / 16.0;
                assert!(mean.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dt_guard() {
        let op = dirichlet(32);
        let field = default_initial_data(&op, 2, 0).unwrap();
        let p = ShearProfile::builtin("couette").unwrap();
        let limit = dt_max(&p, op.grid(), 2);
        assert!(evolve(&field, &p, 1e-2, &EvolveOptions::new(1.0, 2.0 * limit)).is_err());
        assert!(evolve(&field, &p, 1e-2, &EvolveOptions::new(1.0, limit)).is_ok());
    }

    #[test]
    fn spectral_requires_periodic() {
        let grid = Grid::new(BoundaryCondition::Dirichlet, 32).unwrap();
        assert!(SpectralSplit::new(&ShearProfile::still(), &grid, 1.0, 1.0, 0.1, false).is_err());
    }

    #[test]
    fn spectral_heat_decay_is_exact_for_fourier_mode() {
        let grid = Grid::new(BoundaryCondition::Periodic, 64).unwrap();
        let amp = grid.nodes().iter().map(|&y| Complex64::from_polar(1.0, 2.0 * PI * y)).collect();
        let field = ModeField::new(grid, vec![1], vec![amp]).unwrap();
        let mut opts = EvolveOptions::new(3.0, 0.1);
        opts.scheme = YScheme::Spectral;
        let nu = 0.05;
        let traj = evolve(&field, &ShearProfile::still(), nu, &opts).unwrap();
        let expected = (-nu * 4.0 * PI * PI * 3.0).exp();
        assert!((traj.relative_norms().last().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn nonfinite_detected() {
        let grid = Grid::new(BoundaryCondition::Dirichlet, 16).unwrap();
        let mut amp = vec![Complex64::new(1.0, 0.0); 16];
        amp[3] = Complex64::new(f64::NAN, 0.0);
        let field = ModeField::new(grid, vec![2], vec![amp]).unwrap();
        let err = evolve(&field, &ShearProfile::still(), 1e-2, &EvolveOptions::new(0.1, 0.1)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { mode: 2, .. }));
    }
}
