//! Reference solutions that share no code path with the time steppers.
//!
//! * [`couette_exact`]: the Kelvin solution of `f_t + y f_x = nu f_yy` in
//!   Fourier variables, evaluated on a large periodic y-box.
//! * [`expm_mode`]: dense matrix exponential of a mode operator.
//! * [`heat_rate`]: slowest decay rate without shear.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::discretize::{BoundaryCondition, Grid};
use crate::error::{Error, Result};
use crate::discretize::DiffusionOperator;
use crate::profiles::ShearProfile;
use crate::solver::{
    build_mode_operator, default_initial_data, evolve, fft_frequencies, step_crank_nicolson, wavenumber,
    EvolveOptions, ModeField, ModeOperator, YScheme,
};

/// Largest system handled by the dense exponential.
pub const MAX_DENSE: usize = 256;

/// Relative size below which an unresolved contribution is treated as zero.
const NEGLIGIBLE: f64 = 1e-14;

/// Kelvin-mode setup on the periodic box `(-L, L)`.
#[derive(Debug, Clone)]
pub struct CouetteSpec {
    pub nu: f64,
    pub k: f64,
    pub include_x_diffusion: bool,
    grid: Grid,
    samples: Vec<Complex64>,
    spectrum: Vec<Complex64>,
    eta: Vec<f64>,
}

impl CouetteSpec {
    /// `samples` are the initial values `f_in(y_j)` on `grid`, which must be a
    /// periodic grid; they should vanish for `|y| >= L/4`.
    pub fn new(grid: Grid, samples: Vec<Complex64>, k: f64, nu: f64, include_x_diffusion: bool) -> Result<Self> {
        if grid.bc() != BoundaryCondition::Periodic {
            return Err(Error::InvalidParameter("the Couette oracle needs a periodic box".into()));
        }
        if samples.len() != grid.n_y() {
            return Err(Error::InvalidParameter("one sample per grid node required".into()));
        }
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter(format!("nu = {nu} must be positive")));
        }
        let eta = fft_frequencies(grid.n_y(), grid.length());
        let spectrum = eta.iter().map(|&e| dtft(grid.nodes(), &samples, e)).collect();
        Ok(Self {
            nu,
            k,
            include_x_diffusion,
            grid,
            samples,
            spectrum,
            eta,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn initial_samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Frequencies `eta_q` of the stored spectrum, in FFT order.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// `sum_j f_in(y_j) e^{-i eta_q y_j}`.
    pub fn initial_spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Nyquist frequency of the box grid.
    pub fn band(&self) -> f64 {
        PI / self.grid.h()
    }

    /// Spectral multiplier `e^{-nu t (eta^2 + eta k t + k^2 t^2 / 3)}`, times
    /// `e^{-nu k^2 t}` for the full Laplacian.
    pub fn multiplier(&self, eta: f64, t: f64) -> f64 {
        let k = self.k;
        let mut exponent = self.nu * t * (eta * eta + eta * k * t + k * k * t * t / 3.0);
        if self.include_x_diffusion {
            exponent += self.nu * k * k * t;
        }
        (-exponent).exp()
    }

    /// Largest spectral magnitude overall and within the outer tenth of the band.
    fn spectrum_extent(&self) -> (f64, f64) {
        let band = self.band();
        let mut peak = 0.0_f64;
        let mut edge = 0.0_f64;
        for (&e, z) in self.eta.iter().zip(&self.spectrum) {
            peak = peak.max(z.norm());
            if e.abs() >= 0.9 * band {
                edge = edge.max(z.norm());
            }
        }
        (peak, edge)
    }

    /// Respecify the initial data as the exact solution at time `t`.
    pub fn advanced(&self, t: f64) -> Result<Self> {
        let values = couette_exact_physical(self, t)?;
        Self::new(self.grid.clone(), values, self.k, self.nu, self.include_x_diffusion)
    }
}

/// Discrete-time Fourier transform of grid samples, which is the
/// band-limited interpolant of the stored spectrum.
fn dtft(nodes: &[f64], samples: &[Complex64], eta: f64) -> Complex64 {
    nodes
        .iter()
        .zip(samples)
        .map(|(&y, &f)| f * Complex64::from_polar(1.0, -eta * y))
        .sum()
}

/// Exact spectrum `f(k, eta_q, t) = multiplier(eta_q, t) * f_in(k, eta_q + k t)`
/// on the box frequencies.
pub fn couette_exact(spec: &CouetteSpec, t: f64) -> Result<Vec<Complex64>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be non-negative")));
    }
    if t == 0.0 {
        return Ok(spec.spectrum.clone());
    }
    let band = spec.band();
    let shift = spec.k * t;
    let (peak, edge) = spec.spectrum_extent();
    spec.eta
        .iter()
        .map(|&eta| {
            let weight = spec.multiplier(eta, t);
            let xi = eta + shift;
            if xi.abs() <= band {
                return Ok(weight * dtft(spec.grid.nodes(), &spec.samples, xi));
            }
            // Beyond the band the data is taken as band-limited, which is only
            // trustworthy if the spectrum has already died out at the edge.
            if weight * edge <= NEGLIGIBLE * peak {
                Ok(Complex64::default())
            } else {
                Err(Error::ExtendEtaGrid { xi, band })
            }
        })
        .collect()
}

/// Exact solution at the box nodes, by inverse discrete transform of
/// [`couette_exact`].
pub fn couette_exact_physical(spec: &CouetteSpec, t: f64) -> Result<Vec<Complex64>> {
    let spectrum = couette_exact(spec, t)?;
    let n = spec.grid.n_y() as f64;
    Ok(spec
        .grid
        .nodes()
        .iter()
        .map(|&y| {
            spec.eta
                .iter()
                .zip(&spectrum)
                .map(|(&e, &f)| f * Complex64::from_polar(1.0, e * y))
                .sum::<Complex64>()
                / n
        })
        .collect())
}

/// `||f(t)||_{L^2_y}` of the exact solution, from the discrete Parseval identity.
pub fn couette_exact_norm(spec: &CouetteSpec, t: f64) -> Result<f64> {
    let spectrum = couette_exact(spec, t)?;
    let n = spec.grid.n_y() as f64;
    let h = spec.grid.h();
    Ok((h / n * spectrum.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt())
}

/// Smooth compactly supported test data on a box grid: a random combination
/// of Fourier modes under the bump `exp(-1 / (1 - (y / R)^2))`, with
/// `R = L / 4` for the box `(-L, L)`.
pub fn compact_bump_data(grid: &Grid, seed: u64) -> Vec<Complex64> {
    const TERMS: usize = 4;
    let radius = 0.25 * grid.length() / 2.0;
    let center = 0.5 * (grid.y_lo() + grid.y_hi());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<Complex64> = (0..2 * TERMS)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let values: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&y| {
            let s = (y - center) / radius;
            let envelope = bump(s);
            if envelope == 0.0 {
                return Complex64::default();
            }
            let wave: Complex64 = (0..TERMS)
                .map(|j| {
                    let phase = PI * j as f64 * s / 2.0;
                    coeffs[2 * j] * phase.cos() + coeffs[2 * j + 1] * phase.sin()
                })
                .sum();
            envelope * wave
        })
        .collect();
    let norm = grid.norm(&values);
    values.into_iter().map(|v| v / norm).collect()
}

/// `exp(-1 / (1 - s^2))` on `|s| < 1`, zero outside.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    const THETA_13: f64 = 5.371_920_351_148_152;
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > THETA_13 {
        (norm1 / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * Complex64::new(2f64.powi(-squarings), 0.0);
    let id = DMatrix::<Complex64>::identity(n, n);
    let c = |x: f64| Complex64::new(x, 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]))
        + &a6 * c(B[7])
        + &a4 * c(B[5])
        + &a2 * c(B[3])
        + &id * c(B[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]))
        + &a6 * c(B[6])
        + &a4 * c(B[4])
        + &a2 * c(B[2])
        + &id * c(B[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Pade denominator is nonsingular for scaled input");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// `e^{t L_k} state` by dense exponential.
pub fn expm_mode(op: &ModeOperator, state: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    let n = op.n();
    if n > MAX_DENSE {
        return Err(Error::TooLargeForDense(n));
    }
    if state.len() != n {
        return Err(Error::InvalidParameter("state length must match the operator".into()));
    }
    if t == 0.0 {
        return Ok(state.to_vec());
    }
    let a = op.to_dense() * Complex64::new(t, 0.0);
    let out = expm(&a) * DVector::from_column_slice(state);
    Ok(out.iter().copied().collect())
}

/// Slowest decay rate of `f_t = nu f_yy` on the unit interval (mean-free data
/// for Neumann and periodic conditions).
pub fn heat_rate(bc: BoundaryCondition, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu = {nu} must be positive")));
    }
    Ok(match bc {
        BoundaryCondition::Dirichlet | BoundaryCondition::Neumann => nu * PI * PI,
        BoundaryCondition::Periodic => nu * 4.0 * PI * PI,
    })
}

/// Solver run against [`couette_exact`] on the box `(-half_width, half_width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouetteComparison {
    pub nu: f64,
    pub t: f64,
    pub n_y: usize,
    pub half_width: f64,
    pub scheme: YScheme,
    pub dt: f64,
    /// `||f_solver - f_exact|| / ||f_exact||` at time `t`.
    pub relative_error: f64,
}

/// Evolve compact seed data for the x-mode `m = 1` under `b(y) = y` and
/// compare with the exact solution at `t`.
pub fn compare_with_couette(
    nu: f64,
    t: f64,
    n_y: usize,
    half_width: f64,
    scheme: YScheme,
    dt: f64,
    seed: u64,
) -> Result<CouetteComparison> {
    let grid = Grid::on_interval(BoundaryCondition::Periodic, n_y, -half_width, half_width)?;
    let data = compact_bump_data(&grid, seed);
    let k = wavenumber(1);
    let spec = CouetteSpec::new(grid.clone(), data.clone(), k, nu, false)?;
    let exact = couette_exact_physical(&spec, t)?;
    let numeric = if t == 0.0 {
        data
    } else {
        let field = ModeField::new(grid.clone(), vec![1], vec![data])?;
        let mut opts = EvolveOptions::new(t, dt);
        opts.sample_every = usize::MAX / 2;
        opts.scheme = scheme;
        // a coarse step is a legitimate request here; its error is what gets reported
        opts.enforce_dt_max = false;
        let traj = evolve(&field, &ShearProfile::builtin("couette")?, nu, &opts)?;
        let last = traj.final_state.expect("evolve stores the final state");
        last.amplitudes()[0].clone()
    };
    let diff: Vec<Complex64> = numeric.iter().zip(&exact).map(|(a, b)| a - b).collect();
    let scale = grid.norm(&exact);
    Ok(CouetteComparison {
        nu,
        t,
        n_y,
        half_width,
        scheme,
        dt,
        relative_error: if scale > 0.0 { grid.norm(&diff) / scale } else { grid.norm(&diff) },
    })
}

/// Relative errors of Crank-Nicolson against [`expm_mode`] at time `t`, one
/// per step size, for the Couette mode operator with `k = 2 pi` on a
/// dirichlet grid and seed-0 data.
pub fn crank_nicolson_errors(nu: f64, n_y: usize, t: f64, dts: &[f64]) -> Result<Vec<f64>> {
    let op = DiffusionOperator::build(Grid::new(BoundaryCondition::Dirichlet, n_y)?)?;
    let lk = build_mode_operator(&ShearProfile::builtin("couette")?, &op, wavenumber(1), nu, false)?;
    let data = default_initial_data(&op, 1, 0)?.amplitudes()[0].clone();
    let reference = expm_mode(&lk, &data, t)?;
    let scale = op.grid().norm(&reference);
    dts.iter()
        .map(|&dt| {
            let steps = (t / dt).round().max(1.0) as usize;
            let h = t / steps as f64;
            let mut state = data.clone();
            for _ in 0..steps {
                state = step_crank_nicolson(&state, &lk, h)?;
            }
            let diff: Vec<Complex64> = state.iter().zip(&reference).map(|(a, b)| a - b).collect();
            Ok(op.grid().norm(&diff) / scale)
        })
        .collect()
}
