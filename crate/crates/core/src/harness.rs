//! Timescale measurements over `nu`-sweeps and power-law fits.
//!
//! A sweep evolves the same seed-0 datum for a log-spaced list of
//! viscosities and records two timescales per run: the e-fold time and the
//! inverse of the exponential tail rate fitted over a window measured in
//! e-folds. Fitting `log tau` against `-log nu` gives the exponent estimate.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::discretize::{BoundaryCondition, DiffusionOperator, Grid};
use crate::error::{Error, Result};
use crate::oracle::compact_bump_data;
use crate::profiles::ShearProfile;
use crate::solver::{
    default_initial_data, evolve, wavenumber, EvolveOptions, ModeField, Trajectory, YScheme,
};

/// Minimum number of samples inside a tail-fit window.
pub const MIN_TAIL_SAMPLES: usize = 10;
/// Minimum number of usable records for an exponent fit.
pub const MIN_FIT_POINTS: usize = 4;
/// Tolerated relative timescale change under grid refinement.
pub const GATE_TOLERANCE: f64 = 0.01;

/// Outcome of the e-fold measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Efold {
    Reached(f64),
    /// The threshold was never crossed before `t_end`.
    Incomplete { t_end: f64 },
}

impl Efold {
    pub fn time(self) -> Option<f64> {
        match self {
            Efold::Reached(t) => Some(t),
            Efold::Incomplete { .. } => None,
        }
    }
}

/// First time with `||f(t)|| <= e^{-1} ||f_in||`, interpolated linearly in
/// `log ||f||` between the bracketing samples.
pub fn measure_efold(traj: &Trajectory) -> Efold {
    efold_of_series(&traj.sample_times, &traj.l2_norms)
}

pub fn efold_of_series(times: &[f64], norms: &[f64]) -> Efold {
    let t_end = times.last().copied().unwrap_or(0.0);
    let n0 = match norms.first() {
        Some(&n) if n > 0.0 => n,
        _ => return Efold::Incomplete { t_end },
    };
    let target = -1.0;
    let mut prev = (times[0], 0.0);
    for (&t, &n) in times.iter().zip(norms).skip(1) {
        let log_r = if n > 0.0 { (n / n0).ln() } else { f64::NEG_INFINITY };
        if log_r <= target {
            if !log_r.is_finite() {
                return Efold::Reached(t);
            }
            let (t0, l0) = prev;
            let frac = (target - l0) / (log_r - l0);
            return Efold::Reached(t0 + frac * (t - t0));
        }
        prev = (t, log_r);
    }
    Efold::Incomplete { t_end }
}

/// Tail-fit window in e-folds: samples with `e^{-hi} <= ||f|| / ||f_in|| <= e^{-lo}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for TailWindow {
    fn default() -> Self {
        Self { lo: 1.0, hi: 4.0 }
    }
}

impl TailWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo) {
            return Err(Error::InvalidParameter(format!("tail window [{lo}, {hi}] is empty")));
        }
        Ok(Self { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    /// Least-squares slope of `-log ||f||`; positive for decay.
    pub rate: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub n_points: usize,
}

/// Exponential tail rate over `window`.
pub fn measure_tail_rate(traj: &Trajectory, window: TailWindow) -> Result<TailFit> {
    tail_rate_of_series(&traj.sample_times, &traj.l2_norms, window)
}

pub fn tail_rate_of_series(times: &[f64], norms: &[f64], window: TailWindow) -> Result<TailFit> {
    let n0 = norms.first().copied().unwrap_or(0.0);
    if !(n0 > 0.0) {
        return Err(Error::TooFewRecords {
            need: MIN_TAIL_SAMPLES,
            got: 0,
        });
    }
    let (ts, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(norms)
        .filter(|&(_, &n)| n > 0.0)
        .map(|(&t, &n)| (t, -(n / n0).ln()))
        .filter(|&(_, y)| y >= window.lo && y <= window.hi)
        .unzip();
    if ts.len() < MIN_TAIL_SAMPLES {
        return Err(Error::TooFewRecords {
            need: MIN_TAIL_SAMPLES,
            got: ts.len(),
        });
    }
    let line = least_squares(&ts, &ys);
    Ok(TailFit {
        rate: line.slope,
        t_lo: ts[0],
        t_hi: ts[ts.len() - 1],
        n_points: ts.len(),
    })
}

struct Line {
    slope: f64,
    intercept: f64,
    residual_ss: f64,
    sxx: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_ss = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - intercept - slope * xi).powi(2))
        .sum();
    Line {
        slope,
        intercept,
        residual_ss,
        sxx,
    }
}

/// How grid size and step scale with `nu`.
///
/// `n_y = clamp(n_y_scale * ceil(nu^{-1/4}), n_y_min, n_y_max) * refine` and
/// `dt = min(cfl / (k_max max|b|), dt_fraction * nu^{-alpha}) / refine`,
/// unless a fixed `dt` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResolutionPolicy {
    pub n_y_min: usize,
    pub n_y_scale: usize,
    pub n_y_max: usize,
    pub cfl: f64,
    pub dt_fraction: f64,
    /// Fixed step replacing the rule above (still divided by `refine`).
    pub dt: Option<f64>,
    /// Grid refinement factor applied after the cap (the gate uses 2).
    pub refine: usize,
    pub m_max: u32,
    pub seed: u64,
    /// Runs stop at `t_max_factor * nu^{-alpha}` at the latest.
    pub t_max_factor: f64,
    /// Target number of samples per `nu^{-alpha}`.
    pub samples_per_timescale: usize,
    pub include_x_diffusion: bool,
}

impl Default for ResolutionPolicy {
    fn default() -> Self {
        Self {
            n_y_min: 256,
            n_y_scale: 32,
            n_y_max: 2048,
            cfl: 0.25,
            dt_fraction: 0.02 / 1000.0,
            dt: None,
            refine: 1,
            m_max: 4,
            seed: 0,
            t_max_factor: 200.0,
            samples_per_timescale: 200,
            include_x_diffusion: false,
        }
    }
}

impl ResolutionPolicy {
    pub fn n_y(&self, nu: f64) -> usize {
        let raw = self.n_y_scale * nu.powf(-0.25).ceil() as usize;
        raw.clamp(self.n_y_min, self.n_y_max) * self.refine.max(1)
    }

    pub fn dt(&self, profile: &ShearProfile, grid: &Grid, nu: f64) -> f64 {
        if let Some(dt) = self.dt {
            return dt / self.refine.max(1) as f64;
        }
        let bmax = profile.max_abs_over(grid.nodes());
        let advective = if bmax > 0.0 {
            self.cfl / (wavenumber(self.m_max) * bmax)
        } else {
            f64::INFINITY
        };
        let alpha = profile.predicted_exponent();
        advective.min(self.dt_fraction * nu.powf(-alpha)) / self.refine.max(1) as f64
    }

    pub fn refined(&self) -> Self {
        Self {
            refine: self.refine.max(1) * 2,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Ok,
    /// The e-fold threshold or the end of the tail window was not reached.
    Incomplete,
    /// Non-positive tail rate.
    Anomalous,
    /// The run itself errored.
    Failed,
}

impl RecordStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Ok => "ok",
            RecordStatus::Incomplete => "incomplete",
            RecordStatus::Anomalous => "anomalous",
            RecordStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for RecordStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One point of a sweep. Unmeasured quantities are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub profile: String,
    pub bc: BoundaryCondition,
    pub nu: f64,
    pub n_y: usize,
    pub m_max: u32,
    pub dt: f64,
    pub tau_efold: f64,
    pub tail_rate: f64,
    pub fit_t_lo: f64,
    pub fit_t_hi: f64,
    pub status: RecordStatus,
}

impl SweepRecord {
    pub const CSV_HEADER: &'static str =
        "profile,bc,nu,n_y,m_max,dt,tau_efold,tail_rate,fit_t_lo,fit_t_hi,status";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:e},{},{},{:e},{:e},{:e},{:e},{:e},{}",
            self.profile,
            self.bc,
            self.nu,
            self.n_y,
            self.m_max,
            self.dt,
            self.tau_efold,
            self.tail_rate,
            self.fit_t_lo,
            self.fit_t_hi,
            self.status
        )
    }

    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }

    pub fn timescale(&self, which: Timescale) -> f64 {
        match which {
            Timescale::Efold => self.tau_efold,
            Timescale::TailRate => 1.0 / self.tail_rate,
        }
    }
}

/// Which timescale a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timescale {
    /// First crossing of `e^{-1}`.
    Efold,
    /// Inverse of the fitted tail rate.
    #[default]
    TailRate,
}

impl Timescale {
    pub fn as_str(self) -> &'static str {
        match self {
            Timescale::Efold => "efold",
            Timescale::TailRate => "tail_rate",
        }
    }
}

impl std::str::FromStr for Timescale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "efold" => Ok(Timescale::Efold),
            "tail_rate" | "tail" => Ok(Timescale::TailRate),
            other => Err(Error::InvalidParameter(format!(
                "unknown timescale '{other}' (expected efold or tail_rate)"
            ))),
        }
    }
}

/// Sweep settings shared by all points.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub policy: ResolutionPolicy,
    pub window: TailWindow,
    pub scheme: YScheme,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            policy: ResolutionPolicy::default(),
            window: TailWindow::default(),
            scheme: YScheme::FiniteDifference,
        }
    }
}

/// Evolve the sweep datum at one `nu` until the tail window is passed.
pub fn run_point(
    profile: &ShearProfile,
    bc: BoundaryCondition,
    nu: f64,
    settings: &SweepSettings,
) -> Result<(Trajectory, SweepRecord)> {
    let policy = &settings.policy;
    let n_y = policy.n_y(nu);
    let grid = Grid::new(bc, n_y)?;
    let dt = policy.dt(profile, &grid, nu);
    let op = DiffusionOperator::build(grid.clone())?;
    let field = default_initial_data(&op, policy.m_max, policy.seed)?;
    let timescale = nu.powf(-profile.predicted_exponent());
    let t_end = policy.t_max_factor * timescale;
    let sample_dt = timescale / policy.samples_per_timescale.max(1) as f64;
    let mut opts = EvolveOptions::new(t_end, dt);
    opts.sample_every = ((sample_dt / dt).round() as usize).max(1);
    opts.include_x_diffusion = policy.include_x_diffusion;
    opts.scheme = settings.scheme;
    opts.stop_below = Some((-(settings.window.hi + 0.25)).exp());
    opts.enforce_dt_max = false;
    let traj = evolve(&field, profile, nu, &opts)?;
    let mut record = SweepRecord {
        profile: profile.name(),
        bc,
        nu,
        n_y,
        m_max: policy.m_max,
        dt: traj.dt,
        tau_efold: f64::NAN,
        tail_rate: f64::NAN,
        fit_t_lo: f64::NAN,
        fit_t_hi: f64::NAN,
        status: RecordStatus::Incomplete,
    };
    if let Some(tau) = measure_efold(&traj).time() {
        record.tau_efold = tau;
    }
    if let Ok(fit) = measure_tail_rate(&traj, settings.window) {
        record.tail_rate = fit.rate;
        record.fit_t_lo = fit.t_lo;
        record.fit_t_hi = fit.t_hi;
        let reached_end = traj.relative_norms().last().is_some_and(|r| *r <= (-settings.window.hi).exp());
        record.status = if fit.rate <= 0.0 {
            RecordStatus::Anomalous
        } else if record.tau_efold.is_finite() && reached_end {
            RecordStatus::Ok
        } else {
            RecordStatus::Incomplete
        };
    }
    Ok((traj, record))
}

/// Evolve the policy's datum over `(0, t_end)` with exactly `n_samples`
/// sample intervals, optionally keeping a snapshot at every sample.
pub fn run_trajectory(
    profile: &ShearProfile,
    bc: BoundaryCondition,
    nu: f64,
    t_end: f64,
    n_samples: usize,
    record_snapshots: bool,
    policy: &ResolutionPolicy,
) -> Result<Trajectory> {
    if n_samples == 0 || !(t_end > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need t_end > 0 and at least one sample, got t_end = {t_end}, n_samples = {n_samples}"
        )));
    }
    let grid = Grid::new(bc, policy.n_y(nu))?;
    let dt = policy.dt(profile, &grid, nu);
    let op = DiffusionOperator::build(grid)?;
    let field = default_initial_data(&op, policy.m_max, policy.seed)?;
    let per_sample = ((t_end / n_samples as f64) / dt - 1e-9).ceil().max(1.0) as usize;
    let mut opts = EvolveOptions::new(t_end, t_end / (n_samples * per_sample) as f64);
    opts.sample_every = per_sample;
    opts.snapshot_every = record_snapshots.then_some(1);
    opts.include_x_diffusion = policy.include_x_diffusion;
    evolve(&field, profile, nu, &opts)
}

/// One record per `nu`, sorted by `nu`. Failed points are recorded, not fatal.
pub fn run_sweep(
    profile: &ShearProfile,
    bc: BoundaryCondition,
    nus: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<SweepRecord>> {
    if nus.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewRecords {
            need: MIN_FIT_POINTS,
            got: nus.len(),
        });
    }
    if let Some(bad) = nus.iter().find(|&&nu| !(nu > 0.0)) {
        return Err(Error::InvalidParameter(format!("nu = {bad} must be positive")));
    }
    let mut records: Vec<SweepRecord> = nus
        .par_iter()
        .map(|&nu| match run_point(profile, bc, nu, settings) {
            Ok((_, record)) => record,
            Err(_) => SweepRecord {
                profile: profile.name(),
                bc,
                nu,
                n_y: settings.policy.n_y(nu),
                m_max: settings.policy.m_max,
                dt: f64::NAN,
                tau_efold: f64::NAN,
                tail_rate: f64::NAN,
                fit_t_lo: f64::NAN,
                fit_t_hi: f64::NAN,
                status: RecordStatus::Failed,
            },
        })
        .collect();
    records.sort_by(|a, b| a.nu.partial_cmp(&b.nu).unwrap_or(Ordering::Equal));
    Ok(records)
}

/// `count` log-spaced values from `hi` down to `lo`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Power-law fit `tau ~ C nu^{-alpha}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    /// `(-log nu, log tau)`
    pub points: Vec<(f64, f64)>,
    pub alpha_hat: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    /// 95% confidence half-width of the slope.
    pub ci_halfwidth: f64,
    pub timescale: Timescale,
}

impl ExponentFit {
    pub fn n_points(&self) -> usize {
        self.points.len()
    }
}

/// Ordinary least squares of `log tau` against `-log nu` over the ok records.
pub fn fit_exponent(records: &[SweepRecord], timescale: Timescale) -> Result<ExponentFit> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.is_ok())
        .map(|r| (-r.nu.ln(), r.timescale(timescale)))
        .filter(|(_, tau)| tau.is_finite() && *tau > 0.0)
        .map(|(x, tau)| (x, tau.ln()))
        .collect();
    fit_points(points, timescale)
}

pub fn fit_points(points: Vec<(f64, f64)>, timescale: Timescale) -> Result<ExponentFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewRecords {
            need: MIN_FIT_POINTS,
            got: points.len(),
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let line = least_squares(&x, &y);
    let dof = (points.len() - 2) as f64;
    let se = (line.residual_ss / dof / line.sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(ExponentFit {
        alpha_hat: line.slope,
        intercept: line.intercept,
        residual: (line.residual_ss / points.len() as f64).sqrt(),
        ci_halfwidth: t * se,
        points,
        timescale,
    })
}

/// Whether the ok records' timescale strictly decreases as `nu` increases.
pub fn is_monotone(records: &[SweepRecord], timescale: Timescale) -> bool {
    let mut points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.is_ok())
        .map(|r| (r.nu, r.timescale(timescale)))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    // larger nu must decay faster
    points.windows(2).all(|w| w[1].1 < w[0].1)
}

/// Relative change of both timescales when the grid is refined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub nu: f64,
    pub base: SweepRecord,
    pub refined: SweepRecord,
    pub efold_change: f64,
    pub tail_change: f64,
    pub pass: bool,
}

/// Rerun one point with `n_y` doubled and `dt` halved.
pub fn grid_independence_gate(
    profile: &ShearProfile,
    bc: BoundaryCondition,
    nu: f64,
    settings: &SweepSettings,
) -> Result<GateReport> {
    let (_, base) = run_point(profile, bc, nu, settings)?;
    let finer = SweepSettings {
        policy: settings.policy.refined(),
        ..settings.clone()
    };
    let (_, refined) = run_point(profile, bc, nu, &finer)?;
    let change = |a: f64, b: f64| ((b - a) / a).abs();
    let efold_change = change(base.tau_efold, refined.tau_efold);
    let tail_change = change(base.tail_rate, refined.tail_rate);
    let pass = base.is_ok()
        && refined.is_ok()
        && efold_change < GATE_TOLERANCE
        && tail_change < GATE_TOLERANCE;
    Ok(GateReport {
        nu,
        base,
        refined,
        efold_change,
        tail_change,
        pass,
    })
}

/// Plateau contrast of the Couette decay around `t* = nu^{-1/3}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverReport {
    pub nu: f64,
    pub t_star: f64,
    /// `||f|| / ||f_in||` at `0.1 t*`.
    pub early: f64,
    /// `||f|| / ||f_in||` at `3 t*`.
    pub late: f64,
    /// The same ratios without shear.
    pub heat_early: f64,
    pub heat_late: f64,
    pub pass: bool,
}

/// Box half-width for the crossover runs.
pub const CROSSOVER_BOX: f64 = 8.0;

/// Couette run for the single x-mode `m = 1` on the periodic box
/// `(-8, 8)` with compact seed-0 data, using the spectral y-scheme with a grid
/// fine enough to hold the sheared spectrum up to `3 t*`.
pub fn crossover_check(nu: f64) -> Result<CrossoverReport> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu = {nu} must be positive")));
    }
    let t_star = nu.powf(-1.0 / 3.0);
    let t_end = 3.0 * t_star;
    let k = wavenumber(1);
    let length = 2.0 * CROSSOVER_BOX;
    let needed = length * (1.25 * k * t_end + 40.0) / PI;
    let n_y = (needed.ceil() as usize).next_power_of_two().max(1024);
    let grid = Grid::on_interval(BoundaryCondition::Periodic, n_y, -CROSSOVER_BOX, CROSSOVER_BOX)?;
    let field = ModeField::new(grid.clone(), vec![1], vec![compact_bump_data(&grid, 0)])?;
    let dt = 0.25 / (k * CROSSOVER_BOX);
    let n_steps = (t_end / dt).ceil();
    // sample exactly at 0.1 t* and 3 t*: 30 chunks of 0.1 t*
    let per_chunk = (n_steps / 30.0).ceil() as usize;
    let mut opts = EvolveOptions::new(t_end, t_end / (30 * per_chunk) as f64);
    opts.sample_every = per_chunk;
    opts.scheme = YScheme::Spectral;
    let sheared = evolve(&field, &ShearProfile::builtin("couette")?, nu, &opts)?;
    let still = evolve(&field, &ShearProfile::still(), nu, &opts)?;
    let pick = |traj: &Trajectory| {
        let r = traj.relative_norms();
        (r[1], r[30])
    };
    let (early, late) = pick(&sheared);
    let (heat_early, heat_late) = pick(&still);
    Ok(CrossoverReport {
        nu,
        t_star,
        early,
        late,
        heat_early,
        heat_late,
        pass: early >= 0.9 && late <= 0.05,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::heat_rate;

    fn series(rate: f64, n: usize, dt: f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let y = t.iter().map(|&t| (-rate * t).exp()).collect();
        (t, y)
    }

    #[test]
    fn efold_of_exact_exponential() {
        let (t, y) = series(0.5, 100, 0.1);
        match efold_of_series(&t, &y) {
            Efold::Reached(tau) => assert!((tau - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let (t, y) = series(0.01, 100, 0.1);
        assert_eq!(efold_of_series(&t, &y), Efold::Incomplete { t_end: 9.9 });
        assert!(matches!(efold_of_series(&t, &vec![0.0; 100]), Efold::Incomplete { .. }));
    }

    #[test]
    fn tail_of_exact_exponential() {
        let (t, y) = series(0.37, 400, 0.05);
        let fit = tail_rate_of_series(&t, &y, TailWindow::default()).unwrap();
        assert!((fit.rate - 0.37).abs() < 1e-10);
        assert!(fit.t_lo >= 1.0 / 0.37 - 0.05 && fit.t_hi <= 4.0 / 0.37);
        let (t, y) = series(0.37, 5, 3.0);
        assert!(matches!(
            tail_rate_of_series(&t, &y, TailWindow::default()),
            Err(Error::TooFewRecords { .. })
        ));
    }

    #[test]
    fn exact_power_law_fit() {
        let nus = log_spaced(1e-6, 1e-3, 8);
        let records: Vec<SweepRecord> = nus
            .iter()
            .map(|&nu| SweepRecord {
                profile: "couette".into(),
                bc: BoundaryCondition::Dirichlet,
                nu,
                n_y: 256,
                m_max: 4,
                dt: 0.01,
                tau_efold: 10.0 * nu.powf(-1.0 / 3.0),
                tail_rate: 0.1 * nu.powf(0.5),
                fit_t_lo: 1.0,
                fit_t_hi: 2.0,
                status: RecordStatus::Ok,
            })
            .collect();
        let fit = fit_exponent(&records, Timescale::Efold).unwrap();
        assert!((fit.alpha_hat - 1.0 / 3.0).abs() < 1e-12);
        assert!(fit.ci_halfwidth < 1e-9);
        assert!((fit.intercept - 10f64.ln()).abs() < 1e-9);
        let fit = fit_exponent(&records, Timescale::TailRate).unwrap();
        assert!((fit.alpha_hat - 0.5).abs() < 1e-12);
        assert!(is_monotone(&records, Timescale::Efold));
        assert!(fit_exponent(&records[..3], Timescale::Efold).is_err());
    }

    #[test]
    fn log_spacing() {
        let v = log_spaced(1e-6, 1e-3, 8);
        assert_eq!(v.len(), 8);
        assert!((v[0] - 1e-3).abs() < 1e-18 && (v[7] - 1e-6).abs() < 1e-20);
        let ratio = v[0] / v[1];
        assert!(v.windows(2).all(|w| (w[0] / w[1] - ratio).abs() < 1e-9));
    }

    #[test]
    fn empty_sweep_rejected() {
        let p = ShearProfile::builtin("couette").unwrap();
        assert!(run_sweep(&p, BoundaryCondition::Dirichlet, &[], &SweepSettings::default()).is_err());
    }

    #[test]
    fn policy_values() {
        let p = ResolutionPolicy::default();
        assert_eq!(p.n_y(1e-3), 256);
        assert_eq!(p.n_y(1e-6), 1024);
        assert_eq!(p.n_y(1e-12), 2048);
        assert_eq!(p.refined().n_y(1e-12), 4096);
    }

    #[test]
    fn heat_efold_and_tail() {
        let nu = 1e-2;
        let grid = Grid::new(BoundaryCondition::Dirichlet, 255).unwrap();
        let amp = grid
            .nodes()
            .iter()
            .map(|&y| num_complex::Complex64::new((PI * y).sin(), 0.0))
            .collect();
        let field = ModeField::new(grid, vec![1], vec![amp]).unwrap();
        let mut opts = EvolveOptions::new(50.0, 0.05);
        opts.sample_every = 2;
        let traj = evolve(&field, &ShearProfile::still(), nu, &opts).unwrap();
        let tau = measure_efold(&traj).time().unwrap();
        assert!((tau - 1.0 / (nu * PI * PI)).abs() < 0.02 * tau);
        let rate = measure_tail_rate(&traj, TailWindow::default()).unwrap().rate;
        let exact = heat_rate(BoundaryCondition::Dirichlet, nu).unwrap();
        assert!((rate - exact).abs() < 0.02 * exact);
    }
}
