//! TOML run manifests. Every key has a default; command-line flags win over
//! the file. The resolved manifest is written next to every output.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use shear_decay::harness::{ResolutionPolicy, Timescale};
use shear_decay::{BoundaryCondition, ShearProfile};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub resolution: ResolutionPolicy,
    pub run: RunSection,
    pub sweep: SweepSection,
    pub oracle: OracleSection,
    pub inequalities: InequalitySection,
    pub gevrey: GevreySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub profile: String,
    pub bc: BoundaryCondition,
    pub nu: f64,
    /// Explicit end time; otherwise `window_multiplier * nu^{-alpha}`.
    pub t_end: Option<f64>,
    pub window_multiplier: f64,
    pub samples: usize,
    pub record_snapshots: bool,
    /// Tail-fit window in e-folds.
    pub tail_window: [f64; 2],
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            profile: "couette".into(),
            bc: BoundaryCondition::Dirichlet,
            nu: 1e-3,
            t_end: None,
            window_multiplier: 5.0,
            samples: 500,
            record_snapshots: false,
            tail_window: [1.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub profile: String,
    pub bc: BoundaryCondition,
    pub nu_min: f64,
    /// Upper end of the sweep; larger values mix in the purely diffusive regime.
    pub nu_max: f64,
    pub count: usize,
    /// Explicit list; overrides `nu_min`, `nu_max` and `count`.
    pub nu_list: Option<Vec<f64>>,
    pub tail_window: [f64; 2],
    pub timescale: Timescale,
    /// Rerun the smallest `nu` on the refined grid and require < 1% change.
    pub gate: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            profile: "couette".into(),
            bc: BoundaryCondition::Dirichlet,
            nu_min: 1e-6,
            nu_max: 1e-3,
            count: 8,
            nu_list: None,
            tail_window: [8.0, 12.0],
            timescale: Timescale::TailRate,
            gate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    /// Couette comparison on the periodic box `(-half_width, half_width)`.
    pub nu: f64,
    pub n_y: usize,
    pub half_width: f64,
    /// Defaults to `nu^{-1/3}`.
    pub t: Option<f64>,
    pub dt: f64,
    pub scheme: Scheme,
    pub tolerance: f64,
    /// Crank-Nicolson order check against the dense exponential.
    pub cn_nu: f64,
    pub cn_n_y: usize,
    pub cn_t: f64,
    pub cn_dts: Vec<f64>,
    pub cn_ratio_range: [f64; 2],
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            nu: 1e-3,
            n_y: 1024,
            half_width: 8.0,
            t: None,
            dt: 2e-3,
            scheme: Scheme::Spectral,
            tolerance: 1e-3,
            cn_nu: 1e-2,
            cn_n_y: 64,
            cn_t: 1.0,
            cn_dts: vec![0.1, 0.05, 0.025, 0.0125],
            cn_ratio_range: [3.5, 4.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Spectral,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Dilated and rescaled bump fields, plus one x-independent member.
    Standard,
    /// Only fields without x-dependence.
    XIndependent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InequalitySection {
    pub family: FamilyKind,
    pub calibration_seed: u64,
    pub test_seed: u64,
    /// Fixed constant instead of twice the calibration maximum.
    pub c_cal: Option<f64>,
    pub poincare_s: f64,
    pub poincare_s_prime: f64,
}

impl Default for InequalitySection {
    fn default() -> Self {
        Self {
            family: FamilyKind::Standard,
            calibration_seed: 0,
            test_seed: 1,
            c_cal: None,
            poincare_s: 1.0 / 3.0,
            poincare_s_prime: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GevreySection {
    pub profile: String,
    pub bc: BoundaryCondition,
    pub nu: f64,
    pub p: f64,
    /// Bisected for the largest admissible value when absent.
    pub d0: Option<f64>,
    pub bound: f64,
    /// Monitor over `(0, t_factor * nu^{-alpha}]`.
    pub t_factor: f64,
    pub samples: usize,
}

impl Default for GevreySection {
    fn default() -> Self {
        Self {
            profile: "couette".into(),
            bc: BoundaryCondition::Dirichlet,
            nu: 1e-4,
            p: 1.6,
            d0: None,
            bound: 10.0,
            t_factor: 5.0,
            samples: 1000,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.resolution;
        ensure!(r.n_y_min >= 8 && r.n_y_max >= r.n_y_min, "need 8 <= n_y_min <= n_y_max");
        ensure!(r.n_y_scale > 0 && r.refine > 0 && r.m_max > 0, "n_y_scale, refine and m_max must be positive");
        positive("resolution.cfl", r.cfl)?;
        positive("resolution.dt_fraction", r.dt_fraction)?;
        positive("resolution.t_max_factor", r.t_max_factor)?;
        if let Some(dt) = r.dt {
            positive("resolution.dt", dt)?;
        }
        ensure!(r.samples_per_timescale > 0, "resolution.samples_per_timescale must be positive");

        let run = &self.run;
        profile(&run.profile, run.bc)?;
        positive("run.nu", run.nu)?;
        if let Some(t) = run.t_end {
            positive("run.t_end", t)?;
        }
        positive("run.window_multiplier", run.window_multiplier)?;
        ensure!(run.samples > 0, "run.samples must be positive");
        window("run.tail_window", run.tail_window)?;

        let sweep = &self.sweep;
        profile(&sweep.profile, sweep.bc)?;
        for nu in self.sweep_nus() {
            positive("sweep nu", nu)?;
        }
        if sweep.nu_list.is_none() {
            ensure!(sweep.nu_min < sweep.nu_max, "sweep.nu_min must be below sweep.nu_max");
        }
        ensure!(self.sweep_nus().len() >= 4, "a sweep needs at least 4 viscosities");
        window("sweep.tail_window", sweep.tail_window)?;

        let o = &self.oracle;
        positive("oracle.nu", o.nu)?;
        positive("oracle.half_width", o.half_width)?;
        positive("oracle.dt", o.dt)?;
        positive("oracle.tolerance", o.tolerance)?;
        ensure!(o.n_y >= 8, "oracle.n_y must be at least 8");
        if let Some(t) = o.t {
            ensure!(t >= 0.0 && t.is_finite(), "oracle.t must be non-negative");
        }
        positive("oracle.cn_nu", o.cn_nu)?;
        positive("oracle.cn_t", o.cn_t)?;
        ensure!(o.cn_dts.len() >= 2, "oracle.cn_dts needs at least two step sizes");
        for &dt in &o.cn_dts {
            positive("oracle.cn_dts", dt)?;
        }

        let q = &self.inequalities;
        if let Some(c) = q.c_cal {
            ensure!(c >= 0.0 && c.is_finite(), "inequalities.c_cal must be non-negative");
        }
        ensure!(
            0.0 < q.poincare_s_prime && q.poincare_s_prime < q.poincare_s && q.poincare_s < 1.0,
            "need 0 < poincare_s_prime < poincare_s < 1"
        );

        let g = &self.gevrey;
        profile(&g.profile, g.bc)?;
        positive("gevrey.nu", g.nu)?;
        positive("gevrey.p", g.p)?;
        positive("gevrey.bound", g.bound)?;
        positive("gevrey.t_factor", g.t_factor)?;
        ensure!(g.samples > 0, "gevrey.samples must be positive");
        if let Some(d0) = g.d0 {
            ensure!(d0 >= 0.0 && d0.is_finite(), "gevrey.d0 must be non-negative");
        }
        Ok(())
    }

    pub fn sweep_nus(&self) -> Vec<f64> {
        match &self.sweep.nu_list {
            Some(list) => list.clone(),
            None => shear_decay::harness::log_spaced(self.sweep.nu_min, self.sweep.nu_max, self.sweep.count),
        }
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    ensure!(value > 0.0 && value.is_finite(), "{name} must be positive and finite, got {value}");
    Ok(())
}

fn window(name: &str, w: [f64; 2]) -> Result<()> {
    ensure!(0.0 <= w[0] && w[0] < w[1], "{name} must satisfy 0 <= lo < hi, got {w:?}");
    Ok(())
}

/// Parse a profile name and check it fits the boundary condition.
pub fn profile(name: &str, bc: BoundaryCondition) -> Result<ShearProfile> {
    let p: ShearProfile = name.parse()?;
    if bc == BoundaryCondition::Periodic && !p.y_periodic_compatible() {
        bail!("profile '{name}' is not periodic in y and cannot be used with periodic boundaries");
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = Config::default();
        let back: Config = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<Config>("[run]\nviscosity = 1e-3\n").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let mut c = Config::default();
        c.run.nu = -1.0;
        assert!(c.validate().is_err());
        let mut c = Config::default();
        c.run.profile = "wiggly".into();
        assert!(c.validate().is_err());
        let mut c = Config::default();
        c.sweep.nu_list = Some(vec![1e-3, 1e-4]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn couette_not_periodic() {
        assert!(profile("couette", BoundaryCondition::Periodic).is_err());
        assert!(profile("kolmogorov", BoundaryCondition::Periodic).is_ok());
    }
}
