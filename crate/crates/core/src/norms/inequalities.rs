//! Calibration-based checks of the quotient-norm inequalities.
//!
//! The inequalities hold up to unspecified constants, so the testable claim
//! is uniform boundedness: the constant `C_cal` is twice the largest ratio
//! seen on a frozen calibration family, and independent families must stay
//! below it while their individual norms range over several decades.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::lp::LpDecomposition;
use super::quotient::{default_sigmas, q_norm_finite_difference, touches_boundary, yx_hminus1_norm, Direction};
use super::spacetime::SpaceTimeField;
use crate::discretize::{BoundaryCondition, DiffusionOperator, Grid};
use crate::error::{Error, Result};
use crate::oracle::bump;
use crate::profiles::ShearProfile;
use crate::solver::ModeField;

/// Ratios within a family may differ by less than this factor.
pub const SPREAD_LIMIT: f64 = 10.0;

const BOX_HALF_WIDTH: f64 = 4.0;
const BOX_POINTS: usize = 1023;
const SIGMA_COUNT: usize = 400;

/// The norms entering the three sample inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldNorms {
    /// `||f||_{Q^{1/3}_{d_x}}`
    pub q_x: f64,
    /// `||f||_{Q^1_{d_y}}`
    pub q_y: f64,
    /// `||f||_{Q^{1/2}_{y d_x}}`
    pub q_yx: f64,
    /// `||f||_{L^2_x H^1_y}`
    pub h1y: f64,
    /// `||y d_x f||_{L^2_x H^{-1}_y}`
    pub yx_hm1: f64,
}

impl FieldNorms {
    pub fn of(u: &ModeField) -> Result<Self> {
        let sigmas = default_sigmas(1e-3, 4.0, SIGMA_COUNT);
        Ok(Self {
            q_x: q_norm_finite_difference(u, 1.0 / 3.0, Direction::X, &sigmas)?,
            q_y: q_norm_finite_difference(u, 1.0, Direction::Y, &sigmas)?,
            q_yx: q_norm_finite_difference(u, 0.5, Direction::YX, &sigmas)?,
            h1y: u.h1y_norm(1.0),
            yx_hm1: yx_hminus1_norm(u)?,
        })
    }

    fn all(&self) -> [f64; 5] {
        [self.q_x, self.q_y, self.q_yx, self.h1y, self.yx_hm1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// `||f||_{Q^{1/3}_{d_x}} <~ ||f||_{L^2_x H^1_y}^{2/3} ||y d_x f||_{L^2_x H^-1_y}^{1/3}`
    Subelliptic,
    /// `||f||_{Q^{1/3}_{d_x}} <~ ||f||_{Q^1_{d_y}}^{1/3} ||f||_{Q^{1/2}_{y d_x}}^{2/3}`
    Bracket,
    /// `||f||_{Q^{1/2}_{y d_x}} <~ ||f||_{L^2_x H^1_y}^{1/2} ||y d_x f||_{L^2_x H^-1_y}^{1/2}`
    Interpolation,
}

impl Inequality {
    pub const ALL: [Inequality; 3] = [Inequality::Subelliptic, Inequality::Bracket, Inequality::Interpolation];

    pub fn as_str(self) -> &'static str {
        match self {
            Inequality::Subelliptic => "subelliptic",
            Inequality::Bracket => "bracket",
            Inequality::Interpolation => "interpolation",
        }
    }

    pub fn sides(self, n: &FieldNorms) -> (f64, f64) {
        match self {
            Inequality::Subelliptic => (n.q_x, n.h1y.powf(2.0 / 3.0) * n.yx_hm1.powf(1.0 / 3.0)),
            Inequality::Bracket => (n.q_x, n.q_y.powf(1.0 / 3.0) * n.q_yx.powf(2.0 / 3.0)),
            Inequality::Interpolation => (n.q_yx, (n.h1y * n.yx_hm1).sqrt()),
        }
    }

    /// LHS / RHS; zero when the left side vanishes, `None` when only the right does.
    pub fn ratio(self, n: &FieldNorms) -> Option<f64> {
        let (lhs, rhs) = self.sides(n);
        if lhs == 0.0 {
            Some(0.0)
        } else if rhs > 0.0 {
            Some(lhs / rhs)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub label: String,
    pub field: ModeField,
}

/// Synthetic family on `T x (-4, 4)`: three random base fields on x-modes
/// 1..3 with y-even bump profiles, each stretched in x by `lambda = 2^0..2^10`
/// and dilated in y by `mu = 1/2, 1, 2`, plus one x-independent member.
///
/// Both rescalings leave all three inequalities invariant, while the norms
/// themselves change by several orders of magnitude.
pub fn calibration_family(seed: u64) -> Result<Vec<FamilyMember>> {
    const BASES: usize = 3;
    let grid = Grid::on_interval(BoundaryCondition::Dirichlet, BOX_POINTS, -BOX_HALF_WIDTH, BOX_HALF_WIDTH)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::new();
    for b in 0..BASES {
        let radius: f64 = rng.random_range(0.8..1.2);
        let coeffs: Vec<[Complex64; 3]> = (0..3)
            .map(|_| {
                let mut c = [Complex64::default(); 3];
                for z in &mut c {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    *z = Complex64::new(re, im);
                }
                c
            })
            .collect();
        for mu in [0.5, 1.0, 2.0] {
            let profiles: Vec<Vec<Complex64>> = coeffs
                .iter()
                .map(|c| {
                    grid.nodes()
                        .iter()
                        .map(|&y| {
                            let s = y / (radius * mu);
                            let s2 = s * s;
                            bump(s) * (c[0] + c[1] * s2 + c[2] * s2 * s2)
                        })
                        .collect()
                })
                .collect();
            for e in 0..=10u32 {
                let lambda = 1u32 << e;
                let modes = (1..=3).map(|m| m * lambda).collect();
                let field = ModeField::new(grid.clone(), modes, profiles.clone())?;
                members.push(FamilyMember {
                    label: format!("base{b}:lambda={lambda}:mu={mu}"),
                    field,
                });
            }
        }
    }
    members.push(FamilyMember {
        label: "x-independent".into(),
        field: ModeField::new(grid, vec![], vec![])?,
    });
    Ok(members)
}

/// Ratio statistics of one inequality over one family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioStats {
    pub family: String,
    pub inequality: Inequality,
    pub members: Vec<String>,
    pub ratios: Vec<f64>,
    pub max: f64,
    pub calibration_constant: f64,
    pub pass: bool,
    /// Largest over smallest nonzero ratio.
    pub ratio_spread: f64,
    /// Largest over smallest nonzero value of any single norm across the family.
    pub norm_span: f64,
    /// Members left out, with the reason.
    pub skipped: Vec<String>,
}

impl RatioStats {
    /// `calibration = None` calibrates on this family: `C_cal = 2 max`.
    pub fn from_norms(
        inequality: Inequality,
        family: &str,
        labels: &[String],
        norms: &[Result<FieldNorms>],
        calibration: Option<f64>,
    ) -> Result<Self> {
        let mut members = Vec::new();
        let mut ratios = Vec::new();
        let mut skipped = Vec::new();
        let mut span_lo = [f64::INFINITY; 5];
        let mut span_hi = [0.0f64; 5];
        for (label, n) in labels.iter().zip(norms) {
            match n {
                Ok(n) => match inequality.ratio(n) {
                    Some(r) => {
                        members.push(label.clone());
                        ratios.push(r);
                        for (i, v) in n.all().into_iter().enumerate() {
                            if v > 0.0 {
                                span_lo[i] = span_lo[i].min(v);
                                span_hi[i] = span_hi[i].max(v);
                            }
                        }
                    }
                    None => skipped.push(format!("{label}: {}", Error::VanishingRhs)),
                },
                Err(e) => skipped.push(format!("{label}: {e}")),
            }
        }
        if ratios.is_empty() {
            return Err(Error::VanishingRhs);
        }
        let max = ratios.iter().copied().fold(0.0, f64::max);
        let min_pos = ratios.iter().copied().filter(|&r| r > 0.0).fold(f64::INFINITY, f64::min);
        let ratio_spread = if min_pos.is_finite() { max / min_pos } else { 1.0 };
        let norm_span = span_lo
            .iter()
            .zip(&span_hi)
            .filter(|(lo, _)| lo.is_finite())
            .map(|(lo, hi)| hi / lo)
            .fold(1.0, f64::max);
        let calibration_constant = calibration.unwrap_or(2.0 * max);
        Ok(Self {
            family: family.to_string(),
            inequality,
            members,
            ratios,
            max,
            calibration_constant,
            pass: max <= calibration_constant && ratio_spread < SPREAD_LIMIT,
            ratio_spread,
            norm_span,
            skipped,
        })
    }
}

/// Norms of every family member, computed in parallel.
pub fn family_norms(family: &[FamilyMember]) -> Vec<Result<FieldNorms>> {
    family
        .par_iter()
        .map(|m| {
            if touches_boundary(&m.field, 4, 1e-10) {
                return Err(Error::InvalidParameter("support reaches the box boundary".into()));
            }
            FieldNorms::of(&m.field)
        })
        .collect()
}

pub fn verify(
    inequality: Inequality,
    family_name: &str,
    family: &[FamilyMember],
    calibration: Option<f64>,
) -> Result<RatioStats> {
    let labels: Vec<String> = family.iter().map(|m| m.label.clone()).collect();
    RatioStats::from_norms(inequality, family_name, &labels, &family_norms(family), calibration)
}

pub fn verify_sample_subelliptic(name: &str, family: &[FamilyMember], calibration: Option<f64>) -> Result<RatioStats> {
    verify(Inequality::Subelliptic, name, family, calibration)
}

pub fn verify_bracket_inequality(name: &str, family: &[FamilyMember], calibration: Option<f64>) -> Result<RatioStats> {
    verify(Inequality::Bracket, name, family, calibration)
}

pub fn verify_interpolation_inequality(name: &str, family: &[FamilyMember], calibration: Option<f64>) -> Result<RatioStats> {
    verify(Inequality::Interpolation, name, family, calibration)
}

/// Both sides of the time-dependent subelliptic estimate on one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropReport {
    pub nu: f64,
    pub window: f64,
    /// `nu^alpha (||f||^2 + ||f||^2_{Q^{1/(N+3)}_{d_x}})`
    pub lhs: f64,
    /// `nu ||f||^2_{L^2 H^1} + nu^{-1} ||X_0 f||^2_{L^2 H^-1}`
    pub rhs: f64,
    pub ratio: f64,
}

/// Evaluate the subelliptic estimate on a solver window. `X_0 f` is taken as
/// `nu D f_m` for each mode, which is what the equation says it equals.
pub fn verify_prop_subelliptic(u: &SpaceTimeField, profile: &ShearProfile, nu: f64) -> Result<PropReport> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu = {nu} must be positive")));
    }
    let n = profile.flatness();
    let alpha = profile.predicted_exponent();
    let s = 1.0 / f64::from(n + 3);
    let lp = LpDecomposition::of(u);
    let l2_sq = lp.total_norm().powi(2);
    let q = lp.q_norm(s)?;
    let lhs = nu.powf(alpha) * (l2_sq + q * q);

    let op = DiffusionOperator::build(u.grid().clone())?;
    let gradient_sq = u.integrate(|f| f.amplitudes().iter().map(|a| 2.0 * f.grid().gradient_norm_sqr(a)).sum());
    let per_slice: Vec<f64> = u
        .slices()
        .par_iter()
        .map(|f| {
            f.amplitudes()
                .iter()
                .map(|a| {
                    let g: Vec<Complex64> = op.apply(a).into_iter().map(|z| z * nu).collect();
                    op.hminus1y_norm(&g, 1.0).map(|v| 2.0 * v * v)
                })
                .sum::<Result<f64>>()
        })
        .collect::<Result<_>>()?;
    let x0_sq: f64 = u.weights().iter().zip(&per_slice).map(|(w, v)| w * v).sum();
    let rhs = nu * gradient_sq + x0_sq / nu;
    if !(rhs > 0.0) {
        return Err(Error::VanishingRhs);
    }
    Ok(PropReport {
        nu,
        window: u.window(),
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}
