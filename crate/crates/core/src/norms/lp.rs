use serde::Serialize;

use super::spacetime::SpaceTimeField;
use crate::error::{Error, Result};

/// Dyadic block `j` holding mode `m`: `2^j <= m < 2^{j+1}`.
pub fn block_index(m: u32) -> u32 {
    debug_assert!(m > 0);
    31 - m.leading_zeros()
}

/// Squared block norms `||Delta_j u||^2`, indexed by `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpDecomposition {
    energies: Vec<f64>,
}

impl LpDecomposition {
    /// From squared norms per x-mode.
    pub fn from_mode_energies(energies: &[(u32, f64)]) -> Self {
        let blocks = energies.iter().map(|&(m, _)| block_index(m) as usize + 1).max().unwrap_or(0);
        let mut out = vec![0.0; blocks];
        for &(m, e) in energies {
            out[block_index(m) as usize] += e;
        }
        Self { energies: out }
    }

    pub fn of(u: &SpaceTimeField) -> Self {
        Self::from_mode_energies(&u.mode_energies())
    }

    pub fn block_energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn block_norms(&self) -> Vec<f64> {
        self.energies.iter().map(|e| e.sqrt()).collect()
    }

    pub fn total_norm(&self) -> f64 {
        self.energies.iter().sum::<f64>().sqrt()
    }

    /// `sup_j 2^{js} ||Delta_j u||`; zero when no mode is stored.
    pub fn q_norm(&self, s: f64) -> Result<f64> {
        check_order(s)?;
        Ok(self
            .energies
            .iter()
            .enumerate()
            .map(|(j, e)| 2f64.powf(j as f64 * s) * e.sqrt())
            .fold(0.0, f64::max))
    }
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("order s = {s} must lie in (0, 1]")))
    }
}

/// `||u||_{Q^s_{d_x}}` through sharp dyadic blocks.
pub fn q_norm_x(u: &SpaceTimeField, s: f64) -> Result<f64> {
    LpDecomposition::of(u).q_norm(s)
}

/// `(1 - 2^{-2s})^{-1/2}`, the sharp-block constant in `||u|| <= C ||u||_{Q^s}`.
pub fn poincare_constant(s: f64) -> f64 {
    (1.0 - 2f64.powf(-2.0 * s)).powf(-0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareReport {
    pub s: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `||u|| / ||u||_{Q^s_{d_x}}` against `(1 - 2^{-2s})^{-1/2}`. The x-mean is
/// zero by construction, so `u - <u> = u`.
pub fn fractional_poincare_check(u: &SpaceTimeField, s: f64, s_prime: f64) -> Result<PoincareReport> {
    if !(0.0 < s_prime && s_prime < s && s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < s' < s < 1, got s = {s}, s' = {s_prime}"
        )));
    }
    let lp = LpDecomposition::of(u);
    let q = lp.q_norm(s)?;
    let bound = poincare_constant(s);
    let ratio = if q > 0.0 { lp.total_norm() / q } else { 0.0 };
    Ok(PoincareReport {
        s,
        ratio,
        bound,
        pass: ratio <= bound + 1e-9,
    })
}

/// `||u||_{Q^s} / (||u||_{Q^{s1}}^theta ||u||_{Q^{s2}}^{1 - theta})` with
/// `s = theta s1 + (1 - theta) s2`.
pub fn log_convexity_ratio(lp: &LpDecomposition, s1: f64, s2: f64, theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta = {theta} must lie in [0, 1]")));
    }
    let s = theta * s1 + (1.0 - theta) * s2;
    let q = lp.q_norm(s)?;
    let denom = lp.q_norm(s1)?.powf(theta) * lp.q_norm(s2)?.powf(1.0 - theta);
    if denom == 0.0 {
        return Err(Error::VanishingRhs);
    }
    Ok(q / denom)
}
