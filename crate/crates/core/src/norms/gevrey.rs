use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::predicted_exponent;
use crate::solver::{wavenumber, Trajectory};

/// Default bound on the amplification for a passing monitor.
pub const GEVREY_BOUND: f64 = 10.0;

/// Largest weight exponent evaluated before declaring overflow.
const MAX_EXPONENT: f64 = 700.0;

/// `A(t) = ||exp(d0 nu^alpha |d_x|^{1/p} t) f(t)|| / ||f_in||` on the sample grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GevreyCurve {
    pub nu: f64,
    pub flatness: u32,
    pub p: f64,
    pub d0: f64,
    /// `p > (N + 3) / 2`
    pub p_admissible: bool,
    pub times: Vec<f64>,
    pub amplification: Vec<f64>,
    pub sup: f64,
}

impl GevreyCurve {
    pub fn bounded_by(&self, bound: f64) -> bool {
        self.sup <= bound
    }
}

/// Evaluate the Gevrey amplification of a trajectory's per-mode norms, over
/// samples with `t <= t_max`.
pub fn gevrey_monitor(traj: &Trajectory, nu: f64, n: u32, p: f64, d0: f64, t_max: f64) -> Result<GevreyCurve> {
    if !(p > 0.0) || !(d0 >= 0.0) || !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need p > 0, d0 >= 0, nu > 0; got p = {p}, d0 = {d0}, nu = {nu}"
        )));
    }
    let alpha = predicted_exponent(i64::from(n))?;
    let n0 = traj.initial_norm();
    if !(n0 > 0.0) {
        return Err(Error::VanishingRhs);
    }
    let rate = d0 * nu.powf(alpha);
    let symbols: Vec<f64> = traj.modes.iter().map(|&m| wavenumber(m).powf(1.0 / p)).collect();
    let mut times = Vec::new();
    let mut amplification = Vec::new();
    for (&t, norms) in traj.sample_times.iter().zip(&traj.per_mode_norms) {
        if t > t_max * (1.0 + 1e-12) {
            break;
        }
        let mut sq = 0.0;
        for (sym, fm) in symbols.iter().zip(norms) {
            let exponent = 2.0 * rate * sym * t;
            if exponent > MAX_EXPONENT {
                return Err(Error::WeightOverflow { time: t });
            }
            sq += exponent.exp() * 2.0 * fm * fm;
        }
        times.push(t);
        amplification.push(sq.sqrt() / n0);
    }
    let sup = amplification.iter().copied().fold(0.0, f64::max);
    Ok(GevreyCurve {
        nu,
        flatness: n,
        p,
        d0,
        p_admissible: p > f64::from(n + 3) / 2.0,
        times,
        amplification,
        sup,
    })
}

/// Largest `d0` (to relative precision `1e-6`) with `sup A <= bound`.
pub fn gevrey_bisect(traj: &Trajectory, nu: f64, n: u32, p: f64, t_max: f64, bound: f64) -> Result<f64> {
    let ok = |d0: f64| match gevrey_monitor(traj, nu, n, p, d0, t_max) {
        Ok(curve) => Ok(curve.bounded_by(bound)),
        Err(Error::WeightOverflow { .. }) => Ok(false),
        Err(e) => Err(e),
    };
    if !ok(0.0)? {
        return Err(Error::InvalidParameter(format!(
            "amplification exceeds {bound} already at d0 = 0"
        )));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while ok(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(lo);
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(nu: f64) -> Trajectory {
        // Couette-like per-mode decay exp(-nu k^2 t^3 / 3)
        let modes = vec![1, 2];
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.5).collect();
        let per_mode: Vec<Vec<f64>> = times
            .iter()
            .map(|&t| {
                modes
                    .iter()
                    .map(|&m| 0.5 * (-nu * wavenumber(m).powi(2) * t.powi(3) / 3.0).exp())
                    .collect()
            })
            .collect();
        let l2 = per_mode.iter().map(|v| v.iter().map(|x| 2.0 * x * x).sum::<f64>().sqrt()).collect();
        Trajectory {
            modes,
            sample_times: times,
            l2_norms: l2,
            per_mode_norms: per_mode,
            ..Default::default()
        }
    }

    #[test]
    fn zero_d0_is_energy_ratio() {
        let traj = synthetic(1e-4);
        let c = gevrey_monitor(&traj, 1e-4, 0, 1.6, 0.0, 100.0).unwrap();
        for (a, r) in c.amplification.iter().zip(traj.relative_norms()) {
            assert!((a - r).abs() < 1e-14);
        }
        assert!(c.sup <= 1.0 + 1e-14);
        assert!(c.p_admissible);
    }

    #[test]
    fn closed_form_boundedness() {
        // sup_t of d0 nu^{1/3} k^{1/p} t - nu k^2 t^3 / 3 decides boundedness per mode
        let nu = 1e-4;
        let traj = synthetic(nu);
        let d0 = gevrey_bisect(&traj, nu, 0, 1.6, 100.0, GEVREY_BOUND).unwrap();
        assert!(d0 > 0.0);
        let inside = gevrey_monitor(&traj, nu, 0, 1.6, d0, 100.0).unwrap();
        assert!(inside.sup <= GEVREY_BOUND);
        let outside = gevrey_monitor(&traj, nu, 0, 1.6, 20.0 * d0, 100.0);
        assert!(outside.map(|c| c.sup > GEVREY_BOUND).unwrap_or(true));
    }

    #[test]
    fn overflow_flagged() {
        let traj = synthetic(1e-4);
        assert!(matches!(
            gevrey_monitor(&traj, 1e-4, 0, 1.6, 1e6, 100.0),
            Err(Error::WeightOverflow { .. })
        ));
    }
}
