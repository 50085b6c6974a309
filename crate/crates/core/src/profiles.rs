//! Shear profiles `b(y)` with closed-form derivatives and critical-point data.
//!
//! A profile's flatness `N` is the largest vanishing order of `b'` at its
//! critical points; it sets the predicted enhancement exponent
//! `(N + 1) / (N + 3)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const KNOWN_PROFILES: &str = "couette, poiseuille, kolmogorov, flat:N";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// `b(y) = y`
    Couette,
    /// `b(y) = y (1 - y)`
    Poiseuille,
    /// `b(y) = sin(2 pi y)`
    Kolmogorov,
    /// `b(y) = (y - 1/2)^(N+1) / (N+1)`, so that `b'(y) = (y - 1/2)^N`.
    Flat(u32),
    /// `b = 0`: no transport, pure diffusion in y. Used for heat calibration.
    Still,
}

/// An analytic shear profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearProfile {
    kind: ProfileKind,
    critical_points: Vec<f64>,
    orders: Vec<u32>,
}

impl ShearProfile {
    /// Look up a builtin profile by its config name (`flat:N` for the flat family).
    pub fn builtin(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownProfile {
            name: name.to_string(),
            known: KNOWN_PROFILES.to_string(),
        };
        let kind = match name.trim() {
            "couette" => ProfileKind::Couette,
            "poiseuille" => ProfileKind::Poiseuille,
            "kolmogorov" => ProfileKind::Kolmogorov,
            other => {
                let order = other
                    .strip_prefix("flat:")
                    .or_else(|| other.strip_prefix("flat(").and_then(|s| s.strip_suffix(')')))
                    .ok_or_else(unknown)?;
                let order: i64 = order.trim().parse().map_err(|_| unknown())?;
                if order < 0 {
                    return Err(Error::NegativeOrder(order));
                }
                ProfileKind::Flat(order as u32)
            }
        };
        Ok(Self::from_kind(kind))
    }

    pub fn from_kind(kind: ProfileKind) -> Self {
        let (critical_points, orders) = match kind {
            ProfileKind::Couette | ProfileKind::Still | ProfileKind::Flat(0) => (vec![], vec![]),
            ProfileKind::Poiseuille => (vec![0.5], vec![1]),
            ProfileKind::Kolmogorov => (vec![0.25, 0.75], vec![1, 1]),
            ProfileKind::Flat(n) => (vec![0.5], vec![n]),
        };
        Self {
            kind,
            critical_points,
            orders,
        }
    }

    /// The `b = 0` profile.
    pub fn still() -> Self {
        Self::from_kind(ProfileKind::Still)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn critical_points(&self) -> &[f64] {
        &self.critical_points
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// `N = max_i N_i`, or 0 without critical points.
    pub fn flatness(&self) -> u32 {
        self.orders.iter().copied().max().unwrap_or(0)
    }

    /// Whether `b` and its derivatives match at `y = 0` and `y = 1`.
    pub fn y_periodic_compatible(&self) -> bool {
        matches!(self.kind, ProfileKind::Kolmogorov | ProfileKind::Still)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.deriv(0, y)
    }

    /// `b^{(j)}(y)` in closed form; `j = 0` is the profile itself.
    pub fn deriv(&self, j: u32, y: f64) -> f64 {
        match self.kind {
            ProfileKind::Still => 0.0,
            ProfileKind::Couette => match j {
                0 => y,
                1 => 1.0,
                _ => 0.0,
            },
            ProfileKind::Poiseuille => match j {
                0 => y * (1.0 - y),
                1 => 1.0 - 2.0 * y,
                2 => -2.0,
                _ => 0.0,
            },
            ProfileKind::Kolmogorov => {
                let w = 2.0 * PI;
                w.powi(j as i32) * (w * y + f64::from(j) * PI / 2.0).sin()
            }
            ProfileKind::Flat(n) => {
                let p = n + 1;
                if j > p {
                    return 0.0;
                }
                // d^j/dy^j (y - 1/2)^p / p = p!/(p-j)! (y - 1/2)^(p-j) / p
                let falling: f64 = ((p - j + 1)..=p).map(f64::from).product();
                falling * (y - 0.5).powi((p - j) as i32) / f64::from(p)
            }
        }
    }

    /// Smallest `k >= 0` with `|b^{(k+1)}(y0)| > tol`, searched up to `b^{(N+2)}`.
    pub fn numeric_vanishing_order(&self, y0: f64, tol: f64) -> Result<u32> {
        if !(y0 > 0.0 && y0 < 1.0) {
            return Err(Error::InvalidParameter(format!("y0 = {y0} must lie in (0, 1)")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol = {tol} must be positive")));
        }
        let max = self.flatness() + 2;
        (0..max)
            .find(|&k| self.deriv(k + 1, y0).abs() > tol)
            .ok_or(Error::OrderExceedsMaximum { y: y0, max })
    }

    /// `max |b|` over a set of sample points.
    pub fn max_abs_over(&self, ys: &[f64]) -> f64 {
        ys.iter().map(|&y| self.eval(y).abs()).fold(0.0, f64::max)
    }

    /// Predicted exponent `(N + 1) / (N + 3)` for this profile.
    pub fn predicted_exponent(&self) -> f64 {
        exponent_for(self.flatness())
    }
}

impl fmt::Display for ShearProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ProfileKind::Couette => write!(f, "couette"),
            ProfileKind::Poiseuille => write!(f, "poiseuille"),
            ProfileKind::Kolmogorov => write!(f, "kolmogorov"),
            ProfileKind::Flat(n) => write!(f, "flat:{n}"),
            ProfileKind::Still => write!(f, "still"),
        }
    }
}

impl FromStr for ShearProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::builtin(s)
    }
}

fn exponent_for(n: u32) -> f64 {
    f64::from(n + 1) / f64::from(n + 3)
}

/// Enhancement exponent `alpha = (N + 1) / (N + 3)`; the timescale is `nu^-alpha`.
pub fn predicted_exponent(n: i64) -> Result<f64> {
    if n < 0 {
        return Err(Error::NegativeOrder(n));
    }
    let n = u32::try_from(n).map_err(|_| Error::InvalidParameter(format!("N = {n} too large")))?;
    Ok(exponent_for(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_structure() {
        let c = ShearProfile::builtin("couette").unwrap();
        assert_eq!(c.flatness(), 0);
        assert!(c.critical_points().is_empty());

        let p = ShearProfile::builtin("poiseuille").unwrap();
        assert_eq!(p.critical_points(), &[0.5]);
        assert_eq!(p.orders(), &[1]);
        assert_eq!(p.flatness(), 1);

        let f = ShearProfile::builtin("flat:2").unwrap();
        assert_eq!(f.critical_points(), &[0.5]);
        assert_eq!(f.orders(), &[2]);
        assert_eq!(f.flatness(), 2);
        for y in [0.1, 0.37, 0.9] {
            assert!((f.deriv(1, y) - (y - 0.5).powi(2)).abs() < 1e-15);
        }
        assert_eq!(f.deriv(3, 0.5), 2.0);

        let k = ShearProfile::builtin("kolmogorov").unwrap();
        assert_eq!(k.critical_points(), &[0.25, 0.75]);
        assert_eq!(k.flatness(), 1);
    }

    #[test]
    fn unknown_name_lists_known() {
        let err = ShearProfile::builtin("taylor").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("couette") && msg.contains("flat:N"), "{msg}");
        assert!(ShearProfile::builtin("flat:x").is_err());
        assert_eq!(
            ShearProfile::builtin("flat:-1").unwrap_err(),
            Error::NegativeOrder(-1)
        );
    }

    #[test]
    fn names_round_trip() {
        for name in ["couette", "poiseuille", "kolmogorov", "flat:3"] {
            assert_eq!(ShearProfile::builtin(name).unwrap().to_string(), name);
        }
        assert_eq!(ShearProfile::builtin("flat(2)").unwrap().to_string(), "flat:2");
    }

    #[test]
    fn vanishing_order_examples() {
        let p = ShearProfile::builtin("poiseuille").unwrap();
        assert_eq!(p.numeric_vanishing_order(0.5, 1e-8).unwrap(), 1);
        let c = ShearProfile::builtin("couette").unwrap();
        assert_eq!(c.numeric_vanishing_order(0.3, 1e-8).unwrap(), 0);
        let f = ShearProfile::builtin("flat:2").unwrap();
        assert_eq!(f.numeric_vanishing_order(0.5, 1e-8).unwrap(), 2);
    }

    #[test]
    fn vanishing_order_rejects_flat_everywhere() {
        let s = ShearProfile::still();
        assert!(matches!(
            s.numeric_vanishing_order(0.5, 1e-8),
            Err(Error::OrderExceedsMaximum { .. })
        ));
        assert!(s.numeric_vanishing_order(0.0, 1e-8).is_err());
        assert!(s.numeric_vanishing_order(0.5, 0.0).is_err());
    }

    #[test]
    fn declared_orders_match_numeric_orders() {
        for name in ["couette", "poiseuille", "kolmogorov", "flat:1", "flat:2", "flat:4"] {
            let p = ShearProfile::builtin(name).unwrap();
            for (&y, &n) in p.critical_points().iter().zip(p.orders()) {
                assert_eq!(p.numeric_vanishing_order(y, 1e-8).unwrap(), n, "{name} at {y}");
                for k in 1..=n {
                    assert!(p.deriv(k, y).abs() < 1e-12);
                }
                assert!(p.deriv(n + 1, y).abs() > 0.0);
            }
        }
    }

    #[test]
    fn periodic_compatibility() {
        assert!(ShearProfile::builtin("kolmogorov").unwrap().y_periodic_compatible());
        assert!(!ShearProfile::builtin("couette").unwrap().y_periodic_compatible());
        assert!(!ShearProfile::builtin("poiseuille").unwrap().y_periodic_compatible());
        let k = ShearProfile::builtin("kolmogorov").unwrap();
        for j in 0..4 {
            assert!((k.deriv(j, 0.0) - k.deriv(j, 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn kolmogorov_derivatives_match_finite_differences() {
        let k = ShearProfile::builtin("kolmogorov").unwrap();
        let eps = 1e-6;
        for j in 0..3 {
            for y in [0.1, 0.33, 0.8] {
                let fd = (k.deriv(j, y + eps) - k.deriv(j, y - eps)) / (2.0 * eps);
                let exact = k.deriv(j + 1, y);
                assert!((fd - exact).abs() < 1e-5 * exact.abs().max(1.0));
            }
        }
    }

    #[test]
    fn exponent_values() {
        assert!((predicted_exponent(0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((predicted_exponent(1).unwrap() - 0.5).abs() < 1e-15);
        assert!((predicted_exponent(2).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(predicted_exponent(-1).unwrap_err(), Error::NegativeOrder(-1));
    }

    #[test]
    fn exponent_increasing_and_below_one() {
        let mut prev = 0.0;
        for n in 0..200 {
            let a = predicted_exponent(n).unwrap();
            assert!(a > prev && a < 1.0);
            prev = a;
        }
    }
}
