//! Finite-difference quotient norms on `T x R`.
//!
//! `||f||_{Q^s_X} = sup_sigma sigma^{-1} ||e^{sigma^{1/s} X} f - f||` for
//! `X = d_x`, `y d_x` or `d_y`. The x-shifts act exactly on each Fourier
//! mode; the y-shift moves by whole grid cells with zero fill.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::solver::{wavenumber, ModeField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `d_x`
    X,
    /// `y d_x`
    YX,
    /// `d_y`
    Y,
}

/// Log-spaced shift parameters `sigma` in `[lo, hi]`.
pub fn default_sigmas(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

/// `max_sigma sigma^{-1} ||e^{sigma^{1/s} X} u - u||_{L^2}` over the given shifts.
pub fn q_norm_finite_difference(u: &ModeField, s: f64, direction: Direction, sigmas: &[f64]) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!("order s = {s} must lie in (0, 1]")));
    }
    if sigmas.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidParameter("shift parameters must be positive".into()));
    }
    let best = match direction {
        Direction::X => {
            let norms = u.mode_norms();
            sigmas
                .iter()
                .map(|&sigma| {
                    let a = sigma.powf(1.0 / s);
                    let sq: f64 = u
                        .modes()
                        .iter()
                        .zip(&norms)
                        .map(|(&m, n)| 2.0 * (Complex64::from_polar(1.0, wavenumber(m) * a) - 1.0).norm_sqr() * n * n)
                        .sum();
                    sq.sqrt() / sigma
                })
                .fold(0.0, f64::max)
        }
        Direction::YX => {
            let ys = u.grid().nodes();
            let h = u.grid().h();
            sigmas
                .iter()
                .map(|&sigma| {
                    let a = sigma.powf(1.0 / s);
                    let mut sq = 0.0;
                    for (&m, amp) in u.modes().iter().zip(u.amplitudes()) {
                        let k = wavenumber(m);
                        for (&y, z) in ys.iter().zip(amp) {
                            if *z != Complex64::default() {
                                sq += (Complex64::from_polar(1.0, k * a * y) - 1.0).norm_sqr() * z.norm_sqr();
                            }
                        }
                    }
                    (2.0 * h * sq).sqrt() / sigma
                })
                .fold(0.0, f64::max)
        }
        Direction::Y => {
            let h = u.grid().h();
            let n = u.grid().n_y();
            let mut shifts: Vec<usize> = sigmas
                .iter()
                .map(|&sigma| (sigma.powf(1.0 / s) / h).round() as usize)
                .filter(|&p| p >= 1)
                .map(|p| p.min(n))
                .collect();
            shifts.dedup();
            shifts
                .into_iter()
                .map(|p| {
                    let mut sq = 0.0;
                    for amp in u.amplitudes() {
                        for j in 0..n {
                            let shifted = if j + p < n { amp[j + p] } else { Complex64::default() };
                            sq += (shifted - amp[j]).norm_sqr();
                        }
                        // nodes below the box see f(y + sigma) but f(y) = 0
                        sq += amp[..p].iter().map(|z| z.norm_sqr()).sum::<f64>();
                    }
                    let sigma = (p as f64 * h).powf(s);
                    (2.0 * h * sq).sqrt() / sigma
                })
                .fold(0.0, f64::max)
        }
    };
    Ok(best)
}

/// `||y d_x f||_{L^2_x H^{-1}_y(R)}`: for each mode, `i k y f_m` must integrate
/// to zero in `y`, and its `H^{-1}` norm is the `L^2` norm of its primitive.
pub fn yx_hminus1_norm(u: &ModeField) -> Result<f64> {
    let h = u.grid().h();
    let ys = u.grid().nodes();
    let mut total = 0.0;
    for (&m, amp) in u.modes().iter().zip(u.amplitudes()) {
        let k = wavenumber(m);
        let mut primitive = Complex64::default();
        let mut sq = 0.0;
        let mut scale = 0.0;
        for (&y, z) in ys.iter().zip(amp) {
            let g = Complex64::new(0.0, k * y) * z;
            scale += g.norm() * h;
            primitive += g * h;
            sq += primitive.norm_sqr() * h;
        }
        if primitive.norm() > 1e-8 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NonzeroMean {
                norm_kind: "y d_x f (H^-1 on R)",
                mean: primitive.norm() / scale,
            });
        }
        total += 2.0 * sq;
    }
    Ok(total.sqrt())
}

/// Whether `u` is non-negligible within `margin` cells of the box ends.
pub fn touches_boundary(u: &ModeField, margin: usize, tol: f64) -> bool {
    let peak = u
        .amplitudes()
        .iter()
        .flat_map(|a| a.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    let n = u.grid().n_y();
    let margin = margin.min(n);
    u.amplitudes().iter().any(|a| {
        a[..margin]
            .iter()
            .chain(&a[n - margin..])
            .any(|z| z.norm() > tol * peak)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{BoundaryCondition, Grid};
    use std::f64::consts::PI;

    fn box_grid() -> Grid {
        Grid::on_interval(BoundaryCondition::Dirichlet, 511, -4.0, 4.0).unwrap()
    }

    fn even_bump(grid: &Grid, radius: f64) -> Vec<Complex64> {
        grid.nodes()
            .iter()
            .map(|&y| Complex64::new(crate::oracle::bump(y / radius), 0.0))
            .collect()
    }

    #[test]
    fn x_independent_is_zero() {
        let u = ModeField::new(box_grid(), vec![], vec![]).unwrap();
        let sig = default_sigmas(1e-3, 4.0, 64);
        assert_eq!(q_norm_finite_difference(&u, 1.0 / 3.0, Direction::X, &sig).unwrap(), 0.0);
        assert_eq!(q_norm_finite_difference(&u, 0.5, Direction::YX, &sig).unwrap(), 0.0);
    }

    #[test]
    fn pure_mode_x_quotient() {
        let grid = box_grid();
        let u = ModeField::new(grid.clone(), vec![1], vec![even_bump(&grid, 1.0)]).unwrap();
        let sig = default_sigmas(1e-2, 2.0, 200);
        let q = q_norm_finite_difference(&u, 1.0 / 3.0, Direction::X, &sig).unwrap();
        let expected = sig
            .iter()
            .map(|&s| 2.0 * (PI * s.powi(3)).sin().abs() / s)
            .fold(0.0, f64::max)
            * u.norm();
        assert!((q - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn y_quotient_tends_to_gradient() {
        let grid = box_grid();
        let u = ModeField::new(grid.clone(), vec![1], vec![even_bump(&grid, 2.0)]).unwrap();
        let q = q_norm_finite_difference(&u, 1.0, Direction::Y, &[grid.h()]).unwrap();
        assert!((q - u.h1y_norm(1.0)).abs() < 1e-12 * q);
    }

    #[test]
    fn hminus1_of_odd_integrand() {
        let grid = box_grid();
        let u = ModeField::new(grid.clone(), vec![2], vec![even_bump(&grid, 1.5)]).unwrap();
        assert!(yx_hminus1_norm(&u).unwrap() > 0.0);
        let shifted: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&y| Complex64::new(crate::oracle::bump((y - 1.0) / 1.5), 0.0))
            .collect();
        let v = ModeField::new(grid, vec![2], vec![shifted]).unwrap();
        assert!(matches!(yx_hminus1_norm(&v), Err(Error::NonzeroMean { .. })));
    }

    #[test]
    fn boundary_detection() {
        let grid = box_grid();
        let u = ModeField::new(grid.clone(), vec![1], vec![even_bump(&grid, 1.0)]).unwrap();
        assert!(!touches_boundary(&u, 8, 1e-12));
        let flat = ModeField::new(grid, vec![1], vec![vec![Complex64::new(1.0, 0.0); 511]]).unwrap();
        assert!(touches_boundary(&flat, 8, 1e-12));
    }
}
