//! Grids in y, the second-difference diffusion operator, and the
//! `nu^{1/2} H^1_y` / `nu^{-1/2} H^{-1}_y` norms built from it.
//!
//! All grids use the quadrature weight `h` at every node, so that the
//! eigenvectors of the diffusion operator are orthonormal for
//! `<u, v>_h = h sum_j u_j conj(v_j)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tridiag::{ThomasFactor, Tridiagonal};

/// Smallest grid accepted by [`DiffusionOperator::build`].
pub const MIN_POINTS: usize = 8;

/// Relative size of the removed mean above which an `H^-1` evaluation is refused.
pub const MEAN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Periodic,
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::Periodic => "periodic",
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Ok(Self::Periodic),
            "dirichlet" => Ok(Self::Dirichlet),
            "neumann" => Ok(Self::Neumann),
            other => Err(Error::UnknownBoundary(other.to_string())),
        }
    }
}

/// Uniform grid on `[y_lo, y_hi]` laid out according to the boundary condition.
///
/// * dirichlet: interior nodes `y_lo + j h`, `j = 1..=n`, `h = L / (n + 1)`
/// * neumann: cell centers `y_lo + (j - 1/2) h`, `h = L / n`
/// * periodic: `y_lo + (j - 1) h`, `h = L / n`
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n_y: usize,
    y_lo: f64,
    y_hi: f64,
    h: f64,
    bc: BoundaryCondition,
    nodes: Vec<f64>,
}

impl Grid {
    /// Grid on the unit interval.
    pub fn new(bc: BoundaryCondition, n_y: usize) -> Result<Self> {
        Self::on_interval(bc, n_y, 0.0, 1.0)
    }

    pub fn on_interval(bc: BoundaryCondition, n_y: usize, y_lo: f64, y_hi: f64) -> Result<Self> {
        if n_y < MIN_POINTS {
            return Err(Error::GridTooCoarse(n_y));
        }
        if !(y_hi > y_lo) || !y_lo.is_finite() || !y_hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "interval [{y_lo}, {y_hi}] is empty or not finite"
            )));
        }
        let length = y_hi - y_lo;
        let (h, offset) = match bc {
            BoundaryCondition::Dirichlet => (length / (n_y as f64 + 1.0), 1.0),
            BoundaryCondition::Neumann => (length / n_y as f64, 0.5),
            BoundaryCondition::Periodic => (length / n_y as f64, 0.0),
        };
        let nodes = (0..n_y).map(|j| y_lo + (j as f64 + offset) * h).collect();
        Ok(Self {
            n_y,
            y_lo,
            y_hi,
            h,
            bc,
            nodes,
        })
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn y_lo(&self) -> f64 {
        self.y_lo
    }

    pub fn y_hi(&self) -> f64 {
        self.y_hi
    }

    pub fn length(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `<u, v>_h = h sum u_j conj(v_j)`
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        u.iter().zip(v).map(|(a, b)| a * b.conj()).sum::<Complex64>() * self.h
    }

    pub fn norm_sqr(&self, v: &[Complex64]) -> f64 {
        self.h * v.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self, v: &[Complex64]) -> f64 {
        self.norm_sqr(v).sqrt()
    }

    /// Sum of squared edge differences `sum |dv/h|^2 h` with the boundary
    /// treatment of the grid (ghost zeros for dirichlet, no boundary edges
    /// for neumann, wrap-around for periodic).
    pub fn gradient_norm_sqr(&self, v: &[Complex64]) -> f64 {
        let n = v.len();
        let interior: f64 = v.windows(2).map(|w| (w[1] - w[0]).norm_sqr()).sum();
        let boundary = match self.bc {
            BoundaryCondition::Dirichlet => v[0].norm_sqr() + v[n - 1].norm_sqr(),
            BoundaryCondition::Neumann => 0.0,
            BoundaryCondition::Periodic => (v[0] - v[n - 1]).norm_sqr(),
        };
        (interior + boundary) / self.h
    }
}

/// Orthonormal eigenpairs of the diffusion operator, ordered by `|lambda|`.
#[derive(Debug, Clone)]
pub struct Eigenbasis {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Second-order approximation of `d^2/dy^2` with the grid's boundary condition.
#[derive(Debug)]
pub struct DiffusionOperator {
    grid: Grid,
    main_diag: Vec<f64>,
    off_diag: Vec<f64>,
    /// Corner coupling for the periodic (cyclic) stencil.
    corner: Option<f64>,
    eigen: OnceLock<Eigenbasis>,
    inverse: OnceLock<Result<ThomasFactor>>,
}

impl Clone for DiffusionOperator {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            main_diag: self.main_diag.clone(),
            off_diag: self.off_diag.clone(),
            corner: self.corner,
            eigen: self.eigen.clone(),
            inverse: OnceLock::new(),
        }
    }
}

impl DiffusionOperator {
    pub fn build(grid: Grid) -> Result<Self> {
        let n = grid.n_y();
        if n < MIN_POINTS {
            return Err(Error::GridTooCoarse(n));
        }
        let inv_h2 = 1.0 / (grid.h() * grid.h());
        let mut main_diag = vec![-2.0 * inv_h2; n];
        let off_diag = vec![inv_h2; n - 1];
        let corner = match grid.bc() {
            BoundaryCondition::Dirichlet => None,
            BoundaryCondition::Neumann => {
                main_diag[0] = -inv_h2;
                main_diag[n - 1] = -inv_h2;
                None
            }
            BoundaryCondition::Periodic => Some(inv_h2),
        };
        Ok(Self {
            grid,
            main_diag,
            off_diag,
            corner,
            eigen: OnceLock::new(),
            inverse: OnceLock::new(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn main_diag(&self) -> &[f64] {
        &self.main_diag
    }

    pub fn off_diag(&self) -> &[f64] {
        &self.off_diag
    }

    pub fn corner(&self) -> Option<f64> {
        self.corner
    }

    /// Complex tridiagonal copy of the operator scaled by `scale`.
    pub fn to_tridiagonal(&self, scale: f64) -> Tridiagonal {
        let c = |x: f64| Complex64::new(scale * x, 0.0);
        Tridiagonal {
            lower: self.off_diag.iter().map(|&x| c(x)).collect(),
            diag: self.main_diag.iter().map(|&x| c(x)).collect(),
            upper: self.off_diag.iter().map(|&x| c(x)).collect(),
            corners: self.corner.map(|x| (c(x), c(x))),
        }
    }

    /// `D v`
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = v[i] * self.main_diag[i];
            if i > 0 {
                acc += v[i - 1] * self.off_diag[i - 1];
            }
            if i + 1 < n {
                acc += v[i + 1] * self.off_diag[i];
            }
            out.push(acc);
        }
        if let Some(corner) = self.corner {
            out[0] += v[n - 1] * corner;
            out[n - 1] += v[0] * corner;
        }
        out
    }

    /// Closed-form eigenpairs of the stencil, computed once and cached.
    pub fn eigenbasis(&self) -> &Eigenbasis {
        self.eigen.get_or_init(|| closed_form_eigenbasis(&self.grid))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenbasis().values
    }

    /// `nu^{1/2} ||d_y v||` with the discrete edge differences of the grid.
    pub fn h1y_seminorm(&self, v: &[Complex64], nu: f64) -> f64 {
        nu.sqrt() * self.grid.gradient_norm_sqr(v).sqrt()
    }

    /// `nu^{-1/2} ||d_y w||` where `D w = g`.
    ///
    /// For neumann and periodic grids the constant mode is projected out of
    /// `g` first and `w` is taken mean-free; the projection is refused when
    /// the removed mean exceeds `1e-8 ||g||`.
    pub fn hminus1y_norm(&self, g: &[Complex64], nu: f64) -> Result<f64> {
        let w = self.solve_poisson(g)?;
        Ok(self.grid.gradient_norm_sqr(&w).sqrt() / nu.sqrt())
    }

    /// Same quantity as [`Self::hminus1y_norm`], evaluated in the eigenbasis as
    /// `nu^{-1/2} (sum_m |g_m|^2 / |lambda_m|)^{1/2}` over nonzero eigenvalues.
    pub fn hminus1y_norm_spectral(&self, g: &[Complex64], nu: f64) -> Result<f64> {
        let g = self.project_mean(g)?;
        let basis = self.eigenbasis();
        let mut acc = 0.0;
        for (lambda, e) in basis.values.iter().zip(&basis.vectors) {
            if lambda.abs() < 1e-12 {
                continue;
            }
            let coeff: Complex64 = g.iter().zip(e).map(|(gj, ej)| gj * ej).sum::<Complex64>() * self.grid.h();
            acc += coeff.norm_sqr() / lambda.abs();
        }
        Ok((acc / nu).sqrt())
    }

    /// Mean-free solution of `D w = g` (after projecting `g` when needed).
    pub fn solve_poisson(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.grid.n_y();
        if g.len() != n {
            return Err(Error::InvalidParameter(format!(
                "vector length {} does not match grid size {n}",
                g.len()
            )));
        }
        let g = self.project_mean(g)?;
        let factor = self.inverse.get_or_init(|| self.poisson_factor()).as_ref().map_err(Clone::clone)?;
        match self.grid.bc() {
            BoundaryCondition::Dirichlet => {
                let mut w = g;
                factor.solve_in_place(&mut w);
                Ok(w)
            }
            BoundaryCondition::Neumann | BoundaryCondition::Periodic => {
                // Pin w[0] = 0 and drop the first equation: it is implied by
                // the others once g is mean-free.
                let mut w = Vec::with_capacity(n);
                w.push(Complex64::default());
                let mut rest = g[1..].to_vec();
                factor.solve_in_place(&mut rest);
                w.extend(rest);
                let mean = w.iter().sum::<Complex64>() / n as f64;
                for wj in &mut w {
                    *wj -= mean;
                }
                Ok(w)
            }
        }
    }

    fn poisson_factor(&self) -> Result<ThomasFactor> {
        let c = |x: &f64| Complex64::new(*x, 0.0);
        match self.grid.bc() {
            BoundaryCondition::Dirichlet => {
                let off: Vec<_> = self.off_diag.iter().map(c).collect();
                let main: Vec<_> = self.main_diag.iter().map(c).collect();
                ThomasFactor::new(&off, &main, &off)
            }
            BoundaryCondition::Neumann | BoundaryCondition::Periodic => {
                let off: Vec<_> = self.off_diag[1..].iter().map(c).collect();
                let main: Vec<_> = self.main_diag[1..].iter().map(c).collect();
                ThomasFactor::new(&off, &main, &off)
            }
        }
    }

    fn project_mean(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.grid.bc() == BoundaryCondition::Dirichlet {
            return Ok(g.to_vec());
        }
        let n = g.len() as f64;
        let mean = g.iter().sum::<Complex64>() / n;
        let total = self.grid.norm(g);
        let removed = mean.norm() * self.grid.length().sqrt();
        if removed > MEAN_TOLERANCE * total {
            return Err(Error::NonzeroMean {
                norm_kind: "H^-1_y",
                mean: removed / total,
            });
        }
        Ok(g.iter().map(|z| z - mean).collect())
    }
}

fn closed_form_eigenbasis(grid: &Grid) -> Eigenbasis {
    let n = grid.n_y();
    let h = grid.h();
    let len = grid.length();
    let symbol = |theta: f64| -(2.0 / (h * h)) * (1.0 - theta.cos());
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    match grid.bc() {
        BoundaryCondition::Dirichlet => {
            let scale = (2.0 / len).sqrt();
            for m in 1..=n {
                let theta = m as f64 * PI / (n as f64 + 1.0);
                values.push(symbol(theta));
                vectors.push((1..=n).map(|j| scale * (theta * j as f64).sin()).collect());
            }
        }
        BoundaryCondition::Neumann => {
            for m in 0..n {
                let theta = m as f64 * PI / n as f64;
                let scale = if m == 0 { (1.0 / len).sqrt() } else { (2.0 / len).sqrt() };
                values.push(symbol(theta));
                vectors.push((0..n).map(|j| scale * (theta * (j as f64 + 0.5)).cos()).collect());
            }
        }
        BoundaryCondition::Periodic => {
            values.push(0.0);
            vectors.push(vec![(1.0 / len).sqrt(); n]);
            let scale = (2.0 / len).sqrt();
            for m in 1..=(n - 1) / 2 {
                let theta = 2.0 * PI * m as f64 / n as f64;
                for trig in [f64::cos, f64::sin] {
                    values.push(symbol(theta));
                    vectors.push((0..n).map(|j| scale * trig(theta * j as f64)).collect());
                }
            }
            if n.is_multiple_of(2) {
                values.push(symbol(PI));
                let scale = (1.0 / len).sqrt();
                vectors.push((0..n).map(|j| if j % 2 == 0 { scale } else { -scale }).collect());
            }
        }
    }
    Eigenbasis { values, vectors }
}
