//! Complex tridiagonal and cyclic tridiagonal solvers.
//!
//! Both solvers factor the matrix once so that the same system can be solved
//! for many right-hand sides, which is the access pattern of a fixed-step
//! Crank-Nicolson integrator.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tridiagonal matrix with optional cyclic corners.
///
/// Row `i` reads `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`; the
/// corners couple `x[n-1]` into row 0 (`top_right`) and `x[0]` into row
/// `n-1` (`bottom_left`).
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub lower: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub upper: Vec<Complex64>,
    pub corners: Option<(Complex64, Complex64)>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `out = A x`
    pub fn mul_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            out[i] = acc;
        }
        if let Some((top_right, bottom_left)) = self.corners {
            out[0] += top_right * x[n - 1];
            out[n - 1] += bottom_left * x[0];
        }
    }

    pub fn mul(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); x.len()];
        self.mul_into(x, &mut out);
        out
    }

    pub fn factor(&self) -> Result<Factored> {
        match self.corners {
            None => ThomasFactor::new(&self.lower, &self.diag, &self.upper).map(Factored::Plain),
            Some((top_right, bottom_left)) => {
                CyclicFactor::new(self, top_right, bottom_left).map(Factored::Cyclic)
            }
        }
    }
}

/// LU factors of a plain tridiagonal matrix (no pivoting).
#[derive(Debug, Clone)]
pub struct ThomasFactor {
    lower: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
    upper_scaled: Vec<Complex64>,
}

impl ThomasFactor {
    pub fn new(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        let mut inv_pivot = Vec::with_capacity(n);
        let mut upper_scaled = Vec::with_capacity(n.saturating_sub(1));
        let mut pivot = diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = diag[i] - lower[i - 1] * upper_scaled[i - 1];
            }
            if pivot.norm() == 0.0 || !pivot.is_finite() {
                return Err(Error::ZeroPivot(i));
            }
            let inv = pivot.inv();
            inv_pivot.push(inv);
            if i + 1 < n {
                upper_scaled.push(upper[i] * inv);
            }
        }
        Ok(Self {
            lower: lower.to_vec(),
            inv_pivot,
            upper_scaled,
        })
    }

    /// Overwrite `x` (holding the right-hand side) with the solution.
    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.inv_pivot.len();
        x[0] *= self.inv_pivot[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i - 1] * x[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= self.upper_scaled[i] * next;
        }
    }
}

/// Cyclic tridiagonal factors via the Sherman-Morrison rank-one correction.
#[derive(Debug, Clone)]
pub struct CyclicFactor {
    base: ThomasFactor,
    /// `v = (1, 0, ..., 0, top_right / gamma)`
    v_last: Complex64,
    /// `z = B^{-1} u`
    z: Vec<Complex64>,
    denom: Complex64,
}

impl CyclicFactor {
    fn new(a: &Tridiagonal, top_right: Complex64, bottom_left: Complex64) -> Result<Self> {
        let n = a.len();
        if n < 3 {
            return Err(Error::InvalidParameter("cyclic system needs n >= 3".into()));
        }
        let gamma = -a.diag[0];
        if gamma.norm() == 0.0 {
            return Err(Error::ZeroPivot(0));
        }
        let mut diag = a.diag.clone();
        diag[0] -= gamma;
        diag[n - 1] -= top_right * bottom_left / gamma;
        let base = ThomasFactor::new(&a.lower, &diag, &a.upper)?;
        let mut z = vec![Complex64::default(); n];
        z[0] = gamma;
        z[n - 1] = bottom_left;
        base.solve_in_place(&mut z);
        let v_last = top_right / gamma;
        let denom = Complex64::new(1.0, 0.0) + z[0] + v_last * z[n - 1];
        if denom.norm() == 0.0 || !denom.is_finite() {
            return Err(Error::ZeroPivot(n - 1));
        }
        Ok(Self {
            base,
            v_last,
            z,
            denom,
        })
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        self.base.solve_in_place(x);
        let n = x.len();
        let factor = (x[0] + self.v_last * x[n - 1]) / self.denom;
        for (xi, zi) in x.iter_mut().zip(&self.z) {
            *xi -= factor * zi;
        }
    }
}

#[derive(Debug, Clone)]
pub enum Factored {
    Plain(ThomasFactor),
    Cyclic(CyclicFactor),
}

impl Factored {
    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        match self {
            Factored::Plain(f) => f.solve_in_place(x),
            Factored::Cyclic(f) => f.solve_in_place(x),
        }
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense(a: &Tridiagonal) -> DMatrix<Complex64> {
        let n = a.len();
        let mut m = DMatrix::zeros(n, n);
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

    fn sample(n: usize, cyclic: bool) -> Tridiagonal {
        let lower = (0..n - 1).map(|i| c(1.0 + 0.1 * i as f64, 0.3)).collect();
        let upper = (0..n - 1).map(|i| c(0.7, -0.2 * i as f64)).collect();
        let diag = (0..n).map(|i| c(-4.0 - 0.01 * i as f64, 0.5 * i as f64)).collect();
        Tridiagonal {
            lower,
            diag,
            upper,
            corners: cyclic.then(|| (c(0.9, 0.1), c(1.1, -0.4))),
        }
    }

    #[test]
    fn thomas_matches_dense_lu() {
        for cyclic in [false, true] {
            let a = sample(17, cyclic);
            let rhs: Vec<_> = (0..17).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
            let x = a.factor().unwrap().solve(&rhs);
            let reference = dense(&a).lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
            for (xi, ri) in x.iter().zip(reference.iter()) {
                assert!((xi - ri).norm() < 1e-12, "cyclic={cyclic}");
            }
            let back = a.mul(&x);
            for (bi, ri) in back.iter().zip(&rhs) {
                assert!((bi - ri).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_pivot_reported() {
        let a = Tridiagonal {
            lower: vec![c(1.0, 0.0)],
            diag: vec![c(0.0, 0.0), c(1.0, 0.0)],
            upper: vec![c(1.0, 0.0)],
            corners: None,
        };
        assert_eq!(a.factor().unwrap_err(), Error::ZeroPivot(0));
    }
}
