//! Prefactored solve for the constant interior system of the time stepper.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Thomas-algorithm factorization of a constant-coefficient complex tridiagonal
/// matrix. The elimination multipliers and inverse pivots are computed once, so
/// each solve is a single forward and backward pass.
#[derive(Debug, Clone)]
pub struct TridiagFactor {
    diag: Complex64,
    off: Complex64,
    /// `c'_i = off / pivot_i`
    upper: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
}

impl TridiagFactor {
    /// Factor the `n x n` matrix with `diag` on the diagonal and `off` on both
    /// off-diagonals.
    pub fn new(n: usize, diag: Complex64, off: Complex64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("empty tridiagonal system".into()));
        }
        let mut upper = Vec::with_capacity(n);
        let mut inv_pivot = Vec::with_capacity(n);
        let mut prev_upper = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let pivot = diag - off * prev_upper;
            if pivot.norm() == 0.0 || !pivot.is_finite() {
                return Err(Error::ZeroPivot(i));
            }
            let inv = pivot.inv();
            prev_upper = off * inv;
            upper.push(prev_upper);
            inv_pivot.push(inv);
        }
        Ok(Self {
            diag,
            off,
            upper,
            inv_pivot,
        })
    }

    pub fn size(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn diag(&self) -> Complex64 {
        self.diag
    }

    pub fn off(&self) -> Complex64 {
        self.off
    }

    /// Overwrites `rhs` with the solution `w` of `A w = rhs`.
    pub fn solve_in_place(&self, rhs: &mut [Complex64]) {
        let n = self.size();
        assert_eq!(rhs.len(), n, "rhs length does not match the factor");
        let off = self.off;
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - off * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper[i] * rhs[i + 1];
        }
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let mut w = rhs.to_vec();
        self.solve_in_place(&mut w);
        w
    }

    /// `A w`, for residual checks.
    pub fn apply(&self, w: &[Complex64]) -> Vec<Complex64> {
        let n = w.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag * w[i];
                if i > 0 {
                    s += self.off * w[i - 1];
                }
                if i + 1 < n {
                    s += self.off * w[i + 1];
                }
                s
            })
            .collect()
    }
}

/// Factor of `(i / (2 tau)) I + (1/2) delta_x^2` on the `M - 1` interior nodes:
/// diagonal `i/(2 tau) - 1/h^2`, off-diagonals `1/(2 h^2)`.
pub fn build_factor(grid: &Grid1D, tau: f64) -> Result<TridiagFactor> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!(
            "time step must be positive, got {tau}"
        )));
    }
    let h = grid.h();
    let diag = Complex64::new(-1.0 / (h * h), 1.0 / (2.0 * tau));
    let off = Complex64::new(1.0 / (2.0 * h * h), 0.0);
    TridiagFactor::new(grid.intervals() - 1, diag, off)
}
