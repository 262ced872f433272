//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use num_complex::Complex64;

/// Solves the dense system `a x = b` by Gaussian elimination with partial
/// pivoting. `a` is row-major `n x n`.
pub fn dense_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            let pivot_row = a[col].clone();
            for (dst, src) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[i][k] * x[k];
        }
        x[i] = s / a[i][i];
    }
    x
}

/// Dense `n x n` matrix with constant `diag` and `off` bands.
pub fn dense_tridiag(n: usize, diag: Complex64, off: Complex64) -> Vec<Vec<Complex64>> {
    let mut a = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        a[i][i] = diag;
        if i > 0 {
            a[i][i - 1] = off;
        }
        if i + 1 < n {
            a[i][i + 1] = off;
        }
    }
    a
}

/// Writes a criterion result straight to stderr so it shows up even when the
/// test harness captures output.
pub fn report(name: &str, pass: bool, detail: &str) {
    use std::io::Write;
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[acceptance] {tag} {name}: {detail}");
}
