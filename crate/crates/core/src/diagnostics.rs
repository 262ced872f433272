//! Conserved quantities, error functionals and observed convergence orders.
//!
//! Integrals use the trapezoidal rule; with zero endpoint values that is the
//! plain interior sum. The gradient term of the energy is the forward-difference
//! seminorm, and the momentum is `Im h sum_{j<M} conj(u_j) (u_{j+1} - u_j)/h`.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{check_same_grid, delta_x_plus, norms, WaveField};
use crate::nonlinearity::{energy_density, RegVariant};

pub fn mass(u: &WaveField) -> f64 {
    let m = u.grid().intervals();
    u.grid().h() * u.values()[1..m].iter().map(|z| z.norm_sqr()).sum::<f64>()
}

pub fn momentum(u: &WaveField) -> f64 {
    let d = delta_x_plus(u);
    let s: f64 = u.values()[..d.len()]
        .iter()
        .zip(&d)
        .map(|(a, b)| (a.conj() * b).im)
        .sum();
    u.grid().h() * s
}

/// Trapezoidal `L1` norm.
pub fn l1_norm(u: &WaveField) -> f64 {
    let m = u.grid().intervals();
    u.grid().h() * u.values()[1..m].iter().map(|z| z.norm()).sum::<f64>()
}

/// `|u|_{H1}^2 + lambda * trapz(F(|u|^2))`, with `F` chosen by `variant`.
/// At `eps = 0` the regularized densities reduce to the unregularized one.
pub fn energy(u: &WaveField, lambda: f64, eps: f64, variant: RegVariant) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("eps must be >= 0, got {eps}")));
    }
    let variant = if eps == 0.0 {
        RegVariant::Unregularized
    } else {
        variant
    };
    let grad = norms(u).h1_semi.powi(2);
    let m = u.grid().intervals();
    let mut pot = 0.0;
    for z in &u.values()[1..m] {
        pot += energy_density(z.norm_sqr(), eps, variant)?;
    }
    Ok(grad + lambda * u.grid().h() * pot)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConservedSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub momentum: Vec<f64>,
    pub energy: Vec<f64>,
}

/// Largest deviation from the initial value over a series, relative to the
/// initial value when that is nonzero.
fn max_drift(series: &[f64]) -> f64 {
    let Some(&q0) = series.first() else {
        return 0.0;
    };
    let scale = if q0 == 0.0 { 1.0 } else { q0.abs() };
    series
        .iter()
        .map(|q| (q - q0).abs() / scale)
        .fold(0.0, f64::max)
}

impl ConservedSeries {
    pub fn push(
        &mut self,
        t: f64,
        u: &WaveField,
        lambda: f64,
        eps: f64,
        variant: RegVariant,
    ) -> Result<()> {
        let e = energy(u, lambda, eps, variant)?;
        self.times.push(t);
        self.mass.push(mass(u));
        self.momentum.push(momentum(u));
        self.energy.push(e);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mass_drift(&self) -> f64 {
        max_drift(&self.mass)
    }

    pub fn momentum_drift(&self) -> f64 {
        max_drift(&self.momentum)
    }

    pub fn energy_drift(&self) -> f64 {
        max_drift(&self.energy)
    }
}

/// Which pair of solutions an error compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// exact minus regularized (model error)
    EHat,
    /// regularized minus numerical (scheme error)
    E,
    /// exact minus numerical (total error)
    ETilde,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::EHat => "e_hat",
            ErrorKind::E => "e",
            ErrorKind::ETilde => "e_tilde",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub h: f64,
    pub tau: f64,
    pub eps: f64,
    pub l2: f64,
    pub h1: f64,
    pub linf: f64,
    pub energy_err: f64,
    pub which: ErrorKind,
}

impl ErrorReport {
    pub fn new(
        h: f64,
        tau: f64,
        eps: f64,
        norms: ErrorNorms,
        energy_err: f64,
        which: ErrorKind,
    ) -> Self {
        Self {
            h,
            tau,
            eps,
            l2: norms.l2,
            h1: norms.h1,
            linf: norms.linf,
            energy_err,
            which,
        }
    }
}

pub fn error_norms(u_ref: &WaveField, u_num: &WaveField) -> Result<ErrorNorms> {
    check_same_grid(u_ref, u_num)?;
    let n = norms(&u_ref.sub(u_num)?);
    Ok(ErrorNorms {
        l2: n.l2,
        h1: n.h1,
        linf: n.linf,
    })
}

/// Successive rates `ln(e_k / e_{k+1}) / ln(s_k / s_{k+1})` for `(scale, error)`
/// pairs; with halving scales this is `log2(e_k / e_{k+1})`. A pair with a
/// nonpositive error has no rate (`None`).
pub fn observed_order(errors: &[(f64, f64)]) -> Result<Vec<Option<f64>>> {
    if errors.len() < 2 {
        return Err(Error::InvalidInput(
            "observed order needs at least two errors".into(),
        ));
    }
    Ok(errors
        .windows(2)
        .map(|w| {
            let ((s0, e0), (s1, e1)) = (w[0], w[1]);
            if e0 > 0.0 && e1 > 0.0 && s0 > 0.0 && s1 > 0.0 && s0 != s1 {
                Some((e0 / e1).ln() / (s0 / s1).ln())
            } else {
                None
            }
        })
        .collect())
}

/// Least-squares slope of `ln(err)` against `ln(scale)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidInput(
            "slope fit needs at least two points".into(),
        ));
    }
    if points.iter().any(|&(s, e)| !(s > 0.0 && e > 0.0)) {
        return Err(Error::InvalidInput(
            "slope fit needs positive scales and errors".into(),
        ));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput(
            "slope fit needs distinct scales".into(),
        ));
    }
    Ok(sxy / sxx)
}

/// Ordinary least-squares slope of `y` against `x` (linear axes).
pub fn fit_linear_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidInput(
            "slope fit needs at least two points".into(),
        ));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput(
            "slope fit needs distinct abscissae".into(),
        ));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{case1_amplitude, initial_case1};
    use crate::grid::Grid1D;
    use crate::nonlinearity::F;
    use crate::testutil::simpson;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid(a: f64, b: f64, m: usize) -> Arc<Grid1D> {
        Arc::new(Grid1D::new(a, b, m).unwrap())
    }

    #[test]
    fn zero_field() {
        let z = WaveField::zeros(grid(0.0, 1.0, 8));
        assert_eq!(mass(&z), 0.0);
        assert_eq!(momentum(&z), 0.0);
        for v in [
            RegVariant::Unregularized,
            RegVariant::LinearEps,
            RegVariant::SquaredEps,
        ] {
            assert_eq!(energy(&z, -1.0, 1e-3, v).unwrap(), 0.0);
        }
    }

    #[test]
    fn case1_mass_and_momentum() {
        let g = grid(-12.0, 12.0, 8192);
        let u = WaveField::from_fn(g.clone(), |x| initial_case1(x, -1.0, 1.0));
        assert!((mass(&u) - 1.0).abs() < 1e-8);
        assert!((mass(&u) - norms(&u).l2.powi(2)).abs() < 1e-14);
        // P = v * M for a modulated envelope, up to O(h^2)
        let h = g.h();
        assert!((momentum(&u) - 1.0).abs() < 2.0 * h * h);
        assert!((momentum(&u.conj()) + momentum(&u)).abs() < 1e-14);
        let real = WaveField::from_fn(g, |x| c((-x * x).exp(), 0.0));
        assert_eq!(momentum(&real), 0.0);
    }

    #[test]
    fn static_gausson_energy_against_quadrature() {
        let lam = -1.0;
        let b = 0.5f64.exp();
        let u_exact = |x: f64| b * (lam * x * x / 2.0).exp();
        let du = |x: f64| lam * x * u_exact(x);
        let oracle = simpson(
            |x| du(x).powi(2) + lam * F(u_exact(x).powi(2)).unwrap(),
            -12.0,
            12.0,
            1e-12,
        );
        let u = WaveField::from_fn(grid(-12.0, 12.0, 16384), |x| c(u_exact(x), 0.0));
        let e = energy(&u, lam, 0.0, RegVariant::Unregularized).unwrap();
        assert!(((e - oracle) / oracle).abs() < 1e-6, "{e} vs {oracle}");
    }

    #[test]
    fn regularized_energy_bound() {
        let g = grid(-12.0, 12.0, 8192);
        let u = WaveField::from_fn(g, |x| initial_case1(x, -1.0, 1.0));
        let e = energy(&u, -1.0, 0.0, RegVariant::Unregularized).unwrap();
        let l1 = l1_norm(&u);
        assert!((l1 - case1_amplitude(-1.0) * (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-8);
        for k in 2..=6 {
            let eps = 10f64.powi(-k);
            let ee = energy(&u, -1.0, eps, RegVariant::LinearEps).unwrap();
            assert!((ee - e).abs() <= 4.0 * eps * l1, "eps={eps}");
        }
    }

    #[test]
    fn error_norm_examples() {
        let g = grid(0.0, 1.0, 10);
        let u = WaveField::from_fn(g.clone(), |x| c(x.sin(), x));
        let same = error_norms(&u, &u).unwrap();
        assert_eq!(
            same,
            ErrorNorms {
                l2: 0.0,
                h1: 0.0,
                linf: 0.0
            }
        );
        let mut bumped = u.clone();
        let cc = c(0.3, -0.4);
        bumped.interior_mut()[3] += cc;
        let e = error_norms(&u, &bumped).unwrap();
        assert!((e.l2 - g.h().sqrt() * 0.5).abs() < 1e-15);
        assert!((e.linf - 0.5).abs() < 1e-15);
        assert!(error_norms(&u, &WaveField::zeros(grid(0.0, 1.0, 11))).is_err());
    }

    #[test]
    fn observed_order_examples() {
        let r = observed_order(&[(1.0, 1e-2), (0.5, 2.5e-3), (0.25, 6.25e-4)]).unwrap();
        for v in r {
            assert!((v.unwrap() - 2.0).abs() < 1e-12);
        }
        let r = observed_order(&[(0.1, 1.84e-1), (0.05, 4.84e-2)]).unwrap();
        assert!((r[0].unwrap() - 1.93).abs() < 0.005);
        let r = observed_order(&[(1.0, 3e-3), (0.5, 3e-3)]).unwrap();
        assert_eq!(r[0], Some(0.0));
        let r = observed_order(&[(1.0, 0.0), (0.5, 3e-3)]).unwrap();
        assert_eq!(r[0], None);
        assert!(observed_order(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn slope_fits() {
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|k| {
                let s = 0.1 / 2f64.powi(k);
                (s, 3.0 * s * s)
            })
            .collect();
        assert!((fit_loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert!(
            (fit_linear_slope(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap() - 2.0).abs() < 1e-12
        );
        assert!(fit_loglog_slope(&[(1.0, 0.0), (0.5, 1.0)]).is_err());
    }

    fn random_field(g: &Arc<Grid1D>, s: &[f64]) -> WaveField {
        WaveField::from_fn(g.clone(), |x| {
            let k = (x * 10.0).abs() as usize;
            c((s[k % s.len()] * x).sin(), (s[(k + 1) % s.len()] + x).cos())
        })
    }

    proptest! {
        #[test]
        fn rates_are_scale_invariant(e in prop::collection::vec(1e-8f64..1.0, 2..6), k in 1e-6f64..1e6) {
            let pts: Vec<(f64, f64)> = e.iter().enumerate().map(|(i, &v)| (0.5f64.powi(i as i32), v)).collect();
            let scaled: Vec<(f64, f64)> = pts.iter().map(|&(s, v)| (s, v * k)).collect();
            let a = observed_order(&pts).unwrap();
            let b = observed_order(&scaled).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x.unwrap() - y.unwrap()).abs() < 1e-9);
            }
        }

        #[test]
        fn total_error_triangle(s1 in prop::collection::vec(-3.0f64..3.0, 1..6),
                                s2 in prop::collection::vec(-3.0f64..3.0, 1..6),
                                s3 in prop::collection::vec(-3.0f64..3.0, 1..6)) {
            let g = grid(-2.0, 2.0, 64);
            let (u, ue, un) = (random_field(&g, &s1), random_field(&g, &s2), random_field(&g, &s3));
            let hat = error_norms(&u, &ue).unwrap();
            let scheme = error_norms(&ue, &un).unwrap();
            let total = error_norms(&u, &un).unwrap();
            prop_assert!(total.l2 <= hat.l2 + scheme.l2 + 1e-12);
            prop_assert!(total.h1 <= hat.h1 + scheme.h1 + 1e-12);
            prop_assert!(total.linf <= hat.linf + scheme.linf + 1e-12);
        }

        #[test]
        fn energy_forms_differ_by_at_most_the_bound(s in prop::collection::vec(-3.0f64..3.0, 1..6),
                                                    ek in 1i32..7) {
            let g = grid(-4.0, 4.0, 256);
            let u = random_field(&g, &s);
            let eps = 10f64.powi(-ek);
            let e = energy(&u, -1.0, 0.0, RegVariant::Unregularized).unwrap();
            let ee = energy(&u, -1.0, eps, RegVariant::LinearEps).unwrap();
            let h = g.h();
            prop_assert!((e - ee).abs() <= 4.0 * eps * l1_norm(&u) + 10.0 * h * h);
        }
    }
}
