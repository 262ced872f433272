//! Uniform 1D grid, difference operators and the discrete inner products and
//! norms on the space of grid functions vanishing at both endpoints.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform grid on `[a, b]` with `m` intervals.
#[derive(Debug, Clone)]
pub struct Grid1D {
    a: f64,
    b: f64,
    m: usize,
    h: f64,
    nodes: Vec<f64>,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 intervals, got {m}"
            )));
        }
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidGrid(format!("need a < b, got [{a}, {b}]")));
        }
        let h = (b - a) / m as f64;
        // a + j*h rather than running sums, so node positions do not drift.
        let mut nodes: Vec<f64> = (0..=m).map(|j| a + j as f64 * h).collect();
        nodes[m] = b;
        Ok(Self { a, b, m, h, nodes })
    }

    /// Grid whose mesh size is `h`; fails unless `(b - a) / h` is an integer
    /// to within `1e-9` relative.
    pub fn with_spacing(a: f64, b: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "mesh size must be positive, got {h}"
            )));
        }
        let ratio = (b - a) / h;
        let m = ratio.round();
        if (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "h = {h} does not divide [{a}, {b}] into whole intervals"
            )));
        }
        Self::new(a, b, m as usize)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of intervals.
    pub fn intervals(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn x(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    /// Same endpoints, `factor` times as many intervals. Every node of `self`
    /// is a node of the result (index `j * factor`).
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidGrid(
                "refinement factor must be positive".into(),
            ));
        }
        Self::new(self.a, self.b, self.m * factor)
    }

    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.m == other.m && self.a == other.a && self.b == other.b
    }
}

impl fmt::Display for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] / {}", self.a, self.b, self.m)
    }
}

/// Complex grid function with homogeneous Dirichlet endpoints.
#[derive(Debug, Clone)]
pub struct WaveField {
    grid: Arc<Grid1D>,
    values: Vec<Complex64>,
}

impl WaveField {
    pub fn zeros(grid: Arc<Grid1D>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.m + 1];
        Self { grid, values }
    }

    /// Samples `f` at the nodes; the two endpoint values are set to zero.
    pub fn from_fn(grid: Arc<Grid1D>, f: impl Fn(f64) -> Complex64) -> Self {
        let m = grid.m;
        let values = grid
            .nodes
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                if j == 0 || j == m {
                    Complex64::new(0.0, 0.0)
                } else {
                    f(x)
                }
            })
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: Arc<Grid1D>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.m + 1 {
            return Err(Error::LengthMismatch {
                expected: grid.m + 1,
                found: values.len(),
            });
        }
        let zero = Complex64::new(0.0, 0.0);
        if values[0] != zero || values[grid.m] != zero {
            return Err(Error::InvalidInput(
                "field must vanish at both boundary nodes".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<Grid1D> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Mutable access to the interior values only, so the endpoints stay zero.
    pub fn interior_mut(&mut self) -> &mut [Complex64] {
        let m = self.grid.m;
        &mut self.values[1..m]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn scaled(&self, s: Complex64) -> WaveField {
        self.map(|z| z * s)
    }

    pub fn conj(&self) -> WaveField {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> WaveField {
        let mut out = self.clone();
        for z in out.interior_mut() {
            *z = f(*z);
        }
        out
    }

    pub fn sub(&self, other: &WaveField) -> Result<WaveField> {
        check_same_grid(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(WaveField {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Restriction of a field on a refined grid onto `coarse`, by node injection.
    pub fn restrict_to(&self, coarse: &Arc<Grid1D>) -> Result<WaveField> {
        let fine = &self.grid;
        if fine.a != coarse.a || fine.b != coarse.b || !fine.m.is_multiple_of(coarse.m) {
            return Err(Error::GridMismatch {
                expected: format!("a refinement of {coarse}"),
                found: fine.to_string(),
            });
        }
        let stride = fine.m / coarse.m;
        let values = (0..=coarse.m).map(|j| self.values[j * stride]).collect();
        Ok(WaveField {
            grid: coarse.clone(),
            values,
        })
    }
}

pub(crate) fn check_same_grid(u: &WaveField, v: &WaveField) -> Result<()> {
    if u.grid.same_as(&v.grid) {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            expected: u.grid.to_string(),
            found: v.grid.to_string(),
        })
    }
}

/// Centered second difference; zero at the endpoints.
pub fn delta_x2(u: &WaveField) -> WaveField {
    let mut out = WaveField::zeros(u.grid.clone());
    delta_x2_into(u.values(), u.grid.h, &mut out.values);
    out
}

/// In-place form of [`delta_x2`] over raw node values.
pub(crate) fn delta_x2_into(u: &[Complex64], h: f64, out: &mut [Complex64]) {
    let m = u.len() - 1;
    let inv_h2 = 1.0 / (h * h);
    for j in 1..m {
        out[j] = (u[j + 1] - 2.0 * u[j] + u[j - 1]) * inv_h2;
    }
    out[0] = Complex64::new(0.0, 0.0);
    out[m] = Complex64::new(0.0, 0.0);
}

/// Forward difference, `M` values indexed `0..M`.
pub fn delta_x_plus(u: &WaveField) -> Vec<Complex64> {
    let inv_h = 1.0 / u.grid.h;
    u.values.windows(2).map(|w| (w[1] - w[0]) * inv_h).collect()
}

/// `(u, v) = h * sum_{j=1}^{M-1} u_j conj(v_j)`
pub fn inner(u: &WaveField, v: &WaveField) -> Result<Complex64> {
    check_same_grid(u, v)?;
    let m = u.grid.m;
    let s: Complex64 = u.values[1..m]
        .iter()
        .zip(&v.values[1..m])
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(s * u.grid.h)
}

/// `<p, q> = h * sum_{j=0}^{M-1} p_j conj(q_j)` for forward-difference arrays.
pub fn inner_fwd(p: &[Complex64], q: &[Complex64], h: f64) -> Result<Complex64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    let s: Complex64 = p.iter().zip(q).map(|(a, b)| a * b.conj()).sum();
    Ok(s * h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1_semi: f64,
    pub h1: f64,
    pub linf: f64,
}

pub fn norms(u: &WaveField) -> Norms {
    let h = u.grid.h;
    let m = u.grid.m;
    let l2_sq: f64 = h * u.values[1..m].iter().map(|z| z.norm_sqr()).sum::<f64>();
    let semi_sq: f64 = h * u
        .values
        .windows(2)
        .map(|w| ((w[1] - w[0]) / h).norm_sqr())
        .sum::<f64>();
    Norms {
        l2: l2_sq.sqrt(),
        h1_semi: semi_sq.sqrt(),
        h1: (l2_sq + semi_sq).sqrt(),
        linf: u.max_abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::simpson;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid(a: f64, b: f64, m: usize) -> Arc<Grid1D> {
        Arc::new(Grid1D::new(a, b, m).unwrap())
    }

    #[test]
    fn grid_invariants() {
        let g = Grid1D::new(-12.0, 12.0, 240).unwrap();
        assert_eq!(g.nodes()[0], -12.0);
        assert_eq!(g.nodes()[240], 12.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!((g.h() - 0.1).abs() < 1e-15);
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        assert!(Grid1D::new(1.0, 0.0, 4).is_err());
        assert!(Grid1D::with_spacing(-12.0, 12.0, 0.1).is_ok());
        assert!(Grid1D::with_spacing(-12.0, 12.0, 0.07).is_err());
    }

    #[test]
    fn from_values_enforces_dirichlet() {
        let g = grid(0.0, 1.0, 2);
        assert!(WaveField::from_values(g.clone(), vec![c(0., 0.); 2]).is_err());
        assert!(WaveField::from_values(g.clone(), vec![c(1., 0.), c(0., 0.), c(0., 0.)]).is_err());
        assert!(WaveField::from_values(g, vec![c(0., 0.), c(1., 0.), c(0., 0.)]).is_ok());
    }

    #[test]
    fn delta_x2_zero() {
        let u = WaveField::zeros(grid(0.0, 1.0, 8));
        assert!(delta_x2(&u).values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn delta_x2_exact_on_quadratic() {
        let g = grid(0.0, 1.0, 4);
        let u = WaveField::from_fn(g, |x| c(x * (1.0 - x), 0.0));
        let d = delta_x2(&u);
        for j in 1..4 {
            assert!(
                (d.values()[j] - c(-2.0, 0.0)).norm() < 1e-12,
                "j={j}: {}",
                d.values()[j]
            );
        }
        assert_eq!(d.values()[0], c(0.0, 0.0));
        assert_eq!(d.values()[4], c(0.0, 0.0));
    }

    #[test]
    fn delta_x2_on_sine_mode() {
        let g = grid(0.0, 1.0, 64);
        let h = g.h();
        let u = WaveField::from_fn(g, |x| c((PI * x).sin(), 0.0));
        let d = delta_x2(&u);
        let bound = PI.powi(4) * h * h / 12.0 * 1.01;
        let dev = d
            .values()
            .iter()
            .zip(u.values())
            .map(|(a, b)| (a + PI * PI * b).norm())
            .fold(0.0, f64::max);
        assert!(dev <= bound, "dev {dev} > {bound}");
    }

    #[test]
    fn delta_x2_second_order() {
        // e^{-x^2} * (1 + i x), analytic second derivative
        let f = |x: f64| c(1.0, x) * (-x * x).exp();
        let f2 = |x: f64| {
            let e = (-x * x).exp();
            // d2/dx2 [e^{-x^2}] = (4x^2 - 2) e^{-x^2};  d2/dx2 [x e^{-x^2}] = (4x^3 - 6x) e^{-x^2}
            c(4.0 * x * x - 2.0, 4.0 * x * x * x - 6.0 * x) * e
        };
        let errs: Vec<f64> = [256usize, 512, 1024, 2048]
            .iter()
            .map(|&m| {
                let g = grid(-8.0, 8.0, m);
                let u = WaveField::from_fn(g.clone(), f);
                let d = delta_x2(&u);
                (1..m)
                    .map(|j| (d.values()[j] - f2(g.x(j))).norm())
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!((rate - 2.0).abs() < 0.05, "rate {rate}");
        }
    }

    #[test]
    fn forward_difference_small_cases() {
        let g = grid(0.0, 2.0, 2);
        let cc = c(1.5, -0.5);
        let u = WaveField::from_values(g, vec![c(0., 0.), cc, c(0., 0.)]).unwrap();
        assert_eq!(delta_x_plus(&u), vec![cc, -cc]);

        let z = WaveField::zeros(grid(0.0, 1.0, 5));
        assert!(delta_x_plus(&z).iter().all(|v| v.norm() == 0.0));

        // linear profile, last node forced to zero
        let g = grid(0.0, 1.0, 4);
        let u = WaveField::from_fn(g, |x| c(x, 0.0));
        let d = delta_x_plus(&u);
        assert_eq!(d.len(), 4);
        for v in &d[..3] {
            assert!((v - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn norms_hand_example() {
        let g = grid(0.0, 2.0, 2);
        let u = WaveField::from_values(g, vec![c(0., 0.), c(3., 4.), c(0., 0.)]).unwrap();
        let n = norms(&u);
        assert!((n.l2 - 5.0).abs() < 1e-14);
        assert!((n.linf - 5.0).abs() < 1e-14);
        assert!((n.h1_semi - 50f64.sqrt()).abs() < 1e-14);
        assert!((n.h1 - 75f64.sqrt()).abs() < 1e-14);

        let n0 = norms(&WaveField::zeros(grid(0.0, 1.0, 3)));
        assert_eq!(
            n0,
            Norms {
                l2: 0.0,
                h1_semi: 0.0,
                h1: 0.0,
                linf: 0.0
            }
        );
    }

    #[test]
    fn gaussian_l2_against_quadrature() {
        let g = grid(-12.0, 12.0, 4096);
        let u = WaveField::from_fn(g, |x| c((-x * x / 2.0).exp(), 0.0));
        let oracle = simpson(|x| (-x * x).exp(), -12.0, 12.0, 1e-13).sqrt();
        assert!((norms(&u).l2 - oracle).abs() < 1e-4);
        assert!((oracle - PI.powf(0.25)).abs() < 1e-10);
    }

    #[test]
    fn inner_with_zero_and_mismatch() {
        let g = grid(0.0, 1.0, 6);
        let u = WaveField::from_fn(g.clone(), |x| c(x, 1.0 - x));
        let z = WaveField::zeros(g);
        assert_eq!(inner(&u, &z).unwrap(), c(0.0, 0.0));
        let other = WaveField::zeros(grid(0.0, 1.0, 7));
        assert!(inner(&u, &other).is_err());
        assert!(inner_fwd(&[c(1., 0.)], &[], 0.1).is_err());
    }

    #[test]
    fn restrict_picks_coarse_nodes() {
        let coarse = grid(-1.0, 1.0, 4);
        let fine = Arc::new(coarse.refine(4).unwrap());
        let u = WaveField::from_fn(fine, |x| c(x * x - 1.0, x));
        let r = u.restrict_to(&coarse).unwrap();
        for j in 1..4 {
            let x = coarse.x(j);
            assert!((r.values()[j] - c(x * x - 1.0, x)).norm() < 1e-15);
        }
        assert!(WaveField::zeros(grid(-1.0, 1.0, 6))
            .restrict_to(&coarse)
            .is_err());
    }

    fn random_field(m: usize, seed: &[f64]) -> WaveField {
        let g = grid(-3.0, 5.0, m);
        let mut u = WaveField::zeros(g);
        for (j, z) in u.interior_mut().iter_mut().enumerate() {
            let s = seed[j % seed.len()];
            *z = c((s * (j as f64 + 1.3)).sin(), (s * 0.7 + j as f64).cos());
        }
        u
    }

    proptest! {
        #[test]
        fn summation_by_parts(m in 4usize..=512, s1 in prop::collection::vec(-3.0f64..3.0, 1..8),
                              s2 in prop::collection::vec(-3.0f64..3.0, 1..8)) {
            let u = random_field(m, &s1);
            let v = random_field(m, &s2);
            let h = u.grid().h();
            let lhs = -inner(&delta_x2(&u), &v).unwrap();
            let mid = inner_fwd(&delta_x_plus(&u), &delta_x_plus(&v), h).unwrap();
            let rhs = -inner(&u, &delta_x2(&v)).unwrap();
            let scale = lhs.norm().max(mid.norm()).max(1e-300);
            prop_assert!((lhs - mid).norm() <= 1e-12 * scale);
            prop_assert!((mid - rhs).norm() <= 1e-12 * scale);
        }

        #[test]
        fn inner_is_hermitian(m in 2usize..200, s1 in prop::collection::vec(-3.0f64..3.0, 1..8),
                              s2 in prop::collection::vec(-3.0f64..3.0, 1..8)) {
            let u = random_field(m, &s1);
            let v = random_field(m, &s2);
            let uv = inner(&u, &v).unwrap();
            let vu = inner(&v, &u).unwrap();
            prop_assert!((uv - vu.conj()).norm() <= 1e-13 * uv.norm().max(1.0));
            let uu = inner(&u, &u).unwrap();
            prop_assert!(uu.im.abs() <= 1e-15 * uu.re.max(1.0));
            prop_assert!(uu.re >= 0.0);
        }

        #[test]
        fn h1_pythagoras(m in 2usize..400, s in prop::collection::vec(-3.0f64..3.0, 1..8)) {
            let n = norms(&random_field(m, &s));
            prop_assert!(n.l2 >= 0.0 && n.h1_semi >= 0.0 && n.linf >= 0.0);
            let lhs = n.h1 * n.h1;
            let rhs = n.l2 * n.l2 + n.h1_semi * n.h1_semi;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1e-300));
        }
    }
}
