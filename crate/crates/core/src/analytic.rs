//! Closed-form reference solutions: Gaussian data stay Gaussian, with width and
//! phase driven by a small ODE system; the moving Gausson is the stationary
//! special case. Also the two experiment initial data.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Parameters of `u0(x) = b0 exp(-(a0/2) x^2 + i v x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub a0: Complex64,
    pub b0: Complex64,
    pub v: f64,
    pub lambda: f64,
}

impl GaussianParams {
    pub fn new(a0: Complex64, b0: Complex64, v: f64, lambda: f64) -> Result<Self> {
        if !(a0.re > 0.0) {
            return Err(Error::Domain(format!("Re(a0) must be positive, got {a0}")));
        }
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "lambda must be finite and nonzero, got {lambda}"
            )));
        }
        Ok(Self { a0, b0, v, lambda })
    }

    pub fn alpha0(&self) -> f64 {
        self.a0.re
    }

    pub fn initial(&self, x: f64) -> Complex64 {
        self.b0 * (-(self.a0 / 2.0) * x * x + Complex64::new(0.0, self.v * x)).exp()
    }
}

/// Time series of `(r, r', phi)` on a fixed step.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub r: Vec<f64>,
    pub r_dot: Vec<f64>,
    pub phi: Vec<f64>,
}

impl OdeTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn ode_rhs(p: &GaussianParams, y: [f64; 3]) -> [f64; 3] {
    let [r, r_dot, _phi] = y;
    let alpha = p.alpha0();
    let lam = p.lambda;
    let ln_b0_sq = p.b0.norm_sqr().ln();
    [
        r_dot,
        4.0 * alpha * alpha / (r * r * r) + 4.0 * lam * alpha / r,
        alpha / (r * r) + lam * ln_b0_sq - lam * r.ln(),
    ]
}

fn rk4_step(p: &GaussianParams, y: [f64; 3], dt: f64) -> [f64; 3] {
    let add =
        |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = ode_rhs(p, y);
    let k2 = ode_rhs(p, add(y, k1, dt / 2.0));
    let k3 = ode_rhs(p, add(y, k2, dt / 2.0));
    let k4 = ode_rhs(p, add(y, k3, dt));
    let mut out = y;
    for i in 0..3 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrates the width/phase system with classical RK4 at fixed step `dt`,
/// storing every step. The final step is shortened if `dt` does not divide
/// `t_end`.
pub fn solve_gaussian_ode(p: &GaussianParams, t_end: f64, dt: f64) -> Result<OdeTrajectory> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    if t_end > 0.0 && dt > t_end {
        return Err(Error::InvalidInput(format!(
            "dt = {dt} exceeds t_end = {t_end}"
        )));
    }
    let steps = if t_end == 0.0 {
        0
    } else {
        (t_end / dt - 1e-9).ceil() as usize
    };
    let mut traj = OdeTrajectory {
        times: Vec::with_capacity(steps + 1),
        r: Vec::with_capacity(steps + 1),
        r_dot: Vec::with_capacity(steps + 1),
        phi: Vec::with_capacity(steps + 1),
    };
    let mut y = [1.0, -2.0 * p.a0.im, 0.0];
    let push = |traj: &mut OdeTrajectory, t: f64, y: [f64; 3]| {
        traj.times.push(t);
        traj.r.push(y[0]);
        traj.r_dot.push(y[1]);
        traj.phi.push(y[2]);
    };
    push(&mut traj, 0.0, y);
    for k in 1..=steps {
        let t_prev = (k - 1) as f64 * dt;
        let t = if k == steps { t_end } else { k as f64 * dt };
        y = rk4_step(p, y, t - t_prev);
        if !(y[0] > 0.0) || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Singularity { time: t });
        }
        push(&mut traj, t, y);
    }
    Ok(traj)
}

/// Gaussian solution at node `x`, time index `k` of `traj`.
pub fn gaussian_solution(
    p: &GaussianParams,
    traj: &OdeTrajectory,
    x: f64,
    k: usize,
) -> Result<Complex64> {
    if k >= traj.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: traj.len(),
        });
    }
    let t = traj.times[k];
    let r = traj.r[k];
    let r_dot = traj.r_dot[k];
    let phi = traj.phi[k];
    let xi = x - 2.0 * p.v * t;
    let y = Complex64::new(
        -p.alpha0() * xi * xi / (2.0 * r * r),
        -phi + r_dot / r * xi * xi / 4.0,
    );
    let phase = Complex64::new(0.0, p.v * x - p.v * p.v * t);
    Ok(p.b0 / r.sqrt() * (phase + y).exp())
}

/// Phase frequency of the Gausson, `lambda (ln|b0|^2 - 1)`.
pub fn gausson_frequency(lambda: f64, b0: Complex64) -> f64 {
    lambda * (b0.norm_sqr().ln() - 1.0)
}

/// Uniformly moving Gausson `b0 exp((lambda/2)(x - 2vt)^2 + i(vx - (phi0 + v^2) t))`.
pub fn moving_gausson(lambda: f64, v: f64, b0: Complex64, x: f64, t: f64) -> Result<Complex64> {
    if !(lambda < 0.0) {
        return Err(Error::Domain(format!(
            "the Gausson needs lambda < 0, got {lambda}"
        )));
    }
    Ok(moving_gausson_unchecked(lambda, v, b0, x, t))
}

#[inline]
pub(crate) fn moving_gausson_unchecked(
    lambda: f64,
    v: f64,
    b0: Complex64,
    x: f64,
    t: f64,
) -> Complex64 {
    let phi0 = gausson_frequency(lambda, b0);
    let xi = x - 2.0 * v * t;
    b0 * Complex64::new(lambda / 2.0 * xi * xi, v * x - (phi0 + v * v) * t).exp()
}

/// Amplitude `(-lambda/pi)^{1/4}` of the unit-mass Gausson.
pub fn case1_amplitude(lambda: f64) -> f64 {
    (-lambda / PI).powf(0.25)
}

/// Gaussian data `(-lambda/pi)^{1/4} exp(i v x + (lambda/2) x^2)`; the moving
/// Gausson with `b0 = (-lambda/pi)^{1/4}` is the exact solution.
pub fn initial_case1(x: f64, lambda: f64, v: f64) -> Complex64 {
    case1_amplitude(lambda) * Complex64::new(lambda / 2.0 * x * x, v * x).exp()
}

/// Second derivative of [`initial_case1`]: `(lambda + (iv + lambda x)^2) u0`.
pub fn initial_case1_xx(x: f64, lambda: f64, v: f64) -> Complex64 {
    let d = Complex64::new(lambda * x, v);
    (lambda + d * d) * initial_case1(x, lambda, v)
}

/// `tanh(x) exp(-x^2)`: vanishes at the origin, where `ln|u0|^2` is singular.
pub fn initial_case2(x: f64) -> Complex64 {
    Complex64::new(x.tanh() * (-x * x).exp(), 0.0)
}

pub fn initial_case2_xx(x: f64) -> Complex64 {
    let t = x.tanh();
    let s = 1.0 - t * t;
    let g = (-x * x).exp();
    Complex64::new(
        g * (-2.0 * t * s - 4.0 * x * s + t * (4.0 * x * x - 2.0)),
        0.0,
    )
}
