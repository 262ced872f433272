//! Semi-implicit finite-difference time stepping for the regularized equation
//! `i u_t + u_xx = lambda u ln(eps + |u|)^2` on `[a, b]` with zero Dirichlet data.
//!
//! Leapfrog in time, Laplacian averaged over levels `k - 1` and `k + 1`, log term
//! explicit at level `k`. Rearranged, each step solves
//!
//! ```text
//! [(i/2tau) I + (1/2) dxx] u^{k+1} = [(i/2tau) I - (1/2) dxx] u^{k-1} + lambda g(u^k)
//! ```
//!
//! with a matrix that never changes, so it is factored once per run.

mod tridiag;

use std::sync::Arc;

use num_complex::Complex64;

pub use tridiag::{build_factor, TridiagFactor};

use crate::diagnostics::ConservedSeries;
use crate::error::{Error, Result};
use crate::grid::{check_same_grid, delta_x2, Grid1D, WaveField};
use crate::nonlinearity::{log_potential, log_term, RegVariant};

/// How the first level `u^1` is produced from the Taylor expansion
/// `u^1 = u^0 + tau * i (u0'' - lambda g(u0))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirstStep {
    /// Use a caller-supplied exact `u0''`.
    AnalyticSecondDerivative,
    /// Use the centered second difference of the sampled data.
    #[default]
    DiscreteSecondDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub lambda: f64,
    pub eps: f64,
    pub tau: f64,
    pub t_end: f64,
    pub variant: RegVariant,
    pub first_step: FirstStep,
    pub stability_guard: bool,
    /// Record conserved quantities every this many steps (and at the last step).
    pub monitor_stride: Option<usize>,
}

impl SolverParams {
    pub fn new(lambda: f64, eps: f64, tau: f64, t_end: f64) -> Self {
        Self {
            lambda,
            eps,
            tau,
            t_end,
            variant: RegVariant::LinearEps,
            first_step: FirstStep::default(),
            stability_guard: true,
            monitor_stride: None,
        }
    }

    pub fn with_variant(mut self, variant: RegVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_first_step(mut self, mode: FirstStep) -> Self {
        self.first_step = mode;
        self
    }

    pub fn with_monitor(mut self, stride: usize) -> Self {
        self.monitor_stride = Some(stride.max(1));
        self
    }

    pub fn with_stability_guard(mut self, on: bool) -> Self {
        self.stability_guard = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidInput(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(self.eps >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "eps must be >= 0, got {}",
                self.eps
            )));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidInput("lambda must be finite".into()));
        }
        self.step_count().map(|_| ())
    }

    /// `N = t_end / tau`, which must be a positive whole number.
    pub fn step_count(&self) -> Result<usize> {
        steps_for(self.t_end, self.tau)
    }
}

pub(crate) fn steps_for(t: f64, tau: f64) -> Result<usize> {
    let ratio = t / tau;
    let n = ratio.round();
    if !(t > 0.0) || n < 1.0 || (ratio - n).abs() > 1e-9 * n {
        return Err(Error::InvalidInput(format!(
            "time {t} is not a positive whole multiple of tau = {tau}"
        )));
    }
    Ok(n as usize)
}

/// Largest admissible step from von Neumann analysis of the scheme. For the
/// linear-eps form this is `1 / (2 |lambda| max{|ln eps|, ln(eps + max|u|)})`.
pub fn stability_bound(max_abs: f64, eps: f64, lambda: f64, variant: RegVariant) -> f64 {
    let lam = lambda.abs();
    if lam == 0.0 {
        return f64::INFINITY;
    }
    let worst = match variant {
        RegVariant::LinearEps => 2.0 * eps.ln().abs().max((eps + max_abs).ln()),
        RegVariant::SquaredEps => eps.ln().abs().max((eps + max_abs * max_abs).ln()),
        // the potential is unbounded below as |u| -> 0
        RegVariant::Unregularized => f64::INFINITY,
    };
    1.0 / (lam * worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityViolation {
    pub step: usize,
    pub bound: f64,
    pub tau: f64,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub step: usize,
    pub field: WaveField,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub snapshots: Vec<Snapshot>,
    pub final_field: WaveField,
    pub steps: usize,
    pub conserved: Option<ConservedSeries>,
    pub stability_violations: Vec<StabilityViolation>,
}

impl SolveOutput {
    pub fn snapshot_at(&self, time: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.time == time)
    }
}

/// Taylor first step. `u0_xx` is required in analytic mode and ignored otherwise.
pub fn first_step(
    u0: &WaveField,
    u0_xx: Option<&WaveField>,
    p: &SolverParams,
) -> Result<WaveField> {
    let second = match p.first_step {
        FirstStep::AnalyticSecondDerivative => {
            let d = u0_xx.ok_or(Error::MissingSecondDerivative)?;
            check_same_grid(u0, d)?;
            d.clone()
        }
        FirstStep::DiscreteSecondDifference => delta_x2(u0),
    };
    let i = Complex64::new(0.0, 1.0);
    let m = u0.grid().intervals();
    let mut values = vec![Complex64::new(0.0, 0.0); m + 1];
    for ((v, &u), &d2) in values[1..m]
        .iter_mut()
        .zip(&u0.values()[1..m])
        .zip(&second.values()[1..m])
    {
        let u1 = i * (d2 - p.lambda * log_term(u, p.eps, p.variant));
        *v = u + p.tau * u1;
    }
    WaveField::from_values(u0.grid_arc().clone(), values)
}

/// Workspace for repeated leapfrog updates on one grid.
struct Stepper<'a> {
    factor: &'a TridiagFactor,
    h: f64,
    p: &'a SolverParams,
    rhs: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    fn new(factor: &'a TridiagFactor, grid: &Grid1D, p: &'a SolverParams) -> Result<Self> {
        if factor.size() != grid.intervals() - 1 {
            return Err(Error::LengthMismatch {
                expected: grid.intervals() - 1,
                found: factor.size(),
            });
        }
        Ok(Self {
            factor,
            h: grid.h(),
            p,
            rhs: vec![Complex64::new(0.0, 0.0); factor.size()],
        })
    }

    /// Writes `u^{k+1}` into `next` and returns `max_j |u^k_j|`.
    fn advance(&mut self, prev: &[Complex64], curr: &[Complex64], next: &mut [Complex64]) -> f64 {
        let m = prev.len() - 1;
        let half_inv_h2 = 0.5 / (self.h * self.h);
        let i_over = Complex64::new(0.0, 0.5 / self.p.tau);
        let (lambda, eps, variant) = (self.p.lambda, self.p.eps, self.p.variant);
        let mut max_abs = 0.0f64;
        for j in 1..m {
            let c = curr[j];
            let r = c.norm();
            max_abs = max_abs.max(r);
            let g = if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                c * log_potential(r, eps, variant)
            };
            let lap = (prev[j + 1] - 2.0 * prev[j] + prev[j - 1]) * half_inv_h2;
            self.rhs[j - 1] = i_over * prev[j] - lap + lambda * g;
        }
        self.factor.solve_in_place(&mut self.rhs);
        next[0] = Complex64::new(0.0, 0.0);
        next[m] = Complex64::new(0.0, 0.0);
        next[1..m].copy_from_slice(&self.rhs);
        max_abs
    }
}

fn all_finite(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// One leapfrog update `u^{k+1}` from `u^{k-1}` and `u^k`.
pub fn step(
    u_prev: &WaveField,
    u_curr: &WaveField,
    factor: &TridiagFactor,
    p: &SolverParams,
) -> Result<WaveField> {
    check_same_grid(u_prev, u_curr)?;
    let mut stepper = Stepper::new(factor, u_curr.grid(), p)?;
    let mut next = vec![Complex64::new(0.0, 0.0); u_curr.len()];
    stepper.advance(u_prev.values(), u_curr.values(), &mut next);
    if !all_finite(&next) {
        return Err(Error::BlowUp {
            step: 0,
            partial: None,
        });
    }
    WaveField::from_values(u_curr.grid_arc().clone(), next)
}

fn snapshot_steps(times: &[f64], tau: f64, n: usize) -> Result<Vec<usize>> {
    times
        .iter()
        .map(|&t| {
            let k = (t / tau).round();
            if !(t >= -0.25 * tau) || (t - k * tau).abs() > 0.25 * tau || k > n as f64 {
                Err(Error::InvalidInput(format!(
                    "snapshot time {t} is not a multiple of tau = {tau} within [0, {}]",
                    n as f64 * tau
                )))
            } else {
                Ok(k.max(0.0) as usize)
            }
        })
        .collect()
}

/// Full run: Taylor first step, then `N - 1` leapfrog steps.
///
/// Snapshot times must sit on the time grid (within `tau / 4`). With the
/// stability guard on, every level is checked against [`stability_bound`] and
/// violations are recorded, not fatal.
pub fn run(
    u0: &WaveField,
    u0_xx: Option<&WaveField>,
    grid: &Arc<Grid1D>,
    p: &SolverParams,
    snapshot_times: &[f64],
) -> Result<SolveOutput> {
    p.validate()?;
    if !u0.grid().same_as(grid) {
        return Err(Error::GridMismatch {
            expected: grid.to_string(),
            found: u0.grid().to_string(),
        });
    }
    let n = p.step_count()?;
    let snap_steps = snapshot_steps(snapshot_times, p.tau, n)?;
    let factor = build_factor(grid, p.tau)?;
    let mut stepper = Stepper::new(&factor, grid, p)?;

    let mut out = SolveOutput {
        snapshots: Vec::with_capacity(snapshot_times.len()),
        final_field: u0.clone(),
        steps: n,
        conserved: p.monitor_stride.map(|_| ConservedSeries::default()),
        stability_violations: Vec::new(),
    };

    let record = |out: &mut SolveOutput, k: usize, values: &[Complex64]| -> Result<()> {
        let wants_snap = snap_steps.contains(&k);
        let wants_monitor = p
            .monitor_stride
            .is_some_and(|s| k.is_multiple_of(s) || k == n);
        if !wants_snap && !wants_monitor {
            return Ok(());
        }
        let field = WaveField::from_values(grid.clone(), values.to_vec())?;
        if wants_monitor {
            if let Some(series) = out.conserved.as_mut() {
                series.push(k as f64 * p.tau, &field, p.lambda, p.eps, p.variant)?;
            }
        }
        if wants_snap {
            for (&t, _) in snapshot_times
                .iter()
                .zip(&snap_steps)
                .filter(|(_, &s)| s == k)
            {
                out.snapshots.push(Snapshot {
                    time: t,
                    step: k,
                    field: field.clone(),
                });
            }
        }
        Ok(())
    };
    let check = |out: &mut SolveOutput, k: usize, max_abs: f64| {
        if p.stability_guard {
            let bound = stability_bound(max_abs, p.eps, p.lambda, p.variant);
            if p.tau > bound {
                out.stability_violations.push(StabilityViolation {
                    step: k,
                    bound,
                    tau: p.tau,
                });
            }
        }
    };

    let mut prev = u0.values().to_vec();
    record(&mut out, 0, &prev)?;
    check(&mut out, 0, u0.max_abs());

    let u1 = first_step(u0, u0_xx, p)?;
    let mut curr = u1.values().to_vec();
    if !all_finite(&curr) {
        return Err(blow_up(out, 1, grid, &prev));
    }
    record(&mut out, 1, &curr)?;

    let mut next = vec![Complex64::new(0.0, 0.0); prev.len()];
    for k in 1..n {
        let max_abs = stepper.advance(&prev, &curr, &mut next);
        check(&mut out, k, max_abs);
        if !all_finite(&next) {
            return Err(blow_up(out, k + 1, grid, &curr));
        }
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
        record(&mut out, k + 1, &curr)?;
    }
    out.final_field = WaveField::from_values(grid.clone(), curr)?;
    out.snapshots.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(out)
}

fn blow_up(
    mut out: SolveOutput,
    step: usize,
    grid: &Arc<Grid1D>,
    last_good: &[Complex64],
) -> Error {
    if let Ok(f) = WaveField::from_values(grid.clone(), last_good.to_vec()) {
        out.final_field = f;
    }
    out.steps = step - 1;
    Error::BlowUp {
        step,
        partial: Some(Box::new(out)),
    }
}
