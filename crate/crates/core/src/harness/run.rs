//! Running the solves of a sweep and comparing them with the reference.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::record::{Metric, ResultRow};
use super::{ExperimentConfig, Reference, CASE1_VELOCITY};
use crate::analytic::{case1_amplitude, moving_gausson_unchecked};
use crate::diagnostics::{energy, error_norms, ConservedSeries};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, WaveField};
use crate::nonlinearity::RegVariant;
use crate::solver::{self, steps_for, SolveOutput, SolverParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Job {
    pub eps: f64,
    pub h: f64,
    pub tau: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct JobResult {
    pub job: Job,
    /// One row per requested time.
    pub rows: Vec<ResultRow>,
    pub conserved: Option<ConservedSeries>,
    /// Steps at which the stability check failed.
    pub violation_steps: Vec<usize>,
}

struct RefSolution {
    eps: f64,
    /// `(time, field, energy)` for each requested time
    states: Vec<(f64, WaveField, f64)>,
}

pub(crate) fn par_map<T, R, F>(threads: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(f).collect())
}

fn solve(
    cfg: &ExperimentConfig,
    eps: f64,
    variant: RegVariant,
    h: f64,
    tau: f64,
    times: &[f64],
    monitor: Option<usize>,
) -> Result<SolveOutput> {
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let grid = Arc::new(Grid1D::with_spacing(cfg.domain.0, cfg.domain.1, h)?);
    let u0 = WaveField::from_fn(grid.clone(), |x| cfg.case.initial(x, cfg.lambda));
    let u0_xx = match cfg.first_step {
        solver::FirstStep::AnalyticSecondDerivative => {
            Some(WaveField::from_fn(grid.clone(), |x| {
                cfg.case.initial_xx(x, cfg.lambda)
            }))
        }
        solver::FirstStep::DiscreteSecondDifference => None,
    };
    let mut p = SolverParams::new(cfg.lambda, eps, tau, t_end)
        .with_variant(variant)
        .with_first_step(cfg.first_step);
    if let Some(s) = monitor {
        p = p.with_monitor(s);
    }
    solver::run(&u0, u0_xx.as_ref(), &grid, &p, times)
}

fn reference_solutions(
    cfg: &ExperimentConfig,
    jobs: &[Job],
    times: &[f64],
) -> Result<Vec<RefSolution>> {
    let Reference::FineGrid { scale, eps_ref } = cfg.reference else {
        return Ok(Vec::new());
    };
    let h_min = jobs.iter().map(|j| j.h).fold(f64::INFINITY, f64::min);
    let tau_min = jobs.iter().map(|j| j.tau).fold(f64::INFINITY, f64::min);
    let (h_ref, tau_ref) = (h_min / scale as f64, tau_min / scale as f64);
    let (variant, keys) = match eps_ref {
        Some(e) => (RegVariant::LinearEps, vec![e]),
        None => {
            let mut keys: Vec<f64> = Vec::new();
            for j in jobs {
                if !keys.contains(&j.eps) {
                    keys.push(j.eps);
                }
            }
            (cfg.variant, keys)
        }
    };
    par_map(cfg.threads, &keys, |&eps| {
        let out = solve(cfg, eps, variant, h_ref, tau_ref, times, None).map_err(|e| match e {
            Error::BlowUp { step, .. } => Error::InvalidInput(format!(
                "reference solve (eps = {eps}) blew up at step {step}"
            )),
            other => other,
        })?;
        let states = out
            .snapshots
            .into_iter()
            .map(|s| {
                let e = match eps_ref {
                    Some(_) => energy(&s.field, cfg.lambda, 0.0, RegVariant::Unregularized),
                    None => energy(&s.field, cfg.lambda, eps, variant),
                }?;
                Ok((s.time, s.field, e))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RefSolution { eps, states })
    })
}

/// Reference field on `grid` and its energy at time `t`.
fn reference_at(
    cfg: &ExperimentConfig,
    refs: &[RefSolution],
    eps: f64,
    grid: &Arc<Grid1D>,
    t: f64,
) -> Result<Option<(WaveField, f64)>> {
    match cfg.reference {
        Reference::None => Ok(None),
        Reference::Analytic => {
            let b0 = Complex64::new(case1_amplitude(cfg.lambda), 0.0);
            let exact = WaveField::from_fn(grid.clone(), |x| {
                moving_gausson_unchecked(cfg.lambda, CASE1_VELOCITY, b0, x, t)
            });
            let e = energy(&exact, cfg.lambda, 0.0, RegVariant::Unregularized)?;
            Ok(Some((exact, e)))
        }
        Reference::FineGrid { eps_ref, .. } => {
            let key = eps_ref.unwrap_or(eps);
            let r = refs
                .iter()
                .find(|r| r.eps == key)
                .ok_or_else(|| Error::InvalidInput(format!("no reference for eps = {key}")))?;
            let (_, field, e) =
                r.states.iter().find(|s| s.0 == t).ok_or_else(|| {
                    Error::InvalidInput(format!("no reference snapshot at t = {t}"))
                })?;
            Ok(Some((field.restrict_to(grid)?, *e)))
        }
    }
}

/// The first `n` samples of a conserved series.
pub(crate) fn series_prefix(series: &ConservedSeries, n: usize) -> ConservedSeries {
    ConservedSeries {
        times: series.times[..n].to_vec(),
        mass: series.mass[..n].to_vec(),
        momentum: series.momentum[..n].to_vec(),
        energy: series.energy[..n].to_vec(),
    }
}

fn dump_field(dir: &Path, cfg: &ExperimentConfig, job: &Job, t: f64, u: &WaveField) -> Result<()> {
    fs::create_dir_all(dir)?;
    let name = format!(
        "case{}_{}_eps{}_h{}_tau{}_t{}.csv",
        cfg.case, cfg.variant, job.eps, job.h, job.tau, t
    );
    let mut w = csv::Writer::from_path(dir.join(name))?;
    w.write_record(["x", "re", "im"])?;
    for (x, z) in u.grid().nodes().iter().zip(u.values()) {
        w.serialize((x, z.re, z.im))?;
    }
    w.flush()?;
    Ok(())
}

fn blank_row(cfg: &ExperimentConfig, job: &Job, t_end: f64, t: f64) -> ResultRow {
    ResultRow {
        case: cfg.case.number(),
        variant: cfg.variant,
        eps: job.eps,
        h: job.h,
        tau: job.tau,
        t_end,
        t_eval: t,
        err_l2: Metric::NotComputed,
        err_h1: Metric::NotComputed,
        err_linf: Metric::NotComputed,
        err_energy: Metric::NotComputed,
        mass_drift: Metric::NotComputed,
        momentum_drift: Metric::NotComputed,
        energy_drift: Metric::NotComputed,
        steps: 0,
        stab_violations: 0,
        wall_ms: 0,
    }
}

fn run_job(
    cfg: &ExperimentConfig,
    job: &Job,
    times: &[f64],
    refs: &[RefSolution],
) -> Result<JobResult> {
    let start = Instant::now();
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let n = steps_for(t_end, job.tau)?;
    let stride = cfg.monitor_stride.unwrap_or((n / 100).max(1));
    let mut rows = Vec::with_capacity(times.len());
    let mut violation_steps = Vec::new();
    let conserved = match solve(
        cfg,
        job.eps,
        cfg.variant,
        job.h,
        job.tau,
        times,
        Some(stride),
    ) {
        Ok(out) => {
            let series = out.conserved.clone().unwrap_or_default();
            violation_steps = out.stability_violations.iter().map(|v| v.step).collect();
            for snap in &out.snapshots {
                let mut row = blank_row(cfg, job, t_end, snap.time);
                let u = &snap.field;
                if let Some((u_ref, e_ref)) =
                    reference_at(cfg, refs, job.eps, u.grid_arc(), snap.time)?
                {
                    let err = error_norms(&u_ref, u)?;
                    let e_num = energy(u, cfg.lambda, job.eps, cfg.variant)?;
                    row.err_l2 = err.l2.into();
                    row.err_h1 = err.h1.into();
                    row.err_linf = err.linf.into();
                    row.err_energy = (e_ref - e_num).abs().into();
                }
                let n = series
                    .times
                    .iter()
                    .take_while(|&&s| s <= snap.time + 0.25 * job.tau)
                    .count();
                let upto = series_prefix(&series, n);
                row.mass_drift = upto.mass_drift().into();
                row.momentum_drift = upto.momentum_drift().into();
                row.energy_drift = upto.energy_drift().into();
                row.steps = snap.step;
                row.stab_violations = out
                    .stability_violations
                    .iter()
                    .filter(|v| v.step <= snap.step)
                    .count();
                if let Some(dir) = &cfg.dump_dir {
                    dump_field(dir, cfg, job, snap.time, u)?;
                }
                rows.push(row);
            }
            Some(series)
        }
        Err(Error::BlowUp { step, partial }) => {
            if let Some(p) = &partial {
                violation_steps = p.stability_violations.iter().map(|v| v.step).collect();
            }
            let violations = violation_steps.len();
            for &t in times {
                let mut row = blank_row(cfg, job, t_end, t);
                row.err_l2 = Metric::Failed;
                row.err_h1 = Metric::Failed;
                row.err_linf = Metric::Failed;
                row.err_energy = Metric::Failed;
                row.mass_drift = Metric::Failed;
                row.momentum_drift = Metric::Failed;
                row.energy_drift = Metric::Failed;
                row.steps = step;
                row.stab_violations = violations;
                rows.push(row);
            }
            None
        }
        Err(e) => return Err(e),
    };
    let ms = start.elapsed().as_millis() as u64;
    for r in &mut rows {
        r.wall_ms = ms;
    }
    Ok(JobResult {
        job: *job,
        rows,
        conserved,
        violation_steps,
    })
}

/// Runs every job up to the last of `times` and reports one row per job and time,
/// in job order.
pub(crate) fn sweep(cfg: &ExperimentConfig, jobs: &[Job], times: &[f64]) -> Result<Vec<JobResult>> {
    cfg.validate()?;
    if jobs.is_empty() || times.is_empty() {
        return Err(Error::InvalidInput("nothing to run".into()));
    }
    let refs = reference_solutions(cfg, jobs, times)?;
    par_map(cfg.threads, jobs, |job| run_job(cfg, job, times, &refs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Case;

    fn small(case: Case) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(case);
        c.domain = (-8.0, 8.0);
        c.threads = 2;
        c
    }

    #[test]
    fn analytic_rows_have_all_columns() {
        let c = small(Case::I);
        let jobs = [Job {
            eps: 1e-3,
            h: 0.1,
            tau: 0.05,
        }];
        let res = sweep(&c, &jobs, &[0.5]).unwrap();
        let row = &res[0].rows[0];
        assert_eq!(row.steps, 10);
        assert!(row.err_l2.value().unwrap() > 0.0);
        assert!(row.err_h1.value().unwrap() >= row.err_l2.value().unwrap());
        assert!(row.mass_drift.value().is_some());
        assert!(res[0].conserved.as_ref().unwrap().len() >= 2);
    }

    #[test]
    fn no_reference_leaves_errors_empty() {
        let c = small(Case::II);
        let jobs = [Job {
            eps: 1e-2,
            h: 0.1,
            tau: 0.05,
        }];
        let row = &sweep(&c, &jobs, &[0.2]).unwrap()[0].rows[0];
        assert_eq!(row.err_l2, Metric::NotComputed);
        assert!(row.energy_drift.value().is_some());
    }

    #[test]
    fn same_eps_fine_grid_reference_at_scale_one_is_exact() {
        let mut c = small(Case::II);
        c.reference = Reference::FineGrid {
            scale: 1,
            eps_ref: None,
        };
        let jobs = [Job {
            eps: 1e-2,
            h: 0.1,
            tau: 0.05,
        }];
        let row = &sweep(&c, &jobs, &[0.5]).unwrap()[0].rows[0];
        assert_eq!(row.err_l2, Metric::Value(0.0));
        assert_eq!(row.err_energy, Metric::Value(0.0));
    }

    #[test]
    fn blow_up_marks_rows_failed() {
        let mut c = small(Case::I);
        c.domain = (-12.0, 12.0);
        c.eps_list = vec![1e-300];
        let jobs = [Job {
            eps: 1e-300,
            h: 0.5,
            tau: 5.0,
        }];
        let res = sweep(&c, &jobs, &[5000.0]).unwrap();
        assert!(res[0].rows[0].failed());
        assert!(res[0].conserved.is_none());
    }

    #[test]
    fn incompatible_reference_grid_is_an_error() {
        let mut c = small(Case::I);
        c.reference = Reference::FineGrid {
            scale: 1,
            eps_ref: None,
        };
        let jobs = [
            Job {
                eps: 1e-2,
                h: 0.1,
                tau: 0.05,
            },
            Job {
                eps: 1e-2,
                h: 0.08,
                tau: 0.05,
            },
        ];
        assert!(sweep(&c, &jobs, &[0.5]).is_err());
    }

    #[test]
    fn dumps_fields() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small(Case::I);
        c.dump_dir = Some(dir.path().join("fields"));
        let jobs = [Job {
            eps: 1e-3,
            h: 0.5,
            tau: 0.25,
        }];
        sweep(&c, &jobs, &[0.5]).unwrap();
        let files: Vec<_> = fs::read_dir(dir.path().join("fields")).unwrap().collect();
        assert_eq!(files.len(), 1);
        let text = fs::read_to_string(files[0].as_ref().unwrap().path()).unwrap();
        assert!(text.starts_with("x,re,im\n"));
        assert_eq!(text.lines().count(), 1 + 33);
    }
}
