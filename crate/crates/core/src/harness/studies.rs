//! The experiments: error table, convergence in `tau` and in `eps`, energy error,
//! time evolution, and single simulations.

use std::fmt::Write as _;
use std::path::Path;

use super::record::{meta_path, write_csv, write_meta, Metric, ResultRow};
use super::run::{sweep, Job, JobResult};
use super::{build_id, ExperimentConfig, Reference};
use crate::diagnostics::{fit_linear_slope, fit_loglog_slope, ErrorKind};
use crate::error::{Error, Result};
use crate::solver::FirstStep;

/// A fitted quantity reported next to the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub experiment: String,
    pub rows: Vec<ResultRow>,
    pub fits: Vec<Fit>,
    /// Run description written to the `.meta` sidecar.
    pub meta: Vec<(String, String)>,
}

impl StudyOutput {
    pub fn fit(&self, label: &str) -> Option<f64> {
        self.fits.iter().find(|f| f.label == label).map(|f| f.value)
    }

    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(ResultRow::failed)
    }

    /// Writes the rows to `path` and the metadata and fits to `path.meta`.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_csv(path, &self.rows)?;
        let mut entries = self.meta.clone();
        entries.extend(
            self.fits
                .iter()
                .map(|f| (format!("fit.{}", f.label), f.value.to_string())),
        );
        write_meta(&meta_path(path), &entries)
    }
}

fn error_kind(r: Reference) -> Option<ErrorKind> {
    match r {
        Reference::Analytic => Some(ErrorKind::ETilde),
        Reference::FineGrid {
            eps_ref: Some(_), ..
        } => Some(ErrorKind::EHat),
        Reference::FineGrid { eps_ref: None, .. } => Some(ErrorKind::E),
        Reference::None => None,
    }
}

fn base_meta(cfg: &ExperimentConfig, experiment: &str) -> Vec<(String, String)> {
    let first = match cfg.first_step {
        FirstStep::AnalyticSecondDerivative => "analytic",
        FirstStep::DiscreteSecondDifference => "discrete",
    };
    [
        ("experiment", experiment.to_string()),
        ("build", build_id()),
        ("case", cfg.case.to_string()),
        ("lambda", cfg.lambda.to_string()),
        ("domain", format!("{},{}", cfg.domain.0, cfg.domain.1)),
        ("variant", cfg.variant.to_string()),
        ("first_step", first.to_string()),
        ("reference", cfg.reference.to_string()),
        (
            "error",
            error_kind(cfg.reference).map_or("none".to_string(), |k| k.to_string()),
        ),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Jobs in eps-major order.
fn jobs(cfg: &ExperimentConfig) -> Result<Vec<Job>> {
    let pairs = cfg.grid_pairs()?;
    Ok(cfg
        .eps_list
        .iter()
        .flat_map(|&eps| pairs.iter().map(move |&(h, tau)| Job { eps, h, tau }))
        .collect())
}

fn rows_of(results: Vec<JobResult>) -> Vec<ResultRow> {
    results.into_iter().flat_map(|r| r.rows).collect()
}

fn pair_suffix(pairs: &[(f64, f64)], i: usize) -> String {
    if pairs.len() == 1 {
        String::new()
    } else {
        format!("[h={},tau={}]", pairs[i].0, pairs[i].1)
    }
}

fn loglog_fit(label: String, points: &[(f64, f64)]) -> Option<Fit> {
    fit_loglog_slope(points)
        .ok()
        .map(|value| Fit { label, value })
}

fn require_reference(cfg: &ExperimentConfig, what: &str) -> Result<()> {
    if cfg.reference == Reference::None {
        return Err(Error::InvalidInput(format!(
            "{what} needs a reference solution"
        )));
    }
    Ok(())
}

/// Error matrix over `eps` (rows) and linked `(h, tau)` (columns), with rates
/// along each row.
#[derive(Debug, Clone)]
pub struct Table1 {
    pub study: StudyOutput,
    pub eps: Vec<f64>,
    pub grids: Vec<(f64, f64)>,
    /// `errors[m][k]`: L2 error at `eps[m]` on `grids[k]`; `None` if the run failed
    pub errors: Vec<Vec<Option<f64>>>,
    /// `rates[m][k]` between columns `k-1` and `k`; `rates[m][0]` is `None`
    pub rates: Vec<Vec<Option<f64>>>,
}

impl Table1 {
    /// Rate at `(m, m+1)` for each row that has such a column.
    pub fn diagonal_rates(&self) -> Vec<Option<f64>> {
        self.rates
            .iter()
            .enumerate()
            .filter_map(|(m, r)| r.get(m + 1).copied())
            .collect()
    }

    pub fn render(&self) -> String {
        let w = 13;
        let mut s = String::new();
        let _ = write!(s, "{:<14}", "");
        for (h, _) in &self.grids {
            let _ = write!(s, "{:>w$}", format!("h={h}"));
        }
        s.push('\n');
        let _ = write!(s, "{:<14}", "");
        for (_, t) in &self.grids {
            let _ = write!(s, "{:>w$}", format!("tau={t}"));
        }
        s.push('\n');
        for (m, eps) in self.eps.iter().enumerate() {
            let _ = write!(s, "{:<14}", format!("eps={eps:.3e}"));
            for e in &self.errors[m] {
                let cell = e.map_or("FAILED".to_string(), |v| format!("{v:.2e}"));
                let _ = write!(s, "{cell:>w$}");
            }
            s.push('\n');
            let _ = write!(s, "{:<14}", "rate");
            for r in &self.rates[m] {
                let cell = r.map_or("--".to_string(), |v| format!("{v:.2}"));
                let _ = write!(s, "{cell:>w$}");
            }
            s.push('\n');
        }
        s
    }
}

fn rate(h0: f64, e0: Option<f64>, h1: f64, e1: Option<f64>) -> Option<f64> {
    match (e0, e1) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).ln() / (h0 / h1).ln()),
        _ => None,
    }
}

pub fn run_table1(cfg: &ExperimentConfig) -> Result<Table1> {
    require_reference(cfg, "the error table")?;
    let grids = cfg.grid_pairs()?;
    let results = sweep(cfg, &jobs(cfg)?, &[cfg.t_eval])?;
    let mut errors = Vec::with_capacity(cfg.eps_list.len());
    let mut rates = Vec::with_capacity(cfg.eps_list.len());
    for chunk in results.chunks(grids.len()) {
        let row: Vec<Option<f64>> = chunk.iter().map(|r| r.rows[0].err_l2.value()).collect();
        let mut rr = vec![None];
        for k in 1..row.len() {
            rr.push(rate(grids[k - 1].0, row[k - 1], grids[k].0, row[k]));
        }
        errors.push(row);
        rates.push(rr);
    }
    let mut fits = Vec::new();
    for (m, r) in rates.iter().enumerate() {
        if let Some(Some(v)) = r.get(m + 1) {
            fits.push(Fit {
                label: format!("diag_rate_m{m}"),
                value: *v,
            });
        }
    }
    let study = StudyOutput {
        experiment: "table1".into(),
        rows: rows_of(results),
        fits,
        meta: base_meta(cfg, "table1"),
    };
    Ok(Table1 {
        study,
        eps: cfg.eps_list.clone(),
        grids,
        errors,
        rates,
    })
}

/// L2, H1 and max-norm errors at `t_eval` against `eps`, with log-log slopes
/// (`slope_l2`, `slope_h1`, `slope_linf`) per `(h, tau)` pair.
pub fn run_eps_convergence(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    require_reference(cfg, "the eps study")?;
    let pairs = cfg.grid_pairs()?;
    let results = sweep(cfg, &jobs(cfg)?, &[cfg.t_eval])?;
    let mut fits = Vec::new();
    for (i, _) in pairs.iter().enumerate() {
        let rows: Vec<&ResultRow> = results
            .iter()
            .skip(i)
            .step_by(pairs.len())
            .map(|r| &r.rows[0])
            .collect();
        let sfx = pair_suffix(&pairs, i);
        for (name, get) in [
            ("l2", (|r: &ResultRow| r.err_l2) as fn(&ResultRow) -> Metric),
            ("h1", |r: &ResultRow| r.err_h1),
            ("linf", |r: &ResultRow| r.err_linf),
        ] {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| get(r).value().map(|v| (r.eps, v)))
                .collect();
            fits.extend(loglog_fit(format!("slope_{name}{sfx}"), &pts));
        }
    }
    Ok(StudyOutput {
        experiment: "eps-convergence".into(),
        rows: rows_of(results),
        fits,
        meta: base_meta(cfg, "eps-convergence"),
    })
}

/// Energy error at `t_eval` against `eps`: slope `slope_energy` and the ratios
/// `ratio_energy_k = e_k / e_{k+1}` of neighbouring entries.
pub fn run_energy_convergence(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    require_reference(cfg, "the energy study")?;
    let pairs = cfg.grid_pairs()?;
    let results = sweep(cfg, &jobs(cfg)?, &[cfg.t_eval])?;
    let mut fits = Vec::new();
    for (i, _) in pairs.iter().enumerate() {
        let sfx = pair_suffix(&pairs, i);
        let pts: Vec<(f64, f64)> = results
            .iter()
            .skip(i)
            .step_by(pairs.len())
            .filter_map(|r| r.rows[0].err_energy.value().map(|v| (r.job.eps, v)))
            .collect();
        fits.extend(loglog_fit(format!("slope_energy{sfx}"), &pts));
        for (k, w) in pts.windows(2).enumerate() {
            fits.push(Fit {
                label: format!("ratio_energy_{k}{sfx}"),
                value: w[0].1 / w[1].1,
            });
        }
    }
    Ok(StudyOutput {
        experiment: "energy-convergence".into(),
        rows: rows_of(results),
        fits,
        meta: base_meta(cfg, "energy-convergence"),
    })
}

/// Errors at `samples + 1` equally spaced times in `[0, t_eval]`, with a linear
/// fit of the L2 error against `t` for each eps (`slope_t[eps=..]`).
pub fn run_time_evolution(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    require_reference(cfg, "the time-evolution study")?;
    let pairs = cfg.grid_pairs()?;
    let times: Vec<f64> = (0..=cfg.samples)
        .map(|j| cfg.t_eval * j as f64 / cfg.samples as f64)
        .collect();
    let results = sweep(cfg, &jobs(cfg)?, &times)?;
    let mut fits = Vec::new();
    for (i, r) in results.iter().enumerate() {
        let pts: Vec<(f64, f64)> = r
            .rows
            .iter()
            .filter_map(|row| row.err_l2.value().map(|v| (row.t_eval, v)))
            .collect();
        if let Ok(value) = fit_linear_slope(&pts) {
            let sfx = pair_suffix(&pairs, i % pairs.len());
            fits.push(Fit {
                label: format!("slope_t[eps={}]{sfx}", r.job.eps),
                value,
            });
        }
    }
    Ok(StudyOutput {
        experiment: "time-evolution".into(),
        rows: rows_of(results),
        fits,
        meta: base_meta(cfg, "time-evolution"),
    })
}

/// Fixed-eps convergence under linked `(h, tau)` refinement: log-log slope of
/// the L2 error against `tau` for each eps (`slope_tau[eps=..]`).
pub fn run_tau_sweep(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    require_reference(cfg, "the tau sweep")?;
    let results = sweep(cfg, &jobs(cfg)?, &[cfg.t_eval])?;
    let n = cfg.grid_pairs()?.len();
    let mut fits = Vec::new();
    for chunk in results.chunks(n) {
        let pts: Vec<(f64, f64)> = chunk
            .iter()
            .filter_map(|r| r.rows[0].err_l2.value().map(|v| (r.job.tau, v)))
            .collect();
        fits.extend(loglog_fit(
            format!("slope_tau[eps={}]", chunk[0].job.eps),
            &pts,
        ));
    }
    Ok(StudyOutput {
        experiment: "tau-sweep".into(),
        rows: rows_of(results),
        fits,
        meta: base_meta(cfg, "tau-sweep"),
    })
}

/// One run with the first eps and `(h, tau)` of `cfg`. Emits a row per
/// conserved-quantity sample (drift so far, no errors) followed by the final row
/// with errors against the reference.
pub fn simulate(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    let (h, tau) = cfg.grid_pairs()?[0];
    let job = Job {
        eps: cfg.eps_list[0],
        h,
        tau,
    };
    let mut results = sweep(cfg, &[job], &[cfg.t_eval])?;
    let result = results.remove(0);
    let mut rows = Vec::new();
    if let Some(series) = &result.conserved {
        let last = &result.rows[0];
        for (i, &t) in series.times.iter().enumerate() {
            if t >= cfg.t_eval - 0.25 * tau {
                break;
            }
            let upto = super::run::series_prefix(series, i + 1);
            let mut row = last.clone();
            row.t_eval = t;
            row.err_l2 = Metric::NotComputed;
            row.err_h1 = Metric::NotComputed;
            row.err_linf = Metric::NotComputed;
            row.err_energy = Metric::NotComputed;
            row.mass_drift = upto.mass_drift().into();
            row.momentum_drift = upto.momentum_drift().into();
            row.energy_drift = upto.energy_drift().into();
            row.steps = (t / tau).round() as usize;
            row.stab_violations = result
                .violation_steps
                .iter()
                .filter(|&&k| k <= row.steps)
                .count();
            rows.push(row);
        }
    }
    rows.extend(result.rows);
    let mut meta = base_meta(cfg, "simulate");
    meta.push((
        "monitor_stride".into(),
        cfg.monitor_stride.map_or("auto".into(), |s| s.to_string()),
    ));
    Ok(StudyOutput {
        experiment: "simulate".into(),
        rows,
        fits: Vec::new(),
        meta,
    })
}
