//! Convergence studies over `(eps, h, tau)` sweeps.
//!
//! Each study runs its independent solves on a worker pool, compares them with a
//! reference (closed-form Gausson or a numerical solve), and returns rows in the
//! order of the sweep regardless of thread count.

mod config;
mod record;
mod run;
mod studies;

use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;

use crate::analytic::{initial_case1, initial_case1_xx, initial_case2, initial_case2_xx};
use crate::error::{Error, Result};
use crate::nonlinearity::RegVariant;
use crate::solver::FirstStep;

pub use config::parse_pairs;
pub use record::{
    meta_path, read_csv, read_csv_from, write_csv, write_csv_to, Metric, ResultRow, CSV_HEADER,
};
pub use studies::{
    run_energy_convergence, run_eps_convergence, run_table1, run_tau_sweep, run_time_evolution,
    simulate, Fit, StudyOutput, Table1,
};

/// Velocity of the Case I Gausson.
pub const CASE1_VELOCITY: f64 = 1.0;

/// Initial data of the two test problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    /// moving Gausson with `v = 1`; exact solution known
    I,
    /// `tanh(x) exp(-x^2)`
    II,
}

impl Case {
    pub fn number(self) -> u8 {
        match self {
            Case::I => 1,
            Case::II => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Case::I),
            2 => Ok(Case::II),
            _ => Err(Error::InvalidInput(format!("case must be 1 or 2, got {n}"))),
        }
    }

    pub fn default_domain(self) -> (f64, f64) {
        match self {
            Case::I => (-12.0, 12.0),
            Case::II => (-16.0, 16.0),
        }
    }

    pub fn initial(self, x: f64, lambda: f64) -> Complex64 {
        match self {
            Case::I => initial_case1(x, lambda, CASE1_VELOCITY),
            Case::II => initial_case2(x),
        }
    }

    pub fn initial_xx(self, x: f64, lambda: f64) -> Complex64 {
        match self {
            Case::I => initial_case1_xx(x, lambda, CASE1_VELOCITY),
            Case::II => initial_case2_xx(x),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// What the numerical solutions are compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// The closed-form moving Gausson (Case I only).
    Analytic,
    /// A numerical solve on the finest study grid with `h` and `tau` divided by
    /// `scale`. With `eps_ref` set, the reference solves the linear-eps model at
    /// that tiny eps and stands in for the unregularized solution; without it,
    /// each row is compared with a reference at its own eps and variant.
    FineGrid { scale: usize, eps_ref: Option<f64> },
    /// No comparison; error columns stay empty.
    None,
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::Analytic => f.write_str("analytic"),
            Reference::FineGrid {
                scale,
                eps_ref: None,
            } => write!(f, "fine-grid(scale={scale})"),
            Reference::FineGrid {
                scale,
                eps_ref: Some(e),
            } => {
                write!(f, "fine-grid(scale={scale},eps_ref={e:e})")
            }
            Reference::None => f.write_str("none"),
        }
    }
}

/// `min(eps_list) / 1000`, but not below `1e-12`.
pub fn default_eps_ref(eps_list: &[f64]) -> f64 {
    let min = eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    (min / 1000.0).max(1e-12)
}

/// Worker count from `LOGSE_THREADS`, else the available parallelism.
pub fn default_threads() -> usize {
    std::env::var("LOGSE_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Version plus `git describe` output captured at build time.
pub fn build_id() -> String {
    format!("{}-{}", env!("CARGO_PKG_VERSION"), env!("LOGSE_BUILD_ID"))
}

fn halvings(base: f64, count: usize, factor: f64) -> Vec<f64> {
    (0..count).map(|k| base / factor.powi(k as i32)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub case: Case,
    pub domain: (f64, f64),
    pub lambda: f64,
    pub variant: RegVariant,
    pub first_step: FirstStep,
    pub eps_list: Vec<f64>,
    /// Paired element-wise with `tau_list`; a one-element list is broadcast.
    pub h_list: Vec<f64>,
    pub tau_list: Vec<f64>,
    pub t_eval: f64,
    /// Number of equal time intervals sampled by the time-evolution study.
    pub samples: usize,
    pub reference: Reference,
    /// Steps between conserved-quantity samples; `None` picks about 100 samples.
    pub monitor_stride: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub dump_dir: Option<PathBuf>,
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn new(case: Case) -> Self {
        Self {
            case,
            domain: case.default_domain(),
            lambda: -1.0,
            variant: RegVariant::LinearEps,
            first_step: FirstStep::AnalyticSecondDerivative,
            eps_list: vec![1e-3],
            h_list: vec![1.0 / 64.0],
            tau_list: vec![1.0 / 64.0],
            t_eval: 1.0,
            samples: 8,
            reference: match case {
                Case::I => Reference::Analytic,
                Case::II => Reference::None,
            },
            monitor_stride: None,
            output_path: None,
            dump_dir: None,
            threads: default_threads(),
        }
    }

    /// Upper-left `(kmax+1) x (kmax+1)` block of the Case I error table:
    /// `h = tau = 0.1/2^k`, `eps = 0.001/4^m`, error at `t = 1`.
    pub fn table1(kmax: usize) -> Self {
        let mut c = Self::new(Case::I);
        c.h_list = halvings(0.1, kmax + 1, 2.0);
        c.tau_list = c.h_list.clone();
        c.eps_list = halvings(1e-3, kmax + 1, 4.0);
        c.t_eval = 1.0;
        c
    }

    /// Fixed-eps convergence in `tau` with `h = 75 tau / 64`, five halvings from
    /// `tau = 0.02`, at `t = 0.5` against an 8x refined reference.
    pub fn tau_sweep() -> Self {
        let mut c = Self::new(Case::I);
        c.tau_list = halvings(0.02, 5, 2.0);
        c.h_list = c.tau_list.iter().map(|t| 75.0 * t / 64.0).collect();
        c.eps_list = vec![1e-2, 1e-3];
        c.t_eval = 0.5;
        c.reference = Reference::FineGrid {
            scale: 8,
            eps_ref: None,
        };
        c
    }

    /// Regularized-versus-unregularized error at `t = 0.5`. Both solutions are
    /// computed on one grid, so the discretization errors largely cancel.
    pub fn eps_convergence(case: Case, variant: RegVariant) -> Self {
        let mut c = Self::new(case);
        c.variant = variant;
        c.t_eval = 0.5;
        match (case, variant) {
            (Case::II, _) => {
                // the H1 model error is far more sensitive to tau than to h here
                c.h_list = vec![1.0 / 256.0];
                c.tau_list = vec![1.0 / 8192.0];
                c.eps_list = halvings(2e-3, 5, 2.0);
            }
            (Case::I, RegVariant::SquaredEps) => {
                c.h_list = vec![1.0 / 512.0];
                c.tau_list = vec![1.0 / 512.0];
                c.eps_list = halvings(0.1, 11, 2.0);
            }
            (Case::I, _) => {
                c.h_list = vec![1.0 / 512.0];
                c.tau_list = vec![1.0 / 512.0];
                c.eps_list = halvings(1e-2, 7, 2.0);
            }
        }
        c.reference = Reference::FineGrid {
            scale: 1,
            eps_ref: Some(default_eps_ref(&c.eps_list)),
        };
        c
    }

    /// `|E(u) - E^eps(u^eps)|` at `t = 0.5` for `eps = 1e-2 .. 1e-5`.
    pub fn energy_convergence(case: Case) -> Self {
        let mut c = Self::eps_convergence(case, RegVariant::LinearEps);
        c.eps_list = vec![1e-2, 1e-3, 1e-4, 1e-5];
        c.reference = Reference::FineGrid {
            scale: 1,
            eps_ref: Some(default_eps_ref(&c.eps_list)),
        };
        c
    }

    /// Model error at `t = 0, 1/8, ..., 1`.
    pub fn time_evolution(case: Case) -> Self {
        let mut c = Self::eps_convergence(case, RegVariant::LinearEps);
        c.eps_list = halvings(1e-2, 4, 2.0);
        c.t_eval = 1.0;
        c.samples = 8;
        c.reference = Reference::FineGrid {
            scale: 1,
            eps_ref: Some(default_eps_ref(&c.eps_list)),
        };
        c
    }

    /// `(h, tau)` pairs of the sweep.
    pub fn grid_pairs(&self) -> Result<Vec<(f64, f64)>> {
        let (hs, ts) = (&self.h_list, &self.tau_list);
        if hs.is_empty() || ts.is_empty() {
            return Err(Error::InvalidInput(
                "h and tau lists must be nonempty".into(),
            ));
        }
        if hs.len() == ts.len() {
            Ok(hs.iter().copied().zip(ts.iter().copied()).collect())
        } else if hs.len() == 1 {
            Ok(ts.iter().map(|&t| (hs[0], t)).collect())
        } else if ts.len() == 1 {
            Ok(hs.iter().map(|&h| (h, ts[0])).collect())
        } else {
            Err(Error::InvalidInput(format!(
                "h list ({}) and tau list ({}) must have equal length or one entry",
                hs.len(),
                ts.len()
            )))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.eps_list.is_empty() {
            return bad("eps list must be nonempty".into());
        }
        if let Some(e) = self
            .eps_list
            .iter()
            .find(|e| !(**e >= 0.0 && e.is_finite()))
        {
            return bad(format!("eps must be finite and >= 0, got {e}"));
        }
        if self.eps_list.contains(&0.0) && self.variant != RegVariant::Unregularized {
            return bad("eps = 0 needs the unregularized variant".into());
        }
        let pairs = self.grid_pairs()?;
        if let Some(p) = pairs.iter().find(|(h, t)| !(*h > 0.0 && *t > 0.0)) {
            return bad(format!("h and tau must be positive, got {p:?}"));
        }
        if !(self.t_eval > 0.0) || !self.t_eval.is_finite() {
            return bad(format!("t_eval must be positive, got {}", self.t_eval));
        }
        if !(self.domain.0 < self.domain.1) {
            return bad(format!("domain must satisfy a < b, got {:?}", self.domain));
        }
        if !self.lambda.is_finite() {
            return bad("lambda must be finite".into());
        }
        if self.case == Case::I && !(self.lambda < 0.0) {
            return bad("Case I data needs lambda < 0".into());
        }
        if self.reference == Reference::Analytic && self.case != Case::I {
            return bad("the analytic reference exists for Case I only".into());
        }
        if let Reference::FineGrid { scale, eps_ref } = self.reference {
            if scale == 0 {
                return bad("reference scale must be at least 1".into());
            }
            if let Some(e) = eps_ref {
                if !(e > 0.0) {
                    return bad(format!("eps_ref must be positive, got {e}"));
                }
            }
        }
        if self.threads == 0 {
            return bad("threads must be positive".into());
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for c in [
            ExperimentConfig::table1(5),
            ExperimentConfig::tau_sweep(),
            ExperimentConfig::eps_convergence(Case::I, RegVariant::LinearEps),
            ExperimentConfig::eps_convergence(Case::II, RegVariant::LinearEps),
            ExperimentConfig::eps_convergence(Case::I, RegVariant::SquaredEps),
            ExperimentConfig::energy_convergence(Case::I),
            ExperimentConfig::time_evolution(Case::I),
            ExperimentConfig::new(Case::II),
        ] {
            c.validate().unwrap();
        }
    }

    #[test]
    fn table1_grid() {
        let c = ExperimentConfig::table1(2);
        assert_eq!(c.h_list, vec![0.1, 0.05, 0.025]);
        assert_eq!(c.eps_list, vec![1e-3, 2.5e-4, 6.25e-5]);
        assert_eq!(
            c.grid_pairs().unwrap(),
            vec![(0.1, 0.1), (0.05, 0.05), (0.025, 0.025)]
        );
    }

    #[test]
    fn pairs_broadcast_and_mismatch() {
        let mut c = ExperimentConfig::new(Case::I);
        c.h_list = vec![0.1];
        c.tau_list = vec![0.1, 0.05];
        assert_eq!(c.grid_pairs().unwrap(), vec![(0.1, 0.1), (0.1, 0.05)]);
        c.h_list = vec![0.1, 0.05, 0.025];
        assert!(c.grid_pairs().is_err());
    }

    #[test]
    fn eps_ref_rule() {
        assert_eq!(default_eps_ref(&[1e-2, 1e-3]), 1e-6);
        assert_eq!(default_eps_ref(&[1e-10]), 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = ExperimentConfig::new(Case::I);
        c.lambda = 1.0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(Case::II);
        c.reference = Reference::Analytic;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(Case::I);
        c.eps_list.clear();
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(Case::I);
        c.t_eval = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn threads_from_env_default() {
        assert!(default_threads() >= 1);
    }
}
