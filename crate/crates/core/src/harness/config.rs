//! Flat `key = value` configuration.
//!
//! One setting per line, `#` starts a comment, lists are comma-separated:
//!
//! ```text
//! case = 1
//! variant = linear-eps
//! eps_list = 1e-2, 5e-3, 2.5e-3
//! h_list = 0.001953125
//! tau_list = 0.001953125
//! t_eval = 0.5
//! reference = fine-grid
//! ref_scale = 1
//! eps_ref = 1e-8
//! ```

use std::path::PathBuf;

use super::{Case, ExperimentConfig, Reference};
use crate::error::{Error, Result};
use crate::solver::FirstStep;

/// Splits config text into `(key, value)` pairs, in file order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::InvalidInput(format!(
                "config line {}: expected `key = value`",
                n + 1
            )));
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::InvalidInput(format!(
                "config line {}: empty key",
                n + 1
            )));
        }
        out.push((k.to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidInput(format!("{key}: `{v}` is not a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| Error::InvalidInput(format!("{key}: `{v}` is not a nonnegative integer")))
}

pub(crate) fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let items: Result<Vec<f64>> = v.split(',').map(|s| parse_f64(key, s)).collect();
    let items = items?;
    if items.is_empty() {
        return Err(Error::InvalidInput(format!("{key}: empty list")));
    }
    Ok(items)
}

fn parse_domain(v: &str) -> Result<(f64, f64)> {
    match parse_list("domain", v)?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => Err(Error::InvalidInput(format!(
            "domain: expected `a,b`, got `{v}`"
        ))),
    }
}

fn parse_first_step(v: &str) -> Result<FirstStep> {
    match v {
        "analytic" => Ok(FirstStep::AnalyticSecondDerivative),
        "discrete" => Ok(FirstStep::DiscreteSecondDifference),
        _ => Err(Error::InvalidInput(format!(
            "first_step: expected analytic or discrete, got `{v}`"
        ))),
    }
}

impl ExperimentConfig {
    /// Applies one setting. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "case" => {
                let n = parse_usize(key, value)?;
                self.case = Case::from_number(u8::try_from(n).unwrap_or(0))?;
            }
            "domain" => self.domain = parse_domain(value)?,
            "lambda" => self.lambda = parse_f64(key, value)?,
            "variant" => self.variant = value.parse()?,
            "first_step" => self.first_step = parse_first_step(value)?,
            "eps" | "eps_list" => self.eps_list = parse_list(key, value)?,
            "h" | "h_list" => self.h_list = parse_list(key, value)?,
            "tau" | "tau_list" => self.tau_list = parse_list(key, value)?,
            "T" | "t_eval" => self.t_eval = parse_f64(key, value)?,
            "samples" => self.samples = parse_usize(key, value)?,
            "reference" => {
                self.reference = match value {
                    "analytic" => Reference::Analytic,
                    "none" => Reference::None,
                    "fine-grid" => match self.reference {
                        r @ Reference::FineGrid { .. } => r,
                        _ => Reference::FineGrid {
                            scale: 8,
                            eps_ref: None,
                        },
                    },
                    _ => {
                        return Err(Error::InvalidInput(format!(
                            "reference: expected analytic, fine-grid or none, got `{value}`"
                        )))
                    }
                }
            }
            "ref_scale" => {
                let s = parse_usize(key, value)?;
                self.reference = match self.reference {
                    Reference::FineGrid { eps_ref, .. } => {
                        Reference::FineGrid { scale: s, eps_ref }
                    }
                    _ => Reference::FineGrid {
                        scale: s,
                        eps_ref: None,
                    },
                };
            }
            "eps_ref" => {
                let e = if value == "none" {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                };
                self.reference = match self.reference {
                    Reference::FineGrid { scale, .. } => Reference::FineGrid { scale, eps_ref: e },
                    _ => Reference::FineGrid {
                        scale: 1,
                        eps_ref: e,
                    },
                };
            }
            "monitor_stride" => self.monitor_stride = Some(parse_usize(key, value)?.max(1)),
            "out" | "output" => self.output_path = Some(PathBuf::from(value)),
            "dump_fields" => self.dump_dir = Some(PathBuf::from(value)),
            "threads" => self.threads = parse_usize(key, value)?,
            _ => return Err(Error::InvalidInput(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies every setting in `text` in order.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_pairs(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }
}
