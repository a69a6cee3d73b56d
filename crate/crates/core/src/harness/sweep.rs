use std::collections::BTreeMap;

use super::config::{ExperimentConfig, RuleSpec};
use super::experiment::run_experiment;
use super::report::{RecordValue, ReportRecord};
use crate::error::{Error, Result};

/// Runs `base` for Born and for the context-normalized power law at every
/// `alpha`, over every dimension, and summarizes each (rule, dim, metric)
/// cell by its maximum and mean.
///
/// Summary records carry the metric as `METRIC:max` or `METRIC:mean` and the
/// number of successful trials in the `trial` column.
pub fn sweep(base: &ExperimentConfig, alphas: &[f64], dims: &[usize]) -> Result<Vec<ReportRecord>> {
    if alphas.is_empty() {
        return Err(Error::Config("sweep needs at least one exponent".into()));
    }
    if dims.is_empty() {
        return Err(Error::Config("sweep needs at least one dimension".into()));
    }
    if !base.command.is_randomized() {
        return Err(Error::Config(format!("`{}` cannot be swept", base.command.name())));
    }
    let mut rules = vec![RuleSpec::Born];
    for &alpha in alphas {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Config(format!("exponent {alpha} must be finite and positive")));
        }
        rules.push(RuleSpec::Power {
            alpha,
            normalized: true,
        });
    }
    let config = ExperimentConfig {
        rules,
        dims: dims.to_vec(),
        state: None,
        ..base.clone()
    };
    let records = run_experiment(&config)?;

    let mut cells: BTreeMap<(String, usize, String), (Vec<f64>, usize)> = BTreeMap::new();
    for record in &records {
        let metric = if record.metric == "error" {
            None
        } else {
            Some(record.metric.clone())
        };
        let key = (record.rule.clone(), record.dim, metric.clone().unwrap_or_default());
        let cell = cells.entry(key).or_default();
        match metric {
            Some(_) => cell.0.push(record.value.as_f64()),
            None => cell.1 += 1,
        }
    }

    let experiment = format!("sweep:{}", base.command.name());
    let mut out = Vec::new();
    for ((rule, dim, metric), (values, errors)) in cells {
        if metric.is_empty() {
            // error-only cells are reported under their own metric
            out.push(summary(
                &experiment,
                &rule,
                dim,
                "error:count",
                RecordValue::Real(errors as f64),
                0,
                base.seed,
                errors,
            ));
            continue;
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let n = values.len();
        out.push(summary(
            &experiment,
            &rule,
            dim,
            &format!("{metric}:max"),
            RecordValue::Real(max),
            n,
            base.seed,
            errors,
        ));
        out.push(summary(
            &experiment,
            &rule,
            dim,
            &format!("{metric}:mean"),
            RecordValue::Real(mean),
            n,
            base.seed,
            errors,
        ));
    }
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn summary(
    experiment: &str,
    rule: &str,
    dim: usize,
    metric: &str,
    value: RecordValue,
    trials: usize,
    master: u64,
    errors: usize,
) -> ReportRecord {
    ReportRecord {
        experiment: experiment.into(),
        rule: rule.into(),
        dim,
        trial: trials,
        metric: metric.into(),
        value,
        seed: master,
        witness: format!("master={master};errors={errors}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Command;

    fn cell(records: &[ReportRecord], rule: &str, dim: usize, metric: &str) -> f64 {
        records
            .iter()
            .find(|r| r.rule == rule && r.dim == dim && r.metric == metric)
            .unwrap_or_else(|| panic!("missing {rule} {dim} {metric}"))
            .value
            .as_f64()
    }

    #[test]
    fn alpha_two_matches_born() {
        let base = ExperimentConfig {
            trials: 50,
            seed: 9,
            ..ExperimentConfig::new(Command::NpScan)
        };
        let records = sweep(&base, &[1.0, 2.0, 3.0], &[3]).unwrap();
        assert!(cell(&records, "born", 3, "np_violation:max") < 1e-12);
        assert!(cell(&records, "power:2", 3, "np_violation:max") < 1e-12);
        assert!(cell(&records, "power:1", 3, "np_violation:max") > 1e-3);
        assert!(cell(&records, "power:3", 3, "np_violation:max") > 1e-3);
        assert_eq!(records.iter().find(|r| r.rule == "born").unwrap().trial, 50);
    }

    #[test]
    fn born_clean_across_dims() {
        let base = ExperimentConfig {
            trials: 20,
            ..ExperimentConfig::new(Command::NpScan)
        };
        let records = sweep(&base, &[2.0], &[3, 4, 5, 6]).unwrap();
        for dim in 3..=6 {
            assert!(cell(&records, "born", dim, "np_violation:max") < 1e-12);
        }
    }

    #[test]
    fn empty_lists_are_config_errors() {
        let base = ExperimentConfig::new(Command::NpScan);
        assert!(matches!(sweep(&base, &[], &[3]), Err(Error::Config(_))));
        assert!(matches!(sweep(&base, &[1.0], &[]), Err(Error::Config(_))));
        assert!(matches!(sweep(&base, &[f64::NAN], &[3]), Err(Error::Config(_))));
    }
}
