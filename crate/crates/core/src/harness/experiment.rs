use std::f64::consts::TAU;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Command, ExperimentConfig, RuleSpec};
use super::report::{RecordValue, ReportRecord};
use super::seed::trial_seed;
use crate::composite::{signalling_magnitude, SignallingContext};
use crate::error::{Error, Result};
use crate::proof::{
    collapse_to_two, continuity_sandwich, fine_grain, fine_grain_invariance_residual, np_violation_search,
    rational_born, rational_from_f64, render_rational, Rational,
};
use crate::rules::{
    gleason_postulate_check, phase_invariance_residual, probe_samples, reconstruct_density, sphere_states, FrameRule,
};
use crate::state::{haar_basis_from_rng, OrthonormalBasis, StateVector};

/// Label used for records that do not depend on a rule.
const EXACT_RULE: &str = "exact";

/// Runs every rule × dimension × trial of `config`.
///
/// Trial `t` draws all of its randomness from `trial_seed(config.seed, t)`,
/// and records are sorted by (experiment, rule, dim, trial, metric), so the
/// output does not depend on the worker count. Failures inside a trial
/// become records with metric `error`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ReportRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut records = pool.install(|| match &config.command {
        Command::Sandwich { target } => Ok(sandwich_records(config, target)),
        Command::FineGrain { m, n } => finegrain_records(config, *m, *n),
        _ => Ok(randomized_records(config)),
    })?;
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(records)
}

struct Trial<'a> {
    config: &'a ExperimentConfig,
    rule: FrameRule,
    dim: usize,
    index: usize,
    seed: u64,
}

impl Trial<'_> {
    fn record(&self, metric: &str, value: RecordValue, detail: &str) -> ReportRecord {
        ReportRecord {
            experiment: self.config.command.name().into(),
            rule: self.rule.name().into(),
            dim: self.dim,
            trial: self.index,
            metric: metric.into(),
            value,
            seed: self.seed,
            witness: witness(self.config.seed, detail),
        }
    }

    /// The fixed state and basis if a state file was given, else random ones.
    fn instance(&self, rng: &mut ChaCha8Rng) -> Result<(StateVector, OrthonormalBasis)> {
        match &self.config.state {
            Some(desc) => {
                let basis = match &desc.basis {
                    Some(b) => b.clone(),
                    None => OrthonormalBasis::standard(self.dim)?,
                };
                Ok((desc.state.clone(), basis))
            }
            None => Ok((StateVector::random(self.dim, rng)?, haar_basis_from_rng(self.dim, rng)?)),
        }
    }
}

fn witness(master: u64, detail: &str) -> String {
    if detail.is_empty() {
        format!("master={master}")
    } else {
        format!("master={master};{detail}")
    }
}

fn randomized_records(config: &ExperimentConfig) -> Vec<ReportRecord> {
    let mut units = Vec::new();
    for spec in &config.rules {
        for dim in config.effective_dims() {
            for index in 0..config.trials {
                units.push((*spec, dim, index));
            }
        }
    }
    units
        .into_par_iter()
        .flat_map_iter(|(spec, dim, index)| run_trial(config, spec, dim, index))
        .collect()
}

fn run_trial(config: &ExperimentConfig, spec: RuleSpec, dim: usize, index: usize) -> Vec<ReportRecord> {
    let rule = spec.build().expect("rules are validated with the config");
    let trial = Trial {
        config,
        rule,
        dim,
        index,
        seed: trial_seed(config.seed, index as u64),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(trial.seed);
    let outcome = match config.command {
        Command::NpScan => np_scan(&trial, &mut rng),
        Command::Postulates => postulates(&trial, &mut rng),
        Command::Phase => phase(&trial, &mut rng),
        Command::Signalling => signalling(&trial, &mut rng),
        Command::Reconstruct => reconstruct(&trial, &mut rng),
        Command::Sandwich { .. } | Command::FineGrain { .. } => unreachable!("not randomized"),
    };
    outcome.unwrap_or_else(|e| vec![trial.record("error", RecordValue::Missing, &format!("error={e}"))])
}

fn np_scan(trial: &Trial, rng: &mut ChaCha8Rng) -> Result<Vec<ReportRecord>> {
    let (psi, basis) = trial.instance(rng)?;
    let found = np_violation_search(&trial.rule, &psi, &basis)?;
    let shared: Vec<String> = found.pair.shared().iter().map(|(i, j)| format!("{i}:{j}")).collect();
    Ok(vec![trial.record(
        "np_violation",
        RecordValue::Real(found.violation),
        &format!("shared={}", shared.join(",")),
    )])
}

/// Random partition of `0..dim` into at most `dim - 1` groups.
fn random_grouping(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..dim).collect();
    order.shuffle(rng);
    let groups = rng.random_range(1..dim);
    let mut cuts: Vec<usize> = index::sample(rng, dim - 1, groups - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(groups);
    let mut start = 0;
    for cut in cuts.into_iter().chain([dim]) {
        let mut group = order[start..cut].to_vec();
        group.sort_unstable();
        out.push(group);
        start = cut;
    }
    out
}

fn render_grouping(grouping: &[Vec<usize>]) -> String {
    grouping
        .iter()
        .map(|g| g.iter().map(usize::to_string).collect::<Vec<_>>().join("+"))
        .collect::<Vec<_>>()
        .join("|")
}

fn postulates(trial: &Trial, rng: &mut ChaCha8Rng) -> Result<Vec<ReportRecord>> {
    let (psi, basis) = trial.instance(rng)?;
    let grouping = random_grouping(trial.dim, rng);
    let residuals = gleason_postulate_check(&trial.rule, &psi, &basis, &grouping)?;
    let detail = format!("grouping={}", render_grouping(&grouping));
    Ok(vec![
        trial.record("normalization", RecordValue::Real(residuals.normalization), &detail),
        trial.record("additivity", RecordValue::Real(residuals.additivity), &detail),
    ])
}

fn phase(trial: &Trial, rng: &mut ChaCha8Rng) -> Result<Vec<ReportRecord>> {
    let (psi, basis) = trial.instance(rng)?;
    let k = rng.random_range(0..trial.dim);
    let new_phase = rng.random_range(0.0..TAU);
    let residual = phase_invariance_residual(&trial.rule, &psi, &basis, k, new_phase)?;
    Ok(vec![trial.record(
        "phase",
        RecordValue::Real(residual),
        &format!("k={k};phase={new_phase:.17e}"),
    )])
}

fn signalling(trial: &Trial, rng: &mut ChaCha8Rng) -> Result<Vec<ReportRecord>> {
    let (psi, basis) = trial.instance(rng)?;
    let k = rng.random_range(0..trial.dim);
    let collapsed = collapse_to_two(&psi, &basis, k)?;
    let pointers_a = haar_basis_from_rng(trial.dim, rng)?.vectors().to_vec();
    let pointers_b = haar_basis_from_rng(trial.dim, rng)?.vectors().to_vec();
    let a = SignallingContext::new("A", basis, pointers_a);
    let a_prime = SignallingContext::new("A'", collapsed, pointers_b);
    let report = signalling_magnitude(&trial.rule, &psi, &a, &a_prime, (k, 0))?;
    Ok(vec![trial.record(
        "signalling_gap",
        RecordValue::Real(report.gap),
        &format!(
            "shared={k}:0;p_a={:.17e};p_a_prime={:.17e}",
            report.p_a, report.p_a_prime
        ),
    )])
}

/// Dimension 2 uses 30 Fibonacci-sphere probes, each in its own context;
/// higher dimensions use every vector of `2 * dim` random contexts.
fn reconstruct(trial: &Trial, rng: &mut ChaCha8Rng) -> Result<Vec<ReportRecord>> {
    let (psi, _) = trial.instance(rng)?;
    let samples = if trial.dim == 2 {
        probe_samples(&trial.rule, &psi, &sphere_states(30))?
    } else {
        let mut samples = Vec::with_capacity(2 * trial.dim * trial.dim);
        for _ in 0..2 * trial.dim {
            let context = haar_basis_from_rng(trial.dim, rng)?;
            let p = trial.rule.evaluate(&psi, &context)?;
            samples.extend(context.vectors().iter().cloned().zip(p));
        }
        samples
    };
    let fit = reconstruct_density(&samples)?;
    Ok(vec![trial.record(
        "fit_residual",
        RecordValue::Real(fit.residual),
        &format!(
            "samples={};psd_clipped={};distance_to_state={:.17e}",
            samples.len(),
            fit.psd_clipped,
            fit.distance_to_pure(&psi)
        ),
    )])
}

fn base_record(config: &ExperimentConfig, rule: &str, dim: usize, metric: &str) -> ReportRecord {
    ReportRecord {
        experiment: config.command.name().into(),
        rule: rule.into(),
        dim,
        trial: 0,
        metric: metric.into(),
        value: RecordValue::Missing,
        seed: trial_seed(config.seed, 0),
        witness: witness(config.seed, ""),
    }
}

fn sandwich_records(config: &ExperimentConfig, target: &Rational) -> Vec<ReportRecord> {
    let mut record = base_record(config, EXACT_RULE, 3, "sandwich_width");
    let outcome = rational_from_f64(config.epsilon)
        .ok_or_else(|| Error::Config("epsilon is not finite".into()))
        .and_then(|eps| continuity_sandwich(target, &eps));
    match outcome {
        Ok(result) => {
            let width = result.width();
            record.value = if config.exact {
                RecordValue::Exact(width)
            } else {
                RecordValue::Real(crate::proof::rational_to_f64(&width))
            };
            record.witness = witness(
                config.seed,
                &format!(
                    "lo={};hi={};digits={};realized_lo={:.17e};realized_hi={:.17e}",
                    render_rational(&result.lo),
                    render_rational(&result.hi),
                    result.digits,
                    result.realized_lo,
                    result.realized_hi
                ),
            );
        }
        Err(e) => {
            record.metric = "error".into();
            record.witness = witness(config.seed, &format!("error={e}"));
        }
    }
    vec![record]
}

fn finegrain_records(config: &ExperimentConfig, m: u64, n: u64) -> Result<Vec<ReportRecord>> {
    let detail = format!("m={m};n={n}");
    let plan = match fine_grain(m, n) {
        Ok(plan) => plan,
        Err(e) => {
            let mut record = base_record(config, EXACT_RULE, 2, "error");
            record.witness = witness(config.seed, &format!("{detail};error={e}"));
            return Ok(vec![record]);
        }
    };
    let mut records: Vec<ReportRecord> = config
        .rules
        .par_iter()
        .map(|spec| {
            let rule = spec.build()?;
            let mut record = base_record(config, rule.name(), 2, "finegrain");
            match fine_grain_invariance_residual(&rule, &plan) {
                Ok(r) => {
                    record.value = RecordValue::Real(r);
                    record.witness = witness(config.seed, &detail);
                }
                Err(e) => {
                    record.metric = "error".into();
                    record.witness = witness(config.seed, &format!("{detail};error={e}"));
                }
            }
            Ok(record)
        })
        .collect::<Result<_>>()?;
    if config.exact {
        let mut record = base_record(config, EXACT_RULE, 2, "rational_born");
        record.value = RecordValue::Exact(rational_born(m, n)?);
        record.witness = witness(config.seed, &detail);
        records.push(record);
    }
    Ok(records)
}
