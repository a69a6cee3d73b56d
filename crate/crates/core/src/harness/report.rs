use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;

use super::config::OutputFormat;
use crate::error::{Error, Result};
use crate::proof::{render_rational, Rational};

pub const CSV_COLUMNS: [&str; 8] = [
    "experiment",
    "rule",
    "dim",
    "trial",
    "metric",
    "value",
    "seed",
    "witness",
];

#[derive(Debug, Clone, PartialEq)]
pub enum RecordValue {
    Real(f64),
    /// Rendered as `num/den`.
    Exact(Rational),
    /// No value, as in error records.
    Missing,
}

impl RecordValue {
    /// Floating-point view; `NaN` when missing.
    pub fn as_f64(&self) -> f64 {
        match self {
            RecordValue::Real(x) => *x,
            RecordValue::Exact(r) => crate::proof::rational_to_f64(r),
            RecordValue::Missing => f64::NAN,
        }
    }

    fn render(&self) -> String {
        match self {
            RecordValue::Real(x) => render_real(*x),
            RecordValue::Exact(r) => render_rational(r),
            RecordValue::Missing => String::new(),
        }
    }

    fn parse(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(RecordValue::Missing);
        }
        if let Some((num, den)) = s.split_once('/') {
            let num = BigInt::from_str(num).map_err(|e| Error::Config(format!("bad rational `{s}`: {e}")))?;
            let den = BigInt::from_str(den).map_err(|e| Error::Config(format!("bad rational `{s}`: {e}")))?;
            return Ok(RecordValue::Exact(Rational::new(num, den)));
        }
        s.parse()
            .map(RecordValue::Real)
            .map_err(|_| Error::Config(format!("bad value `{s}`")))
    }
}

/// 17 significant digits, enough to recover every `f64` exactly.
fn render_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// One row of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRecord {
    pub experiment: String,
    pub rule: String,
    pub dim: usize,
    pub trial: usize,
    pub metric: String,
    pub value: RecordValue,
    /// Seed of this trial, derived from the master seed.
    pub seed: u64,
    /// `master=SEED;key=value;...`.
    pub witness: String,
}

impl ReportRecord {
    pub(crate) fn sort_key(&self) -> (&str, &str, usize, usize, &str) {
        (&self.experiment, &self.rule, self.dim, self.trial, &self.metric)
    }

    fn fields(&self) -> [String; 8] {
        [
            self.experiment.clone(),
            self.rule.clone(),
            self.dim.to_string(),
            self.trial.to_string(),
            self.metric.clone(),
            self.value.render(),
            self.seed.to_string(),
            self.witness.clone(),
        ]
    }

    fn from_fields(fields: &[String]) -> Result<Self> {
        let int =
            |s: &str, what: &str| -> Result<u64> { s.parse().map_err(|_| Error::Config(format!("bad {what} `{s}`"))) };
        match fields {
            [experiment, rule, dim, trial, metric, value, seed, witness] => Ok(ReportRecord {
                experiment: experiment.clone(),
                rule: rule.clone(),
                dim: int(dim, "dim")? as usize,
                trial: int(trial, "trial")? as usize,
                metric: metric.clone(),
                value: RecordValue::parse(value)?,
                seed: int(seed, "seed")?,
                witness: witness.clone(),
            }),
            _ => Err(Error::Config(format!("expected 8 fields, found {}", fields.len()))),
        }
    }
}

/// Serializes records; identical input always yields identical bytes.
pub fn emit_report(records: &[ReportRecord], format: OutputFormat, allow_empty: bool) -> Result<Vec<u8>> {
    if records.is_empty() && !allow_empty {
        return Err(Error::Config("no records to report".into()));
    }
    match format {
        OutputFormat::Csv => emit_csv(records),
        OutputFormat::Json => Ok(emit_json(records).into_bytes()),
    }
}

fn emit_csv(records: &[ReportRecord]) -> Result<Vec<u8>> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    writer.write_record(CSV_COLUMNS).map_err(io)?;
    for record in records {
        writer.write_record(record.fields()).map_err(io)?;
    }
    writer.into_inner().map_err(|e| Error::Io(e.to_string()))
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn emit_json(records: &[ReportRecord]) -> String {
    let mut out = String::from("[");
    for (n, record) in records.iter().enumerate() {
        out.push_str(if n == 0 { "\n  {" } else { ",\n  {" });
        let value = match &record.value {
            RecordValue::Real(x) if x.is_finite() => render_real(*x),
            RecordValue::Real(x) => json_string(&x.to_string()),
            RecordValue::Exact(r) => json_string(&render_rational(r)),
            RecordValue::Missing => "null".into(),
        };
        let _ = write!(
            out,
            "\"experiment\": {}, \"rule\": {}, \"dim\": {}, \"trial\": {}, \"metric\": {}, \"value\": {}, \"seed\": {}, \"witness\": {}}}",
            json_string(&record.experiment),
            json_string(&record.rule),
            record.dim,
            record.trial,
            json_string(&record.metric),
            value,
            record.seed,
            json_string(&record.witness),
        );
    }
    out.push_str(if records.is_empty() { "]\n" } else { "\n]\n" });
    out
}

pub fn parse_csv_report(text: &str) -> Result<Vec<ReportRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Config(e.to_string()))?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Config(format!("unexpected csv header {header:?}")));
    }
    reader
        .records()
        .map(|row| {
            let row = row.map_err(|e| Error::Config(e.to_string()))?;
            ReportRecord::from_fields(&row.iter().map(str::to_owned).collect::<Vec<_>>())
        })
        .collect()
}

pub fn parse_json_report(text: &str) -> Result<Vec<ReportRecord>> {
    let parsed: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let rows = parsed
        .as_array()
        .ok_or_else(|| Error::Config("report must be a json array".into()))?;
    rows.iter()
        .map(|row| {
            let fields = CSV_COLUMNS
                .iter()
                .map(|key| match row.get(*key) {
                    Some(serde_json::Value::String(s)) => Ok(s.clone()),
                    Some(serde_json::Value::Null) => Ok(String::new()),
                    // reuse the exact float text so parsing matches the csv path
                    Some(serde_json::Value::Number(n)) if *key == "value" => {
                        Ok(render_real(n.as_f64().unwrap_or(f64::NAN)))
                    }
                    Some(serde_json::Value::Number(n)) => Ok(n.to_string()),
                    _ => Err(Error::Config(format!("record is missing `{key}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            ReportRecord::from_fields(&fields)
        })
        .collect()
}
