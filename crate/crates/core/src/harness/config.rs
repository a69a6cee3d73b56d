use std::fmt;
use std::str::FromStr;

use super::statefile::StateDescription;
use crate::error::{Error, Result};
use crate::proof::Rational;
use crate::rules::FrameRule;
use crate::state::Tolerances;

/// Default sandwich width.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    NpScan,
    Postulates,
    Phase,
    Sandwich { target: Rational },
    FineGrain { m: u64, n: u64 },
    Signalling,
    Reconstruct,
}

impl Command {
    /// Experiment id written to every record.
    pub fn name(&self) -> &'static str {
        match self {
            Command::NpScan => "np-scan",
            Command::Postulates => "postulates",
            Command::Phase => "phase",
            Command::Sandwich { .. } => "sandwich",
            Command::FineGrain { .. } => "finegrain",
            Command::Signalling => "signalling",
            Command::Reconstruct => "reconstruct",
        }
    }

    /// Whether the command iterates over rules, dimensions and trials.
    pub fn is_randomized(&self) -> bool {
        !matches!(self, Command::Sandwich { .. } | Command::FineGrain { .. })
    }
}

/// A rule as written on the command line: `born`, `power:ALPHA[:raw]`,
/// `dim2sector` or `stub`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleSpec {
    Born,
    Power { alpha: f64, normalized: bool },
    Dim2Sector,
    Stub,
}

impl RuleSpec {
    pub fn build(&self) -> Result<FrameRule> {
        match *self {
            RuleSpec::Born => Ok(FrameRule::born()),
            RuleSpec::Power { alpha, normalized } => FrameRule::power_law(alpha, normalized),
            RuleSpec::Dim2Sector => FrameRule::dim2_sector([0.0, 0.0, 1.0]),
            RuleSpec::Stub => Ok(FrameRule::phase_sensitive_stub()),
        }
    }
}

impl FromStr for RuleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["born"] => Ok(RuleSpec::Born),
            ["dim2sector"] => Ok(RuleSpec::Dim2Sector),
            ["stub"] => Ok(RuleSpec::Stub),
            ["power", alpha, rest @ ..] => {
                let normalized = match rest {
                    [] => true,
                    ["raw"] => false,
                    _ => return Err(Error::Config(format!("unknown rule suffix in `{s}`"))),
                };
                let alpha: f64 = alpha
                    .parse()
                    .map_err(|_| Error::Config(format!("invalid exponent in `{s}`")))?;
                if !alpha.is_finite() || alpha <= 0.0 {
                    return Err(Error::Config(format!("exponent must be finite and positive in `{s}`")));
                }
                Ok(RuleSpec::Power { alpha, normalized })
            }
            _ => Err(Error::Config(format!(
                "unknown rule `{s}` (expected born, power:ALPHA[:raw], dim2sector or stub)"
            ))),
        }
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSpec::Born => write!(f, "born"),
            RuleSpec::Power {
                alpha,
                normalized: true,
            } => write!(f, "power:{alpha}"),
            RuleSpec::Power {
                alpha,
                normalized: false,
            } => write!(f, "power:{alpha}:raw"),
            RuleSpec::Dim2Sector => write!(f, "dim2sector"),
            RuleSpec::Stub => write!(f, "stub"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown output format `{other}` (expected json or csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub dims: Vec<usize>,
    pub rules: Vec<RuleSpec>,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Requested sandwich width.
    pub epsilon: f64,
    pub format: OutputFormat,
    /// Report exact rational values where the experiment has them.
    pub exact: bool,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    /// Fixed input state replacing the random one.
    pub state: Option<StateDescription>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            dims: vec![3],
            rules: vec![RuleSpec::Born],
            trials: 100,
            seed: 0,
            tolerances: Tolerances::default(),
            epsilon: DEFAULT_EPSILON,
            format: OutputFormat::Csv,
            exact: false,
            workers: 1,
            state: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::Config("at least one rule is required".into()));
        }
        if self.command.is_randomized() && self.state.is_none() {
            if self.dims.is_empty() {
                return Err(Error::Config("at least one dimension is required".into()));
            }
            if let Some(d) = self.dims.iter().find(|&&d| d < 2) {
                return Err(Error::Config(format!("dimension {d} is below 2")));
            }
        }
        for rule in &self.rules {
            rule.build().map_err(|e| Error::Config(e.to_string()))?;
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        let t = &self.tolerances;
        if [t.norm, t.ortho, t.rank].iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Dimensions actually iterated: the state file's when one is given.
    pub fn effective_dims(&self) -> Vec<usize> {
        match &self.state {
            Some(desc) => vec![desc.state.dim()],
            None => self.dims.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_specs_round_trip() {
        for s in ["born", "power:1", "power:0.5:raw", "dim2sector", "stub"] {
            let spec: RuleSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            assert_eq!(spec.build().unwrap().name(), s);
        }
    }

    #[test]
    fn rule_spec_errors() {
        for s in [
            "",
            "power",
            "power:x",
            "power:-1",
            "power:inf",
            "power:1:norm",
            "gleason",
        ] {
            assert!(matches!(s.parse::<RuleSpec>(), Err(Error::Config(_))), "{s}");
        }
    }

    #[test]
    fn format_parse() {
        assert_eq!("json".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
        assert!(matches!("xml".parse::<OutputFormat>(), Err(Error::Config(_))));
    }

    #[test]
    fn validation() {
        let mut config = ExperimentConfig::new(Command::NpScan);
        assert!(config.validate().is_ok());
        config.trials = 0;
        assert!(config.validate().is_err());
        config.trials = 1;
        config.dims = vec![3, 1];
        assert!(config.validate().is_err());
        config.dims = vec![3];
        config.epsilon = 0.0;
        assert!(config.validate().is_err());
    }
}
