use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::state::{OrthonormalBasis, StateVector, Tolerances};

/// A state read from a file, with the basis it should be measured in if one
/// was given.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDescription {
    pub state: StateVector,
    pub basis: Option<OrthonormalBasis>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    dim: usize,
    amplitudes: Vec<[f64; 2]>,
    #[serde(default)]
    basis: Option<Vec<Vec<[f64; 2]>>>,
}

/// Reads `{"dim": D, "amplitudes": [[re, im], ...], "basis": [[[re, im], ...], ...]}`.
///
/// Vectors must be normalized within `tol.norm` unless `normalize` is set.
pub fn parse_state_file(path: impl AsRef<Path>, normalize: bool, tol: &Tolerances) -> Result<StateDescription> {
    let text =
        std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_state_str(&text, normalize, tol)
}

pub fn parse_state_str(text: &str, normalize: bool, tol: &Tolerances) -> Result<StateDescription> {
    let raw: RawState = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.dim < 1 {
        return Err(Error::Dimension("state dimension must be at least 1".into()));
    }
    let state = vector(&raw.amplitudes, raw.dim, normalize, tol, "amplitudes")?;
    let basis = match raw.basis {
        None => None,
        Some(rows) => {
            if rows.len() != raw.dim {
                return Err(Error::Dimension(format!(
                    "basis has {} vectors, expected {}",
                    rows.len(),
                    raw.dim
                )));
            }
            let vectors = rows
                .iter()
                .enumerate()
                .map(|(i, row)| vector(row, raw.dim, normalize, tol, &format!("basis vector {i}")))
                .collect::<Result<Vec<_>>>()?;
            Some(OrthonormalBasis::with_tolerances(vectors, tol)?)
        }
    };
    Ok(StateDescription { state, basis })
}

fn vector(pairs: &[[f64; 2]], dim: usize, normalize: bool, tol: &Tolerances, what: &str) -> Result<StateVector> {
    if pairs.len() != dim {
        return Err(Error::Dimension(format!(
            "{what} has {} entries, expected {dim}",
            pairs.len()
        )));
    }
    let components: Vec<Complex64> = pairs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    if normalize {
        StateVector::normalized(components)
    } else {
        StateVector::with_tolerances(components, tol)
    }
}
