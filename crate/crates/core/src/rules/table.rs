use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::state::{dot, OrthonormalBasis, StateVector, EPS_ORTHO};

/// Finite lookup rule: probabilities keyed by registered state and basis ids.
///
/// States and bases are matched up to global phase (per vector for bases).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UserTable {
    name: String,
    states: Vec<(String, StateVector)>,
    bases: Vec<(String, OrthonormalBasis)>,
    entries: BTreeMap<(String, String, usize), f64>,
}

impl UserTable {
    pub fn new(name: impl Into<String>) -> Self {
        UserTable {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_state(mut self, id: impl Into<String>, state: StateVector) -> Self {
        self.states.push((id.into(), state));
        self
    }

    pub fn with_basis(mut self, id: impl Into<String>, basis: OrthonormalBasis) -> Self {
        self.bases.push((id.into(), basis));
        self
    }

    pub fn with_entry(mut self, state: &str, basis: &str, index: usize, probability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::Domain(format!("table probability {probability} outside [0, 1]")));
        }
        self.entries
            .insert((state.to_string(), basis.to_string(), index), probability);
        Ok(self)
    }

    pub(crate) fn lookup(&self, psi: &StateVector, basis: &OrthonormalBasis) -> Result<Vec<f64>> {
        let state_id = self
            .states
            .iter()
            .find(|(_, s)| same_ray(s, psi))
            .map(|(id, _)| id)
            .ok_or_else(|| Error::MissingTableEntry(format!("unregistered state in table `{}`", self.name)))?;
        let basis_id = self
            .bases
            .iter()
            .find(|(_, b)| {
                b.dim() == basis.dim() && b.vectors().iter().zip(basis.vectors()).all(|(x, y)| same_ray(x, y))
            })
            .map(|(id, _)| id)
            .ok_or_else(|| Error::MissingTableEntry(format!("unregistered basis in table `{}`", self.name)))?;
        (0..basis.dim())
            .map(|i| {
                self.entries
                    .get(&(state_id.clone(), basis_id.clone(), i))
                    .copied()
                    .ok_or_else(|| Error::MissingTableEntry(format!("({state_id}, {basis_id}, {i})")))
            })
            .collect()
    }
}

fn same_ray(a: &StateVector, b: &StateVector) -> bool {
    a.dim() == b.dim() && 1.0 - dot(a.components(), b.components()).norm() <= EPS_ORTHO
}
