//! Candidate probability rules over measurement contexts and the residuals
//! that measure how far each one is from noncontextual.

mod density;
mod table;

pub use density::{probe_samples, reconstruct_density, sphere_states, DensityFit};
pub use table::UserTable;

use num_complex::Complex64;

use crate::error::{dim_mismatch, Error, Result};
use crate::state::{amplitudes, dot, orthonormal_complete, OrthonormalBasis, StateVector, Tolerances, EPS_NORM};

/// The functional form of a [`FrameRule`].
#[derive(Debug, Clone, PartialEq)]
pub enum RuleKind {
    /// `|<b_i|psi>|^2`.
    Born,
    /// Weights `|c_i|^alpha`, either divided by their sum over the context
    /// or used directly (clamped to `[0, 1]`).
    PowerLaw { alpha: f64, context_normalized: bool },
    /// Dimension-2 valuation: 1 on the hemisphere of Bloch vectors with a
    /// positive projection on `axis`, 0 on the opposite one, 1/2 on the equator.
    Dim2Sector { axis: [f64; 3] },
    /// Raw weight `(Re c_i)^2`; depends on amplitude phases.
    PhaseSensitiveStub,
    /// Probabilities looked up from a finite table.
    UserTable(UserTable),
}

/// A candidate probability rule `(state, context, outcome) -> [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRule {
    kind: RuleKind,
    name: String,
}

/// Width of the Dim2Sector equator band.
const EQUATOR_TOL: f64 = 1e-12;

impl FrameRule {
    pub fn born() -> Self {
        FrameRule {
            kind: RuleKind::Born,
            name: "born".into(),
        }
    }

    /// `alpha` must be finite and positive so that zero amplitudes get zero weight.
    pub fn power_law(alpha: f64, context_normalized: bool) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Domain(format!(
                "power-law exponent must be finite and positive, got {alpha}"
            )));
        }
        let name = if context_normalized {
            format!("power:{alpha}")
        } else {
            format!("power:{alpha}:raw")
        };
        Ok(FrameRule {
            kind: RuleKind::PowerLaw {
                alpha,
                context_normalized,
            },
            name,
        })
    }

    pub fn dim2_sector(axis: [f64; 3]) -> Result<Self> {
        let n = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !n.is_finite() || (n - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("sector axis must be a unit vector, norm is {n}")));
        }
        Ok(FrameRule {
            kind: RuleKind::Dim2Sector { axis },
            name: "dim2sector".into(),
        })
    }

    pub fn phase_sensitive_stub() -> Self {
        FrameRule {
            kind: RuleKind::PhaseSensitiveStub,
            name: "stub".into(),
        }
    }

    pub fn user_table(table: UserTable) -> Self {
        FrameRule {
            name: table.name().to_string(),
            kind: RuleKind::UserTable(table),
        }
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True when the rule only needs the amplitudes `c_i`, not the vectors.
    pub fn depends_only_on_amplitudes(&self) -> bool {
        matches!(
            self.kind,
            RuleKind::Born | RuleKind::PowerLaw { .. } | RuleKind::PhaseSensitiveStub
        )
    }

    /// True when outputs over a context always sum to 1.
    pub fn is_context_normalized(&self) -> bool {
        match self.kind {
            RuleKind::Born => true,
            RuleKind::PowerLaw { context_normalized, .. } => context_normalized,
            _ => false,
        }
    }

    /// Probabilities for amplitude-only rules, given `c_i` directly.
    pub fn evaluate_amplitudes(&self, amps: &[Complex64]) -> Result<Vec<f64>> {
        let out = match self.kind {
            RuleKind::Born => amps.iter().map(|c| c.norm_sqr()).collect(),
            RuleKind::PowerLaw {
                alpha,
                context_normalized,
            } => {
                let weights: Vec<f64> = amps.iter().map(|c| c.norm().powf(alpha)).collect();
                if context_normalized {
                    let total: f64 = weights.iter().sum();
                    if total <= 0.0 || !total.is_finite() {
                        return Err(Error::DegenerateContext);
                    }
                    weights.iter().map(|w| w / total).collect()
                } else {
                    weights
                }
            }
            RuleKind::PhaseSensitiveStub => amps.iter().map(|c| c.re * c.re).collect(),
            _ => {
                return Err(Error::Config(format!(
                    "rule `{}` needs the context vectors, not just amplitudes",
                    self.name
                )))
            }
        };
        Ok(clamp_unit(out))
    }

    /// Outcome probabilities of `psi` measured in `basis`, one per basis vector.
    pub fn evaluate(&self, psi: &StateVector, basis: &OrthonormalBasis) -> Result<Vec<f64>> {
        if psi.dim() != basis.dim() {
            return Err(dim_mismatch("state vs basis", basis.dim(), psi.dim()));
        }
        match &self.kind {
            RuleKind::Dim2Sector { axis } => {
                if basis.dim() != 2 {
                    return Err(Error::Dimension(format!(
                        "dim2sector is defined on dimension 2 only, got {}",
                        basis.dim()
                    )));
                }
                Ok(basis
                    .vectors()
                    .iter()
                    .map(|b| sector_value(&bloch_vector(b), axis))
                    .collect())
            }
            RuleKind::UserTable(table) => table.lookup(psi, basis),
            _ => self.evaluate_amplitudes(&amplitudes(psi, basis)?),
        }
    }
}

fn clamp_unit(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|p| p.clamp(0.0, 1.0)).collect()
}

/// Bloch vector `(<X>, <Y>, <Z>)` of a qubit state.
pub fn bloch_vector(v: &StateVector) -> [f64; 3] {
    let (a, b) = (v.components()[0], v.components()[1]);
    let cross = a.conj() * b;
    [2.0 * cross.re, 2.0 * cross.im, a.norm_sqr() - b.norm_sqr()]
}

fn sector_value(bloch: &[f64; 3], axis: &[f64; 3]) -> f64 {
    let d: f64 = bloch.iter().zip(axis).map(|(x, y)| x * y).sum();
    if d > EQUATOR_TOL {
        1.0
    } else if d < -EQUATOR_TOL {
        0.0
    } else {
        0.5
    }
}

/// Two contexts over the same space together with the outcome vectors they
/// share up to phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextPair {
    pub first: OrthonormalBasis,
    pub second: OrthonormalBasis,
    shared: Vec<(usize, usize)>,
}

impl ContextPair {
    /// Validates that every listed pair satisfies `1 - |<b_i|b'_j>| <= eps_ortho`.
    pub fn new(first: OrthonormalBasis, second: OrthonormalBasis, shared: Vec<(usize, usize)>) -> Result<Self> {
        let tol = Tolerances::default();
        if first.dim() != second.dim() {
            return Err(dim_mismatch("context pair", first.dim(), second.dim()));
        }
        for &(i, j) in &shared {
            if i >= first.dim() || j >= second.dim() {
                return Err(Error::Dimension(format!("shared pair ({i}, {j}) out of range")));
            }
            let gap = 1.0 - dot(first.vector(i).components(), second.vector(j).components()).norm();
            if gap > tol.ortho {
                return Err(Error::Verification(format!(
                    "vectors ({i}, {j}) are not shared: 1 - |overlap| = {gap:e}"
                )));
            }
        }
        Ok(ContextPair { first, second, shared })
    }

    /// Finds every shared pair between two bases.
    pub fn detect(first: OrthonormalBasis, second: OrthonormalBasis) -> Result<Self> {
        Self::detect_with(first, second, &Tolerances::default())
    }

    pub fn detect_with(first: OrthonormalBasis, second: OrthonormalBasis, tol: &Tolerances) -> Result<Self> {
        if first.dim() != second.dim() {
            return Err(dim_mismatch("context pair", first.dim(), second.dim()));
        }
        let mut shared = Vec::new();
        for (i, a) in first.vectors().iter().enumerate() {
            for (j, b) in second.vectors().iter().enumerate() {
                if 1.0 - dot(a.components(), b.components()).norm() <= tol.ortho {
                    shared.push((i, j));
                }
            }
        }
        Ok(ContextPair { first, second, shared })
    }

    pub fn dim(&self) -> usize {
        self.first.dim()
    }

    pub fn shared(&self) -> &[(usize, usize)] {
        &self.shared
    }
}

/// Largest disagreement of the rule about a shared outcome across the two contexts.
pub fn np_violation(rule: &FrameRule, psi: &StateVector, pair: &ContextPair) -> Result<f64> {
    if pair.shared.is_empty() {
        return Err(Error::EmptySharedSet);
    }
    let p = rule.evaluate(psi, &pair.first)?;
    let q = rule.evaluate(psi, &pair.second)?;
    Ok(pair
        .shared
        .iter()
        .map(|&(i, j)| (p[i] - q[j]).abs())
        .fold(0.0, f64::max))
}

/// Residuals of the two Gleason postulates for one context and one grouping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostulateResiduals {
    /// `|sum_i p_i - 1|`.
    pub normalization: f64,
    /// `max_g |p_merged(g) - sum_{i in g} p_i|`.
    pub additivity: f64,
}

/// Checks normalization in `basis` and additivity against the coarse-grained
/// context in which each group is replaced by the normalized projection of
/// `psi` onto the group's span.
pub fn gleason_postulate_check(
    rule: &FrameRule,
    psi: &StateVector,
    basis: &OrthonormalBasis,
    grouping: &[Vec<usize>],
) -> Result<PostulateResiduals> {
    validate_partition(grouping, basis.dim())?;
    let p = rule.evaluate(psi, basis)?;
    let normalization = (p.iter().sum::<f64>() - 1.0).abs();

    let merged = merged_context(psi, basis, grouping)?;
    let q = rule.evaluate(psi, &merged)?;
    let additivity = grouping
        .iter()
        .enumerate()
        .map(|(g, members)| (q[g] - members.iter().map(|&i| p[i]).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    Ok(PostulateResiduals {
        normalization,
        additivity,
    })
}

pub(crate) fn validate_partition(grouping: &[Vec<usize>], dim: usize) -> Result<()> {
    let mut seen = vec![false; dim];
    for group in grouping {
        if group.is_empty() {
            return Err(Error::Partition("empty group".into()));
        }
        for &i in group {
            if i >= dim {
                return Err(Error::Partition(format!("index {i} out of range for dimension {dim}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Partition(format!("index {i} appears twice")));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::Partition(format!("index {missing} is not covered")));
    }
    Ok(())
}

/// First `grouping.len()` vectors are the per-group projections of `psi`
/// (or the group's first vector when `psi` is orthogonal to the group);
/// the rest completes the basis and is orthogonal to `psi`.
pub(crate) fn merged_context(
    psi: &StateVector,
    basis: &OrthonormalBasis,
    grouping: &[Vec<usize>],
) -> Result<OrthonormalBasis> {
    let coeffs = amplitudes(psi, basis)?;
    let dim = basis.dim();
    let mut seeds: Vec<Vec<Complex64>> = Vec::with_capacity(grouping.len());
    for group in grouping {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for &i in group {
            for (x, b) in v.iter_mut().zip(basis.vector(i).components()) {
                *x += coeffs[i] * b;
            }
        }
        let n = crate::state::norm(&v);
        if n <= EPS_NORM {
            seeds.push(basis.vector(group[0]).components().to_vec());
        } else {
            seeds.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    orthonormal_complete(&seeds, dim)
}

/// Re-phases amplitude `k` of `psi` to `new_phase`, keeping its modulus,
/// and reports the largest change in any outcome probability.
pub fn phase_invariance_residual(
    rule: &FrameRule,
    psi: &StateVector,
    basis: &OrthonormalBasis,
    k: usize,
    new_phase: f64,
) -> Result<f64> {
    let mut coeffs = amplitudes(psi, basis)?;
    if k >= coeffs.len() {
        return Err(Error::Dimension(format!(
            "index {k} out of range for dimension {}",
            coeffs.len()
        )));
    }
    let modulus = coeffs[k].norm();
    if modulus <= EPS_NORM {
        return Ok(0.0);
    }
    coeffs[k] = Complex64::from_polar(modulus, new_phase);
    let rephased = StateVector::new(basis.synthesize(&coeffs)?)?;
    let before = rule.evaluate(psi, basis)?;
    let after = rule.evaluate(&rephased, basis)?;
    Ok(before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
