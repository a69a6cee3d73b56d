//! System–pointer composites: contexts realized through entanglement with
//! an apparatus, joint distributions over product contexts and the
//! no-signalling comparison between two remote context choices.


use num_complex::Complex64;

use crate::error::{dim_mismatch, Error, Result};
use crate::rules::FrameRule;
use crate::state::{
    amplitudes, dot, orthonormal_complete, tensor_components, OrthonormalBasis, StateVector, EPS_ORTHO,
};

/// Joint dimension above which rules that need explicit context vectors are refused.
pub const MAX_EXPLICIT_JOINT_DIM: usize = 1024;

/// Largest off-diagonal amplitude tolerated by [`perfect_correlation_residual`].
pub const SCHMIDT_TOL: f64 = 1e-10;

/// Largest violation of `|c'_2|^2 + |c'_3|^2 = |c_2|^2` accepted by [`extend_dim2`].
pub const SPLIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Pointers {
    /// `e_0, ..., e_{count-1}` in dimension `dim`.
    Standard {
        count: usize,
        dim: usize,
    },
    Explicit {
        vectors: Vec<StateVector>,
        dim: usize,
    },
}

impl Pointers {
    fn count(&self) -> usize {
        match self {
            Pointers::Standard { count, .. } => *count,
            Pointers::Explicit { vectors, .. } => vectors.len(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Pointers::Standard { dim, .. } | Pointers::Explicit { dim, .. } => *dim,
        }
    }

    fn components(&self, r: usize) -> Vec<Complex64> {
        match self {
            Pointers::Standard { dim, .. } => {
                let mut v = vec![Complex64::new(0.0, 0.0); *dim];
                v[r] = Complex64::new(1.0, 0.0);
                v
            }
            Pointers::Explicit { vectors, .. } => vectors[r].components().to_vec(),
        }
    }
}

/// A system state entangled with pointer states of an apparatus:
/// `sum_r a_r |b_{map(r)}> |C_r>`.
///
/// Each branch `r` pairs a system basis vector with its own pointer. Several
/// branches may share a system outcome, which is how a single outcome is
/// fine-grained or split across an ancilla.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualState {
    system_basis: OrthonormalBasis,
    pointers: Pointers,
    pointer_map: Vec<usize>,
    branch_amplitudes: Vec<Complex64>,
    joint: StateVector,
}

impl ContextualState {
    /// Builds `sum_r amps[r] |b_{map[r]}> |pointers[r]>`.
    pub fn from_branches(
        system_basis: OrthonormalBasis,
        pointers: Vec<StateVector>,
        pointer_map: Vec<usize>,
        branch_amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let dim = pointers.first().map_or(0, StateVector::dim);
        if pointers.iter().any(|p| p.dim() != dim) {
            return Err(Error::Dimension("pointer states must share one dimension".into()));
        }
        let residual = pointer_gram_residual(&pointers);
        if residual > EPS_ORTHO {
            return Err(Error::NotOrthonormal { residual });
        }
        Self::assemble(
            system_basis,
            Pointers::Explicit { vectors: pointers, dim },
            pointer_map,
            branch_amplitudes,
        )
    }

    /// Same as [`from_branches`](Self::from_branches) with pointers
    /// `e_0, ..., e_{count-1}` of dimension `pointer_dim`, stored implicitly.
    pub fn with_standard_pointers(
        system_basis: OrthonormalBasis,
        pointer_dim: usize,
        pointer_map: Vec<usize>,
        branch_amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let count = pointer_map.len();
        if count > pointer_dim {
            return Err(Error::Dimension(format!(
                "{count} standard pointers do not fit in dimension {pointer_dim}"
            )));
        }
        Self::assemble(
            system_basis,
            Pointers::Standard {
                count,
                dim: pointer_dim,
            },
            pointer_map,
            branch_amplitudes,
        )
    }

    fn assemble(
        system_basis: OrthonormalBasis,
        pointers: Pointers,
        pointer_map: Vec<usize>,
        branch_amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let branches = pointers.count();
        if branches == 0 {
            return Err(Error::Dimension("at least one branch is required".into()));
        }
        if pointer_map.len() != branches {
            return Err(dim_mismatch("pointer map", branches, pointer_map.len()));
        }
        if branch_amplitudes.len() != branches {
            return Err(dim_mismatch("branch amplitudes", branches, branch_amplitudes.len()));
        }
        let n = system_basis.dim();
        if let Some(&bad) = pointer_map.iter().find(|&&i| i >= n) {
            return Err(Error::Dimension(format!(
                "outcome {bad} out of range for dimension {n}"
            )));
        }
        let m = pointers.dim();
        let mut joint = vec![Complex64::new(0.0, 0.0); n * m];
        for (r, (&i, &a)) in pointer_map.iter().zip(&branch_amplitudes).enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let b = system_basis.vector(i).components();
            match &pointers {
                Pointers::Standard { .. } => {
                    for (s, bs) in b.iter().enumerate() {
                        joint[s * m + r] += a * bs;
                    }
                }
                Pointers::Explicit { vectors, .. } => {
                    let term = tensor_components(b, vectors[r].components());
                    for (j, t) in joint.iter_mut().zip(term) {
                        *j += a * t;
                    }
                }
            }
        }
        let joint = StateVector::new(joint)?;
        Ok(ContextualState {
            system_basis,
            pointers,
            pointer_map,
            branch_amplitudes,
            joint,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.system_basis.dim()
    }

    pub fn pointer_dim(&self) -> usize {
        self.pointers.dim()
    }

    pub fn branch_count(&self) -> usize {
        self.pointers.count()
    }

    pub fn system_basis(&self) -> &OrthonormalBasis {
        &self.system_basis
    }

    /// Pointer state of branch `r`.
    pub fn pointer(&self, r: usize) -> Vec<Complex64> {
        self.pointers.components(r)
    }

    /// System outcome of each branch.
    pub fn pointer_map(&self) -> &[usize] {
        &self.pointer_map
    }

    pub fn branch_amplitudes(&self) -> &[Complex64] {
        &self.branch_amplitudes
    }

    /// The joint state over `system ⊗ pointer`, row-major.
    pub fn joint(&self) -> &StateVector {
        &self.joint
    }

    /// The product context `{b_i ⊗ C_r}` with the pointers completed to a
    /// basis; branch `r` of outcome `i` sits at joint index `i * M + r`.
    pub fn joint_context(&self) -> Result<OrthonormalBasis> {
        let seeds: Vec<Vec<Complex64>> = (0..self.branch_count()).map(|r| self.pointer(r)).collect();
        let pointer_basis = orthonormal_complete(&seeds, self.pointer_dim())?;
        Ok(self.system_basis.tensor(&pointer_basis))
    }

    /// Rule probability of every branch `b_{map(r)} ⊗ C_r` in the joint context.
    pub fn branch_probabilities(&self, rule: &FrameRule) -> Result<Vec<f64>> {
        if rule.depends_only_on_amplitudes() {
            // The joint amplitude on b_i ⊗ C_r is a_r when i = map(r) and zero
            // elsewhere; zero amplitudes carry zero weight for these rules.
            return rule.evaluate_amplitudes(&self.branch_amplitudes);
        }
        let joint_dim = self.joint.dim();
        if joint_dim > MAX_EXPLICIT_JOINT_DIM {
            return Err(Error::Dimension(format!(
                "joint dimension {joint_dim} too large for explicit evaluation of `{}`",
                rule.name()
            )));
        }
        let p = rule.evaluate(&self.joint, &self.joint_context()?)?;
        let m = self.pointer_dim();
        Ok(self
            .pointer_map
            .iter()
            .enumerate()
            .map(|(r, &i)| p[i * m + r])
            .collect())
    }

    /// Probability of system outcome `i`: the sum over its branches.
    pub fn outcome_probability(&self, rule: &FrameRule, i: usize) -> Result<f64> {
        if i >= self.system_dim() {
            return Err(Error::Dimension(format!(
                "outcome {i} out of range for dimension {}",
                self.system_dim()
            )));
        }
        let p = self.branch_probabilities(rule)?;
        Ok(self
            .pointer_map
            .iter()
            .zip(&p)
            .filter(|(&o, _)| o == i)
            .map(|(_, q)| q)
            .sum())
    }

    /// Probability of every system outcome.
    pub fn outcome_distribution(&self, rule: &FrameRule) -> Result<Vec<f64>> {
        let p = self.branch_probabilities(rule)?;
        let mut out = vec![0.0; self.system_dim()];
        for (&i, q) in self.pointer_map.iter().zip(p) {
            out[i] += q;
        }
        Ok(out)
    }
}

fn pointer_gram_residual(pointers: &[StateVector]) -> f64 {
    let mut worst = 0.0f64;
    for (i, u) in pointers.iter().enumerate() {
        for v in &pointers[i..] {
            let g = dot(u.components(), v.components());
            let target = if std::ptr::eq(u, v) { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

/// Entangles `psi` with one pointer per basis vector:
/// `sum_i c_i |b_i> |C_i>` with `c_i = <b_i|psi>`.
pub fn attach_context(
    psi: &StateVector,
    basis: &OrthonormalBasis,
    pointers: Vec<StateVector>,
) -> Result<ContextualState> {
    if pointers.len() != basis.dim() {
        return Err(dim_mismatch("pointer count", basis.dim(), pointers.len()));
    }
    let coeffs = amplitudes(psi, basis)?;
    ContextualState::from_branches(basis.clone(), pointers, (0..basis.dim()).collect(), coeffs)
}

/// Rule probabilities over a product context with their marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    /// `entries[i][k]` is the probability of `a_i ⊗ b_k`.
    pub entries: Vec<Vec<f64>>,
    pub row_sums: Vec<f64>,
    pub col_sums: Vec<f64>,
}

/// Evaluates `rule` on `joint` in the product context `{a_i ⊗ b_k}`.
pub fn joint_distribution(
    rule: &FrameRule,
    joint: &StateVector,
    a: &OrthonormalBasis,
    b: &OrthonormalBasis,
) -> Result<JointDistribution> {
    let (n, m) = (a.dim(), b.dim());
    if joint.dim() != n * m {
        return Err(dim_mismatch("joint state", n * m, joint.dim()));
    }
    let p = rule.evaluate(joint, &a.tensor(b))?;
    let entries: Vec<Vec<f64>> = p.chunks(m).map(<[f64]>::to_vec).collect();
    let row_sums = entries.iter().map(|row| row.iter().sum()).collect();
    let col_sums = (0..m).map(|k| entries.iter().map(|row| row[k]).sum()).collect();
    Ok(JointDistribution {
        entries,
        row_sums,
        col_sums,
    })
}

/// Largest off-diagonal probability plus the largest mismatch between the
/// `i`-th row and column marginals, for a joint state in Schmidt form with
/// respect to `a ⊗ b`.
pub fn perfect_correlation_residual(
    rule: &FrameRule,
    joint: &StateVector,
    a: &OrthonormalBasis,
    b: &OrthonormalBasis,
) -> Result<f64> {
    let (n, m) = (a.dim(), b.dim());
    if joint.dim() != n * m {
        return Err(dim_mismatch("joint state", n * m, joint.dim()));
    }
    let coeffs = amplitudes(joint, &a.tensor(b))?;
    let off_diagonal = coeffs
        .iter()
        .enumerate()
        .filter(|(idx, _)| idx / m != idx % m)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max);
    if off_diagonal > SCHMIDT_TOL {
        return Err(Error::SchmidtForm { off_diagonal });
    }
    let dist = joint_distribution(rule, joint, a, b)?;
    let worst_off = dist
        .entries
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(move |(k, _)| *k != i).map(|(_, p)| *p))
        .fold(0.0, f64::max);
    let marginal_gap = (0..n.max(m))
        .map(|i| (dist.row_sums.get(i).unwrap_or(&0.0) - dist.col_sums.get(i).unwrap_or(&0.0)).abs())
        .fold(0.0, f64::max);
    Ok(worst_off + marginal_gap)
}

/// One remote context choice: a measurement basis and its pointers.
#[derive(Debug, Clone, PartialEq)]
pub struct SignallingContext {
    pub label: String,
    pub basis: OrthonormalBasis,
    pub pointers: Vec<StateVector>,
}

impl SignallingContext {
    pub fn new(label: impl Into<String>, basis: OrthonormalBasis, pointers: Vec<StateVector>) -> Self {
        SignallingContext {
            label: label.into(),
            basis,
            pointers,
        }
    }

    /// Context with pointers `e_0, ..., e_{d-1}`.
    pub fn with_standard_pointers(label: impl Into<String>, basis: OrthonormalBasis) -> Result<Self> {
        let dim = basis.dim();
        let pointers = (0..dim)
            .map(|i| StateVector::basis_state(dim, i))
            .collect::<Result<_>>()?;
        Ok(Self::new(label, basis, pointers))
    }
}

/// Local marginal of a shared outcome under two remote context choices.
#[derive(Debug, Clone, PartialEq)]
pub struct SignallingReport {
    pub p_a: f64,
    pub p_a_prime: f64,
    pub gap: f64,
    pub label_a: String,
    pub label_a_prime: String,
}

/// Compares the rule's probability of the shared outcome `shared.0` of
/// `context_a` (equal up to phase to `shared.1` of `context_a_prime`) after
/// entangling `psi` with each context's pointers.
pub fn signalling_magnitude(
    rule: &FrameRule,
    psi: &StateVector,
    context_a: &SignallingContext,
    context_a_prime: &SignallingContext,
    shared: (usize, usize),
) -> Result<SignallingReport> {
    let (i, j) = shared;
    let (ba, bb) = (&context_a.basis, &context_a_prime.basis);
    if ba.dim() != bb.dim() {
        return Err(dim_mismatch("signalling contexts", ba.dim(), bb.dim()));
    }
    if i >= ba.dim() || j >= bb.dim() {
        return Err(Error::Dimension(format!("shared pair ({i}, {j}) out of range")));
    }
    if 1.0 - dot(ba.vector(i).components(), bb.vector(j).components()).norm() > EPS_ORTHO {
        return Err(Error::EmptySharedSet);
    }
    let state_a = attach_context(psi, ba, context_a.pointers.clone())?;
    let state_b = attach_context(psi, bb, context_a_prime.pointers.clone())?;
    let p_a = state_a.outcome_probability(rule, i)?;
    let p_a_prime = state_b.outcome_probability(rule, j)?;
    Ok(SignallingReport {
        p_a,
        p_a_prime,
        gap: (p_a - p_a_prime).abs(),
        label_a: context_a.label.clone(),
        label_a_prime: context_a_prime.label.clone(),
    })
}

/// Splits the second branch of a qubit state over an ancilla:
/// `c_1 |a_1>|C_1> + c'_2 |a_2>|C_2> + c'_3 |a_2>|C_3>` with standard
/// pointers of dimension 3.
pub fn extend_dim2(psi: &StateVector, split: (Complex64, Complex64)) -> Result<ContextualState> {
    if psi.dim() != 2 {
        return Err(dim_mismatch("extend_dim2 state", 2, psi.dim()));
    }
    let c = psi.components();
    let residual = (split.0.norm_sqr() + split.1.norm_sqr() - c[1].norm_sqr()).abs();
    if residual > SPLIT_TOL {
        return Err(Error::SplitConstraint { residual });
    }
    ContextualState::with_standard_pointers(
        OrthonormalBasis::standard(2)?,
        3,
        vec![0, 1, 1],
        vec![c[0], split.0, split.1],
    )
}
