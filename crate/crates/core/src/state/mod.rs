//! Complex linear algebra substrate: pure states, orthonormal bases,
//! tensor products and the Schmidt decomposition.
//!
//! All values are immutable once constructed. Constructors validate their
//! invariants and never silently repair input.

mod basis;
mod schmidt;

pub use basis::{haar_basis, haar_basis_from_rng, orthonormal_complete, orthonormal_complete_with, OrthonormalBasis};
pub use schmidt::{schmidt_decompose, SchmidtForm};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_mismatch, Error, Result};

/// A complex amplitude. Both parts are always finite.
pub type ComplexScalar = Complex64;

pub const EPS_NORM: f64 = 1e-12;
pub const EPS_ORTHO: f64 = 1e-10;
pub const EPS_RANK: f64 = 1e-9;

/// Numerical tolerances used when validating states and bases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of a state norm from 1.
    pub norm: f64,
    /// Allowed entry-wise deviation of a Gram matrix from the identity.
    pub ortho: f64,
    /// Residual norm below which a vector counts as linearly dependent.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            norm: EPS_NORM,
            ortho: EPS_ORTHO,
            rank: EPS_RANK,
        }
    }
}

/// A normalized vector in a finite-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    components: Vec<Complex64>,
}

impl StateVector {
    /// Validates finiteness, `dim >= 1` and unit norm within the default tolerance.
    pub fn new(components: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerances(components, &Tolerances::default())
    }

    pub fn with_tolerances(components: Vec<Complex64>, tol: &Tolerances) -> Result<Self> {
        check_finite(&components)?;
        let norm = norm(&components);
        if (norm - 1.0).abs() > tol.norm {
            return Err(Error::Normalization {
                norm,
                tolerance: tol.norm,
            });
        }
        Ok(StateVector { components })
    }

    /// Rescales `components` to unit norm. A zero vector is rejected.
    pub fn normalized(components: Vec<Complex64>) -> Result<Self> {
        check_finite(&components)?;
        let n = norm(&components);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Normalization {
                norm: n,
                tolerance: EPS_NORM,
            });
        }
        Ok(StateVector {
            components: components.into_iter().map(|c| c / n).collect(),
        })
    }

    /// Real amplitudes, validated like [`StateVector::new`].
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Standard basis vector `e_index`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("dimension must be at least 1".into()));
        }
        if index >= dim {
            return Err(Error::Dimension(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut components = vec![Complex64::new(0.0, 0.0); dim];
        components[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { components })
    }

    /// A state drawn uniformly from the unit sphere (normalized complex Gaussian).
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("dimension must be at least 1".into()));
        }
        loop {
            let raw: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            if norm(&raw) > 1e-6 {
                return Self::normalized(raw);
            }
        }
    }

    /// Internal constructor for values that are unit by construction
    /// (products and unitary images of valid states).
    pub(crate) fn from_trusted(components: Vec<Complex64>) -> Self {
        debug_assert!(components.iter().all(|c| c.re.is_finite() && c.im.is_finite()));
        StateVector { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        norm(&self.components)
    }

    /// Multiplies the state by the unit phase `e^{i phi}`.
    pub fn with_global_phase(&self, phi: f64) -> StateVector {
        let phase = Complex64::from_polar(1.0, phi);
        StateVector::from_trusted(self.components.iter().map(|c| c * phase).collect())
    }
}

impl AsRef<[Complex64]> for StateVector {
    fn as_ref(&self) -> &[Complex64] {
        &self.components
    }
}

fn check_finite(components: &[Complex64]) -> Result<()> {
    if components.is_empty() {
        return Err(Error::Dimension("dimension must be at least 1".into()));
    }
    match components.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Conjugate-linear in the first slot: `sum_k conj(u_k) v_k`.
pub(crate) fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `<u|v>`.
pub fn inner_product(u: &StateVector, v: &StateVector) -> Result<Complex64> {
    if u.dim() != v.dim() {
        return Err(dim_mismatch("inner product", u.dim(), v.dim()));
    }
    Ok(dot(&u.components, &v.components))
}

/// Expansion coefficients `c_i = <b_i|psi>` of `psi` in `basis`.
pub fn amplitudes(psi: &StateVector, basis: &OrthonormalBasis) -> Result<Vec<Complex64>> {
    if psi.dim() != basis.dim() {
        return Err(dim_mismatch("state vs basis", basis.dim(), psi.dim()));
    }
    Ok(basis
        .vectors()
        .iter()
        .map(|b| dot(b.components(), psi.components()))
        .collect())
}

/// Dimensions of the factors of a tensor-product space. Joint indices are
/// row-major: the leftmost factor varies slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpace {
    factor_dims: Vec<usize>,
}

impl ProductSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::Dimension(format!(
                "product space factors must be non-empty and positive, got {factor_dims:?}"
            )));
        }
        Ok(ProductSpace { factor_dims })
    }

    pub fn bipartite(left: usize, right: usize) -> Result<Self> {
        Self::new(vec![left, right])
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Row-major joint index of a multi-index.
    pub fn joint_index(&self, indices: &[usize]) -> Result<usize> {
        if indices.len() != self.factor_dims.len() {
            return Err(dim_mismatch(
                "multi-index length",
                self.factor_dims.len(),
                indices.len(),
            ));
        }
        let mut joint = 0;
        for (&i, &d) in indices.iter().zip(&self.factor_dims) {
            if i >= d {
                return Err(Error::Dimension(format!(
                    "index {i} out of range for factor of dimension {d}"
                )));
            }
            joint = joint * d + i;
        }
        Ok(joint)
    }
}

/// `u ⊗ v` with component `(i, k)` at joint index `i * v.dim() + k`.
pub fn tensor_product(u: &StateVector, v: &StateVector) -> StateVector {
    StateVector::from_trusted(tensor_components(u.components(), v.components()))
}

pub(crate) fn tensor_components(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for a in u {
        out.extend(v.iter().map(|b| a * b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_vector_inner_product_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = StateVector::random(5, &mut rng).unwrap();
        let ip = inner_product(&v, &v).unwrap();
        assert!((ip - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn standard_vectors_are_orthogonal() {
        let e1 = StateVector::basis_state(3, 0).unwrap();
        let e2 = StateVector::basis_state(3, 1).unwrap();
        assert_eq!(inner_product(&e1, &e2).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn inner_product_matches_extended_precision_oracle() {
        // Oracle: split each product into f64 parts and sum with Neumaier
        // compensation, independent of the plain iterator sum.
        fn compensated(xs: &[f64]) -> f64 {
            let (mut sum, mut comp) = (0.0f64, 0.0f64);
            for &x in xs {
                let t = sum + x;
                if sum.abs() >= x.abs() {
                    comp += (sum - t) + x;
                } else {
                    comp += (x - t) + sum;
                }
                sum = t;
            }
            sum + comp
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let u = StateVector::random(5, &mut rng).unwrap();
            let v = StateVector::random(5, &mut rng).unwrap();
            let ip = inner_product(&u, &v).unwrap();
            let back = inner_product(&v, &u).unwrap();
            let mut re = Vec::new();
            let mut im = Vec::new();
            for (a, b) in u.components().iter().zip(v.components()) {
                re.push(a.re * b.re);
                re.push(a.im * b.im);
                im.push(a.re * b.im);
                im.push(-a.im * b.re);
            }
            let oracle = c(compensated(&re), compensated(&im));
            assert!((ip - oracle).norm() < 1e-15);
            assert!(ip.norm_sqr() <= 1.0 + 1e-15);
            assert_eq!(ip, back.conj());
        }
    }

    #[test]
    fn inner_product_dimension_mismatch() {
        let a = StateVector::basis_state(2, 0).unwrap();
        let b = StateVector::basis_state(3, 0).unwrap();
        assert!(matches!(inner_product(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn non_unit_and_non_finite_rejected() {
        assert!(matches!(
            StateVector::from_real(&[1.0, 1.0]),
            Err(Error::Normalization { .. })
        ));
        assert!(matches!(
            StateVector::new(vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { index: 0 })
        ));
        assert!(matches!(StateVector::new(vec![]), Err(Error::Dimension(_))));
        let v = StateVector::normalized(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn amplitudes_of_basis_vector_and_uniform_state() {
        let basis = OrthonormalBasis::standard(3).unwrap();
        let amps = amplitudes(basis.vector(0), &basis).unwrap();
        assert_eq!(amps, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let s = 1.0 / 3f64.sqrt();
        let psi = StateVector::from_real(&[s, s, s]).unwrap();
        for a in amplitudes(&psi, &basis).unwrap() {
            assert!((a - c(s, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn amplitudes_in_haar_basis_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..50 {
            let psi = StateVector::random(6, &mut rng).unwrap();
            let basis = haar_basis(6, seed).unwrap();
            let total: f64 = amplitudes(&psi, &basis).unwrap().iter().map(|a| a.norm_sqr()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_product_layout_and_dimension() {
        let e1 = StateVector::basis_state(2, 0).unwrap();
        let f2 = StateVector::basis_state(3, 1).unwrap();
        let joint = tensor_product(&e1, &f2);
        assert_eq!(joint.dim(), 6);
        let space = ProductSpace::bipartite(2, 3).unwrap();
        assert_eq!(space.total_dim(), 6);
        let idx = space.joint_index(&[0, 1]).unwrap();
        assert_eq!(joint.components()[idx], c(1.0, 0.0));

        let e11 = tensor_product(&e1, &StateVector::basis_state(2, 0).unwrap());
        assert_eq!(e11, StateVector::basis_state(4, 0).unwrap());
    }

    #[test]
    fn tensor_product_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let u = StateVector::random(4, &mut rng).unwrap();
            let v = StateVector::random(3, &mut rng).unwrap();
            assert!((tensor_product(&u, &v).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_space_validation() {
        assert!(ProductSpace::new(vec![]).is_err());
        assert!(ProductSpace::new(vec![2, 0]).is_err());
        let s = ProductSpace::new(vec![2, 3, 4]).unwrap();
        assert_eq!(s.total_dim(), 24);
        assert_eq!(s.joint_index(&[1, 2, 3]).unwrap(), 23);
        assert!(s.joint_index(&[2, 0, 0]).is_err());
    }
}
