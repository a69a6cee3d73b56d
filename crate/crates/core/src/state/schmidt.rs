use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{norm, tensor_components, ProductSpace, StateVector, EPS_NORM};
use crate::error::{dim_mismatch, Error, Result};

/// Coefficients below this are treated as absent from the decomposition.
const COEFF_CUTOFF: f64 = 1e-12;
/// Components below this are ignored when fixing phases and breaking ties.
const COMPONENT_CUTOFF: f64 = 1e-8;

/// `psi = sum_j c_j |l_j> ⊗ |r_j>` with `c_j > 0` non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub left: Vec<StateVector>,
    pub right: Vec<StateVector>,
}

impl SchmidtForm {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Joint components of `sum_j c_j l_j ⊗ r_j`.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let dim = self.left.first().map_or(0, |l| l.dim()) * self.right.first().map_or(0, |r| r.dim());
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for ((c, l), r) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            for (o, x) in out.iter_mut().zip(tensor_components(l.components(), r.components())) {
                *o += x * c;
            }
        }
        out
    }
}

/// Schmidt decomposition of a bipartite state via SVD of its amplitude array.
///
/// Each left vector is rephased so that its first significant component is
/// real and positive; equal coefficients are ordered by the index of that
/// component.
pub fn schmidt_decompose(psi: &StateVector, space: &ProductSpace) -> Result<SchmidtForm> {
    let dims = space.factor_dims();
    if dims.len() != 2 {
        return Err(Error::Dimension(format!(
            "Schmidt decomposition needs exactly 2 factors, got {}",
            dims.len()
        )));
    }
    if psi.dim() != space.total_dim() {
        return Err(dim_mismatch("state vs product space", space.total_dim(), psi.dim()));
    }
    let (rows, cols) = (dims[0], dims[1]);
    let amps = psi.components();
    let matrix = DMatrix::from_fn(rows, cols, |i, k| amps[i * cols + k]);
    let svd = matrix.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");

    struct Term {
        coeff: f64,
        lead: usize,
        left: Vec<Complex64>,
        right: Vec<Complex64>,
    }

    let mut terms: Vec<Term> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > COEFF_CUTOFF)
        .map(|(j, &s)| {
            let mut left: Vec<Complex64> = u.column(j).iter().copied().collect();
            let mut right: Vec<Complex64> = v_t.row(j).iter().copied().collect();
            let lead = left.iter().position(|x| x.norm() > COMPONENT_CUTOFF).unwrap_or(0);
            let phase = left[lead] / left[lead].norm();
            left.iter_mut().for_each(|x| *x /= phase);
            right.iter_mut().for_each(|x| *x *= phase);
            let (ln, rn) = (norm(&left), norm(&right));
            left.iter_mut().for_each(|x| *x /= ln);
            right.iter_mut().for_each(|x| *x /= rn);
            Term {
                coeff: s,
                lead,
                left,
                right,
            }
        })
        .collect();

    terms.sort_by(|a, b| b.coeff.total_cmp(&a.coeff));
    let mut start = 0;
    while start < terms.len() {
        let mut end = start + 1;
        while end < terms.len() && (terms[start].coeff - terms[end].coeff).abs() <= COEFF_CUTOFF {
            end += 1;
        }
        terms[start..end].sort_by_key(|t| t.lead);
        start = end;
    }

    let total: f64 = terms.iter().map(|t| t.coeff * t.coeff).sum();
    if (total - 1.0).abs() > EPS_NORM * 10.0 {
        return Err(Error::Verification(format!(
            "squared Schmidt coefficients sum to {total}"
        )));
    }
    Ok(SchmidtForm {
        coefficients: terms.iter().map(|t| t.coeff).collect(),
        left: terms
            .iter()
            .map(|t| StateVector::from_trusted(t.left.clone()))
            .collect(),
        right: terms.into_iter().map(|t| StateVector::from_trusted(t.right)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{haar_basis, tensor_product, OrthonormalBasis};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn residual(psi: &StateVector, form: &SchmidtForm) -> f64 {
        let back = form.reconstruct();
        psi.components()
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn product_state_has_single_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = StateVector::random(3, &mut rng).unwrap();
        let v = StateVector::random(4, &mut rng).unwrap();
        let psi = tensor_product(&u, &v);
        let form = schmidt_decompose(&psi, &ProductSpace::bipartite(3, 4).unwrap()).unwrap();
        assert_eq!(form.rank(), 1);
        assert!((form.coefficients[0] - 1.0).abs() < 1e-12);
        assert!(residual(&psi, &form) < 1e-10);
    }

    #[test]
    fn bell_state_coefficients_and_tie_order() {
        let s = 0.5f64.sqrt();
        let psi = StateVector::from_real(&[s, 0.0, 0.0, s]).unwrap();
        let form = schmidt_decompose(&psi, &ProductSpace::bipartite(2, 2).unwrap()).unwrap();
        assert_eq!(form.rank(), 2);
        for c in &form.coefficients {
            assert!((c - s).abs() < 1e-12);
        }
        assert!(residual(&psi, &form) < 1e-10);
    }

    #[test]
    fn random_3x3_matches_reduced_density_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let psi = StateVector::random(9, &mut rng).unwrap();
            let form = schmidt_decompose(&psi, &ProductSpace::bipartite(3, 3).unwrap()).unwrap();
            assert!(residual(&psi, &form) < 1e-10);
            // Oracle: eigenvalues of rho_A = A A^dagger by Hermitian eigensolver.
            let a = DMatrix::from_fn(3, 3, |i, k| psi.components()[i * 3 + k]);
            let rho = &a * a.adjoint();
            let mut eig: Vec<f64> = rho.symmetric_eigen().eigenvalues.iter().copied().collect();
            eig.sort_by(|x, y| y.total_cmp(x));
            for (c, e) in form.coefficients.iter().zip(&eig) {
                assert!((c * c - e).abs() < 1e-12);
            }
            assert!(form.coefficients.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn coefficients_invariant_under_local_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let space = ProductSpace::bipartite(3, 2).unwrap();
        for seed in 0..20 {
            let psi = StateVector::random(6, &mut rng).unwrap();
            let before = schmidt_decompose(&psi, &space).unwrap();
            // apply a Haar unitary U (columns of a Haar basis) to the left factor
            let u: OrthonormalBasis = haar_basis(3, seed).unwrap();
            let mut rotated = vec![Complex64::new(0.0, 0.0); 6];
            for i in 0..3 {
                for j in 0..3 {
                    let uij = u.vector(j).components()[i];
                    for k in 0..2 {
                        rotated[i * 2 + k] += uij * psi.components()[j * 2 + k];
                    }
                }
            }
            let after = schmidt_decompose(&StateVector::new(rotated).unwrap(), &space).unwrap();
            assert_eq!(before.rank(), after.rank());
            for (x, y) in before.coefficients.iter().zip(&after.coefficients) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_factor_count() {
        let psi = StateVector::basis_state(8, 0).unwrap();
        let space = ProductSpace::new(vec![2, 2, 2]).unwrap();
        assert!(matches!(schmidt_decompose(&psi, &space), Err(Error::Dimension(_))));
    }
}
