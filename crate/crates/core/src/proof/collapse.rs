use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rules::{np_violation, ContextPair, FrameRule};
use crate::state::{amplitudes, norm, orthonormal_complete, OrthonormalBasis, StateVector, EPS_NORM};

/// Basis `{b_k, (sum_{i != k} c_i b_i)/|c'|, ...}` in which `psi` has exactly
/// two nonzero amplitudes: `c_k` and the real positive `|c'|`.
pub fn collapse_to_two(psi: &StateVector, basis: &OrthonormalBasis, k: usize) -> Result<OrthonormalBasis> {
    let coeffs = amplitudes(psi, basis)?;
    if k >= coeffs.len() {
        return Err(Error::Dimension(format!(
            "index {k} out of range for dimension {}",
            coeffs.len()
        )));
    }
    if coeffs[k].norm() >= 1.0 - EPS_NORM {
        return Err(Error::DegenerateCollapse { index: k });
    }
    let dim = basis.dim();
    let mut rest = vec![Complex64::new(0.0, 0.0); dim];
    for (i, c) in coeffs.iter().enumerate().filter(|&(i, _)| i != k) {
        for (r, b) in rest.iter_mut().zip(basis.vector(i).components()) {
            *r += c * b;
        }
    }
    let modulus = norm(&rest);
    if modulus <= EPS_NORM {
        return Err(Error::DegenerateCollapse { index: k });
    }
    rest.iter_mut().for_each(|x| *x /= modulus);
    orthonormal_complete(&[basis.vector(k).components().to_vec(), rest], dim)
}

/// Residual of `f(sum_{i != k} x_i) = sum_{i != k} f(x_i)` realized by
/// comparing the rule on `basis` with the rule on `collapse_to_two(psi, basis, k)`.
pub fn additivity_witness(rule: &FrameRule, psi: &StateVector, basis: &OrthonormalBasis, k: usize) -> Result<f64> {
    if basis.dim() < 3 {
        return Err(Error::InsufficientSupport { nonzero: basis.dim() });
    }
    let coeffs = amplitudes(psi, basis)?;
    let nonzero = coeffs.iter().filter(|c| c.norm() > EPS_NORM).count();
    if nonzero < 3 {
        return Err(Error::InsufficientSupport { nonzero });
    }
    let collapsed = collapse_to_two(psi, basis, k)?;
    let fine = rule.evaluate(psi, basis)?;
    let coarse = rule.evaluate(psi, &collapsed)?;
    let parts: f64 = fine.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, p)| p).sum();
    Ok((coarse[1] - parts).abs())
}

/// The strongest context pair found by [`np_violation_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationWitness {
    pub violation: f64,
    pub pair: ContextPair,
}

/// Searches contexts sharing vectors with `basis` for the largest
/// [`np_violation`] of `rule` on `psi`.
///
/// Candidates are every two-component collapse around `b_k` and every merge of
/// a pair `b_i, b_j` into the projection of `psi` on their span plus its
/// orthogonal partner (all other vectors shared).
pub fn np_violation_search(rule: &FrameRule, psi: &StateVector, basis: &OrthonormalBasis) -> Result<ViolationWitness> {
    let coeffs = amplitudes(psi, basis)?;
    let dim = basis.dim();
    let mut best: Option<ViolationWitness> = None;
    let mut consider = |pair: ContextPair| -> Result<()> {
        let violation = np_violation(rule, psi, &pair)?;
        if best.as_ref().is_none_or(|b| violation > b.violation) {
            best = Some(ViolationWitness { violation, pair });
        }
        Ok(())
    };

    for k in 0..dim {
        match collapse_to_two(psi, basis, k) {
            Ok(collapsed) => consider(ContextPair::new(basis.clone(), collapsed, vec![(k, 0)])?)?,
            Err(Error::DegenerateCollapse { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if dim >= 3 {
        for i in 0..dim {
            for j in i + 1..dim {
                let (ci, cj) = (coeffs[i], coeffs[j]);
                let n = (ci.norm_sqr() + cj.norm_sqr()).sqrt();
                if n <= EPS_NORM {
                    continue;
                }
                let (bi, bj) = (basis.vector(i).components(), basis.vector(j).components());
                let v: Vec<Complex64> = bi.iter().zip(bj).map(|(x, y)| (ci * x + cj * y) / n).collect();
                let w: Vec<Complex64> = bi
                    .iter()
                    .zip(bj)
                    .map(|(x, y)| (-cj.conj() * x + ci.conj() * y) / n)
                    .collect();
                let mut vectors: Vec<StateVector> = basis.vectors().to_vec();
                vectors[i] = StateVector::normalized(v)?;
                vectors[j] = StateVector::normalized(w)?;
                let merged = OrthonormalBasis::new(vectors)?;
                let shared = (0..dim).filter(|&l| l != i && l != j).map(|l| (l, l)).collect();
                consider(ContextPair::new(basis.clone(), merged, shared)?)?;
            }
        }
    }
    best.ok_or(Error::EmptySharedSet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::haar_basis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn oracle_state() -> StateVector {
        StateVector::from_real(&[0.5f64.sqrt(), 0.3f64.sqrt(), 0.2f64.sqrt()]).unwrap()
    }

    #[test]
    fn collapse_oracle_instance() {
        let std3 = OrthonormalBasis::standard(3).unwrap();
        let b = collapse_to_two(&oracle_state(), &std3, 0).unwrap();
        let s = 0.5f64.sqrt();
        let expected = [0.0, 0.3f64.sqrt() / s, 0.2f64.sqrt() / s];
        for (x, e) in b.vector(1).components().iter().zip(expected) {
            assert!((x - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
        assert_eq!(b.vector(0), std3.vector(0));
        let c = amplitudes(&oracle_state(), &b).unwrap();
        assert!((c[1].norm_sqr() - 0.5).abs() < 1e-12);
        assert!(c[2].norm() < 1e-15);
    }

    #[test]
    fn collapse_already_two_component() {
        let s = 0.5f64.sqrt();
        let psi = StateVector::from_real(&[s, s]).unwrap();
        let std2 = OrthonormalBasis::standard(2).unwrap();
        let b = collapse_to_two(&psi, &std2, 0).unwrap();
        assert_eq!(b, std2);
    }

    #[test]
    fn collapse_random_dim6() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..50 {
            let psi = StateVector::random(6, &mut rng).unwrap();
            let basis = haar_basis(6, seed).unwrap();
            let b = collapse_to_two(&psi, &basis, 2).unwrap();
            assert!(b.max_gram_residual() < 1e-10);
            let before = amplitudes(&psi, &basis).unwrap();
            let after = amplitudes(&psi, &b).unwrap();
            assert!(after[2..].iter().all(|c| c.norm() < 1e-12));
            let rest: f64 = before
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != 2)
                .map(|(_, c)| c.norm_sqr())
                .sum();
            assert!((after[1].norm_sqr() - rest).abs() < 1e-12);
            assert!((after[0] - before[2]).norm() < 1e-12);
        }
    }

    #[test]
    fn collapse_on_basis_vector_is_degenerate() {
        let std3 = OrthonormalBasis::standard(3).unwrap();
        assert_eq!(
            collapse_to_two(std3.vector(1), &std3, 1),
            Err(Error::DegenerateCollapse { index: 1 })
        );
    }

    #[test]
    fn additivity_born_zero_and_power_positive() {
        let std3 = OrthonormalBasis::standard(3).unwrap();
        assert!(additivity_witness(&FrameRule::born(), &oracle_state(), &std3, 0).unwrap() < 1e-12);
        // alpha = 4: weights .25,.09,.04 -> .6579,.2368,.1053; collapsed gives .5/.5
        let rule = FrameRule::power_law(4.0, true).unwrap();
        let r = additivity_witness(&rule, &oracle_state(), &std3, 0).unwrap();
        let oracle = 0.5 - (0.09 + 0.04) / (0.25 + 0.09 + 0.04);
        assert!((r - oracle).abs() < 1e-12);
        assert!(r > 1e-2);
    }

    #[test]
    fn additivity_needs_three_components() {
        let psi = StateVector::from_real(&[0.6, 0.8, 0.0]).unwrap();
        assert_eq!(
            additivity_witness(&FrameRule::born(), &psi, &OrthonormalBasis::standard(3).unwrap(), 0),
            Err(Error::InsufficientSupport { nonzero: 2 })
        );
    }

    #[test]
    fn search_born_finds_nothing_power_finds_violation() {
        let std3 = OrthonormalBasis::standard(3).unwrap();
        let born = np_violation_search(&FrameRule::born(), &oracle_state(), &std3).unwrap();
        assert!(born.violation < 1e-12);
        let power = np_violation_search(&FrameRule::power_law(1.0, true).unwrap(), &oracle_state(), &std3).unwrap();
        assert!(power.violation >= 0.084);
    }
}
