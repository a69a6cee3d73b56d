//! Fixtures shared by the criterion benchmarks.

use qlab_core::{haar_basis, FrameRule, OrthonormalBasis, StateVector};

/// A Haar-random state and context of dimension `dim`, fixed by `seed`.
pub fn instance(dim: usize, seed: u64) -> (StateVector, OrthonormalBasis) {
    let psi = haar_basis(dim, seed ^ 0x5EED).expect("dim >= 1").vector(0).clone();
    (psi, haar_basis(dim, seed).expect("dim >= 1"))
}

/// `(state, probability)` samples from `2 * dim` random contexts.
pub fn born_samples(dim: usize, seed: u64) -> (StateVector, Vec<(StateVector, f64)>) {
    let (psi, _) = instance(dim, seed);
    let mut samples = Vec::new();
    for c in 0..2 * dim as u64 {
        let context = haar_basis(dim, seed.wrapping_add(c + 1)).expect("dim >= 1");
        let p = FrameRule::born().evaluate(&psi, &context).expect("dims agree");
        samples.extend(context.vectors().iter().cloned().zip(p));
    }
    (psi, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic() {
        assert_eq!(instance(4, 1), instance(4, 1));
        let (_, samples) = born_samples(3, 2);
        assert_eq!(samples.len(), 18);
    }
}
