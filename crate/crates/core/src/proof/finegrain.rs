use num_complex::Complex64;
use num_traits::{One, Zero};

use super::{ratio, rational_to_f64, Rational};
use crate::composite::ContextualState;
use crate::error::{Error, Result};
use crate::rules::FrameRule;
use crate::state::{OrthonormalBasis, StateVector};

/// Largest supported number of fine-grained branches.
pub const MAX_FINE_GRAIN: u64 = 1 << 16;

/// A two-outcome state with weights `m/N` and `(N-m)/N` rewritten as `N`
/// equal branches through an ancilla.
///
/// The first `m` ancilla labels belong to outcome 0, the remaining `N - m`
/// to outcome 1. The coarse and fine descriptions share one joint vector;
/// they differ only in the pointer context used to read it.
#[derive(Debug, Clone, PartialEq)]
pub struct FineGrainPlan {
    pub m: u64,
    pub n: u64,
    /// Outcome of each fine label.
    pub branch_map: Vec<usize>,
    /// Squared modulus of each fine branch, exactly `1/N`.
    pub branch_weights: Vec<Rational>,
    /// Coarse-grained weights `(m/N, (N-m)/N)`.
    pub coarse_weights: [Rational; 2],
    /// Pointers `C_1 = sum_{j<m} |j>/sqrt(m)` and `C_2 = sum_{j>=m} |j>/sqrt(N-m)`.
    pub coarse: ContextualState,
    /// One pointer `|j>` per fine label.
    pub fine: ContextualState,
}

impl FineGrainPlan {
    /// The expanded joint state with `N` equal branches.
    pub fn expanded_state(&self) -> &StateVector {
        self.fine.joint()
    }

    /// Number of fine labels mapped to outcome 0.
    pub fn outcome_count(&self, outcome: usize) -> usize {
        self.branch_map.iter().filter(|&&o| o == outcome).count()
    }
}

fn check_domain(m: u64, n: u64) -> Result<()> {
    if m == 0 || m >= n {
        return Err(Error::Domain(format!(
            "fine-graining needs 0 < m < N, got m = {m}, N = {n}"
        )));
    }
    if n > MAX_FINE_GRAIN {
        return Err(Error::Domain(format!("N = {n} exceeds the limit {MAX_FINE_GRAIN}")));
    }
    Ok(())
}

/// Builds the coarse state `sqrt(m/N)|a_1>|C_1> + sqrt((N-m)/N)|a_2>|C_2>` and
/// its equal-branch expansion `sum_j |a_{map(j)}>|j> / sqrt(N)`.
pub fn fine_grain(m: u64, n: u64) -> Result<FineGrainPlan> {
    check_domain(m, n)?;
    let (mu, nu) = (m as usize, n as usize);
    let branch_map: Vec<usize> = (0..nu).map(|j| usize::from(j >= mu)).collect();
    let coarse_weights = [ratio(m as i64, n as i64), ratio((n - m) as i64, n as i64)];
    let branch_weights: Vec<Rational> = branch_map
        .iter()
        .map(|&o| {
            let count = if o == 0 { m } else { n - m };
            &coarse_weights[o] / Rational::from_integer(count.into())
        })
        .collect();

    let system = OrthonormalBasis::standard(2)?;
    let amp = |w: &Rational| Complex64::new(rational_to_f64(w).sqrt(), 0.0);
    let fine = ContextualState::with_standard_pointers(
        system.clone(),
        nu,
        branch_map.clone(),
        branch_weights.iter().map(amp).collect(),
    )?;

    let pointer = |lo: usize, hi: usize| {
        let value = Complex64::new(1.0 / ((hi - lo) as f64).sqrt(), 0.0);
        let mut v = vec![Complex64::zero(); nu];
        v[lo..hi].fill(value);
        StateVector::new(v)
    };
    let coarse = ContextualState::from_branches(
        system,
        vec![pointer(0, mu)?, pointer(mu, nu)?],
        vec![0, 1],
        coarse_weights.iter().map(amp).collect(),
    )?;

    Ok(FineGrainPlan {
        m,
        n,
        branch_map,
        branch_weights,
        coarse_weights,
        coarse,
        fine,
    })
}

/// `|p(outcome 0 | coarse pointers) - p(outcome 0 | fine pointers)|`.
pub fn fine_grain_invariance_residual(rule: &FrameRule, plan: &FineGrainPlan) -> Result<f64> {
    let coarse = plan.coarse.outcome_probability(rule, 0)?;
    let fine = plan.fine.outcome_probability(rule, 0)?;
    Ok((coarse - fine).abs())
}

/// Probability `m/N` derived by counting: the expanded branches have equal
/// weight, so each carries probability `1/N` and outcome 0 owns `m` of them.
pub fn rational_born(m: u64, n: u64) -> Result<Rational> {
    let plan = fine_grain(m, n)?;
    let first = &plan.branch_weights[0];
    if plan.branch_weights.iter().any(|w| w != first) {
        return Err(Error::Verification("fine-grained branches are not equal".into()));
    }
    let total: Rational = plan.branch_weights.iter().sum();
    if !total.is_one() {
        return Err(Error::Verification(format!("branch weights sum to {total}")));
    }
    Ok(Rational::from_integer(plan.outcome_count(0).into()) / Rational::from_integer(plan.branch_map.len().into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_of_three() {
        let plan = fine_grain(1, 3).unwrap();
        let coarse = plan.coarse.branch_amplitudes();
        assert!((coarse[0].re - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((coarse[1].re - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(plan.branch_weights, vec![ratio(1, 3); 3]);
        assert_eq!(plan.branch_map, vec![0, 1, 1]);
    }

    #[test]
    fn coarse_and_fine_share_the_joint_state() {
        for (m, n) in [(1, 2), (1, 3), (3, 5), (7, 16)] {
            let plan = fine_grain(m, n).unwrap();
            let (a, b) = (plan.coarse.joint().components(), plan.fine.joint().components());
            assert!(a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-14));
        }
    }

    #[test]
    fn three_of_five_coarse_weights() {
        let plan = fine_grain(3, 5).unwrap();
        assert_eq!(plan.outcome_count(0), 3);
        let first: Rational = plan.branch_weights[..3].iter().sum();
        let rest: Rational = plan.branch_weights[3..].iter().sum();
        assert_eq!(first, ratio(3, 5));
        assert_eq!(rest, ratio(2, 5));
        assert_eq!(plan.coarse_weights, [ratio(3, 5), ratio(2, 5)]);
    }

    #[test]
    fn born_is_resolution_invariant() {
        for (m, n) in [(1, 2), (1, 3), (5, 9), (31, 64)] {
            let plan = fine_grain(m, n).unwrap();
            assert!(fine_grain_invariance_residual(&FrameRule::born(), &plan).unwrap() < 1e-12);
        }
    }

    #[test]
    fn power_law_is_not() {
        let plan = fine_grain(1, 3).unwrap();
        let rule = FrameRule::power_law(1.0, true).unwrap();
        let (x, y) = ((1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt());
        let oracle = (x / (x + y) - 1.0 / 3.0).abs();
        let residual = fine_grain_invariance_residual(&rule, &plan).unwrap();
        assert!((residual - oracle).abs() < 1e-12);
        assert!(residual > 1e-2);
    }

    #[test]
    fn equal_split_is_invariant_for_normalized_rules() {
        let plan = fine_grain(1, 2).unwrap();
        for alpha in [0.5, 1.0, 3.0] {
            let rule = FrameRule::power_law(alpha, true).unwrap();
            assert!(fine_grain_invariance_residual(&rule, &plan).unwrap() < 1e-12);
        }
    }

    #[test]
    fn rational_born_counts() {
        assert_eq!(rational_born(1, 2).unwrap(), ratio(1, 2));
        assert_eq!(rational_born(1, 3).unwrap(), ratio(1, 3));
        let plan = fine_grain(7, 16).unwrap();
        assert_eq!(rational_born(7, 16).unwrap(), ratio(plan.outcome_count(0) as i64, 16));
    }

    #[test]
    fn domain_errors() {
        for (m, n) in [(0, 3), (3, 3), (4, 3), (1, MAX_FINE_GRAIN + 1)] {
            assert!(matches!(fine_grain(m, n), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn largest_plan_builds() {
        let plan = fine_grain(1, MAX_FINE_GRAIN).unwrap();
        assert_eq!(plan.expanded_state().dim(), 2 * MAX_FINE_GRAIN as usize);
        assert!(fine_grain_invariance_residual(&FrameRule::born(), &plan).unwrap() < 1e-12);
    }
}
