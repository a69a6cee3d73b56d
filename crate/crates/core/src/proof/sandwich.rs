use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{rational_from_f64, rational_to_f64, Rational};
use crate::error::{Error, Result};
use crate::state::{amplitudes, OrthonormalBasis, StateVector};

const WITNESS_TOL: f64 = 1e-10;

/// Rational bracket `lo <= x <= hi` realized by two explicit dimension-3
/// contexts for `psi = sqrt(x) e_1 + sqrt(1 - x) e_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichResult {
    pub target: Rational,
    pub lo: Rational,
    pub hi: Rational,
    /// Decimal digits of the truncation that produced the bracket.
    pub digits: u32,
    pub state: StateVector,
    /// `{a''_1, e_2, a''_3}` with `|<a''_1|psi>|^2 = lo`.
    pub witness_lo: OrthonormalBasis,
    /// `{e_1, a'''_2, a'''_3}` with `1 - |<a'''_2|psi>|^2 = hi`.
    pub witness_hi: OrthonormalBasis,
    /// Measured `|<a''_1|psi>|^2`.
    pub realized_lo: f64,
    /// Measured `1 - |<a'''_2|psi>|^2`.
    pub realized_hi: f64,
}

impl SandwichResult {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// Convenience wrapper taking the exact binary value of `x` and `epsilon`.
pub fn continuity_sandwich_f64(x: f64, epsilon: f64) -> Result<SandwichResult> {
    let target = rational_from_f64(x).ok_or_else(|| Error::Domain(format!("target {x} is not finite")))?;
    let eps = rational_from_f64(epsilon).ok_or_else(|| Error::Domain(format!("epsilon {epsilon} is not finite")))?;
    continuity_sandwich(&target, &eps)
}

/// Brackets `target` between decimal truncations `floor(10^n x)/10^n` and
/// `ceil(10^n x)/10^n`, increasing `n` until the width is at most `epsilon`
/// or the bracket closes on `target` itself.
pub fn continuity_sandwich(target: &Rational, epsilon: &Rational) -> Result<SandwichResult> {
    let zero = Rational::zero();
    let one = Rational::one();
    if target <= &zero || target >= &one {
        return Err(Error::Domain(format!("sandwich target {target} outside (0, 1)")));
    }
    if epsilon <= &zero {
        return Err(Error::Domain(format!("sandwich width {epsilon} must be positive")));
    }

    let mut digits = 0u32;
    let (lo, hi) = loop {
        digits += 1;
        let scale = Rational::from_integer(num_traits::pow(BigInt::from(10), digits as usize));
        let scaled = target * &scale;
        let lo = (scaled.floor() / &scale).max(zero.clone());
        let hi = (scaled.ceil() / &scale).min(one.clone());
        if lo == hi || &hi - &lo <= *epsilon {
            break (lo, hi);
        }
    };

    let x = rational_to_f64(target);
    let complement = &one - target;
    let state = StateVector::new(vec![
        num_complex::Complex64::new(x.sqrt(), 0.0),
        num_complex::Complex64::new(rational_to_f64(&complement).sqrt(), 0.0),
        num_complex::Complex64::new(0.0, 0.0),
    ])?;

    // a''_1 = cos t e_1 + sin t e_3 with cos^2 t = lo / x
    let cos2_lo = rational_to_f64(&(&lo / target));
    let (c, s) = (cos2_lo.sqrt(), (1.0 - cos2_lo).max(0.0).sqrt());
    let witness_lo = OrthonormalBasis::new(vec![
        StateVector::from_real(&[c, 0.0, s])?,
        StateVector::from_real(&[0.0, 1.0, 0.0])?,
        StateVector::from_real(&[-s, 0.0, c])?,
    ])?;

    // a'''_2 = cos u e_2 + sin u e_3 with cos^2 u = (1 - hi) / (1 - x)
    let cos2_hi = rational_to_f64(&((&one - &hi) / &complement));
    let (c, s) = (cos2_hi.sqrt(), (1.0 - cos2_hi).max(0.0).sqrt());
    let witness_hi = OrthonormalBasis::new(vec![
        StateVector::from_real(&[1.0, 0.0, 0.0])?,
        StateVector::from_real(&[0.0, c, s])?,
        StateVector::from_real(&[0.0, -s, c])?,
    ])?;

    let realized_lo = amplitudes(&state, &witness_lo)?[0].norm_sqr();
    let realized_hi = 1.0 - amplitudes(&state, &witness_hi)?[1].norm_sqr();
    let (lo_f, hi_f) = (rational_to_f64(&lo), rational_to_f64(&hi));
    if (realized_lo - lo_f).abs() > WITNESS_TOL || (realized_hi - hi_f).abs() > WITNESS_TOL {
        return Err(Error::Verification(format!(
            "sandwich witnesses realize ({realized_lo}, {realized_hi}) for bracket ({lo_f}, {hi_f})"
        )));
    }

    Ok(SandwichResult {
        target: target.clone(),
        lo,
        hi,
        digits,
        state,
        witness_lo,
        witness_hi,
        realized_lo,
        realized_hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::ratio;

    fn pow10(n: u32) -> Rational {
        Rational::from_integer(num_traits::pow(BigInt::from(10), n as usize))
    }

    #[test]
    fn exact_half_short_circuits() {
        let r = continuity_sandwich_f64(0.5, 1e-6).unwrap();
        assert_eq!(r.lo, ratio(1, 2));
        assert_eq!(r.hi, ratio(1, 2));
        assert_eq!(r.digits, 1);
    }

    #[test]
    fn inverse_sqrt_two() {
        let x = std::f64::consts::FRAC_1_SQRT_2;
        let r = continuity_sandwich_f64(x, 1e-6).unwrap();
        let exact = rational_from_f64(x).unwrap();
        assert!(r.lo <= exact && exact <= r.hi);
        assert!(r.width() <= rational_from_f64(1e-6).unwrap());
        // 1e-6 as f64 lies just below 10^-6, so seven digits are needed
        assert_eq!(r.digits, 7);
        assert_eq!(r.lo, ratio(7_071_067, 10_000_000));
        // Oracle: 8-digit truncation brackets the same value.
        assert!(ratio(70_710_678, 100_000_000) <= exact && exact <= ratio(70_710_679, 100_000_000));
        assert!((r.realized_lo - rational_to_f64(&r.lo)).abs() < 1e-10);
        assert!((r.realized_hi - rational_to_f64(&r.hi)).abs() < 1e-10);
    }

    #[test]
    fn near_one_clamps() {
        let target = Rational::one() - Rational::one() / pow10(18);
        let r = continuity_sandwich(&target, &(Rational::one() / pow10(6))).unwrap();
        assert!(r.hi <= Rational::one());
        assert!(r.lo <= target && target <= r.hi);
        assert!(r.width() <= Rational::one() / pow10(6));
        // the same value as f64 rounds to 1.0 and leaves the domain
        assert!(matches!(
            continuity_sandwich_f64(1.0 - 1e-18, 1e-6),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn domain_errors() {
        assert!(continuity_sandwich_f64(0.0, 1e-3).is_err());
        assert!(continuity_sandwich_f64(1.2, 1e-3).is_err());
        assert!(continuity_sandwich_f64(0.3, 0.0).is_err());
        assert!(continuity_sandwich_f64(f64::NAN, 1e-3).is_err());
    }

    #[test]
    fn witness_bases_share_the_right_vectors() {
        let r = continuity_sandwich_f64(1.0 / std::f64::consts::PI, 1e-9).unwrap();
        assert_eq!(r.witness_lo.vector(1), &StateVector::basis_state(3, 1).unwrap());
        assert_eq!(r.witness_hi.vector(0), &StateVector::basis_state(3, 0).unwrap());
        assert!(r.witness_lo.max_gram_residual() < 1e-10);
        assert!(r.witness_hi.max_gram_residual() < 1e-10);
    }
}
