use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::{rational_to_f64, Rational};
use crate::error::{Error, Result};

/// One polynomial piece of a piecewise rule, valid on `(previous upper, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub upper: Rational,
    /// Coefficients in ascending powers.
    pub coeffs: Vec<Rational>,
}

#[derive(Clone)]
pub enum ScalarForm {
    Identity,
    /// `x^k`.
    Power(u32),
    /// Piecewise polynomial with rational breakpoints and coefficients.
    Piecewise(Vec<Piece>),
    /// Floating-point only; rejected by exact scans.
    Float(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ScalarForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarForm::Identity => write!(f, "Identity"),
            ScalarForm::Power(k) => write!(f, "Power({k})"),
            ScalarForm::Piecewise(p) => f.debug_tuple("Piecewise").field(p).finish(),
            ScalarForm::Float(_) => write!(f, "Float(..)"),
        }
    }
}

/// A candidate `f` in `p(a_i) = f(|c_i|^2)`. Registration enforces
/// `f(0) = 0` and `f(1) = 1`.
#[derive(Debug, Clone)]
pub struct ScalarRule {
    name: String,
    form: ScalarForm,
}

impl ScalarRule {
    pub fn identity() -> Self {
        ScalarRule {
            name: "x".into(),
            form: ScalarForm::Identity,
        }
    }

    pub fn power(k: u32) -> Result<Self> {
        Self::register(format!("x^{k}"), ScalarForm::Power(k))
    }

    pub fn piecewise(name: impl Into<String>, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Domain("piecewise rule needs at least one piece".into()));
        }
        if pieces.windows(2).any(|w| w[0].upper >= w[1].upper) {
            return Err(Error::Domain("piece bounds must increase".into()));
        }
        if pieces.last().is_none_or(|p| p.upper < Rational::one()) {
            return Err(Error::Domain("pieces must cover [0, 1]".into()));
        }
        Self::register(name.into(), ScalarForm::Piecewise(pieces))
    }

    pub fn float(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let rule = ScalarRule {
            name: name.into(),
            form: ScalarForm::Float(Arc::new(f)),
        };
        let (f0, f1) = (rule.eval_f64(0.0), rule.eval_f64(1.0));
        if f0.abs() > 1e-12 || (f1 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "rule `{}` must satisfy f(0) = 0 and f(1) = 1, got f(0) = {f0}, f(1) = {f1}",
                rule.name
            )));
        }
        Ok(rule)
    }

    fn register(name: String, form: ScalarForm) -> Result<Self> {
        let rule = ScalarRule { name, form };
        let f0 = rule.eval_exact(&Rational::zero())?;
        let f1 = rule.eval_exact(&Rational::one())?;
        if !f0.is_zero() || !f1.is_one() {
            return Err(Error::Domain(format!(
                "rule `{}` must satisfy f(0) = 0 and f(1) = 1, got f(0) = {f0}, f(1) = {f1}",
                rule.name
            )));
        }
        Ok(rule)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.form, ScalarForm::Float(_))
    }

    pub fn eval_exact(&self, x: &Rational) -> Result<Rational> {
        match &self.form {
            ScalarForm::Identity => Ok(x.clone()),
            ScalarForm::Power(k) => Ok(num_traits::pow(x.clone(), *k as usize)),
            ScalarForm::Piecewise(pieces) => {
                let piece = pieces
                    .iter()
                    .find(|p| x <= &p.upper)
                    .ok_or_else(|| Error::Domain(format!("{x} beyond last piece")))?;
                Ok(piece.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c))
            }
            ScalarForm::Float(_) => Err(Error::Exactness(self.name.clone())),
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        match &self.form {
            ScalarForm::Float(f) => f(x),
            _ => super::rational_from_f64(x)
                .and_then(|r| self.eval_exact(&r).ok())
                .map_or(f64::NAN, |v| rational_to_f64(&v)),
        }
    }
}

/// Worst additivity defect found by [`rational_additivity_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdditivityScan {
    pub residual: Rational,
    /// Lexicographically smallest `(x, y)` attaining `residual`.
    pub witness: (Rational, Rational),
    pub pairs_checked: u64,
}

/// Reduced fractions in `[0, 1]` with denominator at most `max_den`, ascending.
pub(crate) fn farey_points(max_den: u64) -> Vec<Rational> {
    let mut pts: Vec<(u64, u64)> = vec![(0, 1)];
    for q in 1..=max_den {
        for p in 1..=q {
            if p.gcd(&q) == 1 {
                pts.push((p, q));
            }
        }
    }
    // a/b < c/d  <=>  a d < c b
    pts.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)));
    pts.into_iter()
        .map(|(p, q)| Rational::new(BigInt::from(p), BigInt::from(q)))
        .collect()
}

/// Exhaustive exact scan of `|f(x + y) - f(x) - f(y)|` over all rational
/// `x, y` with denominators at most `max_den` and `x + y <= 1`.
///
/// Rows are scanned in parallel; the reduction keeps the largest residual and,
/// among equal residuals, the smallest `x` then `y`, so results do not depend
/// on scheduling.
pub fn rational_additivity_scan(f: &ScalarRule, max_den: u64) -> Result<AdditivityScan> {
    if max_den < 2 {
        return Err(Error::Domain(format!(
            "maximum denominator must be at least 2, got {max_den}"
        )));
    }
    if !f.is_exact() {
        return Err(Error::Exactness(f.name.clone()));
    }
    let points = farey_points(max_den);
    let values: Vec<Rational> = points.iter().map(|x| f.eval_exact(x)).collect::<Result<_>>()?;
    let one = Rational::one();

    let rows: Vec<Result<(Rational, usize, usize, u64)>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let x = &points[i];
            let mut best = (Rational::zero(), i, 0usize);
            let mut checked = 0u64;
            for (j, y) in points.iter().enumerate() {
                let s = x + y;
                if s > one {
                    break;
                }
                checked += 1;
                let residual = (f.eval_exact(&s)? - &values[i] - &values[j]).abs();
                if residual > best.0 {
                    best = (residual, i, j);
                }
            }
            Ok((best.0, best.1, best.2, checked))
        })
        .collect();

    let mut total = 0u64;
    let mut best: Option<(Rational, usize, usize)> = None;
    for row in rows {
        let (r, i, j, checked) = row?;
        total += checked;
        // rows arrive in ascending x, so strict > keeps the smallest maximizer
        if best.as_ref().is_none_or(|b| r > b.0) {
            best = Some((r, i, j));
        }
    }
    let (residual, i, j) = best.expect("at least the point 0 is scanned");
    Ok(AdditivityScan {
        residual,
        witness: (points[i].clone(), points[j].clone()),
        pairs_checked: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::ratio;

    #[test]
    fn farey_counts() {
        // |F_n| = 1 + sum_{q<=n} phi(q): F_5 has 11 points
        assert_eq!(farey_points(5).len(), 11);
        assert!(farey_points(8).windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn identity_is_exactly_additive() {
        let scan = rational_additivity_scan(&ScalarRule::identity(), 16).unwrap();
        assert!(scan.residual.is_zero());
        assert_eq!(scan.witness, (ratio(0, 1), ratio(0, 1)));
    }

    #[test]
    fn square_at_denominator_two() {
        let scan = rational_additivity_scan(&ScalarRule::power(2).unwrap(), 2).unwrap();
        assert_eq!(scan.residual, ratio(1, 2));
        assert_eq!(scan.witness, (ratio(1, 2), ratio(1, 2)));
        // pairs with x + y <= 1 over {0, 1/2, 1}
        assert_eq!(scan.pairs_checked, 6);
    }

    #[test]
    fn cube_maximum_by_hand() {
        // (x+y)^3 - x^3 - y^3 = 3xy(x+y), maximal at x = y = 1/2 with value 3/4
        let scan = rational_additivity_scan(&ScalarRule::power(3).unwrap(), 8).unwrap();
        assert_eq!(scan.residual, ratio(3, 4));
        assert_eq!(scan.witness, (ratio(1, 2), ratio(1, 2)));
        let f = ScalarRule::power(3).unwrap();
        let x = ratio(1, 3);
        let y = ratio(1, 4);
        let by_hand = ratio(3, 1) * &x * &y * (&x + &y);
        assert_eq!(
            f.eval_exact(&(&x + &y)).unwrap() - f.eval_exact(&x).unwrap() - f.eval_exact(&y).unwrap(),
            by_hand
        );
    }

    #[test]
    fn endpoint_registration() {
        assert!(matches!(ScalarRule::power(0), Err(Error::Domain(_))));
        assert!(ScalarRule::float("half", |x| 0.5 * x).is_err());
        let sq = ScalarRule::float("sq", |x| x * x).unwrap();
        assert!(matches!(rational_additivity_scan(&sq, 4), Err(Error::Exactness(_))));
        assert!(matches!(
            rational_additivity_scan(&ScalarRule::identity(), 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn piecewise_rule() {
        // f(x) = 2x^2 on [0, 1/2], f(x) = 1 - 2(1-x)^2 = -1 + 4x - 2x^2 on (1/2, 1]
        let f = ScalarRule::piecewise(
            "smoothstep",
            vec![
                Piece {
                    upper: ratio(1, 2),
                    coeffs: vec![ratio(0, 1), ratio(0, 1), ratio(2, 1)],
                },
                Piece {
                    upper: ratio(1, 1),
                    coeffs: vec![ratio(-1, 1), ratio(4, 1), ratio(-2, 1)],
                },
            ],
        )
        .unwrap();
        assert_eq!(f.eval_exact(&ratio(1, 2)).unwrap(), ratio(1, 2));
        assert_eq!(f.eval_exact(&ratio(3, 4)).unwrap(), ratio(7, 8));
        let scan = rational_additivity_scan(&f, 6).unwrap();
        assert!(scan.residual > ratio(0, 1));
        assert!(ScalarRule::piecewise(
            "bad",
            vec![Piece {
                upper: ratio(1, 1),
                coeffs: vec![ratio(1, 1)]
            }]
        )
        .is_err());
    }
}
