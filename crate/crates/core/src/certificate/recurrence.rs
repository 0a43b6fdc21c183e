//! Second-order homogeneous linear recurrences `x_n = a·x_{n−1} + b·x_{n−2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of `r² − a·r − b = 0` together with its real roots,
/// `r1 ≥ r2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecurrencePair {
    pub a: f64,
    pub b: f64,
    pub r1: f64,
    pub r2: f64,
}

impl RecurrencePair {
    /// Coefficients `(c1, c2)` of `x_n = c1·r1ⁿ + c2·r2ⁿ` matching `x0`, `x1`.
    pub fn coefficients(&self, x0: f64, x1: f64) -> Result<(f64, f64)> {
        let gap = self.r1 - self.r2;
        if gap.abs() <= 1e-14 * self.r1.abs().max(1.0) {
            return Err(Error::RepeatedRoot(self.r1));
        }
        Ok(((x1 - x0 * self.r2) / gap, (x0 * self.r1 - x1) / gap))
    }
}

/// Real roots of `r² − a·r − b = 0`.
///
/// The root of larger magnitude comes from the quadratic formula and the
/// other from Vieta's product `r1·r2 = −b`, avoiding cancellation when `b`
/// is small.
pub fn recurrence_roots(a: f64, b: f64) -> Result<RecurrencePair> {
    let disc = a * a + 4.0 * b;
    if disc < 0.0 {
        return Err(Error::ComplexRoots(disc));
    }
    let s = disc.sqrt();
    let (r1, r2) = if a >= 0.0 {
        let big = 0.5 * (a + s);
        let small = if big == 0.0 { 0.0 } else { -b / big };
        (big, small)
    } else {
        let big = 0.5 * (a - s);
        let small = if big == 0.0 { 0.0 } else { -b / big };
        (small, big)
    };
    let (r1, r2) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    Ok(RecurrencePair { a, b, r1, r2 })
}

/// `x_n` from the closed form `c1·r1ⁿ + c2·r2ⁿ` fitted to `(x0, x1)`.
pub fn recurrence_solution(x0: f64, x1: f64, roots: &RecurrencePair, n: usize) -> Result<f64> {
    match n {
        0 => return Ok(x0),
        1 => return Ok(x1),
        _ => {}
    }
    let (c1, c2) = roots.coefficients(x0, x1)?;
    Ok(c1 * pow(roots.r1, n) + c2 * pow(roots.r2, n))
}

pub(crate) fn pow(x: f64, n: usize) -> f64 {
    match i32::try_from(n) {
        Ok(k) => x.powi(k),
        Err(_) => x.powf(n as f64),
    }
}

#[cfg(test)]
pub(crate) fn iterate(a: f64, b: f64, x0: f64, x1: f64, n: usize) -> f64 {
    let (mut prev, mut curr) = (x0, x1);
    if n == 0 {
        return x0;
    }
    for _ in 1..n {
        let next = a * curr + b * prev;
        prev = curr;
        curr = next;
    }
    curr
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn root_examples() {
        let p = recurrence_roots(1.0, 0.0).unwrap();
        assert_eq!((p.r1, p.r2), (1.0, 0.0));

        let p = recurrence_roots(1.2, 0.2).unwrap();
        assert!((p.r1 - 1.348331477).abs() < 1e-8);
        assert!((p.r2 + 0.148331477).abs() < 1e-8);
        assert!((p.r1 + p.r2 - 1.2).abs() < 1e-14);
        assert!((p.r1 * p.r2 + 0.2).abs() < 1e-14);

        let p = recurrence_roots(2.0, 0.5).unwrap();
        assert!((p.r1 - (1.0 + 1.5f64.sqrt())).abs() < 1e-14);
        assert!((p.r2 - (1.0 - 1.5f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn complex_roots_are_rejected() {
        assert!(matches!(recurrence_roots(1.0, -1.0), Err(Error::ComplexRoots(_))));
    }

    #[test]
    fn fibonacci() {
        let p = recurrence_roots(1.0, 1.0).unwrap();
        let x6 = recurrence_solution(0.0, 1.0, &p, 6).unwrap();
        assert!((x6 - 8.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation_conditions() {
        let p = recurrence_roots(1.7, 0.4).unwrap();
        assert_eq!(recurrence_solution(0.3, -2.0, &p, 0).unwrap(), 0.3);
        assert_eq!(recurrence_solution(0.3, -2.0, &p, 1).unwrap(), -2.0);
    }

    #[test]
    fn repeated_root_rejected() {
        // a² + 4b = 0
        let p = recurrence_roots(2.0, -1.0).unwrap();
        assert!(matches!(recurrence_solution(1.0, 2.0, &p, 3), Err(Error::RepeatedRoot(_))));
    }

    proptest! {
        #[test]
        fn characteristic_and_vieta(a in 0.0f64..5.0, b in 1e-6f64..3.0) {
            let p = recurrence_roots(a, b).unwrap();
            let scale = p.r1.abs().max(1.0);
            for r in [p.r1, p.r2] {
                prop_assert!((r * r - a * r - b).abs() <= 1e-10 * scale * scale);
            }
            prop_assert!((p.r1 + p.r2 - a).abs() <= 1e-10 * scale);
            prop_assert!((p.r1 * p.r2 + b).abs() <= 1e-10 * scale * scale);
            prop_assert!(p.r1 > 0.0 && p.r2 < 0.0 && p.r1 > p.r2.abs() - 1e-15);
        }

        #[test]
        fn closed_form_matches_iteration(
            a in 0.1f64..2.5, b in 0.01f64..1.5,
            x0 in -2.0f64..2.0, x1 in -2.0f64..2.0, n in 0usize..=50,
        ) {
            let p = recurrence_roots(a, b).unwrap();
            let closed = recurrence_solution(x0, x1, &p, n).unwrap();
            let direct = iterate(a, b, x0, x1, n);
            let scale = direct.abs().max(x0.abs().max(x1.abs()) * p.r1.abs().max(1.0).powi(n as i32));
            prop_assert!((closed - direct).abs() <= 1e-8 * scale.max(1e-300), "{closed} vs {direct}");
        }
    }
}
