use std::cmp::Ordering;

use num_traits::Zero;

use super::matrix::C64;
use crate::error::{Error, Result};

/// `a2·z² + a1·z + a0 = 0` together with its roots.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadratic {
    pub a2: C64,
    pub a1: C64,
    pub a0: C64,
    pub discriminant: C64,
    /// Ordered by decreasing modulus, then decreasing imaginary part.
    pub roots: [C64; 2],
}

impl Quadratic {
    pub fn residual(&self, z: C64) -> C64 {
        (self.a2 * z + self.a1) * z + self.a0
    }

    pub fn max_coefficient(&self) -> f64 {
        self.a2.norm().max(self.a1.norm()).max(self.a0.norm())
    }

    pub fn is_double(&self) -> bool {
        self.discriminant.is_zero()
    }
}

pub(crate) fn root_order(a: &C64, b: &C64) -> Ordering {
    b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)).then(b.im.total_cmp(&a.im))
}

/// Roots via the cancellation-free form `q = −(a1 + sign·√δ)/2`, `z₁ = q/a2`, `z₂ = a0/q`.
pub fn solve_quadratic(a2: C64, a1: C64, a0: C64) -> Result<Quadratic> {
    if a2.is_zero() {
        return Err(Error::Degenerate);
    }
    let discriminant = a1 * a1 - a2 * a0 * 4.0;
    let roots = if discriminant.is_zero() {
        let r = -a1 / (a2 * 2.0);
        [r, r]
    } else {
        let sq = discriminant.sqrt();
        let sign = if (a1.conj() * sq).re >= 0.0 { 1.0 } else { -1.0 };
        let q = -(a1 + sq * sign) * 0.5;
        if q.is_zero() {
            [C64::zero(), C64::zero()]
        } else {
            let mut r = [q / a2, a0 / q];
            r.sort_by(root_order);
            r
        }
    };
    Ok(Quadratic { a2, a1, a0, discriminant, roots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// Textbook formula, kept separate from the solver's stable form.
    fn textbook(a: f64, b: f64, cc: f64) -> [C64; 2] {
        let d = C64::new(b * b - 4.0 * a * cc, 0.0).sqrt();
        [(-c(b) + d) / (2.0 * a), (-c(b) - d) / (2.0 * a)]
    }

    #[test]
    fn complex_pair_with_modulus_sqrt_alpha() {
        let q = solve_quadratic(c(1.0), c(-1.0), c(0.5)).unwrap();
        let oracle = textbook(1.0, -1.0, 0.5);
        assert!((q.roots[0] - C64::new(0.5, 0.5)).norm() < 1e-15);
        assert!((q.roots[1] - C64::new(0.5, -0.5)).norm() < 1e-15);
        assert!((q.roots[0] - oracle[0]).norm() < 1e-15);
        for r in q.roots {
            assert!((r.norm() - 0.5f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn real_pair() {
        let q = solve_quadratic(c(1.0), c(-0.9), c(0.1)).unwrap();
        let oracle = textbook(1.0, -0.9, 0.1);
        assert!((q.roots[0] - oracle[0]).norm() < 1e-15);
        assert!((q.roots[1] - oracle[1]).norm() < 1e-15);
        assert!((q.roots[0].re - 0.770156).abs() < 1e-6);
        assert!((q.roots[1].re - 0.129844).abs() < 1e-6);
    }

    #[test]
    fn double_root() {
        let q = solve_quadratic(c(1.0), c(-2.0), c(1.0)).unwrap();
        assert!(q.is_double());
        assert_eq!(q.roots, [c(1.0), c(1.0)]);
    }

    #[test]
    fn degenerate() {
        assert!(matches!(solve_quadratic(C64::zero(), c(1.0), c(1.0)), Err(Error::Degenerate)));
    }

    fn arb_c() -> impl Strategy<Value = C64> {
        (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b)| C64::new(a, b))
    }

    proptest! {
        #[test]
        fn vieta_and_residual(a2 in arb_c(), a1 in arb_c(), a0 in arb_c()) {
            prop_assume!(a2.norm() > 0.1);
            let q = solve_quadratic(a2, a1, a0).unwrap();
            let scale = q.max_coefficient();
            for r in q.roots {
                let mag = r.norm().max(1.0);
                prop_assert!(q.residual(r).norm() <= 1e-12 * scale * mag * mag);
            }
            let sum = q.roots[0] + q.roots[1];
            let prod = q.roots[0] * q.roots[1];
            prop_assert!((sum + a1 / a2).norm() <= 1e-12 * (1.0 + (a1 / a2).norm()));
            prop_assert!((prod - a0 / a2).norm() <= 1e-12 * (1.0 + (a0 / a2).norm()));
        }
    }
}
