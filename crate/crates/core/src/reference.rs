//! Built-in alternating systems with known swallowtail (A_3) points.

use num_bigint::BigInt;

use crate::numeric::Rational;
use crate::system::PeriodicSystem;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub const QUADRATIC_CUBIC_MAPS: [&str; 2] = ["x^2 + l1", "l3*x^3 + l2*x + 1"];
pub const QUARTIC_TANGENT_MAPS: [&str; 2] = ["-x^4 + l1*x^2 + x + l2", "l3*tan(x)"];

/// Newton start for the quadratic-cubic system, `(x, l1, l2, l3)`.
pub const QUADRATIC_CUBIC_INIT: [f64; 4] = [0.8, -1.0, 0.5, 0.02];
/// Newton start for the quartic-tangent system.
pub const QUARTIC_TANGENT_INIT: [f64; 4] = [0.08, -0.04, 0.0, 1.0];

/// `f0 = x² + l1`, `f1 = l3 x³ + l2 x + 1`.
pub fn quadratic_cubic() -> PeriodicSystem {
    PeriodicSystem::parse(&QUADRATIC_CUBIC_MAPS, 3).expect("built-in system parses")
}

/// `f0 = -x⁴ + l1 x² + x + l2`, `f1 = l3 tan x`.
pub fn quartic_tangent() -> PeriodicSystem {
    PeriodicSystem::parse(&QUARTIC_TANGENT_MAPS, 3).expect("built-in system parses")
}

/// Exact A_3 point of [`quadratic_cubic`]: `a` in fiber 0, `b = f0(a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPoint {
    pub a: Rational,
    pub b: Rational,
    pub lambda: Vec<Rational>,
}

pub fn quadratic_cubic_exact() -> ExactPoint {
    ExactPoint {
        a: q(27, 35),
        b: q(-486, 1225),
        lambda: vec![q(-243, 245), q(175, 324), q(52_521_875, 229_582_512)],
    }
}

/// Values as commonly quoted for this system. The quoted `l3` does not
/// satisfy `f1(b) = a`; see [`quadratic_cubic_exact`] for the solution.
pub fn quadratic_cubic_quoted() -> ExactPoint {
    ExactPoint {
        a: q(27, 35),
        b: q(-486, 1225),
        lambda: vec![q(-243, 245), q(175, 324), q(16_807, 944_784)],
    }
}

/// Quoted values for the quadratic-cubic swallowtail.
pub mod quadratic_cubic_values {
    pub const DET: (i64, i64) = (-944_784, 214_375);
    pub const SF_A: (i64, i64) = (-1225, 486);
    pub const SG_B: (i64, i64) = (1_500_625, 1_417_176);
}

/// Quoted values for the quartic-tangent swallowtail.
pub mod quartic_tangent_values {
    pub const A: f64 = 0.0797053;
    pub const B: f64 = 0.0793675;
    pub const LAMBDA: [f64; 3] = [-0.0400839, -0.0000428492, 1.00215];
    pub const F_X4: f64 = -26.7;
    pub const SF_A: f64 = -1.96648;
    pub const SG_B: f64 = 2.0;
    pub const DET: f64 = -2.08013;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifurcation::residual;

    #[test]
    fn exact_point_closes_the_cycle() {
        let sys = quadratic_cubic();
        let p = quadratic_cubic_exact();
        assert_eq!(sys.apply_map(0, &p.a, &p.lambda).unwrap(), p.b);
        assert_eq!(sys.apply_map(1, &p.b, &p.lambda).unwrap(), p.a);
        let r = residual(&sys, 0, 1, 3, &p.a, &p.lambda).unwrap();
        assert!(r.iter().all(|v| *v == q(0, 1)));
    }

    #[test]
    fn quoted_l3_leaves_a_residual() {
        let sys = quadratic_cubic();
        let p = quadratic_cubic_quoted();
        let r = residual(&sys, 0, 1, 3, &p.a, &p.lambda).unwrap();
        assert_eq!(r[0], q(1441, 109_375));
    }
}
