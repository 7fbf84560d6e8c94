//! Random polynomial p-periodic systems with an A_μ point near a known
//! location, shared by the acceptance suite and the property tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use perbif_core::numeric::{Jet, Rational, Scalar};
use perbif_core::system::PeriodicSystem;
use rand::Rng;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rand_q<R: Rng>(rng: &mut R, lo: i64, hi: i64, den: i64) -> Rational {
    q(rng.gen_range(lo..=hi), den)
}

/// Nonzero rational with magnitude in [1/2, 2].
pub fn rand_q_nonzero<R: Rng>(rng: &mut R) -> Rational {
    let m = q(rng.gen_range(4..=16), 8);
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

fn term(c: &Rational, center: &Rational, k: usize) -> String {
    match k {
        0 => format!("({c})"),
        1 => format!("({c})*(x - ({center}))"),
        _ => format!("({c})*(x - ({center}))^{k}"),
    }
}

/// `Σ coeffs[k] (x - center)^k` as expression text.
pub fn poly_text(center: &Rational, coeffs: &[Rational]) -> String {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| term(c, center, k))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Coefficients `d_1..d_n` of the inverse series of `h` (normalized jet at
/// `a`, `h_0 = c`), so that `h(a + Σ d_k u^k) = c + u + O(u^{n+1})`.
pub fn reversion(h: &Jet<Rational>, a: &Rational) -> Vec<Rational> {
    let n = h.order();
    let h1 = h.coeff(1).clone();
    let mut d = vec![a.clone(); n + 1];
    for v in d.iter_mut().skip(1) {
        *v = q(0, 1);
    }
    if n >= 1 {
        d[1] = q(1, 1) / &h1;
    }
    for k in 2..=n {
        d[k] = q(0, 1);
        let comp = h.compose(a, &Jet::from_coeffs(d.clone()), 0.0).unwrap();
        d[k] = -comp.coeff(k).clone() / &h1;
    }
    d[1..].to_vec()
}

pub struct RandomCase {
    pub sys: PeriodicSystem,
    pub p: usize,
    pub mu: usize,
    /// Newton start `(x, l1..lμ)`: the unperturbed A_μ point.
    pub init: Vec<f64>,
    pub maps: Vec<String>,
}

/// p-periodic polynomial system, μ parameters entering the last map as
/// `Σ l_i (x - c)^{i-1}` and `l1` coupling weakly into `f0`.
pub fn random_case<R: Rng>(rng: &mut R, p: usize, mu: usize) -> RandomCase {
    let a = rand_q(rng, -4, 4, 8);
    let mut centers = vec![a.clone()];
    let mut fixed = Vec::new();
    for _ in 0..p - 1 {
        let z = centers.last().unwrap().clone();
        let next = rand_q(rng, -4, 4, 8);
        let coeffs = vec![
            next.clone(),
            rand_q_nonzero(rng),
            rand_q(rng, -8, 8, 8),
            rand_q(rng, -8, 8, 8),
        ];
        fixed.push(poly_text(&z, &coeffs));
        centers.push(next);
    }
    let c = centers.last().unwrap().clone();
    let aux = PeriodicSystem::parse(&fixed, 0).unwrap();
    let h = aux.composition_jet_plain(0, 1, &a, &[], mu).unwrap();
    let d = reversion(&h, &a);
    let mut last_coeffs = vec![a.clone()];
    last_coeffs.extend(d);
    last_coeffs.push(rand_q_nonzero(rng));
    let mut last = poly_text(&c, &last_coeffs);
    for i in 1..=mu {
        match i {
            1 => last.push_str(" + l1"),
            _ => last.push_str(&format!(" + l{i}*(x - ({c}))^{}", i - 1)),
        }
    }
    let kappa = rand_q(rng, 1, 8, 8);
    fixed[0] = format!("{} + (1/20)*(l1 + {kappa})*(x - ({a}))^2", fixed[0]);
    let mut maps = fixed;
    maps.push(last);
    let sys = PeriodicSystem::parse(&maps, mu).unwrap();
    let mut init = vec![a.value_f64()];
    init.extend(std::iter::repeat(0.0).take(mu));
    RandomCase { sys, p, mu, init, maps }
}
