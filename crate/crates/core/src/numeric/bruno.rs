//! Explicit Faà di Bruno formula, kept as an independent check on
//! [`Jet::compose`](super::Jet::compose).

use num_bigint::BigInt;

use super::scalar::{factorial, Rational, Scalar};
use super::NumericError;

/// One solution `β` of `Σ_j j·β_j = m` with its combinatorial weight
/// `m! / ∏_j (β_j! (j!)^{β_j})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrunoTerm {
    pub beta: Vec<u32>,
    /// `Σ_j β_j`, the order of the outer derivative the term multiplies.
    pub n: u32,
    pub coefficient: Rational,
}

/// All `β ∈ ℕ^m` with `Σ_j j·β_j = m`. Empty for `m = 0`.
pub fn bruno_partitions(m: usize) -> Vec<BrunoTerm> {
    if m == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut beta = vec![0u32; m];
    fill(m, m, &mut beta, &mut out);
    out
}

// Assign β_part, β_{part-1}, ..., β_1 so that the remaining weight is consumed.
fn fill(part: usize, remaining: usize, beta: &mut Vec<u32>, out: &mut Vec<BrunoTerm>) {
    if part == 1 {
        beta[0] = remaining as u32;
        out.push(term(beta));
        return;
    }
    for count in (0..=remaining / part).rev() {
        beta[part - 1] = count as u32;
        fill(part - 1, remaining - count * part, beta, out);
    }
    beta[part - 1] = 0;
}

fn term(beta: &[u32]) -> BrunoTerm {
    let m: usize = beta.iter().enumerate().map(|(i, b)| (i + 1) * *b as usize).sum();
    let mut denom = Rational::from_integer(BigInt::from(1));
    for (i, b) in beta.iter().enumerate() {
        let jf = factorial(i + 1);
        denom *= factorial(*b as usize);
        for _ in 0..*b {
            denom *= &jf;
        }
    }
    BrunoTerm {
        beta: beta.to_vec(),
        n: beta.iter().sum(),
        coefficient: factorial(m) / denom,
    }
}

/// Raw `m`-th derivative of `g ∘ f` from raw derivatives of both maps.
///
/// `outer[n]` is `g^(n)(f(x))`, `inner[j]` is `f^(j)(x)`; index 0 is the value.
pub fn bruno_compose<S: Scalar>(outer: &[S], inner: &[S], m: usize) -> Result<S, NumericError> {
    let have = outer.len().min(inner.len());
    if have < m + 1 {
        return Err(NumericError::InsufficientOrder {
            needed: m,
            available: have.saturating_sub(1),
        });
    }
    if m == 0 {
        return Ok(outer[0].clone());
    }
    let mut total = outer[0].zero();
    for t in bruno_partitions(m) {
        let mut prod = outer[t.n as usize].scale(&t.coefficient);
        for (i, b) in t.beta.iter().enumerate() {
            for _ in 0..*b {
                prod = prod.mul(&inner[i + 1]);
            }
        }
        total = total.add(&prod);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn betas(m: usize) -> Vec<Vec<u32>> {
        let mut v: Vec<_> = bruno_partitions(m).into_iter().map(|t| t.beta).collect();
        v.sort();
        v
    }

    // Brute force over the box 0 <= β_j <= m/j.
    fn brute_force(m: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; m];
        loop {
            let s: usize = cur.iter().enumerate().map(|(i, b)| (i + 1) * *b as usize).sum();
            if s == m {
                out.push(cur.clone());
            }
            let mut i = 0;
            loop {
                if i == m {
                    out.sort();
                    return out;
                }
                if (cur[i] as usize) < m / (i + 1) {
                    cur[i] += 1;
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn small_partitions() {
        assert_eq!(betas(1), vec![vec![1]]);
        assert_eq!(betas(2), vec![vec![0, 1], vec![2, 0]]);
        let two = bruno_partitions(2);
        let by_beta = |b: &[u32]| two.iter().find(|t| t.beta == b).unwrap().clone();
        assert_eq!(by_beta(&[0, 1]).n, 1);
        assert_eq!(by_beta(&[2, 0]).n, 2);
    }

    #[test]
    fn partition_counts_match_brute_force() {
        // p(4) = 5 partitions of 4
        assert_eq!(bruno_partitions(4).len(), 5);
        for m in 1..=8 {
            assert_eq!(betas(m), brute_force(m), "m = {m}");
            for t in bruno_partitions(m) {
                let s: usize = t.beta.iter().enumerate().map(|(i, b)| (i + 1) * *b as usize).sum();
                assert_eq!(s, m);
            }
        }
    }

    #[test]
    fn third_order_coefficients() {
        // (gf)_3 = g_1 f_3 + 3 g_2 f_1 f_2 + g_3 f_1^3
        let t = bruno_partitions(3);
        let coef = |b: &[u32]| t.iter().find(|x| x.beta == b).unwrap().coefficient.clone();
        assert_eq!(coef(&[0, 0, 1]), q(1, 1));
        assert_eq!(coef(&[1, 1, 0]), q(3, 1));
        assert_eq!(coef(&[3, 0, 0]), q(1, 1));
    }

    #[test]
    fn chain_rule_and_cancellation() {
        let f = [q(0, 1), q(2, 1), q(4, 1)];
        let g = [q(0, 1), q(1, 2), q(-1, 2)];
        assert_eq!(bruno_compose(&g, &f, 1).unwrap(), q(1, 1));
        // f_1 g_1 = 1 and g_2 = -f_2/f_1^3 make (gf)_2 vanish
        assert_eq!(bruno_compose(&g, &f, 2).unwrap(), q(0, 1));
        assert!(matches!(
            bruno_compose(&g, &f, 3),
            Err(NumericError::InsufficientOrder { .. })
        ));
    }
}
