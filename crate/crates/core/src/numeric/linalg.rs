use num_traits::Zero;

use super::scalar::{Rational, Scalar};

/// Determinant of a dense square matrix given as rows.
pub trait Determinant: Scalar {
    fn determinant(rows: &[Vec<Self>]) -> Self;
}

impl Determinant for f64 {
    /// LU with partial pivoting.
    fn determinant(rows: &[Vec<f64>]) -> f64 {
        let n = rows.len();
        let mut a: Vec<Vec<f64>> = rows.to_vec();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            if a[pivot][col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            det *= a[col][col];
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
        det
    }
}

impl Determinant for Rational {
    /// Fraction-free (Bareiss) elimination; every division is exact.
    fn determinant(rows: &[Vec<Rational>]) -> Rational {
        let n = rows.len();
        if n == 0 {
            return Rational::from_integer(1.into());
        }
        let mut a: Vec<Vec<Rational>> = rows.to_vec();
        let mut sign = Rational::from_integer(1.into());
        let mut prev = Rational::from_integer(1.into());
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return <Rational as Zero>::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }
}

/// Largest absolute entry, for scale-aware comparisons.
pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}
