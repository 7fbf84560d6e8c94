use super::scalar::{Rational, Scalar};
use super::NumericError;

/// A value together with its first-order gradient in the parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Grad<S> {
    pub value: S,
    pub grad: Vec<S>,
}

impl<S: Scalar> Grad<S> {
    pub fn constant_of(value: S, dim: usize) -> Self {
        let z = value.zero();
        Grad {
            grad: vec![z; dim],
            value,
        }
    }

    /// The `index`-th coordinate of a `dim`-dimensional parameter vector.
    pub fn variable(value: S, index: usize, dim: usize) -> Self {
        assert!(index < dim, "gradient index {index} out of range for dimension {dim}");
        let mut g = Self::constant_of(value, dim);
        g.grad[index] = g.value.one();
        g
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    fn zip_grad(&self, rhs: &Self, f: impl Fn(&S, &S) -> S) -> Vec<S> {
        assert_eq!(self.grad.len(), rhs.grad.len(), "gradient length mismatch");
        self.grad.iter().zip(&rhs.grad).map(|(a, b)| f(a, b)).collect()
    }

    fn chain(&self, value: S, slope: &S) -> Self {
        Grad {
            value,
            grad: self.grad.iter().map(|g| g.mul(slope)).collect(),
        }
    }
}

impl<S: Scalar> Scalar for Grad<S> {
    fn constant(&self, value: &Rational) -> Self {
        Self::constant_of(self.value.constant(value), self.grad.len())
    }

    fn add(&self, rhs: &Self) -> Self {
        Grad {
            value: self.value.add(&rhs.value),
            grad: self.zip_grad(rhs, |a, b| a.add(b)),
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        Grad {
            value: self.value.sub(&rhs.value),
            grad: self.zip_grad(rhs, |a, b| a.sub(b)),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        Grad {
            value: self.value.mul(&rhs.value),
            grad: self.zip_grad(rhs, |a, b| a.mul(&rhs.value).add(&self.value.mul(b))),
        }
    }

    fn neg(&self) -> Self {
        Grad {
            value: self.value.neg(),
            grad: self.grad.iter().map(Scalar::neg).collect(),
        }
    }

    fn try_div(&self, rhs: &Self, floor: f64) -> Result<Self, NumericError> {
        let q = self.value.try_div(&rhs.value, floor)?;
        let mut grad = Vec::with_capacity(self.grad.len());
        for (a, b) in self.grad.iter().zip(&rhs.grad) {
            grad.push(a.sub(&q.mul(b)).try_div(&rhs.value, floor)?);
        }
        Ok(Grad { value: q, grad })
    }

    fn try_exp(&self) -> Result<Self, NumericError> {
        let e = self.value.try_exp()?;
        Ok(self.chain(e.clone(), &e))
    }

    fn try_sin_cos(&self) -> Result<(Self, Self), NumericError> {
        let (s, c) = self.value.try_sin_cos()?;
        let sin = self.chain(s.clone(), &c);
        let cos = self.chain(c, &s.neg());
        Ok((sin, cos))
    }

    fn try_tan(&self, floor: f64) -> Result<Self, NumericError> {
        let t = self.value.try_tan(floor)?;
        let sec2 = t.one().add(&t.mul(&t));
        Ok(self.chain(t, &sec2))
    }

    fn value_f64(&self) -> f64 {
        self.value.value_f64()
    }

    fn near_zero(&self, floor: f64) -> bool {
        self.value.near_zero(floor)
    }

    fn is_exact(&self) -> bool {
        self.value.is_exact()
    }

    fn render(&self) -> String {
        self.value.render()
    }
}
