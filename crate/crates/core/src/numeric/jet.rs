use num_bigint::BigInt;

use super::scalar::{factorial, pow_int, rational_from_i64, Rational, Scalar};
use super::NumericError;

/// Truncated Taylor expansion `c_0 + c_1 h + ... + c_K h^K` of a scalar
/// function of `x`, with `c_k = f^(k)(x_0) / k!` (normalized coefficients).
///
/// The coefficient type is any [`Scalar`]; `Jet<Grad<f64>>` carries mixed
/// derivatives `∂_{x^k λ_i} f / k!` alongside the plain ones.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S> {
    coeffs: Vec<S>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftKind {
    Constant,
    Variable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    PowInt(i32),
    Tan,
    Sin,
    Cos,
    Exp,
}

impl JetOp {
    fn arity(self) -> usize {
        match self {
            JetOp::Add | JetOp::Sub | JetOp::Mul | JetOp::Div => 2,
            _ => 1,
        }
    }
}

fn inv_int<S: Scalar>(like: &S, k: usize) -> S {
    like.constant(&Rational::new(BigInt::from(1), BigInt::from(k)))
}

impl<S: Scalar> Jet<S> {
    /// Panics on an empty coefficient vector.
    pub fn from_coeffs(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet { coeffs }
    }

    pub fn lift(value: S, kind: LiftKind, order: usize) -> Self {
        let zero = value.zero();
        let mut coeffs = vec![zero; order + 1];
        if kind == LiftKind::Variable && order >= 1 {
            coeffs[1] = value.one();
        }
        coeffs[0] = value;
        Jet { coeffs }
    }

    pub fn constant_at(value: S, order: usize) -> Self {
        Self::lift(value, LiftKind::Constant, order)
    }

    pub fn variable_at(value: S, order: usize) -> Self {
        Self::lift(value, LiftKind::Variable, order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn value(&self) -> &S {
        &self.coeffs[0]
    }

    pub fn coeff(&self, k: usize) -> &S {
        &self.coeffs[k]
    }

    /// Raw derivative `f^(k)(x_0) = k! c_k`.
    pub fn derivative(&self, k: usize) -> S {
        self.coeffs[k].scale(&factorial(k))
    }

    pub fn derivatives(&self) -> Vec<S> {
        (0..=self.order()).map(|k| self.derivative(k)).collect()
    }

    /// Inverse of [`Jet::derivatives`].
    pub fn from_derivatives(derivs: &[S]) -> Self {
        assert!(!derivs.is_empty());
        let coeffs = derivs
            .iter()
            .enumerate()
            .map(|(k, d)| d.scale(&(Rational::from_integer(BigInt::from(1)) / factorial(k))))
            .collect();
        Jet { coeffs }
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Jet<T> {
        Jet {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    fn check_order(&self, rhs: &Self) -> Result<(), NumericError> {
        if self.order() != rhs.order() {
            return Err(NumericError::OrderMismatch {
                left: self.order(),
                right: rhs.order(),
            });
        }
        Ok(())
    }

    fn zip(&self, rhs: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        assert_eq!(self.order(), rhs.order(), "jet order mismatch");
        Jet {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Checked entry point for a single operation on jets of equal order.
    pub fn apply(op: JetOp, args: &[&Jet<S>], floor: f64) -> Result<Jet<S>, NumericError> {
        if args.len() != op.arity() {
            return Err(NumericError::Arity {
                expected: op.arity(),
                found: args.len(),
            });
        }
        if op.arity() == 2 {
            args[0].check_order(args[1])?;
        }
        let a = args[0];
        match op {
            JetOp::Add => Ok(a.add(args[1])),
            JetOp::Sub => Ok(a.sub(args[1])),
            JetOp::Mul => Ok(a.mul(args[1])),
            JetOp::Div => a.try_div(args[1], floor),
            JetOp::Neg => Ok(a.neg()),
            JetOp::PowInt(n) => pow_int(a, n, floor),
            JetOp::Tan => a.try_tan(floor),
            JetOp::Sin => a.try_sin(),
            JetOp::Cos => a.try_cos(),
            JetOp::Exp => a.try_exp(),
        }
    }

    /// Series substitution: `self` is the jet of an outer function expanded
    /// at `point`, `inner` is a jet whose value equals `point`; the result is
    /// the jet of `outer ∘ inner` at `inner`'s expansion point.
    pub fn compose(&self, point: &S, inner: &Jet<S>, tol: f64) -> Result<Jet<S>, NumericError> {
        self.check_order(inner)?;
        let offset = inner.coeffs[0].sub(point);
        let scale = point.value_f64().abs().max(1.0);
        if !offset.near_zero(tol * scale) {
            return Err(NumericError::ExpansionPointMismatch {
                expected: point.value_f64(),
                found: inner.coeffs[0].value_f64(),
            });
        }
        // h = inner - c_0, so h has no constant term and h^n starts at degree n.
        let mut h = inner.clone();
        h.coeffs[0] = h.coeffs[0].zero();
        let k = self.order();
        let mut acc = Jet::constant_at(self.coeffs[k].clone(), k);
        for n in (0..k).rev() {
            acc = acc.mul(&h);
            acc.coeffs[0] = acc.coeffs[0].add(&self.coeffs[n]);
        }
        Ok(acc)
    }
}

impl<S: Scalar> Scalar for Jet<S> {
    fn constant(&self, value: &Rational) -> Self {
        Jet::constant_at(self.coeffs[0].constant(value), self.order())
    }

    fn add(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a.add(b))
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a.sub(b))
    }

    fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.order(), rhs.order(), "jet order mismatch");
        let k = self.order();
        let coeffs = (0..=k)
            .map(|n| {
                let mut acc = self.coeffs[0].mul(&rhs.coeffs[n]);
                for i in 1..=n {
                    acc = acc.add(&self.coeffs[i].mul(&rhs.coeffs[n - i]));
                }
                acc
            })
            .collect();
        Jet { coeffs }
    }

    fn neg(&self) -> Self {
        Jet {
            coeffs: self.coeffs.iter().map(Scalar::neg).collect(),
        }
    }

    fn try_div(&self, rhs: &Self, floor: f64) -> Result<Self, NumericError> {
        self.check_order(rhs)?;
        let b0 = &rhs.coeffs[0];
        if b0.near_zero(floor) {
            return Err(NumericError::DivisionByNearZero {
                value: b0.value_f64(),
            });
        }
        let mut q: Vec<S> = Vec::with_capacity(self.coeffs.len());
        for k in 0..self.coeffs.len() {
            let mut num = self.coeffs[k].clone();
            for j in 1..=k {
                num = num.sub(&rhs.coeffs[j].mul(&q[k - j]));
            }
            q.push(num.try_div(b0, floor)?);
        }
        Ok(Jet { coeffs: q })
    }

    fn try_exp(&self) -> Result<Self, NumericError> {
        let u = &self.coeffs;
        let mut y = vec![u[0].try_exp()?];
        for k in 1..u.len() {
            let mut acc = u[0].zero();
            for j in 1..=k {
                acc = acc.add(&u[j].scale(&rational_from_i64(j as i64)).mul(&y[k - j]));
            }
            y.push(acc.mul(&inv_int(&u[0], k)));
        }
        Ok(Jet { coeffs: y })
    }

    fn try_sin_cos(&self) -> Result<(Self, Self), NumericError> {
        let u = &self.coeffs;
        let (s0, c0) = u[0].try_sin_cos()?;
        let mut s = vec![s0];
        let mut c = vec![c0];
        for k in 1..u.len() {
            let mut sa = u[0].zero();
            let mut ca = u[0].zero();
            for j in 1..=k {
                let ju = u[j].scale(&rational_from_i64(j as i64));
                sa = sa.add(&ju.mul(&c[k - j]));
                ca = ca.sub(&ju.mul(&s[k - j]));
            }
            let inv = inv_int(&u[0], k);
            s.push(sa.mul(&inv));
            c.push(ca.mul(&inv));
        }
        Ok((Jet { coeffs: s }, Jet { coeffs: c }))
    }

    fn try_tan(&self, floor: f64) -> Result<Self, NumericError> {
        // t' = (1 + t^2) u'
        let u = &self.coeffs;
        let t0 = u[0].try_tan(floor)?;
        let mut t = vec![t0.clone()];
        let mut w = vec![t0.one().add(&t0.mul(&t0))];
        for k in 1..u.len() {
            let mut acc = u[0].zero();
            for j in 1..=k {
                acc = acc.add(&u[j].scale(&rational_from_i64(j as i64)).mul(&w[k - j]));
            }
            t.push(acc.mul(&inv_int(&u[0], k)));
            let mut sq = t[0].mul(&t[k]);
            for i in 1..=k {
                sq = sq.add(&t[i].mul(&t[k - i]));
            }
            w.push(sq);
        }
        Ok(Jet { coeffs: t })
    }

    fn value_f64(&self) -> f64 {
        self.coeffs[0].value_f64()
    }

    fn near_zero(&self, floor: f64) -> bool {
        self.coeffs[0].near_zero(floor)
    }

    fn is_exact(&self) -> bool {
        self.coeffs[0].is_exact()
    }

    fn render(&self) -> String {
        self.coeffs[0].render()
    }
}
