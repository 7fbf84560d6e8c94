use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::NumericError;

/// Exact rational scalar, always normalized (lowest terms, positive denominator).
pub type Rational = BigRational;

/// Arithmetic shared by every scalar kind the evaluator runs over.
///
/// Constants are created *shaped like* an existing value (`constant`), so a
/// jet constant gets the right order and a gradient constant gets the right
/// parameter count without threading that information separately.
pub trait Scalar: Clone + Debug + Send + Sync {
    fn constant(&self, value: &Rational) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;

    fn try_div(&self, rhs: &Self, floor: f64) -> Result<Self, NumericError>;
    fn try_exp(&self) -> Result<Self, NumericError>;
    fn try_sin_cos(&self) -> Result<(Self, Self), NumericError>;
    fn try_tan(&self, floor: f64) -> Result<Self, NumericError>;

    /// Leading real value (the value itself, `c_0` of a jet, the primal of a gradient).
    fn value_f64(&self) -> f64;

    /// True when the leading value is below `floor` in magnitude. Exact
    /// kinds ignore `floor` and test for exact zero.
    fn near_zero(&self, floor: f64) -> bool;

    /// Exact kinds never round.
    fn is_exact(&self) -> bool;

    /// Human/JSON rendering of the leading value: `p/q` for exact kinds,
    /// shortest round-trip decimal for floats.
    fn render(&self) -> String;

    fn zero(&self) -> Self {
        self.constant(&<Rational as Zero>::zero())
    }

    fn one(&self) -> Self {
        self.constant(&Rational::from_integer(BigInt::from(1)))
    }

    fn scale(&self, k: &Rational) -> Self {
        self.mul(&self.constant(k))
    }

    fn try_sin(&self) -> Result<Self, NumericError> {
        self.try_sin_cos().map(|(s, _)| s)
    }

    fn try_cos(&self) -> Result<Self, NumericError> {
        self.try_sin_cos().map(|(_, c)| c)
    }
}

pub fn rational_from_i64(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite binary64 value.
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

/// Integer power by repeated squaring; negative exponents divide.
pub fn pow_int<S: Scalar>(base: &S, exponent: i32, floor: f64) -> Result<S, NumericError> {
    let mut e = exponent.unsigned_abs();
    let mut acc = base.one();
    let mut sq = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&sq);
        }
        e >>= 1;
        if e > 0 {
            sq = sq.mul(&sq);
        }
    }
    if exponent < 0 {
        base.one().try_div(&acc, floor)
    } else {
        Ok(acc)
    }
}

pub fn factorial(k: usize) -> Rational {
    let mut acc = BigInt::from(1);
    for i in 2..=k {
        acc *= BigInt::from(i);
    }
    Rational::from_integer(acc)
}

impl Scalar for f64 {
    fn constant(&self, value: &Rational) -> Self {
        rational_to_f64(value)
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn try_div(&self, rhs: &Self, floor: f64) -> Result<Self, NumericError> {
        if rhs.near_zero(floor) {
            return Err(NumericError::DivisionByNearZero { value: *rhs });
        }
        Ok(self / rhs)
    }

    fn try_exp(&self) -> Result<Self, NumericError> {
        Ok(f64::exp(*self))
    }

    fn try_sin_cos(&self) -> Result<(Self, Self), NumericError> {
        Ok(f64::sin_cos(*self))
    }

    fn try_tan(&self, floor: f64) -> Result<Self, NumericError> {
        let (s, c) = f64::sin_cos(*self);
        if c.abs() < floor {
            return Err(NumericError::TanPole { arg: *self });
        }
        Ok(s / c)
    }

    fn value_f64(&self) -> f64 {
        *self
    }

    fn near_zero(&self, floor: f64) -> bool {
        !(self.abs() > floor)
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn render(&self) -> String {
        format!("{self:?}")
    }
}

impl Scalar for Rational {
    fn constant(&self, value: &Rational) -> Self {
        value.clone()
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn try_div(&self, rhs: &Self, _floor: f64) -> Result<Self, NumericError> {
        if rhs.is_zero() {
            return Err(NumericError::DivisionByNearZero { value: 0.0 });
        }
        Ok(self / rhs)
    }

    fn try_exp(&self) -> Result<Self, NumericError> {
        Err(NumericError::UnsupportedInRationalMode { op: "exp" })
    }

    fn try_sin_cos(&self) -> Result<(Self, Self), NumericError> {
        Err(NumericError::UnsupportedInRationalMode { op: "sin/cos" })
    }

    fn try_tan(&self, _floor: f64) -> Result<Self, NumericError> {
        Err(NumericError::UnsupportedInRationalMode { op: "tan" })
    }

    fn value_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn near_zero(&self, _floor: f64) -> bool {
        self.is_zero()
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}
