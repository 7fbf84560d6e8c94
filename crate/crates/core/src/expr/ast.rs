use std::fmt;

use num_traits::{Signed, Zero};

use crate::numeric::{pow_int, Jet, NumericError, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Tan,
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Tan => "tan",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "tan" => Some(Func::Tan),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }
}

/// Expression tree for one map `f(x, l1, ..., lμ)`.
///
/// `Param(i)` is 1-based, matching the `l<i>` surface syntax. Constant
/// literals are kept normalized: negation of a constant and division of two
/// constants are folded into a single `Const` by the smart constructors,
/// which is what lets a printed tree re-parse to the identical tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(Rational),
    X,
    Param(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    PowInt(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(value: Rational) -> Expr {
        Expr::Const(value)
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(n), Expr::Const(d)) if !d.is_zero() => Expr::Const(n / d),
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(base: Expr, exponent: i32) -> Expr {
        Expr::PowInt(Box::new(base), exponent)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    /// Largest parameter index referenced (0 if none).
    pub fn max_param(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::X => 0,
            Expr::Param(i) => *i,
            Expr::Neg(a) | Expr::PowInt(a, _) | Expr::Call(_, a) => a.max_param(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_param().max(b.max_param())
            }
        }
    }

    pub fn has_transcendental(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::X | Expr::Param(_) => false,
            Expr::Call(..) => true,
            Expr::Neg(a) | Expr::PowInt(a, _) => a.has_transcendental(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_transcendental() || b.has_transcendental()
            }
        }
    }

    /// Evaluates over any scalar kind. Constants take the shape of `x`.
    pub fn eval<S: Scalar>(&self, x: &S, params: &[S], floor: f64) -> Result<S, NumericError> {
        Ok(match self {
            Expr::Const(c) => x.constant(c),
            Expr::X => x.clone(),
            Expr::Param(i) => params
                .get(i.wrapping_sub(1))
                .cloned()
                .ok_or(NumericError::MissingParameter {
                    index: *i,
                    available: params.len(),
                })?,
            Expr::Neg(a) => a.eval(x, params, floor)?.neg(),
            Expr::Add(a, b) => a.eval(x, params, floor)?.add(&b.eval(x, params, floor)?),
            Expr::Sub(a, b) => a.eval(x, params, floor)?.sub(&b.eval(x, params, floor)?),
            Expr::Mul(a, b) => a.eval(x, params, floor)?.mul(&b.eval(x, params, floor)?),
            Expr::Div(a, b) => a
                .eval(x, params, floor)?
                .try_div(&b.eval(x, params, floor)?, floor)?,
            Expr::PowInt(a, n) => pow_int(&a.eval(x, params, floor)?, *n, floor)?,
            Expr::Call(f, a) => {
                let v = a.eval(x, params, floor)?;
                match f {
                    Func::Tan => v.try_tan(floor)?,
                    Func::Sin => v.try_sin()?,
                    Func::Cos => v.try_cos()?,
                    Func::Exp => v.try_exp()?,
                }
            }
        })
    }

    /// Jet of order `order` of the map at `x0`, parameters held constant.
    pub fn eval_jet<S: Scalar>(
        &self,
        x0: &S,
        params: &[S],
        order: usize,
        floor: f64,
    ) -> Result<Jet<S>, NumericError> {
        let x = Jet::variable_at(x0.clone(), order);
        let p: Vec<Jet<S>> = params
            .iter()
            .map(|v| Jet::constant_at(v.clone(), order))
            .collect();
        self.eval(&x, &p, floor)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Const(c) if !c.is_integer() => 2,
            Expr::Const(c) if c.is_negative() => 3,
            Expr::Neg(_) => 3,
            Expr::PowInt(..) => 4,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_integer() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "{}/{}", c.numer(), c.denom())
                }
            }
            Expr::X => write!(f, "x"),
            Expr::Param(i) => write!(f, "l{i}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, 3)
            }
            Expr::Add(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " + ")?;
                write_child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " - ")?;
                write_child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "*")?;
                write_child(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "/")?;
                write_child(f, b, 3)
            }
            Expr::PowInt(a, n) => {
                write_child(f, a, 5)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
