//! Map expressions: AST, parser and evaluation into jets.

mod ast;
mod parser;

pub use ast::{Expr, Func};

use crate::numeric::{Grad, Jet, NumericError, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: expected {expected}, found {found}")]
    Syntax {
        pos: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier '{name}' at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("parameter l{index} at byte {pos} is out of range (valid: l1..l{mu})")]
    ParamIndexOutOfRange { index: usize, mu: usize, pos: usize },
    #[error("empty expression")]
    Empty,
}

/// Parses one map definition. Parameters must lie in `l1..l{mu}`.
pub fn parse(text: &str, mu: usize) -> Result<Expr, ExprError> {
    parser::Parser::new(text, mu)?.parse_all()
}

/// Jet in `x` at `x0` whose coefficients also carry the gradient in the
/// parameters, i.e. coefficient `k` holds `f_{x^k}/k!` and `f_{x^k λ_i}/k!`.
pub fn eval_jet_grad<S: Scalar>(
    expr: &Expr,
    x0: &S,
    params: &[S],
    order: usize,
    floor: f64,
) -> Result<Jet<Grad<S>>, NumericError> {
    let dim = params.len();
    let x = Jet::variable_at(Grad::constant_of(x0.clone(), dim), order);
    let p: Vec<Jet<Grad<S>>> = params
        .iter()
        .enumerate()
        .map(|(i, v)| Jet::constant_at(Grad::variable(v.clone(), i, dim), order))
        .collect();
    expr.eval(&x, &p, floor)
}
