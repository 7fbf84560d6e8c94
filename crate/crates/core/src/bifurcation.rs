//! A_μ bifurcation equations: residual, damped Newton solve, non-degeneracy,
//! transversality determinant and singularity classification.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::numeric::{factorial, rational_to_f64, Determinant, Scalar};
use crate::system::{PeriodicSystem, SystemError};

/// Lower band: a derivative of order k "vanishes" when `|d| <= VANISH_BAND * k!`.
pub const VANISH_BAND: f64 = 1e-7;
/// Upper band: a derivative of order k is "nonzero" when `|d| >= NONZERO_BAND * k!`.
pub const NONZERO_BAND: f64 = 1e-4;
/// Default classification cap (butterfly plus margin).
pub const DEFAULT_MU_MAX: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Initial step length of the line search, in (0, 1].
    pub damping: f64,
    pub nondeg_tol: f64,
    pub hyperb_delta: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            residual_tol: 1e-12,
            max_iter: 100,
            damping: 1.0,
            nondeg_tol: 1e-6,
            hyperb_delta: 1e-8,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), BifError> {
        let positive = [
            ("residual_tol", self.residual_tol),
            ("nondeg_tol", self.nondeg_tol),
            ("hyperb_delta", self.hyperb_delta),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(BifError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(BifError::InvalidConfig(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if self.max_iter == 0 {
            return Err(BifError::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// A solved point `(x*, Λ*)` of the A_μ equations for `F_j^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub rotation: usize,
    pub power: usize,
    pub mu: usize,
    pub class_mu: usize,
    pub x_star: f64,
    pub lambda_star: Vec<f64>,
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub nondeg_value: f64,
    pub nondeg_scale: f64,
    pub transversality_det: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BifError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("class mu = {mu} needs 1 <= mu <= {max}")]
    MuOutOfRange { mu: usize, max: usize },
    #[error("expected {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Newton did not converge after {} iterations (best residual {:e})", .best.iterations, .best.residual_norm)]
    NoConvergence { best: Box<BifurcationPoint> },
    #[error("Jacobian is singular at iteration {iteration} and no descent step was found")]
    SingularJacobian { iteration: usize },
    #[error("derivative of order {order} ({value:e}) lies between the vanishing and nonzero bands")]
    Ambiguous { order: usize, value: f64 },
    #[error("all derivatives through order {} vanish; degeneracy exceeds A_{}", .mu_max + 1, .mu_max)]
    DegeneracyExceedsCap { mu_max: usize },
}

/// `[F - x, F_x - 1, F_xx, ..., F_{x^μ}]` for `F = F_j^k`, raw derivatives.
pub fn residual<S: Scalar>(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    mu: usize,
    x: &S,
    params: &[S],
) -> Result<Vec<S>, BifError> {
    let jet = sys.composition_jet_plain(j, k, x, params, mu)?;
    Ok(residual_from_derivs(&jet.derivatives(), x, mu))
}

fn residual_from_derivs<S: Scalar>(d: &[S], x: &S, mu: usize) -> Vec<S> {
    (0..=mu)
        .map(|i| match i {
            0 => d[0].sub(x),
            1 => d[1].sub(&x.one()),
            _ => d[i].clone(),
        })
        .collect()
}

/// Matrix `(r, i) = F_{x^r λ_i}` for `r, i < μ` and its determinant.
pub fn transversality<S: Determinant>(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    mu: usize,
    x: &S,
    params: &[S],
) -> Result<(Vec<Vec<S>>, S), BifError> {
    check_mu(sys, mu)?;
    let jet = sys.composition_jet(j, k, x, params, mu.saturating_sub(1))?;
    let rows: Vec<Vec<S>> = (0..mu)
        .map(|r| {
            let d = jet.derivative(r);
            d.grad[..mu].to_vec()
        })
        .collect();
    let det = S::determinant(&rows);
    Ok((rows, det))
}

fn check_mu(sys: &PeriodicSystem, mu: usize) -> Result<(), BifError> {
    if mu == 0 || mu > sys.mu() {
        return Err(BifError::MuOutOfRange { mu, max: sys.mu() });
    }
    Ok(())
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Residual and its Jacobian in the unknowns `(x, λ_1, ..., λ_μ)`, plus
/// `F_{x^{μ+1}}`.
fn residual_and_jacobian(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    mu: usize,
    z: &[f64],
) -> Result<(Vec<f64>, DMatrix<f64>, f64), BifError> {
    let jet = sys.composition_jet(j, k, &z[0], &z[1..], mu + 1)?;
    let d = jet.derivatives();
    let values: Vec<f64> = d.iter().map(|g| g.value).collect();
    let r = residual_from_derivs(&values, &z[0], mu);
    let n = mu + 1;
    let mut jac = DMatrix::zeros(n, n);
    for i in 0..n {
        jac[(i, 0)] = values[i + 1] - if i == 0 { 1.0 } else { 0.0 };
        for m in 0..mu {
            jac[(i, m + 1)] = d[i].grad[m];
        }
    }
    Ok((r, jac, values[mu + 1]))
}

/// Public view of the Newton Jacobian (rows: residual components, columns:
/// `x, λ_1..λ_μ`).
pub fn newton_jacobian(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    mu: usize,
    z: &[f64],
) -> Result<Vec<Vec<f64>>, BifError> {
    check_mu(sys, mu)?;
    if sys.mu() != mu || z.len() != mu + 1 {
        return Err(BifError::DimensionMismatch {
            expected: sys.mu() + 1,
            found: z.len(),
        });
    }
    let (_, jac, _) = residual_and_jacobian(sys, j, k, mu, z)?;
    Ok((0..jac.nrows()).map(|r| jac.row(r).iter().copied().collect()).collect())
}

fn newton_step(jac: &DMatrix<f64>, r: &[f64]) -> Option<DVector<f64>> {
    let rhs = -DVector::from_column_slice(r);
    let lu = jac.clone().lu().solve(&rhs).filter(|s| s.iter().all(|v| v.is_finite()));
    if lu.is_some() {
        return lu;
    }
    let svd = jac.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return None;
    }
    svd.solve(&rhs, smax * 1e-12)
        .ok()
        .filter(|s| s.iter().all(|v| v.is_finite()) && s.norm() > 0.0)
}

/// Damped Newton on the A_μ equations for `F_j^k` in `(x, Λ)` jointly.
pub fn solve(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    mu: usize,
    init: &[f64],
    cfg: &SolveConfig,
) -> Result<BifurcationPoint, BifError> {
    cfg.validate()?;
    check_mu(sys, mu)?;
    if sys.mu() != mu {
        return Err(BifError::DimensionMismatch {
            expected: mu,
            found: sys.mu(),
        });
    }
    if init.len() != mu + 1 {
        return Err(BifError::DimensionMismatch {
            expected: mu + 1,
            found: init.len(),
        });
    }
    let mut z = init.to_vec();
    let (mut r, mut jac, top0) = residual_and_jacobian(sys, j, k, mu, &z)?;
    let scale = top0.abs().max(1.0);
    let mut norm = norm2(&r);
    let mut iterations = 0;
    while norm > cfg.residual_tol && iterations < cfg.max_iter {
        iterations += 1;
        let Some(step) = newton_step(&jac, &r) else {
            if iterations == 1 {
                return Err(BifError::SingularJacobian { iteration: iterations });
            }
            break;
        };
        let mut t = cfg.damping;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            if let Ok(eval) = residual_and_jacobian(sys, j, k, mu, &trial) {
                let n = norm2(&eval.0);
                if n < norm {
                    accepted = Some((trial, eval, n));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, (r2, j2, _), n)) => {
                z = trial;
                r = r2;
                jac = j2;
                norm = n;
            }
            None => break,
        }
    }
    let converged = norm <= cfg.residual_tol;
    let point = finish_point(sys, j, k, mu, &z, r, norm, scale, converged, iterations)?;
    if converged {
        Ok(point)
    } else {
        Err(BifError::NoConvergence { best: Box::new(point) })
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_point(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    mu: usize,
    z: &[f64],
    residual: Vec<f64>,
    residual_norm: f64,
    nondeg_scale: f64,
    converged: bool,
    iterations: usize,
) -> Result<BifurcationPoint, BifError> {
    let jet = sys.composition_jet_plain(j, k, &z[0], &z[1..], mu + 1)?;
    let nondeg_value = jet.derivative(mu + 1);
    let (_, det) = transversality(sys, j, k, mu, &z[0], &z[1..])?;
    Ok(BifurcationPoint {
        rotation: j,
        power: k,
        mu,
        class_mu: mu,
        x_star: z[0],
        lambda_star: z[1..].to_vec(),
        residual,
        residual_norm,
        nondeg_value,
        nondeg_scale,
        transversality_det: det,
        converged,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    pub value: f64,
    pub scale: f64,
    pub nondegenerate: bool,
}

/// `F_{x^{μ+1}}` at the point, flagged against `nondeg_tol · scale`.
pub fn nondegeneracy(sys: &PeriodicSystem, point: &BifurcationPoint, cfg: &SolveConfig) -> Result<Nondegeneracy, BifError> {
    let jet = sys.composition_jet_plain(
        point.rotation,
        point.power,
        &point.x_star,
        &point.lambda_star,
        point.mu + 1,
    )?;
    let value = jet.derivative(point.mu + 1);
    let scale = point.nondeg_scale.max(1.0);
    Ok(Nondegeneracy {
        value,
        scale,
        nondegenerate: value.abs() > cfg.nondeg_tol * scale,
    })
}

/// Result of the A_μ ladder test at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// `Some(μ)` for A_μ, `None` when the point is not a degenerate fixed point.
    pub class_mu: Option<usize>,
    /// Sign of `F_{x^{μ+1}}` (the germ variant is not named).
    pub sign: Option<i8>,
    /// `[F - x, F_x - 1, F_xx, ..., F_{x^{μ_max+1}}]` as floats.
    pub ladder: Vec<f64>,
}

impl Classification {
    pub fn label(&self) -> String {
        match self.class_mu {
            Some(m) => format!("A_{m}"),
            None => "none".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Band {
    Vanishes,
    Nonzero,
    Between,
}

fn band<S: Scalar>(v: &S, order: usize) -> Band {
    if v.is_exact() {
        return if v.near_zero(0.0) { Band::Vanishes } else { Band::Nonzero };
    }
    let kf = rational_to_f64(&factorial(order));
    let a = v.value_f64().abs();
    if a <= VANISH_BAND * kf {
        Band::Vanishes
    } else if a >= NONZERO_BAND * kf {
        Band::Nonzero
    } else {
        Band::Between
    }
}

/// Largest μ ≤ `mu_max` whose degeneracy ladder vanishes with a nonzero
/// `F_{x^{μ+1}}`. Exact scalars are compared against zero exactly.
pub fn classify_singularity<S: Scalar>(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    x: &S,
    params: &[S],
    mu_max: usize,
) -> Result<Classification, BifError> {
    if mu_max == 0 {
        return Err(BifError::MuOutOfRange { mu: 0, max: DEFAULT_MU_MAX });
    }
    let jet = sys.composition_jet_plain(j, k, x, params, mu_max + 1)?;
    let ladder = residual_from_derivs(&jet.derivatives(), x, mu_max + 1);
    let floats: Vec<f64> = ladder.iter().map(Scalar::value_f64).collect();
    let not_degenerate = Classification {
        class_mu: None,
        sign: None,
        ladder: floats.clone(),
    };
    for (order, v) in ladder.iter().enumerate().take(2) {
        match band(v, order) {
            Band::Vanishes => {}
            Band::Nonzero => return Ok(not_degenerate),
            Band::Between => {
                return Err(BifError::Ambiguous {
                    order,
                    value: v.value_f64(),
                })
            }
        }
    }
    for (order, v) in ladder.iter().enumerate().skip(2) {
        match band(v, order) {
            Band::Vanishes => continue,
            Band::Nonzero => {
                return Ok(Classification {
                    class_mu: Some(order - 1),
                    sign: Some(if v.value_f64() > 0.0 { 1 } else { -1 }),
                    ladder: floats,
                })
            }
            Band::Between => {
                return Err(BifError::Ambiguous {
                    order,
                    value: v.value_f64(),
                })
            }
        }
    }
    Err(BifError::DegeneracyExceedsCap { mu_max })
}

/// Normal form `x + x^{μ+1} + λ_1 + λ_2 x + ... + λ_μ x^{μ-1}`.
pub fn principal_family(mu: usize) -> String {
    let mut s = format!("x + x^{}", mu + 1);
    for i in 1..=mu {
        match i {
            1 => s.push_str(" + l1"),
            2 => s.push_str(" + l2*x"),
            _ => s.push_str(&format!(" + l{i}*x^{}", i - 1)),
        }
    }
    s
}
