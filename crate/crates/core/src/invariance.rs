//! Rotation invariance of the A_μ conditions, the Jacobian ratio law,
//! Schwarzian criteria, A_3 exclusion predicates and contact order.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bifurcation::{classify_singularity, residual, transversality, BifError, DEFAULT_MU_MAX, NONZERO_BAND};
use crate::expr::Expr;
use crate::numeric::{factorial, pow_int, rational_from_i64, rational_to_f64, Determinant, Jet, NumericError, Scalar};
use crate::system::{Interval, PeriodicSystem, SystemError};

#[derive(Debug, thiserror::Error)]
pub enum InvError {
    #[error(transparent)]
    Bifurcation(#[from] BifError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("x = {x} is a critical point (|f'| below {floor:e})")]
    CriticalPoint { x: f64, floor: f64 },
    #[error("this check needs an alternating system (p = 2), got p = {p}")]
    WrongArity { p: usize },
    #[error("this check needs an A_3 point, classified as {found}")]
    WrongClass { found: String },
    #[error("no fiber intervals: pass them explicitly or set them on the system")]
    MissingIntervals,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub residual_tol: f64,
    pub ratio_tol: f64,
    pub closure_tol: f64,
    /// Scale multiplying `NONZERO_BAND · (μ+1)!` in the non-degeneracy test.
    pub nondeg_scale: f64,
    pub det_floor: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            residual_tol: 1e-8,
            ratio_tol: 1e-8,
            closure_tol: 1e-9,
            nondeg_scale: 1.0,
            det_floor: 1e-12,
        }
    }
}

/// Checks at one rotation `m`, plus the ratio law linking it to `m + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationRecord<S> {
    pub rotation: usize,
    pub fixed_point: S,
    pub residual: Vec<S>,
    pub residual_norm: f64,
    pub nondeg_value: S,
    pub det: S,
    /// `∂_x f_m(a_m)`.
    pub multiplier: S,
    /// `multiplier^e` with `e = (3μ - μ²)/2`.
    pub predicted_factor: S,
    /// `|J_{m+1} - predicted_factor · J_m| / |J_{m+1}|`.
    pub ratio_defect: f64,
    pub residual_ok: bool,
    pub nondeg_ok: bool,
    pub det_ok: bool,
    pub ratio_ok: bool,
}

impl<S: Scalar> RotationRecord<S> {
    pub fn pass(&self) -> bool {
        self.residual_ok && self.nondeg_ok && self.det_ok && self.ratio_ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport<S> {
    pub mu: usize,
    pub power: usize,
    pub exponent: i32,
    pub rotations: Vec<RotationRecord<S>>,
    pub pass: bool,
}

/// Exact scalars render as `"p/q"` strings; floats as JSON numbers.
pub fn scalar_json<S: Scalar>(v: &S) -> Value {
    if v.is_exact() {
        Value::String(v.render())
    } else {
        json!(v.value_f64())
    }
}

impl<S: Scalar> InvarianceReport<S> {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rotations
            .iter()
            .map(|r| {
                json!({
                    "rotation": r.rotation,
                    "fixed_point": scalar_json(&r.fixed_point),
                    "residual": r.residual.iter().map(scalar_json).collect::<Vec<_>>(),
                    "residual_norm": r.residual_norm,
                    "nondeg_value": scalar_json(&r.nondeg_value),
                    "det": scalar_json(&r.det),
                    "multiplier": scalar_json(&r.multiplier),
                    "predicted_factor": scalar_json(&r.predicted_factor),
                    "ratio_defect": r.ratio_defect,
                    "pass": r.pass(),
                })
            })
            .collect();
        json!({
            "mu": self.mu,
            "power": self.power,
            "exponent": self.exponent,
            "rotations": rows,
            "pass": self.pass,
        })
    }
}

/// `(3μ - μ²)/2`, always an integer.
pub fn ratio_exponent(mu: usize) -> i32 {
    let m = mu as i32;
    (3 * m - m * m) / 2
}

fn abs_f64<S: Scalar>(v: &S) -> f64 {
    v.value_f64().abs()
}

fn relative_defect<S: Scalar>(actual: &S, predicted: &S) -> f64 {
    let diff = actual.sub(predicted);
    if diff.is_exact() && diff.near_zero(0.0) {
        return 0.0;
    }
    let d = abs_f64(&diff);
    let a = abs_f64(actual);
    if a > 0.0 {
        d / a
    } else {
        d
    }
}

/// Verifies the A_μ conditions at every rotation of the orbit through `x`
/// (a fixed point of `F_j^k`) and the ratio law
/// `J_{m+1} = (∂_x f_m(a_m))^{(3μ-μ²)/2} · J_m` between consecutive rotations.
pub fn verify<S: Determinant>(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    mu: usize,
    x: &S,
    params: &[S],
    cfg: &VerifyConfig,
) -> Result<InvarianceReport<S>, InvError> {
    let p = sys.period();
    let orbit = sys.fiber_points(j, k, x, params, cfg.closure_tol)?;
    let e = ratio_exponent(mu);
    let nondeg_min = NONZERO_BAND * rational_to_f64(&factorial(mu + 1)) * cfg.nondeg_scale;
    let mut partial = Vec::with_capacity(p);
    for m in 0..p {
        let a = &orbit.points[m];
        let res = residual(sys, m, k, mu, a, params)?;
        let jet = sys.composition_jet_plain(m, k, a, params, mu + 1)?;
        let nondeg = jet.derivative(mu + 1);
        let (_, det) = transversality(sys, m, k, mu, a, params)?;
        let fjet: Jet<S> = sys
            .map(m)
            .eval_jet(a, params, 1, sys.floor())
            .map_err(|source| SystemError::Eval { map: m, step: 0, source })?;
        let multiplier = fjet.derivative(1);
        let factor = pow_int(&multiplier, e, sys.floor())?;
        partial.push((a.clone(), res, nondeg, det, multiplier, factor));
    }
    let mut rotations = Vec::with_capacity(p);
    for m in 0..p {
        let next_det = partial[(m + 1) % p].3.clone();
        let (a, res, nondeg, det, multiplier, factor) = partial[m].clone();
        let predicted = factor.mul(&det);
        let ratio_defect = relative_defect(&next_det, &predicted);
        let residual_norm = res.iter().map(|v| v.value_f64().powi(2)).sum::<f64>().sqrt();
        let residual_ok = res.iter().all(|v| v.near_zero(cfg.residual_tol));
        let nondeg_ok = if nondeg.is_exact() {
            !nondeg.near_zero(0.0)
        } else {
            abs_f64(&nondeg) >= nondeg_min
        };
        let det_ok = !det.near_zero(cfg.det_floor);
        let ratio_ok = if predicted.is_exact() {
            next_det.sub(&predicted).near_zero(0.0)
        } else {
            ratio_defect <= cfg.ratio_tol
        };
        rotations.push(RotationRecord {
            rotation: m,
            fixed_point: a,
            residual: res,
            residual_norm,
            nondeg_value: nondeg,
            det,
            multiplier,
            predicted_factor: factor,
            ratio_defect,
            residual_ok,
            nondeg_ok,
            det_ok,
            ratio_ok,
        });
    }
    let pass = rotations.iter().all(RotationRecord::pass);
    Ok(InvarianceReport {
        mu,
        power: k,
        exponent: e,
        rotations,
        pass,
    })
}

fn schwarzian_from<S: Scalar>(d1: &S, d2: &S, d3: &S, x: f64, floor: f64) -> Result<S, InvError> {
    if d1.near_zero(floor) {
        return Err(InvError::CriticalPoint { x, floor });
    }
    let r = d2.try_div(d1, floor)?;
    let three_halves = d1.constant(&(rational_from_i64(3) / rational_from_i64(2)));
    Ok(d3.try_div(d1, floor)?.sub(&three_halves.mul(&r.mul(&r))))
}

/// `Sf = f'''/f' - (3/2)(f''/f')²` of a single map.
pub fn schwarzian<S: Scalar>(expr: &Expr, x: &S, params: &[S], floor: f64) -> Result<S, InvError> {
    let jet = expr.eval_jet(x, params, 3, floor)?;
    schwarzian_from(&jet.derivative(1), &jet.derivative(2), &jet.derivative(3), x.value_f64(), floor)
}

/// Schwarzian of the composition `F_j^k`.
pub fn schwarzian_of_composition<S: Scalar>(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    x: &S,
    params: &[S],
) -> Result<S, InvError> {
    let jet = sys.composition_jet_plain(j, k, x, params, 3)?;
    schwarzian_from(
        &jet.derivative(1),
        &jet.derivative(2),
        &jet.derivative(3),
        x.value_f64(),
        sys.floor(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchwarzianCheck<S> {
    pub a: S,
    pub b: S,
    pub sf: S,
    pub sg: S,
    pub product: S,
    pub verdict: Verdict,
}

/// Sign test `Sf(a) · Sg(b) < 0` at an A_3 point of an alternating system,
/// with `a` in fiber 0 and `b = f_0(a)`.
pub fn schwarzian_product_check<S: Scalar>(
    sys: &PeriodicSystem,
    a: &S,
    params: &[S],
    zero_tol: f64,
) -> Result<SchwarzianCheck<S>, InvError> {
    if sys.period() != 2 {
        return Err(InvError::WrongArity { p: sys.period() });
    }
    let class = classify_singularity(sys, 0, 1, a, params, DEFAULT_MU_MAX)?;
    if class.class_mu != Some(3) {
        return Err(InvError::WrongClass { found: class.label() });
    }
    let b = sys.apply_map(0, a, params)?;
    let sf = schwarzian(sys.map(0), a, params, sys.floor())?;
    let sg = schwarzian(sys.map(1), &b, params, sys.floor())?;
    let product = sf.mul(&sg);
    let verdict = if sf.near_zero(zero_tol) || sg.near_zero(zero_tol) {
        Verdict::Inconclusive
    } else if product.value_f64() < 0.0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(SchwarzianCheck {
        a: a.clone(),
        b,
        sf,
        sg,
        product,
        verdict,
    })
}

/// Which exclusion proposition fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    /// One map strictly increasing, the other strictly decreasing.
    MonotonicityMix,
    /// Both strictly increasing and both convex or both concave.
    IncreasingSameConvexity,
    /// Both strictly decreasing with opposite convexity.
    DecreasingOppositeConvexity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExclusionResult {
    pub excluded: bool,
    pub fired: Option<Exclusion>,
    pub shapes: [MapShape; 2],
}

/// Signs of `f'` and `f''` that hold at every grid point (0 when mixed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapShape {
    pub slope_sign: i8,
    pub curvature_sign: i8,
}

fn uniform_sign(values: &[f64]) -> i8 {
    if values.iter().all(|v| *v > 0.0) {
        1
    } else if values.iter().all(|v| *v < 0.0) {
        -1
    } else {
        0
    }
}

/// Default grid per interval for [`a3_exclusion`].
pub const EXCLUSION_GRID: usize = 256;

/// Samples `f_x`, `f_xx` on each fiber interval and applies the three A_3
/// exclusion propositions. "possible" is not a proof of existence.
pub fn a3_exclusion(
    sys: &PeriodicSystem,
    params: &[f64],
    intervals: Option<[Interval; 2]>,
    grid_n: usize,
) -> Result<ExclusionResult, InvError> {
    if sys.period() != 2 {
        return Err(InvError::WrongArity { p: sys.period() });
    }
    let ivs = match intervals {
        Some(i) => i,
        None => {
            let f = sys.fibers().ok_or(InvError::MissingIntervals)?;
            [f[0], f[1]]
        }
    };
    let mut shapes = [MapShape {
        slope_sign: 0,
        curvature_sign: 0,
    }; 2];
    for (m, iv) in ivs.iter().enumerate() {
        let mut d1 = Vec::with_capacity(grid_n);
        let mut d2 = Vec::with_capacity(grid_n);
        for x in iv.samples(grid_n) {
            let jet = sys.map(m).eval_jet(&x, params, 2, sys.floor())?;
            d1.push(jet.derivative(1));
            d2.push(jet.derivative(2));
        }
        shapes[m] = MapShape {
            slope_sign: uniform_sign(&d1),
            curvature_sign: uniform_sign(&d2),
        };
    }
    let [f, g] = shapes;
    let fired = if f.slope_sign * g.slope_sign == -1 {
        Some(Exclusion::MonotonicityMix)
    } else if f.slope_sign == 1
        && g.slope_sign == 1
        && f.curvature_sign != 0
        && f.curvature_sign == g.curvature_sign
    {
        Some(Exclusion::IncreasingSameConvexity)
    } else if f.slope_sign == -1 && g.slope_sign == -1 && f.curvature_sign * g.curvature_sign == -1 {
        Some(Exclusion::DecreasingOppositeConvexity)
    } else {
        None
    };
    Ok(ExclusionResult {
        excluded: fired.is_some(),
        fired,
        shapes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactOrder {
    pub rotation: usize,
    pub center: f64,
    pub slope: f64,
    pub samples_used: usize,
}

/// Samples below this `|F(x) - x|` are dropped from the contact-order fit.
pub const CONTACT_FLOOR: f64 = 1e-14;

/// Least-squares slope of `log|F(x) - x|` against `log|x - a|` for
/// `n_samples` log-spaced distances in `[1e-5, 1e-2]` on each side of `a`.
pub fn contact_order_diagnostic(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    a: f64,
    params: &[f64],
    n_samples: usize,
) -> Result<ContactOrder, InvError> {
    let mut pts = Vec::with_capacity(2 * n_samples);
    for i in 0..n_samples {
        let t = if n_samples > 1 {
            i as f64 / (n_samples - 1) as f64
        } else {
            0.5
        };
        let d = 10f64.powf(-5.0 + 3.0 * t);
        for x in [a - d, a + d] {
            let fx = sys.composition_jet_plain(j, k, &x, params, 0)?;
            let v = (fx.value() - x).abs();
            if v >= CONTACT_FLOOR && v.is_finite() {
                pts.push((d.ln(), v.ln()));
            }
        }
    }
    let n = pts.len() as f64;
    let slope = if pts.len() < 2 {
        f64::NAN
    } else {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    Ok(ContactOrder {
        rotation: j,
        center: a,
        slope,
        samples_used: pts.len(),
    })
}

/// Contact order at every rotation of the orbit through `a` (fixed by `F_j^k`).
pub fn contact_order_all_rotations(
    sys: &PeriodicSystem,
    j: usize,
    k: usize,
    a: f64,
    params: &[f64],
    n_samples: usize,
    closure_tol: f64,
) -> Result<Vec<ContactOrder>, InvError> {
    let orbit = sys.fiber_points(j, k, &a, params, closure_tol)?;
    (0..sys.period())
        .map(|m| contact_order_diagnostic(sys, m, k, orbit.points[m], params, n_samples))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::numeric::Rational;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exponent_values() {
        assert_eq!(ratio_exponent(1), 1);
        assert_eq!(ratio_exponent(2), 1);
        assert_eq!(ratio_exponent(3), 0);
        assert_eq!(ratio_exponent(4), -2);
    }

    #[test]
    fn schwarzian_basics() {
        let f = parse("x^2 + l1", 3).unwrap();
        let s = schwarzian(&f, &q(27, 35), &[q(0, 1), q(0, 1), q(0, 1)], 0.0).unwrap();
        assert_eq!(s, q(-1225, 486));
        let t = parse("l3*tan(x)", 3).unwrap();
        for (x, l) in [(0.0793675, 1.00215), (0.4, -3.0), (-1.0, 0.2)] {
            let s = schwarzian(&t, &x, &[0.0, 0.0, l], 1e-12).unwrap();
            assert!((s - 2.0).abs() < 1e-12, "{s}");
        }
        assert!(matches!(
            schwarzian(&f, &q(0, 1), &[q(0, 1), q(0, 1), q(0, 1)], 0.0),
            Err(InvError::CriticalPoint { .. })
        ));
    }

    #[test]
    fn schwarzian_invariant_under_post_scaling() {
        let f = parse("exp(x) - x^3/5", 0).unwrap();
        let g = parse("-7/3*(exp(x) - x^3/5)", 0).unwrap();
        for x in [-0.5, 0.1, 0.9] {
            let a = schwarzian(&f, &x, &[], 1e-12).unwrap();
            let b = schwarzian(&g, &x, &[], 1e-12).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn exclusion_propositions() {
        let both_convex = PeriodicSystem::parse(&["exp(x) - 1", "exp(x) - 1"], 0).unwrap();
        let iv = [Interval::new(-0.5, 0.5), Interval::new(-0.5, 0.5)];
        let r = a3_exclusion(&both_convex, &[], Some(iv), EXCLUSION_GRID).unwrap();
        assert_eq!(r.fired, Some(Exclusion::IncreasingSameConvexity));
        let mix = PeriodicSystem::parse(&["x/2", "-x"], 0).unwrap();
        let r = a3_exclusion(&mix, &[], Some(iv), EXCLUSION_GRID).unwrap();
        assert_eq!(r.fired, Some(Exclusion::MonotonicityMix));
        let dec = PeriodicSystem::parse(&["-x - x^2", "-x + x^2"], 0).unwrap();
        let small = [Interval::new(-0.2, 0.2), Interval::new(-0.2, 0.2)];
        let r = a3_exclusion(&dec, &[], Some(small), EXCLUSION_GRID).unwrap();
        assert_eq!(r.fired, Some(Exclusion::DecreasingOppositeConvexity));
        let opposite = PeriodicSystem::parse(&["x + x^2", "x - x^2"], 0).unwrap();
        let r = a3_exclusion(&opposite, &[], Some(small), EXCLUSION_GRID).unwrap();
        assert!(!r.excluded);
        let single = PeriodicSystem::parse(&["x"], 0).unwrap();
        assert!(matches!(
            a3_exclusion(&single, &[], None, 8),
            Err(InvError::WrongArity { p: 1 })
        ));
        assert!(matches!(
            a3_exclusion(&opposite, &[], None, 8),
            Err(InvError::MissingIntervals)
        ));
    }

    #[test]
    fn contact_order_fold_and_hyperbolic() {
        let fold = PeriodicSystem::parse(&["x + x^2 + l1"], 1).unwrap();
        let c = contact_order_diagnostic(&fold, 0, 1, 0.0, &[0.0], 20).unwrap();
        assert!((c.slope - 2.0).abs() < 0.05, "{}", c.slope);
        let hyp = PeriodicSystem::parse(&["x/2"], 0).unwrap();
        let c = contact_order_diagnostic(&hyp, 0, 1, 0.0, &[], 20).unwrap();
        assert!((c.slope - 1.0).abs() < 0.05, "{}", c.slope);
    }

    #[test]
    fn verify_cusp_ratio_law() {
        // f0 = x + l1 + x^2/3 - x^3, f1 = 2x + l2 x^2: solve for a cusp, then
        // check J_{1} = f0_x(a) · J_{0}.
        let sys = PeriodicSystem::parse(&["x/2 + l1 + x^2/3 - x^3", "2*x + l2*x^2"], 2).unwrap();
        let cfg = crate::bifurcation::SolveConfig::default();
        let p = crate::bifurcation::solve(&sys, 0, 1, 2, &[0.1, 0.0, 0.1], &cfg).unwrap();
        let rep = verify(&sys, 0, 1, 2, &p.x_star, &p.lambda_star, &VerifyConfig::default()).unwrap();
        assert!(rep.pass, "{:#?}", rep);
        assert_eq!(rep.exponent, 1);
        let r0 = &rep.rotations[0];
        let r1 = &rep.rotations[1];
        assert!((r1.det - r0.multiplier * r0.det).abs() < 1e-9 * r1.det.abs());
    }
}
