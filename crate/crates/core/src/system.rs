//! p-periodic map families: rotations, cyclic compositions, orbits and
//! hyperbolicity of periodic points.

use serde::{Deserialize, Serialize};

use crate::expr::{self, Expr, ExprError};
use crate::numeric::{Grad, Jet, NumericError, Scalar, DEFAULT_FLOOR};

/// Closed interval `[lo, hi]`, serialized as a two-element array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `n` evenly spaced points including both ends (the midpoint when `n == 1`).
    pub fn samples(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.5 * (self.lo + self.hi)],
            _ => (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval { lo: v[0], hi: v[1] }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SystemError {
    #[error("a periodic system needs at least one map")]
    Empty,
    #[error("map f{map}: {source}")]
    Parse {
        map: usize,
        #[source]
        source: ExprError,
    },
    #[error("map f{map} uses l{index} but the system has mu = {mu}")]
    ParamIndex { map: usize, index: usize, mu: usize },
    #[error("{found} fiber intervals given for {expected} maps")]
    FiberCount { expected: usize, found: usize },
    #[error("fiber I{fiber} = [{lo}, {hi}] is empty")]
    BadInterval { fiber: usize, lo: f64, hi: f64 },
    #[error("index {index} out of range for period {p}")]
    IndexOutOfRange { index: usize, p: usize },
    #[error("power k must be at least 1")]
    ZeroPower,
    #[error("{found} parameter values given, system has mu = {mu}")]
    ParamCount { mu: usize, found: usize },
    #[error("map f{map} at orbit step {step}: {source}")]
    Eval {
        map: usize,
        step: usize,
        #[source]
        source: NumericError,
    },
    #[error("orbit does not close: |F(x) - x| = {defect} exceeds {tol}")]
    ClosureDefectExceeded { defect: String, tol: f64 },
    #[error("not a fixed point: |F(x) - x| = {defect} exceeds {tol}")]
    NotAFixedPoint { defect: String, tol: f64 },
    #[error("invalid system JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// On-disk form: `{ "maps": [...], "mu": n, "fibers": [[lo, hi], ...] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemFile {
    pub maps: Vec<String>,
    pub mu: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibers: Option<Vec<Interval>>,
}

/// Ordered maps `f_0, ..., f_{p-1}` sharing the parameter vector `l1..lμ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSystem {
    maps: Vec<Expr>,
    mu: usize,
    fibers: Option<Vec<Interval>>,
    floor: f64,
}

impl PeriodicSystem {
    pub fn new(maps: Vec<Expr>, mu: usize, fibers: Option<Vec<Interval>>) -> Result<Self, SystemError> {
        if maps.is_empty() {
            return Err(SystemError::Empty);
        }
        for (i, m) in maps.iter().enumerate() {
            let index = m.max_param();
            if index > mu {
                return Err(SystemError::ParamIndex { map: i, index, mu });
            }
        }
        if let Some(f) = &fibers {
            if f.len() != maps.len() {
                return Err(SystemError::FiberCount {
                    expected: maps.len(),
                    found: f.len(),
                });
            }
            for (i, iv) in f.iter().enumerate() {
                if !(iv.lo <= iv.hi) {
                    return Err(SystemError::BadInterval {
                        fiber: i,
                        lo: iv.lo,
                        hi: iv.hi,
                    });
                }
            }
        }
        Ok(PeriodicSystem {
            maps,
            mu,
            fibers,
            floor: DEFAULT_FLOOR,
        })
    }

    pub fn parse<T: AsRef<str>>(maps: &[T], mu: usize) -> Result<Self, SystemError> {
        let exprs = maps
            .iter()
            .enumerate()
            .map(|(i, s)| expr::parse(s.as_ref(), mu).map_err(|source| SystemError::Parse { map: i, source }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(exprs, mu, None)
    }

    pub fn from_file(file: &SystemFile) -> Result<Self, SystemError> {
        let sys = Self::parse(&file.maps, file.mu)?;
        Self::new(sys.maps, file.mu, file.fibers.clone())
    }

    pub fn from_json(text: &str) -> Result<Self, SystemError> {
        let file: SystemFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> SystemFile {
        SystemFile {
            maps: self.maps.iter().map(|m| m.to_string()).collect(),
            mu: self.mu,
            fibers: self.fibers.clone(),
        }
    }

    /// Floor used for divisions and `tan` poles in float evaluation.
    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn period(&self) -> usize {
        self.maps.len()
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn maps(&self) -> &[Expr] {
        &self.maps
    }

    pub fn map(&self, i: usize) -> &Expr {
        &self.maps[i % self.maps.len()]
    }

    pub fn fibers(&self) -> Option<&[Interval]> {
        self.fibers.as_deref()
    }

    pub fn has_transcendental(&self) -> bool {
        self.maps.iter().any(Expr::has_transcendental)
    }

    /// The system whose base composition is `F_m`: map `i` becomes `f_{i+m}`.
    pub fn rotate(&self, m: usize) -> Result<PeriodicSystem, SystemError> {
        let p = self.period();
        if m >= p {
            return Err(SystemError::IndexOutOfRange { index: m, p });
        }
        Ok(PeriodicSystem {
            maps: rotated(&self.maps, m),
            mu: self.mu,
            fibers: self.fibers.as_ref().map(|f| rotated(f, m)),
            floor: self.floor,
        })
    }

    fn check_indices(&self, j: usize, k: usize, n_params: usize) -> Result<(), SystemError> {
        if j >= self.period() {
            return Err(SystemError::IndexOutOfRange {
                index: j,
                p: self.period(),
            });
        }
        if k == 0 {
            return Err(SystemError::ZeroPower);
        }
        if n_params != self.mu {
            return Err(SystemError::ParamCount {
                mu: self.mu,
                found: n_params,
            });
        }
        Ok(())
    }

    /// Chains `steps` map jets starting at fiber `j`. Works over any scalar,
    /// including gradients whose leading value depends on the parameters.
    fn chain<T: Scalar>(
        &self,
        j: usize,
        steps: usize,
        start: Jet<T>,
        params: &[T],
        order: usize,
    ) -> Result<Jet<T>, SystemError> {
        let p_jets: Vec<Jet<T>> = params.iter().map(|v| Jet::constant_at(v.clone(), order)).collect();
        let mut acc = start;
        for step in 0..steps {
            let idx = (j + step) % self.period();
            let point = acc.value().clone();
            let x = Jet::variable_at(point.clone(), order);
            let outer = self.maps[idx]
                .eval(&x, &p_jets, self.floor)
                .and_then(|f| f.compose(&point, &acc, 0.0))
                .map_err(|source| SystemError::Eval { map: idx, step, source })?;
            acc = outer;
        }
        Ok(acc)
    }

    /// Jet of `F_j^k` at `x0`; each coefficient also carries its gradient in Λ.
    pub fn composition_jet<S: Scalar>(
        &self,
        j: usize,
        k: usize,
        x0: &S,
        params: &[S],
        order: usize,
    ) -> Result<Jet<Grad<S>>, SystemError> {
        self.check_indices(j, k, params.len())?;
        let dim = self.mu;
        let start = Jet::variable_at(Grad::constant_of(x0.clone(), dim), order);
        let gp: Vec<Grad<S>> = params
            .iter()
            .enumerate()
            .map(|(i, v)| Grad::variable(v.clone(), i, dim))
            .collect();
        self.chain(j, k * self.period(), start, &gp, order)
    }

    /// Jet of `F_j^k` at `x0` without parameter gradients.
    pub fn composition_jet_plain<S: Scalar>(
        &self,
        j: usize,
        k: usize,
        x0: &S,
        params: &[S],
        order: usize,
    ) -> Result<Jet<S>, SystemError> {
        self.check_indices(j, k, params.len())?;
        let start = Jet::variable_at(x0.clone(), order);
        self.chain(j, k * self.period(), start, params, order)
    }

    /// Applies `f_{fiber}` once.
    pub fn apply_map<S: Scalar>(&self, fiber: usize, x: &S, params: &[S]) -> Result<S, SystemError> {
        let idx = fiber % self.period();
        self.maps[idx]
            .eval(x, params, self.floor)
            .map_err(|source| SystemError::Eval { map: idx, step: 0, source })
    }

    /// Orbit of `x` under `k·p` maps starting in fiber `j`. Returns the
    /// first-visit point of every fiber (indexed by fiber) and the closure
    /// defect `|F_j^k(x) - x|`, which must not exceed `tol` (exact zero for
    /// rational scalars).
    pub fn fiber_points<S: Scalar>(
        &self,
        j: usize,
        k: usize,
        x: &S,
        params: &[S],
        tol: f64,
    ) -> Result<FiberPoints<S>, SystemError> {
        self.check_indices(j, k, params.len())?;
        let p = self.period();
        let mut points: Vec<Option<S>> = vec![None; p];
        let mut cur = x.clone();
        for step in 0..k * p {
            let fiber = (j + step) % p;
            if points[fiber].is_none() {
                points[fiber] = Some(cur.clone());
            }
            cur = self.maps[fiber]
                .eval(&cur, params, self.floor)
                .map_err(|source| SystemError::Eval { map: fiber, step, source })?;
        }
        let diff = cur.sub(x);
        let defect = diff.value_f64().abs();
        if !diff.near_zero(tol) {
            return Err(SystemError::ClosureDefectExceeded {
                defect: abs_render(&diff),
                tol,
            });
        }
        Ok(FiberPoints {
            points: points.into_iter().map(Option::unwrap).collect(),
            defect,
        })
    }

    /// `n + 1` points starting from fiber 0.
    pub fn orbit<S: Scalar>(&self, x0: &S, params: &[S], n: usize) -> Result<OrbitRecord<S>, SystemError> {
        self.orbit_from(0, x0, params, n)
    }

    pub fn orbit_from<S: Scalar>(
        &self,
        start_fiber: usize,
        x0: &S,
        params: &[S],
        n: usize,
    ) -> Result<OrbitRecord<S>, SystemError> {
        self.check_indices(start_fiber, 1, params.len())?;
        let p = self.period();
        let mut points = Vec::with_capacity(n + 1);
        let mut warnings = Vec::new();
        let mut cur = x0.clone();
        for step in 0..=n {
            let fiber = (start_fiber + step) % p;
            if let Some(f) = &self.fibers {
                let v = cur.value_f64();
                if !f[fiber].contains(v) {
                    warnings.push(FiberEscape { step, fiber, x: v });
                }
            }
            points.push(OrbitPoint {
                step,
                fiber,
                x: cur.clone(),
            });
            if step < n {
                cur = self.maps[fiber]
                    .eval(&cur, params, self.floor)
                    .map_err(|source| SystemError::Eval { map: fiber, step, source })?;
            }
        }
        Ok(OrbitRecord {
            points,
            params: params.to_vec(),
            warnings,
        })
    }

    /// Attractor/repeller/non-hyperbolic by the multiplier of `F_j^k` at `x`.
    pub fn classify_hyperbolicity<S: Scalar>(
        &self,
        j: usize,
        k: usize,
        x: &S,
        params: &[S],
        delta: f64,
        fixed_tol: f64,
    ) -> Result<Hyperbolicity, SystemError> {
        let jet = self.composition_jet_plain(j, k, x, params, 1)?;
        let diff = jet.value().sub(x);
        if !diff.near_zero(fixed_tol) {
            return Err(SystemError::NotAFixedPoint {
                defect: abs_render(&diff),
                tol: fixed_tol,
            });
        }
        let m = jet.coeff(1).value_f64().abs();
        Ok(if m < 1.0 - delta {
            Hyperbolicity::Attractor
        } else if m > 1.0 + delta {
            Hyperbolicity::Repeller
        } else {
            Hyperbolicity::NonHyperbolic
        })
    }

    /// Sampled check of `f_j(I_j) ⊆ I_{j+1}`. Empty when no fibers are set.
    pub fn check_fibers(&self, params: &[f64], samples: usize) -> Result<Vec<FiberViolation>, SystemError> {
        let Some(fibers) = &self.fibers else {
            return Ok(Vec::new());
        };
        self.check_indices(0, 1, params.len())?;
        let p = self.period();
        let mut out = Vec::new();
        for (j, iv) in fibers.iter().enumerate() {
            let target = fibers[(j + 1) % p];
            for x in iv.samples(samples) {
                let y = self.maps[j]
                    .eval(&x, params, self.floor)
                    .map_err(|source| SystemError::Eval { map: j, step: 0, source })?;
                if !target.contains(y) {
                    out.push(FiberViolation { map: j, x, y, target });
                }
            }
        }
        Ok(out)
    }
}

fn rotated<T: Clone>(v: &[T], m: usize) -> Vec<T> {
    v[m..].iter().chain(&v[..m]).cloned().collect()
}

fn abs_render<S: Scalar>(d: &S) -> String {
    if d.value_f64() < 0.0 {
        d.neg().render()
    } else {
        d.render()
    }
}

/// Default number of samples per fiber for containment checks.
pub const FIBER_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct FiberPoints<S> {
    /// `points[m]` is the point visited in fiber `m`.
    pub points: Vec<S>,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPoint<S> {
    pub step: usize,
    pub fiber: usize,
    pub x: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberEscape {
    pub step: usize,
    pub fiber: usize,
    pub x: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord<S> {
    pub points: Vec<OrbitPoint<S>>,
    pub params: Vec<S>,
    pub warnings: Vec<FiberEscape>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hyperbolicity {
    Attractor,
    Repeller,
    NonHyperbolic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberViolation {
    pub map: usize,
    pub x: f64,
    pub y: f64,
    pub target: Interval,
}
