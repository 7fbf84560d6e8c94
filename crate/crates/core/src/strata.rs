//! Fold/cusp strata of the bifurcation set near an A_μ point, and cobweb
//! plot data.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bifurcation::BifurcationPoint;
use crate::numeric::{rational_from_f64, Rational, Scalar};
use crate::system::{PeriodicSystem, SystemError};

#[derive(Debug, thiserror::Error)]
pub enum StrataError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("empty region or grid: {0}")]
    EmptyRegion(String),
    #[error("stratified tracing supports mu = 2 or 3, got {0}")]
    UnsupportedMu(usize),
    #[error("free parameter l{index} out of range 1..={mu}")]
    FreeParam { index: usize, mu: usize },
    #[error("cobweb needs at least one iteration")]
    NoIterations,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Fold,
    Cusp,
    Top,
}

impl Stratum {
    pub fn name(self) -> &'static str {
        match self {
            Stratum::Fold => "fold",
            Stratum::Cusp => "cusp",
            Stratum::Top => "top",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrataPoint {
    pub stratum: Stratum,
    pub x: f64,
    pub lambda: Vec<f64>,
    pub res_fp: f64,
    pub res_dx: f64,
    pub res_dxx: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// 0-based index of the parameter solved for on each fold slice;
    /// `None` picks the largest `|F_{λ_i}|` at the point.
    pub free_param: Option<usize>,
    /// Half-width of the x window seeded around `x*`.
    pub x_window: f64,
    pub x_seeds: usize,
    pub newton_tol: f64,
    pub accept_tol: f64,
    pub max_iter: usize,
    pub cluster_radius: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            free_param: None,
            x_window: 1.0,
            x_seeds: 24,
            newton_tol: 1e-13,
            accept_tol: 1e-10,
            max_iter: 40,
            cluster_radius: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrataCloud {
    pub rotation: usize,
    pub power: usize,
    pub mu: usize,
    /// 0-based index of the solved parameter.
    pub free_param: usize,
    pub region: Vec<[f64; 2]>,
    pub grid: usize,
    pub points: Vec<StrataPoint>,
    /// Newton runs that failed to converge (cells are skipped, not fatal).
    pub newton_failures: usize,
}

impl StrataCloud {
    pub fn csv_header(mu: usize) -> String {
        let mut h = String::from("stratum,x");
        for i in 1..=mu {
            let _ = write!(h, ",l{i}");
        }
        h.push_str(",res_fp,res_dx,res_dxx");
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::csv_header(self.mu);
        out.push('\n');
        for p in &self.points {
            let _ = write!(out, "{},{:?}", p.stratum.name(), p.x);
            for l in &p.lambda {
                let _ = write!(out, ",{l:?}");
            }
            let _ = writeln!(out, ",{:?},{:?},{:?}", p.res_fp, p.res_dx, p.res_dxx);
        }
        out
    }

    pub fn of(&self, s: Stratum) -> impl Iterator<Item = &StrataPoint> {
        self.points.iter().filter(move |p| p.stratum == s)
    }
}

struct Ctx<'a> {
    sys: &'a PeriodicSystem,
    j: usize,
    k: usize,
    opts: &'a TraceOptions,
}

impl Ctx<'_> {
    /// Newton on the first `1 + unknowns.len()` ladder equations in
    /// `(x, λ_unknowns)`, other parameters held at `base`.
    fn newton(&self, x0: f64, base: &[f64], unknowns: &[usize]) -> Option<(f64, Vec<f64>)> {
        let n = 1 + unknowns.len();
        let mut x = x0;
        let mut lam = base.to_vec();
        for _ in 0..self.opts.max_iter {
            let jet = self.sys.composition_jet(self.j, self.k, &x, &lam, n).ok()?;
            let d = jet.derivatives();
            let r: Vec<f64> = (0..n).map(|i| ladder(i, &d[i].value, x)).collect();
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() {
                return None;
            }
            if norm <= self.opts.newton_tol {
                return Some((x, lam));
            }
            let mut jac = DMatrix::zeros(n, n);
            for i in 0..n {
                jac[(i, 0)] = d[i + 1].value - if i == 0 { 1.0 } else { 0.0 };
                for (c, &u) in unknowns.iter().enumerate() {
                    jac[(i, c + 1)] = d[i].grad[u];
                }
            }
            let step = jac.lu().solve(&-DVector::from_vec(r))?;
            x += step[0];
            for (c, &u) in unknowns.iter().enumerate() {
                lam[u] += step[c + 1];
            }
            if step.norm() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        let r = self.residuals(x, &lam)?;
        let norm = r[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
        (norm <= self.opts.accept_tol).then_some((x, lam))
    }

    fn residuals(&self, x: f64, lam: &[f64]) -> Option<[f64; 3]> {
        let jet = self.sys.composition_jet_plain(self.j, self.k, &x, lam, 2).ok()?;
        let d = jet.derivatives();
        let r = [d[0] - x, d[1] - 1.0, d[2]];
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn point(&self, stratum: Stratum, x: f64, lam: Vec<f64>) -> Option<StrataPoint> {
        let [res_fp, res_dx, res_dxx] = self.residuals(x, &lam)?;
        Some(StrataPoint {
            stratum,
            x,
            lambda: lam,
            res_fp,
            res_dx,
            res_dxx,
        })
    }
}

fn ladder(i: usize, d: &f64, x: f64) -> f64 {
    match i {
        0 => d - x,
        1 => d - 1.0,
        _ => *d,
    }
}

fn dist(a: (f64, &[f64]), b: (f64, &[f64])) -> f64 {
    let mut s = (a.0 - b.0).powi(2);
    for (u, v) in a.1.iter().zip(b.1) {
        s += (u - v).powi(2);
    }
    s.sqrt()
}

fn push_unique(roots: &mut Vec<(f64, Vec<f64>)>, cand: (f64, Vec<f64>), radius: f64) {
    if !roots.iter().any(|r| dist((r.0, &r.1), (cand.0, &cand.1)) <= radius) {
        roots.push(cand);
    }
}

fn axis_values(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn inside(v: f64, r: [f64; 2]) -> bool {
    r[0] <= v && v <= r[1]
}

/// Fold and cusp strata of `F_j^k` over `region` (one `[lo, hi]` per
/// parameter), scanning a `grid`-per-axis lattice of the non-free
/// parameters. Rows run in parallel; output order is deterministic.
pub fn trace_strata(
    sys: &PeriodicSystem,
    point: &BifurcationPoint,
    region: &[[f64; 2]],
    grid: usize,
    opts: &TraceOptions,
) -> Result<StrataCloud, StrataError> {
    let mu = sys.mu();
    if !(mu == 2 || mu == 3) {
        return Err(StrataError::UnsupportedMu(mu));
    }
    if region.len() != mu {
        return Err(StrataError::EmptyRegion(format!("{} intervals for mu = {mu}", region.len())));
    }
    if grid == 0 {
        return Err(StrataError::EmptyRegion("grid must be at least 1".into()));
    }
    if let Some(i) = region.iter().position(|r| !(r[0] <= r[1])) {
        return Err(StrataError::EmptyRegion(format!("interval for l{} is empty", i + 1)));
    }
    let (j, k) = (point.rotation, point.power);
    let ctx = Ctx { sys, j, k, opts };
    let free = match opts.free_param {
        Some(f) if f < mu => f,
        Some(f) => return Err(StrataError::FreeParam { index: f + 1, mu }),
        None => {
            let jet = sys.composition_jet(j, k, &point.x_star, &point.lambda_star, 0)?;
            let g = &jet.value().grad;
            (0..mu)
                .max_by(|&a, &b| g[a].abs().total_cmp(&g[b].abs()).then(b.cmp(&a)))
                .unwrap()
        }
    };
    let others: Vec<usize> = (0..mu).filter(|&i| i != free).collect();
    let center = point.lambda_star[free];
    let seeds: Vec<f64> = axis_values(
        point.x_star - opts.x_window,
        point.x_star + opts.x_window,
        opts.x_seeds.max(1),
    );

    // Rows: the last non-free axis (or a single row for mu = 2); inner
    // sweep along others[0] with continuation from the previous node.
    let inner_axis = others[0];
    let row_axis = others.get(1).copied();
    let inner_vals = axis_values(region[inner_axis][0], region[inner_axis][1], grid);
    let row_vals = match row_axis {
        Some(r) => axis_values(region[r][0], region[r][1], grid),
        None => vec![f64::NAN],
    };

    let rows: Vec<(Vec<StrataPoint>, Vec<(f64, Vec<f64>)>, usize)> = row_vals
        .par_iter()
        .map(|&rv| {
            let mut folds = Vec::new();
            let mut cusps: Vec<(f64, Vec<f64>)> = Vec::new();
            let mut failures = 0;
            let mut prev: Vec<(f64, Vec<f64>)> = Vec::new();
            for &iv in &inner_vals {
                let mut base = point.lambda_star.clone();
                base[inner_axis] = iv;
                if let Some(r) = row_axis {
                    base[r] = rv;
                }
                let mut roots: Vec<(f64, Vec<f64>)> = Vec::new();
                let mut starts: Vec<(f64, f64)> = prev.iter().map(|(x, l)| (*x, l[free])).collect();
                starts.extend(seeds.iter().map(|&x| (x, center)));
                for (x0, lf) in starts {
                    let mut b = base.clone();
                    b[free] = lf;
                    match ctx.newton(x0, &b, &[free]) {
                        Some((x, lam)) if inside(lam[free], region[free]) => {
                            push_unique(&mut roots, (x, lam), opts.cluster_radius)
                        }
                        Some(_) => {}
                        None => failures += 1,
                    }
                }
                roots.sort_by(|a, b| a.0.total_cmp(&b.0));
                for (x, lam) in &roots {
                    if let Some(c) = ctx.newton(*x, lam, &[free, inner_axis]) {
                        if inside(c.1[free], region[free]) && inside(c.1[inner_axis], region[inner_axis]) {
                            push_unique(&mut cusps, c, opts.cluster_radius);
                        }
                    }
                }
                folds.extend(
                    roots
                        .iter()
                        .filter_map(|(x, lam)| ctx.point(Stratum::Fold, *x, lam.clone())),
                );
                prev = roots;
            }
            (folds, cusps, failures)
        })
        .collect();

    let mut points = Vec::new();
    let mut cusps: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut newton_failures = 0;
    for (f, c, n) in rows {
        points.extend(f);
        for cand in c {
            push_unique(&mut cusps, cand, opts.cluster_radius);
        }
        newton_failures += n;
    }
    points.extend(cusps.into_iter().filter_map(|(x, lam)| ctx.point(Stratum::Cusp, x, lam)));
    if point.lambda_star.iter().zip(region).all(|(v, r)| inside(*v, *r)) {
        if let Some(t) = ctx.point(Stratum::Top, point.x_star, point.lambda_star.clone()) {
            points.push(t);
        }
    }
    Ok(StrataCloud {
        rotation: j,
        power: k,
        mu,
        free_param: free,
        region: region.to_vec(),
        grid,
        points,
        newton_failures,
    })
}

/// Symmetric Hausdorff distance between two point sets in R^n.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    directed(a, b).max(directed(b, a))
}

fn directed(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    // b sorted by first coordinate lets each query stop early.
    let mut sorted: Vec<&Vec<f64>> = b.iter().collect();
    sorted.sort_by(|u, v| u[0].total_cmp(&v[0]));
    let firsts: Vec<f64> = sorted.iter().map(|v| v[0]).collect();
    let d2 = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(s, t)| (s - t).powi(2)).sum::<f64>();
    a.par_iter()
        .map(|p| {
            let start = firsts.partition_point(|&f| f < p[0]);
            let mut best = f64::INFINITY;
            for v in &sorted[start..] {
                if (v[0] - p[0]).powi(2) > best {
                    break;
                }
                best = best.min(d2(p, v));
            }
            for v in sorted[..start].iter().rev() {
                if (v[0] - p[0]).powi(2) > best {
                    break;
                }
                best = best.min(d2(p, v));
            }
            best.sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

/// Λ-projection of the fold and cusp points.
pub fn lambda_projection(cloud: &StrataCloud) -> Vec<Vec<f64>> {
    cloud
        .points
        .iter()
        .filter(|p| p.stratum != Stratum::Top)
        .map(|p| p.lambda.clone())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment<S> {
    pub kind: String,
    pub x0: S,
    pub y0: S,
    pub x1: S,
    pub y1: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cobweb<S> {
    pub orbit: Vec<S>,
    pub segments: Vec<Segment<S>>,
}

impl<S: Scalar> Cobweb<S> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,x0,y0,x1,y1\n");
        for s in &self.segments {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.kind,
                s.x0.render(),
                s.y0.render(),
                s.x1.render(),
                s.y1.render()
            );
        }
        out
    }
}

/// Cobweb of `n` iterations from `x0` (fiber 0): vertical and horizontal
/// orbit segments, each `f_j` sampled as a polyline of `graph_samples`
/// points on its fiber (or on the padded orbit range), and the diagonal.
pub fn cobweb_data<S: Scalar>(
    sys: &PeriodicSystem,
    x0: &S,
    params: &[S],
    n: usize,
    graph_samples: usize,
) -> Result<Cobweb<S>, StrataError> {
    if n == 0 {
        return Err(StrataError::NoIterations);
    }
    let rec = sys.orbit(x0, params, n)?;
    let orbit: Vec<S> = rec.points.iter().map(|p| p.x.clone()).collect();
    let mut segments = Vec::new();
    for w in orbit.windows(2) {
        segments.push(Segment {
            kind: "vertical".into(),
            x0: w[0].clone(),
            y0: w[0].clone(),
            x1: w[0].clone(),
            y1: w[1].clone(),
        });
        segments.push(Segment {
            kind: "horizontal".into(),
            x0: w[0].clone(),
            y0: w[1].clone(),
            x1: w[1].clone(),
            y1: w[1].clone(),
        });
    }
    let vals: Vec<f64> = orbit.iter().map(Scalar::value_f64).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.25 * (hi - lo).max(1e-3);
    let default_range = [lo - pad, hi + pad];
    // Plot ranges snap outward to a 1/1024 grid so exact runs get short rationals.
    let snap = |v: f64, up: bool| {
        let t = v * 1024.0;
        let t = if up { t.ceil() } else { t.floor() };
        x0.constant(&(rational_from_f64(t).unwrap_or_default() / Rational::from_integer(1024.into())))
    };
    let mut overall = default_range;
    for m in 0..sys.period() {
        let range = sys
            .fibers()
            .map(|f| [f[m].lo, f[m].hi])
            .unwrap_or(default_range);
        overall = [overall[0].min(range[0]), overall[1].max(range[1])];
        let (a, b) = (snap(range[0], false), snap(range[1], true));
        let steps = graph_samples.max(2) - 1;
        let width = b.sub(&a);
        let xs: Vec<S> = (0..=steps)
            .map(|i| a.add(&width.scale(&Rational::new(i.into(), steps.into()))))
            .collect();
        let ys = xs
            .iter()
            .map(|x| sys.apply_map(m, x, params))
            .collect::<Result<Vec<S>, _>>()?;
        for i in 1..xs.len() {
            segments.push(Segment {
                kind: format!("graph{m}"),
                x0: xs[i - 1].clone(),
                y0: ys[i - 1].clone(),
                x1: xs[i].clone(),
                y1: ys[i].clone(),
            });
        }
    }
    let (a, b) = (snap(overall[0], false), snap(overall[1], true));
    segments.push(Segment {
        kind: "diagonal".into(),
        x0: a.clone(),
        y0: a,
        x1: b.clone(),
        y1: b,
    });
    Ok(Cobweb { orbit, segments })
}
