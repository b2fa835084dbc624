//! Tensor-product Gauss-Legendre quadrature over coordinate boxes.
//!
//! Node evaluation runs on a rayon pool; results are collected in a fixed
//! node order and reduced by pairwise summation, so the value does not depend
//! on the number of workers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::CoordBox;

pub const WORKERS_ENV: &str = "WCS_WORKERS";
pub const MAX_DIM: usize = 6;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("integrand failed at {coords:?}: {source}")]
    Evaluation {
        coords: Vec<f64>,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

/// Standard Gauss-Legendre rule on `(−1, 1)`.
#[derive(Debug)]
struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn legendre_rule(n: usize) -> Rule {
    if n == 1 {
        return Rule { nodes: vec![0.0], weights: vec![2.0] };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn cached_rule(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(n).or_insert_with(|| Arc::new(legendre_rule(n))).clone()
}

/// Gauss-Legendre nodes and weights on `(lo, hi)`, nodes increasing.
pub fn gauss_nodes(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && lo < hi, "gauss_nodes needs n >= 1 and lo < hi");
    let rule = cached_rule(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let nodes = rule.nodes.iter().map(|t| mid + half * t).collect();
    let weights = rule.weights.iter().map(|w| half * w).collect();
    (nodes, weights)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Base node count per axis (ignored on masked axes).
    pub nodes: Vec<usize>,
    pub refinement_factor: usize,
    /// Refinement levels beyond the first comparison.
    pub max_refinements: usize,
    pub rel_tol: f64,
    /// Absolute tolerance; lets integrals that vanish up to roundoff converge.
    pub abs_tol: f64,
    /// Axes along which the integrand is constant; they contribute their extent.
    pub mask: Vec<bool>,
    /// Worker count; `None` falls back to `WCS_WORKERS`, then the rayon default.
    pub workers: Option<usize>,
}

impl QuadratureSpec {
    pub fn uniform(dim: usize, nodes: usize) -> Self {
        QuadratureSpec {
            nodes: vec![nodes; dim],
            refinement_factor: 2,
            max_refinements: 2,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            mask: vec![false; dim],
            workers: None,
        }
    }

    pub fn with_mask(mut self, axes: &[usize]) -> Self {
        for &a in axes {
            if a < self.mask.len() {
                self.mask[a] = true;
            }
        }
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    fn validate(&self, dim: usize) -> Result<(), QuadratureError> {
        let bad = |m: String| Err(QuadratureError::InvalidSpec(m));
        if dim == 0 || dim > MAX_DIM {
            return bad(format!("dimension {dim} outside 1..={MAX_DIM}"));
        }
        if self.nodes.len() != dim || self.mask.len() != dim {
            return bad(format!(
                "{} node counts and {} mask flags for a {dim}-dimensional box",
                self.nodes.len(),
                self.mask.len()
            ));
        }
        if self.refinement_factor < 2 {
            return bad("refinement factor must be at least 2".into());
        }
        if let Some((axis, n)) = self
            .nodes
            .iter()
            .enumerate()
            .find(|(i, n)| !self.mask[*i] && **n < 2)
        {
            return bad(format!("axis {axis} has {n} nodes; need at least 2"));
        }
        if !(self.rel_tol > 0.0) {
            return bad(format!("relative tolerance {} must be positive", self.rel_tol));
        }
        if !(self.abs_tol >= 0.0) {
            return bad(format!("absolute tolerance {} must be non-negative", self.abs_tol));
        }
        if self.workers == Some(0) {
            return bad("worker count must be positive".into());
        }
        Ok(())
    }

    pub fn worker_count(&self) -> Option<usize> {
        self.workers.or_else(|| {
            std::env::var(WORKERS_ENV)
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .filter(|&n: &usize| n > 0)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    /// Value at the finest level evaluated.
    pub value: f64,
    /// `|value(finest) − value(previous level)|`.
    pub error_estimate: f64,
    pub converged: bool,
    /// Node counts at the base level (1 on masked axes).
    pub node_counts: Vec<usize>,
    /// Node counts at the finest level.
    pub final_node_counts: Vec<usize>,
    /// Value at each level, coarsest first.
    pub levels: Vec<f64>,
}

/// Pairwise (cascade) summation in the given order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

fn tensor_rule(bx: &CoordBox, counts: &[usize], mask: &[bool]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, f64) {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut masked_extent = 1.0;
    for (i, axis) in bx.axes.iter().enumerate() {
        if mask[i] {
            nodes.push(vec![0.5 * (axis.lo + axis.hi)]);
            weights.push(vec![1.0]);
            masked_extent *= axis.extent();
        } else {
            let (x, w) = gauss_nodes(counts[i], axis.lo, axis.hi);
            nodes.push(x);
            weights.push(w);
        }
    }
    (nodes, weights, masked_extent)
}

fn evaluate_level<F, E>(
    f: &F,
    bx: &CoordBox,
    counts: &[usize],
    mask: &[bool],
) -> Result<f64, QuadratureError>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: std::error::Error + Send + Sync + 'static,
{
    let (nodes, weights, extent) = tensor_rule(bx, counts, mask);
    let sizes: Vec<usize> = nodes.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let point = |flat: usize| -> (Vec<f64>, f64) {
        let mut rem = flat;
        let mut x = vec![0.0; sizes.len()];
        let mut w = 1.0;
        for axis in (0..sizes.len()).rev() {
            let i = rem % sizes[axis];
            rem /= sizes[axis];
            x[axis] = nodes[axis][i];
            w *= weights[axis][i];
        }
        (x, w)
    };
    let terms: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let (x, w) = point(flat);
            f(&x)
                .map(|v| w * v)
                .map_err(|e| QuadratureError::Evaluation { coords: x, source: Box::new(e) })
        })
        .collect::<Result<_, _>>()?;
    Ok(extent * pairwise_sum(&terms))
}

/// Integrates `f` over `bx`, refining until two successive levels agree to
/// `rel_tol` or `max_refinements` is exhausted.
pub fn integrate_box<F, E>(
    f: F,
    bx: &CoordBox,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync + Send,
    E: std::error::Error + Send + Sync + 'static,
{
    spec.validate(bx.dim())?;
    let run = || -> Result<QuadratureResult, QuadratureError> {
        let counts_at = |level: u32| -> Vec<usize> {
            let factor = spec.refinement_factor.pow(level);
            spec.nodes
                .iter()
                .zip(&spec.mask)
                .map(|(&n, &m)| if m { 1 } else { n * factor })
                .collect()
        };
        let mut levels = vec![evaluate_level(&f, bx, &counts_at(0), &spec.mask)?];
        let mut level = 0;
        loop {
            level += 1;
            let v = evaluate_level(&f, bx, &counts_at(level), &spec.mask)?;
            let prev = *levels.last().expect("at least one level");
            levels.push(v);
            let err = (v - prev).abs();
            // a few ulps of the value are below anything we can resolve
            let floor = 4.0 * f64::EPSILON * v.abs().max(prev.abs());
            let converged = err <= spec.rel_tol * v.abs() || err <= spec.abs_tol || err <= floor;
            if converged || level as usize > spec.max_refinements {
                return Ok(QuadratureResult {
                    value: v,
                    error_estimate: err,
                    converged,
                    node_counts: counts_at(0),
                    final_node_counts: counts_at(level),
                    levels,
                });
            }
        }
    };
    match spec.worker_count() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| QuadratureError::Pool(e.to_string()))?
            .install(run),
        None => run(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Axis;
    use std::convert::Infallible;
    use std::f64::consts::PI;

    fn ok(v: f64) -> Result<f64, Infallible> {
        Ok(v)
    }

    #[test]
    fn small_rules() {
        let (x, w) = gauss_nodes(1, -1.0, 1.0);
        assert_eq!((x[0], w[0]), (0.0, 2.0));
        let (x, w) = gauss_nodes(2, -1.0, 1.0);
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_nodes(5, 0.5, 3.0);
        assert!((w.iter().sum::<f64>() - 2.5).abs() < 1e-14);
        assert!(x.iter().all(|&t| t > 0.5 && t < 3.0));
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn exact_on_cubics() {
        let bx = CoordBox::new(vec![Axis::open("x", 0.0, 1.0)]);
        let mut spec = QuadratureSpec::uniform(1, 2);
        spec.max_refinements = 0;
        let r = integrate_box(|x: &[f64]| ok(x[0].powi(3)), &bx, &spec).unwrap();
        assert!((r.value - 0.25).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn trigonometric_products() {
        let bx = CoordBox::new(vec![Axis::open("t", 0.0, PI)]);
        // the 8-node rule misses by 3.79e-8 (independent evaluation); 12 nodes reach 1e-10
        let spec = QuadratureSpec::uniform(1, 8);
        let r = integrate_box(|x: &[f64]| ok(x[0].sin().powi(3)), &bx, &spec).unwrap();
        let err8 = (r.levels[0] - 4.0 / 3.0).abs();
        assert!((err8 - 3.79e-8).abs() < 1e-10, "{err8}");
        let spec = QuadratureSpec::uniform(1, 12);
        let r = integrate_box(|x: &[f64]| ok(x[0].sin().powi(3)), &bx, &spec).unwrap();
        assert!((r.levels[0] - 4.0 / 3.0).abs() < 1e-10);

        let bx = CoordBox::new(vec![Axis::periodic("p", 0.0, 2.0 * PI), Axis::open("t", 0.0, PI)]);
        let spec = QuadratureSpec::uniform(2, 16);
        let r = integrate_box(|x: &[f64]| ok(x[0].sin().powi(2) * x[1].sin().powi(3)), &bx, &spec).unwrap();
        assert!((r.value - PI * 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn masked_axes_contribute_extent() {
        let bx = CoordBox::new(vec![Axis::periodic("p", 0.0, 2.0 * PI), Axis::open("t", 0.0, 2.0)]);
        let spec = QuadratureSpec::uniform(2, 4).with_mask(&[0]);
        let r = integrate_box(|x: &[f64]| ok(x[1]), &bx, &spec).unwrap();
        assert!((r.value - 4.0 * PI).abs() < 1e-13);
        assert_eq!(r.node_counts, vec![1, 4]);
    }

    #[test]
    fn invalid_specs() {
        let bx = CoordBox::new(vec![Axis::open("x", 0.0, 1.0)]);
        let spec = QuadratureSpec::uniform(1, 1);
        assert!(matches!(
            integrate_box(|_: &[f64]| ok(1.0), &bx, &spec),
            Err(QuadratureError::InvalidSpec(_))
        ));
        let spec = QuadratureSpec::uniform(2, 4);
        assert!(integrate_box(|_: &[f64]| ok(1.0), &bx, &spec).is_err());
    }

    #[test]
    fn pairwise_matches_naive_on_exact_values() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499500.0);
    }
}
