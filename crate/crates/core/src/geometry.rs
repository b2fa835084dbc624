//! Local Riemannian geometry in a single dense chart.
//!
//! A [`MetricField`] hands back its components as [`Jet2`] values, so one
//! evaluation yields `g`, `∂g` and `∂∂g` at a point. From those we build the
//! Levi-Civita Christoffel symbols, their derivatives, and the Riemann tensor
//! in the index convention
//!
//! ```text
//! R(X, Y) Z = R_{jbc}^a X^j Y^b Z^c ∂_a
//! R_{jbc}^a = ∂_j Γ^a_{bc} − ∂_b Γ^a_{jc} + Γ^a_{je} Γ^e_{bc} − Γ^a_{be} Γ^e_{jc}
//! ```
//!
//! with Ricci `Ric_{bc} = R_{abc}^a`, which is positive on round spheres.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jets::{Jet2, JetError};

/// Largest tolerated 1-norm condition number of the unit-diagonal rescaling of
/// `g` before a point is treated as sitting on a chart degeneracy.
pub const MAX_CONDITION: f64 = 1e12;

/// Pass threshold for the curvature identity residuals.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Pass threshold for `Ric = λ g`.
pub const EINSTEIN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point {coords:?} lies outside the open coordinate box of {metric}")]
    OutsideDomain { metric: String, coords: Vec<f64> },
    #[error("metric degenerate at {coords:?}: {reason}")]
    Degenerate { coords: Vec<f64>, reason: String },
    #[error("metric matrix singular at {coords:?} (condition number {condition:e})")]
    Singular { coords: Vec<f64>, condition: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("jet arithmetic failed at {coords:?}: {source}")]
    Jet { coords: Vec<f64>, source: JetError },
}

/// One coordinate axis of an open box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
    /// A polar angle: the chart collapses a circle at both ends, as the
    /// colatitude of a sphere does. Coordinate curvature loses precision
    /// like `ε/t³` at distance `t` from such an end.
    #[serde(default)]
    pub polar: bool,
}

impl Axis {
    pub fn open(name: &str, lo: f64, hi: f64) -> Self {
        Axis {
            name: name.to_string(),
            lo,
            hi,
            periodic: false,
            polar: false,
        }
    }

    /// An open polar-angle axis (see [`Axis::polar`](struct.Axis.html#structfield.polar)).
    pub fn polar(name: &str, lo: f64, hi: f64) -> Self {
        Axis {
            polar: true,
            ..Axis::open(name, lo, hi)
        }
    }

    pub fn periodic(name: &str, lo: f64, hi: f64) -> Self {
        Axis {
            name: name.to_string(),
            lo,
            hi,
            periodic: true,
            polar: false,
        }
    }

    pub fn extent(&self) -> f64 {
        self.hi - self.lo
    }

    /// Wraps a coordinate on a periodic axis back into `[lo, hi)`.
    pub fn wrap(&self, x: f64) -> f64 {
        if self.periodic {
            self.lo + (x - self.lo).rem_euclid(self.extent())
        } else {
            x
        }
    }
}

/// Product of open intervals; the domain of a chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordBox {
    pub axes: Vec<Axis>,
}

impl CoordBox {
    pub fn new(axes: Vec<Axis>) -> Self {
        CoordBox { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim()
            && self
                .axes
                .iter()
                .zip(coords)
                .all(|(ax, &x)| x > ax.lo && x < ax.hi)
    }

    pub fn axis_index(&self, name: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.name == name)
    }

    /// Uniform random point, kept `margin` (as a fraction of each extent) away
    /// from every face.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, margin: f64) -> ChartPoint {
        let coords = self
            .axes
            .iter()
            .map(|ax| {
                let pad = margin * ax.extent();
                rng.gen_range((ax.lo + pad)..(ax.hi - pad))
            })
            .collect();
        ChartPoint::new(coords)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.axes.iter().map(|a| 0.5 * (a.lo + a.hi)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub coords: Vec<f64>,
    pub chart: String,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        ChartPoint {
            coords,
            chart: "main".to_string(),
        }
    }
}

impl From<Vec<f64>> for ChartPoint {
    fn from(coords: Vec<f64>) -> Self {
        ChartPoint::new(coords)
    }
}

/// Symmetric `n × n` matrix of jets, stored once per unordered index pair so
/// `get(a, b)` and `get(b, a)` are the same object.
#[derive(Debug, Clone)]
pub struct JetMatrix {
    n: usize,
    entries: Vec<Jet2>,
}

impl JetMatrix {
    pub fn zeros(n: usize) -> Self {
        JetMatrix {
            n,
            entries: vec![Jet2::constant(0.0, n); n * (n + 1) / 2],
        }
    }

    fn slot(&self, a: usize, b: usize) -> usize {
        let (r, c) = if a <= b { (a, b) } else { (b, a) };
        r * self.n - r * (r + 1) / 2 + c
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> &Jet2 {
        &self.entries[self.slot(a, b)]
    }

    pub fn set(&mut self, a: usize, b: usize, value: Jet2) {
        let k = self.slot(a, b);
        self.entries[k] = value;
    }

    pub fn values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |a, b| self.get(a, b).value())
    }

    /// Block-diagonal assembly; jets of each block are re-embedded into the
    /// combined variable set.
    pub fn block_diagonal(left: &JetMatrix, right: &JetMatrix) -> JetMatrix {
        let (m, k) = (left.n, right.n);
        let n = m + k;
        let mut out = JetMatrix::zeros(n);
        for a in 0..m {
            for b in a..m {
                out.set(a, b, left.get(a, b).embed(0, n));
            }
        }
        for a in 0..k {
            for b in a..k {
                out.set(m + a, m + b, right.get(a, b).embed(m, n));
            }
        }
        out
    }
}

/// A Riemannian metric given by its components in one chart.
pub trait MetricField: Send + Sync {
    fn name(&self) -> String;

    fn domain(&self) -> &CoordBox;

    fn dim(&self) -> usize {
        self.domain().dim()
    }

    /// Metric components evaluated on coordinate jets.
    fn components(&self, x: &[Jet2]) -> Result<JetMatrix, GeometryError>;

    /// Axes along which every component is constant.
    fn killing_axes(&self) -> Vec<usize> {
        Vec::new()
    }

    /// Axis order of the volume form `dx^{o_1} ∧ … ∧ dx^{o_n}` orienting the chart.
    fn orientation(&self) -> Vec<usize> {
        (0..self.dim()).collect()
    }

    /// `λ` with `Ric = λ g`, when the metric is Einstein.
    fn einstein_constant(&self) -> Option<f64> {
        None
    }

    /// Whether the chart box and metric constants are exact rationals, so that
    /// cycle integrals are rational multiples of a power of π.
    fn exact_rational(&self) -> bool {
        false
    }

    /// Parameters for result provenance.
    fn parameters(&self) -> serde_json::Map<String, serde_json::Value> {
        serde_json::Map::new()
    }
}

/// Evaluates `g` on seeded coordinate jets after checking the point is interior.
pub fn metric_jets(metric: &dyn MetricField, x: &ChartPoint) -> Result<JetMatrix, GeometryError> {
    let n = metric.dim();
    if x.coords.len() != n {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            found: x.coords.len(),
        });
    }
    if !metric.domain().contains(&x.coords) {
        return Err(GeometryError::OutsideDomain {
            metric: metric.name(),
            coords: x.coords.clone(),
        });
    }
    let g = metric.components(&Jet2::seed(&x.coords))?;
    if g.dim() != n {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            found: g.dim(),
        });
    }
    Ok(g)
}

/// Dense rank-3 array indexed `[a][b][c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    #[inline]
    fn at(&mut self, a: usize, b: usize, c: usize) -> &mut f64 {
        &mut self.data[(a * self.n + b) * self.n + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Dense rank-4 array indexed `[j][b][c][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    #[inline]
    pub fn get(&self, j: usize, b: usize, c: usize, a: usize) -> f64 {
        self.data[((j * self.n + b) * self.n + c) * self.n + a]
    }

    #[inline]
    fn at(&mut self, j: usize, b: usize, c: usize, a: usize) -> &mut f64 {
        &mut self.data[((j * self.n + b) * self.n + c) * self.n + a]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Metric, first and second derivatives, and inverse at one point.
struct LocalMetric {
    n: usize,
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    // dg[c][a][b] = ∂_c g_ab
    dg: Tensor3,
    // ddg[c][d][a][b] = ∂_c ∂_d g_ab
    ddg: Tensor4,
}

fn invert(g: &DMatrix<f64>, coords: &[f64]) -> Result<DMatrix<f64>, GeometryError> {
    let singular = |condition| GeometryError::Singular {
        coords: coords.to_vec(),
        condition,
    };
    if g.iter().any(|v| !v.is_finite()) || g.diagonal().iter().any(|&d| !(d > 0.0)) {
        return Err(singular(f64::INFINITY));
    }
    // Cholesky on the unit-diagonal rescaling D^{-1/2} g D^{-1/2}: chart
    // factors like sin²θ only rescale axes and do not cost accuracy
    let s = g.diagonal().map(|d| 1.0 / d.sqrt());
    let scale = &s * s.transpose();
    let scaled = g.component_mul(&scale);
    let sinv = scaled
        .clone()
        .cholesky()
        .ok_or_else(|| singular(f64::INFINITY))?
        .inverse();
    let condition = norm1(&scaled) * norm1(&sinv);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(singular(condition));
    }
    Ok(sinv.component_mul(&scale))
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn local_metric(metric: &dyn MetricField, x: &ChartPoint) -> Result<LocalMetric, GeometryError> {
    let jets = metric_jets(metric, x)?;
    let n = jets.dim();
    let g = jets.values();
    let ginv = invert(&g, &x.coords)?;
    let mut dg = Tensor3::zeros(n);
    let mut ddg = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let jet = jets.get(a, b);
            for c in 0..n {
                *dg.at(c, a, b) = jet.grad()[c];
                for d in 0..n {
                    *ddg.at(c, d, a, b) = jet.hess(c, d);
                }
            }
        }
    }
    Ok(LocalMetric { n, g, ginv, dg, ddg })
}

/// Christoffel symbols of the first kind `Γ_{ebc} = ½(∂_b g_ec + ∂_c g_eb − ∂_e g_bc)`.
fn lowered_christoffel(lm: &LocalMetric) -> Tensor3 {
    let n = lm.n;
    let mut out = Tensor3::zeros(n);
    for e in 0..n {
        for b in 0..n {
            for c in b..n {
                let v = 0.5 * (lm.dg.get(b, e, c) + lm.dg.get(c, e, b) - lm.dg.get(e, b, c));
                *out.at(e, b, c) = v;
                *out.at(e, c, b) = v;
            }
        }
    }
    out
}

fn raise(lm: &LocalMetric, low: &Tensor3) -> Tensor3 {
    let n = lm.n;
    let mut out = Tensor3::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in b..n {
                let v: f64 = (0..n).map(|e| lm.ginv[(a, e)] * low.get(e, b, c)).sum();
                *out.at(a, b, c) = v;
                *out.at(a, c, b) = v;
            }
        }
    }
    out
}

/// `Γ^a_{bc}` at `x`, stored `[a][b][c]`.
pub fn christoffel(metric: &dyn MetricField, x: &ChartPoint) -> Result<Tensor3, GeometryError> {
    let lm = local_metric(metric, x)?;
    Ok(raise(&lm, &lowered_christoffel(&lm)))
}

/// Everything curvature-related at one point.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub dim: usize,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// `∂_c g_ab` stored `[c][a][b]`.
    pub dg: Tensor3,
    /// `Γ^a_{bc}` stored `[a][b][c]`.
    pub gamma: Tensor3,
    /// `R_{jbc}^a` stored `[j][b][c][a]`.
    pub riemann_up: Tensor4,
    /// `R_{jbca} = R_{jbc}^e g_{ea}` stored `[j][b][c][a]`.
    pub riemann_down: Tensor4,
    pub ricci: DMatrix<f64>,
}

pub fn riemann(metric: &dyn MetricField, x: &ChartPoint) -> Result<CurvaturePack, GeometryError> {
    riemann_impl(metric, x, false)
}

/// Riemann with the sign of the `∂_b Γ^a_{jc}` term flipped. Only used to
/// check that the self-test catches a broken curvature routine.
#[doc(hidden)]
pub fn riemann_with_injected_fault(
    metric: &dyn MetricField,
    x: &ChartPoint,
) -> Result<CurvaturePack, GeometryError> {
    riemann_impl(metric, x, true)
}

fn riemann_impl(
    metric: &dyn MetricField,
    x: &ChartPoint,
    fault: bool,
) -> Result<CurvaturePack, GeometryError> {
    let lm = local_metric(metric, x)?;
    let n = lm.n;
    let low = lowered_christoffel(&lm);
    let gamma = raise(&lm, &low);

    // ∂_j g^{ae} = −g^{af} ∂_j g_{fh} g^{he}
    let mut dginv = Tensor3::zeros(n); // [j][a][e]
    for j in 0..n {
        let dgj = DMatrix::from_fn(n, n, |f, h| lm.dg.get(j, f, h));
        let prod = -(&lm.ginv * dgj * &lm.ginv);
        for a in 0..n {
            for e in 0..n {
                *dginv.at(j, a, e) = prod[(a, e)];
            }
        }
    }

    // ∂_j Γ^a_{bc} stored dgamma[j][a][b][c] as Tensor4 (j, a, b, c)
    let mut dgamma = Tensor4::zeros(n);
    for j in 0..n {
        for b in 0..n {
            for c in b..n {
                // ∂_j Γ_{ebc}
                let dlow: Vec<f64> = (0..n)
                    .map(|e| {
                        0.5 * (lm.ddg.get(j, b, e, c) + lm.ddg.get(j, c, e, b)
                            - lm.ddg.get(j, e, b, c))
                    })
                    .collect();
                for a in 0..n {
                    let v: f64 = (0..n)
                        .map(|e| dginv.get(j, a, e) * low.get(e, b, c) + lm.ginv[(a, e)] * dlow[e])
                        .sum();
                    *dgamma.at(j, a, b, c) = v;
                    *dgamma.at(j, a, c, b) = v;
                }
            }
        }
    }

    let sign = if fault { -1.0 } else { 1.0 };
    let mut up = Tensor4::zeros(n);
    for j in 0..n {
        for b in 0..n {
            for c in 0..n {
                for a in 0..n {
                    let mut v = dgamma.get(j, a, b, c) - sign * dgamma.get(b, a, j, c);
                    for e in 0..n {
                        v += gamma.get(a, j, e) * gamma.get(e, b, c)
                            - gamma.get(a, b, e) * gamma.get(e, j, c);
                    }
                    *up.at(j, b, c, a) = v;
                }
            }
        }
    }

    let mut down = Tensor4::zeros(n);
    for j in 0..n {
        for b in 0..n {
            for c in 0..n {
                for a in 0..n {
                    *down.at(j, b, c, a) = (0..n).map(|e| up.get(j, b, c, e) * lm.g[(e, a)]).sum();
                }
            }
        }
    }

    let ricci = DMatrix::from_fn(n, n, |b, c| (0..n).map(|a| up.get(a, b, c, a)).sum());

    Ok(CurvaturePack {
        dim: n,
        g: lm.g,
        ginv: lm.ginv,
        dg: lm.dg,
        gamma,
        riemann_up: up,
        riemann_down: down,
        ricci,
    })
}

/// The endomorphism `R(X, Y)`, `M^a_b = R_{cdb}^a X^c Y^d`.
pub fn curvature_endo(pack: &CurvaturePack, x: &[f64], y: &[f64]) -> DMatrix<f64> {
    let n = pack.dim;
    let mut m = DMatrix::zeros(n, n);
    for c in 0..n {
        if x[c] == 0.0 {
            continue;
        }
        for d in 0..n {
            let w = x[c] * y[d];
            if w == 0.0 {
                continue;
            }
            for b in 0..n {
                for a in 0..n {
                    m[(a, b)] += pack.riemann_up.get(c, d, b, a) * w;
                }
            }
        }
    }
    m
}

/// Lowers the first index of an endomorphism: `A_{ab} = g_{ae} M^e_b`.
pub fn lower(pack: &CurvaturePack, m: &DMatrix<f64>) -> DMatrix<f64> {
    &pack.g * m
}

fn rel(residual: f64, scale: f64) -> f64 {
    if residual == 0.0 {
        0.0
    } else {
        residual / scale.max(f64::MIN_POSITIVE)
    }
}

/// Curvature-identity residuals at one point, each relative to the largest
/// component of the tensor it checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub gamma_symmetry: f64,
    pub metric_compatibility: f64,
    pub antisymmetry_first_pair: f64,
    pub antisymmetry_second_pair: f64,
    pub pair_symmetry: f64,
    pub first_bianchi: f64,
    pub ricci_symmetry: f64,
}

impl IdentityResiduals {
    pub fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("christoffel symmetry", self.gamma_symmetry),
            ("metric compatibility", self.metric_compatibility),
            ("riemann antisymmetry (j,b)", self.antisymmetry_first_pair),
            ("riemann antisymmetry (c,a)", self.antisymmetry_second_pair),
            ("riemann pair symmetry", self.pair_symmetry),
            ("first bianchi", self.first_bianchi),
            ("ricci symmetry", self.ricci_symmetry),
        ]
    }

    fn max_with(&mut self, other: &IdentityResiduals) {
        self.gamma_symmetry = self.gamma_symmetry.max(other.gamma_symmetry);
        self.metric_compatibility = self.metric_compatibility.max(other.metric_compatibility);
        self.antisymmetry_first_pair = self.antisymmetry_first_pair.max(other.antisymmetry_first_pair);
        self.antisymmetry_second_pair =
            self.antisymmetry_second_pair.max(other.antisymmetry_second_pair);
        self.pair_symmetry = self.pair_symmetry.max(other.pair_symmetry);
        self.first_bianchi = self.first_bianchi.max(other.first_bianchi);
        self.ricci_symmetry = self.ricci_symmetry.max(other.ricci_symmetry);
    }
}

pub fn identity_residuals(pack: &CurvaturePack) -> IdentityResiduals {
    let n = pack.dim;
    let r = &pack.riemann_down;
    let gamma_scale = pack.gamma.max_abs();
    let r_scale = r.max_abs();

    let mut gsym: f64 = 0.0;
    let mut compat: f64 = 0.0;
    let mut compat_scale: f64 = pack.dg.max_abs();
    let g_scale = pack.g.amax();
    compat_scale = compat_scale.max(g_scale * gamma_scale);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                gsym = gsym.max((pack.gamma.get(a, b, c) - pack.gamma.get(a, c, b)).abs());
                // ∂_c g_ab − Γ^e_ca g_eb − Γ^e_cb g_ae
                let mut v = pack.dg.get(c, a, b);
                for e in 0..n {
                    v -= pack.gamma.get(e, c, a) * pack.g[(e, b)] + pack.gamma.get(e, c, b) * pack.g[(a, e)];
                }
                compat = compat.max(v.abs());
            }
        }
    }

    let (mut anti1, mut anti2, mut pair, mut bianchi): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..n {
        for b in 0..n {
            for c in 0..n {
                for a in 0..n {
                    let v = r.get(j, b, c, a);
                    anti1 = anti1.max((v + r.get(b, j, c, a)).abs());
                    anti2 = anti2.max((v + r.get(j, b, a, c)).abs());
                    pair = pair.max((v - r.get(c, a, j, b)).abs());
                    bianchi = bianchi.max((v + r.get(b, c, j, a) + r.get(c, j, b, a)).abs());
                }
            }
        }
    }

    let ric_scale = pack.ricci.amax();
    let ric_sym = (&pack.ricci - pack.ricci.transpose()).amax();

    IdentityResiduals {
        gamma_symmetry: rel(gsym, gamma_scale),
        metric_compatibility: rel(compat, compat_scale),
        antisymmetry_first_pair: rel(anti1, r_scale),
        antisymmetry_second_pair: rel(anti2, r_scale),
        pair_symmetry: rel(pair, r_scale),
        first_bianchi: rel(bianchi, r_scale),
        ricci_symmetry: rel(ric_sym, ric_scale),
    }
}

/// `max |Ric − λ g| / max |g|`.
pub fn einstein_residual(pack: &CurvaturePack, lambda: f64) -> f64 {
    rel((&pack.ricci - &pack.g * lambda).amax(), pack.g.amax())
}

/// Worst-case residuals over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub metric: String,
    pub samples: usize,
    pub residuals: IdentityResiduals,
    pub einstein_constant: Option<f64>,
    pub einstein_residual: Option<f64>,
    pub max_curvature: f64,
}

impl CurvatureReport {
    /// Names of the checks that exceed their tolerance.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = self
            .residuals
            .named()
            .iter()
            .filter(|(_, v)| !(*v <= IDENTITY_TOLERANCE))
            .map(|(name, _)| *name)
            .collect();
        if let Some(e) = self.einstein_residual {
            if !(e <= EINSTEIN_TOLERANCE) {
                out.push("einstein condition");
            }
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

impl fmt::Display for CurvatureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "metric: {} ({} sample points)", self.metric, self.samples)?;
        writeln!(f, "{:<32} {:>12}  {:>9}  status", "check", "residual", "tolerance")?;
        for (name, v) in self.residuals.named() {
            let status = if v <= IDENTITY_TOLERANCE { "ok" } else { "FAIL" };
            writeln!(f, "{name:<32} {v:>12.3e}  {IDENTITY_TOLERANCE:>9.0e}  {status}")?;
        }
        if let (Some(lambda), Some(e)) = (self.einstein_constant, self.einstein_residual) {
            let status = if e <= EINSTEIN_TOLERANCE { "ok" } else { "FAIL" };
            let name = format!("Ric = {lambda} g");
            writeln!(f, "{name:<32} {e:>12.3e}  {EINSTEIN_TOLERANCE:>9.0e}  {status}")?;
        }
        write!(f, "max |R_jbca| = {:.6e}", self.max_curvature)
    }
}

pub fn validate_curvature(
    metric: &dyn MetricField,
    samples: &[ChartPoint],
) -> Result<CurvatureReport, GeometryError> {
    validate_with(metric, samples, riemann)
}

#[doc(hidden)]
pub fn validate_with(
    metric: &dyn MetricField,
    samples: &[ChartPoint],
    curvature: fn(&dyn MetricField, &ChartPoint) -> Result<CurvaturePack, GeometryError>,
) -> Result<CurvatureReport, GeometryError> {
    let lambda = metric.einstein_constant();
    let mut worst = IdentityResiduals::default();
    let mut einstein: Option<f64> = lambda.map(|_| 0.0);
    let mut max_curvature: f64 = 0.0;
    for x in samples {
        let pack = curvature(metric, x)?;
        worst.max_with(&identity_residuals(&pack));
        max_curvature = max_curvature.max(pack.riemann_down.max_abs());
        if let (Some(l), Some(e)) = (lambda, einstein.as_mut()) {
            *e = e.max(einstein_residual(&pack, l));
        }
    }
    Ok(CurvatureReport {
        metric: metric.name(),
        samples: samples.len(),
        residuals: worst,
        einstein_constant: lambda,
        einstein_residual: einstein,
        max_curvature,
    })
}

/// Contracts an endomorphism with vectors: `yᵀ M x` style helpers for tests.
pub fn apply(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).iter().copied().collect()
}
