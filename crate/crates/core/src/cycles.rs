//! Circle actions on a chart and integration of the pulled-back WCS form over
//! the cycle they induce in the loop space.

use std::f64::consts::PI;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::geometry::{metric_jets, riemann, ChartPoint, GeometryError, MetricField};
use crate::metrics::{ypq_metric, MetricError, YpqParams};
use crate::quadrature::{integrate_box, pairwise_sum, QuadratureError, QuadratureSpec};
use crate::wcs::{wcs_integrand, SymbolVariant, WcsFrame};

/// Largest `|∂_axis g_ab|` tolerated on a declared Killing axis.
pub const KILLING_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_LOOP_NODES: usize = 64;
/// Width of the boundary band on open axes, as a fraction of the axis extent.
pub const DEFAULT_BOUNDARY_GUARD: f64 = 1e-2;
/// Points in the extrapolation stencil across a boundary band.
pub const GUARD_POINTS: usize = 10;
/// Relative rounding noise of a cycle integral. Curvature near chart
/// boundaries is evaluated with a few thousand ulps of noise, which
/// differences between quadrature levels cannot see once the discretization
/// error has dropped below it; the reported error estimate never goes lower.
pub const ROUNDING_FLOOR: f64 = 1e-11;
pub const SCHEMA: &str = "loopwcs.cycle_result/1";

#[derive(Debug, Error)]
pub enum CycleError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invalid circle action: {0}")]
    InvalidAction(String),
    #[error("axis {axis} is not a symmetry axis: max |d g / d x^{axis}| = {max_derivative:e}")]
    NotKilling { axis: usize, max_derivative: f64 },
    #[error("a {k}-th WCS form lives in dimension {}, metric has dimension {dim}", 2 * k - 1)]
    Dimension { dim: usize, k: usize },
}

/// A circle action `a(t, m)`, `t ∈ [0, 2π]`, on a coordinate chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircleAction {
    Trivial,
    /// Shifts coordinate `axis` by `speed · t` modulo its period.
    Rotation { axis: usize, speed: f64 },
    /// `a(t, m) = base(n t, m)`.
    Iterate { base: Box<CircleAction>, n: u32 },
}

impl CircleAction {
    /// Rotation traversing the axis once as `t` runs over `[0, 2π]`.
    pub fn unit_rotation(metric: &dyn MetricField, axis: usize) -> Result<Self, CycleError> {
        let ax = metric
            .domain()
            .axes
            .get(axis)
            .ok_or_else(|| CycleError::InvalidAction(format!("no axis {axis}")))?;
        Ok(CircleAction::Rotation { axis, speed: ax.extent() / (2.0 * PI) })
    }

    pub fn iterate(self, n: u32) -> Self {
        CircleAction::Iterate { base: Box::new(self), n }
    }

    /// Collapses iterates: `None` for the identity, else `(axis, speed)`.
    pub fn resolve(&self) -> Option<(usize, f64)> {
        match self {
            CircleAction::Trivial => None,
            CircleAction::Rotation { axis, speed } => Some((*axis, *speed)),
            CircleAction::Iterate { base, n } => base.resolve().map(|(a, s)| (a, s * *n as f64)),
        }
    }

    pub fn describe(&self, metric: &dyn MetricField) -> String {
        match self {
            CircleAction::Trivial => "trivial".into(),
            CircleAction::Rotation { axis, speed } => {
                let name = metric.domain().axes.get(*axis).map_or("?", |a| a.name.as_str());
                format!("rotate:{name}:{speed}")
            }
            CircleAction::Iterate { base, n } => format!("iterate:{n}:{}", base.describe(metric)),
        }
    }

    /// Checks that the axis exists, is periodic, and that orbits close.
    pub fn validate(&self, metric: &dyn MetricField) -> Result<(), CycleError> {
        match self {
            CircleAction::Trivial => Ok(()),
            CircleAction::Iterate { base, .. } => base.validate(metric),
            CircleAction::Rotation { axis, speed } => {
                let ax = metric.domain().axes.get(*axis).ok_or_else(|| {
                    CycleError::InvalidAction(format!("axis {axis} out of range for dimension {}", metric.dim()))
                })?;
                if !ax.periodic {
                    return Err(CycleError::InvalidAction(format!("axis '{}' is not periodic", ax.name)));
                }
                if !speed.is_finite() {
                    return Err(CycleError::InvalidAction(format!("speed {speed} is not finite")));
                }
                let windings = speed * 2.0 * PI / ax.extent();
                if (windings - windings.round()).abs() > 1e-9 * windings.abs().max(1.0) {
                    return Err(CycleError::InvalidAction(format!(
                        "speed {speed} does not close the orbit on axis '{}' (period {}, {windings} windings)",
                        ax.name,
                        ax.extent()
                    )));
                }
                Ok(())
            }
        }
    }

    /// `a(t, m)`.
    pub fn apply(&self, metric: &dyn MetricField, t: f64, m: &[f64]) -> Vec<f64> {
        let mut x = m.to_vec();
        if let Some((axis, speed)) = self.resolve() {
            x[axis] = metric.domain().axes[axis].wrap(x[axis] + speed * t);
        }
        x
    }

    /// `γ̇ = d/dt a(t, m)`; constant for coordinate rotations.
    pub fn velocity(&self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        if let Some((axis, speed)) = self.resolve() {
            v[axis] = speed;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleOptions {
    pub variant: SymbolVariant,
    pub s_scale: f64,
    pub loop_nodes: usize,
    /// Use declared symmetry axes: analytic loop integral and masked box axes.
    pub symmetry: bool,
    /// Band at the ends of polar axes (fraction of extent) inside which the
    /// box integrand is extrapolated instead of evaluated; 0 disables it.
    ///
    /// At a pole, coordinate curvature cancels large terms and the pointwise
    /// rounding error grows like `1/t³` at distance `t`. Gauss nodes approach
    /// the ends like `1/n²`, so without the band that noise grows with
    /// refinement and swamps the error estimate.
    #[serde(default)]
    pub boundary_guard: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions {
            variant: SymbolVariant::Reduced,
            s_scale: 1.0,
            loop_nodes: DEFAULT_LOOP_NODES,
            symmetry: true,
            boundary_guard: DEFAULT_BOUNDARY_GUARD,
        }
    }
}

fn check_k(metric: &dyn MetricField, k: usize) -> Result<(), CycleError> {
    if k < 2 || metric.dim() != 2 * k - 1 {
        return Err(CycleError::Dimension { dim: metric.dim(), k: k.max(2) });
    }
    Ok(())
}

fn integrand_at(
    metric: &dyn MetricField,
    k: usize,
    x: Vec<f64>,
    gammadot: &[f64],
    variant: SymbolVariant,
    s_scale: f64,
) -> Result<f64, GeometryError> {
    let pack = riemann(metric, &ChartPoint::new(x))?;
    let wf = WcsFrame::coordinate(k, gammadot.to_vec(), &metric.orientation());
    wcs_integrand(&pack, &wf, variant, s_scale)
}

fn density(
    metric: &dyn MetricField,
    action: &CircleAction,
    k: usize,
    m: &[f64],
    opts: &CycleOptions,
) -> Result<f64, GeometryError> {
    let v = action.velocity(metric.dim());
    let shortcut = match action.resolve() {
        None => true,
        Some((axis, _)) => opts.symmetry && metric.killing_axes().contains(&axis),
    };
    if shortcut {
        return Ok(2.0 * PI * integrand_at(metric, k, m.to_vec(), &v, opts.variant, opts.s_scale)?);
    }
    let n = opts.loop_nodes.max(1);
    let values = (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            integrand_at(metric, k, action.apply(metric, t, m), &v, opts.variant, opts.s_scale)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(2.0 * PI * pairwise_sum(&values) / n as f64)
}

/// [`density`] with every polar-axis coordinate closer than the guard band `δ`
/// to an end replaced by polynomial extrapolation from the band-spaced points
/// `end ± jδ`, `j = 1..=GUARD_POINTS`. Axes are handled one at a time, so
/// corners extrapolate a tensor-product stencil.
fn guarded_density(
    metric: &dyn MetricField,
    action: &CircleAction,
    k: usize,
    x: &mut [f64],
    from_axis: usize,
    opts: &CycleOptions,
) -> Result<f64, GeometryError> {
    let axes = &metric.domain().axes;
    for axis in from_axis..x.len() {
        let ax = &axes[axis];
        if !ax.polar || opts.boundary_guard <= 0.0 {
            continue;
        }
        let delta = opts.boundary_guard * ax.extent();
        let (end, dir) = if x[axis] - ax.lo < delta {
            (ax.lo, 1.0)
        } else if ax.hi - x[axis] < delta {
            (ax.hi, -1.0)
        } else {
            continue;
        };
        // Lagrange weights for nodes u = 1..=GUARD_POINTS at u = |x − end| / δ
        let u = (x[axis] - end) * dir / delta;
        let saved = x[axis];
        let mut total = 0.0;
        for j in 1..=GUARD_POINTS {
            let w: f64 = (1..=GUARD_POINTS)
                .filter(|&i| i != j)
                .map(|i| (u - i as f64) / (j as f64 - i as f64))
                .product();
            x[axis] = end + dir * j as f64 * delta;
            total += w * guarded_density(metric, action, k, x, axis + 1, opts)?;
        }
        x[axis] = saved;
        return Ok(total);
    }
    density(metric, action, k, x, opts)
}

/// `f(m) = ∫₀^{2π} CS(a_*∂_{o1}, …, a_*∂_{o(2k−1)})|_{a(t,m)} dt`, with the frame in
/// the metric's orientation order and `γ̇ = ∂_t a(t, m)`.
pub fn pullback_density(
    metric: &dyn MetricField,
    action: &CircleAction,
    k: usize,
    m: &ChartPoint,
    opts: &CycleOptions,
) -> Result<f64, CycleError> {
    check_k(metric, k)?;
    action.validate(metric)?;
    if !metric.domain().contains(&m.coords) {
        return Err(GeometryError::OutsideDomain { metric: metric.name(), coords: m.coords.clone() }.into());
    }
    Ok(density(metric, action, k, &m.coords, opts)?)
}

fn check_guard(opts: &CycleOptions) -> Result<(), CycleError> {
    // the stencil reaches GUARD_POINTS·δ into the axis and must stay clear of the far end
    if opts.boundary_guard >= 0.0 && opts.boundary_guard * (GUARD_POINTS as f64) <= 0.5 {
        Ok(())
    } else {
        Err(CycleError::InvalidAction(format!(
            "boundary guard {} outside [0, {}]",
            opts.boundary_guard,
            0.5 / GUARD_POINTS as f64
        )))
    }
}

/// The function [`integrate_cycle`] hands to the box quadrature: the pulled-back
/// density with the open-axis boundary guard of `opts` applied.
pub fn cycle_integrand(
    metric: &dyn MetricField,
    action: &CircleAction,
    k: usize,
    m: &ChartPoint,
    opts: &CycleOptions,
) -> Result<f64, CycleError> {
    check_k(metric, k)?;
    action.validate(metric)?;
    check_guard(opts)?;
    if !metric.domain().contains(&m.coords) {
        return Err(GeometryError::OutsideDomain { metric: metric.name(), coords: m.coords.clone() }.into());
    }
    Ok(guarded_density(metric, action, k, &mut m.coords.clone(), 0, opts)?)
}

/// Largest `|∂_axis g_ab|` over seeded interior samples.
pub fn killing_defect(metric: &dyn MetricField, axis: usize, samples: usize) -> Result<f64, CycleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b69_6c6c);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = metric.domain().sample(&mut rng, 0.05);
        let g = metric_jets(metric, &x)?;
        for a in 0..metric.dim() {
            for b in a..metric.dim() {
                worst = worst.max(g.get(a, b).grad()[axis].abs());
            }
        }
    }
    Ok(worst)
}

pub fn verify_killing(metric: &dyn MetricField, axis: usize) -> Result<(), CycleError> {
    let d = killing_defect(metric, axis, 16)?;
    if d < KILLING_TOLERANCE {
        Ok(())
    } else {
        Err(CycleError::NotKilling { axis, max_derivative: d })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pi4Multiple {
    pub numerator: i64,
    pub denominator: i64,
}

impl std::fmt::Display for Pi4Multiple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// Simplest continued-fraction convergent `p/q` (`q ≤ max_den`) with
/// `|x − p/q| ≤ tol`.
pub fn snap_rational(x: f64, tol: f64, max_den: i64) -> Option<Pi4Multiple> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            return None;
        }
        if (x - h2 as f64 / k2 as f64).abs() <= tol {
            return Some(Pi4Multiple { numerator: h2 as i64, denominator: k2 as i64 });
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

/// A published value the run can be compared with, and the measured ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCheck {
    pub expected_pi4_multiple: Pi4Multiple,
    pub expected_value: f64,
    /// `value / expected_value`.
    pub ratio: f64,
}

/// Reference value for the `α`-rotation cycle of `Y^{7,3}`.
pub const Y73_REFERENCE: Pi4Multiple = Pi4Multiple { numerator: -1849, denominator: 22050 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub schema: String,
    pub version: String,
    pub metric: String,
    pub parameters: Map<String, Value>,
    pub action: String,
    pub k: usize,
    pub variant: SymbolVariant,
    pub s_scale: f64,
    pub speed_convention: String,
    pub orientation: Vec<String>,
    pub normalization: String,
    pub loop_integral: String,
    /// Polar-axis extrapolation band, as a fraction of each axis extent.
    pub boundary_guard: f64,
    /// Relative lower bound applied to the error estimate.
    pub rounding_floor: f64,
    pub quadrature: QuadratureSpec,
    pub reference: Option<ReferenceCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleResult {
    pub value: f64,
    pub pi4_multiple: Option<Pi4Multiple>,
    pub error_estimate: f64,
    pub converged: bool,
    pub node_counts: Vec<usize>,
    pub final_node_counts: Vec<usize>,
    pub wall_time: f64,
    pub provenance: Provenance,
}

fn reference_for(metric: &dyn MetricField, action: &CircleAction, k: usize, value: f64) -> Option<ReferenceCheck> {
    let params = metric.parameters();
    let is_y73 = params.get("family").and_then(Value::as_str) == Some("ypq")
        && params.get("p").and_then(Value::as_u64) == Some(7)
        && params.get("q").and_then(Value::as_u64) == Some(3);
    let alpha = metric.domain().axis_index("alpha");
    let single_fibre = match (action, alpha) {
        (CircleAction::Rotation { axis, speed }, Some(a)) => {
            *axis == a && (speed * 2.0 * PI - metric.domain().axes[a].extent()).abs() < 1e-12
        }
        _ => false,
    };
    if !(is_y73 && single_fibre && k == 3) {
        return None;
    }
    let r = Y73_REFERENCE;
    let expected = r.numerator as f64 / r.denominator as f64 * PI.powi(4);
    Some(ReferenceCheck { expected_pi4_multiple: r, expected_value: expected, ratio: value / expected })
}

/// `∫_M f(m) dm` over the chart box with orientation given by the metric.
pub fn integrate_cycle(
    metric: &dyn MetricField,
    action: &CircleAction,
    k: usize,
    quad: &QuadratureSpec,
    opts: &CycleOptions,
) -> Result<CycleResult, CycleError> {
    let start = Instant::now();
    check_k(metric, k)?;
    action.validate(metric)?;

    let mut spec = quad.clone();
    if spec.mask.len() == metric.dim() && opts.symmetry {
        for axis in metric.killing_axes() {
            spec.mask[axis] = true;
        }
    }
    let masked: Vec<usize> = (0..spec.mask.len()).filter(|&i| spec.mask[i]).collect();
    let mut to_verify = masked.clone();
    if let Some((axis, _)) = action.resolve() {
        if opts.symmetry && metric.killing_axes().contains(&axis) {
            to_verify.push(axis);
        }
    }
    to_verify.sort_unstable();
    to_verify.dedup();
    for &axis in &to_verify {
        verify_killing(metric, axis)?;
    }

    check_guard(opts)?;
    // the integrand is linear in s: integrate at s = 1 and scale once, so that
    // results for different s are exact multiples of each other
    let unit = CycleOptions { s_scale: 1.0, ..opts.clone() };
    let mut q = integrate_box(
        |x: &[f64]| guarded_density(metric, action, k, &mut x.to_vec(), 0, &unit),
        metric.domain(),
        &spec,
    )?;
    q.value *= opts.s_scale;
    q.error_estimate = (q.error_estimate * opts.s_scale.abs()).max(ROUNDING_FLOOR * q.value.abs());

    let pi4_multiple = if metric.exact_rational() {
        let err = q.error_estimate.max(4.0 * f64::EPSILON * q.value.abs());
        let x = q.value / PI.powi(4);
        snap_rational(x, 10.0 * err / PI.powi(4), 1_000_000)
    } else {
        None
    };

    let names: Vec<String> = metric
        .orientation()
        .iter()
        .map(|&i| metric.domain().axes[i].name.clone())
        .collect();
    let loop_integral = match action.resolve() {
        Some((axis, _)) if !(opts.symmetry && metric.killing_axes().contains(&axis)) => {
            format!("trapezoid, {} nodes", opts.loop_nodes)
        }
        _ => "2pi x pointwise value (orbit along a symmetry axis)".into(),
    };
    let speed_convention = match action.resolve() {
        Some((axis, speed)) => format!(
            "coordinate {} advances by speed*t, t in [0, 2pi], speed = {speed} (winding number {} over period {})",
            metric.domain().axes[axis].name,
            speed * 2.0 * PI / metric.domain().axes[axis].extent(),
            metric.domain().axes[axis].extent()
        ),
        None => "identity".into(),
    };
    let provenance = Provenance {
        schema: SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        metric: metric.name(),
        parameters: metric.parameters(),
        action: action.describe(metric),
        k,
        variant: opts.variant,
        s_scale: opts.s_scale,
        speed_convention,
        orientation: names,
        normalization: "s * 2/(2k-1)! * sum over all permutations of sgn * tr[B Omega...Omega], \
                        k-1 curvature factors composed as plain matrix products; \
                        cosphere factor 2 carried in the prefactor"
            .into(),
        loop_integral,
        boundary_guard: opts.boundary_guard,
        rounding_floor: ROUNDING_FLOOR,
        quadrature: spec,
        reference: reference_for(metric, action, k, q.value),
    };
    Ok(CycleResult {
        value: q.value,
        pi4_multiple,
        error_estimate: q.error_estimate,
        converged: q.converged,
        node_counts: q.node_counts,
        final_node_counts: q.final_node_counts,
        wall_time: start.elapsed().as_secs_f64(),
        provenance,
    })
}

#[derive(Debug)]
pub struct SweepRow {
    pub a: f64,
    pub result: Result<CycleResult, CycleError>,
}

#[derive(Debug)]
pub struct ASweep {
    pub rows: Vec<SweepRow>,
    /// Slope of `ln |value|` against `ln(1 − a)`.
    pub exponent: Option<f64>,
    /// `value / (1 − a)²` per successful row.
    pub normalized: Vec<f64>,
}

impl ASweep {
    /// `(max − min) / mean |·|` of the normalized values.
    pub fn normalized_variation(&self) -> Option<f64> {
        if self.normalized.len() < 2 {
            return None;
        }
        let max = self.normalized.iter().copied().fold(f64::MIN, f64::max);
        let min = self.normalized.iter().copied().fold(f64::MAX, f64::min);
        let mean = self.normalized.iter().map(|v| v.abs()).sum::<f64>() / self.normalized.len() as f64;
        Some((max - min) / mean)
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Cycle integral of the fibre rotation on the family member with parameter
/// `a` and `ℓ = 1`, for each `a` in `grid`.
pub fn a_sweep(grid: &[f64], k: usize, quad: &QuadratureSpec, opts: &CycleOptions) -> ASweep {
    let rows: Vec<SweepRow> = grid
        .iter()
        .map(|&a| {
            let result = (|| {
                let metric = ypq_metric(YpqParams::from_a(a, 1.0)?)?;
                let axis = metric.domain().axis_index("alpha").expect("alpha axis");
                let action = CircleAction::unit_rotation(&metric, axis)?;
                integrate_cycle(&metric, &action, k, quad, opts)
            })();
            SweepRow { a, result }
        })
        .collect();
    let ok: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.result.as_ref().ok().map(|c| (r.a, c.value)))
        .collect();
    let fit: Vec<(f64, f64)> = ok
        .iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|(a, v)| ((1.0 - a).ln(), v.abs().ln()))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
    ASweep {
        exponent: fit_slope(&xs, &ys),
        normalized: ok.iter().map(|(a, v)| v / (1.0 - a).powi(2)).collect(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{flat_torus, round_sphere, solve_ypq};

    #[test]
    fn snapping() {
        let x = -1849.0 / 22050.0;
        assert_eq!(snap_rational(x, 1e-15, 1_000_000), Some(Pi4Multiple { numerator: -1849, denominator: 22050 }));
        assert_eq!(snap_rational(0.0, 1e-15, 10), Some(Pi4Multiple { numerator: 0, denominator: 1 }));
        assert_eq!(snap_rational(PI, 1e-15, 1_000_000), None);
        assert_eq!(snap_rational(0.5 + 1e-9, 1e-6, 100), Some(Pi4Multiple { numerator: 1, denominator: 2 }));
    }

    #[test]
    fn slope_fit() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 5.0];
        assert_eq!(fit_slope(&x, &y), Some(2.0));
        assert_eq!(fit_slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn action_validation() {
        let m = ypq_metric(solve_ypq(7, 3).unwrap()).unwrap();
        assert!(CircleAction::Rotation { axis: 4, speed: 0.15 }.validate(&m).is_ok());
        assert!(CircleAction::Rotation { axis: 4, speed: 0.1 }.validate(&m).is_err());
        assert!(CircleAction::Rotation { axis: 1, speed: 1.0 }.validate(&m).is_err());
        assert!(CircleAction::Rotation { axis: 9, speed: 1.0 }.validate(&m).is_err());
        let it = CircleAction::Rotation { axis: 4, speed: 0.15 }.iterate(3);
        assert_eq!(it.resolve(), Some((4, 0.15 * 3.0)));
        assert_eq!(it.describe(&m), "iterate:3:rotate:alpha:0.15");
    }

    #[test]
    fn trivial_density_is_zero() {
        let m = ypq_metric(solve_ypq(7, 3).unwrap()).unwrap();
        let x = ChartPoint::new(vec![1.0, 1.2, 2.0, 0.1, 0.5]);
        let f = pullback_density(&m, &CircleAction::Trivial, 3, &x, &CycleOptions::default()).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn killing_axes_verified() {
        let m = ypq_metric(solve_ypq(7, 3).unwrap()).unwrap();
        for axis in [0, 2, 4] {
            verify_killing(&m, axis).unwrap();
        }
        assert!(matches!(verify_killing(&m, 1), Err(CycleError::NotKilling { .. })));
        let s = round_sphere(3, 1.0).unwrap();
        verify_killing(&s, 2).unwrap();
    }

    #[test]
    fn wrong_dimension_rejected() {
        let t = flat_torus(2).unwrap();
        let q = QuadratureSpec::uniform(2, 4);
        let r = integrate_cycle(&t, &CircleAction::Trivial, 2, &q, &CycleOptions::default());
        assert!(matches!(r, Err(CycleError::Dimension { .. })));
    }
}
