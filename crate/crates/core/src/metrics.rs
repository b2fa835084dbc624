//! Concrete metrics: the Sasaki-Einstein family `Y^{p,q}` on `S² × S³` in the
//! local coordinates `(φ, θ, ψ, y, α)`, plus flat tori, round spheres and
//! products used as reference fixtures.

use std::f64::consts::PI;
use std::sync::Arc;

use num::bigint::BigInt;
use num::integer::Integer;
use num::{BigRational, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::geometry::{Axis, CoordBox, GeometryError, JetMatrix, MetricField};
use crate::jets::{Jet2, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("invalid (p, q) = ({p}, {q}): {reason}")]
    InvalidPair { p: u64, q: u64, reason: &'static str },
    #[error("invalid parameter a = {0}: need 0 < a < 1 (a = 1 collapses onto the double root y = 1)")]
    InvalidA(f64),
    #[error("invalid fibre scale ell = {0}: must be positive and finite")]
    InvalidEll(f64),
    #[error("cubic a - 3y^2 + 2y^3 = 0 has no admissible root pair for a = {0}")]
    CubicFailure(f64),
    #[error("parameter consistency check failed: {0}")]
    Inconsistent(String),
    #[error("unsupported dimension {0} (catalog metrics exist for n = 2, 3, 5)")]
    UnsupportedDimension(usize),
    #[error("invalid radius {0}")]
    InvalidRadius(f64),
    #[error("unknown metric '{0}'")]
    UnknownMetric(String),
}

/// Exact rational data of a `Y^{p,q}` with `4p² − 3q²` a perfect square.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactYpq {
    pub a: BigRational,
    pub ell: BigRational,
    pub y1: BigRational,
    pub y2: BigRational,
}

/// Constants of one member of the `Y^{p,q}` family.
#[derive(Debug, Clone, PartialEq)]
pub struct YpqParams {
    pub p: Option<u64>,
    pub q: Option<u64>,
    /// `√(4p² − 3q²)` when it is an integer.
    pub n: Option<u64>,
    pub a: f64,
    pub c: f64,
    pub ell: f64,
    pub y1: f64,
    pub y2: f64,
    pub exact: Option<ExactYpq>,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn cubic(a: f64, y: f64) -> f64 {
    a - 3.0 * y * y + 2.0 * y * y * y
}

/// Real roots of `a − 3y² + 2y³ = 0` in increasing order, for `0 < a < 1`.
pub fn cubic_roots(a: f64) -> Result<[f64; 3], MetricError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(MetricError::CubicFailure(a));
    }
    // y = t + 1/2 gives t³ − (3/4) t + (a − 1/2)/2 = 0
    let base = (1.0 - 2.0 * a).acos() / 3.0;
    let mut roots = [0.0; 3];
    for (k, r) in roots.iter_mut().enumerate() {
        let mut y = 0.5 + (base - 2.0 * PI * k as f64 / 3.0).cos();
        for _ in 0..4 {
            let d = 6.0 * y * y - 6.0 * y;
            if d == 0.0 {
                break;
            }
            y -= cubic(a, y) / d;
        }
        *r = y;
    }
    roots.sort_by(f64::total_cmp);
    if roots.iter().any(|r| !r.is_finite()) || roots[0] >= roots[1] {
        return Err(MetricError::CubicFailure(a));
    }
    Ok(roots)
}

fn perfect_square(v: u64) -> Option<u64> {
    let r = (v as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).find(|s| s * s == v)
}

impl YpqParams {
    /// Constants of `Y^{p,q}`.
    ///
    /// When `4p² − 3q²` is a perfect square `n²`, the y-interval endpoints, `a`
    /// and `ℓ` are rational:
    ///
    /// ```text
    /// y₁,₂ = (2p ∓ 3q − n) / 4p,   a = 3y₁² − 2y₁³,   ℓ = q / (3q² − 2p² + p n)
    /// ```
    ///
    /// and are computed exactly. Otherwise the same closed forms are used with
    /// a real square root and the roots are re-solved from the cubic.
    pub fn solve(p: u64, q: u64) -> Result<YpqParams, MetricError> {
        if q == 0 || q >= p {
            return Err(MetricError::InvalidPair { p, q, reason: "need 0 < q < p" });
        }
        if p.gcd(&q) != 1 {
            return Err(MetricError::InvalidPair { p, q, reason: "p and q must be coprime" });
        }
        let disc = 4 * p * p - 3 * q * q;
        let params = match perfect_square(disc) {
            Some(n) => {
                let (pi, qi, ni) = (p as i64, q as i64, n as i64);
                let y1 = ratio(2 * pi - 3 * qi - ni, 4 * pi);
                let y2 = ratio(2 * pi + 3 * qi - ni, 4 * pi);
                let three = ratio(3, 1);
                let two = ratio(2, 1);
                let a = &three * &y1 * &y1 - &two * &y1 * &y1 * &y1;
                let residual = &a - &three * &y2 * &y2 + &two * &y2 * &y2 * &y2;
                if !residual.is_zero() {
                    return Err(MetricError::Inconsistent(format!(
                        "exact cubic residual at y2 is {residual}"
                    )));
                }
                let ell = ratio(qi, 3 * qi * qi - 2 * pi * pi + pi * ni);
                YpqParams {
                    p: Some(p),
                    q: Some(q),
                    n: Some(n),
                    a: rat_f64(&a),
                    c: 1.0,
                    ell: rat_f64(&ell),
                    y1: rat_f64(&y1),
                    y2: rat_f64(&y2),
                    exact: Some(ExactYpq { a, ell, y1, y2 }),
                }
            }
            None => {
                let (pf, qf) = (p as f64, q as f64);
                let root = (disc as f64).sqrt();
                let a = 0.5 - (pf * pf - 3.0 * qf * qf) * root / (4.0 * pf * pf * pf);
                let roots = cubic_roots(a)?;
                let ell = qf / (3.0 * qf * qf - 2.0 * pf * pf + pf * root);
                let closed = [
                    (2.0 * pf - 3.0 * qf - root) / (4.0 * pf),
                    (2.0 * pf + 3.0 * qf - root) / (4.0 * pf),
                ];
                for (r, c) in roots.iter().zip(closed) {
                    if (r - c).abs() > 1e-12 {
                        return Err(MetricError::Inconsistent(format!(
                            "cubic root {r} disagrees with closed form {c}"
                        )));
                    }
                }
                YpqParams {
                    p: Some(p),
                    q: Some(q),
                    n: None,
                    a,
                    c: 1.0,
                    ell,
                    y1: roots[0],
                    y2: roots[1],
                    exact: None,
                }
            }
        };
        params.validate()?;
        Ok(params)
    }

    /// Member of the family given directly by `a`, with fibre scale `ℓ`.
    pub fn from_a(a: f64, ell: f64) -> Result<YpqParams, MetricError> {
        if !(a > 0.0 && a < 1.0) {
            return Err(MetricError::InvalidA(a));
        }
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(MetricError::InvalidEll(ell));
        }
        let roots = cubic_roots(a)?;
        let params = YpqParams {
            p: None,
            q: None,
            n: None,
            a,
            c: 1.0,
            ell,
            y1: roots[0],
            y2: roots[1],
            exact: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn exact_mode(&self) -> bool {
        self.exact.is_some()
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(MetricError::InvalidA(self.a));
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return Err(MetricError::InvalidEll(self.ell));
        }
        if !(self.y1 < 0.0 && 0.0 < self.y2 && self.y2 < 1.0) {
            return Err(MetricError::Inconsistent(format!(
                "expected y1 < 0 < y2 < 1, got y1 = {}, y2 = {}",
                self.y1, self.y2
            )));
        }
        for y in [self.y1, self.y2] {
            let r = cubic(self.a, y);
            if r.abs() > 1e-12 {
                return Err(MetricError::Inconsistent(format!("cubic residual {r:e} at y = {y}")));
            }
        }
        // the third root lies above both
        let y3 = 1.5 - self.y1 - self.y2;
        if y3 <= self.y2 {
            return Err(MetricError::Inconsistent("y1, y2 are not the two smaller roots".into()));
        }
        Ok(())
    }

    pub fn coord_box(&self) -> CoordBox {
        CoordBox::new(vec![
            Axis::periodic("phi", 0.0, 2.0 * PI),
            Axis::polar("theta", 0.0, PI),
            Axis::periodic("psi", 0.0, 2.0 * PI),
            Axis::open("y", self.y1, self.y2),
            Axis::periodic("alpha", 0.0, 2.0 * PI * self.ell),
        ])
    }
}

/// Convenience wrapper matching the parameter-solver operation.
pub fn solve_ypq(p: u64, q: u64) -> Result<YpqParams, MetricError> {
    YpqParams::solve(p, q)
}

fn jet_err(x: &[Jet2]) -> impl Fn(JetError) -> GeometryError + '_ {
    move |source| GeometryError::Jet {
        coords: x.iter().map(Jet2::value).collect(),
        source,
    }
}

/// Components of
///
/// ```text
/// g = (1−cy)/6 (dθ² + sin²θ dφ²) + dy²/(w q) + q/9 (dψ − cosθ dφ)²
///     + w [dα + f (dψ − cosθ dφ)]²
/// w = 2(a − y²)/(1 − cy),  q = (a − 3y² + 2cy³)/(a − y²),  f = (ac − 2y + cy²)/(6(a − y²))
/// ```
///
/// on coordinate jets ordered `(φ, θ, ψ, y, α)`.
pub fn ypq_components(a: f64, c: f64, x: &[Jet2]) -> Result<JetMatrix, GeometryError> {
    if x.len() != 5 {
        return Err(GeometryError::DimensionMismatch { expected: 5, found: x.len() });
    }
    let coords: Vec<f64> = x.iter().map(Jet2::value).collect();
    let degenerate = |reason: String| GeometryError::Degenerate { coords: coords.clone(), reason };
    let err = jet_err(x);
    let (theta, y) = (&x[1], &x[3]);
    let yv = y.value();

    let sin = theta.sin();
    let cos = theta.cos();
    if !(sin.value() > 0.0) {
        return Err(degenerate(format!("sin(theta) = {} <= 0", sin.value())));
    }
    let one_minus_cy = 1.0 - &(y * c);
    if !(one_minus_cy.value() > 0.0) {
        return Err(degenerate(format!("1 - c y = {} <= 0", one_minus_cy.value())));
    }
    let y2 = y.powi(2);
    let a_minus_y2 = &(-&y2) + a;
    if !(a_minus_y2.value() > 0.0) {
        return Err(degenerate(format!("a - y^2 = {} <= 0", a - yv * yv)));
    }
    let cubic_poly = &(&y2 * -3.0) + &(&y.powi(3) * (2.0 * c)) + a;
    if !(cubic_poly.value() > 0.0) {
        return Err(degenerate(format!("a - 3y^2 + 2cy^3 = {} <= 0", cubic_poly.value())));
    }

    let w = (&a_minus_y2 * 2.0).checked_div(&one_minus_cy).map_err(&err)?;
    let q = cubic_poly.checked_div(&a_minus_y2).map_err(&err)?;
    let f_num = &(&(y * -2.0) + &(&y2 * c)) + a * c;
    let f = f_num.checked_div(&(&a_minus_y2 * 6.0)).map_err(&err)?;
    let wq = &w * &q;
    if !(wq.value() > 0.0) {
        return Err(degenerate(format!("w q = {} <= 0", wq.value())));
    }

    let base = &one_minus_cy * (1.0 / 6.0);
    let q9 = &q * (1.0 / 9.0);
    let wf = &w * &f;
    let wff = &wf * &f;
    let fibre = &q9 + &wff; // coefficient of (dψ − cosθ dφ)²
    let cos2 = cos.powi(2);

    let mut g = JetMatrix::zeros(5);
    let (phi, th, psi, yy, al) = (0, 1, 2, 3, 4);
    g.set(phi, phi, &(&base * &sin.powi(2)) + &(&fibre * &cos2));
    g.set(phi, psi, -(&fibre * &cos));
    g.set(phi, al, -(&wf * &cos));
    g.set(th, th, base);
    g.set(psi, psi, fibre);
    g.set(psi, al, wf);
    g.set(yy, yy, wq.recip().map_err(&err)?);
    g.set(al, al, w);
    Ok(g)
}

/// The `Y^{p,q}` metric as a [`MetricField`].
#[derive(Debug, Clone)]
pub struct YpqMetric {
    params: YpqParams,
    domain: CoordBox,
}

impl YpqMetric {
    pub fn new(params: YpqParams) -> Result<Self, MetricError> {
        params.validate()?;
        let domain = params.coord_box();
        Ok(YpqMetric { params, domain })
    }

    pub fn params(&self) -> &YpqParams {
        &self.params
    }
}

pub fn ypq_metric(params: YpqParams) -> Result<YpqMetric, MetricError> {
    YpqMetric::new(params)
}

impl MetricField for YpqMetric {
    fn name(&self) -> String {
        match (self.params.p, self.params.q) {
            (Some(p), Some(q)) => format!("ypq({p},{q})"),
            _ => format!("ypq(a={},ell={})", self.params.a, self.params.ell),
        }
    }

    fn domain(&self) -> &CoordBox {
        &self.domain
    }

    fn components(&self, x: &[Jet2]) -> Result<JetMatrix, GeometryError> {
        ypq_components(self.params.a, self.params.c, x)
    }

    fn killing_axes(&self) -> Vec<usize> {
        vec![0, 2, 4]
    }

    /// `dφ ∧ dθ ∧ dy ∧ dψ ∧ dα`
    fn orientation(&self) -> Vec<usize> {
        vec![0, 1, 3, 2, 4]
    }

    fn einstein_constant(&self) -> Option<f64> {
        Some(4.0)
    }

    fn exact_rational(&self) -> bool {
        self.params.exact_mode()
    }

    fn parameters(&self) -> Map<String, Value> {
        let p = &self.params;
        let mut m = Map::new();
        m.insert("family".into(), json!("ypq"));
        m.insert("p".into(), json!(p.p));
        m.insert("q".into(), json!(p.q));
        m.insert("n".into(), json!(p.n));
        m.insert("a".into(), json!(p.a));
        m.insert("c".into(), json!(p.c));
        m.insert("ell".into(), json!(p.ell));
        m.insert("y1".into(), json!(p.y1));
        m.insert("y2".into(), json!(p.y2));
        m.insert("exact_mode".into(), json!(p.exact_mode()));
        if let Some(e) = &p.exact {
            m.insert(
                "exact".into(),
                json!({
                    "a": e.a.to_string(),
                    "ell": e.ell.to_string(),
                    "y1": e.y1.to_string(),
                    "y2": e.y2.to_string(),
                }),
            );
        }
        m
    }
}

fn check_dim(n: usize) -> Result<(), MetricError> {
    match n {
        2 | 3 | 5 => Ok(()),
        _ => Err(MetricError::UnsupportedDimension(n)),
    }
}

/// `g = I` on `(0, 2π)ⁿ` with every axis periodic.
#[derive(Debug, Clone)]
pub struct FlatTorus {
    domain: CoordBox,
}

pub fn flat_torus(n: usize) -> Result<FlatTorus, MetricError> {
    check_dim(n)?;
    let axes = (0..n)
        .map(|i| Axis::periodic(&format!("x{i}"), 0.0, 2.0 * PI))
        .collect();
    Ok(FlatTorus { domain: CoordBox::new(axes) })
}

impl MetricField for FlatTorus {
    fn name(&self) -> String {
        format!("flat_torus{}", self.domain.dim())
    }

    fn domain(&self) -> &CoordBox {
        &self.domain
    }

    fn components(&self, x: &[Jet2]) -> Result<JetMatrix, GeometryError> {
        let n = x.len();
        let mut g = JetMatrix::zeros(n);
        for i in 0..n {
            g.set(i, i, Jet2::constant(1.0, n));
        }
        Ok(g)
    }

    fn killing_axes(&self) -> Vec<usize> {
        (0..self.domain.dim()).collect()
    }

    fn einstein_constant(&self) -> Option<f64> {
        Some(0.0)
    }

    fn exact_rational(&self) -> bool {
        true
    }

    fn parameters(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("family".into(), json!("flat_torus"));
        m.insert("dim".into(), json!(self.domain.dim()));
        m
    }
}

/// Round sphere of radius `r` in hyperspherical coordinates
/// `(χ₁, …, χ_{n−1}, φ)`, `g = r² (dχ₁² + sin²χ₁ dχ₂² + … )`.
#[derive(Debug, Clone)]
pub struct RoundSphere {
    radius: f64,
    domain: CoordBox,
}

pub fn round_sphere(n: usize, radius: f64) -> Result<RoundSphere, MetricError> {
    check_dim(n)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MetricError::InvalidRadius(radius));
    }
    let mut axes: Vec<Axis> = (0..n - 1)
        .map(|i| Axis::polar(&format!("chi{}", i + 1), 0.0, PI))
        .collect();
    axes.push(Axis::periodic("phi", 0.0, 2.0 * PI));
    Ok(RoundSphere { radius, domain: CoordBox::new(axes) })
}

impl MetricField for RoundSphere {
    fn name(&self) -> String {
        format!("round_sphere{}(r={})", self.domain.dim(), self.radius)
    }

    fn domain(&self) -> &CoordBox {
        &self.domain
    }

    fn components(&self, x: &[Jet2]) -> Result<JetMatrix, GeometryError> {
        let n = x.len();
        let mut g = JetMatrix::zeros(n);
        let mut factor = Jet2::constant(self.radius * self.radius, n);
        for i in 0..n {
            g.set(i, i, factor.clone());
            if i + 1 < n {
                let s = x[i].sin();
                if !(s.value() > 0.0) {
                    return Err(GeometryError::Degenerate {
                        coords: x.iter().map(Jet2::value).collect(),
                        reason: format!("sin(chi{}) <= 0", i + 1),
                    });
                }
                factor = &factor * &s.powi(2);
            }
        }
        Ok(g)
    }

    fn killing_axes(&self) -> Vec<usize> {
        vec![self.domain.dim() - 1]
    }

    fn einstein_constant(&self) -> Option<f64> {
        Some((self.domain.dim() as f64 - 1.0) / (self.radius * self.radius))
    }

    fn parameters(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("family".into(), json!("round_sphere"));
        m.insert("dim".into(), json!(self.domain.dim()));
        m.insert("radius".into(), json!(self.radius));
        m
    }
}

/// Riemannian product, block-diagonal in the concatenated chart.
#[derive(Clone)]
pub struct ProductMetric {
    left: Arc<dyn MetricField>,
    right: Arc<dyn MetricField>,
    domain: CoordBox,
}

pub fn product(left: Arc<dyn MetricField>, right: Arc<dyn MetricField>) -> ProductMetric {
    let mut axes = left.domain().axes.clone();
    axes.extend(right.domain().axes.iter().cloned());
    ProductMetric { left, right, domain: CoordBox::new(axes) }
}

impl MetricField for ProductMetric {
    fn name(&self) -> String {
        format!("{}x{}", self.left.name(), self.right.name())
    }

    fn domain(&self) -> &CoordBox {
        &self.domain
    }

    fn components(&self, x: &[Jet2]) -> Result<JetMatrix, GeometryError> {
        let m = self.left.dim();
        let xl: Vec<f64> = x[..m].iter().map(Jet2::value).collect();
        let xr: Vec<f64> = x[m..].iter().map(Jet2::value).collect();
        let gl = self.left.components(&Jet2::seed(&xl))?;
        let gr = self.right.components(&Jet2::seed(&xr))?;
        Ok(JetMatrix::block_diagonal(&gl, &gr))
    }

    fn killing_axes(&self) -> Vec<usize> {
        let m = self.left.dim();
        let mut axes = self.left.killing_axes();
        axes.extend(self.right.killing_axes().into_iter().map(|a| a + m));
        axes
    }

    fn einstein_constant(&self) -> Option<f64> {
        match (self.left.einstein_constant(), self.right.einstein_constant()) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        }
    }

    fn parameters(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("family".into(), json!("product"));
        m.insert("left".into(), Value::Object(self.left.parameters()));
        m.insert("right".into(), Value::Object(self.right.parameters()));
        m
    }
}

/// Diagonal metric on `T³` with a smooth periodic perturbation
/// `g_ii = 1 + ε sin(x_{i+1} + s_i) cos(x_{i+2} + t_i)`, phases drawn from `seed`.
#[derive(Debug, Clone)]
pub struct PerturbedTorus {
    epsilon: f64,
    phases: [(f64, f64); 3],
    seed: u64,
    domain: CoordBox,
}

pub fn perturbed_torus(epsilon: f64, seed: u64) -> PerturbedTorus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phases = [(0.0, 0.0); 3];
    for p in phases.iter_mut() {
        *p = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
    }
    let axes = (0..3)
        .map(|i| Axis::periodic(&format!("x{i}"), 0.0, 2.0 * PI))
        .collect();
    PerturbedTorus { epsilon, phases, seed, domain: CoordBox::new(axes) }
}

impl MetricField for PerturbedTorus {
    fn name(&self) -> String {
        format!("perturbed_torus3(eps={},seed={})", self.epsilon, self.seed)
    }

    fn domain(&self) -> &CoordBox {
        &self.domain
    }

    fn components(&self, x: &[Jet2]) -> Result<JetMatrix, GeometryError> {
        let mut g = JetMatrix::zeros(3);
        for i in 0..3 {
            let (s, t) = self.phases[i];
            let bump = &(&x[(i + 1) % 3] + s).sin() * &(&x[(i + 2) % 3] + t).cos();
            g.set(i, i, &bump * self.epsilon + 1.0);
        }
        Ok(g)
    }

    fn parameters(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("family".into(), json!("perturbed_torus"));
        m.insert("epsilon".into(), json!(self.epsilon));
        m.insert("seed".into(), json!(self.seed));
        m
    }
}

/// Looks up a reference metric by name: `flat_torusN`, `round_sphereN`
/// (`N ∈ {2, 3, 5}`), `perturbed_torus3`, or `s2xs3`.
pub fn catalog(name: &str, radius: f64) -> Result<Arc<dyn MetricField>, MetricError> {
    let dim_suffix = |prefix: &str| -> Option<Result<usize, MetricError>> {
        name.strip_prefix(prefix).map(|rest| {
            rest.parse::<usize>()
                .map_err(|_| MetricError::UnknownMetric(name.to_string()))
        })
    };
    if name == "perturbed_torus3" {
        return Ok(Arc::new(perturbed_torus(0.3, 7)));
    }
    if name == "s2xs3" {
        return Ok(Arc::new(product(
            Arc::new(round_sphere(2, radius)?),
            Arc::new(round_sphere(3, radius)?),
        )));
    }
    if let Some(n) = dim_suffix("flat_torus") {
        return Ok(Arc::new(flat_torus(n?)?));
    }
    if let Some(n) = dim_suffix("round_sphere") {
        return Ok(Arc::new(round_sphere(n?, radius)?));
    }
    Err(MetricError::UnknownMetric(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{metric_jets, ChartPoint};

    #[test]
    fn y73_parameters_are_exact() {
        let p = solve_ypq(7, 3).unwrap();
        assert_eq!(p.n, Some(13));
        let e = p.exact.as_ref().unwrap();
        assert_eq!(e.y1, ratio(-2, 7));
        assert_eq!(e.y2, ratio(5, 14));
        assert_eq!(e.a, ratio(100, 343));
        assert_eq!(e.ell, ratio(3, 20));
        assert!(cubic(p.a, p.y1).abs() < 1e-15);
        assert!(cubic(p.a, p.y2).abs() < 1e-15);
    }

    #[test]
    fn y21_is_not_exact() {
        let p = solve_ypq(2, 1).unwrap();
        assert!(!p.exact_mode());
        assert!(p.n.is_none());
        assert!(cubic(p.a, p.y1).abs() < 1e-12);
        assert!(cubic(p.a, p.y2).abs() < 1e-12);
        assert!(p.y1 < 0.0 && 0.0 < p.y2 && p.y2 < 1.0);
    }

    #[test]
    fn invalid_pairs() {
        assert!(matches!(solve_ypq(3, 3), Err(MetricError::InvalidPair { .. })));
        assert!(matches!(solve_ypq(4, 2), Err(MetricError::InvalidPair { .. })));
        assert!(matches!(solve_ypq(3, 0), Err(MetricError::InvalidPair { .. })));
        assert!(matches!(solve_ypq(2, 5), Err(MetricError::InvalidPair { .. })));
    }

    #[test]
    fn exact_pairs_up_to_fifty() {
        let mut found = Vec::new();
        for p in 2..=50u64 {
            for q in 1..p {
                if p.gcd(&q) != 1 {
                    continue;
                }
                let params = solve_ypq(p, q).unwrap();
                if let Some(e) = &params.exact {
                    let three = ratio(3, 1);
                    let two = ratio(2, 1);
                    for y in [&e.y1, &e.y2] {
                        let r = &e.a - &three * y * y + &two * y * y * y;
                        assert!(r.is_zero());
                    }
                    assert!(params.y1 < 0.0 && params.y2 > 0.0 && params.y2 < 1.0);
                    found.push((p, q));
                }
            }
        }
        assert!(found.contains(&(7, 3)));
        assert!(found.contains(&(7, 5)));
        assert!(found.contains(&(13, 7)));
    }

    #[test]
    fn a_override() {
        let p = YpqParams::from_a(0.95, 1.0).unwrap();
        assert!(p.p.is_none() && !p.exact_mode());
        assert!(cubic(0.95, p.y1).abs() < 1e-12);
        assert!(matches!(YpqParams::from_a(1.0, 1.0), Err(MetricError::InvalidA(_))));
        assert!(matches!(YpqParams::from_a(0.5, 0.0), Err(MetricError::InvalidEll(_))));
    }

    #[test]
    fn y73_metric_is_symmetric_positive_definite() {
        let m = ypq_metric(solve_ypq(7, 3).unwrap()).unwrap();
        let x = ChartPoint::new(vec![1.0, 1.2, 2.0, 0.1, 0.5]);
        let g = metric_jets(&m, &x).unwrap().values();
        assert_eq!(g, g.transpose());
        // leading principal minors
        for k in 1..=5 {
            let minor = g.view((0, 0), (k, k)).into_owned();
            assert!(minor.determinant() > 0.0, "minor {k}");
        }
    }

    #[test]
    fn degenerate_root_at_a_equal_one() {
        let at = |y: f64| ypq_components(1.0, 1.0, &Jet2::seed(&[1.0, 1.2, 2.0, y, 0.5]));
        assert!(matches!(at(1.0), Err(GeometryError::Degenerate { .. })));
        // q(y) → 0 like (1 − y): g_yy blows up while g_θθ vanishes
        let g = at(1.0 - 1e-8).unwrap().values();
        assert!(g[(3, 3)] > 1e7);
        assert!(g[(1, 1)] < 1e-8);
    }

    #[test]
    fn catalog_lookup() {
        let t = catalog("flat_torus3", 1.0).unwrap();
        assert_eq!(t.dim(), 3);
        assert!(t.domain().axes.iter().all(|a| a.periodic && (a.extent() - 2.0 * PI).abs() < 1e-15));
        assert_eq!(catalog("s2xs3", 1.0).unwrap().dim(), 5);
        assert!(matches!(catalog("round_sphere4", 1.0), Err(MetricError::UnsupportedDimension(4))));
        assert!(matches!(catalog("nope", 1.0), Err(MetricError::UnknownMetric(_))));
        assert!(matches!(round_sphere(3, -1.0), Err(MetricError::InvalidRadius(_))));
    }
}
