//! Invariant suites shared by the `selftest` command and the test targets.
//!
//! Each check returns the measured worst-case quantity; callers compare it
//! against their tolerance.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cycles::{integrate_cycle, CircleAction, CycleError, CycleOptions};
use crate::geometry::{
    curvature_endo, lower, riemann, riemann_with_injected_fault, validate_with, ChartPoint, CurvaturePack,
    CurvatureReport, GeometryError, MetricField,
};
use crate::jets::Jet2;
use crate::metrics::{
    catalog, flat_torus, perturbed_torus, round_sphere, solve_ypq, ypq_metric, YpqMetric,
};
use crate::quadrature::{integrate_box, QuadratureSpec};
use crate::wcs::{symbol_endo, wcs_integrand, SymbolVariant, WcsFrame};

/// Scalar arithmetic shared by `f64` and [`Jet2`], so one expression can be
/// evaluated both ways.
pub trait Scalar: Clone {
    fn lift(&self, c: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, k: i32) -> Self;
    fn recip(&self) -> Self;
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, k: i32) -> Self {
        f64::powi(*self, k)
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
}

// corpus expressions keep every divisor and radicand bounded away from zero
impl Scalar for Jet2 {
    fn lift(&self, c: f64) -> Self {
        Jet2::constant(c, self.dim())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self.checked_div(o).expect("corpus divisor is nonzero")
    }
    fn sin(&self) -> Self {
        Jet2::sin(self)
    }
    fn cos(&self) -> Self {
        Jet2::cos(self)
    }
    fn sqrt(&self) -> Self {
        Jet2::sqrt(self).expect("corpus radicand is positive")
    }
    fn powi(&self, k: i32) -> Self {
        Jet2::powi(self, k)
    }
    fn recip(&self) -> Self {
        Jet2::recip(self).expect("corpus reciprocal is nonzero")
    }
}

pub const CORPUS_SIZE: usize = 20;

/// Number of variables used by corpus expression `i`.
pub fn corpus_arity(i: usize) -> usize {
    1 + i % 5
}

/// The `i`-th composite test expression, on `x` in `[−1, 1]^arity`.
pub fn corpus_eval<T: Scalar>(i: usize, x: &[T]) -> T {
    let c = |v: f64| x[0].lift(v);
    let v = |j: usize| x[j % x.len()].clone();
    let one = c(1.0);
    let two = c(2.0);
    match i % CORPUS_SIZE {
        0 => v(0).powi(3).add(&v(0).sin()),
        1 => v(0).mul(&v(1)).add(&v(1).cos().mul(&v(0).powi(2))),
        2 => one.add(&v(0).powi(2)).add(&v(1).powi(2)).sqrt().mul(&v(2)),
        3 => v(0).sin().mul(&v(1).cos()).mul(&v(2).sin()).add(&v(3).powi(2)),
        4 => v(0).mul(&v(4)).div(&two.add(&v(2).cos())).sub(&v(1).mul(&v(3))),
        5 => two.add(&v(0).sin()).recip(),
        6 => v(0).powi(2).mul(&v(1)),
        7 => v(0).cos().powi(2).add(&v(1).sin().powi(3)).mul(&v(2).add(&c(3.0))),
        8 => v(0).mul(&v(1)).mul(&v(2)).mul(&v(3)).add(&v(0).div(&c(3.0).add(&v(3)))),
        9 => one.add(&v(0).powi(4)).add(&v(4).powi(2)).sqrt().recip().mul(&v(2).sin()),
        10 => c(4.0).add(&v(0)).powi(-2).add(&v(0).powi(2)),
        11 => v(1).mul(&v(0).sin()).sub(&v(0).mul(&v(1).cos())),
        12 => v(0).add(&v(1)).add(&v(2)).sin().mul(&v(0).sub(&v(2)).cos()),
        13 => v(0).mul(&v(1)).add(&v(2).mul(&v(3))).div(&c(3.0).add(&v(1).powi(2))),
        14 => v(4).sin().mul(&v(3).cos()).mul(&v(2)).add(&v(0).mul(&v(1)).powi(2)),
        15 => c(1.5).add(&v(0).cos()).sqrt().powi(3),
        16 => v(0).mul(&v(1)).sin().add(&v(1).powi(2).mul(&v(0))),
        17 => v(0).sub(&v(1)).powi(2).add(&v(2)).mul(&c(2.0).add(&v(1).sin())),
        18 => v(0).add(&v(3)).cos().div(&c(2.5).sub(&v(2).sin())).mul(&v(1)),
        _ => v(0).mul(&v(1)).mul(&v(2)).mul(&v(3)).mul(&v(4)).add(&v(4).cos().powi(2)),
    }
}

/// Central-difference step for gradients, near the `ε^{1/3}` optimum.
pub const FD_GRADIENT_STEP: f64 = 1e-5;
/// Central-difference step for Hessians, near the `ε^{1/4}` optimum; a
/// gradient-sized step leaves `ε/h²` rounding in the oracle itself.
pub const FD_HESSIAN_STEP: f64 = 1e-4;

/// Worst normwise relative gradient and Hessian errors of jets against
/// central differences.
pub fn jet_fd_errors(points_per_expr: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_g, mut worst_h): (f64, f64) = (0.0, 0.0);
    for i in 0..CORPUS_SIZE {
        let n = corpus_arity(i);
        for _ in 0..points_per_expr {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let jet = corpus_eval(i, &Jet2::seed(&x));
            let f = |dx: &[(usize, f64)]| {
                let mut y = x.clone();
                for &(j, d) in dx {
                    y[j] += d;
                }
                corpus_eval(i, &y)
            };
            let mut gerr: f64 = 0.0;
            let mut gscale: f64 = 0.0;
            let mut herr: f64 = 0.0;
            let mut hscale: f64 = 0.0;
            for a in 0..n {
                let h = FD_GRADIENT_STEP;
                let fd = (f(&[(a, h)]) - f(&[(a, -h)])) / (2.0 * h);
                gerr = gerr.max((fd - jet.grad()[a]).abs());
                gscale = gscale.max(jet.grad()[a].abs());
                let h = FD_HESSIAN_STEP;
                for b in a..n {
                    let fd = if a == b {
                        (f(&[(a, h)]) - 2.0 * f(&[]) + f(&[(a, -h)])) / (h * h)
                    } else {
                        (f(&[(a, h), (b, h)]) - f(&[(a, h), (b, -h)]) - f(&[(a, -h), (b, h)])
                            + f(&[(a, -h), (b, -h)]))
                            / (4.0 * h * h)
                    };
                    herr = herr.max((fd - jet.hess(a, b)).abs());
                    hscale = hscale.max(jet.hess(a, b).abs());
                }
            }
            worst_g = worst_g.max(gerr / gscale.max(1e-300));
            worst_h = worst_h.max(herr / hscale.max(1e-300));
        }
    }
    (worst_g, worst_h)
}

/// True iff every corpus jet has a bit-exactly symmetric Hessian.
pub fn jet_hessians_symmetric(seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..CORPUS_SIZE).all(|i| {
        let x: Vec<f64> = (0..corpus_arity(i)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = corpus_eval(i, &Jet2::seed(&x)).hessian_matrix();
        (0..m.len()).all(|a| (0..m.len()).all(|b| m[a][b].to_bits() == m[b][a].to_bits()))
    })
}

pub fn y73() -> YpqMetric {
    ypq_metric(solve_ypq(7, 3).expect("(7,3) is valid")).expect("(7,3) metric")
}

/// The reference metrics used by the curvature identity suite.
pub fn catalog_metrics() -> Vec<Arc<dyn MetricField>> {
    let mut out: Vec<Arc<dyn MetricField>> = Vec::new();
    for name in [
        "flat_torus2",
        "flat_torus3",
        "flat_torus5",
        "round_sphere2",
        "round_sphere3",
        "round_sphere5",
        "perturbed_torus3",
        "s2xs3",
    ] {
        out.push(catalog(name, 1.0).expect("catalog name"));
    }
    out.push(Arc::new(round_sphere(3, 2.5).expect("sphere")));
    out.push(Arc::new(y73()));
    out
}

pub fn sample_points(metric: &dyn MetricField, count: usize, seed: u64) -> Vec<ChartPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| metric.domain().sample(&mut rng, 0.05)).collect()
}

pub fn curvature_report(
    metric: &dyn MetricField,
    samples: usize,
    seed: u64,
    inject_fault: bool,
) -> Result<CurvatureReport, GeometryError> {
    let pts = sample_points(metric, samples, seed);
    let f = if inject_fault { riemann_with_injected_fault } else { riemann };
    validate_with(metric, &pts, f)
}

/// Worst relative deviation of `R_{jbca}` from
/// `(1/r²)(g_ja g_bc − g_jc g_ba)` on a round sphere.
pub fn sphere_closed_form_error(n: usize, radius: f64, samples: usize, seed: u64) -> Result<f64, GeometryError> {
    let m = round_sphere(n, radius).expect("supported sphere");
    let mut worst: f64 = 0.0;
    for x in sample_points(&m, samples, seed) {
        let p = riemann(&m, &x)?;
        let g = &p.g;
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for a in 0..n {
                        let expect = (g[(j, a)] * g[(b, c)] - g[(j, c)] * g[(b, a)]) / (radius * radius);
                        err = err.max((p.riemann_down.get(j, b, c, a) - expect).abs());
                        scale = scale.max(expect.abs());
                    }
                }
            }
        }
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn random_frame(rng: &mut ChaCha8Rng, k: usize, n: usize) -> WcsFrame {
    let gammadot = random_vec(rng, n);
    let frame = (0..2 * k - 1).map(|_| random_vec(rng, n)).collect();
    WcsFrame::new(k, gammadot, frame)
}

fn skew_defect(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()).amax();
    if s == 0.0 { 0.0 } else { s / m.amax() }
}

fn sym_defect(m: &DMatrix<f64>) -> f64 {
    let s = (m - m.transpose()).amax();
    if s == 0.0 { 0.0 } else { s / m.amax() }
}

/// Worst-case measures for the `k = 2` vanishing statement on one metric.
#[derive(Debug, Clone, Copy, Default)]
pub struct VanishingMeasure {
    /// `max |integrand| / (max |R_jbca|)²`; 0 when both vanish.
    pub integrand_ratio: f64,
    /// Relative asymmetry of the lowered reduced symbol.
    pub symbol_asymmetry: f64,
    /// Relative failure of the lowered curvature endomorphism to be skew.
    pub curvature_skewness: f64,
}

pub fn vanishing_measure(metric: &dyn MetricField, samples: usize, seed: u64) -> Result<VanishingMeasure, GeometryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = VanishingMeasure::default();
    for x in sample_points(metric, samples, seed ^ 0x5eed) {
        let pack = riemann(metric, &x)?;
        let wf = random_frame(&mut rng, 2, metric.dim());
        let v = wcs_integrand(&pack, &wf, SymbolVariant::Reduced, 1.0)?;
        let r = pack.riemann_down.max_abs();
        let ratio = if v == 0.0 { 0.0 } else { v.abs() / (r * r) };
        out.integrand_ratio = out.integrand_ratio.max(ratio);
        out.symbol_asymmetry = out.symbol_asymmetry.max(lowered_symbol_asymmetry(&pack, &wf));
        out.curvature_skewness = out.curvature_skewness.max(skew_defect(&lower(
            &pack,
            &curvature_endo(&pack, &wf.frame[0], &wf.frame[1]),
        )));
    }
    Ok(out)
}

fn lowered_symbol_asymmetry(pack: &CurvaturePack, wf: &WcsFrame) -> f64 {
    sym_defect(&lower(pack, &symbol_endo(pack, &wf.frame[0], &wf.gammadot, SymbolVariant::Reduced)))
}

/// Worst lowered-symbol asymmetry on random `Y^{7,3}` points.
pub fn y73_symbol_asymmetry(samples: usize, seed: u64) -> Result<f64, GeometryError> {
    let m = y73();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for x in sample_points(&m, samples, seed) {
        let pack = riemann(&m, &x)?;
        let wf = random_frame(&mut rng, 3, 5);
        worst = worst.max(lowered_symbol_asymmetry(&pack, &wf));
    }
    Ok(worst)
}

/// Normwise relative gap `max |full − reduced| / max |reduced|` over random
/// points and frames. A pointwise ratio is meaningless at samples where the
/// integrand itself nearly cancels.
pub fn full_reduced_gap(metric: &dyn MetricField, k: usize, samples: usize, seed: u64) -> Result<f64, GeometryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut gap, mut scale): (f64, f64) = (0.0, 0.0);
    for x in sample_points(metric, samples, seed ^ 0xf011) {
        let pack = riemann(metric, &x)?;
        let wf = random_frame(&mut rng, k, metric.dim());
        let full = wcs_integrand(&pack, &wf, SymbolVariant::Full, 1.0)?;
        let reduced = wcs_integrand(&pack, &wf, SymbolVariant::Reduced, 1.0)?;
        gap = gap.max((full - reduced).abs());
        scale = scale.max(reduced.abs());
    }
    Ok(if gap == 0.0 { 0.0 } else { gap / scale })
}

pub fn y73_einstein_residual(samples: usize, seed: u64) -> Result<f64, GeometryError> {
    let m = y73();
    let r = curvature_report(&m, samples, seed, false)?;
    Ok(r.einstein_residual.unwrap_or(f64::INFINITY))
}

pub fn y73_alpha_rotation(metric: &YpqMetric) -> CircleAction {
    let axis = metric.domain().axis_index("alpha").expect("alpha axis");
    CircleAction::unit_rotation(metric, axis).expect("alpha is periodic")
}

/// `max_n |I(a_n) − n I(a_1)| / |n I(a_1)|` over `ns`, on `Y^{7,3}`.
pub fn iterate_scaling_error(nodes: usize, ns: &[u32]) -> Result<f64, CycleError> {
    let m = y73();
    let base = y73_alpha_rotation(&m);
    let quad = QuadratureSpec::uniform(5, nodes);
    let opts = CycleOptions::default();
    let one = integrate_cycle(&m, &base, 3, &quad, &opts)?.value;
    let mut worst: f64 = 0.0;
    for &n in ns {
        let v = integrate_cycle(&m, &base.clone().iterate(n), 3, &quad, &opts)?.value;
        let expect = n as f64 * one;
        let err = if expect == 0.0 { v.abs() } else { (v - expect).abs() / expect.abs() };
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Worst relative error of Gauss-Legendre rules on degree `2n − 1` monomials.
pub fn quadrature_exactness_error() -> f64 {
    let bx = crate::geometry::CoordBox::new(vec![crate::geometry::Axis::open("x", -0.5, 1.5)]);
    let mut worst: f64 = 0.0;
    for n in 1..=12usize {
        let deg = 2 * n as i32 - 1;
        let mut spec = QuadratureSpec::uniform(1, n);
        spec.max_refinements = 0;
        let exact = (1.5f64.powi(deg + 1) - (-0.5f64).powi(deg + 1)) / (deg + 1) as f64;
        let (x, w) = crate::quadrature::gauss_nodes(n, -0.5, 1.5);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
        worst = worst.max((v - exact).abs() / exact.abs());
        if n >= 2 {
            let r = integrate_box(
                |p: &[f64]| Ok::<f64, std::convert::Infallible>(p[0].powi(deg)),
                &bx,
                &spec,
            )
            .expect("valid spec");
            worst = worst.max((r.levels[0] - exact).abs() / exact.abs());
        }
    }
    worst
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn suite(name: &'static str, body: impl FnOnce() -> Result<(bool, String), String>) -> SuiteOutcome {
    let start = Instant::now();
    let (passed, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
    SuiteOutcome { name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

/// Runs every invariant suite. With `inject_fault`, curvature is computed
/// with a deliberately wrong sign so the identity suite must fail.
pub fn run_all(inject_fault: bool) -> Vec<SuiteOutcome> {
    let mut out = Vec::new();
    out.push(suite("jet finite differences", || {
        let (g, h) = jet_fd_errors(5, 11);
        Ok((g <= 1e-6 && h <= 1e-4, format!("gradient {g:.2e} (tol 1e-6), hessian {h:.2e} (tol 1e-4)")))
    }));
    out.push(suite("jet hessian symmetry", || {
        let ok = jet_hessians_symmetric(12);
        Ok((ok, if ok { "bit-exact".into() } else { "asymmetric hessian".into() }))
    }));
    out.push(suite("curvature identities", || {
        let mut failed = Vec::new();
        for m in catalog_metrics() {
            let r = curvature_report(m.as_ref(), 100, 13, inject_fault).map_err(|e| e.to_string())?;
            for f in r.failures() {
                failed.push(format!("{}: {f}", m.name()));
            }
        }
        let ok = failed.is_empty();
        Ok((ok, if ok { "all catalog metrics pass".into() } else { failed.join("; ") }))
    }));
    out.push(suite("constant curvature closed form", || {
        let mut worst: f64 = 0.0;
        for (n, r) in [(2, 1.0), (3, 1.0), (3, 2.5), (5, 1.0)] {
            worst = worst.max(sphere_closed_form_error(n, r, 20, 14).map_err(|e| e.to_string())?);
        }
        Ok((worst <= 1e-9, format!("max relative error {worst:.2e} (tol 1e-9)")))
    }));
    out.push(suite("einstein condition", || {
        let e = y73_einstein_residual(100, 15).map_err(|e| e.to_string())?;
        Ok((e <= 1e-8, format!("Y(7,3) |Ric - 4g| {e:.2e} (tol 1e-8)")))
    }));
    out.push(suite("dim 3 mod 4 vanishing", || {
        let metrics: Vec<Box<dyn MetricField>> = vec![
            Box::new(round_sphere(3, 1.0).map_err(|e| e.to_string())?),
            Box::new(flat_torus(3).map_err(|e| e.to_string())?),
            Box::new(perturbed_torus(0.3, 7)),
        ];
        let mut details = Vec::new();
        let mut ok = true;
        for m in &metrics {
            let v = vanishing_measure(m.as_ref(), 100, 16).map_err(|e| e.to_string())?;
            ok &= v.integrand_ratio <= 1e-10 && v.symbol_asymmetry <= 1e-10 && v.curvature_skewness <= 1e-10;
            details.push(format!(
                "{}: ratio {:.1e}, sym {:.1e}, skew {:.1e}",
                m.name(),
                v.integrand_ratio,
                v.symbol_asymmetry,
                v.curvature_skewness
            ));
        }
        Ok((ok, details.join("; ")))
    }));
    out.push(suite("full equals reduced", || {
        let gap = full_reduced_gap(&y73(), 3, 100, 17).map_err(|e| e.to_string())?;
        Ok((gap <= 1e-10, format!("max relative gap {gap:.2e} (tol 1e-10)")))
    }));
    out.push(suite("iterate scaling", || {
        let e = iterate_scaling_error(16, &[0, 2, 3]).map_err(|e| e.to_string())?;
        Ok((e <= 1e-9, format!("max relative error {e:.2e} (tol 1e-9)")))
    }));
    out.push(suite("quadrature exactness", || {
        let e = quadrature_exactness_error();
        Ok((e <= 1e-13, format!("max relative error {e:.2e} (tol 1e-13)")))
    }));
    out.push(suite("trivial action", || {
        let m = y73();
        let r = integrate_cycle(&m, &CircleAction::Trivial, 3, &QuadratureSpec::uniform(5, 8), &CycleOptions::default())
            .map_err(|e| e.to_string())?;
        Ok((r.value == 0.0, format!("value {}", r.value)))
    }));
    out
}
