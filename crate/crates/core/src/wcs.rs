//! Pointwise Wodzicki-Chern-Simons integrand.
//!
//! The relative form of the `s = 1` and `L²` connections only sees the order
//! `−1` symbol of their difference, so everything reduces to two
//! endomorphisms built from the Riemann tensor at a point: the symbol term
//! [`symbol_endo`] and the curvature [`curvature_endo`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::geometry::{curvature_endo, CurvaturePack, GeometryError};

/// Which form of the symbol endomorphism to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolVariant {
    /// `(−2R_{cdb}^a − R_{bdc}^a + R_{cbd}^a) X^c γ̇^d`
    Full,
    /// `(−R_{bdc}^a + R_{cbd}^a) X^c γ̇^d`
    Reduced,
}

impl SymbolVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolVariant::Full => "full",
            SymbolVariant::Reduced => "reduced",
        }
    }
}

impl std::str::FromStr for SymbolVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(SymbolVariant::Full),
            "reduced" => Ok(SymbolVariant::Reduced),
            other => Err(format!("unknown symbol variant '{other}' (expected full or reduced)")),
        }
    }
}

/// Loop velocity plus the `2k − 1` tangent vectors the form is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct WcsFrame {
    pub k: usize,
    pub gammadot: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
}

impl WcsFrame {
    pub fn new(k: usize, gammadot: Vec<f64>, frame: Vec<Vec<f64>>) -> Self {
        WcsFrame { k, gammadot, frame }
    }

    /// Coordinate frame `∂_{order[0]}, ∂_{order[1]}, …`.
    pub fn coordinate(k: usize, gammadot: Vec<f64>, order: &[usize]) -> Self {
        let n = gammadot.len();
        let frame = order
            .iter()
            .map(|&i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        WcsFrame { k, gammadot, frame }
    }
}

/// The order `−1` symbol coefficient `M^a_b` for the vector `X`.
pub fn symbol_endo(
    pack: &CurvaturePack,
    x: &[f64],
    gammadot: &[f64],
    variant: SymbolVariant,
) -> DMatrix<f64> {
    let n = pack.dim;
    let r = &pack.riemann_up;
    let mut m = DMatrix::zeros(n, n);
    for c in 0..n {
        if x[c] == 0.0 {
            continue;
        }
        for d in 0..n {
            let w = x[c] * gammadot[d];
            if w == 0.0 {
                continue;
            }
            for b in 0..n {
                for a in 0..n {
                    let mut v = r.get(c, b, d, a) - r.get(b, d, c, a);
                    if variant == SymbolVariant::Full {
                        v -= 2.0 * r.get(c, d, b, a);
                    }
                    m[(a, b)] += v * w;
                }
            }
        }
    }
    m
}

/// All permutations of `0..m` with their signs, in lexicographic order.
pub fn signed_permutations(m: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            // moving element i to the front costs i transpositions
            let s = if i % 2 == 0 { sign } else { -sign };
            rec(prefix, rest, s, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..m).collect(), 1.0, &mut out);
    out
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// `s · 2/(2k−1)! Σ_σ sgn(σ) tr[B(X_σ1) Ω(X_σ2, X_σ3) ⋯ Ω(X_σ(2k−2), X_σ(2k−1))]`.
///
/// `Ω` is antisymmetric in its arguments, so only permutations with ascending
/// pairs are enumerated and the sum is multiplied by `2^{k−1}`.
pub fn wcs_integrand(
    pack: &CurvaturePack,
    wf: &WcsFrame,
    variant: SymbolVariant,
    s_scale: f64,
) -> Result<f64, GeometryError> {
    let n = pack.dim;
    if wf.k < 2 {
        return Err(GeometryError::DimensionMismatch { expected: 3, found: n });
    }
    let m = 2 * wf.k - 1;
    if n != m {
        return Err(GeometryError::DimensionMismatch { expected: m, found: n });
    }
    if wf.frame.len() != m || wf.gammadot.len() != n || wf.frame.iter().any(|v| v.len() != n) {
        return Err(GeometryError::DimensionMismatch { expected: m, found: wf.frame.len() });
    }

    let symbols: Vec<DMatrix<f64>> = wf
        .frame
        .iter()
        .map(|x| symbol_endo(pack, x, &wf.gammadot, variant))
        .collect();
    let mut omega = vec![None; m * m];
    for i in 0..m {
        for j in i + 1..m {
            omega[i * m + j] = Some(curvature_endo(pack, &wf.frame[i], &wf.frame[j]));
        }
    }

    let mut terms = Vec::new();
    for (perm, sign) in signed_permutations(m) {
        if !perm[1..].chunks(2).all(|p| p[0] < p[1]) {
            continue;
        }
        let mut prod = omega[perm[1] * m + perm[2]].clone().expect("ascending pair");
        for pair in perm[3..].chunks(2) {
            prod *= omega[pair[0] * m + pair[1]].as_ref().expect("ascending pair");
        }
        // tr(B P) = Σ B_ab P_ba
        let b = &symbols[perm[0]];
        let tr = b.component_mul(&prod.transpose()).sum();
        terms.push(sign * tr);
    }
    let sum: f64 = terms.iter().sum();
    let pairs = f64::powi(2.0, wf.k as i32 - 1);
    Ok(s_scale * 2.0 / factorial(m) * pairs * sum)
}
