//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar function of
//! `n` chart variables at a fixed point. Arithmetic propagates all three
//! through the exact second-order chain rule, which is all the curvature code
//! needs: Christoffel symbols use first metric derivatives and Riemann uses
//! second ones.
//!
//! The Hessian is stored as a packed upper triangle, so `hess(i, j)` and
//! `hess(j, i)` read the same slot and symmetry holds bit-for-bit.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("division by zero (value {0:e})")]
    DivisionByZero(f64),
    #[error("square root of non-positive value {0:e}")]
    NonPositiveSqrt(f64),
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (r, c) = if i <= j { (i, j) } else { (j, i) };
    r * n - r * (r + 1) / 2 + c
}

/// Value, gradient and Hessian of a scalar in `dim` variables.
#[derive(Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: Vec<f64>,
    // upper triangle, row-major
    hess: Vec<f64>,
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet2")
            .field("value", &self.value)
            .field("grad", &self.grad)
            .field("hess", &self.hessian_matrix())
            .finish()
    }
}

impl Jet2 {
    /// A constant in `dim` variables.
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    /// The coordinate function `x^index` evaluated at `value`.
    pub fn variable(index: usize, value: f64, dim: usize) -> Result<Self, JetError> {
        if index >= dim {
            return Err(JetError::IndexOutOfRange { index, dim });
        }
        let mut jet = Jet2::constant(value, dim);
        jet.grad[index] = 1.0;
        Ok(jet)
    }

    /// Seeds one jet per coordinate of `point`.
    pub fn seed(point: &[f64]) -> Vec<Jet2> {
        let dim = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut jet = Jet2::constant(v, dim);
                jet.grad[i] = 1.0;
                jet
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[packed_index(self.dim(), i, j)]
    }

    pub fn hessian_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.hess(i, j)).collect())
            .collect()
    }

    /// Re-expresses this jet in a larger variable set, mapping local
    /// variable `i` to `offset + i` of `dim`.
    pub fn embed(&self, offset: usize, dim: usize) -> Jet2 {
        let k = self.dim();
        assert!(offset + k <= dim, "embedding out of range");
        let mut out = Jet2::constant(self.value, dim);
        out.grad[offset..offset + k].copy_from_slice(&self.grad);
        for i in 0..k {
            for j in i..k {
                out.hess[packed_index(dim, offset + i, offset + j)] = self.hess(i, j);
            }
        }
        out
    }

    pub fn is_constant(&self) -> bool {
        self.grad.iter().all(|g| *g == 0.0) && self.hess.iter().all(|h| *h == 0.0)
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`.
    fn compose(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let n = self.dim();
        let grad: Vec<f64> = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..n {
            for j in i..n {
                let k = hess.len();
                hess.push(f1 * self.hess[k] + f2 * self.grad[i] * self.grad[j]);
            }
        }
        Jet2 {
            value: f0,
            grad,
            hess,
        }
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn sqrt(&self) -> Result<Jet2, JetError> {
        if !(self.value > 0.0) {
            return Err(JetError::NonPositiveSqrt(self.value));
        }
        let r = self.value.sqrt();
        Ok(self.compose(r, 0.5 / r, -0.25 / (r * self.value)))
    }

    pub fn powi(&self, k: i32) -> Jet2 {
        match k {
            0 => Jet2::constant(1.0, self.dim()),
            1 => self.clone(),
            _ => {
                let x = self.value;
                let kf = k as f64;
                self.compose(
                    x.powi(k),
                    kf * x.powi(k - 1),
                    kf * (kf - 1.0) * x.powi(k - 2),
                )
            }
        }
    }

    pub fn recip(&self) -> Result<Jet2, JetError> {
        if self.value == 0.0 || !self.value.is_finite() {
            return Err(JetError::DivisionByZero(self.value));
        }
        let r = 1.0 / self.value;
        Ok(self.compose(r, -r * r, 2.0 * r * r * r))
    }

    pub fn checked_div(&self, rhs: &Jet2) -> Result<Jet2, JetError> {
        let mut q = self * &rhs.recip()?;
        // keep the value correctly rounded, as plain division would give
        q.value = self.value / rhs.value;
        Ok(q)
    }

    pub fn scale(&self, k: f64) -> Jet2 {
        Jet2 {
            value: self.value * k,
            grad: self.grad.iter().map(|g| g * k).collect(),
            hess: self.hess.iter().map(|h| h * k).collect(),
        }
    }

    fn zip_with(&self, rhs: &Jet2, f: impl Fn(f64, f64) -> f64) -> Jet2 {
        assert_eq!(self.dim(), rhs.dim(), "jet dimension mismatch");
        Jet2 {
            value: f(self.value, rhs.value),
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| f(*a, *b)).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

/// Arithmetic operator selector, mirroring the binary jet operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn jet_arith(a: &Jet2, b: &Jet2, op: JetOp) -> Result<Jet2, JetError> {
    match op {
        JetOp::Add => Ok(a + b),
        JetOp::Sub => Ok(a - b),
        JetOp::Mul => Ok(a * b),
        JetOp::Div => a.checked_div(b),
    }
}

impl<'a> Add<&'a Jet2> for &'a Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a Jet2> for &'a Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a Jet2> for &'a Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        assert_eq!(self.dim(), rhs.dim(), "jet dimension mismatch");
        let n = self.dim();
        let (a, b) = (self.value, rhs.value);
        let grad = self
            .grad
            .iter()
            .zip(&rhs.grad)
            .map(|(ga, gb)| a * gb + b * ga)
            .collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        for i in 0..n {
            for j in i..n {
                let k = hess.len();
                hess.push(
                    a * rhs.hess[k]
                        + b * self.hess[k]
                        + self.grad[i] * rhs.grad[j]
                        + rhs.grad[i] * self.grad[j],
                );
            }
        }
        Jet2 {
            value: a * b,
            grad,
            hess,
        }
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet2> for Jet2 {
            type Output = Jet2;
            fn $m(self, rhs: Jet2) -> Jet2 {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Jet2> for Jet2 {
            type Output = Jet2;
            fn $m(self, rhs: &Jet2) -> Jet2 {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Jet2> for &'a Jet2 {
            type Output = Jet2;
            fn $m(self, rhs: Jet2) -> Jet2 {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Add<f64> for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: f64) -> Jet2 {
        let mut out = self.clone();
        out.value += rhs;
        out
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: f64) -> Jet2 {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: f64) -> Jet2 {
        self + (-rhs)
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: f64) -> Jet2 {
        self + (-rhs)
    }
}

impl Sub<&Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        -rhs + self
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        -rhs + self
    }
}

impl Mul<f64> for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        self.scale(rhs)
    }
}

impl Mul<&Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        rhs.scale(self)
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        rhs.scale(self)
    }
}

impl AddAssign<&Jet2> for Jet2 {
    fn add_assign(&mut self, rhs: &Jet2) {
        assert_eq!(self.dim(), rhs.dim(), "jet dimension mismatch");
        self.value += rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a += b;
        }
        for (a, b) in self.hess.iter_mut().zip(&rhs.hess) {
            *a += b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn coordinate_jets() {
        let x = Jet2::variable(0, 2.0, 2).unwrap();
        assert_eq!(x.value(), 2.0);
        assert_eq!(x.grad(), &[1.0, 0.0]);
        assert!(x.hessian_matrix().iter().flatten().all(|h| *h == 0.0));

        let y = Jet2::variable(1, -0.5, 3).unwrap();
        assert_eq!(y.value(), -0.5);
        assert_eq!(y.grad(), &[0.0, 1.0, 0.0]);

        assert_eq!(
            Jet2::variable(5, 0.0, 3),
            Err(JetError::IndexOutOfRange { index: 5, dim: 3 })
        );
    }

    #[test]
    fn square_and_sine() {
        let x = Jet2::variable(0, 3.0, 1).unwrap();
        let sq = &x * &x;
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.grad(), &[6.0]);
        assert_eq!(sq.hess(0, 0), 2.0);

        let s = Jet2::variable(0, 0.0, 1).unwrap().sin();
        assert_eq!(s.value(), 0.0);
        assert_eq!(s.grad(), &[1.0]);
        assert_eq!(s.hess(0, 0), 0.0);
    }

    #[test]
    fn x_squared_y() {
        let v = Jet2::seed(&[1.0, 2.0]);
        let f = &(&v[0] * &v[0]) * &v[1];
        assert_eq!(f.value(), 2.0);
        assert_eq!(f.grad(), &[4.0, 1.0]);
        assert_eq!(f.hessian_matrix(), vec![vec![4.0, 2.0], vec![2.0, 0.0]]);
    }

    #[test]
    fn x_squared_y_matches_finite_differences() {
        let f = |x: f64, y: f64| x * x * y;
        let h = 1e-5;
        let (x0, y0) = (1.0, 2.0);
        let fd_gx = (f(x0 + h, y0) - f(x0 - h, y0)) / (2.0 * h);
        let fd_gy = (f(x0, y0 + h) - f(x0, y0 - h)) / (2.0 * h);
        let fd_xy = (f(x0 + h, y0 + h) - f(x0 + h, y0 - h) - f(x0 - h, y0 + h)
            + f(x0 - h, y0 - h))
            / (4.0 * h * h);
        let v = Jet2::seed(&[x0, y0]);
        let jet = &(&v[0] * &v[0]) * &v[1];
        assert_close(jet.grad()[0], fd_gx, 1e-8);
        assert_close(jet.grad()[1], fd_gy, 1e-8);
        assert_close(jet.hess(0, 1), fd_xy, 1e-4);
    }

    #[test]
    fn domain_errors() {
        let zero = Jet2::constant(0.0, 2);
        assert!(matches!(zero.recip(), Err(JetError::DivisionByZero(_))));
        assert!(matches!(
            Jet2::constant(-1.0, 2).sqrt(),
            Err(JetError::NonPositiveSqrt(_))
        ));
        let one = Jet2::constant(1.0, 2);
        assert!(jet_arith(&one, &zero, JetOp::Div).is_err());
        assert!(jet_arith(&one, &one, JetOp::Div).is_ok());
    }

    #[test]
    fn pythagorean_identity_at_jet_level() {
        let v = Jet2::seed(&[0.3, -1.1, 2.0]);
        let u = &(&v[0] * &v[1]) + &v[2].sin();
        let (s, c) = (u.sin(), u.cos());
        let one = &(&s * &s) + &(&c * &c);
        assert_close(one.value(), 1.0, 1e-12);
        for g in one.grad() {
            assert_close(*g, 0.0, 1e-12);
        }
        for row in one.hessian_matrix() {
            for h in row {
                assert_close(h, 0.0, 1e-12);
            }
        }
    }

    #[test]
    fn add_then_subtract_roundtrips() {
        let v = Jet2::seed(&[0.7, 1.3]);
        let a = &v[0].sin() * &v[1];
        let b = v[1].powi(3);
        let back = &(&a + &b) - &b;
        assert_close(back.value(), a.value(), 1e-12);
        for (x, y) in back.grad().iter().zip(a.grad()) {
            assert_close(*x, *y, 1e-12);
        }
        for i in 0..2 {
            for j in 0..2 {
                assert_close(back.hess(i, j), a.hess(i, j), 1e-12);
            }
        }
    }
}
