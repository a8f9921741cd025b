//! Truncated Taylor jets used for forward-mode differentiation.
//!
//! Coordinates are indexed `0..4` as `(t, x, y, z)`. [`Jet1`] carries the
//! gradient, [`Jet2`] additionally carries the symmetric Hessian stored as its
//! upper triangle.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number of spacetime coordinates.
pub const DIM: usize = 4;

/// Packed index of `(i, j)` in the upper-triangular Hessian storage.
#[inline]
pub const fn sym_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    // rows 0..a hold DIM, DIM-1, ... entries
    a * DIM - a * (a + 1) / 2 + b
}

/// Arithmetic shared by plain values and jets.
///
/// Univariate functions go through [`Scalar::chain`], which takes the value
/// and the first two derivatives of the function at the current value.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    /// The coordinate `index` seeded with unit derivative.
    fn coordinate(index: usize, v: f64) -> Self;
    fn value(&self) -> f64;
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self;

    fn scale(self, s: f64) -> Self {
        self * Self::constant(s)
    }

    fn recip(self) -> Self {
        let v = self.value();
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    fn sqrt(self) -> Self {
        let s = self.value().sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    fn sin(self) -> Self {
        let v = self.value();
        self.chain(v.sin(), v.cos(), -v.sin())
    }

    fn cos(self) -> Self {
        let v = self.value();
        self.chain(v.cos(), -v.sin(), -v.cos())
    }

    fn exp(self) -> Self {
        let e = self.value().exp();
        self.chain(e, e, e)
    }

    fn ln(self) -> Self {
        let v = self.value();
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    fn powi(self, n: i32) -> Self {
        let v = self.value();
        let nf = n as f64;
        let f1 = if n == 0 { 0.0 } else { nf * v.powi(n - 1) };
        let f2 = if n == 0 || n == 1 {
            0.0
        } else {
            nf * (nf - 1.0) * v.powi(n - 2)
        };
        self.chain(v.powi(n), f1, f2)
    }

    /// Real power for positive values.
    fn powf(self, p: f64) -> Self {
        let v = self.value();
        self.chain(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn coordinate(_index: usize, v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn chain(self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
}

/// Value and gradient.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet1 {
    pub v: f64,
    pub g: [f64; DIM],
}

impl Jet1 {
    pub fn new(v: f64, g: [f64; DIM]) -> Self {
        Self { v, g }
    }
}

impl Add for Jet1 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.v + o.v, std::array::from_fn(|i| self.g[i] + o.g[i]))
    }
}

impl Sub for Jet1 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.v - o.v, std::array::from_fn(|i| self.g[i] - o.g[i]))
    }
}

impl Neg for Jet1 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v, self.g.map(|x| -x))
    }
}

impl Mul for Jet1 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.v * o.v,
            std::array::from_fn(|i| self.g[i] * o.v + self.v * o.g[i]),
        )
    }
}

impl Div for Jet1 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v / o.v;
        Self::new(q, std::array::from_fn(|i| (self.g[i] - q * o.g[i]) / o.v))
    }
}

impl Scalar for Jet1 {
    fn constant(v: f64) -> Self {
        Self::new(v, [0.0; DIM])
    }
    fn coordinate(index: usize, v: f64) -> Self {
        let mut g = [0.0; DIM];
        g[index] = 1.0;
        Self::new(v, g)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn chain(self, f0: f64, f1: f64, _f2: f64) -> Self {
        Self::new(f0, self.g.map(|x| f1 * x))
    }
    fn scale(self, s: f64) -> Self {
        Self::new(self.v * s, self.g.map(|x| x * s))
    }
}

/// Value, gradient and Hessian (upper triangle, see [`sym_index`]).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; DIM],
    pub h: [f64; 10],
}

impl Jet2 {
    pub fn new(v: f64, g: [f64; DIM], h: [f64; 10]) -> Self {
        Self { v, g, h }
    }

    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.h[sym_index(i, j)]
    }

    /// Drops the Hessian.
    pub fn to_jet1(self) -> Jet1 {
        Jet1::new(self.v, self.g)
    }

    /// Directional first derivative.
    pub fn along(&self, dir: &[f64; DIM]) -> f64 {
        (0..DIM).map(|i| self.g[i] * dir[i]).sum()
    }

    /// Second derivative along a fixed direction.
    pub fn along2(&self, dir: &[f64; DIM]) -> f64 {
        let mut s = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                s += dir[i] * dir[j] * self.hess(i, j);
            }
        }
        s
    }

    /// Partial derivative `d/dx^index` as a first-order jet whose gradient
    /// holds the corresponding Hessian row.
    pub fn partial(&self, index: usize) -> Jet1 {
        Jet1::new(self.g[index], std::array::from_fn(|j| self.hess(index, j)))
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.v + o.v,
            std::array::from_fn(|i| self.g[i] + o.g[i]),
            std::array::from_fn(|i| self.h[i] + o.h[i]),
        )
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.v - o.v,
            std::array::from_fn(|i| self.g[i] - o.g[i]),
            std::array::from_fn(|i| self.h[i] - o.h[i]),
        )
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v, self.g.map(|x| -x), self.h.map(|x| -x))
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut h = [0.0; 10];
        for i in 0..DIM {
            for j in i..DIM {
                let k = sym_index(i, j);
                h[k] = self.h[k] * o.v
                    + self.v * o.h[k]
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i];
            }
        }
        Self::new(
            self.v * o.v,
            std::array::from_fn(|i| self.g[i] * o.v + self.v * o.g[i]),
            h,
        )
    }
}

impl Div for Jet2 {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Scalar for Jet2 {
    fn constant(v: f64) -> Self {
        Self::new(v, [0.0; DIM], [0.0; 10])
    }
    fn coordinate(index: usize, v: f64) -> Self {
        let mut g = [0.0; DIM];
        g[index] = 1.0;
        Self::new(v, g, [0.0; 10])
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut h = [0.0; 10];
        for i in 0..DIM {
            for j in i..DIM {
                let k = sym_index(i, j);
                h[k] = f2 * self.g[i] * self.g[j] + f1 * self.h[k];
            }
        }
        Self::new(f0, self.g.map(|x| f1 * x), h)
    }
    fn scale(self, s: f64) -> Self {
        Self::new(self.v * s, self.g.map(|x| x * s), self.h.map(|x| x * s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_indices_cover_upper_triangle() {
        let mut seen = [false; 10];
        for i in 0..DIM {
            for j in i..DIM {
                let k = sym_index(i, j);
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(k, sym_index(j, i));
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn product_rule_second_order() {
        // f = x * y at (2, 3)
        let x = Jet2::coordinate(1, 2.0);
        let y = Jet2::coordinate(2, 3.0);
        let f = x * y;
        assert_eq!(f.v, 6.0);
        assert_eq!(f.g, [0.0, 3.0, 2.0, 0.0]);
        assert_eq!(f.hess(1, 2), 1.0);
        assert_eq!(f.hess(1, 1), 0.0);
    }

    #[test]
    fn quotient_matches_reciprocal_chain() {
        let x = Jet2::coordinate(1, 1.5);
        let f = Jet2::constant(1.0) / (x * x);
        assert!((f.v - 1.0 / 2.25).abs() < 1e-15);
        assert!((f.g[1] + 2.0 / 1.5f64.powi(3)).abs() < 1e-14);
        assert!((f.hess(1, 1) - 6.0 / 1.5f64.powi(4)).abs() < 1e-13);
    }
}
