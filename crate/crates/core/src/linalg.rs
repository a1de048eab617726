//! Fixed-size vectors and 2x2 tensors used for 1D and 2D problems.
//!
//! Storage is always two components; in one dimension the second slot stays zero.

use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::num;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vector(pub [f64; 2]);

/// Row-major 2x2 tensor, `self.0[i][j]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tensor(pub [[f64; 2]; 2]);

impl Vector {
    pub const ZERO: Vector = Vector([0.0; 2]);

    pub fn new(x: f64, y: f64) -> Self {
        Vector([x, y])
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1]
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        num::sqrt(self.norm_sq())
    }

    pub fn outer(&self, other: &Vector) -> Tensor {
        let a = self.0;
        let b = other.0;
        Tensor([[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Tensor {
    pub const ZERO: Tensor = Tensor([[0.0; 2]; 2]);

    /// Identity restricted to the first `dim` coordinates.
    pub fn identity(dim: usize) -> Self {
        let mut t = Tensor::ZERO;
        for i in 0..dim.min(2) {
            t.0[i][i] = 1.0;
        }
        t
    }

    pub fn transpose(&self) -> Self {
        let a = self.0;
        Tensor([[a[0][0], a[1][0]], [a[0][1], a[1][1]]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Frobenius inner product `A:B`.
    pub fn ddot(&self, other: &Tensor) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += self.0[i][j] * other.0[i][j];
            }
        }
        s
    }

    pub fn norm_sq(&self) -> f64 {
        self.ddot(self)
    }

    pub fn norm(&self) -> f64 {
        num::sqrt(self.norm_sq())
    }

    pub fn sym(&self) -> Self {
        (*self + self.transpose()) * 0.5
    }

    /// `A + Aᵗ - (2/N) tr(A) I` in `dim` dimensions.
    pub fn traceless(&self, dim: usize) -> Self {
        let n = dim as f64;
        *self + self.transpose() - Tensor::identity(dim) * (2.0 / n * self.trace())
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        let a = self.0;
        Vector([
            a[0][0] * v.0[0] + a[0][1] * v.0[1],
            a[1][0] * v.0[0] + a[1][1] * v.0[1],
        ])
    }

    /// True when every entry outside the leading `dim x dim` block is zero.
    pub fn fits_dim(&self, dim: usize) -> bool {
        (0..2).all(|i| (0..2).all(|j| (i < dim && j < dim) || self.0[i][j] == 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, o: Vector) -> Vector {
        Vector([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, o: Vector) -> Vector {
        Vector([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector([-self.0[0], -self.0[1]])
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        Vector([self.0[0] * s, self.0[1] * s])
    }
}

impl AddAssign for Vector {
    fn add_assign(&mut self, o: Vector) {
        self.0[0] += o.0[0];
        self.0[1] += o.0[1];
    }
}

impl SubAssign for Vector {
    fn sub_assign(&mut self, o: Vector) {
        self.0[0] -= o.0[0];
        self.0[1] -= o.0[1];
    }
}

impl Add for Tensor {
    type Output = Tensor;
    fn add(self, o: Tensor) -> Tensor {
        let mut r = self;
        r += o;
        r
    }
}

impl Sub for Tensor {
    type Output = Tensor;
    fn sub(self, o: Tensor) -> Tensor {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] -= o.0[i][j];
            }
        }
        r
    }
}

impl Mul<f64> for Tensor {
    type Output = Tensor;
    fn mul(self, s: f64) -> Tensor {
        let mut r = self;
        for row in r.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        r
    }
}

impl AddAssign for Tensor {
    fn add_assign(&mut self, o: Tensor) {
        for i in 0..2 {
            for j in 0..2 {
                self.0[i][j] += o.0[i][j];
            }
        }
    }
}
