use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Real 2x2 matrix, row major.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Matrix2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Matrix2 {
    pub const ZERO: Matrix2 = Matrix2::new(0.0, 0.0, 0.0, 0.0);
    pub const IDENTITY: Matrix2 = Matrix2::new(1.0, 0.0, 0.0, 1.0);
    /// Symplectic unit `[[0, 1], [-1, 0]]` multiplying `y'`.
    pub const B: Matrix2 = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    /// Rotation generator `[[0, -1], [1, 0]]`.
    pub const J: Matrix2 = Matrix2::new(0.0, -1.0, 1.0, 0.0);
    /// Reflection `diag(-1, 1)`.
    pub const T: Matrix2 = Matrix2::new(-1.0, 0.0, 0.0, 1.0);

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Matrix2 { m11, m12, m21, m22 }
    }

    pub fn outer(u: [f64; 2], v: [f64; 2]) -> Self {
        Matrix2::new(u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1])
    }

    pub fn transpose(&self) -> Self {
        Matrix2::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.m11 * v[0] + self.m12 * v[1], self.m21 * v[0] + self.m22 * v[1]]
    }

    pub fn max_abs(&self) -> f64 {
        self.m11.abs().max(self.m12.abs()).max(self.m21.abs()).max(self.m22.abs())
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.m11 * self.m11 + self.m12 * self.m12 + self.m21 * self.m21 + self.m22 * self.m22
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        match (r, c) {
            (0, 0) => self.m11,
            (0, 1) => self.m12,
            (1, 0) => self.m21,
            (1, 1) => self.m22,
            _ => panic!("Matrix2 index ({r}, {c}) out of range"),
        }
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(self.m11 + o.m11, self.m12 + o.m12, self.m21 + o.m21, self.m22 + o.m22)
    }
}

impl AddAssign for Matrix2 {
    fn add_assign(&mut self, o: Matrix2) {
        *self = *self + o;
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(self.m11 - o.m11, self.m12 - o.m12, self.m21 - o.m21, self.m22 - o.m22)
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        Matrix2::new(-self.m11, -self.m12, -self.m21, -self.m22)
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

impl Mul<f64> for Matrix2 {
    type Output = Matrix2;
    fn mul(self, s: f64) -> Matrix2 {
        Matrix2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_squares_to_minus_identity() {
        assert_eq!(Matrix2::B * Matrix2::B, -Matrix2::IDENTITY);
        assert_eq!(Matrix2::J, -Matrix2::B);
    }

    #[test]
    fn product_and_transpose() {
        let a = Matrix2::new(1.0, 2.0, 3.0, 4.0);
        let b = Matrix2::new(-1.0, 0.5, 2.0, 1.0);
        assert_eq!(a * b, Matrix2::new(3.0, 2.5, 5.0, 5.5));
        assert_eq!((a * b).transpose(), b.transpose() * a.transpose());
        assert_eq!(a.mul_vec([1.0, -1.0]), [-1.0, -1.0]);
    }
}
