use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative tolerance used by the structural predicates.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// A 2x2 complex matrix. Entry `(i, j)` is row `i`, column `j`, zero based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Block2(pub [[C64; 2]; 2]);

impl Block2 {
    pub const ZERO: Block2 = Block2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Block2 = Block2([[ONE, ZERO], [ZERO, ONE]]);

    pub const fn new(e11: C64, e12: C64, e21: C64, e22: C64) -> Self {
        Block2([[e11, e12], [e21, e22]])
    }

    pub fn from_real(e11: f64, e12: f64, e21: f64, e22: f64) -> Self {
        Block2::new(e11.into(), e12.into(), e21.into(), e22.into())
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Block2::new(d1, ZERO, ZERO, d2)
    }

    pub fn scalar(s: C64) -> Self {
        Block2::diag(s, s)
    }

    /// `[[1, 0], [l, 1]]`
    pub fn unit_lower(l: C64) -> Self {
        Block2::new(ONE, ZERO, l, ONE)
    }

    pub fn e11(&self) -> C64 {
        self.0[0][0]
    }
    pub fn e12(&self) -> C64 {
        self.0[0][1]
    }
    pub fn e21(&self) -> C64 {
        self.0[1][0]
    }
    pub fn e22(&self) -> C64 {
        self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        Block2::new(self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1])
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    /// Infinity (max row sum) norm.
    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .map(|row| row[0].norm() + row[1].norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Inverse, or `None` when `|det|` is below `1e-14` times the squared entry scale.
    pub fn try_inverse(&self) -> Option<Self> {
        let scale = self.norm_max();
        let det = self.det();
        if scale == 0.0 || det.norm() <= 1e-14 * scale * scale || !det.is_finite() {
            return None;
        }
        let inv = det.inv();
        Some(Block2::new(
            self.0[1][1] * inv,
            -self.0[0][1] * inv,
            -self.0[1][0] * inv,
            self.0[0][0] * inv,
        ))
    }

    fn tol(&self) -> f64 {
        STRUCTURE_TOL * self.norm_max().max(1.0)
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.0[1][0].norm() <= self.tol()
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.0[0][1].norm() <= self.tol()
    }

    pub fn is_unit_lower_triangular(&self) -> bool {
        let tol = self.tol();
        self.0[0][1].norm() <= tol
            && (self.0[0][0] - ONE).norm() <= tol
            && (self.0[1][1] - ONE).norm() <= tol
    }

    /// `self * rhs - rhs * self`
    pub fn commutator(&self, rhs: &Block2) -> Block2 {
        *self * *rhs - *rhs * *self
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Block2 {
        Block2([
            [f(self.0[0][0]), f(self.0[0][1])],
            [f(self.0[1][0]), f(self.0[1][1])],
        ])
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn powi(&self, n: usize) -> Block2 {
        (0..n).fold(Block2::IDENTITY, |acc, _| acc * *self)
    }
}

impl Index<(usize, usize)> for Block2 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Block2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Add for Block2 {
    type Output = Block2;
    fn add(self, rhs: Block2) -> Block2 {
        Block2([
            [self.0[0][0] + rhs.0[0][0], self.0[0][1] + rhs.0[0][1]],
            [self.0[1][0] + rhs.0[1][0], self.0[1][1] + rhs.0[1][1]],
        ])
    }
}

impl Sub for Block2 {
    type Output = Block2;
    fn sub(self, rhs: Block2) -> Block2 {
        Block2([
            [self.0[0][0] - rhs.0[0][0], self.0[0][1] - rhs.0[0][1]],
            [self.0[1][0] - rhs.0[1][0], self.0[1][1] - rhs.0[1][1]],
        ])
    }
}

impl Neg for Block2 {
    type Output = Block2;
    fn neg(self) -> Block2 {
        self.map(|z| -z)
    }
}

impl Mul for Block2 {
    type Output = Block2;
    fn mul(self, rhs: Block2) -> Block2 {
        let a = &self.0;
        let b = &rhs.0;
        Block2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Mul<C64> for Block2 {
    type Output = Block2;
    fn mul(self, s: C64) -> Block2 {
        self.map(|z| z * s)
    }
}

impl Mul<f64> for Block2 {
    type Output = Block2;
    fn mul(self, s: f64) -> Block2 {
        self.map(|z| z * s)
    }
}

impl Mul<Block2> for C64 {
    type Output = Block2;
    fn mul(self, b: Block2) -> Block2 {
        b * self
    }
}

impl Mul<Block2> for f64 {
    type Output = Block2;
    fn mul(self, b: Block2) -> Block2 {
        b * self
    }
}

impl AddAssign for Block2 {
    fn add_assign(&mut self, rhs: Block2) {
        *self = *self + rhs;
    }
}

impl SubAssign for Block2 {
    fn sub_assign(&mut self, rhs: Block2) {
        *self = *self - rhs;
    }
}

impl MulAssign<C64> for Block2 {
    fn mul_assign(&mut self, s: C64) {
        *self = *self * s;
    }
}

impl Sum for Block2 {
    fn sum<I: Iterator<Item = Block2>>(iter: I) -> Block2 {
        iter.fold(Block2::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Block2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]
        )
    }
}
