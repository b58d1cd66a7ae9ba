//! Double-double arithmetic for the contour sums, whose integrands reach
//! magnitudes around 1e13 on the circle while the integral itself is O(1).

use std::ops::{Add, Mul, Neg, Sub};

use crate::blockcore::{Block2, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e } + Dd::from_f64(q3)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd { re: Dd::ZERO, im: Dd::ZERO };

    pub fn from_c64(z: C64) -> Cdd {
        Cdd { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn scale(self, s: f64) -> Cdd {
        Cdd { re: self.re * Dd::from_f64(s), im: self.im * Dd::from_f64(s) }
    }

    pub fn inv(self) -> Cdd {
        let den = self.re * self.re + self.im * self.im;
        Cdd { re: self.re.div(den), im: (-self.im).div(den) }
    }

    pub fn powu(self, mut n: usize) -> Cdd {
        let mut base = self;
        let mut acc = Cdd::from_c64(C64::new(1.0, 0.0));
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// `exp(2 pi i k / n)` to double-double accuracy: the double value refined
    /// by one Newton step on `w^n = 1`.
    pub fn root_of_unity(k: usize, n: usize) -> Cdd {
        let w = Cdd::from_c64(C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64));
        // w <- w - (w^n - 1) / (n w^{n-1}) = w (1 - (1 - w^{-n}) / n)
        let one = Cdd::from_c64(C64::new(1.0, 0.0));
        let corr = (one - w.powu(n).inv()).scale(1.0 / n as f64);
        w * (one - corr)
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, b: Cdd) -> Cdd {
        Cdd { re: self.re + b.re, im: self.im + b.im }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, b: Cdd) -> Cdd {
        Cdd { re: self.re - b.re, im: self.im - b.im }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, b: Cdd) -> Cdd {
        Cdd { re: self.re * b.re - self.im * b.im, im: self.re * b.im + self.im * b.re }
    }
}

/// 2x2 matrix over `Cdd`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct DdBlock(pub [[Cdd; 2]; 2]);

impl DdBlock {
    pub const ZERO: DdBlock = DdBlock([[Cdd::ZERO; 2]; 2]);

    pub fn from_block(b: &Block2) -> DdBlock {
        DdBlock([
            [Cdd::from_c64(b[(0, 0)]), Cdd::from_c64(b[(0, 1)])],
            [Cdd::from_c64(b[(1, 0)]), Cdd::from_c64(b[(1, 1)])],
        ])
    }

    pub fn to_block(self) -> Block2 {
        Block2::new(
            self.0[0][0].to_c64(),
            self.0[0][1].to_c64(),
            self.0[1][0].to_c64(),
            self.0[1][1].to_c64(),
        )
    }

    pub fn scale(self, s: Cdd) -> DdBlock {
        DdBlock([
            [self.0[0][0] * s, self.0[0][1] * s],
            [self.0[1][0] * s, self.0[1][1] * s],
        ])
    }

    /// `sum_k c_k w^k` by Horner.
    pub fn horner(coeffs: &[Block2], w: Cdd) -> DdBlock {
        coeffs
            .iter()
            .rev()
            .fold(DdBlock::ZERO, |acc, c| acc.scale(w) + DdBlock::from_block(c))
    }
}

impl Add for DdBlock {
    type Output = DdBlock;
    fn add(self, b: DdBlock) -> DdBlock {
        let mut out = self;
        for i in 0..2 {
            for k in 0..2 {
                out.0[i][k] = self.0[i][k] + b.0[i][k];
            }
        }
        out
    }
}

impl Mul for DdBlock {
    type Output = DdBlock;
    fn mul(self, b: DdBlock) -> DdBlock {
        let a = &self.0;
        let c = &b.0;
        DdBlock([
            [a[0][0] * c[0][0] + a[0][1] * c[1][0], a[0][0] * c[0][1] + a[0][1] * c[1][1]],
            [a[1][0] * c[0][0] + a[1][1] * c[1][0], a[1][0] * c[0][1] + a[1][1] * c[1][1]],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_bits_lost_in_double() {
        let big = Dd::from_f64(1e16);
        let one = Dd::from_f64(1.0);
        assert_eq!(((big + one) - big).to_f64(), 1.0);
        let third = one.div(Dd::from_f64(3.0));
        let back = third * Dd::from_f64(3.0) - one;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn roots_of_unity_sum_to_zero() {
        let n = 256;
        let mut acc = Cdd::ZERO;
        for k in 0..n {
            acc = acc + Cdd::root_of_unity(k, n).powu(7);
        }
        assert!(acc.to_c64().norm() < 1e-25);
    }
}
