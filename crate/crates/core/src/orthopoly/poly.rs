use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::blockcore::{Block2, C64, ONE, ZERO};

/// Dense scalar polynomial, ascending coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarPoly(pub Vec<C64>);

impl ScalarPoly {
    pub fn zero() -> Self {
        ScalarPoly(Vec::new())
    }

    pub fn one() -> Self {
        ScalarPoly(vec![ONE])
    }

    /// `x^k`
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![ZERO; k + 1];
        c[k] = ONE;
        ScalarPoly(c)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.0
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.0.get(k).copied().unwrap_or(ZERO)
    }

    /// Index of the highest nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|z| *z != ZERO)
    }

    pub fn leading(&self) -> C64 {
        self.degree().map(|d| self.0[d]).unwrap_or(ZERO)
    }

    pub fn trimmed(mut self) -> Self {
        let len = self.degree().map_or(0, |d| d + 1);
        self.0.truncate(len);
        self
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.0.iter().rev().fold(ZERO, |acc, c| acc * x + c)
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut c = vec![ZERO; k];
        c.extend_from_slice(&self.0);
        ScalarPoly(c)
    }

    pub fn scale(&self, s: C64) -> Self {
        ScalarPoly(self.0.iter().map(|z| z * s).collect())
    }

    /// Coefficients at even powers as a polynomial in `y = x^2`.
    pub fn even_part(&self) -> Self {
        ScalarPoly(self.0.iter().step_by(2).copied().collect())
    }

    /// Coefficients at odd powers, divided by `x`, as a polynomial in `y = x^2`.
    pub fn odd_part(&self) -> Self {
        ScalarPoly(self.0.iter().skip(1).step_by(2).copied().collect())
    }

    /// `q(x^2)`
    pub fn compose_square(&self) -> Self {
        let mut c = vec![ZERO; (2 * self.0.len()).saturating_sub(1)];
        for (k, z) in self.0.iter().enumerate() {
            c[2 * k] = *z;
        }
        ScalarPoly(c)
    }

    pub fn max_abs_diff(&self, other: &ScalarPoly) -> f64 {
        let len = self.0.len().max(other.0.len());
        (0..len)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &ScalarPoly {
    type Output = ScalarPoly;
    fn add(self, rhs: &ScalarPoly) -> ScalarPoly {
        let len = self.0.len().max(rhs.0.len());
        ScalarPoly((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &ScalarPoly {
    type Output = ScalarPoly;
    fn sub(self, rhs: &ScalarPoly) -> ScalarPoly {
        let len = self.0.len().max(rhs.0.len());
        ScalarPoly((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &ScalarPoly {
    type Output = ScalarPoly;
    fn neg(self) -> ScalarPoly {
        self.scale(-ONE)
    }
}

impl Mul for &ScalarPoly {
    type Output = ScalarPoly;
    fn mul(self, rhs: &ScalarPoly) -> ScalarPoly {
        if self.0.is_empty() || rhs.0.is_empty() {
            return ScalarPoly::zero();
        }
        let mut c = vec![ZERO; self.0.len() + rhs.0.len() - 1];
        for (i, x) in self.0.iter().enumerate() {
            for (k, y) in rhs.0.iter().enumerate() {
                c[i + k] += x * y;
            }
        }
        ScalarPoly(c)
    }
}

/// Column vector `[p_top, p_bot]^T` of scalar polynomials in `x`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VectorPoly {
    pub top: ScalarPoly,
    pub bot: ScalarPoly,
}

impl VectorPoly {
    pub fn new(top: ScalarPoly, bot: ScalarPoly) -> Self {
        VectorPoly { top, bot }
    }

    pub fn zero() -> Self {
        VectorPoly::default()
    }

    /// `P_0 = [1, x]^T`
    pub fn p0() -> Self {
        VectorPoly::new(ScalarPoly::one(), ScalarPoly::monomial(1))
    }

    pub fn component(&self, i: usize) -> &ScalarPoly {
        if i == 0 {
            &self.top
        } else {
            &self.bot
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.top.degree().max(self.bot.degree())
    }

    pub fn shift(&self, k: usize) -> Self {
        VectorPoly::new(self.top.shift(k), self.bot.shift(k))
    }

    pub fn eval(&self, x: C64) -> [C64; 2] {
        [self.top.eval(x), self.bot.eval(x)]
    }

    /// Constant 2x2 matrix applied on the left.
    pub fn left_mul(&self, m: &Block2) -> Self {
        VectorPoly::new(
            &self.top.scale(m[(0, 0)]) + &self.bot.scale(m[(0, 1)]),
            &self.top.scale(m[(1, 0)]) + &self.bot.scale(m[(1, 1)]),
        )
    }

    pub fn add(&self, rhs: &VectorPoly) -> Self {
        VectorPoly::new(&self.top + &rhs.top, &self.bot + &rhs.bot)
    }

    pub fn sub(&self, rhs: &VectorPoly) -> Self {
        VectorPoly::new(&self.top - &rhs.top, &self.bot - &rhs.bot)
    }

    pub fn max_abs_diff(&self, other: &VectorPoly) -> f64 {
        self.top.max_abs_diff(&other.top).max(self.bot.max_abs_diff(&other.bot))
    }
}

/// Matrix polynomial `sum_k coeffs[k] y^k` with 2x2 coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixPoly(pub Vec<Block2>);

impl MatrixPoly {
    pub fn zero() -> Self {
        MatrixPoly(Vec::new())
    }

    pub fn constant(b: Block2) -> Self {
        MatrixPoly(vec![b])
    }

    pub fn coeffs(&self) -> &[Block2] {
        &self.0
    }

    pub fn coeff(&self, k: usize) -> Block2 {
        self.0.get(k).copied().unwrap_or(Block2::ZERO)
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|b| *b != Block2::ZERO)
    }

    pub fn leading(&self) -> Block2 {
        self.degree().map(|d| self.0[d]).unwrap_or(Block2::ZERO)
    }

    pub fn eval(&self, y: C64) -> Block2 {
        self.0.iter().rev().fold(Block2::ZERO, |acc, c| acc * y + *c)
    }

    /// Multiply by `y`.
    pub fn shift(&self) -> Self {
        let mut c = vec![Block2::ZERO];
        c.extend_from_slice(&self.0);
        MatrixPoly(c)
    }

    pub fn left_mul(&self, m: &Block2) -> Self {
        MatrixPoly(self.0.iter().map(|c| *m * *c).collect())
    }

    pub fn right_mul(&self, m: &Block2) -> Self {
        MatrixPoly(self.0.iter().map(|c| *c * *m).collect())
    }

    pub fn add(&self, rhs: &MatrixPoly) -> Self {
        let len = self.0.len().max(rhs.0.len());
        MatrixPoly((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }

    pub fn sub(&self, rhs: &MatrixPoly) -> Self {
        let len = self.0.len().max(rhs.0.len());
        MatrixPoly((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }

    pub fn max_abs_diff(&self, other: &MatrixPoly) -> f64 {
        let len = self.0.len().max(other.0.len());
        (0..len)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm_max())
            .fold(0.0, f64::max)
    }

    /// Scalar entry `(i, j)` as a polynomial in `y`.
    pub fn entry(&self, i: usize, j: usize) -> ScalarPoly {
        ScalarPoly(self.0.iter().map(|b| b[(i, j)]).collect())
    }
}

/// Split `b = [p_top, p_bot]^T` as `V(x^2) P_0(x)`.
pub fn unpack(b: &VectorPoly) -> MatrixPoly {
    let parts = [
        [b.top.even_part(), b.top.odd_part()],
        [b.bot.even_part(), b.bot.odd_part()],
    ];
    let len = parts.iter().flatten().map(|p| p.0.len()).max().unwrap_or(0);
    MatrixPoly(
        (0..len)
            .map(|k| {
                Block2::new(
                    parts[0][0].coeff(k),
                    parts[0][1].coeff(k),
                    parts[1][0].coeff(k),
                    parts[1][1].coeff(k),
                )
            })
            .collect(),
    )
}

/// `V(x^2) P_0(x)`.
pub fn pack(v: &MatrixPoly) -> VectorPoly {
    let row = |i: usize| {
        let even = v.entry(i, 0).compose_square();
        let odd = v.entry(i, 1).compose_square().shift(1);
        &even + &odd
    };
    VectorPoly::new(row(0), row(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn horner_and_product() {
        let p = ScalarPoly(vec![r(1.0), r(2.0)]);
        let q = ScalarPoly(vec![r(-1.0), r(0.0), r(3.0)]);
        let pq = &p * &q;
        let x = C64::new(0.3, -0.7);
        assert!((pq.eval(x) - p.eval(x) * q.eval(x)).norm() < 1e-14);
        assert_eq!(pq.degree(), Some(3));
    }

    #[test]
    fn unpack_b0_gives_gauge() {
        let a1 = C64::new(0.4, 0.1);
        let b0 = VectorPoly::new(ScalarPoly::one(), ScalarPoly(vec![-a1, ONE]));
        let v = unpack(&b0);
        assert_eq!(v.0, vec![Block2::new(ONE, ZERO, -a1, ONE)]);
    }

    #[test]
    fn unpack_x2_x3() {
        let b = VectorPoly::new(ScalarPoly::monomial(2), ScalarPoly::monomial(3));
        let v = unpack(&b);
        assert_eq!(v.0, vec![Block2::ZERO, Block2::IDENTITY]);
        assert_eq!(pack(&v).top.clone().trimmed(), b.top);
        assert_eq!(pack(&v).bot.clone().trimmed(), b.bot);
    }

    #[test]
    fn packed_evaluation_matches() {
        let v = MatrixPoly(vec![
            Block2::from_real(1.0, 2.0, 3.0, 4.0),
            Block2::from_real(-1.0, 0.5, 0.0, 2.0),
        ]);
        let b = pack(&v);
        let x = C64::new(0.7, 0.2);
        let lhs = b.eval(x);
        let rhs = v.eval(x * x).apply([ONE, x]);
        assert!((lhs[0] - rhs[0]).norm() < 1e-14);
        assert!((lhs[1] - rhs[1]).norm() < 1e-14);
    }
}
