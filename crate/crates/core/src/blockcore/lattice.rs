use serde::{Deserialize, Serialize};

use super::block::{C64, ZERO};
use crate::error::{Error, Result};

/// Which of the four coefficient families of the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coef {
    A,
    B,
    C,
    D,
}

impl Coef {
    pub const ALL: [Coef; 4] = [Coef::A, Coef::B, Coef::C, Coef::D];

    pub fn name(self) -> char {
        match self {
            Coef::A => 'a',
            Coef::B => 'b',
            Coef::C => 'c',
            Coef::D => 'd',
        }
    }

    /// Highest stored index for `n` block rows.
    pub fn len_for(self, n_blocks: usize) -> usize {
        match self {
            Coef::A => 2 * n_blocks + 1,
            Coef::B => 2 * n_blocks,
            Coef::C => (2 * n_blocks).saturating_sub(1),
            Coef::D => (2 * n_blocks).saturating_sub(2),
        }
    }

    /// Block row (0-based) whose blocks hold the coefficient with 1-based index `n`.
    /// `a_1` lives in the gauge `M` and is assigned to row 0.
    pub fn block_row(self, n: usize) -> usize {
        match self {
            Coef::A => n.saturating_sub(2) / 2,
            Coef::B => (n - 1) / 2,
            Coef::C => n / 2,
            Coef::D => n.div_ceil(2),
        }
    }
}

/// Truncated coefficients `a_n, b_n, c_n, d_n` (indexed from 1) at time `t`.
///
/// For `n_blocks = N` the state stores `a_1..a_{2N+1}`, `b_1..b_{2N}`,
/// `c_1..c_{2N-1}` and `d_1..d_{2N-2}`; every other index reads as zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    n_blocks: usize,
    pub t: f64,
    a: Vec<C64>,
    b: Vec<C64>,
    c: Vec<C64>,
    d: Vec<C64>,
}

impl LatticeState {
    pub fn zeros(n_blocks: usize) -> Self {
        LatticeState {
            n_blocks,
            t: 0.0,
            a: vec![ZERO; Coef::A.len_for(n_blocks)],
            b: vec![ZERO; Coef::B.len_for(n_blocks)],
            c: vec![ZERO; Coef::C.len_for(n_blocks)],
            d: vec![ZERO; Coef::D.len_for(n_blocks)],
        }
    }

    /// Build from explicit sequences; shorter sequences are zero padded.
    pub fn from_sequences(
        n_blocks: usize,
        a: &[C64],
        b: &[C64],
        c: &[C64],
        d: &[C64],
    ) -> Result<Self> {
        if n_blocks == 0 {
            return Err(Error::InvalidInput("truncation must have at least one block row".into()));
        }
        let mut s = LatticeState::zeros(n_blocks);
        for (coef, src) in Coef::ALL.into_iter().zip([a, b, c, d]) {
            let dst = s.seq_mut(coef);
            if src.len() > dst.len() {
                return Err(Error::InvalidInput(format!(
                    "{} has {} entries but N = {} admits at most {}",
                    coef.name(),
                    src.len(),
                    n_blocks,
                    dst.len()
                )));
            }
            dst[..src.len()].copy_from_slice(src);
        }
        if !s.is_finite() {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(s)
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn seq(&self, coef: Coef) -> &[C64] {
        match coef {
            Coef::A => &self.a,
            Coef::B => &self.b,
            Coef::C => &self.c,
            Coef::D => &self.d,
        }
    }

    pub fn seq_mut(&mut self, coef: Coef) -> &mut [C64] {
        match coef {
            Coef::A => &mut self.a,
            Coef::B => &mut self.b,
            Coef::C => &mut self.c,
            Coef::D => &mut self.d,
        }
    }

    /// Coefficient with 1-based index; anything outside the stored range is zero.
    pub fn get(&self, coef: Coef, n: i64) -> C64 {
        if n < 1 {
            return ZERO;
        }
        self.seq(coef).get(n as usize - 1).copied().unwrap_or(ZERO)
    }

    /// Set a stored coefficient (1-based).
    pub fn set(&mut self, coef: Coef, n: usize, value: C64) -> Result<()> {
        let name = coef.name();
        let len = self.seq(coef).len();
        if n == 0 || n > len {
            return Err(Error::InvalidInput(format!(
                "{name}_{n} is outside the stored range 1..={len}"
            )));
        }
        self.seq_mut(coef)[n - 1] = value;
        Ok(())
    }

    pub fn a(&self, n: i64) -> C64 {
        self.get(Coef::A, n)
    }
    pub fn b(&self, n: i64) -> C64 {
        self.get(Coef::B, n)
    }
    pub fn c(&self, n: i64) -> C64 {
        self.get(Coef::C, n)
    }
    pub fn d(&self, n: i64) -> C64 {
        self.get(Coef::D, n)
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// All stored values in the order a, b, c, d.
    pub fn values(&self) -> impl Iterator<Item = C64> + '_ {
        self.a.iter().chain(&self.b).chain(&self.c).chain(&self.d).copied()
    }

    pub fn flat_len(&self) -> usize {
        self.a.len() + self.b.len() + self.c.len() + self.d.len()
    }

    pub fn to_flat(&self) -> Vec<C64> {
        self.values().collect()
    }

    pub fn from_flat(n_blocks: usize, t: f64, flat: &[C64]) -> Self {
        let mut s = LatticeState::zeros(n_blocks);
        s.t = t;
        assert_eq!(flat.len(), s.flat_len(), "flat state has the wrong length");
        let mut offset = 0;
        for coef in Coef::ALL {
            let dst = s.seq_mut(coef);
            let len = dst.len();
            dst.copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry distance between two states of equal shape.
    pub fn distance(&self, other: &LatticeState) -> f64 {
        assert_eq!(self.n_blocks, other.n_blocks);
        self.values()
            .zip(other.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Column labels `a_1 .. d_{2N-2}` in storage order.
    pub fn labels(&self) -> Vec<String> {
        Coef::ALL
            .iter()
            .flat_map(|&coef| (1..=self.seq(coef).len()).map(move |n| format!("{}_{n}", coef.name())))
            .collect()
    }
}

/// Right-hand side of the lattice equations, evaluated componentwise with
/// out-of-range coefficients read as zero.
pub fn lax_rhs(s: &LatticeState) -> LatticeState {
    let mut out = LatticeState::zeros(s.n_blocks);
    out.t = s.t;
    for n in 1..=s.a.len() as i64 {
        out.a[n as usize - 1] = s.c(n) - s.c(n - 2);
    }
    for n in 1..=s.b.len() as i64 {
        out.b[n as usize - 1] = s.c(n) * s.a(n + 1) - s.c(n - 1) * s.a(n) + s.d(n) - s.d(n - 2);
    }
    for n in 1..=s.c.len() as i64 {
        out.c[n as usize - 1] =
            s.c(n) * (s.b(n + 1) - s.b(n)) + s.d(n) * s.a(n + 2) - s.d(n - 1) * s.a(n);
    }
    for n in 1..=s.d.len() as i64 {
        out.d[n as usize - 1] = s.d(n) * (s.b(n + 2) - s.b(n));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_rows_match_block_layout() {
        // B_1 = [[b_3, a_4], [c_3, b_4]], C_1 = [[d_1, c_2], [0, d_2]], A_1 carries a_5.
        assert_eq!(Coef::B.block_row(3), 1);
        assert_eq!(Coef::B.block_row(4), 1);
        assert_eq!(Coef::A.block_row(4), 1);
        assert_eq!(Coef::A.block_row(5), 1);
        assert_eq!(Coef::A.block_row(1), 0);
        assert_eq!(Coef::C.block_row(3), 1);
        assert_eq!(Coef::C.block_row(2), 1);
        assert_eq!(Coef::D.block_row(1), 1);
        assert_eq!(Coef::D.block_row(2), 1);
    }

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn lengths_follow_truncation() {
        let s = LatticeState::zeros(3);
        assert_eq!(s.seq(Coef::A).len(), 7);
        assert_eq!(s.seq(Coef::B).len(), 6);
        assert_eq!(s.seq(Coef::C).len(), 5);
        assert_eq!(s.seq(Coef::D).len(), 4);
        assert_eq!(s.a(0), ZERO);
        assert_eq!(s.d(-1), ZERO);
        assert_eq!(s.a(8), ZERO);
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let s = LatticeState::zeros(4);
        assert_eq!(lax_rhs(&s).max_abs(), 0.0);
    }

    #[test]
    fn single_d1_drives_b1_and_b3() {
        let mut s = LatticeState::zeros(4);
        s.set(Coef::D, 1, r(1.0)).unwrap();
        let ds = lax_rhs(&s);
        for coef in Coef::ALL {
            for (i, v) in ds.seq(coef).iter().enumerate() {
                let n = i + 1;
                let expected = match (coef, n) {
                    (Coef::B, 1) => 1.0,
                    (Coef::B, 3) => -1.0,
                    _ => 0.0,
                };
                assert_eq!(*v, r(expected), "{}_{n}", coef.name());
            }
        }
    }

    #[test]
    fn linear_b_with_c2() {
        let n_blocks = 4;
        let mut s = LatticeState::zeros(n_blocks);
        for n in 1..=2 * n_blocks {
            s.set(Coef::B, n, r(n as f64)).unwrap();
        }
        s.set(Coef::C, 2, r(1.0)).unwrap();
        let ds = lax_rhs(&s);
        for coef in Coef::ALL {
            for (i, v) in ds.seq(coef).iter().enumerate() {
                let n = i + 1;
                let expected = match (coef, n) {
                    (Coef::C, 2) => 1.0,
                    (Coef::A, 2) => 1.0,
                    (Coef::A, 4) => -1.0,
                    _ => 0.0,
                };
                assert_eq!(*v, r(expected), "{}_{n}", coef.name());
            }
        }
    }

    #[test]
    fn flat_roundtrip() {
        let mut s = LatticeState::zeros(2);
        s.set(Coef::A, 5, r(2.0)).unwrap();
        s.set(Coef::D, 2, C64::new(0.0, 1.0)).unwrap();
        s.t = 0.5;
        let back = LatticeState::from_flat(2, 0.5, &s.to_flat());
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_oversized_sequences() {
        let err = LatticeState::from_sequences(1, &[], &[r(1.0); 3], &[], &[]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }
}
