use nalgebra::{DMatrix, Schur};
use serde::{Deserialize, Serialize};

use super::block::{Block2, C64, ONE, ZERO};
use super::lattice::{lax_rhs, Coef, LatticeState};
use crate::error::{Error, Result};

/// Block tridiagonal view of the truncated operator.
///
/// Block row `m` (zero based) reads `C_m, B_m, A_m`; `a[m]` is the
/// superdiagonal `A_m`, `b[m]` the diagonal `B_m`, `c[m]` the subdiagonal
/// `C_m` (with `C_0 = 0`). `A_{N-1}` points past the truncation and is kept
/// only so that the scalar coefficient `a_{2N+1}` survives the round trip.
/// `a1` is the gauge coefficient of `M = [[1, 0], [-a_1, 1]]`; it does not
/// enter the operator itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockJacobi {
    pub a1: C64,
    pub a: Vec<Block2>,
    pub b: Vec<Block2>,
    pub c: Vec<Block2>,
}

/// `A_m = [[1, 0], [a_{2m+3}, 1]]`, `B_m = [[b_{2m+1}, a_{2m+2}], [c_{2m+1}, b_{2m+2}]]`,
/// `C_m = [[d_{2m-1}, c_{2m}], [0, d_{2m}]]`.
pub fn lattice_to_blocks(s: &LatticeState) -> BlockJacobi {
    let n = s.n_blocks();
    let mut j = BlockJacobi {
        a1: s.a(1),
        a: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
        c: Vec::with_capacity(n),
    };
    for m in 0..n as i64 {
        j.a.push(Block2::unit_lower(s.a(2 * m + 3)));
        j.b.push(Block2::new(
            s.b(2 * m + 1),
            s.a(2 * m + 2),
            s.c(2 * m + 1),
            s.b(2 * m + 2),
        ));
        j.c.push(Block2::new(s.d(2 * m - 1), s.c(2 * m), ZERO, s.d(2 * m)));
    }
    j
}

/// Inverse of [`lattice_to_blocks`]; checks the triangular structure first.
pub fn blocks_to_lattice(j: &BlockJacobi) -> Result<LatticeState> {
    j.check_structure()?;
    let n = j.n_blocks();
    let mut s = LatticeState::zeros(n);
    s.set(Coef::A, 1, j.a1)?;
    for m in 0..n {
        s.set(Coef::A, 2 * m + 3, j.a[m][(1, 0)])?;
        s.set(Coef::B, 2 * m + 1, j.b[m][(0, 0)])?;
        s.set(Coef::A, 2 * m + 2, j.b[m][(0, 1)])?;
        s.set(Coef::C, 2 * m + 1, j.b[m][(1, 0)])?;
        s.set(Coef::B, 2 * m + 2, j.b[m][(1, 1)])?;
        if m >= 1 {
            s.set(Coef::D, 2 * m - 1, j.c[m][(0, 0)])?;
            s.set(Coef::C, 2 * m, j.c[m][(0, 1)])?;
            s.set(Coef::D, 2 * m, j.c[m][(1, 1)])?;
        }
    }
    Ok(s)
}

impl BlockJacobi {
    pub fn n_blocks(&self) -> usize {
        self.b.len()
    }

    /// Checks the shape and triangular invariants of the blocks.
    pub fn check_structure(&self) -> Result<()> {
        let n = self.n_blocks();
        if n == 0 || self.a.len() != n || self.c.len() != n {
            return Err(Error::StructureViolation(format!(
                "block lists have lengths A: {}, B: {}, C: {}",
                self.a.len(),
                n,
                self.c.len()
            )));
        }
        for (m, blk) in self.a.iter().enumerate() {
            if !blk.is_unit_lower_triangular() {
                return Err(Error::StructureViolation(format!(
                    "A_{m} = {blk} is not unit lower triangular"
                )));
            }
        }
        for (m, blk) in self.c.iter().enumerate() {
            if !blk.is_upper_triangular() {
                return Err(Error::StructureViolation(format!(
                    "C_{m} = {blk} is not upper triangular"
                )));
            }
        }
        if self.c[0].norm_max() > 0.0 {
            return Err(Error::StructureViolation("C_0 must vanish".into()));
        }
        Ok(())
    }

    /// `M = [[1, 0], [-a_1, 1]]`.
    pub fn gauge(&self) -> Block2 {
        Block2::unit_lower(-self.a1)
    }

    /// `D_m = [[0, 0], [c_{2m+1}, 0]]`, the diagonal block of the strictly lower part.
    /// Zero for `m` past the truncation.
    pub fn d_block(&self, m: usize) -> Block2 {
        match self.b.get(m) {
            Some(b) => Block2::new(ZERO, ZERO, b[(1, 0)], ZERO),
            None => Block2::ZERO,
        }
    }

    fn block_at(&self, row: usize, col: usize) -> Block2 {
        if row == col {
            self.b[row]
        } else if col == row + 1 {
            self.a[row]
        } else if row == col + 1 {
            self.c[row]
        } else {
            Block2::ZERO
        }
    }

    /// Dense `2N x 2N` scalar matrix of the truncated operator.
    pub fn dense(&self) -> DMatrix<C64> {
        let n = self.n_blocks();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for row in 0..n {
            for col in row.saturating_sub(1)..(row + 2).min(n) {
                let blk = self.block_at(row, col);
                for i in 0..2 {
                    for k in 0..2 {
                        out[(2 * row + i, 2 * col + k)] = blk[(i, k)];
                    }
                }
            }
        }
        out
    }

    /// Dense strictly lower triangular part `J_-`.
    pub fn dense_lower(&self) -> DMatrix<C64> {
        let mut out = self.dense();
        let dim = out.nrows();
        for i in 0..dim {
            for k in i..dim {
                out[(i, k)] = ZERO;
            }
        }
        out
    }

    /// Apply the truncated operator to a block vector.
    pub fn apply(&self, v: &[[C64; 2]]) -> Vec<[C64; 2]> {
        let n = self.n_blocks();
        (0..n)
            .map(|row| {
                let mut acc = self.b[row].apply(v[row]);
                if row + 1 < n {
                    let w = self.a[row].apply(v[row + 1]);
                    acc = [acc[0] + w[0], acc[1] + w[1]];
                }
                if row >= 1 {
                    let w = self.c[row].apply(v[row - 1]);
                    acc = [acc[0] + w[0], acc[1] + w[1]];
                }
                acc
            })
            .collect()
    }

    /// Block column `col` of `J^k` for `k = 0..=n`, computed by repeated
    /// banded products on the finite section.
    pub fn power_columns(&self, n: usize, col: usize) -> Vec<Vec<Block2>> {
        let dim = self.n_blocks();
        assert!(col < dim, "column block {col} outside truncation {dim}");
        // Two scalar columns packed as one block column.
        let mut cur: Vec<Block2> = vec![Block2::ZERO; dim];
        cur[col] = Block2::IDENTITY;
        let mut out = Vec::with_capacity(n + 1);
        out.push(cur.clone());
        for _ in 0..n {
            let mut next = vec![Block2::ZERO; dim];
            for (row, slot) in next.iter_mut().enumerate() {
                let mut acc = self.b[row] * cur[row];
                if row + 1 < dim {
                    acc += self.a[row] * cur[row + 1];
                }
                if row >= 1 {
                    acc += self.c[row] * cur[row - 1];
                }
                *slot = acc;
            }
            cur = next;
            out.push(cur.clone());
        }
        out
    }

    /// `(J^k)_{00}` for `k = 0..=n` on the finite section.
    pub fn corner_powers(&self, n: usize) -> Vec<Block2> {
        self.power_columns(n, 0).into_iter().map(|col| col[0]).collect()
    }

    /// Infinity (max row sum) norm of the dense finite section.
    pub fn operator_norm_bound(&self) -> f64 {
        let dense = self.dense();
        dense
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `(J^n)_{row, col}` on the truncated operator, restricted to powers whose
/// band cannot reach the truncation edge: a path from block `row` to block
/// `col` touches block `N` only when `n >= 2N - row - col`.
pub fn power_block(j: &BlockJacobi, n: usize, row: usize, col: usize) -> Result<Block2> {
    let dim = j.n_blocks();
    if row >= dim || col >= dim {
        return Err(Error::InvalidInput(format!(
            "block ({row}, {col}) outside truncation of {dim} blocks"
        )));
    }
    let reach = 2 * dim - row - col;
    if n >= reach {
        return Err(Error::TruncationTooSmall(format!(
            "J^{n} at block ({row}, {col}) needs fewer than {reach} steps for {dim} blocks"
        )));
    }
    Ok(j.power_columns(n, col)[n][row])
}

/// Interior test for a quantity at block row `m` with band horizon `n`.
pub fn is_interior(m: usize, n: usize, n_blocks: usize) -> bool {
    m + n < n_blocks && m > n
}

pub fn operator_norm_bound(j: &BlockJacobi) -> f64 {
    j.operator_norm_bound()
}

/// Derivative of a lattice state mapped to the dense matrix layout of `J`.
fn dense_derivative(s: &LatticeState) -> DMatrix<C64> {
    let ds = lax_rhs(s);
    // The constant superdiagonal 1's have zero derivative; lattice_to_blocks puts
    // them back, so remove them again.
    let mut out = lattice_to_blocks(&ds).dense();
    let dim = out.nrows();
    for i in 0..dim.saturating_sub(2) {
        out[(i, i + 2)] = ZERO;
    }
    out
}

/// Per block row max entry of `dJ/dt - (J J_- - J_- J)` on the truncation.
pub fn commutator_residual_rows(s: &LatticeState) -> Vec<f64> {
    let j = lattice_to_blocks(s);
    let big = j.dense();
    let low = j.dense_lower();
    let comm = &big * &low - &low * &big;
    let diff = dense_derivative(s) - comm;
    let dim = diff.nrows();
    (0..s.n_blocks())
        .map(|m| {
            let mut worst = 0.0_f64;
            for i in 2 * m..2 * m + 2 {
                for k in 0..dim {
                    worst = worst.max(diff[(i, k)].norm());
                }
            }
            worst
        })
        .collect()
}

/// Max residual over interior block rows (rows `1..N-2`, zero based), i.e.
/// excluding the first and the last two block rows.
pub fn commutator_residual(s: &LatticeState) -> f64 {
    let rows = commutator_residual_rows(s);
    let n = rows.len();
    rows.iter()
        .enumerate()
        .filter(|&(m, _)| m >= 1 && m + 2 < n.max(2))
        .map(|(_, r)| *r)
        .fold(0.0, f64::max)
}

/// Eigenvalues of a dense complex matrix, sorted by (re, im).
pub fn dense_eigenvalues(m: DMatrix<C64>) -> Result<Vec<C64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m, f64::EPSILON, 10_000).ok_or(Error::EigensolverFailure)?;
    let ev = schur.eigenvalues().ok_or(Error::EigensolverFailure)?;
    let mut out: Vec<C64> = ev.iter().copied().collect();
    sort_spectrum(&mut out);
    Ok(out)
}

pub fn sort_spectrum(ev: &mut [C64]) {
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
}

/// Eigenvalues of the dense `2N x 2N` truncation.
pub fn spectrum(j: &BlockJacobi) -> Result<Vec<C64>> {
    if j.n_blocks() == 0 {
        return Err(Error::InvalidInput("empty truncation".into()));
    }
    dense_eigenvalues(j.dense())
}

/// Identity matrix helper used by dense resolvent computations.
pub(crate) fn dense_identity(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, k| if i == k { ONE } else { ZERO })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn a3_fills_first_superdiagonal_block() {
        let mut s = LatticeState::zeros(3);
        s.set(Coef::A, 3, r(5.0)).unwrap();
        let j = lattice_to_blocks(&s);
        assert_eq!(j.a[0], Block2::from_real(1.0, 0.0, 5.0, 1.0));
        for m in 0..3 {
            assert_eq!(j.b[m], Block2::ZERO);
            assert_eq!(j.c[m], Block2::ZERO);
            if m > 0 {
                assert_eq!(j.a[m], Block2::IDENTITY);
            }
        }
    }

    #[test]
    fn zero_state_gives_shift() {
        let j = lattice_to_blocks(&LatticeState::zeros(4));
        assert!(j.a.iter().all(|a| *a == Block2::IDENTITY));
        assert!(j.b.iter().chain(&j.c).all(|b| *b == Block2::ZERO));
    }

    #[test]
    fn read_off_diagonal_entries() {
        let j = BlockJacobi {
            a1: ZERO,
            a: vec![Block2::IDENTITY; 2],
            b: vec![Block2::from_real(2.0, 0.0, 0.0, 3.0), Block2::ZERO],
            c: vec![Block2::ZERO; 2],
        };
        let s = blocks_to_lattice(&j).unwrap();
        assert_eq!(s.b(1), r(2.0));
        assert_eq!(s.b(2), r(3.0));
        let others = s.values().filter(|z| *z != ZERO).count();
        assert_eq!(others, 2);
    }

    #[test]
    fn non_unit_lower_a_is_rejected() {
        let mut j = lattice_to_blocks(&LatticeState::zeros(2));
        j.a[0][(0, 1)] = r(0.5);
        assert!(matches!(blocks_to_lattice(&j), Err(Error::StructureViolation(_))));
        let mut j = lattice_to_blocks(&LatticeState::zeros(2));
        j.c[1][(1, 0)] = r(0.5);
        assert!(matches!(blocks_to_lattice(&j), Err(Error::StructureViolation(_))));
    }

    #[test]
    fn dense_matches_scalar_layout() {
        let mut s = LatticeState::zeros(2);
        for (k, coef) in Coef::ALL.into_iter().enumerate() {
            for n in 1..=s.seq(coef).len() {
                s.set(coef, n, r((10 * (k + 1) + n) as f64)).unwrap();
            }
        }
        let dense = lattice_to_blocks(&s).dense();
        // row 3 (1-based): d_1 c_2 b_3 a_4
        assert_eq!(dense[(2, 0)], s.d(1));
        assert_eq!(dense[(2, 1)], s.c(2));
        assert_eq!(dense[(2, 2)], s.b(3));
        assert_eq!(dense[(2, 3)], s.a(4));
        assert_eq!(dense[(0, 2)], ONE);
        assert_eq!(dense[(1, 0)], s.c(1));
        assert_eq!(dense[(3, 1)], s.d(2));
        assert_eq!(dense[(3, 0)], ZERO);
    }

    #[test]
    fn power_block_identity_and_linear() {
        let mut s = LatticeState::zeros(3);
        s.set(Coef::B, 1, r(0.3)).unwrap();
        s.set(Coef::A, 2, r(-0.7)).unwrap();
        s.set(Coef::C, 1, r(0.2)).unwrap();
        let j = lattice_to_blocks(&s);
        assert_eq!(power_block(&j, 0, 0, 0).unwrap(), Block2::IDENTITY);
        assert_eq!(power_block(&j, 0, 1, 0).unwrap(), Block2::ZERO);
        assert_eq!(power_block(&j, 1, 0, 0).unwrap(), j.b[0]);
    }

    #[test]
    fn power_block_beyond_reach_fails() {
        let j = lattice_to_blocks(&LatticeState::zeros(3));
        assert!(power_block(&j, 5, 0, 0).is_ok());
        assert!(matches!(power_block(&j, 6, 0, 0), Err(Error::TruncationTooSmall(_))));
        assert!(matches!(power_block(&j, 2, 2, 2), Err(Error::TruncationTooSmall(_))));
    }

    #[test]
    fn norm_bound_examples() {
        let j = lattice_to_blocks(&LatticeState::zeros(3));
        assert_eq!(j.operator_norm_bound(), 1.0);
        let mut s = LatticeState::zeros(3);
        s.set(Coef::B, 1, r(3.0)).unwrap();
        assert_eq!(lattice_to_blocks(&s).operator_norm_bound(), 4.0);
    }

    #[test]
    fn spectrum_of_nilpotent_and_triangular() {
        let ev = spectrum(&lattice_to_blocks(&LatticeState::zeros(2))).unwrap();
        assert!(ev.iter().all(|z| z.norm() < 1e-12));
        let mut s = LatticeState::zeros(2);
        for n in 1..=4 {
            s.set(Coef::B, n, r(n as f64)).unwrap();
        }
        let ev = spectrum(&lattice_to_blocks(&s)).unwrap();
        for (k, z) in ev.iter().enumerate() {
            assert!((z - r((k + 1) as f64)).norm() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn commutator_residual_zero_state() {
        assert_eq!(commutator_residual(&LatticeState::zeros(5)), 0.0);
    }
}
