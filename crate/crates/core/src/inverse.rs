use serde::{Deserialize, Serialize};

use crate::blockcore::{Block2, BlockJacobi, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::functional::{quasidefinite_check, VectorFunctional};
use crate::orthopoly::{ScalarPoly, VectorPoly};

/// Relative pivot threshold of the elimination that solves the orthogonality conditions.
pub const PIVOT_TOL: f64 = 1e-12;

/// Output of [`reconstruct`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    /// Recovered blocks for orders `0..=m_max`.
    pub jacobi: BlockJacobi,
    /// `Delta_m = U(x^{2m} B_m)` for `m = 0..=m_max + 1`.
    pub delta: Vec<Block2>,
    /// Hankel quasi-definiteness flags for orders `0..=m_max + 1`.
    pub condition_flags: Vec<bool>,
    /// Max of `|U(x^{2k} B_m)|` over `k < m`, scaled by `1 / max(1, |U(x^{2m} B_m)|)`.
    pub residual: f64,
    /// The left-orthogonal vector polynomials `B_0 .. B_{m_max + 1}`.
    pub polys: Vec<VectorPoly>,
}

/// Dense partial-pivot Gaussian elimination. Fails when a pivot is below
/// `PIVOT_TOL` times the largest entry of its original row.
fn solve_pivoted(mut a: Vec<Vec<C64>>, mut rhs: Vec<C64>) -> Option<Vec<C64>> {
    let n = rhs.len();
    let row_scale: Vec<f64> =
        a.iter().map(|row| row.iter().map(|z| z.norm()).fold(0.0, f64::max)).collect();
    let mut scale = row_scale.clone();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))?;
        if !(a[piv][col].norm() > PIVOT_TOL * scale[piv]) {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        scale.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == ZERO {
                continue;
            }
            let (top, bottom) = a.split_at_mut(r);
            for (x, &p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
            let v = rhs[col];
            rhs[r] -= f * v;
        }
    }
    let mut x = vec![ZERO; n];
    for r in (0..n).rev() {
        let s: C64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / a[r][r];
    }
    Some(x)
}

/// Monic component of degree `deg` whose lower coefficients solve
/// `sum_i c_i rows[e][i] = -rows[e][deg]` for every condition row `e`.
fn monic_solution(deg: usize, rows: &[Vec<C64>]) -> Option<ScalarPoly> {
    let a: Vec<Vec<C64>> = rows.iter().map(|r| r[..deg].to_vec()).collect();
    let rhs: Vec<C64> = rows.iter().map(|r| -r[deg]).collect();
    let mut c = solve_pivoted(a, rhs)?;
    c.push(ONE);
    Some(ScalarPoly(c))
}

/// Left-orthogonal `B_m = [p_{2m}, p_{2m+1}]^T`: monic components with
/// `U(x^{2k} B_m) = 0` for `k < m`, and the bottom component fixed by
/// `<u^1 + a_1 u^2, x^{2m} p_{2m+1}> = 0`.
pub fn left_orthogonal(u: &VectorFunctional, a1: C64, m: usize) -> Result<VectorPoly> {
    let needed = 4 * m + 1;
    if needed > u.k_max() {
        return Err(Error::DegreeOverflow { needed, available: u.k_max() });
    }
    let fail = || Error::QuasiDefiniteViolation { order: m, partial: None };
    // Condition rows over the monomials x^0 .. x^{deg}.
    let cond = |deg: usize| -> Vec<Vec<C64>> {
        let mut rows = Vec::with_capacity(2 * m + 1);
        for k in 0..m {
            for mu in [&u.mu1, &u.mu2] {
                rows.push((0..=deg).map(|i| mu[2 * k + i]).collect());
            }
        }
        rows
    };
    let top = monic_solution(2 * m, &cond(2 * m)).ok_or_else(fail)?;
    let mut rows = cond(2 * m + 1);
    rows.push((0..=2 * m + 1).map(|i| u.mu1[2 * m + i] + a1 * u.mu2[2 * m + i]).collect());
    let bot = monic_solution(2 * m + 1, &rows).ok_or_else(fail)?;
    Ok(VectorPoly::new(top, bot))
}

/// `Delta_m = U(x^{2m} B_m)` for each supplied `B_m`.
pub fn delta_sequence(u: &VectorFunctional, bs: &[VectorPoly]) -> Result<Vec<Block2>> {
    bs.iter()
        .enumerate()
        .map(|(m, b)| delta_sequence_one(u, b, m))
        .collect()
}

/// Orthogonality defect `max_{k<m} |U(x^{2k} B_m)|` relative to `max(1, |Delta_m|)`.
pub fn orthogonality_defect(u: &VectorFunctional, m: usize, b: &VectorPoly) -> Result<f64> {
    let scale = u.act_shifted(b, 2 * m)?.norm_max().max(1.0);
    let mut worst = 0.0_f64;
    for k in 0..m {
        worst = worst.max(u.act_shifted(b, 2 * k)?.norm_max() / scale);
    }
    Ok(worst)
}

/// Recover `A_m, B_m, C_m` for `m = 0..=m_max` from a normalized functional.
///
/// Order by order, `B_m` is obtained by solving the orthogonality conditions
/// directly on the monomial moments. With `Delta_m = U(x^{2m} B_m)` and
/// `sigma_m = U(x^{2m+2} B_m)`:
/// `C_m = Delta_m Delta_{m-1}^{-1}`, `B_m = (sigma_m - C_m sigma_{m-1}) Delta_m^{-1}`,
/// and `A_m = V_{m,m} V_{m+1,m+1}^{-1}` from the leading blocks.
/// `a1` is the gauge coefficient, which the functional does not determine.
/// Needs `K_max >= 4 m_max + 5`.
pub fn reconstruct(u: &VectorFunctional, a1: C64, m_max: usize) -> Result<ReconstructionReport> {
    if !u.is_normalized() {
        return Err(Error::InvalidInput("reconstruction needs a normalized functional".into()));
    }
    let needed = 4 * m_max + 5;
    if needed > u.k_max() {
        return Err(Error::DegreeOverflow { needed, available: u.k_max() });
    }
    let flags = quasidefinite_check(u, m_max + 1);
    let mut polys: Vec<VectorPoly> = Vec::new();
    let mut delta: Vec<Block2> = Vec::new();
    let mut sigma: Vec<Block2> = Vec::new();
    let mut residual = 0.0_f64;
    for m in 0..=m_max + 1 {
        let step = left_orthogonal(u, a1, m).and_then(|b| {
            let d = delta_sequence_one(u, &b, m)?;
            Ok((b, d))
        });
        let (b, d) = match step {
            Ok(v) => v,
            Err(Error::QuasiDefiniteViolation { .. }) | Err(Error::SingularDelta { .. }) => {
                let partial = partial_report(a1, &polys, &delta, &sigma, &flags, residual);
                return Err(Error::QuasiDefiniteViolation { order: m, partial: partial.map(Box::new) });
            }
            Err(e) => return Err(e),
        };
        residual = residual.max(orthogonality_defect(u, m, &b)?);
        if m <= m_max {
            sigma.push(u.act_shifted(&b, 2 * m + 2)?);
        }
        polys.push(b);
        delta.push(d);
    }
    let jacobi = assemble(a1, &polys, &delta, &sigma, m_max + 1)?;
    Ok(ReconstructionReport { jacobi, delta, condition_flags: flags, residual, polys })
}

fn delta_sequence_one(u: &VectorFunctional, b: &VectorPoly, m: usize) -> Result<Block2> {
    let d = u.act_shifted(b, 2 * m)?;
    if d.try_inverse().is_none() {
        return Err(Error::SingularDelta { order: m });
    }
    Ok(d)
}

fn partial_report(
    a1: C64,
    polys: &[VectorPoly],
    delta: &[Block2],
    sigma: &[Block2],
    flags: &[bool],
    residual: f64,
) -> Option<ReconstructionReport> {
    // Blocks of order m need B_{m+1}.
    let n = polys.len().checked_sub(1)?;
    if n == 0 {
        return None;
    }
    let jacobi = assemble(a1, polys, delta, sigma, n).ok()?;
    Some(ReconstructionReport {
        jacobi,
        delta: delta.to_vec(),
        condition_flags: flags.to_vec(),
        residual,
        polys: polys.to_vec(),
    })
}

/// Leading block `V_{m,m}` of `B_m`: `[[1, 0], [beta_m, 1]]`, `beta_m` the
/// `x^{2m}` coefficient of the bottom component.
fn beta(b: &VectorPoly, m: usize) -> C64 {
    b.bot.coeff(2 * m)
}

fn assemble(
    a1: C64,
    polys: &[VectorPoly],
    delta: &[Block2],
    sigma: &[Block2],
    n_blocks: usize,
) -> Result<BlockJacobi> {
    let mut j = BlockJacobi { a1, a: Vec::new(), b: Vec::new(), c: Vec::new() };
    for m in 0..n_blocks {
        let d_inv = delta[m].try_inverse().ok_or(Error::SingularDelta { order: m })?;
        j.a.push(Block2::unit_lower(beta(&polys[m], m) - beta(&polys[m + 1], m + 1)));
        let (cm, below) = if m == 0 {
            (Block2::ZERO, Block2::ZERO)
        } else {
            let prev_inv = delta[m - 1].try_inverse().ok_or(Error::SingularDelta { order: m - 1 })?;
            let cm = delta[m] * prev_inv;
            (cm, cm * sigma[m - 1])
        };
        j.b.push((sigma[m] - below) * d_inv);
        j.c.push(cm);
    }
    Ok(j)
}
