use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::blockcore::jacobi::dense_identity;
use crate::blockcore::{Block2, BlockJacobi, C64, ZERO};
use crate::error::{Error, Result};
use crate::functional::VectorFunctional;

use super::dd::{Cdd, DdBlock};
use super::poly::MatrixPoly;
use super::recurrence::{g_sequence, matrix_sequence};

/// Series evaluations require `|z|` above this multiple of the growth radius.
pub const SERIES_SAFETY: f64 = 1.5;

/// Circle `center + radius e^{i theta}` sampled at `nodes` equispaced angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
}

impl ContourSpec {
    pub fn circle(radius: f64, nodes: usize) -> Self {
        ContourSpec { center: ZERO, radius, nodes }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput(format!("contour radius {} must be positive", self.radius)));
        }
        if self.nodes < 64 || !self.nodes.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "contour needs an even node count of at least 64, got {}",
                self.nodes
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.nodes).map(move |k| {
            self.center + C64::from_polar(self.radius, 2.0 * PI * k as f64 / self.nodes as f64)
        })
    }
}

/// Default absolute tolerance for series tails.
pub const DEFAULT_TOL: f64 = 1e-15;

/// Partial sums of `F(z) = sum_n U_n / z^{n+1}`, stopped once the geometric
/// tail bound `K q^n / (|z| (1 - q))` drops below `tol`, where `q = r / |z|`,
/// `r` is the growth radius of `u` and `K = max_n |U_n| / r^n`.
pub fn markov_function(u: &VectorFunctional, z: C64, tol: f64) -> Result<Block2> {
    let blocks = u.block_moments();
    series_sum(&blocks, u.growth_radius(), z, tol, "moment")
}

fn series_sum(blocks: &[Block2], radius: f64, z: C64, tol: f64, what: &str) -> Result<Block2> {
    let n = series_terms(blocks, radius, z.norm(), tol, what)?;
    let zinv = z.inv();
    let mut acc = Block2::ZERO;
    let mut w = zinv;
    for b in &blocks[..n] {
        acc += *b * w;
        w *= zinv;
    }
    Ok(acc)
}

/// Number of leading terms needed for the tail bound to drop below `tol`.
fn series_terms(blocks: &[Block2], radius: f64, az: f64, tol: f64, what: &str) -> Result<usize> {
    if radius > 0.0 && az <= SERIES_SAFETY * radius {
        return Err(Error::SeriesNotConverged(format!(
            "|z| = {az} is not above {SERIES_SAFETY} times the growth radius {radius}"
        )));
    }
    if radius == 0.0 {
        // Only a finite number of nonzero terms can be certified: sum what is stored.
        return Ok(blocks.len());
    }
    let q = radius / az;
    let k = blocks
        .iter()
        .enumerate()
        .map(|(n, b)| b.norm_max() / radius.powi(n as i32))
        .fold(0.0, f64::max);
    let mut qn = 1.0;
    for n in 1..=blocks.len() {
        qn *= q;
        if k * qn / (az * (1.0 - q)) < tol {
            return Ok(n);
        }
    }
    Err(Error::SeriesNotConverged(format!(
        "{} {what} blocks do not reach tail {tol:e} at |z| = {az}",
        blocks.len()
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeylMethod {
    Series,
    FiniteSection,
}

/// `R_J(z)`: the `(0,0)` block of the resolvent, either as the series
/// `sum_n (J^n)_{00} / z^{n+1}` or from a dense solve of `(zI - J) X = E_0`.
pub fn weyl_function(j: &BlockJacobi, z: C64, method: WeylMethod) -> Result<Block2> {
    match method {
        WeylMethod::Series => {
            let bound = j.operator_norm_bound();
            if bound > 0.0 && z.norm() <= SERIES_SAFETY * bound {
                return Err(Error::SeriesNotConverged(format!(
                    "|z| = {} is not above {SERIES_SAFETY} times the norm bound {bound}",
                    z.norm()
                )));
            }
            // |(J^n)_{00}| <= bound^n, so q^n / (|z| (1 - q)) bounds the tail.
            let q = bound / z.norm();
            let n_terms = if bound == 0.0 {
                1
            } else {
                let need = (DEFAULT_TOL * z.norm() * (1.0 - q)).ln() / q.ln();
                need.ceil().max(1.0) as usize
            };
            let powers = j.corner_powers(n_terms);
            let zinv = z.inv();
            let mut w = zinv;
            let mut acc = Block2::ZERO;
            for p in powers {
                acc += p * w;
                w *= zinv;
            }
            Ok(acc)
        }
        WeylMethod::FiniteSection => finite_section_resolvent(j, z),
    }
}

fn finite_section_resolvent(j: &BlockJacobi, z: C64) -> Result<Block2> {
    let dense = j.dense();
    let dim = dense.nrows();
    let mut a = dense_identity(dim) * z - dense;
    let scale = a.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let singular = Error::SingularResolvent { re: z.re, im: z.im };
    let lu = std::mem::replace(&mut a, DMatrix::zeros(0, 0)).lu();
    let u = lu.u();
    let min_piv = u.diagonal().iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
    if !(min_piv > 1e-14 * scale) {
        return Err(singular);
    }
    let rhs = DMatrix::from_fn(dim, 2, |r, c| if r == c { C64::new(1.0, 0.0) } else { ZERO });
    let x = lu.solve(&rhs).ok_or(singular)?;
    Ok(Block2::new(x[(0, 0)], x[(0, 1)], x[(1, 0)], x[(1, 1)]))
}

/// Trapezoidal rule for `(1/2 pi i) \oint V(z) F(z) G(z) dz` on the circle.
///
/// The integrand is evaluated and summed in double-double arithmetic: on
/// the circle `|V F G|` is many orders of magnitude above the O(1) result.
pub fn pairing_contour(
    v: &MatrixPoly,
    g: &MatrixPoly,
    u: &VectorFunctional,
    c: &ContourSpec,
) -> Result<Block2> {
    contour_integral(u, c, v, g, 0)
}

/// `(1/2 pi i) \oint z^extra V F G dz` by the trapezoidal rule.
fn contour_integral(
    u: &VectorFunctional,
    c: &ContourSpec,
    v: &MatrixPoly,
    g: &MatrixPoly,
    extra: u32,
) -> Result<Block2> {
    c.validate()?;
    let blocks = u.block_moments();
    let center = Cdd::from_c64(c.center);
    let mut acc = DdBlock::ZERO;
    for k in 0..c.nodes {
        let dz = Cdd::root_of_unity(k, c.nodes).scale(c.radius);
        let z = center + dz;
        let n = series_terms(&blocks, u.growth_radius(), z.to_c64().norm(), DEFAULT_TOL, "moment")?;
        let zinv = z.inv();
        let f = DdBlock::horner(&blocks[..n], zinv).scale(zinv);
        let val = DdBlock::horner(v.coeffs(), z) * f * DdBlock::horner(g.coeffs(), z);
        acc = acc + val.scale(z.powu(extra as usize) * dz);
    }
    Ok(acc.to_block() * (1.0 / c.nodes as f64))
}

/// Recurrence blocks `(A_m, B_m, C_m)` recovered as contour integrals
/// `(1/2 pi i) \oint z V_m F G_{m+1} dz`, `... G_m dz`, `... G_{m-1} dz`.
///
/// `V_m` and `G_n` are generated from `j`; the integrals depend on `j` only
/// through those sequences, so agreement with `j` is a genuine check.
pub fn coeffs_from_f(
    u: &VectorFunctional,
    j: &BlockJacobi,
    m: usize,
    c: &ContourSpec,
) -> Result<(Block2, Block2, Block2)> {
    let v = matrix_sequence(j, m)?;
    let g = g_sequence(j, u, m + 1)?;
    let vm = &v[m];
    let gm1 = if m == 0 { MatrixPoly::zero() } else { g[m - 1].clone() };
    let a = contour_integral(u, c, vm, &g[m + 1], 1)?;
    let b = contour_integral(u, c, vm, &g[m], 1)?;
    let cc = contour_integral(u, c, vm, &gm1, 1)?;
    Ok((a, b, cc))
}
