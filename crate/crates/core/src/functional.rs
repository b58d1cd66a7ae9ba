use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::blockcore::{lattice_to_blocks, Block2, BlockJacobi, LatticeState, C64, ZERO};
use crate::error::{Error, Result};
use crate::orthopoly::{MatrixPoly, VectorPoly};

/// Pair of scalar linear functionals given by their monomial moments,
/// `mu1[k] = <u^1, x^k>` and `mu2[k] = <u^2, x^k>` for `k = 0..=K_max`.
///
/// `support_radius`, when known, bounds the growth `|U_n| <= C r^n` of the
/// block moments; functionals built from an operator carry its norm bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorFunctional {
    pub mu1: Vec<C64>,
    pub mu2: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_radius: Option<f64>,
}

/// Block Hankel matrix `entries[i][j] = U_{i+j}`, `i, j = 0..=m`.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelBlock {
    pub m: usize,
    pub entries: Vec<Vec<Block2>>,
}

impl HankelBlock {
    /// Assemble the `2(m+1)` square scalar matrix.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = 2 * (self.m + 1);
        DMatrix::from_fn(dim, dim, |r, c| self.entries[r / 2][c / 2][(r % 2, c % 2)])
    }
}

impl VectorFunctional {
    pub fn new(mu1: Vec<C64>, mu2: Vec<C64>) -> Result<Self> {
        if mu1.len() != mu2.len() {
            return Err(Error::InvalidInput(format!(
                "moment sequences have different lengths {} and {}",
                mu1.len(),
                mu2.len()
            )));
        }
        if mu1.len() < 2 {
            return Err(Error::InvalidInput("need moments up to degree 1 at least".into()));
        }
        if mu1.iter().chain(&mu2).any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("non-finite moment".into()));
        }
        Ok(VectorFunctional { mu1, mu2, support_radius: None })
    }

    /// Build from block moments `U_0, U_1, ...`.
    pub fn from_block_moments(blocks: &[Block2]) -> Result<Self> {
        let mut mu1 = Vec::with_capacity(2 * blocks.len());
        let mut mu2 = Vec::with_capacity(2 * blocks.len());
        for b in blocks {
            mu1.push(b[(0, 0)]);
            mu1.push(b[(1, 0)]);
            mu2.push(b[(0, 1)]);
            mu2.push(b[(1, 1)]);
        }
        VectorFunctional::new(mu1, mu2)
    }

    /// The free functional: `U_0 = I`, every other block moment zero.
    pub fn free(n_blocks: usize) -> Self {
        let mut blocks = vec![Block2::ZERO; n_blocks.max(1)];
        blocks[0] = Block2::IDENTITY;
        VectorFunctional::from_block_moments(&blocks).expect("valid by construction")
    }

    pub fn with_support_radius(mut self, r: Option<f64>) -> Self {
        self.support_radius = r;
        self
    }

    /// Highest stored scalar moment degree.
    pub fn k_max(&self) -> usize {
        self.mu1.len() - 1
    }

    fn moments(&self, l: usize) -> &[C64] {
        if l == 0 {
            &self.mu1
        } else {
            &self.mu2
        }
    }

    /// Number of complete block moments `U_j` (those with `2j+1 <= K_max`).
    pub fn n_block_moments(&self) -> usize {
        self.mu1.len() / 2
    }

    /// `U_j = [[mu1[2j], mu2[2j]], [mu1[2j+1], mu2[2j+1]]]`.
    pub fn block_moment(&self, j: usize) -> Result<Block2> {
        if 2 * j + 1 > self.k_max() {
            return Err(Error::DegreeOverflow { needed: 2 * j + 1, available: self.k_max() });
        }
        Ok(Block2::new(
            self.mu1[2 * j],
            self.mu2[2 * j],
            self.mu1[2 * j + 1],
            self.mu2[2 * j + 1],
        ))
    }

    pub fn block_moments(&self) -> Vec<Block2> {
        (0..self.n_block_moments())
            .map(|j| self.block_moment(j).expect("in range"))
            .collect()
    }

    pub fn is_normalized(&self) -> bool {
        (self.block_moment(0).expect("K_max >= 1") - Block2::IDENTITY).norm_max() <= 1e-12
    }

    /// Growth radius used for tail bounds: the stored support radius, or a
    /// root-test estimate `max_n |U_n|^(1/n)` from the available moments.
    pub fn growth_radius(&self) -> f64 {
        if let Some(r) = self.support_radius {
            return r;
        }
        self.block_moments()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, u)| u.norm_max().powf(1.0 / n as f64))
            .fold(0.0, f64::max)
    }

    /// `<u^l, x^shift p>`
    fn pair_scalar(&self, l: usize, coeffs: &[C64], shift: usize) -> C64 {
        let mu = self.moments(l);
        coeffs.iter().enumerate().map(|(k, c)| c * mu[k + shift]).sum()
    }

    fn check_degree(&self, p: &VectorPoly, shift: usize) -> Result<()> {
        if let Some(d) = p.degree() {
            if d + shift > self.k_max() {
                return Err(Error::DegreeOverflow { needed: d + shift, available: self.k_max() });
            }
        }
        Ok(())
    }

    /// `U(x^shift p)`; row `r` holds the pairings of component `r` with `u^1, u^2`.
    pub fn act_shifted(&self, p: &VectorPoly, shift: usize) -> Result<Block2> {
        self.check_degree(p, shift)?;
        let mut out = Block2::ZERO;
        for r in 0..2 {
            let comp = p.component(r);
            let len = comp.degree().map_or(0, |d| d + 1);
            for l in 0..2 {
                out[(r, l)] = self.pair_scalar(l, &comp.coeffs()[..len], shift);
            }
        }
        Ok(out)
    }
}

/// `U(p) = [[<u^1,p_1>, <u^2,p_1>], [<u^1,p_2>, <u^2,p_2>]]`.
pub fn act(u: &VectorFunctional, p: &VectorPoly) -> Result<Block2> {
    u.act_shifted(p, 0)
}

/// Left multiplication by `A(x) = sum_k A_k x^k`: `(A U)(P) = sum_k U(x^k P) A_k^T`.
///
/// The coefficients of `a_poly` are indexed by powers of `x` (not `x^2`).
/// The result stores `K_max - deg A` moments.
pub fn left_multiply(a_poly: &MatrixPoly, u: &VectorFunctional) -> Result<VectorFunctional> {
    let deg = a_poly.degree().unwrap_or(0);
    if deg + 1 > u.k_max() {
        return Err(Error::DegreeOverflow { needed: deg + 1, available: u.k_max() });
    }
    let len = u.mu1.len() - deg;
    let mut out = [vec![ZERO; len], vec![ZERO; len]];
    for (k, a) in a_poly.coeffs().iter().enumerate() {
        for (j, dst) in out.iter_mut().enumerate() {
            for l in 0..2 {
                let w = a[(j, l)];
                if w == ZERO {
                    continue;
                }
                let mu = u.moments(l);
                for (n, slot) in dst.iter_mut().enumerate() {
                    *slot += w * mu[n + k];
                }
            }
        }
    }
    let [mu1, mu2] = out;
    Ok(VectorFunctional { mu1, mu2, support_radius: u.support_radius })
}

/// Right factor `U(P) (U(P_0))^{-1}` on every action.
pub fn normalize(u: &VectorFunctional) -> Result<VectorFunctional> {
    let u0 = u.block_moment(0)?;
    let scale = u0.norm_max();
    let det = u0.det();
    let inv = if det.norm() > 1e-12 * scale * scale { u0.try_inverse() } else { None };
    let e = inv.ok_or(Error::SingularNormalization { det: det.norm() })?;
    Ok(right_factor(u, &e))
}

/// `mu'_j[k] = sum_l mu_l[k] E[l][j]`, i.e. `U'(P) = U(P) E`.
pub(crate) fn right_factor(u: &VectorFunctional, e: &Block2) -> VectorFunctional {
    let len = u.mu1.len();
    let col = |j: usize| -> Vec<C64> {
        (0..len).map(|k| u.mu1[k] * e[(0, j)] + u.mu2[k] * e[(1, j)]).collect()
    };
    VectorFunctional { mu1: col(0), mu2: col(1), support_radius: u.support_radius }
}

pub fn hankel(u: &VectorFunctional, m: usize) -> Result<HankelBlock> {
    if 4 * m + 1 > u.k_max() {
        return Err(Error::DegreeOverflow { needed: 4 * m + 1, available: u.k_max() });
    }
    let entries = (0..=m)
        .map(|i| (0..=m).map(|j| u.block_moment(i + j)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(HankelBlock { m, entries })
}

/// For each order `m <= m_max`, whether every leading principal scalar
/// submatrix of the order-`m` Hankel matrix is numerically nonsingular:
/// `sigma_min > 1e-12 * sigma_max`. Orders without enough moments report `false`.
pub fn quasidefinite_check(u: &VectorFunctional, m_max: usize) -> Vec<bool> {
    (0..=m_max)
        .map(|m| match hankel(u, m) {
            Ok(h) => leading_minors_ok(&h.to_dense(), 1e-12),
            Err(_) => false,
        })
        .collect()
}

fn leading_minors_ok(h: &DMatrix<C64>, rel: f64) -> bool {
    (1..=h.nrows()).all(|k| {
        let sv = h.view((0, 0), (k, k)).into_owned().singular_values();
        let top = sv.max();
        top > 0.0 && sv.min() > rel * top
    })
}

/// Normalized functional of the operator: `U_n = M^{-1} (J^n)_{00} M` for
/// `n = 0..=n_max`, computed on the finite section.
pub fn moments_from_operator(j: &BlockJacobi, n_max: usize) -> Result<VectorFunctional> {
    if j.n_blocks() == 0 {
        return Err(Error::TruncationTooSmall("empty truncation".into()));
    }
    let m = j.gauge();
    let m_inv = Block2::unit_lower(j.a1);
    let blocks: Vec<Block2> = j.corner_powers(n_max).into_iter().map(|p| m_inv * p * m).collect();
    Ok(VectorFunctional::from_block_moments(&blocks)?
        .with_support_radius(Some(j.operator_norm_bound())))
}

pub fn moments_from_lattice(s: &LatticeState, n_max: usize) -> Result<VectorFunctional> {
    moments_from_operator(&lattice_to_blocks(s), n_max)
}

/// Result of the exponential modulation before normalization.
#[derive(Clone, Debug)]
pub struct ExpModulated {
    /// `e^{x^2 t} U^0`, unnormalized.
    pub raw: VectorFunctional,
    /// Number of series terms used.
    pub terms: usize,
}

const EXP_TAIL_TOL: f64 = 1e-12;

/// `(e^{x^2 t} U^0)(P_j) = sum_k t^k/k! U^0_{j+k}` with the series cut at `K`
/// terms, `K` the smallest count whose tail bound falls below `1e-12`.
///
/// The tail bound uses the growth radius `r` of `u0` and `C = max_n |U_n| / r^n`:
/// block `j` has tail at most `C r^j (|t| r)^K / K! / (1 - |t| r / (K+1))`,
/// which is required to stay below `1e-12 * C r^j`. When `r = 0` the bound is
/// `(|t|^K / K!) * max_{n >= 1} |U_n|`.
pub fn exp_modulate(u0: &VectorFunctional, t: f64) -> Result<ExpModulated> {
    let blocks = u0.block_moments();
    let avail = blocks.len();
    let r = u0.growth_radius();
    let at = t.abs();
    let max_u = blocks.iter().skip(1).map(|b| b.norm_max()).fold(0.0, f64::max);
    let x = at * r.max(0.0);
    let mut k = 1usize;
    let mut term = x; // x^K / K! for K = 1
    let mut plain = at; // |t|^K / K!
    loop {
        let bound = if r > 0.0 {
            let q = x / (k as f64 + 1.0);
            if q < 1.0 { term / (1.0 - q) } else { f64::INFINITY }
        } else {
            plain * max_u
        };
        if bound < EXP_TAIL_TOL || t == 0.0 {
            break;
        }
        k += 1;
        term *= x / k as f64;
        plain *= at / k as f64;
        if k >= avail {
            return Err(Error::SeriesNotConverged(format!(
                "exponential series at t = {t} needs more than {avail} block moments \
                 (K_max = {}); provide more moments",
                u0.k_max()
            )));
        }
    }
    let terms = if t == 0.0 { 1 } else { k };
    let n_out = avail + 1 - terms;
    let mut out = Vec::with_capacity(n_out);
    for j in 0..n_out {
        let mut acc = Block2::ZERO;
        let mut coef = 1.0;
        for (kk, block) in blocks[j..j + terms].iter().enumerate() {
            if kk > 0 {
                coef *= t / kk as f64;
            }
            acc += *block * coef;
        }
        out.push(acc);
    }
    let raw = VectorFunctional::from_block_moments(&out)
        .map_err(|_| Error::SeriesNotConverged(format!(
            "exponential series at t = {t} leaves fewer than one block moment (K_max = {})",
            u0.k_max()
        )))?
        .with_support_radius(u0.support_radius);
    Ok(ExpModulated { raw, terms })
}

/// Normalized exponential modulation of `u0` to time `t`.
pub fn exp_evolve(u0: &VectorFunctional, t: f64) -> Result<VectorFunctional> {
    normalize(&exp_modulate(u0, t)?.raw)
}

/// Gauge coefficient at time `t` from the modulated functional: with
/// `X = M_0 W_0 M_0^{-1}` and `W_0 = (e^{x^2 t} U^0)(P_0)`, `a_1(t) = a_1(0) + X_21 / X_11`.
pub fn transported_a1(a1_0: C64, raw_w0: &Block2) -> Result<C64> {
    let m0 = Block2::unit_lower(-a1_0);
    let m0_inv = Block2::unit_lower(a1_0);
    let x = m0 * *raw_w0 * m0_inv;
    if x[(0, 0)].norm() <= 1e-300 {
        return Err(Error::SingularNormalization { det: raw_w0.det().norm() });
    }
    Ok(a1_0 + x[(1, 0)] / x[(0, 0)])
}

impl VectorFunctional {
    /// Scalar multiple of both moment rows.
    pub fn scaled(&self, s: C64) -> VectorFunctional {
        VectorFunctional {
            mu1: self.mu1.iter().map(|z| z * s).collect(),
            mu2: self.mu2.iter().map(|z| z * s).collect(),
            support_radius: self.support_radius,
        }
    }

    /// Max difference of block moments over the common range.
    pub fn max_block_diff(&self, other: &VectorFunctional) -> f64 {
        let n = self.n_block_moments().min(other.n_block_moments());
        (0..n)
            .map(|j| (self.block_moment(j).unwrap() - other.block_moment(j).unwrap()).norm_max())
            .fold(0.0, f64::max)
    }
}
