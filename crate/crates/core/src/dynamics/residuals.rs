//! Derivative residuals along a sampled trajectory. Every check evaluates a
//! family of blocks `q(t)` together with the right side `r(t)` its flow should
//! follow, differentiates `q` numerically and reports `max |q' - r|`.

use serde::{Deserialize, Serialize};

use crate::blockcore::{lattice_to_blocks, Block2, BlockJacobi, LatticeState, C64};
use crate::error::{Error, Result};
use crate::functional::moments_from_operator;
use crate::orthopoly::{
    markov_function, matrix_sequence, vector_sequence, weyl_function, VectorPoly, WeylMethod,
};

use super::flow::Trajectory;

/// Block moments used for series evaluations of the Markov function.
pub const SERIES_MOMENTS: usize = 200;

/// Largest sample spacing accepted for numerical differentiation.
pub const MAX_SAMPLE_STEP: f64 = 1e-2;

/// A max-over-samples residual with a description of what was sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    pub sampling: String,
    /// `(t, residual at t)` where a per-sample value exists.
    #[serde(skip)]
    pub series: Vec<(f64, f64)>,
}

impl Residual {
    pub fn scalar(value: f64, sampling: String) -> Residual {
        Residual { value, sampling, series: Vec::new() }
    }
}

/// Sample grids shared by the residual checks.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    /// Highest power / moment order in the corner-power and moment checks.
    pub n_max: usize,
    /// Highest polynomial order in the polynomial checks.
    pub m_max: usize,
    /// Points where `F` and `R_J` are sampled.
    pub z: Vec<C64>,
    /// Points where the vector polynomials `B_m(x)` are sampled.
    pub x: Vec<C64>,
    /// Points where the matrix polynomials `V_m(y)` are sampled.
    pub y: Vec<C64>,
    /// Block rows excluded next to the truncation edge.
    pub interior_margin: usize,
}

/// `count` equispaced points on the circle of radius `r`, offset by half a step
/// so that none lies on the real axis.
pub fn circle(r: f64, count: usize) -> Vec<C64> {
    (0..count)
        .map(|k| C64::from_polar(r, std::f64::consts::PI * (2 * k + 1) as f64 / count as f64))
        .collect()
}

impl SampleGrid {
    /// Defaults for a trajectory: powers and moments up to 4, polynomials up
    /// to order 3, an 8-point `z` circle at twice the largest norm bound seen,
    /// five points on `|x| = 1` and `|y| = 1`.
    pub fn for_trajectory(traj: &Trajectory, interior_margin: usize) -> SampleGrid {
        let bound = traj
            .states
            .iter()
            .map(|s| lattice_to_blocks(s).operator_norm_bound())
            .fold(0.0, f64::max);
        SampleGrid {
            n_max: 4,
            m_max: 3,
            z: circle(2.0 * bound, 8),
            x: circle(1.0, 5),
            y: circle(1.0, 5),
            interior_margin,
        }
    }

    fn describe(&self, what: &str, traj: &Trajectory) -> String {
        format!("{what}; {} interior samples, dt = {:e}", traj.len().saturating_sub(4), traj.dt())
    }
}

/// Values and flow right sides of one family of blocks at one time.
type Sample = (Vec<Block2>, Vec<Block2>);

/// Five-point central differences of `q`, compared with `r` at every sample
/// that has two neighbours on each side.
fn derivative_residual(
    traj: &Trajectory,
    eval: impl Fn(&LatticeState) -> Result<Sample>,
) -> Result<(f64, Vec<(f64, f64)>)> {
    let dt = traj.dt();
    if dt > MAX_SAMPLE_STEP {
        return Err(Error::InvalidInput(format!(
            "sample spacing {dt} exceeds {MAX_SAMPLE_STEP}; record more often"
        )));
    }
    if traj.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "{} samples are too few for central differences",
            traj.len()
        )));
    }
    let samples: Vec<Sample> = traj.states.iter().map(eval).collect::<Result<_>>()?;
    let mut series = Vec::with_capacity(samples.len() - 4);
    for i in 2..samples.len() - 2 {
        let (rhs, q) = (&samples[i].1, |k: usize| &samples[k].0);
        let mut worst = 0.0_f64;
        for (idx, r) in rhs.iter().enumerate() {
            // grouped as differences so that constant series give exactly zero
            let dq = ((q(i + 1)[idx] - q(i - 1)[idx]) * 8.0 - (q(i + 2)[idx] - q(i - 2)[idx]))
                * (1.0 / (12.0 * dt));
            worst = worst.max((dq - *r).norm_max());
        }
        series.push((traj.states[i].t, worst));
    }
    let worst = series.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok((worst, series))
}

fn column(v: [C64; 2]) -> Block2 {
    Block2::new(v[0], C64::default(), v[1], C64::default())
}

/// `d/dt (J^n)_{00} = (J^{n+1})_{00} - (J^n)_{00} B_0 + (J^n)_{00} D_0 - D_0 (J^n)_{00}`, `n <= n_max`.
pub fn corner_power_residual(traj: &Trajectory, grid: &SampleGrid) -> Result<Residual> {
    let (value, series) = derivative_residual(traj, |s| {
        let j = lattice_to_blocks(s);
        let p = j.corner_powers(grid.n_max + 1);
        let (b0, d0) = (j.b[0], j.d_block(0));
        let rhs = (0..=grid.n_max).map(|n| p[n + 1] - p[n] * b0 + p[n] * d0 - d0 * p[n]).collect();
        Ok((p[..=grid.n_max].to_vec(), rhs))
    })?;
    Ok(Residual { value, sampling: grid.describe(&format!("corner powers n <= {}", grid.n_max), traj), series })
}

/// `U_n' = U_{n+1} - U_n U_1`, `n <= n_max`.
pub fn moment_flow_residual(traj: &Trajectory, grid: &SampleGrid) -> Result<Residual> {
    let (value, series) = derivative_residual(traj, |s| {
        let u = moments_from_operator(&lattice_to_blocks(s), grid.n_max + 1)?.block_moments();
        let rhs = (0..=grid.n_max).map(|n| u[n + 1] - u[n] * u[1]).collect();
        Ok((u[..=grid.n_max].to_vec(), rhs))
    })?;
    Ok(Residual { value, sampling: grid.describe(&format!("block moments n <= {}", grid.n_max), traj), series })
}

/// `F' = F (zI - U_1) - I` at every `z` of the grid.
pub fn measure_flow_residual(traj: &Trajectory, grid: &SampleGrid) -> Result<Residual> {
    let (value, series) = derivative_residual(traj, |s| {
        let u = moments_from_operator(&lattice_to_blocks(s), SERIES_MOMENTS)?;
        let u1 = u.block_moment(1)?;
        let mut vals = Vec::with_capacity(grid.z.len());
        let mut rhs = Vec::with_capacity(grid.z.len());
        for &z in &grid.z {
            let f = markov_function(&u, z, 1e-15)?;
            rhs.push(f * (Block2::scalar(z) - u1) - Block2::IDENTITY);
            vals.push(f);
        }
        Ok((vals, rhs))
    })?;
    Ok(Residual { value, sampling: grid.describe(&format!("{} points of the z circle", grid.z.len()), traj), series })
}

/// `(dU/dt)(Q) = U(x^2 Q) - U(Q) U_1` for the fixed polynomials `Q = B_m(t_0)`, `m <= m_max`.
pub fn functional_flow_residual(traj: &Trajectory, grid: &SampleGrid) -> Result<Residual> {
    let j0 = lattice_to_blocks(&traj.states[0]);
    let m_max = grid.m_max.min(j0.n_blocks());
    let tests: Vec<VectorPoly> = vector_sequence(&j0, m_max)?;
    let k = 2 * (2 * m_max + 1) + 2;
    let (value, series) = derivative_residual(traj, |s| {
        let u = moments_from_operator(&lattice_to_blocks(s), k)?;
        let u1 = u.block_moment(1)?;
        let mut vals = Vec::new();
        let mut rhs = Vec::new();
        for q in &tests {
            let uq = u.act_shifted(q, 0)?;
            rhs.push(u.act_shifted(q, 2)? - uq * u1);
            vals.push(uq);
        }
        Ok((vals, rhs))
    })?;
    Ok(Residual {
        value,
        sampling: grid.describe(&format!("fixed test polynomials of order <= {m_max}"), traj),
        series,
    })
}

/// `B_m' = -C_m B_{m-1} - D_m B_m` at fixed `x`, `m <= m_max`.
pub fn vector_poly_residual(traj: &Trajectory, grid: &SampleGrid) -> Result<Residual> {
    let (value, series) = derivative_residual(traj, |s| {
        let j = lattice_to_blocks(s);
        let b = vector_sequence(&j, grid.m_max.min(j.n_blocks()))?;
        let mut vals = Vec::new();
        let mut rhs = Vec::new();
        for &x in &grid.x {
            let ev: Vec<Block2> = b.iter().map(|p| column(p.eval(x))).collect();
            for m in 0..ev.len() {
                let prev = if m == 0 { Block2::ZERO } else { j.c[m] * ev[m - 1] };
                rhs.push(-prev - j.d_block(m) * ev[m]);
            }
            vals.extend(ev);
        }
        Ok((vals, rhs))
    })?;
    Ok(Residual {
        value,
        sampling: grid.describe(&format!("B_m, m <= {}, at {} x points", grid.m_max, grid.x.len()), traj),
        series,
    })
}

/// `V_m' = -C_m V_{m-1} - D_m V_m` at fixed `y`, `m <= m_max`.
pub fn matrix_poly_residual(traj: &Trajectory, grid: &SampleGrid) -> Result<Residual> {
    let (value, series) = derivative_residual(traj, |s| {
        let j = lattice_to_blocks(s);
        let v = matrix_sequence(&j, grid.m_max.min(j.n_blocks()))?;
        let mut vals = Vec::new();
        let mut rhs = Vec::new();
        for &y in &grid.y {
            let ev: Vec<Block2> = v.iter().map(|p| p.eval(y)).collect();
            for m in 0..ev.len() {
                let prev = if m == 0 { Block2::ZERO } else { j.c[m] * ev[m - 1] };
                rhs.push(-prev - j.d_block(m) * ev[m]);
            }
            vals.extend(ev);
        }
        Ok((vals, rhs))
    })?;
    Ok(Residual {
        value,
        sampling: grid.describe(&format!("V_m, m <= {}, at {} y points", grid.m_max, grid.y.len()), traj),
        series,
    })
}

fn interior_blocks(j: &BlockJacobi, margin: usize) -> Vec<Block2> {
    let rows = j.n_blocks().saturating_sub(margin);
    let mut out = vec![Block2::scalar(j.a1)];
    for m in 0..rows {
        out.extend([j.a[m], j.b[m], j.c[m]]);
    }
    out
}

/// The block system for `A_m, B_m, C_m` (and `a_1' = c_1`) on interior rows.
pub fn block_system_residual(traj: &Trajectory, grid: &SampleGrid) -> Result<Residual> {
    let (value, series) = derivative_residual(traj, |s| {
        let j = lattice_to_blocks(s);
        let rhs = super::flow::block_rhs(&j);
        Ok((interior_blocks(&j, grid.interior_margin), interior_blocks(&rhs, grid.interior_margin)))
    })?;
    Ok(Residual {
        value,
        sampling: grid.describe(&format!("block rows below the last {}", grid.interior_margin), traj),
        series,
    })
}

/// `R' = R (zI - B_0) - I + [R, D_0]` for the finite-section `R_J`.
pub fn weyl_flow_residual(traj: &Trajectory, grid: &SampleGrid) -> Result<Residual> {
    let (value, series) = derivative_residual(traj, |s| {
        let j = lattice_to_blocks(s);
        let (b0, d0) = (j.b[0], j.d_block(0));
        let mut vals = Vec::new();
        let mut rhs = Vec::new();
        for &z in &grid.z {
            let r = weyl_function(&j, z, WeylMethod::FiniteSection)?;
            rhs.push(r * (Block2::scalar(z) - b0) - Block2::IDENTITY + r.commutator(&d0));
            vals.push(r);
        }
        Ok((vals, rhs))
    })?;
    Ok(Residual { value, sampling: grid.describe(&format!("{} points of the z circle", grid.z.len()), traj), series })
}

/// `max |R_J(z) - M F(z) M^{-1}|` over `zs`, with `F` summed from the moments.
pub fn weyl_markov_identity(j: &BlockJacobi, zs: &[C64]) -> Result<f64> {
    let u = moments_from_operator(j, SERIES_MOMENTS)?;
    let (m, m_inv) = (j.gauge(), Block2::unit_lower(j.a1));
    let mut worst = 0.0_f64;
    for &z in zs {
        let r = weyl_function(j, z, WeylMethod::FiniteSection)?;
        let f = markov_function(&u, z, 1e-15)?;
        worst = worst.max((r - m * f * m_inv).norm_max());
    }
    Ok(worst)
}

/// Pointwise consistency of the two flows: substituting `R = M F M^{-1}`,
/// `M' = -D_0 M` and the Markov-function flow into `R'` must reproduce the
/// right side of the resolvent flow. Purely algebraic; no differencing.
pub fn substitution_residual(traj: &Trajectory, grid: &SampleGrid) -> Result<Residual> {
    let mut worst = 0.0_f64;
    for s in &traj.states {
        let j = lattice_to_blocks(s);
        let u = moments_from_operator(&j, SERIES_MOMENTS)?;
        let u1 = u.block_moment(1)?;
        let (m, m_inv, b0, d0) = (j.gauge(), Block2::unit_lower(j.a1), j.b[0], j.d_block(0));
        for &z in &grid.z {
            let f = markov_function(&u, z, 1e-15)?;
            let r = m * f * m_inv;
            let f_dot = f * (Block2::scalar(z) - u1) - Block2::IDENTITY;
            let r_dot = -(d0 * m) * f * m_inv + m * f_dot * m_inv + m * f * m_inv * d0;
            let target = r * (Block2::scalar(z) - b0) - Block2::IDENTITY + r.commutator(&d0);
            worst = worst.max((r_dot - target).norm_max());
        }
    }
    Ok(Residual::scalar(worst, format!("{} samples x {} z points", traj.len(), grid.z.len())))
}
