use serde::{Deserialize, Serialize};

use crate::blockcore::{lattice_to_blocks, lax_rhs, Block2, BlockJacobi, LatticeState, C64};
use crate::error::{Error, Result};

/// Default blow-up guard on coefficient magnitudes.
pub const DEFAULT_GUARD: f64 = 1e6;

/// Integration and sampling settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub h: f64,
    pub t_end: f64,
    /// Keep every `record_every`-th step.
    pub record_every: usize,
    /// Block rows excluded next to the truncation edge in block-level checks.
    pub interior_margin: usize,
    /// Largest coefficient magnitude accepted before a step is rejected.
    pub guard: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { h: 1e-3, t_end: 0.5, record_every: 1, interior_margin: 2, guard: DEFAULT_GUARD }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidInput(format!("step h = {} must be positive", self.h)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidInput(format!("t_end = {} must be nonnegative", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput("record_every must be at least 1".into()));
        }
        if self.interior_margin == 0 {
            return Err(Error::InvalidInput("interior_margin must be at least 1".into()));
        }
        self.n_steps().map(|_| ())
    }

    /// Step count; `t_end` must be a whole multiple of `h` and of the stride.
    pub fn n_steps(&self) -> Result<usize> {
        let steps = (self.t_end / self.h).round();
        if (steps * self.h - self.t_end).abs() > 1e-9 * self.t_end.max(self.h) {
            return Err(Error::InvalidInput(format!(
                "t_end = {} is not a whole number of steps h = {}",
                self.t_end, self.h
            )));
        }
        let steps = steps as usize;
        if !steps.is_multiple_of(self.record_every) {
            return Err(Error::InvalidInput(format!(
                "{steps} steps are not a multiple of record_every = {}",
                self.record_every
            )));
        }
        Ok(steps)
    }
}

/// States sampled every `stride` steps of size `h`; sample `k` sits at `t = k * stride * h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub h: f64,
    pub stride: usize,
    pub states: Vec<LatticeState>,
}

impl Trajectory {
    /// Spacing between samples.
    pub fn dt(&self) -> f64 {
        self.h * self.stride as f64
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn blocks(&self) -> Vec<BlockJacobi> {
        self.states.iter().map(lattice_to_blocks).collect()
    }

    /// Sample index at time `t`, which must lie on the sample grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let k = (t / self.dt()).round();
        if k < 0.0 || (k * self.dt() - t).abs() > 1e-9 || k as usize >= self.len() {
            return Err(Error::InvalidInput(format!("t = {t} is not a sample time of the trajectory")));
        }
        Ok(k as usize)
    }

    /// The state `s0` held fixed over the same sample grid as a flow of `cfg`.
    pub fn frozen(s0: &LatticeState, cfg: &FlowConfig) -> Result<Trajectory> {
        cfg.validate()?;
        let n = cfg.n_steps()? / cfg.record_every + 1;
        let dt = cfg.h * cfg.record_every as f64;
        let states = (0..n)
            .map(|k| {
                let mut s = s0.clone();
                s.t = k as f64 * dt;
                s
            })
            .collect();
        Ok(Trajectory { h: cfg.h, stride: cfg.record_every, states })
    }

    /// True when every sample carries the coefficients of the first.
    pub fn is_constant(&self) -> bool {
        self.states.windows(2).all(|w| w[0].distance(&w[1]) == 0.0)
    }
}

fn axpy(y: &[C64], a: f64, x: &[C64]) -> Vec<C64> {
    y.iter().zip(x).map(|(y, x)| y + x * a).collect()
}

/// One classical RK4 step of size `h` for `f` on a flat state.
fn rk4_step(y: &[C64], h: f64, f: &impl Fn(&[C64]) -> Vec<C64>) -> Vec<C64> {
    let k1 = f(y);
    let k2 = f(&axpy(y, h / 2.0, &k1));
    let k3 = f(&axpy(y, h / 2.0, &k2));
    let k4 = f(&axpy(y, h, &k3));
    y.iter()
        .enumerate()
        .map(|(i, y)| y + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
        .collect()
}

fn check_guard(y: &[C64], time: f64, guard: f64) -> Result<()> {
    let magnitude = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(magnitude <= guard) {
        return Err(Error::StepRejected { time, magnitude, guard });
    }
    Ok(())
}

/// Fixed-step integration of a flat system, returning the recorded samples.
fn integrate(
    y0: Vec<C64>,
    cfg: &FlowConfig,
    f: impl Fn(&[C64]) -> Vec<C64>,
) -> Result<Vec<(f64, Vec<C64>)>> {
    cfg.validate()?;
    let steps = cfg.n_steps()?;
    check_guard(&y0, 0.0, cfg.guard)?;
    let mut out = vec![(0.0, y0.clone())];
    let mut y = y0;
    for k in 1..=steps {
        y = rk4_step(&y, cfg.h, &f);
        let t = k as f64 * cfg.h;
        check_guard(&y, t, cfg.guard)?;
        if k % cfg.record_every == 0 {
            out.push((t, y.clone()));
        }
    }
    Ok(out)
}

/// RK4 integration of the lattice equations from `s0`.
pub fn evolve_lattice(s0: &LatticeState, cfg: &FlowConfig) -> Result<Trajectory> {
    let n = s0.n_blocks();
    let samples = integrate(s0.to_flat(), cfg, |y| {
        lax_rhs(&LatticeState::from_flat(n, 0.0, y)).to_flat()
    })?;
    let states = samples
        .into_iter()
        .map(|(t, y)| LatticeState::from_flat(n, t, &y))
        .collect();
    Ok(Trajectory { h: cfg.h, stride: cfg.record_every, states })
}

/// Time derivative of the block coefficients; blocks past the truncation read as zero.
pub fn block_rhs(j: &BlockJacobi) -> BlockJacobi {
    let n = j.n_blocks();
    let d = |m: usize| j.d_block(m);
    let a = |m: usize| j.a[m];
    let c = |m: usize| if m < n { j.c[m] } else { Block2::ZERO };
    let mut out = j.clone();
    // a_1 moves with the (2,1) entry of D_0.
    out.a1 = d(0)[(1, 0)];
    for m in 0..n {
        out.a[m] = a(m) * d(m + 1) - d(m) * a(m);
        let mut bm = a(m) * c(m + 1) + j.b[m] * d(m) - d(m) * j.b[m];
        let mut cm = j.b[m] * c(m) - d(m) * c(m);
        if m >= 1 {
            bm -= c(m) * a(m - 1);
            cm += c(m) * d(m - 1) - c(m) * j.b[m - 1];
        }
        out.b[m] = bm;
        out.c[m] = cm;
    }
    out
}

fn blocks_to_flat(j: &BlockJacobi) -> Vec<C64> {
    let mut out = vec![j.a1];
    for list in [&j.a, &j.b, &j.c] {
        for blk in list {
            out.extend(blk.0.iter().flatten());
        }
    }
    out
}

fn blocks_from_flat(n: usize, y: &[C64]) -> BlockJacobi {
    let read = |k: usize| -> Vec<Block2> {
        (0..n)
            .map(|m| {
                let o = 1 + 4 * (k * n + m);
                Block2::new(y[o], y[o + 1], y[o + 2], y[o + 3])
            })
            .collect()
    };
    BlockJacobi { a1: y[0], a: read(0), b: read(1), c: read(2) }
}

/// RK4 integration of the block system, sampled like [`evolve_lattice`].
pub fn evolve_blocks(j0: &BlockJacobi, cfg: &FlowConfig) -> Result<Vec<(f64, BlockJacobi)>> {
    let n = j0.n_blocks();
    let samples = integrate(blocks_to_flat(j0), cfg, |y| blocks_to_flat(&block_rhs(&blocks_from_flat(n, y))))?;
    Ok(samples.into_iter().map(|(t, y)| (t, blocks_from_flat(n, &y))).collect())
}
