use serde::{Deserialize, Serialize};

use crate::blockcore::{lattice_to_blocks, spectrum, Block2, BlockJacobi, LatticeState, C64};
use crate::error::{Error, Result};
use crate::functional::{exp_modulate, moments_from_operator, normalize, transported_a1};
use crate::inverse::reconstruct;

use super::flow::{evolve_lattice, FlowConfig, Trajectory};

/// Whether the bipartite graph `dist[i][k] <= tau` has a perfect matching (Kuhn's algorithm).
fn has_perfect_matching(dist: &[Vec<f64>], tau: f64) -> bool {
    let n = dist.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(
        i: usize,
        dist: &[Vec<f64>],
        tau: f64,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for k in 0..dist.len() {
            if dist[i][k] <= tau && !seen[k] {
                seen[k] = true;
                if owner[k].is_none_or(|o| augment(o, dist, tau, seen, owner)) {
                    owner[k] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    (0..n).all(|i| augment(i, dist, tau, &mut vec![false; n], &mut owner))
}

/// Smallest `tau` such that the two multisets can be paired with every pair
/// at distance `<= tau`.
pub fn matched_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra of different sizes");
    if a.is_empty() {
        return 0.0;
    }
    let dist: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let mut cand: Vec<f64> = dist.iter().flatten().copied().collect();
    cand.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (0, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(&dist, cand[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cand[lo]
}

/// Matched eigenvalue distance to the initial spectrum, per sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftTable {
    pub times: Vec<f64>,
    pub drift: Vec<f64>,
    pub max_drift: f64,
    /// Spectrum at each sample, sorted by real then imaginary part.
    pub spectra: Vec<Vec<C64>>,
}

pub fn isospectrality_report(traj: &Trajectory) -> Result<DriftTable> {
    if traj.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    let spectra: Vec<Vec<C64>> =
        traj.states.iter().map(|s| spectrum(&lattice_to_blocks(s))).collect::<Result<_>>()?;
    let drift: Vec<f64> = spectra.iter().map(|ev| matched_distance(&spectra[0], ev)).collect();
    let max_drift = drift.iter().copied().fold(0.0, f64::max);
    Ok(DriftTable { times: traj.times(), drift, max_drift, spectra })
}

/// Recurrence blocks obtained two ways at time `t`: by modulating the initial
/// moments and reconstructing, and by integrating the lattice directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub t: f64,
    pub m_max: usize,
    /// Reconstructed from the modulated moments.
    pub spectral: BlockJacobi,
    /// Read off the integrated lattice.
    pub direct: BlockJacobi,
    /// `max` entry difference of `(A_m, B_m, C_m)` per order `m`.
    pub per_order: Vec<f64>,
    /// Difference of the gauge coefficient `a_1`.
    pub a1_diff: f64,
    pub max_diff: f64,
    /// Exponential series terms used.
    pub terms: usize,
}

/// Block moments passed to the modulation beyond those reconstruction needs.
const SERIES_HEADROOM: usize = 120;

pub fn spectral_cross_check(
    s0: &LatticeState,
    t: f64,
    m_max: usize,
    cfg: &FlowConfig,
) -> Result<CrossCheck> {
    let j0 = lattice_to_blocks(s0);
    let u0 = moments_from_operator(&j0, 2 * m_max + 3 + SERIES_HEADROOM)?;
    let modulated = exp_modulate(&u0, t)?;
    let a1 = transported_a1(j0.a1, &modulated.raw.block_moment(0)?)?;
    let u_t = normalize(&modulated.raw)?;
    let spectral = reconstruct(&u_t, a1, m_max)?.jacobi;

    let direct_cfg = FlowConfig { t_end: t, record_every: cfg.n_steps_to(t)?, ..cfg.clone() };
    let traj = evolve_lattice(s0, &direct_cfg)?;
    let last = traj.states.last().expect("trajectory has samples");
    let direct = lattice_to_blocks(last);

    let diff = |x: &Block2, y: &Block2| (*x - *y).norm_max();
    let per_order: Vec<f64> = (0..=m_max)
        .map(|m| {
            diff(&spectral.a[m], &direct.a[m])
                .max(diff(&spectral.b[m], &direct.b[m]))
                .max(diff(&spectral.c[m], &direct.c[m]))
        })
        .collect();
    let a1_diff = (spectral.a1 - direct.a1).norm();
    let max_diff = per_order.iter().copied().fold(a1_diff, f64::max);
    Ok(CrossCheck { t, m_max, spectral, direct, per_order, a1_diff, max_diff, terms: modulated.terms })
}

impl FlowConfig {
    /// Steps of size `h` to reach `t`; used as the stride so only the endpoints are kept.
    fn n_steps_to(&self, t: f64) -> Result<usize> {
        let c = FlowConfig { t_end: t, record_every: 1, ..self.clone() };
        Ok(c.n_steps()?.max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matching_ignores_order() {
        let a = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 1.0)];
        let b = [c(3.0, 1.0 + 1e-9), c(1.0, 0.0), c(2.0, 0.0)];
        assert!((matched_distance(&a, &b) - 1e-9).abs() < 1e-15);
    }

    #[test]
    fn matching_is_bottleneck_not_greedy() {
        // Greedy nearest pairing would match 0 -> 0.9 and leave 1.8 -> 0, cost 1.8.
        let a = [c(0.0, 0.0), c(1.0, 0.0)];
        let b = [c(0.9, 0.0), c(1.8, 0.0)];
        assert!((matched_distance(&a, &b) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn zero_state_does_not_drift() {
        let cfg = FlowConfig { h: 0.01, t_end: 0.1, ..FlowConfig::default() };
        let traj = evolve_lattice(&LatticeState::zeros(3), &cfg).unwrap();
        assert_eq!(isospectrality_report(&traj).unwrap().max_drift, 0.0);
    }
}
