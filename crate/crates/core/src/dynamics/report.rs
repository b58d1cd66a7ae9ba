use serde::{Deserialize, Serialize};

use crate::blockcore::{lattice_to_blocks, LatticeState};
use crate::error::Result;

use super::closed_form::closed_form_residual;
use super::flow::{evolve_lattice, FlowConfig, Trajectory};
use super::residuals::{
    block_system_residual, corner_power_residual, functional_flow_residual,
    matrix_poly_residual, measure_flow_residual, moment_flow_residual, substitution_residual,
    vector_poly_residual, weyl_flow_residual, weyl_markov_identity, Residual, SampleGrid,
};
use super::spectral::isospectrality_report;

/// The flow residuals of one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowResiduals {
    /// `(J^n)_{00}` flow.
    pub corner_powers: Residual,
    /// Block moment flow.
    pub moments: Residual,
    /// Markov function flow.
    pub markov: Residual,
    /// Flow of the functional applied to fixed polynomials.
    pub functional: Residual,
    /// Vector polynomial flow.
    pub vector_polys: Residual,
    /// Matrix polynomial flow.
    pub matrix_polys: Residual,
    /// Block coefficient system.
    pub block_system: Residual,
    /// Resolvent corner flow.
    pub weyl: Residual,
}

impl FlowResiduals {
    pub fn evaluate(traj: &Trajectory, grid: &SampleGrid) -> Result<FlowResiduals> {
        Ok(FlowResiduals {
            corner_powers: corner_power_residual(traj, grid)?,
            moments: moment_flow_residual(traj, grid)?,
            markov: measure_flow_residual(traj, grid)?,
            functional: functional_flow_residual(traj, grid)?,
            vector_polys: vector_poly_residual(traj, grid)?,
            matrix_polys: matrix_poly_residual(traj, grid)?,
            block_system: block_system_residual(traj, grid)?,
            weyl: weyl_flow_residual(traj, grid)?,
        })
    }

    /// `(name, residual)` pairs in a fixed order.
    pub fn entries(&self) -> [(&'static str, &Residual); 8] {
        [
            ("corner_powers", &self.corner_powers),
            ("moments", &self.moments),
            ("markov", &self.markov),
            ("functional", &self.functional),
            ("vector_polys", &self.vector_polys),
            ("matrix_polys", &self.matrix_polys),
            ("block_system", &self.block_system),
            ("weyl", &self.weyl),
        ]
    }

    pub fn max(&self) -> f64 {
        self.entries().iter().map(|(_, r)| r.value).fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.entries().iter().map(|(_, r)| r.value).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub interior_margin: usize,
    pub sample_step: f64,
    pub samples: usize,
    /// The integrated trajectory never moved.
    pub constant_trajectory: bool,
    /// Residuals along the integrated trajectory.
    pub flow: FlowResiduals,
    /// The same residuals with the initial state held fixed.
    pub frozen: FlowResiduals,
    /// `R_J = M F M^{-1}` at every sample.
    pub weyl_markov_identity: Residual,
    /// Algebraic consistency of the Markov and resolvent flows.
    pub substitution: Residual,
    /// Closed-form resolvent against the finite-section resolvent.
    pub closed_form: Residual,
    pub isospectral_drift: Residual,
}

/// Integrates `s0` and evaluates every check on the result and on the frozen control.
pub fn verify(s0: &LatticeState, cfg: &FlowConfig) -> Result<(Trajectory, VerificationReport)> {
    let traj = evolve_lattice(s0, cfg)?;
    let report = verify_trajectory(&traj, cfg.interior_margin)?;
    Ok((traj, report))
}

pub fn verify_trajectory(traj: &Trajectory, interior_margin: usize) -> Result<VerificationReport> {
    let grid = SampleGrid::for_trajectory(traj, interior_margin);
    let flow = FlowResiduals::evaluate(traj, &grid)?;
    let frozen_traj = Trajectory {
        h: traj.h,
        stride: traj.stride,
        states: traj
            .states
            .iter()
            .map(|s| {
                let mut f = traj.states[0].clone();
                f.t = s.t;
                f
            })
            .collect(),
    };
    let frozen = FlowResiduals::evaluate(&frozen_traj, &grid)?;

    let mut identity = 0.0_f64;
    for s in &traj.states {
        identity = identity.max(weyl_markov_identity(&lattice_to_blocks(s), &grid.z)?);
    }
    let times = traj.times();
    let closed = closed_form_residual(traj, &grid.z, &times)?;
    let drift = isospectrality_report(traj)?;
    let n = traj.len();
    Ok(VerificationReport {
        interior_margin,
        sample_step: traj.dt(),
        samples: n,
        constant_trajectory: traj.is_constant(),
        flow,
        frozen,
        weyl_markov_identity: Residual::scalar(identity, format!("{n} samples x {} z points", grid.z.len())),
        substitution: substitution_residual(traj, &grid)?,
        closed_form: Residual::scalar(closed, format!("{n} samples x {} z points", grid.z.len())),
        isospectral_drift: Residual {
            value: drift.max_drift,
            sampling: format!("{n} samples, bottleneck-matched spectra"),
            series: drift.times.iter().copied().zip(drift.drift.iter().copied()).collect(),
        },
    })
}
