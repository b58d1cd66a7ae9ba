use std::path::PathBuf;

use serde::Serialize;

use crate::blockcore::{lattice_to_blocks, spectrum, Block2, BlockJacobi, LatticeState, C64};
use crate::dynamics::{
    circle, evolve_lattice, isospectrality_report, spectral_cross_check, verify_trajectory, CrossCheck,
    FlowConfig, Trajectory, VerificationReport,
};
use crate::functional::{moments_from_operator, quasidefinite_check};
use crate::orthopoly::{coeffs_from_f, markov_function, weyl_function, ContourSpec, WeylMethod};

use super::config::{Format, RunConfig};
use super::output::{block_cells, block_header, csv, fmt_complex, fmt_real, plot_columns, Outputs};
use super::CliError;

/// Settings shared by every subcommand after command-line overrides.
pub struct Job {
    pub cfg: RunConfig,
    pub s0: LatticeState,
    pub t: Option<f64>,
    pub z: Vec<C64>,
    pub formats: Vec<Format>,
    pub out: PathBuf,
}

impl Job {
    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn contour(&self, j: &BlockJacobi) -> ContourSpec {
        let c = &self.cfg.contour;
        ContourSpec {
            center: C64::new(c.center[0], c.center[1]),
            radius: c.radius.unwrap_or(2.0 * j.operator_norm_bound()),
            nodes: c.nodes,
        }
    }

    /// `--z` points, else the config samples, else 8 points on the contour circle.
    fn z_points(&self, j: &BlockJacobi) -> Vec<C64> {
        if !self.z.is_empty() {
            return self.z.clone();
        }
        let from_cfg = self.cfg.z_points();
        if !from_cfg.is_empty() {
            return from_cfg;
        }
        let c = self.contour(j);
        circle(c.radius, 8).into_iter().map(|z| z + c.center).collect()
    }

    fn flow_to(&self, t: f64) -> FlowConfig {
        FlowConfig { t_end: t, ..self.cfg.flow.clone() }
    }

    /// State at `--t` (integrated from the initial state), or the initial state.
    fn state_at_t(&self) -> Result<LatticeState, CliError> {
        match self.t {
            Some(t) if t != 0.0 => {
                let traj = evolve_lattice(&self.s0, &FlowConfig { record_every: 1, ..self.flow_to(t) })?;
                Ok(traj.states.last().expect("trajectory has samples").clone())
            }
            _ => Ok(self.s0.clone()),
        }
    }
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut header = vec!["t".to_string()];
    header.extend(traj.states[0].labels());
    let rows = traj.states.iter().map(|s| {
        let mut row = vec![fmt_real(s.t)];
        row.extend(s.values().map(fmt_complex));
        row
    });
    csv(&header, rows)
}

fn coefficient_plots(out: &mut Outputs, traj: &Trajectory) {
    let labels = traj.states[0].labels();
    for (k, label) in labels.iter().enumerate() {
        let series: Vec<(f64, C64)> =
            traj.states.iter().map(|s| (s.t, s.values().nth(k).expect("label index"))).collect();
        out.add(format!("plot/{label}.dat"), plot_columns(series.iter().map(|&(t, z)| (t, z.re))));
        if series.iter().any(|(_, z)| z.im != 0.0) {
            out.add(format!("plot/{label}.im.dat"), plot_columns(series.iter().map(|&(t, z)| (t, z.im))));
        }
    }
}

pub fn evolve(job: &Job) -> Result<Outputs, CliError> {
    let cfg = match job.t {
        Some(t) => job.flow_to(t),
        None => job.cfg.flow.clone(),
    };
    let traj = evolve_lattice(&job.s0, &cfg)?;
    let mut out = Outputs::default();
    if job.wants(Format::Csv) {
        out.add("trajectory.csv", trajectory_csv(&traj));
    }
    if job.wants(Format::Json) {
        out.add_json("trajectory.json", &traj);
    }
    if job.wants(Format::Plotdata) {
        coefficient_plots(&mut out, &traj);
    }
    Ok(out)
}

/// Written in place of the report when verification stops early.
#[derive(Serialize)]
struct PartialReport<'a> {
    stage: &'a str,
    error: String,
    samples: usize,
}

pub fn verify(job: &Job) -> Result<Outputs, CliError> {
    let cfg = match job.t {
        Some(t) => job.flow_to(t),
        None => job.cfg.flow.clone(),
    };
    let fail = |stage: &str, samples: usize, e: crate::Error| {
        let mut out = Outputs::default();
        out.add_json("report.json", &PartialReport { stage, error: e.to_string(), samples });
        CliError::Partial { outputs: Box::new(out), source: e }
    };
    let traj = evolve_lattice(&job.s0, &cfg).map_err(|e| fail("integration", 0, e))?;
    let report = verify_trajectory(&traj, cfg.interior_margin).map_err(|e| fail("verification", traj.len(), e))?;
    let mut out = Outputs::default();
    if job.wants(Format::Json) {
        out.add_json("report.json", &report);
    }
    if job.wants(Format::Csv) {
        out.add("residuals.csv", residual_csv(&report));
    }
    if job.wants(Format::Plotdata) {
        for (name, r) in report.flow.entries() {
            out.add(format!("plot/residual_{name}.dat"), plot_columns(r.series.iter().copied()));
        }
        out.add("plot/drift.dat", plot_columns(report.isospectral_drift.series.iter().copied()));
        let drift = isospectrality_report(&traj)?;
        for (tag, ev) in [("start", &drift.spectra[0]), ("end", drift.spectra.last().expect("nonempty"))] {
            out.add(format!("plot/spectrum_{tag}.dat"), plot_columns(ev.iter().map(|z| (z.re, z.im))));
        }
    }
    Ok(out)
}

fn residual_csv(report: &VerificationReport) -> String {
    let entries = report.flow.entries();
    let mut header = vec!["t".to_string()];
    header.extend(entries.iter().map(|(n, _)| n.to_string()));
    header.push("isospectral_drift".into());
    let drift = &report.isospectral_drift.series;
    let rows = (0..entries[0].1.series.len()).map(|i| {
        let t = entries[0].1.series[i].0;
        let mut row = vec![fmt_real(t)];
        row.extend(entries.iter().map(|(_, r)| fmt_real(r.series[i].1)));
        let d = drift.iter().find(|p| p.0 == t).map_or(f64::NAN, |p| p.1);
        row.push(fmt_real(d));
        row
    });
    csv(&header, rows)
}

pub fn reconstruct(job: &Job) -> Result<Outputs, CliError> {
    let t = job.t.unwrap_or(job.cfg.flow.t_end);
    let check = spectral_cross_check(&job.s0, t, job.cfg.m_max, &job.cfg.flow)?;
    let mut out = Outputs::default();
    if job.wants(Format::Csv) {
        out.add("reconstruct.csv", cross_check_csv(&check));
    }
    if job.wants(Format::Json) {
        out.add_json("reconstruct.json", &check);
    }
    if job.wants(Format::Plotdata) {
        out.add(
            "plot/reconstruct_diff.dat",
            plot_columns(check.per_order.iter().enumerate().map(|(m, &d)| (m as f64, d))),
        );
    }
    Ok(out)
}

fn cross_check_csv(c: &CrossCheck) -> String {
    let header: Vec<String> =
        ["order", "block", "entry", "spectral", "direct", "abs_diff"].iter().map(|s| s.to_string()).collect();
    let mut rows = vec![vec![
        "0".into(),
        "a1".into(),
        "-".into(),
        fmt_complex(c.spectral.a1),
        fmt_complex(c.direct.a1),
        fmt_real(c.a1_diff),
    ]];
    for m in 0..=c.m_max {
        for (name, s, d) in [
            ("A", c.spectral.a[m], c.direct.a[m]),
            ("B", c.spectral.b[m], c.direct.b[m]),
            ("C", c.spectral.c[m], c.direct.c[m]),
        ] {
            for (r, col) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                rows.push(vec![
                    m.to_string(),
                    name.into(),
                    format!("{}{}", r + 1, col + 1),
                    fmt_complex(s[(r, col)]),
                    fmt_complex(d[(r, col)]),
                    fmt_real((s[(r, col)] - d[(r, col)]).norm()),
                ]);
            }
        }
    }
    csv(&header, rows)
}

#[derive(Serialize)]
struct WeylPoint {
    z: C64,
    finite_section: Block2,
    /// `M F(z) M^{-1}` from the moment series; absent where the series is not certified.
    from_moments: Option<Block2>,
}

#[derive(Serialize)]
struct ContourBlocks {
    order: usize,
    a: Block2,
    b: Block2,
    c: Block2,
    max_diff: f64,
}

#[derive(Serialize)]
struct WeylOutput {
    t: f64,
    contour: ContourSpec,
    points: Vec<WeylPoint>,
    /// Recurrence blocks recovered from contour integrals.
    contour_blocks: Vec<ContourBlocks>,
    /// Why `contour_blocks` is empty, when it is.
    #[serde(skip_serializing_if = "Option::is_none")]
    contour_error: Option<String>,
}

pub fn weyl(job: &Job) -> Result<Outputs, CliError> {
    let s = job.state_at_t()?;
    let j = lattice_to_blocks(&s);
    let u = moments_from_operator(&j, crate::dynamics::residuals::SERIES_MOMENTS)?;
    let (m, m_inv) = (j.gauge(), Block2::unit_lower(j.a1));
    let mut points = Vec::new();
    for z in job.z_points(&j) {
        let finite_section = weyl_function(&j, z, WeylMethod::FiniteSection)?;
        let from_moments = markov_function(&u, z, 1e-15).ok().map(|f| m * f * m_inv);
        points.push(WeylPoint { z, finite_section, from_moments });
    }
    let contour = job.contour(&j);
    let orders = job.cfg.m_max.min(j.n_blocks().saturating_sub(2));
    let contour_blocks = (0..=orders)
        .map(|order| {
            let (a, b, c) = coeffs_from_f(&u, &j, order, &contour)?;
            let max_diff =
                (a - j.a[order]).norm_max().max((b - j.b[order]).norm_max()).max((c - j.c[order]).norm_max());
            Ok(ContourBlocks { order, a, b, c, max_diff })
        })
        .collect::<crate::Result<Vec<_>>>();
    let (contour_blocks, contour_error) = match contour_blocks {
        Ok(v) => (v, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let result = WeylOutput { t: s.t, contour, points, contour_blocks, contour_error };

    let mut out = Outputs::default();
    if job.wants(Format::Csv) {
        let mut header = vec!["z".to_string()];
        header.extend(block_header("finite_section_"));
        header.extend(block_header("from_moments_"));
        let rows = result.points.iter().map(|p| {
            let mut row = vec![fmt_complex(p.z)];
            row.extend(block_cells(&p.finite_section));
            match &p.from_moments {
                Some(b) => row.extend(block_cells(b)),
                None => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
            row
        });
        out.add("weyl.csv", csv(&header, rows));
    }
    if job.wants(Format::Json) {
        out.add_json("weyl.json", &result);
    }
    if job.wants(Format::Plotdata) {
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let pts = result.points.iter().map(|p| (p.z.arg(), p.finite_section[(r, c)].norm()));
            out.add(format!("plot/weyl_abs_{}{}.dat", r + 1, c + 1), plot_columns(pts));
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct SpectrumOutput {
    t: f64,
    eigenvalues: Vec<C64>,
}

pub fn spectrum_cmd(job: &Job) -> Result<Outputs, CliError> {
    let s = job.state_at_t()?;
    let ev = spectrum(&lattice_to_blocks(&s))?;
    let mut out = Outputs::default();
    if job.wants(Format::Csv) {
        let header: Vec<String> = ["index", "re", "im"].iter().map(|s| s.to_string()).collect();
        let rows = ev.iter().enumerate().map(|(k, z)| vec![k.to_string(), fmt_real(z.re), fmt_real(z.im)]);
        out.add("spectrum.csv", csv(&header, rows));
    }
    if job.wants(Format::Json) {
        out.add_json("spectrum.json", &SpectrumOutput { t: s.t, eigenvalues: ev.clone() });
    }
    if job.wants(Format::Plotdata) {
        out.add("plot/spectrum.dat", plot_columns(ev.iter().map(|z| (z.re, z.im))));
    }
    Ok(out)
}

#[derive(Serialize)]
struct MomentsOutput {
    t: f64,
    support_radius: Option<f64>,
    block_moments: Vec<Block2>,
    /// Leading block Hankel minors nonsingular, per order.
    quasidefinite: Vec<bool>,
}

pub fn moments(job: &Job) -> Result<Outputs, CliError> {
    let s = job.state_at_t()?;
    let j = lattice_to_blocks(&s);
    let n_max = job.cfg.moments.unwrap_or(2 * j.n_blocks());
    let u = moments_from_operator(&j, n_max)?;
    let blocks = u.block_moments();
    let flags = quasidefinite_check(&u, n_max / 2);
    let mut out = Outputs::default();
    if job.wants(Format::Csv) {
        let mut header = vec!["n".to_string()];
        header.extend(block_header("u"));
        let rows = blocks.iter().enumerate().map(|(n, b)| {
            let mut row = vec![n.to_string()];
            row.extend(block_cells(b));
            row
        });
        out.add("moments.csv", csv(&header, rows));
    }
    if job.wants(Format::Json) {
        out.add_json(
            "moments.json",
            &MomentsOutput { t: s.t, support_radius: u.support_radius, block_moments: blocks.clone(), quasidefinite: flags },
        );
    }
    if job.wants(Format::Plotdata) {
        out.add("plot/moment_norm.dat", plot_columns(blocks.iter().enumerate().map(|(n, b)| (n as f64, b.norm_max()))));
    }
    Ok(out)
}
