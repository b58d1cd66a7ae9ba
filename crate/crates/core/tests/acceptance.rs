//! Acceptance suite: one PASS/FAIL line per criterion, then a summary.
//! Run with `cargo test --release --test acceptance`.

use std::cell::RefCell;
use std::process::ExitCode;
use std::time::Instant;

use fktoda::blockcore::{lattice_to_blocks, Block2, BlockJacobi, LatticeState, C64};
use fktoda::cli::random_lattice;
use fktoda::dynamics::{
    circle, closed_form_weyl_at, evolve_lattice, isospectrality_report, spectral_cross_check, verify,
    weyl_markov_identity, FlowConfig,
};
use fktoda::functional::moments_from_operator;
use fktoda::inverse::reconstruct;
use fktoda::orthopoly::{
    g_sequence, matrix_sequence, pairing_contour, pairing_functional, vector_sequence, weyl_function, ContourSpec,
    WeylMethod,
};

/// Seeds of the quasi-definite reference preset; every criterion reports the worst one.
const SEEDS: std::ops::Range<u64> = 0..5;

/// Random data on block rows `0..10` of `N = 12`, zeros in the last two rows.
fn reference(seed: u64) -> LatticeState {
    random_lattice(12, seed, 1.0, 0.1, 10)
}

fn interior_bump() -> LatticeState {
    let mut s = LatticeState::zeros(12);
    s.set(fktoda::blockcore::Coef::D, 5, C64::new(0.5, 0.0)).unwrap();
    s.set(fktoda::blockcore::Coef::B, 6, C64::new(0.2, 0.0)).unwrap();
    s
}

fn max_rel_diff(got: &BlockJacobi, want: &BlockJacobi, orders: std::ops::RangeInclusive<usize>) -> f64 {
    let mut diff = 0.0_f64;
    let mut scale = 0.0_f64;
    for m in orders {
        for (g, w) in [(got.a[m], want.a[m]), (got.b[m], want.b[m]), (got.c[m], want.c[m])] {
            diff = diff.max((g - w).norm_max());
            scale = scale.max(w.norm_max());
        }
    }
    diff / scale.max(f64::MIN_POSITIVE)
}

struct Suite {
    failed: Vec<usize>,
    notes: RefCell<Vec<String>>,
}

impl Suite {
    fn report(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        println!("{} [{id}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }

    /// Supporting detail, printed under the criterion's result line.
    fn info(&self, id: usize, detail: String) {
        self.notes.borrow_mut().push(format!("     [{id}] info: {detail}"));
    }

    /// Runs `f`, turning a library error into a failed criterion.
    fn run(&mut self, id: usize, name: &str, f: impl FnOnce(&Suite) -> fktoda::Result<(bool, String)>) {
        let start = Instant::now();
        match f(self) {
            Ok((pass, detail)) => {
                self.report(id, name, pass, format!("{detail} ({:.1}s)", start.elapsed().as_secs_f64()))
            }
            Err(e) => self.report(id, name, false, format!("error: {e}")),
        }
        for note in self.notes.take() {
            println!("{note}");
        }
    }
}

fn round_trip(s: &Suite) -> fktoda::Result<(bool, String)> {
    let n = 8;
    let (mut inner, mut edge) = (0.0_f64, 0.0_f64);
    for seed in 0..20 {
        let j = lattice_to_blocks(&random_lattice(n, seed, 1.0, 0.1, n));
        let m_max = n - 2;
        let u = moments_from_operator(&j, 2 * m_max + 4)?;
        let rep = reconstruct(&u, j.a1, m_max)?;
        inner = inner.max(max_rel_diff(&rep.jacobi, &j, 0..=n - 3));
        edge = edge.max(max_rel_diff(&rep.jacobi, &j, n - 2..=n - 2));
    }
    s.info(1, format!("order N-2 (next to the truncation edge), not part of the criterion: {edge:.1e}"));
    Ok((inner < 1e-8, format!("20 seeds, N = 8, orders m <= N-3: max relative error {inner:.2e} (< 1e-8)")))
}

fn resolvent_identity(_: &Suite) -> fktoda::Result<(bool, String)> {
    let mut err = 0.0_f64;
    for seed in SEEDS {
        let j = lattice_to_blocks(&reference(seed));
        err = err.max(weyl_markov_identity(&j, &circle(2.0 * j.operator_norm_bound(), 16))?);
    }
    Ok((err < 1e-10, format!("16-point circle |z| = 2 x norm bound, 5 seeds: max |R - M F M^-1| {err:.2e} (< 1e-10)")))
}

fn equivalence_chain(s: &Suite) -> fktoda::Result<(bool, String)> {
    let cfg = FlowConfig::default();
    let (_, rep) = verify(&interior_bump(), &cfg)?;
    let flow = rep.flow.max();
    let frozen = rep.frozen.min();
    let below: Vec<&str> = rep.frozen.entries().iter().filter(|(_, r)| r.value <= 1e-3).map(|(n, _)| *n).collect();
    if !below.is_empty() {
        s.info(3, format!("frozen residuals not above 1e-3 on interior-bump: {}", below.join(", ")));
        s.info(
            3,
            "interior-bump data never reaches block row 0, so corner quantities are exactly constant along the flow"
                .into(),
        );
    }
    let (_, rnd) = verify(&reference(0), &cfg)?;
    s.info(
        3,
        format!(
            "same chain on the reference preset (seed 0): flow max {:.1e}, frozen min {:.1e}",
            rnd.flow.max(),
            rnd.frozen.min()
        ),
    );
    Ok((
        flow < 1e-5 && frozen > 1e-3,
        format!("interior-bump, h = 1e-3, t_end = 0.5: flow max {flow:.2e} (< 1e-5), frozen min {frozen:.2e} (> 1e-3)"),
    ))
}

fn cross_check(_: &Suite) -> fktoda::Result<(bool, String)> {
    let mut err = 0.0_f64;
    for seed in SEEDS {
        err = err.max(spectral_cross_check(&reference(seed), 0.3, 3, &FlowConfig::default())?.max_diff);
    }
    Ok((err < 1e-5, format!("t = 0.3, orders m <= 3, 5 seeds: max difference {err:.2e} (< 1e-5)")))
}

fn closed_form(_: &Suite) -> fktoda::Result<(bool, String)> {
    let times = [0.0, 0.1, 0.2];
    let cfg = FlowConfig { t_end: 0.2, ..FlowConfig::default() };
    let (mut at0, mut later) = (0.0_f64, 0.0_f64);
    for seed in SEEDS {
        let traj = evolve_lattice(&reference(seed), &cfg)?;
        let radius = 2.0 * lattice_to_blocks(&traj.states[0]).operator_norm_bound();
        for z in circle(radius, 8) {
            let closed = closed_form_weyl_at(&traj, z, &times)?;
            for (&t, r) in times.iter().zip(&closed) {
                let j = lattice_to_blocks(&traj.states[traj.index_of(t)?]);
                let err = (*r - weyl_function(&j, z, WeylMethod::FiniteSection)?).norm_max();
                if t == 0.0 {
                    at0 = at0.max(err);
                } else {
                    later = later.max(err);
                }
            }
        }
    }
    Ok((
        at0 < 1e-12 && later < 1e-6,
        format!("8-point circle, 5 seeds: t = 0 error {at0:.2e} (< 1e-12), t = 0.1, 0.2 error {later:.2e} (< 1e-6)"),
    ))
}

fn isospectrality(_: &Suite) -> fktoda::Result<(bool, String)> {
    let cfg = FlowConfig { record_every: 50, ..FlowConfig::default() };
    let mut drift = 0.0_f64;
    for seed in SEEDS {
        drift = drift.max(isospectrality_report(&evolve_lattice(&reference(seed), &cfg)?)?.max_drift);
    }
    Ok((drift < 1e-6, format!("N = 12, t_end = 0.5, 5 seeds: max eigenvalue drift {drift:.2e} (< 1e-6)")))
}

fn bi_orthogonality(_: &Suite) -> fktoda::Result<(bool, String)> {
    let (mut wf, mut wc, mut agree) = (0.0_f64, 0.0_f64, 0.0_f64);
    for seed in SEEDS {
        let j = lattice_to_blocks(&reference(seed));
        let u = moments_from_operator(&j, 60)?;
        let b = vector_sequence(&j, 6)?;
        let v = matrix_sequence(&j, 6)?;
        let g = g_sequence(&j, &u, 6)?;
        let c = ContourSpec::circle(2.0 * j.operator_norm_bound(), 256);
        for n in 0..=6 {
            for m in 0..=6 {
                let id = if n == m { Block2::IDENTITY } else { Block2::ZERO };
                let pf = pairing_functional(&g[n], &b[m], &u)?;
                let pc = pairing_contour(&v[m], &g[n], &u, &c)?;
                wf = wf.max((pf - id).norm_max());
                wc = wc.max((pc - id).norm_max());
                agree = agree.max((pf - pc).norm_max());
            }
        }
    }
    Ok((
        wf < 1e-8 && wc < 1e-8 && agree < 2e-8,
        format!(
            "n, m <= 6, 5 seeds: functional {wf:.2e} (< 1e-8), contour {wc:.2e} (< 1e-8), agreement {agree:.2e} (< 2e-8)"
        ),
    ))
}

fn delta_structure(_: &Suite) -> fktoda::Result<(bool, String)> {
    let (mut defect, mut product) = (0.0_f64, 0.0_f64);
    for seed in SEEDS {
        let j = lattice_to_blocks(&reference(seed));
        let u = moments_from_operator(&j, 60)?;
        let b = vector_sequence(&j, 6)?;
        let d0 = u.act_shifted(&b[0], 0)?;
        let mut chain = Block2::IDENTITY;
        for m in 0..=6 {
            for k in 0..m {
                defect = defect.max(u.act_shifted(&b[m], 2 * k)?.norm_max());
            }
            if m >= 1 {
                chain = j.c[m] * chain;
            }
            product = product.max((u.act_shifted(&b[m], 2 * m)? - chain * d0).norm_max());
        }
    }
    Ok((
        defect < 1e-9 && product < 1e-9,
        format!("m <= 6, 5 seeds: orthogonality defect {defect:.2e} (< 1e-9), product law {product:.2e} (< 1e-9)"),
    ))
}

fn rk4_order(s: &Suite) -> fktoda::Result<(bool, String)> {
    let s0 = interior_bump();
    let h = 0.05;
    let end = |h: f64| -> fktoda::Result<LatticeState> {
        let cfg = FlowConfig { h, t_end: 0.5, ..FlowConfig::default() };
        Ok(evolve_lattice(&s0, &cfg)?.states.pop().expect("nonempty"))
    };
    let exact = end(h / 64.0)?;
    let (e1, e2) = (end(h)?.distance(&exact), end(h / 2.0)?.distance(&exact));
    let ratio = e1 / e2;
    s.info(9, format!("errors at h = {h}: {e1:.2e}, at h/2: {e2:.2e}; reference step h/64"));
    Ok(((14.0..=18.0).contains(&ratio), format!("interior-bump, h = {h} vs h/2: ratio {ratio:.3} (in [14, 18])")))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut suite = Suite { failed: Vec::new(), notes: RefCell::new(Vec::new()) };
    suite.run(1, "round-trip reconstruction", round_trip);
    suite.run(2, "resolvent corner equals transformed Markov function", resolvent_identity);
    suite.run(3, "equivalence chain of flow residuals", equivalence_chain);
    suite.run(4, "spectral path vs integrated lattice", cross_check);
    suite.run(5, "closed-form resolvent", closed_form);
    suite.run(6, "isospectrality", isospectrality);
    suite.run(7, "bi-orthogonality", bi_orthogonality);
    suite.run(8, "orthogonality and Delta structure", delta_structure);
    suite.run(9, "RK4 order", rk4_order);
    let elapsed = start.elapsed().as_secs_f64();
    if suite.failed.is_empty() {
        println!("acceptance: 9/9 PASS in {elapsed:.1}s");
        ExitCode::SUCCESS
    } else {
        let ids: Vec<String> = suite.failed.iter().map(|i| i.to_string()).collect();
        println!("acceptance: {}/9 PASS, FAIL: {} ({elapsed:.1}s)", 9 - ids.len(), ids.join(", "));
        ExitCode::FAILURE
    }
}
