//! Closed-form resolvent corner along a trajectory:
//! `R(t, z) = e^{zt} M(t) T(t, z) N(t)^{-1}` with
//! `T(t, z) = M_0^{-1} R_0(z) - int_0^t e^{-zs} M(s)^{-1} N(s) ds`,
//! `M = [[1, 0], [-a_1, 1]]`, `a_1' = c_1`, and `N' = [[b_1, a_2], [0, b_2]] N`, `N(0) = I`.

use crate::blockcore::{lattice_to_blocks, Block2, C64, ZERO};
use crate::error::{Error, Result};
use crate::orthopoly::{weyl_function, WeylMethod};

use super::flow::Trajectory;

/// Running integrals `int_0^{t_k} f` on a uniform grid: composite Simpson on
/// even prefixes, plus a three-point single-interval rule for the last interval
/// of odd prefixes. Fourth order overall.
pub fn cumulative_simpson(f: &[C64], dt: f64) -> Vec<C64> {
    let mut out = vec![ZERO; f.len()];
    for k in 1..f.len() {
        out[k] = if k % 2 == 0 {
            out[k - 2] + (f[k - 2] + f[k - 1] * 4.0 + f[k]) * (dt / 3.0)
        } else if k == 1 {
            if f.len() > 2 {
                (f[0] * 5.0 + f[1] * 8.0 - f[2]) * (dt / 12.0)
            } else {
                (f[0] + f[1]) * (dt / 2.0)
            }
        } else {
            out[k - 1] + (f[k] * 5.0 + f[k - 1] * 8.0 - f[k - 2]) * (dt / 12.0)
        };
    }
    out
}

/// `int_alpha^beta u^j e^{w u} du` for `j = 0, 1, 2`.
fn exp_moments(w: C64, alpha: f64, beta: f64) -> [C64; 3] {
    if w.norm() <= 1.0 {
        // power series; |w| <= 1 and beta <= 2 make 60 terms far more than enough
        let mut out = [ZERO; 3];
        let mut coef = C64::new(1.0, 0.0);
        for k in 0..60 {
            for (j, slot) in out.iter_mut().enumerate() {
                let p = (j + k + 1) as i32;
                *slot += coef * ((beta.powi(p) - alpha.powi(p)) / p as f64);
            }
            coef *= w / (k + 1) as f64;
            if coef.norm() < 1e-300 {
                break;
            }
        }
        out
    } else {
        let (ea, eb) = ((w * alpha).exp(), (w * beta).exp());
        let m0 = (eb - ea) / w;
        let m1 = (eb * beta - ea * alpha - m0) / w;
        let m2 = (eb * (beta * beta) - ea * (alpha * alpha) - m1 * 2.0) / w;
        [m0, m1, m2]
    }
}

/// Weights of `int_{alpha h}^{beta h} e^{lambda s} p(s) ds` for the quadratic `p`
/// through nodes `0, h, 2h`.
fn quadratic_weights(lambda: C64, h: f64, alpha: f64, beta: f64) -> [C64; 3] {
    let [n0, n1, n2] = exp_moments(lambda * h, alpha, beta);
    [(n2 - n1 * 3.0 + n0 * 2.0) * (h / 2.0), (n2 - n1 * 2.0) * (-h), (n2 - n1) * (h / 2.0)]
}

/// Running integrals `int_{t_0}^{t_k} e^{lambda s} f(s) ds` with `t_k = t_0 + k dt`.
/// `f` is interpolated on the panels of [`cumulative_simpson`] and the
/// exponential weight is integrated exactly, so large `|lambda| dt` costs no
/// accuracy. With `lambda = 0` this is [`cumulative_simpson`].
pub fn cumulative_simpson_weighted(f: &[Block2], dt: f64, lambda: C64, t0: f64) -> Vec<Block2> {
    let mut out = vec![Block2::ZERO; f.len()];
    if f.len() < 2 {
        return out;
    }
    let panel = quadratic_weights(lambda, dt, 0.0, 2.0);
    let closing = quadratic_weights(lambda, dt, 1.0, 2.0);
    let apply = |w: &[C64; 3], k: usize| -> Block2 {
        let shift = (lambda * (t0 + (k - 2) as f64 * dt)).exp();
        (f[k - 2] * w[0] + f[k - 1] * w[1] + f[k] * w[2]) * shift
    };
    if f.len() == 2 {
        let [n0, n1, _] = exp_moments(lambda * dt, 0.0, 1.0);
        let shift = (lambda * t0).exp();
        out[1] = (f[0] * ((n0 - n1) * dt) + f[1] * (n1 * dt)) * shift;
        return out;
    }
    let first = quadratic_weights(lambda, dt, 0.0, 1.0);
    out[1] = (f[0] * first[0] + f[1] * first[1] + f[2] * first[2]) * (lambda * t0).exp();
    for k in 2..f.len() {
        out[k] = if k % 2 == 0 { out[k - 2] + apply(&panel, k) } else { out[k - 1] + apply(&closing, k) };
    }
    out
}

/// Time-dependent factors shared by every `z`.
struct Factors {
    a1: Vec<C64>,
    n: Vec<Block2>,
}

fn factors(traj: &Trajectory) -> Factors {
    let dt = traj.dt();
    let series = |f: &dyn Fn(usize) -> C64| (0..traj.len()).map(f).collect::<Vec<C64>>();
    let s = &traj.states;
    let int_c1 = cumulative_simpson(&series(&|k| s[k].c(1)), dt);
    let int_b1 = cumulative_simpson(&series(&|k| s[k].b(1)), dt);
    let int_b2 = cumulative_simpson(&series(&|k| s[k].b(2)), dt);
    let inner = cumulative_simpson(&series(&|k| s[k].a(2) * (int_b2[k] - int_b1[k]).exp()), dt);
    let a1 = (0..traj.len()).map(|k| s[0].a(1) + int_c1[k]).collect();
    let n = (0..traj.len())
        .map(|k| {
            let e1 = int_b1[k].exp();
            Block2::new(e1, e1 * inner[k], ZERO, int_b2[k].exp())
        })
        .collect();
    Factors { a1, n }
}

/// `R(t, z)` from the closed form, for each requested sample time.
pub fn closed_form_weyl_at(traj: &Trajectory, z: C64, times: &[f64]) -> Result<Vec<Block2>> {
    if traj.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    let idx: Vec<usize> = times.iter().map(|&t| traj.index_of(t)).collect::<Result<_>>()?;
    let fac = factors(traj);
    let r0 = weyl_function(&lattice_to_blocks(&traj.states[0]), z, WeylMethod::FiniteSection)?;
    let m0_inv = Block2::unit_lower(fac.a1[0]);
    let smooth: Vec<Block2> = (0..traj.len()).map(|k| Block2::unit_lower(fac.a1[k]) * fac.n[k]).collect();
    let integral = cumulative_simpson_weighted(&smooth, traj.dt(), -z, traj.states[0].t);
    idx.into_iter()
        .map(|k| {
            let t = traj.states[k].t;
            let n_inv = fac.n[k].try_inverse().ok_or(Error::SingularN { time: t })?;
            let tz = m0_inv * r0 - integral[k];
            Ok(Block2::unit_lower(-fac.a1[k]) * tz * n_inv * (z * t).exp())
        })
        .collect()
}

/// `R(t, z)` at one sample time.
pub fn closed_form_weyl(traj: &Trajectory, z: C64, t: f64) -> Result<Block2> {
    Ok(closed_form_weyl_at(traj, z, &[t])?[0])
}

/// `max |closed form - finite-section R_J(j(t))|` over `zs` and `times`.
pub fn closed_form_residual(traj: &Trajectory, zs: &[C64], times: &[f64]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &z in zs {
        let closed = closed_form_weyl_at(traj, z, times)?;
        for (&t, r) in times.iter().zip(closed) {
            let j = lattice_to_blocks(&traj.states[traj.index_of(t)?]);
            let direct = weyl_function(&j, z, WeylMethod::FiniteSection)?;
            worst = worst.max((r - direct).norm_max());
        }
    }
    Ok(worst)
}
