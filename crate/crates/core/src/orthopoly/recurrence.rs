use crate::blockcore::{Block2, BlockJacobi, LatticeState, ONE};
use crate::error::{Error, Result};
use crate::functional::VectorFunctional;

use super::poly::{MatrixPoly, ScalarPoly, VectorPoly};

/// Scalar polynomials `p_0 .. p_{n_max}` of the five-term recurrence
/// `p_{n+2} = x^2 p_n - a_{n+2} p_{n+1} - b_{n+1} p_n - c_n p_{n-1} - d_{n-1} p_{n-2}`
/// with `p_{-1} = 0`, `p_0 = 1`, `p_1 = x - a_1`.
pub fn five_term_sequence(s: &LatticeState, n_max: usize) -> Vec<ScalarPoly> {
    let mut p: Vec<ScalarPoly> = Vec::with_capacity(n_max + 1);
    p.push(ScalarPoly::one());
    if n_max >= 1 {
        p.push(ScalarPoly(vec![-s.a(1), ONE]));
    }
    let zero = ScalarPoly::zero();
    for n in 0..n_max.saturating_sub(1) {
        let ni = n as i64;
        let at = |k: i64| -> &ScalarPoly { if k < 0 { &zero } else { &p[k as usize] } };
        let next = &(&(&(&p[n].shift(2) - &at(ni + 1).scale(s.a(ni + 2)))
            - &at(ni).scale(s.b(ni + 1)))
            - &at(ni - 1).scale(s.c(ni)))
            - &at(ni - 2).scale(s.d(ni - 1));
        p.push(next);
    }
    p
}

fn b0(a1: crate::blockcore::C64) -> VectorPoly {
    VectorPoly::new(ScalarPoly::one(), ScalarPoly(vec![-a1, ONE]))
}

fn inverse_of_a(j: &BlockJacobi, m: usize) -> Result<Block2> {
    j.a[m].try_inverse().ok_or_else(|| {
        Error::StructureViolation(format!("A_{m} = {} is not invertible", j.a[m]))
    })
}

/// `B_0 .. B_{m_max}` from `B_{m+1} = A_m^{-1} (x^2 B_m - B_m B_m - C_m B_{m-1})`,
/// `B_{-1} = 0`, `B_0 = [1, x - a_1]^T`. Requires `m_max <= N`.
pub fn vector_sequence(j: &BlockJacobi, m_max: usize) -> Result<Vec<VectorPoly>> {
    check_order(j, m_max)?;
    let mut out = vec![b0(j.a1)];
    for m in 0..m_max {
        let prev = if m == 0 { VectorPoly::zero() } else { out[m - 1].clone() };
        let rhs = out[m]
            .shift(2)
            .sub(&out[m].left_mul(&j.b[m]))
            .sub(&prev.left_mul(&j.c[m]));
        out.push(rhs.left_mul(&inverse_of_a(j, m)?));
    }
    Ok(out)
}

/// `V_0 .. V_{m_max}` from `y V_m = A_m V_{m+1} + B_m V_m + C_m V_{m-1}`,
/// `V_{-1} = 0`, `V_0 = M`.
pub fn matrix_sequence(j: &BlockJacobi, m_max: usize) -> Result<Vec<MatrixPoly>> {
    check_order(j, m_max)?;
    let mut out = vec![MatrixPoly::constant(j.gauge())];
    for m in 0..m_max {
        let prev = if m == 0 { MatrixPoly::zero() } else { out[m - 1].clone() };
        let rhs = out[m]
            .shift()
            .sub(&out[m].left_mul(&j.b[m]))
            .sub(&prev.left_mul(&j.c[m]));
        out.push(rhs.left_mul(&inverse_of_a(j, m)?));
    }
    Ok(out)
}

fn check_order(j: &BlockJacobi, m_max: usize) -> Result<()> {
    if m_max > j.n_blocks() {
        return Err(Error::TruncationTooSmall(format!(
            "order {m_max} needs A_0 .. A_{} but the truncation has {} block rows",
            m_max - 1,
            j.n_blocks()
        )));
    }
    Ok(())
}

/// Right-sided sequence `y G_n = G_{n+1} C_{n+1} + G_n B_n + G_{n-1} A_{n-1}`,
/// `G_{-1} = 0`, seeded with `G_0 = (U(B_0))^{-1}` so that `<G_0, B_0> = I`.
pub fn g_sequence(j: &BlockJacobi, u: &VectorFunctional, n_max: usize) -> Result<Vec<MatrixPoly>> {
    if n_max >= j.n_blocks() {
        return Err(Error::TruncationTooSmall(format!(
            "G_{n_max} needs C_{n_max} but the truncation has {} block rows",
            j.n_blocks()
        )));
    }
    let ub0 = u.act_shifted(&b0(j.a1), 0)?;
    let g0 = ub0.try_inverse().ok_or(Error::SingularNormalization { det: ub0.det().norm() })?;
    let mut out = vec![MatrixPoly::constant(g0)];
    for n in 0..n_max {
        let c_inv = j.c[n + 1].try_inverse().ok_or(Error::SingularC { index: n + 1 })?;
        let mut rhs = out[n].shift().sub(&out[n].right_mul(&j.b[n]));
        if n >= 1 {
            rhs = rhs.sub(&out[n - 1].right_mul(&j.a[n - 1]));
        }
        out.push(rhs.right_mul(&c_inv));
    }
    Ok(out)
}

/// `((G(x^2))^T U)(B) = sum_k U(x^{2k} B) G_k`.
pub fn pairing_functional(g: &MatrixPoly, b: &VectorPoly, u: &VectorFunctional) -> Result<Block2> {
    let mut acc = Block2::ZERO;
    for (k, gk) in g.coeffs().iter().enumerate() {
        acc += u.act_shifted(b, 2 * k)? * *gk;
    }
    Ok(acc)
}

/// `sum_{i,k} V_i U_{i+k} G_k`: the moment form of `(1/2 pi i) \oint V F G dz`,
/// with an extra factor `y^extra`.
pub fn pairing_moments(
    v: &MatrixPoly,
    g: &MatrixPoly,
    u: &VectorFunctional,
    extra: usize,
) -> Result<Block2> {
    let mut acc = Block2::ZERO;
    for (i, vi) in v.coeffs().iter().enumerate() {
        for (k, gk) in g.coeffs().iter().enumerate() {
            acc += *vi * u.block_moment(i + k + extra)? * *gk;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockcore::{lattice_to_blocks, Coef, C64};
    use crate::orthopoly::poly::unpack;

    fn generic(n_blocks: usize) -> LatticeState {
        let mut s = LatticeState::zeros(n_blocks);
        for (k, coef) in Coef::ALL.into_iter().enumerate() {
            for n in 1..=s.seq(coef).len() {
                let v = C64::new(((n * 7 + k * 3) as f64).sin() * 0.6, ((n + k) as f64).cos() * 0.2);
                s.set(coef, n, v).unwrap();
            }
        }
        s
    }

    #[test]
    fn first_polynomials() {
        let s = generic(3);
        let p = five_term_sequence(&s, 3);
        assert_eq!(p[1], ScalarPoly(vec![-s.a(1), ONE]));
        let expected = ScalarPoly(vec![s.a(2) * s.a(1) - s.b(1), -s.a(2), ONE]);
        assert!(p[2].max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn zero_lattice_gives_monomials() {
        let p = five_term_sequence(&LatticeState::zeros(3), 6);
        for (n, q) in p.iter().enumerate() {
            assert_eq!(q.clone().trimmed(), ScalarPoly::monomial(n));
        }
        let j = lattice_to_blocks(&LatticeState::zeros(3));
        let b = vector_sequence(&j, 3).unwrap();
        for (m, bm) in b.iter().enumerate() {
            assert_eq!(bm.top.clone().trimmed(), ScalarPoly::monomial(2 * m));
            assert_eq!(bm.bot.clone().trimmed(), ScalarPoly::monomial(2 * m + 1));
        }
        let v = matrix_sequence(&j, 3).unwrap();
        for (m, vm) in v.iter().enumerate() {
            assert_eq!(vm.degree(), Some(m));
            assert_eq!(vm.leading(), Block2::IDENTITY);
            assert!(vm.coeffs()[..m].iter().all(|c| *c == Block2::ZERO));
        }
    }

    #[test]
    fn vector_and_scalar_recurrences_agree() {
        let s = generic(5);
        let j = lattice_to_blocks(&s);
        let p = five_term_sequence(&s, 9);
        let b = vector_sequence(&j, 4).unwrap();
        let v = matrix_sequence(&j, 4).unwrap();
        for m in 0..=4 {
            assert!(b[m].top.max_abs_diff(&p[2 * m]) < 1e-12, "top {m}");
            assert!(b[m].bot.max_abs_diff(&p[2 * m + 1]) < 1e-12, "bot {m}");
            assert!(unpack(&b[m]).max_abs_diff(&v[m]) < 1e-12, "V_{m}");
        }
    }

    #[test]
    fn g_needs_invertible_c() {
        let j = lattice_to_blocks(&LatticeState::zeros(4));
        let u = VectorFunctional::free(8);
        assert!(matches!(g_sequence(&j, &u, 2), Err(Error::SingularC { index: 1 })));
        assert_eq!(g_sequence(&j, &u, 0).unwrap()[0], MatrixPoly::constant(Block2::IDENTITY));
    }
}
