//! Hodge classes from the Chern character of the Hodge bundle.
//!
//! `ch_{2k-1}(E) = B_{2k}/(2k)! [kappa_{2k-1} - sum_i psi_i^{2k-1}
//!   + sum_D [D, sum_j (-1)^j psi_h^j psi_h'^{2k-2-j}]]`
//! over boundary divisor graphs `D`; even parts vanish. Newton's identities
//! turn power sums `p_i = i! ch_i` into `lambda_i`.

use std::collections::HashMap;
use std::sync::LazyLock;

use parking_lot::RwLock;

use crate::algebra::{binomial, factorial, Rational, ULaurent};
use crate::calculus::TautClass;
use crate::error::{Error, Result};
use crate::graph::{enumerate_strata, stable_graphs, DecoratedStratum};

static LAMBDA: LazyLock<RwLock<HashMap<(u32, usize, u32), TautClass>>> = LazyLock::new(Default::default);

/// Bernoulli numbers with `B_1 = -1/2`.
pub fn bernoulli(n: u32) -> Rational {
    let mut b: Vec<Rational> = vec![Rational::one()];
    for m in 1..=n {
        let mut acc = Rational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += binomial(m + 1, k as u32) * bk;
        }
        b.push(-acc / Rational::from(m as i64 + 1));
    }
    b[n as usize].clone()
}

/// `ch_d(E)` on `M(g, n)`.
pub fn chern_character(g: u32, n: usize, d: u32) -> TautClass {
    let mut out = TautClass::zero(g, n);
    if d == 0 || d % 2 == 0 || d as i64 > out.dim() {
        return out;
    }
    let a = d as u8;
    out.add_assign(&TautClass::kappa(g, n, a));
    for i in 1..=n {
        out.add_assign(&TautClass::psi_monomial(g, n, &[(i, a)]).scale(&-Rational::one()));
    }
    for gr in stable_graphs(g, n, 1).iter() {
        let (h0, h1) = gr.edge_halves(0);
        for j in 0..=d - 1 {
            let mut psi = vec![0u8; gr.num_half_edges()];
            psi[h0] = j as u8;
            psi[h1] = (d - 1 - j) as u8;
            let sign = if j % 2 == 1 { -Rational::one() } else { Rational::one() };
            let s = DecoratedStratum::from_canonical(gr.clone(), psi, vec![Vec::new(); gr.num_vertices()]);
            out.add_term(s, sign);
        }
    }
    out.scale(&(bernoulli(d + 1) / factorial(d + 1)))
}

/// `lambda_i` on `M(g, n)`.
pub fn lambda_class(g: u32, n: usize, i: u32) -> Result<TautClass> {
    if i > g {
        return Err(Error::Domain(format!("lambda_{i} needs i <= g = {g}")));
    }
    if let Some(c) = LAMBDA.read().get(&(g, n, i)) {
        return Ok(c.clone());
    }
    let value = if i == 0 {
        TautClass::one(g, n)
    } else {
        // i * lambda_i = sum_{j=1}^{i} (-1)^{j-1} lambda_{i-j} p_j
        let mut acc = TautClass::zero(g, n);
        for j in 1..=i {
            if j % 2 == 0 {
                continue;
            }
            let p = chern_character(g, n, j).scale(&factorial(j));
            if p.is_empty() {
                continue;
            }
            let prev = lambda_class(g, n, i - j)?;
            acc.add_assign(&prev.multiply(&p));
        }
        acc.scale(&Rational::new(1, i as i64))
    };
    Ok(LAMBDA.write().entry((g, n, i)).or_insert(value).clone())
}

/// `sum_{i=0}^{g} sign^i lambda_i u^{g-i}`.
pub fn hodge_poly(g: u32, n: usize, sign: i32) -> ULaurent<TautClass> {
    let mut out = ULaurent::zero();
    for i in 0..=g {
        let l = lambda_class(g, n, i).expect("i <= g");
        let c = if sign < 0 && i % 2 == 1 { l.scale(&-Rational::one()) } else { l };
        out.add_term((g - i) as i32, c);
    }
    out
}

/// Mumford's relation `Lambda^-(u) Lambda^+(u) = u^{2g}` pairs to zero in every degree.
pub fn mumford_check(g: u32, n: usize) -> bool {
    mumford_defect(g, n).is_empty()
}

/// Nonzero pairings `(degree, test stratum index, value)` of the Mumford relation.
pub fn mumford_defect(g: u32, n: usize) -> Vec<(u32, usize, Rational)> {
    let minus = hodge_poly(g, n, -1);
    let plus = hodge_poly(g, n, 1);
    let prod = minus.mul_with(&plus, |x, y| x.multiply(y));
    let target = ULaurent::monomial(2 * g as i32, TautClass::one(g, n));
    let diff = prod.sub(&target);
    let dim = 3 * g as i64 - 3 + n as i64;
    let mut out = Vec::new();
    for (k, c) in diff.terms() {
        let d = 2 * g as i64 - k as i64;
        if d > dim || d < 0 {
            continue;
        }
        let tests = enumerate_strata(g, n, (dim - d) as u32);
        for (i, v) in c.pairing_vector(&tests).into_iter().enumerate() {
            if !v.is_zero() {
                out.push((d as u32, i, v));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(2), Rational::new(1, 6));
        assert_eq!(bernoulli(4), Rational::new(-1, 30));
        assert_eq!(bernoulli(6), Rational::new(1, 42));
        assert_eq!(bernoulli(3), Rational::zero());
    }

    #[test]
    fn lambda_zero_and_range() {
        assert_eq!(lambda_class(2, 1, 0).unwrap(), TautClass::one(2, 1));
        assert!(lambda_class(1, 1, 2).is_err());
    }

    #[test]
    fn lambda_one_on_m11() {
        let l = lambda_class(1, 1, 1).unwrap();
        assert_eq!(l.integrate(), Rational::new(1, 24));
        assert_eq!(l.integrate(), TautClass::psi(1, 1, 1).integrate());
    }

    #[test]
    fn lambda_one_times_psi_on_m12() {
        let l = lambda_class(1, 2, 1).unwrap();
        assert_eq!(l.pair(&TautClass::psi(1, 2, 1)), Rational::new(1, 24));
    }

    #[test]
    fn hodge_poly_shapes() {
        let h = hodge_poly(0, 3, 1);
        assert_eq!(h, ULaurent::monomial(0, TautClass::one(0, 3)));
        let h = hodge_poly(1, 1, -1);
        let l = lambda_class(1, 1, 1).unwrap();
        assert_eq!(h.coeff(1), Some(&TautClass::one(1, 1)));
        assert_eq!(h.coeff(0), Some(&l.scale(&-Rational::one())));
        let h = hodge_poly(2, 1, 1);
        assert_eq!(h.coeff(2), Some(&TautClass::one(2, 1)));
        assert_eq!(h.coeff(0), Some(&lambda_class(2, 1, 2).unwrap()));
    }

    #[test]
    fn mumford_low_cases() {
        assert!(mumford_check(1, 1));
        assert!(mumford_check(1, 2));
        assert!(mumford_check(2, 1));
    }

    #[test]
    fn lambda_g_formula_genus_two() {
        // int_{M(g,1)} lambda_g psi_1^{2g-2} = (2^{2g-1}-1)|B_{2g}| / (2^{2g-1} (2g)!)
        let l2 = lambda_class(2, 1, 2).unwrap();
        let p = TautClass::psi_monomial(2, 1, &[(1, 2)]);
        assert_eq!(l2.pair(&p), Rational::new(7, 5760));
    }
}
