//! The master relation `Xi^m_{g,n}` as a sum over star trees.
//!
//! `Xi(T) = u^{2g-2+m} prod_e a(e)/u (b_T)_*( sum_d Psi_d/(-u)^d
//!   tensor_e sum_d D(e)_d/u^d )` with `Psi = prod_e 1/(1 - a(e) psi_e)` at the root and
//! `D(e) = lambda_g DR_g(a(legs), -a(e))/(1 - a(e) psi_last)` at a leaf.
//! Unstable vertices carry the scalar `a(e)^{-1}` in degree `-1` instead of a class.

mod check;

use std::collections::HashMap;
use std::sync::LazyLock;

use parking_lot::RwLock;

use crate::algebra::{laurent_negative_part, Rational, ULaurent};
use crate::audit::{self, formal, Sym};
use crate::calculus::{boundary_pushforward, TautClass};
use crate::error::{Error, Result};
use crate::graph::strata::compositions;
use crate::graph::{enumerate_pssrt, StarTree};
use crate::special::{dr_cycle, lambda_class};

pub use check::{
    pairing_against_tests, polynomiality_check, polynomiality_check_with, CheckOptions, PairingRecord, PolyRecord, TreeSummary,
    Verdict, XiReport, CERTIFICATION,
};

/// A vertex contribution: a Laurent series of classes, or a formal scalar at an unstable vertex.
#[derive(Clone, Debug, PartialEq)]
pub enum VertexFactor {
    Class(ULaurent<TautClass>),
    Scalar(ULaurent<Rational>),
}

impl VertexFactor {
    pub fn as_class(&self) -> Option<&ULaurent<TautClass>> {
        match self {
            VertexFactor::Class(c) => Some(c),
            VertexFactor::Scalar(_) => None,
        }
    }

    pub fn as_scalar(&self) -> Option<&ULaurent<Rational>> {
        match self {
            VertexFactor::Scalar(s) => Some(s),
            VertexFactor::Class(_) => None,
        }
    }
}

fn checked_parts(tree: &StarTree, a: &[i64]) -> Result<Vec<i64>> {
    if a.len() != tree.n {
        return Err(Error::Domain(format!("expected {} values of a, got {}", tree.n, a.len())));
    }
    if let Some(x) = a.iter().find(|&&x| x <= 0) {
        return Err(Error::Domain(format!("a must be positive, got {x}")));
    }
    Ok(tree.edge_parts(a))
}

fn sign(k: u32) -> Rational {
    if k % 2 == 1 {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// `sum_d Psi(v_r)_d / (-u)^d`, truncated at the root dimension.
pub fn root_class(tree: &StarTree, a: &[i64]) -> Result<VertexFactor> {
    let parts = checked_parts(tree, a)?;
    if tree.root_is_unstable() {
        return Ok(VertexFactor::Scalar(ULaurent::monomial(1, -Rational::from(parts[0]).recip())));
    }
    let (g, n) = tree.root_space();
    let ne = tree.num_edges();
    let dim = 3 * g as i64 - 3 + n as i64;
    let mut out = ULaurent::zero();
    for d in 0..=dim.max(0) as u32 {
        let mut acc = TautClass::zero(g, n);
        for exps in compositions(ne, d) {
            let mut c = sign(d);
            for (e, &k) in exps.iter().enumerate() {
                c *= &Rational::from(parts[e]).pow(k as i32);
            }
            let mono: Vec<(usize, u8)> = exps.iter().enumerate().map(|(e, &k)| (e + 1, k)).collect();
            acc.add_assign(&TautClass::psi_monomial(g, n, &mono).scale(&c));
        }
        out.add_term(-(d as i32), acc);
    }
    Ok(VertexFactor::Class(out))
}

type LeafKey = (u32, Vec<i64>, u32);
static LEAF: LazyLock<RwLock<HashMap<LeafKey, TautClass>>> = LazyLock::new(Default::default);

/// `lambda_g DR_g(parts) psi_last^j` on `M(g, parts.len())`.
fn leaf_piece(g: u32, parts: &[i64], j: u32) -> Result<TautClass> {
    let key = (g, parts.to_vec(), j);
    if let Some(c) = LEAF.read().get(&key) {
        return Ok(c.clone());
    }
    let n = parts.len();
    let value = if j > 0 {
        leaf_piece(g, parts, j - 1)?.multiply(&TautClass::psi(g, n, n))
    } else if g == 0 {
        TautClass::one(0, n)
    } else {
        lambda_class(g, n, g)?.multiply(&dr_cycle(g, parts)?)
    };
    Ok(LEAF.write().entry(key).or_insert(value).clone())
}

/// `sum_d D(v_e)_d / u^d` for the leaf on edge `e`.
pub fn leaf_class(tree: &StarTree, e: usize, a: &[i64]) -> Result<VertexFactor> {
    let parts = checked_parts(tree, a)?;
    if e >= tree.num_edges() {
        return Err(Error::Domain(format!("edge {e} out of range")));
    }
    let ae = parts[e];
    if tree.leaf_is_unstable(e) {
        return Ok(VertexFactor::Scalar(ULaurent::monomial(1, Rational::from(ae).recip())));
    }
    let (g, n) = tree.leaf_space(e);
    let mut leaf_parts: Vec<i64> = tree.leaves[e].legs.iter().map(|&i| a[i - 1]).collect();
    leaf_parts.push(-ae);
    assert_eq!(leaf_parts.iter().sum::<i64>(), 0, "leaf parts balance");
    let dim = 3 * g as i64 - 3 + n as i64;
    let mut out = ULaurent::zero();
    let mut j = 0u32;
    while 2 * g as i64 + j as i64 <= dim {
        let c = leaf_piece(g, &leaf_parts, j)?.scale(&Rational::from(ae).pow(j as i32));
        out.add_term(-(2 * g as i32 + j as i32), c);
        j += 1;
    }
    Ok(VertexFactor::Class(out))
}

/// `u^{2g-2+m-|E|}` and `prod_e a(e)`.
pub fn prefactor(tree: &StarTree, a: &[i64]) -> Result<(i32, Rational)> {
    let parts = checked_parts(tree, a)?;
    let shift = 2 * tree.g as i32 - 2 + tree.m as i32 - tree.num_edges() as i32;
    Ok((shift, parts.iter().map(|&x| Rational::from(x)).product()))
}

/// Whether `root_class`, `leaf_class` and `prefactor` agree with the symbolic
/// integrand of the audit module at `a`.
pub fn matches_integrand(tree: &StarTree, a: &[i64]) -> Result<bool> {
    let terms = 3 * tree.g as i32 + tree.num_markings() as i32;
    let f = audit::integrand_factors(tree, terms);
    let sub = |x: &audit::FormalExpr| audit::substitute_parts(x, tree, a);

    let (shift, pre) = prefactor(tree, a)?;
    let want = audit::FormalExpr::monomial(pre, &[(Sym::U, shift)]);
    if sub(&f.prefactor) != want {
        return Ok(false);
    }

    let root = root_class(tree, a)?;
    let root_ok = match &root {
        VertexFactor::Scalar(s) => scalar_matches(&sub(&f.root), s),
        VertexFactor::Class(c) => {
            let (g, n) = tree.root_space();
            let realized = realize(&sub(&f.root), TautClass::zero(g, n), |m| {
                let mono: Vec<(usize, u8)> =
                    (0..tree.num_edges()).map(|e| (e + 1, formal::exponent(m, Sym::Psi(e)) as u8)).collect();
                Ok(TautClass::psi_monomial(g, n, &mono))
            })?;
            &realized == c
        }
    };
    if !root_ok {
        return Ok(false);
    }

    for e in 0..tree.num_edges() {
        let leaf = leaf_class(tree, e, a)?;
        let ok = match &leaf {
            VertexFactor::Scalar(s) => scalar_matches(&sub(&f.leaves[e]), s),
            VertexFactor::Class(c) => {
                let (g, n) = tree.leaf_space(e);
                let mut parts: Vec<i64> = tree.leaves[e].legs.iter().map(|&i| a[i - 1]).collect();
                parts.push(-parts.iter().sum::<i64>());
                let realized = realize(&sub(&f.leaves[e]), TautClass::zero(g, n), |m| {
                    let has_base = formal::exponent(m, Sym::Dr(e)) == 1 && formal::exponent(m, Sym::LambdaTop(e)) == 1;
                    if g > 0 && !has_base {
                        return Ok(TautClass::zero(g, n));
                    }
                    leaf_piece(g, &parts, formal::exponent(m, Sym::PsiLast(e)) as u32)
                })?;
                &realized == c
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

fn scalar_matches(x: &audit::FormalExpr, s: &ULaurent<Rational>) -> bool {
    let mut got = ULaurent::zero();
    for (m, c) in x.terms() {
        got.add_term(formal::exponent(m, Sym::U), c.clone());
    }
    &got == s
}

/// Turn a formal vertex series into classes, `u`-power by `u`-power.
fn realize(
    x: &audit::FormalExpr,
    zero: TautClass,
    class_of: impl Fn(&formal::Monomial) -> Result<TautClass>,
) -> Result<ULaurent<TautClass>> {
    let mut out = ULaurent::zero();
    for (m, c) in x.terms() {
        let k = formal::exponent(m, Sym::U);
        let mut term = zero.clone();
        term.add_assign(&class_of(m)?.scale(c));
        if !term.is_empty() {
            out.add_term(k, term);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct XiTerm {
    pub tree: StarTree,
    pub value: ULaurent<TautClass>,
}

impl XiTerm {
    /// The coefficient of `u^k` has degree `2g-2+m-k`.
    pub fn grading_consistent(&self) -> bool {
        let top = 2 * self.tree.g as i64 - 2 + self.tree.m as i64;
        self.value.terms().all(|(k, c)| {
            let d = top - k as i64;
            d >= 0 && c.is_homogeneous(d as u32)
        })
    }

    pub fn negative_part(&self) -> ULaurent<TautClass> {
        laurent_negative_part(&self.value)
    }
}

enum Piece<'a> {
    Class(&'a TautClass),
    Scalar(&'a Rational),
}

/// `Xi(T)` at integer `a`.
pub fn xi_of_tree(tree: &StarTree, a: &[i64]) -> Result<XiTerm> {
    let (shift, pre) = prefactor(tree, a)?;
    let mut factors = vec![root_class(tree, a)?];
    for e in 0..tree.num_edges() {
        factors.push(leaf_class(tree, e, a)?);
    }
    let ambient_dim = 3 * tree.g as i64 - 3 + tree.num_markings() as i64;
    let options: Vec<Vec<(i32, Piece)>> = factors
        .iter()
        .map(|f| match f {
            VertexFactor::Class(c) => c.terms().filter(|(_, x)| !x.is_empty()).map(|(k, x)| (k, Piece::Class(x))).collect(),
            VertexFactor::Scalar(s) => s.terms().map(|(k, x)| (k, Piece::Scalar(x))).collect(),
        })
        .collect();
    let mut value = ULaurent::zero();
    let ne = tree.num_edges() as i64;
    let mut pick = vec![0usize; options.len()];
    if options.iter().any(|o| o.is_empty()) {
        return Ok(XiTerm { tree: tree.clone(), value });
    }
    loop {
        // every vertex in u-degree k carries class degree -k; each edge adds one
        let u_sum: i32 = pick.iter().zip(&options).map(|(&i, o)| o[i].0).sum();
        if ne - (u_sum as i64) <= ambient_dim {
            let mut scalar = pre.clone();
            let mut classes: Vec<Option<&TautClass>> = Vec::with_capacity(options.len());
            for (&i, o) in pick.iter().zip(&options) {
                match o[i].1 {
                    Piece::Class(c) => classes.push(Some(c)),
                    Piece::Scalar(s) => {
                        scalar *= s;
                        classes.push(None);
                    }
                }
            }
            let pushed = boundary_pushforward(tree, classes[0], &classes[1..])?;
            if !pushed.is_empty() {
                value.add_term(shift + u_sum, pushed.scale(&scalar));
            }
        }
        let mut i = 0;
        loop {
            if i == pick.len() {
                let term = XiTerm { tree: tree.clone(), value };
                debug_assert!(term.grading_consistent(), "grading of {}", term.tree);
                return Ok(term);
            }
            pick[i] += 1;
            if pick[i] < options[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// `Xi^m_{g,n}` at integer `a`.
pub fn xi_total(g: u32, n: usize, m: usize, a: &[i64]) -> Result<ULaurent<TautClass>> {
    let mut out = ULaurent::zero();
    for t in enumerate_pssrt(g, n, m)? {
        out = out.add(&xi_of_tree(&t, a)?.value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Leaf;

    fn tree(g: u32, n: usize, m: usize, gr: u32, leaves: &[(u32, &[usize])]) -> StarTree {
        StarTree {
            g,
            n,
            m,
            root_genus: gr,
            leaves: leaves.iter().map(|&(genus, legs)| Leaf { genus, legs: legs.to_vec() }).collect(),
        }
    }

    #[test]
    fn root_class_examples() {
        let t = tree(0, 2, 1, 0, &[(0, &[1]), (0, &[2])]);
        let r = root_class(&t, &[2, 3]).unwrap();
        assert_eq!(r, VertexFactor::Class(ULaurent::monomial(0, TautClass::one(0, 3))));
        let t = tree(0, 2, 1, 0, &[(0, &[1, 2])]);
        let r = root_class(&t, &[2, 3]).unwrap();
        assert_eq!(r, VertexFactor::Scalar(ULaurent::monomial(1, Rational::new(-1, 5))));
        // (1,1,2) single edge, genus-1 root on M(1,3): 1/(1 - a psi) read against (-u)^d
        let t = tree(1, 1, 2, 1, &[(0, &[1])]);
        assert!(t.leaf_is_unstable(0));
        let r = root_class(&t, &[3]).unwrap();
        let c = r.as_class().unwrap();
        assert_eq!(c.coeff(-1), Some(&TautClass::psi(1, 3, 1).scale(&Rational::from(-3))));
        assert_eq!(c.coeff(-2), Some(&TautClass::psi_monomial(1, 3, &[(1, 2)]).scale(&Rational::from(9))));
    }

    #[test]
    fn leaf_class_examples() {
        let t = tree(0, 2, 2, 0, &[(0, &[1, 2])]);
        let l = leaf_class(&t, 0, &[2, 3]).unwrap();
        let c = l.as_class().unwrap();
        // on M(0,3) only the constant term survives
        assert_eq!(c, &ULaurent::monomial(0, TautClass::one(0, 3)));
        let t = tree(0, 3, 1, 0, &[(0, &[1, 2, 3])]);
        let c = leaf_class(&t, 0, &[1, 1, 2]).unwrap().as_class().unwrap().clone();
        assert_eq!(c.coeff(-1), Some(&TautClass::psi(0, 4, 4).scale(&Rational::from(4))));
        let t = tree(0, 2, 1, 0, &[(0, &[1]), (0, &[2])]);
        assert_eq!(
            leaf_class(&t, 1, &[2, 5]).unwrap(),
            VertexFactor::Scalar(ULaurent::monomial(1, Rational::new(1, 5)))
        );
    }

    #[test]
    fn genus_one_leaf_integral() {
        // leaf (g=1; leg 1) on M(1,2): u^{-2} lambda_1 DR_1(a,-a), pairing to a^2/24 against 1
        let t = tree(1, 1, 2, 0, &[(1, &[1])]);
        for a in 1..=3i64 {
            let c = leaf_class(&t, 0, &[a]).unwrap().as_class().unwrap().clone();
            let top = c.coeff(-2).unwrap();
            assert_eq!(top.integrate(), Rational::new(a * a, 24));
            assert_eq!(c.min_exponent(), Some(-2));
        }
    }

    #[test]
    fn two_point_trees() {
        let joined = tree(0, 2, 1, 0, &[(0, &[1, 2])]);
        let split = tree(0, 2, 1, 0, &[(0, &[1]), (0, &[2])]);
        for a in [[1, 1], [2, 5], [4, 3]] {
            let x = xi_of_tree(&joined, &a).unwrap();
            assert_eq!(x.value, ULaurent::monomial(-1, TautClass::one(0, 3).scale(&-Rational::one())));
            let y = xi_of_tree(&split, &a).unwrap();
            assert_eq!(y.value, ULaurent::monomial(-1, TautClass::one(0, 3)));
            assert!(xi_total(0, 2, 1, &a).unwrap().is_zero());
        }
    }

    #[test]
    fn nonpositive_a_is_error() {
        let t = tree(0, 2, 1, 0, &[(0, &[1, 2])]);
        assert!(root_class(&t, &[0, 1]).is_err());
        assert!(xi_total(0, 2, 1, &[1, -1]).is_err());
    }

    #[test]
    fn grading_is_consistent() {
        for (g, n, m) in [(0, 3, 1), (0, 2, 2), (1, 1, 1), (1, 2, 1)] {
            for t in enumerate_pssrt(g, n, m).unwrap() {
                let a: Vec<i64> = (1..=n as i64).map(|i| i + 1).collect();
                let x = xi_of_tree(&t, &a).unwrap();
                assert!(x.grading_consistent(), "{t}");
                let floor = -(3 * g as i32 - 3 + (n + m) as i32) - 1;
                assert!(x.value.min_exponent().is_none_or(|k| k >= floor));
            }
        }
    }

    #[test]
    fn lowest_terms_cancel_in_genus_zero() {
        for n in 2..=4 {
            let a: Vec<i64> = (1..=n as i64).map(|i| 2 * i - 1).collect();
            let mut lowest: HashMap<i32, TautClass> = HashMap::new();
            for t in enumerate_pssrt(0, n, 1).unwrap() {
                let x = xi_of_tree(&t, &a).unwrap();
                for (k, c) in x.value.terms() {
                    if k == -1 {
                        lowest.entry(k).or_insert_with(|| TautClass::zero(0, n + 1)).add_assign(&c.degree_part(0));
                    }
                }
            }
            assert!(lowest.values().all(|c| c.is_empty()), "n = {n}");
        }
    }

    #[test]
    fn permuting_a_permutes_markings() {
        let a = [1i64, 2, 4];
        let perm = [1usize, 2, 0];
        let mut b = [0i64; 3];
        for (i, &p) in perm.iter().enumerate() {
            b[p] = a[i];
        }
        let x = xi_total(0, 3, 1, &a).unwrap();
        let y = xi_total(0, 3, 1, &b).unwrap();
        let mut full = perm.to_vec();
        full.push(3);
        assert!(!x.is_zero());
        let relabeled = x.map(|_, c| c.relabel_markings(&full));
        assert_eq!(relabeled, y);
    }
}
