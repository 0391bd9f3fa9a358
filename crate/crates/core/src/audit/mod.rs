//! Symbolic audit of the star-tree localization contributions.
//!
//! `alpha1(T)` and `alpha2(T)` are the two localization factors of a star tree
//! `T`, written over opaque atoms for `a(e)`, `a(e)!`, `a(e)^{a(e)}` and
//! `u^{a(e)}`. After Mumford's relation at the root their product must be the
//! integrand of `Xi(T)` with `u` replaced by `-u`. Everything is formal and
//! truncated at the total class degree `3g-3+n+m`.
//!
//! Unstable vertices enter through the formal rule `1/(1 - w) -> w^{-1}`, with
//! `w` the (degree one) psi term of the geometric series.

pub mod formal;

use crate::algebra::Rational;
use crate::graph::StarTree;
pub use formal::{FormalExpr, Monomial, Sym};

fn weight_for(tree: &StarTree) -> impl Fn(Sym) -> i32 + '_ {
    move |s| match s {
        Sym::Psi(_) | Sym::PsiLast(_) => 1,
        Sym::Lambda(i) => i as i32,
        Sym::Dr(e) | Sym::LambdaTop(e) => tree.leaves[e].genus as i32,
        _ => 0,
    }
}

/// Total class degree kept by the audit, `3g-3+n+m`.
pub fn truncation_degree(tree: &StarTree) -> i32 {
    3 * tree.g as i32 - 3 + tree.n as i32 + tree.m as i32
}

fn unstable_count(tree: &StarTree) -> i32 {
    tree.root_is_unstable() as i32 + (0..tree.num_edges()).filter(|&e| tree.leaf_is_unstable(e)).count() as i32
}

fn sign(k: i64) -> Rational {
    if k.rem_euclid(2) == 1 {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// `1/(1 - w)` for `w = c u^{-1} a(e) psi`, or the marker `w^{-1}` at an unstable vertex.
fn geometric(c: Rational, e: usize, psi: Sym, unstable: bool, terms: i32) -> FormalExpr {
    if unstable {
        return FormalExpr::monomial(c.recip(), &[(Sym::U, 1), (Sym::Part(e), -1), (psi, -1)]);
    }
    let mut out = FormalExpr::zero();
    for j in 0..=terms.max(0) {
        out = out.add(&FormalExpr::monomial(c.pow(j), &[(Sym::U, -j), (Sym::Part(e), j), (psi, j)]));
    }
    out
}

/// `sum_{i=0}^{g} s^i lambda_i u^{g-i}` over root symbols.
fn hodge_sum(g: u32, s: i64) -> FormalExpr {
    let mut out = FormalExpr::zero();
    for i in 0..=g {
        let mut f = vec![(Sym::U, (g - i) as i32)];
        if i > 0 {
            f.push((Sym::Lambda(i), 1));
        }
        let c = if s < 0 { sign(i as i64) } else { Rational::one() };
        out = out.add(&FormalExpr::monomial(c, &f));
    }
    out
}

struct Ctx<'a> {
    tree: &'a StarTree,
    bound: i32,
}

impl<'a> Ctx<'a> {
    fn new(tree: &'a StarTree) -> Self {
        Ctx { tree, bound: truncation_degree(tree) + unstable_count(tree) }
    }

    fn mul(&self, x: &FormalExpr, y: &FormalExpr) -> FormalExpr {
        x.mul_truncated(y, self.bound, &weight_for(self.tree))
    }

    fn product(&self, factors: impl IntoIterator<Item = FormalExpr>) -> FormalExpr {
        factors.into_iter().fold(FormalExpr::one(), |acc, f| self.mul(&acc, &f))
    }
}

/// `alpha_1(T)`: the root factor with its Hodge polynomial, tensored with the leaf DR factors.
pub fn alpha1(tree: &StarTree) -> FormalExpr {
    let ctx = Ctx::new(tree);
    let ne = tree.num_edges();
    let mut factors = vec![
        FormalExpr::monomial(-Rational::one(), &[(Sym::U, -(ne as i32) - 1)]),
        hodge_sum(tree.root_genus, -1),
    ];
    for e in 0..ne {
        factors.push(FormalExpr::monomial(
            Rational::one(),
            &[(Sym::Part(e), 1), (Sym::SelfPower(e), 1), (Sym::Factorial(e), -1), (Sym::UPart(e), -1)],
        ));
        factors.push(geometric(Rational::one(), e, Sym::Psi(e), tree.root_is_unstable(), ctx.bound));
    }
    for e in 0..ne {
        if tree.leaves[e].genus > 0 {
            factors.push(FormalExpr::sym(Sym::Dr(e), 1));
        }
        factors.push(geometric(-Rational::one(), e, Sym::PsiLast(e), tree.leaf_is_unstable(e), ctx.bound));
    }
    ctx.product(factors)
}

/// `alpha_2(T)`: the inverse Euler class of the moving part of the obstruction theory.
pub fn alpha2(tree: &StarTree) -> FormalExpr {
    let ctx = Ctx::new(tree);
    let ne = tree.num_edges() as i64;
    let s = sign(ne - 1 + tree.g as i64 + tree.m as i64 + tree.root_genus as i64);
    let mut factors = vec![
        FormalExpr::monomial(s, &[(Sym::U, (ne - 1) as i32 + tree.m as i32)]),
        hodge_sum(tree.root_genus, 1),
    ];
    for e in 0..tree.num_edges() {
        factors.push(FormalExpr::monomial(
            Rational::one(),
            &[(Sym::Factorial(e), 1), (Sym::SelfPower(e), -1), (Sym::UPart(e), 1), (Sym::U, -1)],
        ));
        let ge = tree.leaves[e].genus;
        if ge > 0 {
            factors.push(FormalExpr::monomial(sign(ge as i64), &[(Sym::LambdaTop(e), 1)]));
        }
    }
    ctx.product(factors)
}

/// The integrand of `Xi(T)` split by vertex.
#[derive(Clone, Debug)]
pub struct IntegrandFactors {
    /// `u^{2g-2+m} prod_e a(e) u^{-1}`
    pub prefactor: FormalExpr,
    /// `sum_d Psi_d (-u)^{-d}`
    pub root: FormalExpr,
    /// `sum_d D_d(e) u^{-d}` per leaf
    pub leaves: Vec<FormalExpr>,
}

/// Vertex factors of the `Xi(T)` integrand, each series kept to `terms` psi powers.
pub fn integrand_factors(tree: &StarTree, terms: i32) -> IntegrandFactors {
    let ne = tree.num_edges();
    let mut pre = vec![(Sym::U, 2 * tree.g as i32 - 2 + tree.m as i32 - ne as i32)];
    pre.extend((0..ne).map(|e| (Sym::Part(e), 1)));
    let prefactor = FormalExpr::monomial(Rational::one(), &pre);
    let mut root = FormalExpr::one();
    for e in 0..ne {
        root = root.mul(&geometric(-Rational::one(), e, Sym::Psi(e), tree.root_is_unstable(), terms));
    }
    let leaves = (0..ne)
        .map(|e| {
            let ge = tree.leaves[e].genus;
            let mut f = vec![(Sym::U, -2 * ge as i32)];
            if ge > 0 {
                f.push((Sym::LambdaTop(e), 1));
                f.push((Sym::Dr(e), 1));
            }
            FormalExpr::monomial(Rational::one(), &f).mul(&geometric(
                Rational::one(),
                e,
                Sym::PsiLast(e),
                tree.leaf_is_unstable(e),
                terms,
            ))
        })
        .collect();
    IntegrandFactors { prefactor, root, leaves }
}

/// The whole `Xi(T)` integrand as one truncated expression.
pub fn xi_integrand(tree: &StarTree) -> FormalExpr {
    let ctx = Ctx::new(tree);
    let f = integrand_factors(tree, ctx.bound);
    let mut all = vec![f.prefactor, f.root];
    all.extend(f.leaves);
    ctx.product(all)
}

/// `u -> -u`.
pub fn flip_u(expr: &FormalExpr) -> FormalExpr {
    expr.rewrite(|m| {
        assert!(!m.iter().any(|(s, _)| matches!(s, Sym::UPart(_))), "u^a(e) atoms do not flip");
        vec![(m.clone(), sign(formal::exponent(m, Sym::U) as i64))]
    })
}

fn reduce_lambda(m: &Monomial, g: u32) -> Vec<(Monomial, Rational)> {
    if m.iter().any(|&(s, _)| matches!(s, Sym::Lambda(i) if i > g)) {
        return Vec::new();
    }
    let square = m.iter().find(|&&(s, e)| matches!(s, Sym::Lambda(_)) && e >= 2).copied();
    let Some((Sym::Lambda(k), _)) = square else {
        return vec![(m.clone(), Rational::one())];
    };
    // lambda_k^2 = (-1)^{k+1} 2 sum_{i<k} (-1)^i lambda_i lambda_{2k-i}
    let base = FormalExpr::monomial(Rational::one(), m).mul(&FormalExpr::sym(Sym::Lambda(k), -2));
    let mut out = Vec::new();
    for i in 0..k {
        let c = sign(k as i64 + 1 + i as i64) * Rational::from(2);
        let mut f = vec![(Sym::Lambda(2 * k - i), 1)];
        if i > 0 {
            f.push((Sym::Lambda(i), 1));
        }
        let t = base.mul(&FormalExpr::monomial(c, &f));
        for (mono, coef) in t.terms() {
            for (m2, c2) in reduce_lambda(mono, g) {
                out.push((m2, coef * &c2));
            }
        }
    }
    out
}

/// Normal form modulo Mumford's relation on the root: squarefree in `lambda_i`, `i <= g`.
pub fn mumford_reduce(expr: &FormalExpr, g: u32) -> FormalExpr {
    expr.rewrite(|m| reduce_lambda(m, g))
}

/// Replace the edge atoms by their values at `a`.
pub fn substitute_parts(expr: &FormalExpr, tree: &StarTree, a: &[i64]) -> FormalExpr {
    let parts = tree.edge_parts(a);
    expr.rewrite(|m| {
        let mut c = Rational::one();
        let mut keep = Vec::new();
        let mut upow = 0i64;
        for &(s, e) in m {
            match s {
                Sym::Part(i) => c *= &Rational::from(parts[i]).pow(e),
                Sym::Factorial(i) => c *= &crate::algebra::factorial(parts[i] as u32).pow(e),
                Sym::SelfPower(i) => c *= &Rational::from(parts[i]).pow(parts[i] as i32 * e),
                Sym::UPart(i) => upow += parts[i] * e as i64,
                Sym::U => upow += e as i64,
                _ => keep.push((s, e)),
            }
        }
        keep.push((Sym::U, upow as i32));
        let f = FormalExpr::monomial(c, &keep);
        f.terms().map(|(m, c)| (m.clone(), c.clone())).collect()
    })
}

/// Both sides of the audit identity, normalized.
#[derive(Clone, Debug)]
pub struct AuditOutcome {
    pub lhs: FormalExpr,
    pub rhs: FormalExpr,
}

impl AuditOutcome {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn audit_detail(tree: &StarTree) -> AuditOutcome {
    let ctx = Ctx::new(tree);
    let d = truncation_degree(tree);
    let w = weight_for(tree);
    let lhs = mumford_reduce(&ctx.mul(&alpha1(tree), &alpha2(tree)), tree.root_genus).truncate(d, &w);
    let rhs = flip_u(&xi_integrand(tree)).truncate(d, &w);
    AuditOutcome { lhs, rhs }
}

/// `alpha1 * alpha2` equals the `Xi(T)` integrand at `-u`, and the edge degrees are forced.
pub fn audit_tree(tree: &StarTree) -> bool {
    audit_detail(tree).holds() && edge_degrees_unique(tree)
}

/// Balancing at every vertex over infinity (and at the root) admits exactly `d(e) = a(e)`.
pub fn edge_degrees_unique(tree: &StarTree) -> bool {
    let ne = tree.num_edges();
    let n = tree.n;
    // rows: [edge coefficients | right-hand side as a combination of a_1..a_n]
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for (e, leaf) in tree.leaves.iter().enumerate() {
        let mut r = vec![Rational::zero(); ne + n];
        r[e] = Rational::one();
        for &i in &leaf.legs {
            r[ne + i - 1] = Rational::one();
        }
        rows.push(r);
    }
    rows.push(vec![Rational::one(); ne + n]);
    let mut rank = 0;
    for col in 0..ne {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else { return false };
        rows.swap(rank, p);
        let inv = rows[rank][col].recip();
        rows[rank] = rows[rank].iter().map(|x| x * &inv).collect();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                let pivot = rows[rank].clone();
                for (x, y) in rows[r].iter_mut().zip(&pivot) {
                    *x -= &(&f * y);
                }
            }
        }
        rank += 1;
    }
    // consistency: leftover rows must vanish identically in a
    if rows[rank..].iter().any(|r| r.iter().any(|x| !x.is_zero())) {
        return false;
    }
    (0..ne).all(|e| {
        let mut want = vec![Rational::zero(); n];
        for &i in &tree.leaves[e].legs {
            want[i - 1] = Rational::one();
        }
        rows[e][ne..] == want[..]
    })
}
