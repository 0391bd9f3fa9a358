//! Tautological classes as rational combinations of decorated strata.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use super::product::for_each_product_term;
use super::psi::vertex_integral;
use crate::algebra::{LaurentCoeff, Rational};
use crate::error::{Error, Result};
use crate::graph::{DecoratedStratum, StableGraph};

#[derive(Clone, PartialEq, Eq)]
pub struct TautClass {
    g: u32,
    n: usize,
    terms: BTreeMap<DecoratedStratum, Rational>,
}

/// `(1/|Aut|) prod_v int_{M_v} decoration_v` for a decoration on a canonical graph.
pub fn stratum_integral(graph: &StableGraph, psi: &[u8], kappa: &[Vec<u8>]) -> Rational {
    let nv = graph.num_vertices();
    let mut per_vertex: Vec<Vec<u32>> = vec![Vec::new(); nv];
    for (h, &x) in psi.iter().enumerate() {
        per_vertex[graph.vertex_of(h)].push(x as u32);
    }
    let mut acc = Rational::one();
    for (v, ps) in per_vertex.iter().enumerate() {
        let deg: i64 = ps.iter().map(|&x| x as i64).sum::<i64>() + kappa[v].iter().map(|&x| x as i64).sum::<i64>();
        if deg != graph.vertex_dim(v) {
            return Rational::zero();
        }
    }
    for (v, ps) in per_vertex.iter().enumerate() {
        let x = vertex_integral(graph.genera()[v], ps, &kappa[v]);
        if x.is_zero() {
            return x;
        }
        acc *= &x;
    }
    acc / Rational::from(graph.automorphism_count() as i64)
}

impl TautClass {
    pub fn zero(g: u32, n: usize) -> Self {
        TautClass { g, n, terms: BTreeMap::new() }
    }

    /// The fundamental class of `M(g, n)`.
    pub fn one(g: u32, n: usize) -> Self {
        Self::from_stratum(DecoratedStratum::plain(trivial(g, n)), Rational::one())
    }

    pub fn from_stratum(s: DecoratedStratum, c: Rational) -> Self {
        let g = s.graph().genus();
        let n = s.graph().num_legs();
        let mut out = Self::zero(g, n);
        out.add_term(s, c);
        out
    }

    /// `psi_i` for a marking `1 <= i <= n`.
    pub fn psi(g: u32, n: usize, i: usize) -> Self {
        Self::psi_monomial(g, n, &[(i, 1)])
    }

    /// `prod psi_i^{e_i}` on the trivial graph, markings 1-based.
    pub fn psi_monomial(g: u32, n: usize, exps: &[(usize, u8)]) -> Self {
        let mut psi = vec![0u8; n];
        for &(i, e) in exps {
            psi[i - 1] += e;
        }
        let s = DecoratedStratum::from_canonical(trivial(g, n), psi, vec![Vec::new()]);
        Self::from_stratum(s, Rational::one())
    }

    pub fn kappa(g: u32, n: usize, a: u8) -> Self {
        let s = DecoratedStratum::from_canonical(trivial(g, n), vec![0; n], vec![vec![a]]);
        Self::from_stratum(s, Rational::one())
    }

    pub fn genus(&self) -> u32 {
        self.g
    }

    pub fn num_markings(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> i64 {
        3 * self.g as i64 - 3 + self.n as i64
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DecoratedStratum, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, s: &DecoratedStratum) -> Rational {
        self.terms.get(s).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `c * s`; strata above the ambient dimension or overfilling a vertex are zero and dropped.
    pub fn add_term(&mut self, s: DecoratedStratum, c: Rational) {
        assert_eq!((s.graph().genus(), s.graph().num_legs()), (self.g, self.n), "stratum from another ambient space");
        if c.is_zero() || s.degree() as i64 > self.dim() || !s.is_dimensionally_valid() {
            return;
        }
        match self.terms.entry(s) {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    /// Renames marking `i` to `perm[i]` (0-based).
    pub fn relabel_markings(&self, perm: &[usize]) -> TautClass {
        assert_eq!(perm.len(), self.n, "permutation size");
        let mut out = TautClass::zero(self.g, self.n);
        for (s, c) in &self.terms {
            let gr = s.graph();
            let mut legs = vec![0; self.n];
            let mut psi = s.psi().to_vec();
            for (i, &p) in perm.iter().enumerate() {
                legs[p] = gr.legs()[i];
                psi[p] = s.psi()[i];
            }
            let relabeled = StableGraph::new(gr.genera().to_vec(), legs, gr.edges().to_vec());
            let t = DecoratedStratum::new(&relabeled, psi, s.kappa().to_vec()).expect("relabeling keeps connectivity");
            out.add_term(t, c.clone());
        }
        out
    }

    pub fn check_ambient(&self, other: &TautClass) -> Result<()> {
        if (self.g, self.n) != (other.g, other.n) {
            return Err(Error::AmbientMismatch(self.g, self.n, other.g, other.n));
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &TautClass) {
        self.check_ambient(other).expect("adding classes on different spaces");
        for (s, c) in &other.terms {
            self.add_term(s.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &TautClass) -> TautClass {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &TautClass) -> TautClass {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> TautClass {
        if c.is_zero() {
            return Self::zero(self.g, self.n);
        }
        TautClass { g: self.g, n: self.n, terms: self.terms.iter().map(|(s, x)| (s.clone(), x * c)).collect() }
    }

    /// The homogeneous part of cohomological degree `d`.
    pub fn degree_part(&self, d: u32) -> TautClass {
        TautClass {
            g: self.g,
            n: self.n,
            terms: self.terms.iter().filter(|(s, _)| s.degree() == d).map(|(s, c)| (s.clone(), c.clone())).collect(),
        }
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|s| s.degree()).max()
    }

    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|s| s.degree() == d)
    }

    /// Only the top-degree part contributes.
    pub fn integrate(&self) -> Rational {
        let top = self.dim();
        self.terms
            .iter()
            .filter(|(s, _)| s.degree() as i64 == top)
            .map(|(s, c)| c * stratum_integral(s.graph(), s.psi(), s.kappa()))
            .sum()
    }

    pub fn multiply(&self, other: &TautClass) -> TautClass {
        self.check_ambient(other).expect("multiplying classes on different spaces");
        let mut acc: HashMap<DecoratedStratum, Rational> = HashMap::new();
        let dim = self.dim();
        for (s1, c1) in &self.terms {
            for (s2, c2) in &other.terms {
                if (s1.degree() + s2.degree()) as i64 > dim {
                    continue;
                }
                let c12 = c1 * c2;
                for_each_product_term(
                    (s1.graph(), s1.psi(), s1.kappa()),
                    (s2.graph(), s2.psi(), s2.kappa()),
                    |gamma, c, psi, kappa| {
                        let s = DecoratedStratum::from_canonical(gamma.clone(), psi.to_vec(), kappa.to_vec());
                        *acc.entry(s).or_insert_with(Rational::zero) += &(&c12 * c);
                    },
                );
            }
        }
        let mut out = Self::zero(self.g, self.n);
        for (s, c) in acc {
            out.add_term(s, c);
        }
        out
    }

    /// `integrate(self * other)`, without assembling the product.
    pub fn pair(&self, other: &TautClass) -> Rational {
        self.check_ambient(other).expect("pairing classes on different spaces");
        let mut acc = Rational::zero();
        for (s1, c1) in &self.terms {
            for (s2, c2) in &other.terms {
                let p = pair_strata(s1, s2);
                if !p.is_zero() {
                    acc += c1 * c2 * p;
                }
            }
        }
        acc
    }

    /// Pairings against each test stratum.
    pub fn pairing_vector(&self, tests: &[DecoratedStratum]) -> Vec<Rational> {
        tests
            .iter()
            .map(|t| self.terms.iter().map(|(s, c)| c * pair_strata(s, t)).sum())
            .collect()
    }
}

/// `integrate([A, alpha] * [B, beta])`.
pub fn pair_strata(a: &DecoratedStratum, b: &DecoratedStratum) -> Rational {
    let g = a.graph();
    if (a.degree() + b.degree()) as i64 != g.dim() {
        return Rational::zero();
    }
    let mut acc = Rational::zero();
    for_each_product_term((a.graph(), a.psi(), a.kappa()), (b.graph(), b.psi(), b.kappa()), |gamma, c, psi, kappa| {
        let x = stratum_integral(gamma, psi, kappa);
        if !x.is_zero() {
            acc += c * x;
        }
    });
    acc
}

fn trivial(g: u32, n: usize) -> Arc<StableGraph> {
    StableGraph::trivial(g, n).canonicalize().expect("one vertex is connected").graph
}

impl LaurentCoeff for TautClass {
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_assign_ref(&mut self, other: &Self) {
        TautClass::add_assign(self, other)
    }

    fn negated(&self) -> Self {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for TautClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·[{s}]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TautClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M({},{}): {}", self.g, self.n, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::stable_graphs;

    fn divisor(g: u32, n: usize, pick: impl Fn(&StableGraph) -> bool) -> TautClass {
        let gr = stable_graphs(g, n, 1).iter().find(|x| pick(x)).unwrap().clone();
        TautClass::from_stratum(DecoratedStratum::plain(gr), Rational::one())
    }

    fn separating(legs_on_first: &[usize]) -> impl Fn(&StableGraph) -> bool + '_ {
        move |gr: &StableGraph| {
            let v = gr.legs()[legs_on_first[0] - 1];
            (0..gr.num_legs()).all(|i| (gr.legs()[i] == v) == legs_on_first.contains(&(i + 1)))
        }
    }

    #[test]
    fn basic_integrals() {
        assert_eq!(TautClass::one(0, 3).integrate(), Rational::one());
        assert_eq!(TautClass::psi(0, 4, 1).integrate(), Rational::one());
        assert_eq!(TautClass::psi(1, 1, 1).integrate(), Rational::new(1, 24));
    }

    #[test]
    fn unit_is_neutral() {
        let x = TautClass::psi(1, 2, 1).add(&divisor(1, 2, |gr| gr.num_vertices() == 1));
        assert_eq!(TautClass::one(1, 2).multiply(&x), x);
        assert_eq!(x.multiply(&TautClass::one(1, 2)), x);
    }

    #[test]
    fn disjoint_divisors_on_m04() {
        let d12 = divisor(0, 4, separating(&[1, 2]));
        let d13 = divisor(0, 4, separating(&[1, 3]));
        assert!(d12.multiply(&d13).is_empty());
        assert_eq!(d12.integrate(), Rational::one());
    }

    #[test]
    fn divisor_intersections_on_m05() {
        let d12 = divisor(0, 5, separating(&[1, 2]));
        let d13 = divisor(0, 5, separating(&[1, 3]));
        let d34 = divisor(0, 5, separating(&[3, 4]));
        assert_eq!(d12.multiply(&d12).integrate(), -Rational::one());
        assert_eq!(d12.pair(&d12), -Rational::one());
        assert_eq!(d12.pair(&d34), Rational::one());
        assert_eq!(d12.pair(&d13), Rational::zero());
        assert_eq!(TautClass::psi(0, 5, 1).pair(&d12), Rational::zero());
        let d23 = divisor(0, 5, separating(&[2, 3]));
        assert_eq!(TautClass::psi(0, 5, 1).pair(&d23), Rational::one());
    }

    #[test]
    fn irreducible_divisor_squared_on_m12() {
        // excess term -1 plus the two-loop/banana terms; consistent with lambda_1 = delta_irr/12 and lambda_1^2 = 0
        let irr = divisor(1, 2, |gr| gr.num_vertices() == 1);
        assert_eq!(irr.multiply(&irr).integrate(), Rational::zero());
        assert_eq!(irr.pair(&TautClass::psi(1, 2, 1)), Rational::new(1, 2));
    }

    #[test]
    fn kappa_psi_on_m11() {
        // kappa_1 = psi_1 on M(1,1)
        assert_eq!(TautClass::kappa(1, 1, 1).integrate(), TautClass::psi(1, 1, 1).integrate());
    }
}
