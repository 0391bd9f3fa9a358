//! Commutative formal expressions with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    U,
    /// `a(e)`
    Part(usize),
    /// `a(e)!`
    Factorial(usize),
    /// `a(e)^{a(e)}`
    SelfPower(usize),
    /// `u^{a(e)}`
    UPart(usize),
    /// psi at the root end of edge `e`
    Psi(usize),
    /// psi at the last marking of leaf `e`
    PsiLast(usize),
    /// the DR cycle of leaf `e`
    Dr(usize),
    /// `lambda_{g(v_e)}` of leaf `e`
    LambdaTop(usize),
    /// `lambda_i` at the root
    Lambda(u32),
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::U => write!(f, "u"),
            Sym::Part(e) => write!(f, "a{e}"),
            Sym::Factorial(e) => write!(f, "a{e}!"),
            Sym::SelfPower(e) => write!(f, "a{e}^a{e}"),
            Sym::UPart(e) => write!(f, "u^a{e}"),
            Sym::Psi(e) => write!(f, "psi{e}"),
            Sym::PsiLast(e) => write!(f, "psiL{e}"),
            Sym::Dr(e) => write!(f, "DR{e}"),
            Sym::LambdaTop(e) => write!(f, "lamL{e}"),
            Sym::Lambda(i) => write!(f, "lam{i}"),
        }
    }
}

/// Sorted `(symbol, exponent)` pairs with nonzero exponents.
pub type Monomial = Vec<(Sym, i32)>;

fn mono_mul(x: &Monomial, y: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        if j == y.len() || (i < x.len() && x[i].0 < y[j].0) {
            out.push(x[i]);
            i += 1;
        } else if i == x.len() || y[j].0 < x[i].0 {
            out.push(y[j]);
            j += 1;
        } else {
            let e = x[i].1 + y[j].1;
            if e != 0 {
                out.push((x[i].0, e));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

#[derive(Clone, Default, PartialEq, Eq)]
pub struct FormalExpr {
    terms: BTreeMap<Monomial, Rational>,
}

impl FormalExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut out = Self::zero();
        out.add_term(Vec::new(), c);
        out
    }

    pub fn sym(s: Sym, exp: i32) -> Self {
        Self::monomial(Rational::one(), &[(s, exp)])
    }

    /// `c * prod s^e`; repeated symbols are combined.
    pub fn monomial(c: Rational, factors: &[(Sym, i32)]) -> Self {
        let mut m: Monomial = Vec::new();
        for &f in factors {
            if f.1 != 0 {
                m = mono_mul(&m, &vec![f]);
            }
        }
        let mut out = Self::zero();
        out.add_term(m, c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &FormalExpr) -> FormalExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &FormalExpr) -> FormalExpr {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> FormalExpr {
        if c.is_zero() {
            return Self::zero();
        }
        FormalExpr { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn mul(&self, other: &FormalExpr) -> FormalExpr {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(mono_mul(m1, m2), c1 * c2);
            }
        }
        out
    }

    /// Product keeping only monomials of weighted degree `<= max`.
    pub fn mul_truncated(&self, other: &FormalExpr, max: i32, weight: &impl Fn(Sym) -> i32) -> FormalExpr {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            let d1 = degree(m1, weight);
            for (m2, c2) in &other.terms {
                if d1 + degree(m2, weight) <= max {
                    out.add_term(mono_mul(m1, m2), c1 * c2);
                }
            }
        }
        out
    }

    pub fn truncate(&self, max: i32, weight: &impl Fn(Sym) -> i32) -> FormalExpr {
        FormalExpr {
            terms: self.terms.iter().filter(|(m, _)| degree(m, weight) <= max).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Rewrites every monomial into a linear combination of monomials.
    pub fn rewrite(&self, f: impl Fn(&Monomial) -> Vec<(Monomial, Rational)>) -> FormalExpr {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (m2, c2) in f(m) {
                out.add_term(m2, c * &c2);
            }
        }
        out
    }

    /// Exponent of `s` in every monomial.
    pub fn exponents_of(&self, s: Sym) -> Vec<i32> {
        self.terms.keys().map(|m| exponent(m, s)).collect()
    }

    /// Whether any monomial mentions `s`.
    pub fn mentions(&self, pred: impl Fn(Sym) -> bool) -> bool {
        self.terms.keys().any(|m| m.iter().any(|(s, _)| pred(*s)))
    }
}

pub fn exponent(m: &Monomial, s: Sym) -> i32 {
    m.iter().find(|(t, _)| *t == s).map_or(0, |(_, e)| *e)
}

pub fn degree(m: &Monomial, weight: &impl Fn(Sym) -> i32) -> i32 {
    m.iter().map(|&(s, e)| weight(s) * e).sum()
}

impl fmt::Display for FormalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (s, e) in m {
                if *e == 1 {
                    write!(f, "*{s}")?;
                } else {
                    write!(f, "*{s}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FormalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomials_combine_and_cancel() {
        let x = FormalExpr::sym(Sym::U, 2);
        let y = FormalExpr::sym(Sym::U, -2);
        assert_eq!(x.mul(&y), FormalExpr::one());
        let z = FormalExpr::sym(Sym::Part(0), 1).add(&FormalExpr::sym(Sym::Part(0), 1).scale(&-Rational::one()));
        assert!(z.is_zero());
    }

    #[test]
    fn truncation_uses_weights() {
        let w = |s: Sym| if matches!(s, Sym::Psi(_)) { 1 } else { 0 };
        let p = FormalExpr::sym(Sym::Psi(0), 1).add(&FormalExpr::one());
        let sq = p.mul_truncated(&p, 1, &w);
        assert_eq!(sq, FormalExpr::one().add(&FormalExpr::sym(Sym::Psi(0), 1).scale(&Rational::from(2))));
    }
}
