//! Laurent polynomials in the equivariant parameter `u`.

use std::collections::BTreeMap;
use std::fmt;

use super::apoly::APoly;
use super::rational::Rational;

/// Coefficient types a [`ULaurent`] can carry.
pub trait LaurentCoeff: Clone + PartialEq {
    fn is_zero(&self) -> bool;
    fn add_assign_ref(&mut self, other: &Self);
    fn negated(&self) -> Self;
}

impl LaurentCoeff for Rational {
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn negated(&self) -> Self {
        -self
    }
}

impl LaurentCoeff for APoly {
    fn is_zero(&self) -> bool {
        APoly::is_zero(self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.add(other);
    }
    fn negated(&self) -> Self {
        self.scale(&Rational::from(-1))
    }
}

/// `sum_k c_k u^k` over integer `k`, zero coefficients dropped eagerly.
#[derive(Clone, PartialEq)]
pub struct ULaurent<C> {
    terms: BTreeMap<i32, C>,
}

impl<C: LaurentCoeff> Default for ULaurent<C> {
    fn default() -> Self {
        ULaurent { terms: BTreeMap::new() }
    }
}

impl<C: LaurentCoeff> ULaurent<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(exp: i32, c: C) -> Self {
        let mut x = Self::zero();
        x.add_term(exp, c);
        x
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i32, C)>) -> Self {
        let mut x = Self::zero();
        for (k, c) in terms {
            x.add_term(k, c);
        }
        x
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exp: i32, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &C)> {
        self.terms.iter().map(|(&k, c)| (k, c))
    }

    pub fn coeff(&self, exp: i32) -> Option<&C> {
        self.terms.get(&exp)
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.add_term(k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.add_term(k, c.negated());
        }
        out
    }

    /// Multiply every exponent by shifting: `u^s * x`.
    pub fn shift(&self, s: i32) -> Self {
        ULaurent { terms: self.terms.iter().map(|(&k, c)| (k + s, c.clone())).collect() }
    }

    pub fn map<D: LaurentCoeff>(&self, mut f: impl FnMut(i32, &C) -> D) -> ULaurent<D> {
        ULaurent::from_terms(self.terms.iter().map(|(&k, c)| (k, f(k, c))))
    }

    /// Product with a caller-supplied coefficient multiplication.
    pub fn mul_with(&self, other: &Self, mut mul: impl FnMut(&C, &C) -> C) -> Self {
        let mut out = Self::zero();
        for (k1, c1) in self.terms() {
            for (k2, c2) in other.terms() {
                out.add_term(k1 + k2, mul(c1, c2));
            }
        }
        out
    }
}

/// The sub-sum of strictly negative `u`-exponents.
pub fn laurent_negative_part<C: LaurentCoeff>(x: &ULaurent<C>) -> ULaurent<C> {
    ULaurent { terms: x.terms.range(..0).map(|(&k, c)| (k, c.clone())).collect() }
}

/// The substitution `u -> -u`.
pub fn laurent_flip_u<C: LaurentCoeff>(x: &ULaurent<C>) -> ULaurent<C> {
    x.map(|k, c| if k.rem_euclid(2) == 1 { c.negated() } else { c.clone() })
}

impl<C: LaurentCoeff + fmt::Display> fmt::Display for ULaurent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})*u"),
                _ => format!("({c})*u^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<C: LaurentCoeff + fmt::Display> fmt::Debug for ULaurent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
