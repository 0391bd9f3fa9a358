//! Sparse multivariate polynomials in the ramification variables `a_1..a_n`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::rational::{factorial, Rational};
use crate::error::{Error, Result};

/// Polynomial in `nvars` variables with exact rational coefficients.
/// Exponent vectors index a sparse map; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct APoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl APoly {
    pub fn zero(nvars: usize) -> Self {
        APoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = APoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The variable `a_{i+1}` (0-based index `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = APoly::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut p = APoly::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        assert_eq!(exps.len(), self.nvars, "exponent vector length");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
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

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn add(&self, other: &APoly) -> APoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &APoly) -> APoly {
        self.add(&other.scale(&Rational::from(-1)))
    }

    pub fn scale(&self, c: &Rational) -> APoly {
        if c.is_zero() {
            return APoly::zero(self.nvars);
        }
        APoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &APoly) -> APoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = APoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= &x.pow(k as i32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_int(&self, point: &[i64]) -> Rational {
        let pt: Vec<Rational> = point.iter().map(|&x| Rational::from(x)).collect();
        self.eval(&pt)
    }
}

impl fmt::Display for APoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("a{}", i + 1) } else { format!("a{}^{}", i + 1, k) })
                .collect();
            let (neg, abs) = if c.is_negative() { (true, -c) } else { (false, c.clone()) };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if mono.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{abs}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for APoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// All exponent vectors in `n` variables of total degree `<= d`, graded then lexicographic.
pub fn monomials_up_to(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(n, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out.sort_by_key(|e| (e.iter().sum::<u32>(), e.clone()));
    out
}

/// Integer points `p` with `p_i >= 1` and `sum(p_i - 1) <= d`: the simplex grid,
/// unisolvent for polynomials of total degree `<= d`.
pub fn simplex_grid(n: usize, d: u32) -> Vec<Vec<i64>> {
    monomials_up_to(n, d)
        .into_iter()
        .map(|e| e.into_iter().map(|k| k as i64 + 1).collect())
        .collect()
}

/// Reconstruct the unique polynomial of total degree `<= degree_bound` through the samples.
///
/// When the samples contain a full simplex grid anchored at their componentwise
/// minimum, Newton forward differences on that grid give the interpolant and any
/// remaining samples are checked against it. Otherwise the Vandermonde system is
/// solved by exact elimination.
pub fn poly_interpolate(samples: &[(Vec<i64>, Rational)], degree_bound: u32) -> Result<APoly> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { direction: 1, degree_bound });
    }
    let n = samples[0].0.len();
    let mut table: HashMap<&[i64], &Rational> = HashMap::new();
    for (p, v) in samples {
        assert_eq!(p.len(), n, "sample dimension");
        if let Some(prev) = table.insert(p.as_slice(), v) {
            if prev != v {
                return Err(Error::InconsistentSamples { degree_bound });
            }
        }
    }
    let base: Vec<i64> = (0..n).map(|i| samples.iter().map(|(p, _)| p[i]).min().unwrap()).collect();
    let offsets = monomials_up_to(n, degree_bound);
    let has_simplex = offsets.iter().all(|k| {
        let p: Vec<i64> = base.iter().zip(k).map(|(b, &k)| b + k as i64).collect();
        table.contains_key(p.as_slice())
    });
    let poly = if has_simplex {
        newton_on_simplex(&base, degree_bound, |p| table[p].clone())
    } else {
        solve_vandermonde(samples, n, degree_bound)?
    };
    for (p, v) in samples {
        if &poly.eval_int(p) != v {
            return Err(Error::InconsistentSamples { degree_bound });
        }
    }
    Ok(poly)
}

/// Total degree of the interpolant of `value` on `simplex_grid(n, d)`, `None` when it vanishes.
///
/// Exact whenever the sampled function is a polynomial of degree `<= d`.
pub fn simplex_degree(n: usize, d: u32, value: impl Fn(&[i64]) -> Rational) -> Option<u32> {
    let base = vec![1i64; n];
    newton_differences(&base, d, value)
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, _)| k.iter().sum::<u32>())
        .max()
}

fn newton_on_simplex(base: &[i64], d: u32, value: impl Fn(&[i64]) -> Rational) -> APoly {
    let n = base.len();
    let offsets = monomials_up_to(n, d);
    let diff = newton_differences(base, d, value);
    // f(base + x) = sum_k diff[k] prod_i C(x_i, k_i)
    let mut out = APoly::zero(n);
    for k in &offsets {
        let c = &diff[k];
        if c.is_zero() {
            continue;
        }
        let mut term = APoly::constant(n, c.clone());
        for i in 0..n {
            if k[i] > 0 {
                term = term.mul(&shifted_binomial(n, i, base[i], k[i]));
            }
        }
        out = out.add(&term);
    }
    out
}

fn newton_differences(base: &[i64], d: u32, value: impl Fn(&[i64]) -> Rational) -> HashMap<Vec<u32>, Rational> {
    let n = base.len();
    let offsets = monomials_up_to(n, d);
    let mut diff: HashMap<Vec<u32>, Rational> = offsets
        .iter()
        .map(|k| {
            let p: Vec<i64> = base.iter().zip(k).map(|(b, &k)| b + k as i64).collect();
            (k.clone(), value(&p))
        })
        .collect();
    // Forward differences along each axis; every axis-parallel line in the simplex is complete.
    for axis in 0..n {
        for t in 1..=d {
            let mut keys: Vec<Vec<u32>> = diff.keys().filter(|k| k[axis] >= t).cloned().collect();
            keys.sort_by(|x, y| y[axis].cmp(&x[axis]).then_with(|| x.cmp(y)));
            for k in keys {
                let mut prev = k.clone();
                prev[axis] -= 1;
                let pv = diff[&prev].clone();
                let cur = diff.get_mut(&k).unwrap();
                *cur -= &pv;
            }
        }
    }
    diff
}

/// `C(a_i - b, k)` as a polynomial in `a_i`.
fn shifted_binomial(n: usize, i: usize, b: i64, k: u32) -> APoly {
    let mut p = APoly::constant(n, factorial(k).recip());
    for j in 0..k as i64 {
        let lin = APoly::var(n, i).add(&APoly::constant(n, Rational::from(-(b + j))));
        p = p.mul(&lin);
    }
    p
}

fn solve_vandermonde(samples: &[(Vec<i64>, Rational)], n: usize, d: u32) -> Result<APoly> {
    let monos = monomials_up_to(n, d);
    let cols = monos.len();
    let mut rows: Vec<Vec<Rational>> = samples
        .iter()
        .map(|(p, v)| {
            let mut row: Vec<Rational> = monos
                .iter()
                .map(|e| {
                    let mut t = Rational::one();
                    for (x, &k) in p.iter().zip(e) {
                        t *= &Rational::from(*x).pow(k as i32);
                    }
                    t
                })
                .collect();
            row.push(v.clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in c..=cols {
                    let sub = &f * &rows[r][j];
                    rows[i][j] -= &sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if let Some(missing) = (0..cols).find(|c| !pivots.contains(c)) {
        let e = &monos[missing];
        let direction = (0..n).max_by_key(|&i| (e[i], std::cmp::Reverse(i))).unwrap_or(0) + 1;
        return Err(Error::InsufficientSamples { direction, degree_bound: d });
    }
    if rows[r..].iter().any(|row| !row[cols].is_zero()) {
        return Err(Error::InconsistentSamples { degree_bound: d });
    }
    let mut out = APoly::zero(n);
    for (i, &c) in pivots.iter().enumerate() {
        out.add_term(monos[c].clone(), rows[i][cols].clone());
    }
    Ok(out)
}
