//! Psi-class intersection numbers and kappa elimination.
//!
//! `<tau_{d_1} ... tau_{d_n}>_g` is computed from `<tau_0^3>_0 = 1` and
//! `<tau_1>_1 = 1/24` by the string and dilaton equations and the DVV recursion.

use std::collections::HashMap;
use std::sync::LazyLock;

use parking_lot::RwLock;

use crate::algebra::Rational;
use crate::error::{Error, Result};

type PsiKey = (u32, Vec<u32>);

static PSI_MEMO: LazyLock<RwLock<HashMap<PsiKey, Rational>>> = LazyLock::new(Default::default);
static VERTEX_MEMO: LazyLock<RwLock<HashMap<(u32, Vec<u32>, Vec<u8>), Rational>>> =
    LazyLock::new(Default::default);

/// `<tau_{d_1} ... tau_{d_n}>_g`; errors on dimension mismatch or unstable `(g, n)`.
pub fn psi_integral(g: u32, exps: &[u32]) -> Result<Rational> {
    let n = exps.len();
    if n == 0 || 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(Error::Dimension(format!("M({g},{n}) is not a stable moduli space with markings")));
    }
    let want = 3 * g as i64 - 3 + n as i64;
    let have: i64 = exps.iter().map(|&d| d as i64).sum();
    if have != want {
        return Err(Error::Dimension(format!("psi degrees sum to {have}, dim M({g},{n}) = {want}")));
    }
    let mut key = exps.to_vec();
    key.sort_unstable_by(|a, b| b.cmp(a));
    Ok(correlator(g, key))
}

/// Zero outside the stable range or off-dimension; `d` sorted descending.
fn correlator(g: u32, d: Vec<u32>) -> Rational {
    let n = d.len();
    if n == 0 || 2 * g as i64 - 2 + n as i64 <= 0 {
        return Rational::zero();
    }
    if d.iter().map(|&x| x as i64).sum::<i64>() != 3 * g as i64 - 3 + n as i64 {
        return Rational::zero();
    }
    if g == 0 && n == 3 {
        return Rational::one();
    }
    if g == 1 && n == 1 {
        return Rational::new(1, 24);
    }
    let key = (g, d);
    if let Some(v) = PSI_MEMO.read().get(&key) {
        return v.clone();
    }
    let value = correlator_uncached(key.0, &key.1);
    PSI_MEMO.write().entry(key).or_insert(value).clone()
}

fn sorted_desc(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn double_factorial(k: i64) -> Rational {
    // (2m-1)!! style: product of odd numbers up to k; (-1)!! = 1
    let mut acc = Rational::one();
    let mut x = k;
    while x > 1 {
        acc *= &Rational::from(x);
        x -= 2;
    }
    acc
}

fn correlator_uncached(g: u32, d: &[u32]) -> Rational {
    let n = d.len();
    // string equation
    if let Some(pos) = d.iter().rposition(|&x| x == 0) {
        let mut rest = d.to_vec();
        rest.remove(pos);
        let mut acc = Rational::zero();
        for j in 0..rest.len() {
            if rest[j] > 0 {
                let mut r = rest.clone();
                r[j] -= 1;
                acc += correlator(g, sorted_desc(r));
            }
        }
        return acc;
    }
    // dilaton equation
    if let Some(pos) = d.iter().rposition(|&x| x == 1) {
        let mut rest = d.to_vec();
        rest.remove(pos);
        let factor = Rational::from(2 * g as i64 - 2 + n as i64 - 1);
        return factor * correlator(g, rest);
    }
    // DVV on the largest exponent tau_{k+1}
    let k = d[0] as i64 - 1;
    let s: Vec<u32> = d[1..].to_vec();
    let mut acc = Rational::zero();
    for j in 0..s.len() {
        let dj = s[j] as i64;
        let coef = double_factorial(2 * k + 2 * dj + 1) / double_factorial(2 * dj - 1);
        let mut r = s.clone();
        r[j] = (k + dj) as u32;
        acc += coef * correlator(g, sorted_desc(r));
    }
    let half = Rational::new(1, 2);
    for r in 0..k {
        let sidx = k - 1 - r;
        let w = double_factorial(2 * r + 1) * double_factorial(2 * sidx + 1);
        if g >= 1 {
            let mut v = s.clone();
            v.push(r as u32);
            v.push(sidx as u32);
            acc += &half * &w * correlator(g - 1, sorted_desc(v));
        }
        let m = s.len();
        for mask in 0u64..(1 << m) {
            let mut left = vec![r as u32];
            let mut right = vec![sidx as u32];
            for (i, &x) in s.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    left.push(x);
                } else {
                    right.push(x);
                }
            }
            let left = sorted_desc(left);
            let right = sorted_desc(right);
            for g1 in 0..=g {
                let a = correlator(g1, left.clone());
                if a.is_zero() {
                    continue;
                }
                let b = correlator(g - g1, right.clone());
                if !b.is_zero() {
                    acc += &half * &w * a * b;
                }
            }
        }
    }
    acc / double_factorial(2 * k + 3)
}

/// `int_{M(g,n)} prod psi_i^{psi_i} * prod_j kappa_{kappa_j}`, zero off-dimension.
///
/// Kappa classes are pushed to extra markings: `kappa_b = pi_*(psi_{n+1}^{b+1})`
/// and `pi^* kappa_b = kappa_b - psi_{n+1}^b`.
pub fn vertex_integral(g: u32, psi: &[u32], kappa: &[u8]) -> Rational {
    let n = psi.len();
    let deg: i64 = psi.iter().map(|&x| x as i64).sum::<i64>() + kappa.iter().map(|&x| x as i64).sum::<i64>();
    if deg != 3 * g as i64 - 3 + n as i64 || 2 * g as i64 - 2 + n as i64 <= 0 {
        return Rational::zero();
    }
    if kappa.is_empty() {
        return correlator(g, sorted_desc(psi.to_vec()));
    }
    let mut p = psi.to_vec();
    p.sort_unstable_by(|a, b| b.cmp(a));
    let mut k = kappa.to_vec();
    k.sort_unstable();
    let key = (g, p, k);
    if let Some(v) = VERTEX_MEMO.read().get(&key) {
        return v.clone();
    }
    let (_, p, k) = &key;
    let first = k[0] as u32;
    let rest = &k[1..];
    let mut acc = Rational::zero();
    for mask in 0u64..(1 << rest.len()) {
        let mut extra = first + 1;
        let mut remaining = Vec::new();
        for (i, &b) in rest.iter().enumerate() {
            if mask >> i & 1 == 1 {
                extra += b as u32;
            } else {
                remaining.push(b);
            }
        }
        let mut p2 = p.clone();
        p2.push(extra);
        let v = vertex_integral(g, &p2, &remaining);
        if mask.count_ones() % 2 == 1 {
            acc -= &v;
        } else {
            acc += &v;
        }
    }
    VERTEX_MEMO.write().entry(key).or_insert(acc).clone()
}

/// Snapshot of the memoized intersection numbers, sorted by key.
pub fn psi_memo_entries() -> Vec<(u32, Vec<u32>, Rational)> {
    let mut v: Vec<_> = PSI_MEMO.read().iter().map(|((g, d), r)| (*g, d.clone(), r.clone())).collect();
    v.sort();
    v
}

/// Seed the memo table; existing entries are kept.
pub fn psi_memo_insert(g: u32, mut exps: Vec<u32>, value: Rational) {
    exps.sort_unstable_by(|a, b| b.cmp(a));
    PSI_MEMO.write().entry((g, exps)).or_insert(value);
}

/// A memoized value, exponents in any order.
pub fn psi_memo_lookup(g: u32, exps: &[u32]) -> Option<Rational> {
    PSI_MEMO.read().get(&(g, sorted_desc(exps.to_vec()))).cloned()
}

pub fn psi_memo_len() -> usize {
    PSI_MEMO.read().len()
}
