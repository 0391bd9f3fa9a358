//! Double ramification cycles from Pixton's formula.
//!
//! `DR_g(A) = 2^{-g}` times the constant term in `r` of
//! `sum_Gamma sum_w r^{-h1} [Gamma, prod_i exp(a_i^2 psi_i)
//!   prod_e (1 - exp(-w(h)w(h')(psi_h + psi_h'))) / (psi_h + psi_h')]`,
//! degree-`g` part. Weightings take values in `Z/r` with `w(h) + w(h') = 0`,
//! legs fixed to `a_i mod r`, and zero sum at every vertex.
//!
//! For each graph and each distribution of edge degrees the weighting sum is a
//! polynomial in `r` (for `r` past the threshold) of degree at most
//! `2g + h1`; it is sampled at prime `r` and interpolated exactly.

use std::collections::HashMap;
use std::sync::LazyLock;

use num_bigint::BigInt;
use parking_lot::RwLock;

use crate::algebra::{binomial, factorial, poly_interpolate, Rational};
use crate::calculus::TautClass;
use crate::error::{Error, Result};
use crate::graph::{stable_graphs, DecoratedStratum, StableGraph};
use crate::graph::strata::compositions;

/// Which primes `r` feed the interpolation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RSchedule {
    /// consecutive primes just past the threshold
    Consecutive,
    /// every other prime, starting past twice the threshold
    Sparse,
}

static DR: LazyLock<RwLock<HashMap<(u32, Vec<i64>, RSchedule), TautClass>>> = LazyLock::new(Default::default);

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// `count` primes for the schedule, all above `threshold`.
pub fn r_values(threshold: u64, count: usize, schedule: RSchedule) -> Vec<u64> {
    let (start, step) = match schedule {
        RSchedule::Consecutive => (threshold + 1, 1),
        RSchedule::Sparse => (2 * threshold + 7, 2),
    };
    (start..).filter(|&p| is_prime(p)).step_by(step).take(count).collect()
}

/// `DR_g(parts)` on `M(g, parts.len())`.
pub fn dr_cycle(g: u32, parts: &[i64]) -> Result<TautClass> {
    dr_cycle_with(g, parts, RSchedule::Consecutive)
}

pub fn dr_cycle_with(g: u32, parts: &[i64], schedule: RSchedule) -> Result<TautClass> {
    if parts.iter().sum::<i64>() != 0 {
        return Err(Error::Domain(format!("DR parts must sum to zero, got {parts:?}")));
    }
    let n = parts.len();
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(Error::Domain(format!("M({g},{n}) is unstable")));
    }
    let key = (g, parts.to_vec(), schedule);
    if let Some(c) = DR.read().get(&key) {
        return Ok(c.clone());
    }
    let threshold = parts.iter().map(|x| x.unsigned_abs()).sum::<u64>() + 2 * g as u64;
    let mut out = TautClass::zero(g, n);
    let dim = out.dim();
    if (g as i64) <= dim {
        for k in 0..=g as usize {
            for gr in stable_graphs(g, n, k).iter() {
                graph_contribution(gr, parts, g, threshold, schedule, &mut out)?;
            }
        }
    }
    let out = out.scale(&Rational::from(2).pow(-(g as i32)));
    Ok(DR.write().entry(key).or_insert(out).clone())
}

fn graph_contribution(
    gr: &std::sync::Arc<StableGraph>,
    parts: &[i64],
    g: u32,
    threshold: u64,
    schedule: RSchedule,
    out: &mut TautClass,
) -> Result<()> {
    let ne = gr.num_edges();
    let n = gr.num_legs();
    let h1 = gr.h1() as u32;
    let left = g - ne as u32;
    let degree_bound = 2 * g + h1;
    let rs = r_values(threshold, degree_bound as usize + 2, schedule);
    // weighting sums per edge-degree vector, per r
    let edge_degs: Vec<Vec<u8>> = (0..=left).flat_map(|s| compositions(ne, s)).collect();
    let mut sums: HashMap<Vec<u8>, Vec<(Vec<i64>, Rational)>> = HashMap::new();
    for &r in &rs {
        let per = weighting_sums(gr, parts, r as i64, &edge_degs);
        for (kv, s) in edge_degs.iter().zip(per) {
            sums.entry(kv.clone()).or_default().push((vec![r as i64], Rational::from(s)));
        }
    }
    for kv in &edge_degs {
        let poly = poly_interpolate(&sums[kv], degree_bound)?;
        let constant = poly.coefficient(&[h1]);
        if constant.is_zero() {
            continue;
        }
        let edge_total: u32 = kv.iter().map(|&x| x as u32).sum();
        let leg_left = left - edge_total;
        // edge factor coefficients: (-1)^k / (k+1)!
        let mut edge_coef = constant;
        for &k in kv {
            let s = if k % 2 == 1 { -Rational::one() } else { Rational::one() };
            edge_coef = edge_coef * s / factorial(k as u32 + 1);
        }
        for legs in compositions(n, leg_left) {
            let mut coef = edge_coef.clone();
            for (i, &d) in legs.iter().enumerate() {
                coef = coef * Rational::from(parts[i] * parts[i]).pow(d as i32) / factorial(d as u32);
            }
            if coef.is_zero() {
                continue;
            }
            // expand (psi_h + psi_h')^k binomially on every edge
            let splits: Vec<Vec<(u8, u8, Rational)>> =
                kv.iter().map(|&k| (0..=k).map(|j| (j, k - j, binomial(k as u32, j as u32))).collect()).collect();
            let mut partial: Vec<(Vec<u8>, Rational)> = {
                let mut psi = vec![0u8; gr.num_half_edges()];
                psi[..n].copy_from_slice(&legs);
                vec![(psi, coef)]
            };
            for (e, opts) in splits.iter().enumerate() {
                let (h0, h1e) = gr.edge_halves(e);
                let mut next = Vec::new();
                for (psi, c) in &partial {
                    for (x, y, b) in opts {
                        let mut p = psi.clone();
                        p[h0] += x;
                        p[h1e] += y;
                        next.push((p, c * b));
                    }
                }
                partial = next;
            }
            for (psi, c) in partial {
                let s = DecoratedStratum::from_canonical(gr.clone(), psi, vec![Vec::new(); gr.num_vertices()]);
                out.add_term(s, c);
            }
        }
    }
    Ok(())
}

/// `sum_w prod_e (w(h) w(h'))^{k_e + 1}` for every edge-degree vector, at one `r`.
fn weighting_sums(gr: &StableGraph, parts: &[i64], r: i64, edge_degs: &[Vec<u8>]) -> Vec<BigInt> {
    let ne = gr.num_edges();
    let nv = gr.num_vertices();
    let mut base = vec![0i64; nv];
    for (i, &v) in gr.legs().iter().enumerate() {
        base[v] += parts[i].rem_euclid(r);
    }
    let mut totals = vec![BigInt::from(0); edge_degs.len()];
    let mut w = vec![0i64; ne];
    loop {
        let mut sum = base.clone();
        for (e, &(a, b)) in gr.edges().iter().enumerate() {
            sum[a] += w[e];
            sum[b] += (r - w[e]) % r;
        }
        if sum.iter().all(|s| s % r == 0) {
            let c: Vec<BigInt> = (0..ne).map(|e| BigInt::from(w[e] * ((r - w[e]) % r))).collect();
            for (t, kv) in totals.iter_mut().zip(edge_degs) {
                let mut term = BigInt::from(1);
                for (e, &k) in kv.iter().enumerate() {
                    term *= c[e].pow(k as u32 + 1);
                }
                *t += term;
            }
        }
        let mut e = 0;
        loop {
            if e == ne {
                return totals;
            }
            w[e] += 1;
            if w[e] < r {
                break;
            }
            w[e] = 0;
            e += 1;
        }
    }
}
