use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use taut_core::algebra::{simplex_grid, Rational};
use taut_core::audit::audit_detail;
use taut_core::calculus::psi_integral;
use taut_core::graph::{enumerate_pssrt, pssrt_count};
use taut_core::master::{polynomiality_check_with, CheckOptions};
use taut_core::special::{dr_cycle, mumford_check};

use crate::{Failure, Outcome, VerifyArgs};

fn dim(g: u32, n: usize, m: usize) -> i64 {
    3 * g as i64 - 3 + n as i64 + m as i64
}

/// All `(g, n, m)` with `g <= gmax`, `n, m >= 1`, stable, and `3g-3+n+m <= budget`.
pub fn instances(gmax: u32, budget: u32) -> Vec<(u32, usize, usize)> {
    let mut out = Vec::new();
    for g in 0..=gmax {
        for total in 2..=(budget as i64 + 3 - 3 * g as i64).max(0) as usize {
            for n in 1..total {
                let m = total - n;
                if 2 * g as i64 - 2 + total as i64 > 0 && dim(g, n, m) <= budget as i64 {
                    out.push((g, n, m));
                }
            }
        }
    }
    out
}

pub fn verify(v: &VerifyArgs) -> Result<Outcome, Failure> {
    let list = match (v.g, v.n, v.m, v.gmax) {
        (Some(g), Some(n), Some(m), None) => {
            let d = dim(g, n, m);
            if d > v.dim_budget as i64 {
                let trees = enumerate_pssrt(g, n, m).map(|t| t.len()).unwrap_or(0);
                let grid = v.grid.unwrap_or(d.max(0) as u32 + 1);
                let points = simplex_grid(n, grid).len();
                return Err(Failure::Usage(format!(
                    "3g-3+n+m = {d} exceeds the dimension budget {}; estimated work {trees} trees x {points} grid points, raise --dim-budget to run it",
                    v.dim_budget
                )));
            }
            vec![(g, n, m)]
        }
        (None, None, None, Some(gmax)) => instances(gmax, v.dim_budget),
        _ => return Err(Failure::Usage("give either --g --n --m or --gmax".into())),
    };
    let opts = CheckOptions { grid: v.grid };
    let mut table = String::new();
    writeln!(table, "{:<10} {:>6} {:>6} {:>10} {:>8} {:>8} {:>6} {:>6}  verdict", "(g,n,m)", "trees", "grid", "pairings", "nonzero", "a-deg", "bound", "audit")
        .unwrap();
    let mut reports = Vec::new();
    let mut ok = true;
    for (g, n, m) in list {
        let t0 = Instant::now();
        let r = polynomiality_check_with(g, n, m, &opts)?;
        eprintln!("({g},{n},{m}) checked in {:.2?}", t0.elapsed());
        ok &= r.all_ok();
        let deg = r.max_a_degree.map_or("-".to_string(), |d| d.to_string());
        let bound = match r.degree_bound_ok {
            Some(true) => "ok",
            Some(false) => "FAIL",
            None => "skip",
        };
        writeln!(
            table,
            "{:<10} {:>6} {:>6} {:>10} {:>8} {:>8} {:>6} {:>6}  {}",
            format!("({g},{n},{m})"),
            r.trees.len(),
            r.grid_points,
            r.pairings_checked,
            r.nonzero_pairings,
            deg,
            bound,
            if r.audit_ok { "ok" } else { "FAIL" },
            if r.all_ok() { "pass" } else { "FAIL" },
        )
        .unwrap();
        if r.pairings_checked == 0 {
            writeln!(table, "           negative part identically zero").unwrap();
        }
        for rec in &r.recorded {
            writeln!(table, "           a={:?} u^{} {} -> {}", rec.a, rec.u_exponent, rec.test, rec.value).unwrap();
        }
        reports.push(r);
    }
    writeln!(table, "{}", taut_core::master::CERTIFICATION).unwrap();
    Ok(Outcome { ok, table, result: json!({ "reports": reports }) })
}

pub fn enumerate(g: u32, n: usize, m: usize) -> Result<Outcome, Failure> {
    let trees = enumerate_pssrt(g, n, m)?;
    let closed = pssrt_count(g, n);
    let mut table = String::new();
    for t in &trees {
        writeln!(table, "{t}").unwrap();
    }
    writeln!(table, "count {} (closed form {closed})", trees.len()).unwrap();
    let listing: Vec<String> = trees.iter().map(|t| t.to_string()).collect();
    Ok(Outcome {
        ok: trees.len() as u128 == closed,
        table,
        result: json!({ "count": trees.len(), "closed_form": closed.to_string(), "trees": listing }),
    })
}

pub fn audit(g: u32, n: usize, m: usize) -> Result<Outcome, Failure> {
    let trees = enumerate_pssrt(g, n, m)?;
    let mut table = String::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for t in &trees {
        let d = audit_detail(t);
        let unique = taut_core::audit::edge_degrees_unique(t);
        let pass = d.holds() && unique;
        ok &= pass;
        writeln!(table, "{:<4} {t}  ({} terms)", if pass { "ok" } else { "FAIL" }, d.lhs.len()).unwrap();
        rows.push(json!({ "tree": t.to_string(), "identity": d.holds(), "edge_degrees_unique": unique, "terms": d.lhs.len() }));
    }
    writeln!(table, "{} of {} trees pass", rows.iter().filter(|r| r["identity"] == true && r["edge_degrees_unique"] == true).count(), trees.len())
        .unwrap();
    Ok(Outcome { ok, table, result: json!({ "trees": rows }) })
}

pub fn psi(g: u32, d: &[u32]) -> Result<Outcome, Failure> {
    let v = psi_integral(g, d)?;
    Ok(Outcome { ok: true, table: format!("{v}\n"), result: json!({ "g": g, "d": d, "value": v.to_string() }) })
}

pub fn dr(g: u32, parts: &[i64]) -> Result<Outcome, Failure> {
    let c = dr_cycle(g, parts)?;
    let terms: Vec<_> = c.terms().map(|(s, x)| json!({ "stratum": s.to_string(), "coefficient": x.to_string() })).collect();
    Ok(Outcome { ok: true, table: format!("{c}\n"), result: json!({ "g": g, "parts": parts, "class": c.to_string(), "terms": terms }) })
}

pub fn mumford(g: Option<u32>, n: Option<usize>, budget: u32) -> Outcome {
    let cases: Vec<(u32, usize)> = match (g, n) {
        (Some(g), Some(n)) => vec![(g, n)],
        _ => {
            let mut v = Vec::new();
            for g in 0..=(budget + 3) / 3 {
                for n in 0..=(budget as i64 + 3 - 3 * g as i64).max(0) as usize {
                    if 2 * g as i64 - 2 + n as i64 > 0 && 3 * g as i64 - 3 + n as i64 <= budget as i64 {
                        v.push((g, n));
                    }
                }
            }
            v
        }
    };
    let mut table = String::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for (g, n) in cases {
        let pass = mumford_check(g, n);
        ok &= pass;
        writeln!(table, "M({g},{n}) {}", if pass { "ok" } else { "FAIL" }).unwrap();
        rows.push(json!({ "g": g, "n": n, "ok": pass }));
    }
    Outcome { ok, table, result: json!({ "cases": rows }) }
}

/// A stable `(g, n)` with `n >= 1` and random exponents summing to `dim + extra`.
fn random_monomial(rng: &mut ChaCha8Rng, gmax: u32, extra: i64) -> (u32, Vec<u32>) {
    loop {
        let g = rng.gen_range(0..=gmax);
        let n = rng.gen_range(1..=5usize);
        if 2 * g as i64 - 2 + n as i64 <= 0 {
            continue;
        }
        let mut exps = vec![0u32; n];
        for _ in 0..3 * g as i64 - 3 + n as i64 + extra {
            exps[rng.gen_range(0..n)] += 1;
        }
        return (g, exps);
    }
}

fn with(exps: &[u32], extra: u32) -> Vec<u32> {
    let mut v = exps.to_vec();
    v.push(extra);
    v
}

pub fn identities(seed: u64, cases: usize, gmax: u32) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..cases {
        // string: <tau_0 prod tau_d>_g = sum_j <.. tau_{d_j - 1} ..>_g
        let (g, exps) = random_monomial(&mut rng, gmax, 1);
        let lhs = psi_integral(g, &with(&exps, 0)).expect("dimension matches");
        let mut rhs = Rational::zero();
        for j in 0..exps.len() {
            if exps[j] > 0 {
                let mut e = exps.clone();
                e[j] -= 1;
                rhs += &psi_integral(g, &e).expect("dimension matches");
            }
        }
        if lhs != rhs {
            failures.push(json!({ "identity": "string", "g": g, "d": exps }));
        }
        // dilaton: <tau_1 prod tau_d>_g = (2g-2+n) <prod tau_d>_g
        let (g, exps) = random_monomial(&mut rng, gmax, 0);
        let lhs = psi_integral(g, &with(&exps, 1)).expect("dimension matches");
        let rhs = psi_integral(g, &exps).expect("dimension matches") * Rational::from(2 * g as i64 - 2 + exps.len() as i64);
        if lhs != rhs {
            failures.push(json!({ "identity": "dilaton", "g": g, "d": exps }));
        }
    }
    Outcome {
        ok: failures.is_empty(),
        table: format!("{cases} string and {cases} dilaton cases, {} failures (seed {seed})\n", failures.len()),
        result: json!({ "seed": seed, "cases": cases, "failures": failures }),
    }
}
