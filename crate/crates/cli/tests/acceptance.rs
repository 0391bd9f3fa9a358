//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taut_core::algebra::{factorial, laurent_negative_part, Rational, ULaurent};
use taut_core::audit::audit_tree;
use taut_core::cache::{format_cache, parse_cache, save_cache};
use taut_core::calculus::{psi_integral, TautClass};
use taut_core::graph::{enumerate_pssrt, StarTree};
use taut_core::master::{leaf_class, polynomiality_check, root_class, xi_of_tree, xi_total, Verdict, XiReport};
use taut_core::special::{dr_cycle, dr_cycle_with, mumford_check, RSchedule};

type Check = (bool, String);

fn dim(g: u32, n: usize, m: usize) -> i64 {
    3 * g as i64 - 3 + (n + m) as i64
}

/// Every stable `(g, n, m)` with `n, m >= 1` and `3g-3+n+m <= 4`, then `(2,1,1)`.
fn desk_instances() -> Vec<(u32, usize, usize)> {
    let mut out = Vec::new();
    for g in 0..=2u32 {
        for n in 1..=8usize {
            for m in 1..=8usize {
                if 2 * g as i64 - 2 + (n + m) as i64 > 0 && dim(g, n, m) <= 4 {
                    out.push((g, n, m));
                }
            }
        }
    }
    out.push((2, 1, 1));
    out
}

fn vanishing_instances(reports: &[XiReport], elapsed: Duration) -> Check {
    let required = [(0, 2, 1), (0, 1, 2), (0, 3, 1), (0, 2, 2), (0, 1, 3), (0, 4, 1), (1, 1, 1), (1, 2, 1), (1, 1, 2), (2, 1, 1)];
    let covered = required.iter().all(|&(g, n, m)| reports.iter().any(|r| (r.g, r.n, r.m) == (g, n, m)));
    let failed: Vec<String> =
        reports.iter().filter(|r| r.verdict != Verdict::Pass).map(|r| format!("({},{},{})", r.g, r.n, r.m)).collect();
    let pairings: u64 = reports.iter().map(|r| r.pairings_checked).sum();
    let fast = elapsed < Duration::from_secs(600);
    (
        covered && failed.is_empty() && fast,
        format!("{} instances, {pairings} pairings all zero: {}, failed {failed:?}, {elapsed:.1?} of 600s", reports.len(), failed.is_empty()),
    )
}

fn tree(n: usize, leaves: &[&[usize]]) -> StarTree {
    enumerate_pssrt(0, n, 1)
        .unwrap()
        .into_iter()
        .find(|t| t.leaves.iter().map(|l| l.legs.as_slice()).eq(leaves.iter().copied()))
        .expect("tree exists")
}

fn two_point_hand_oracle() -> Check {
    let joined = tree(2, &[&[1, 2]]);
    let split = tree(2, &[&[1], &[2]]);
    let point = TautClass::one(0, 3);
    let mut ok = true;
    for a in [[1i64, 1], [2, 5], [7, 3], [4, 4]] {
        let r = Rational::from;
        // prefactor u^{-1} a(e)/u, root -a(e)^{-1} u, leaf 1
        ok &= root_class(&joined, &a).unwrap().as_scalar() == Some(&ULaurent::monomial(1, -r(a[0] + a[1]).recip()));
        let leaf = leaf_class(&joined, 0, &a).unwrap();
        ok &= leaf.as_class().and_then(|c| c.coeff(0)) == Some(&point);
        ok &= xi_of_tree(&joined, &a).unwrap().value == ULaurent::monomial(-1, point.scale(&-Rational::one()));
        // prefactor u^{-1} a1 a2 u^{-2}, leaves a_i^{-1} u each
        for (e, &ae) in a.iter().enumerate() {
            ok &= leaf_class(&split, e, &a).unwrap().as_scalar() == Some(&ULaurent::monomial(1, r(ae).recip()));
        }
        ok &= xi_of_tree(&split, &a).unwrap().value == ULaurent::monomial(-1, point.clone());
        let total = xi_total(0, 2, 1, &a).unwrap();
        ok &= total.is_zero() && laurent_negative_part(&total).is_zero();
    }
    let report = polynomiality_check(0, 2, 1).unwrap();
    ok &= report.pairings_checked == 0 && report.verdict == Verdict::Pass;
    (ok, "-u^-1 and +u^-1 tree terms reproduced, sum identically zero at 4 values of a".into())
}

fn degree_bound(reports: &[XiReport]) -> Check {
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| r.degree_bound_ok != Some(true) || r.max_a_degree.is_some_and(|d| d > r.dimension))
        .map(|r| format!("({},{},{})", r.g, r.n, r.m))
        .collect();
    let degrees: Vec<String> =
        reports.iter().map(|r| format!("({},{},{}):{}/{}", r.g, r.n, r.m, r.max_a_degree.map_or("-".into(), |d| d.to_string()), r.dimension)).collect();
    (bad.is_empty(), format!("max a-degree / bound {}", degrees.join(" ")))
}

fn localization_audit(reports: &[XiReport]) -> Check {
    let mut trees = 0;
    let mut failed = Vec::new();
    for r in reports {
        for t in enumerate_pssrt(r.g, r.n, r.m).unwrap() {
            trees += 1;
            if !audit_tree(&t) {
                failed.push(t.to_string());
            }
        }
    }
    let reported = reports.iter().all(|r| r.audit_ok);
    (failed.is_empty() && reported, format!("{trees} trees audited, {} failures", failed.len()))
}

fn mumford() -> Check {
    let mut cases = Vec::new();
    for g in 0..=2u32 {
        for n in 0..=8usize {
            if 2 * g as i64 - 2 + n as i64 > 0 && 3 * g as i64 - 3 + n as i64 <= 5 {
                cases.push((g, n, mumford_check(g, n)));
            }
        }
    }
    let failed: Vec<_> = cases.iter().filter(|c| !c.2).map(|c| (c.0, c.1)).collect();
    (failed.is_empty(), format!("{} spaces, failed {failed:?}", cases.len()))
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|k| {
            compositions(total - k, parts - 1).into_iter().map(move |mut c| {
                c.insert(0, k);
                c
            })
        })
        .collect()
}

fn random_exponents(rng: &mut ChaCha8Rng, n: usize, total: i64) -> Vec<u32> {
    let mut d = vec![0; n];
    for _ in 0..total {
        d[rng.gen_range(0..n)] += 1;
    }
    d
}

fn intersection_oracles() -> Check {
    let mut genus_zero = 0;
    let mut ok = true;
    for n in 3..=8usize {
        for d in compositions(n as u32 - 3, n) {
            let closed = d.iter().fold(factorial(n as u32 - 3), |acc, &x| acc / factorial(x));
            ok &= psi_integral(0, &d).unwrap() == closed;
            genus_zero += 1;
        }
    }
    ok &= psi_integral(1, &[1]).unwrap() == Rational::new(1, 24);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut cases = 0;
    while cases < 250 {
        let g = rng.gen_range(0..=3u32);
        let n = rng.gen_range(1..=5usize);
        if 2 * g as i64 - 2 + n as i64 <= 0 {
            continue;
        }
        let d = random_exponents(&mut rng, n, 3 * g as i64 - 2 + n as i64);
        let mut rhs = Rational::zero();
        for j in 0..n {
            if d[j] > 0 {
                let mut e = d.clone();
                e[j] -= 1;
                rhs += &psi_integral(g, &e).unwrap();
            }
        }
        ok &= psi_integral(g, &[d.clone(), vec![0]].concat()).unwrap() == rhs;
        let d = random_exponents(&mut rng, n, 3 * g as i64 - 3 + n as i64);
        let rhs = psi_integral(g, &d).unwrap() * Rational::from(2 * g as i64 - 2 + n as i64);
        ok &= psi_integral(g, &[d, vec![1]].concat()).unwrap() == rhs;
        cases += 1;
    }
    (ok, format!("{genus_zero} genus-0 monomials, <tau_1>_1 = 1/24, {cases} string and {cases} dilaton cases"))
}

fn parts_vectors(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n - 1 {
        out = out.into_iter().flat_map(|v| (-bound..=bound).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out.into_iter()
        .filter_map(|mut v| {
            let last = -v.iter().sum::<i64>();
            (last.abs() <= bound).then(|| {
                v.push(last);
                v
            })
        })
        .collect()
}

fn dr_dual_pipeline() -> Check {
    let mut cases = 0;
    let mut failed = Vec::new();
    for g in 0..=2u32 {
        for n in 1..=4usize {
            if 2 * g as i64 - 2 + n as i64 <= 0 {
                continue;
            }
            for parts in parts_vectors(n, 5) {
                let a = dr_cycle_with(g, &parts, RSchedule::Consecutive).unwrap();
                let b = dr_cycle_with(g, &parts, RSchedule::Sparse).unwrap();
                if a != b || (g == 0 && a != TautClass::one(0, n)) {
                    failed.push((g, parts));
                }
                cases += 1;
            }
        }
    }
    (failed.is_empty(), format!("{cases} part vectors, failed {failed:?}"))
}

fn stirling2(n: usize, k: usize) -> u128 {
    match (n, k) {
        (0, 0) => 1,
        (0, _) | (_, 0) => 0,
        _ => k as u128 * stirling2(n - 1, k) + stirling2(n - 1, k - 1),
    }
}

fn choose(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn count_law() -> Check {
    let mut cases = 0;
    let mut failed = Vec::new();
    for g in 0..=3u32 {
        for n in 1..=5usize {
            for m in 1..=3usize {
                if 2 * g as i64 - 2 + (n + m) as i64 <= 0 {
                    continue;
                }
                let expect: u128 = (0..=n).map(|k| stirling2(n, k) * choose((g as usize + k) as u128, k as u128)).sum();
                let got = enumerate_pssrt(g, n, m).unwrap().len() as u128;
                if got != expect {
                    failed.push((g, n, m, got, expect));
                }
                cases += 1;
            }
        }
    }
    (failed.is_empty(), format!("{cases} triples, failed {failed:?}"))
}

fn run_cli(cache: &std::path::Path) -> Vec<u8> {
    let o = Command::new(env!("CARGO_BIN_EXE_taut"))
        .args(["--format", "structured", "--cache", cache.to_str().unwrap(), "verify", "--g", "1", "--n", "2", "--m", "1"])
        .output()
        .expect("taut runs");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o.stdout
}

fn determinism_and_cache() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("psi.cache");
    let runs = [run_cli(&cache), run_cli(&cache), run_cli(&cache)];
    let identical = runs.iter().all(|r| *r == runs[0]);
    let a = serde_json::to_string(&polynomiality_check(1, 1, 2).unwrap()).unwrap();
    let b = serde_json::to_string(&polynomiality_check(1, 1, 2).unwrap()).unwrap();
    let in_process = a == b;

    let path = dir.path().join("memo.cache");
    let saved = save_cache(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let entries = parse_cache(&text).unwrap();
    let exact = entries.len() == saved
        && format_cache(&entries) == text
        && entries.iter().all(|e| psi_integral(e.g, &e.exps).unwrap() == e.value);
    let dr_twice = dr_cycle(1, &[3, -1, -2]).unwrap() == dr_cycle(1, &[3, -1, -2]).unwrap();
    (
        identical && in_process && exact && dr_twice,
        format!("3 CLI runs identical: {identical}, reports identical: {in_process}, {saved} cache entries round-trip exactly: {exact}"),
    )
}

fn main() {
    let mut all = true;
    let mut line = |k: u32, title: &str, check: Check, took: Duration| {
        all &= check.0;
        println!("criterion {k} {}: {title}; {} [{took:.1?}]", if check.0 { "PASS" } else { "FAIL" }, check.1);
    };

    let t = Instant::now();
    let mut reports = Vec::new();
    for (g, n, m) in desk_instances() {
        let s = Instant::now();
        let r = polynomiality_check(g, n, m).expect("domain");
        eprintln!("  ({g},{n},{m}): {} trees, {} pairings, {:?}, {:.1?}", r.trees.len(), r.pairings_checked, r.verdict, s.elapsed());
        reports.push(r);
    }
    let elapsed = t.elapsed();
    line(1, "negative u-part pairs to zero on every desk-scale instance", vanishing_instances(&reports, elapsed), elapsed);

    let t = Instant::now();
    line(2, "two-point genus-0 hand computation", two_point_hand_oracle(), t.elapsed());
    let t = Instant::now();
    line(3, "a-degree at most 3g-3+n+m", degree_bound(&reports), t.elapsed());
    let t = Instant::now();
    line(4, "localization audit on every tree", localization_audit(&reports), t.elapsed());
    let t = Instant::now();
    line(5, "Mumford relation for 3g-3+N <= 5", mumford(), t.elapsed());
    let t = Instant::now();
    line(6, "intersection-number oracles", intersection_oracles(), t.elapsed());
    let t = Instant::now();
    line(7, "DR cycle from two r-schedules, g <= 2, N <= 4, |parts| <= 5", dr_dual_pipeline(), t.elapsed());
    let t = Instant::now();
    line(8, "star tree count law, g <= 3, n <= 5, m <= 3", count_law(), t.elapsed());
    let t = Instant::now();
    line(9, "determinism and cache integrity", determinism_and_cache(), t.elapsed());

    if !all {
        std::process::exit(1);
    }
}
