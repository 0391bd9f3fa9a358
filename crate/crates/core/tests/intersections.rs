use proptest::prelude::*;
use taut_core::algebra::{factorial, Rational};
use taut_core::calculus::{boundary_pushforward, psi_integral, TautClass};
use taut_core::graph::{enumerate_pssrt, enumerate_strata};

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|k| compositions(total - k, parts - 1).into_iter().map(move |mut c| {
            c.insert(0, k);
            c
        }))
        .collect()
}

#[test]
fn genus_zero_multinomial() {
    for n in 3..=8usize {
        for d in compositions(n as u32 - 3, n) {
            let expect = d.iter().fold(factorial(n as u32 - 3), |acc, &x| acc / factorial(x));
            assert_eq!(psi_integral(0, &d).unwrap(), expect, "{d:?}");
        }
    }
}

#[test]
fn small_values() {
    assert_eq!(psi_integral(1, &[1]).unwrap(), Rational::new(1, 24));
    assert_eq!(psi_integral(0, &[0, 0, 0]).unwrap(), Rational::one());
    assert_eq!(psi_integral(2, &[4]).unwrap(), Rational::new(1, 1152));
    assert_eq!(psi_integral(3, &[7]).unwrap(), Rational::new(1, 82944));
    assert_eq!(psi_integral(1, &[1, 1]).unwrap(), Rational::new(1, 24));
    assert!(psi_integral(1, &[2]).is_err());
    assert!(psi_integral(0, &[0, 0]).is_err());
}

/// Stable `(g, n)` with `n >= 1`, exponents summing to `dim + extra`.
fn monomial(extra: u32) -> impl Strategy<Value = (u32, Vec<u32>)> {
    (0u32..=3, 1usize..=5)
        .prop_filter("stable", |&(g, n)| 2 * g as i64 - 2 + n as i64 > 0)
        .prop_flat_map(move |(g, n)| {
            let total = 3 * g + n as u32 - 3 + extra;
            (Just(g), proptest::collection::vec(0..n, total as usize)).prop_map(move |(g, slots)| {
                let mut d = vec![0u32; n];
                for s in slots {
                    d[s] += 1;
                }
                (g, d)
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn string_equation((g, d) in monomial(1)) {
        let mut with0 = d.clone();
        with0.push(0);
        let mut rhs = Rational::zero();
        for j in 0..d.len() {
            if d[j] > 0 {
                let mut e = d.clone();
                e[j] -= 1;
                rhs += &psi_integral(g, &e).unwrap();
            }
        }
        prop_assert_eq!(psi_integral(g, &with0).unwrap(), rhs);
    }

    #[test]
    fn dilaton_equation((g, d) in monomial(0)) {
        let mut with1 = d.clone();
        with1.push(1);
        let factor = Rational::from(2 * g as i64 - 2 + d.len() as i64);
        prop_assert_eq!(psi_integral(g, &with1).unwrap(), psi_integral(g, &d).unwrap() * factor);
    }
}

fn strata_classes(g: u32, n: usize) -> Vec<TautClass> {
    let dim = 3 * g + n as u32 - 3;
    (0..=dim.min(2)).flat_map(|d| enumerate_strata(g, n, d)).map(|s| TautClass::from_stratum(s, Rational::one())).collect()
}

fn check_product_laws(g: u32, n: usize, i: usize, j: usize, k: usize, c: i64) {
    let cls = strata_classes(g, n);
    let (x, y, z) = (&cls[i % cls.len()], &cls[j % cls.len()], &cls[k % cls.len()]);
    let x = &x.add(&y.scale(&Rational::from(c)));
    assert!(x.multiply(y) == y.multiply(x));
    assert!(x.multiply(y).multiply(z) == x.multiply(&y.multiply(z)));
    assert!(x.multiply(&y.add(z)) == x.multiply(y).add(&x.multiply(z)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn product_laws_genus_one(i in 0usize..1000, j in 0usize..1000, k in 0usize..1000, c in -3i64..3) {
        check_product_laws(1, 2, i, j, k, c);
    }

    #[test]
    fn product_laws_genus_zero(i in 0usize..1000, j in 0usize..1000, k in 0usize..1000, c in -3i64..3) {
        check_product_laws(0, 5, i, j, k, c);
    }
}

/// `int (b_T)_*(beta) psi_i = prod_v int beta_v psi_i|_v`, with `psi_i` living on the vertex carrying `i`.
#[test]
fn projection_formula_for_leg_psi() {
    let mut checked = 0;
    for (g, n, m) in [(1, 1, 2), (0, 3, 2), (0, 2, 3), (1, 2, 1), (1, 2, 2), (2, 1, 1), (0, 4, 2), (1, 3, 1)] {
        for tree in enumerate_pssrt(g, n, m).unwrap() {
            if tree.root_is_unstable() || (0..tree.num_edges()).any(|e| tree.leaf_is_unstable(e)) {
                continue;
            }
            // (vertex space, local index of every ambient leg on it)
            let mut spaces = vec![(tree.root_space(), (0..m).map(|j| (n + j, tree.num_edges() + j)).collect::<Vec<_>>())];
            for (e, leaf) in tree.leaves.iter().enumerate() {
                spaces.push((tree.leaf_space(e), leaf.legs.iter().enumerate().map(|(k, &i)| (i - 1, k)).collect()));
            }
            for (v, ((gv, nv), legs)) in spaces.iter().enumerate() {
                let dv = 3 * gv + *nv as u32 - 3;
                if dv == 0 {
                    continue;
                }
                for &(leg, local) in legs {
                    let mut expect = Rational::one();
                    let mut classes = Vec::new();
                    for (w, ((gw, nw), _)) in spaces.iter().enumerate() {
                        let dw = 3 * gw + *nw as u32 - 3;
                        // beta_w: all degree on the last marking (an edge end), one less at v
                        let top = if w == v { dw - 1 } else { dw };
                        let mut exps = vec![0u32; *nw];
                        exps[nw - 1] = top;
                        classes.push(TautClass::psi_monomial(*gw, *nw, &[(*nw, top as u8)]));
                        if w == v {
                            exps[local] += 1;
                        }
                        expect *= &psi_integral(*gw, &exps).unwrap();
                    }
                    let leaves: Vec<Option<&TautClass>> = classes[1..].iter().map(Some).collect();
                    let pushed = boundary_pushforward(&tree, Some(&classes[0]), &leaves).unwrap();
                    let got = pushed.multiply(&TautClass::psi(g, n + m, leg + 1)).integrate();
                    assert_eq!(got, expect, "{tree} vertex {v} leg {}", leg + 1);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 20, "only {checked} cases");
}
