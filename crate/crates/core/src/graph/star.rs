//! Pre-stable star rooted trees indexing the master relation.
//!
//! Markings `1..=n` sit on leaves, markings `n+1..=n+m` on the root, and every
//! edge joins the root to a leaf.

use std::fmt;

use serde::Serialize;

use super::stable::StableGraph;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Leaf {
    pub genus: u32,
    /// 1-based markings, increasing.
    pub legs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StarTree {
    pub g: u32,
    pub n: usize,
    pub m: usize,
    pub root_genus: u32,
    /// Ordered by smallest marking; leaf `i` is attached through edge `i`.
    pub leaves: Vec<Leaf>,
}

pub fn check_domain(g: u32, n: usize, m: usize) -> Result<()> {
    if n < 1 || m < 1 {
        return Err(Error::Domain(format!("need n >= 1 and m >= 1, got n={n}, m={m}")));
    }
    if 2 * g as i64 - 2 + n as i64 + m as i64 <= 0 {
        return Err(Error::Domain(format!("2g-2+n+m must be positive for (g,n,m)=({g},{n},{m})")));
    }
    Ok(())
}

impl StarTree {
    pub fn num_edges(&self) -> usize {
        self.leaves.len()
    }

    /// Total number of markings `n + m`.
    pub fn num_markings(&self) -> usize {
        self.n + self.m
    }

    /// `a(e)` for every edge, from integer values of `a_1..a_n`.
    pub fn edge_parts(&self, a: &[i64]) -> Vec<i64> {
        self.leaves.iter().map(|l| l.legs.iter().map(|&i| a[i - 1]).sum()).collect()
    }

    pub fn root_is_unstable(&self) -> bool {
        self.root_genus == 0 && self.m == 1 && self.leaves.len() == 1
    }

    pub fn leaf_is_unstable(&self, e: usize) -> bool {
        self.leaves[e].genus == 0 && self.leaves[e].legs.len() == 1
    }

    /// Root vertex space `M(g_r, |E| + m)`: edges first, then legs `n+1..n+m`.
    pub fn root_space(&self) -> (u32, usize) {
        (self.root_genus, self.leaves.len() + self.m)
    }

    /// Leaf vertex space `M(g_e, |legs| + 1)`: legs first, edge last.
    pub fn leaf_space(&self, e: usize) -> (u32, usize) {
        (self.leaves[e].genus, self.leaves[e].legs.len() + 1)
    }

    /// The underlying pre-stable graph: root is vertex 0, leaf `i` is vertex `i+1`.
    pub fn to_graph(&self) -> StableGraph {
        let mut genera = vec![self.root_genus];
        genera.extend(self.leaves.iter().map(|l| l.genus));
        let mut legs = vec![0usize; self.n + self.m];
        for (i, l) in self.leaves.iter().enumerate() {
            for &j in &l.legs {
                legs[j - 1] = i + 1;
            }
        }
        let edges = (0..self.leaves.len()).map(|i| (0, i + 1)).collect();
        StableGraph::new(genera, legs, edges)
    }

    // Each structural condition on a star tree, checkable on its own.

    pub fn is_star(&self) -> bool {
        let gr = self.to_graph();
        gr.is_connected() && gr.h1() == 0 && gr.edges().iter().all(|&(a, b)| a == 0 && b != 0)
    }

    pub fn legs_placed(&self) -> bool {
        let gr = self.to_graph();
        (0..self.n).all(|i| gr.legs()[i] != 0) && (self.n..self.n + self.m).all(|i| gr.legs()[i] == 0)
    }

    pub fn is_prestable(&self) -> bool {
        let gr = self.to_graph();
        (0..gr.num_vertices()).all(|v| 2 * gr.genera()[v] as i64 - 2 + gr.valence(v) as i64 >= 0)
    }

    pub fn every_vertex_has_leg(&self) -> bool {
        self.m >= 1 && self.leaves.iter().all(|l| !l.legs.is_empty())
    }

    pub fn edge_parts_are_leg_sums(&self, a: &[i64]) -> bool {
        let gr = self.to_graph();
        self.edge_parts(a).iter().enumerate().all(|(e, &ae)| {
            let v = e + 1;
            ae == (0..self.n).filter(|&i| gr.legs()[i] == v).map(|i| a[i]).sum::<i64>()
        })
    }

    pub fn genus_is_vertex_sum(&self) -> bool {
        self.to_graph().genus() == self.g
            && self.root_genus + self.leaves.iter().map(|l| l.genus).sum::<u32>() == self.g
    }

    pub fn satisfies_all_invariants(&self, a: &[i64]) -> bool {
        self.is_star()
            && self.legs_placed()
            && self.is_prestable()
            && self.every_vertex_has_leg()
            && self.edge_parts_are_leg_sums(a)
            && self.genus_is_vertex_sum()
    }
}

impl fmt::Display for StarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let root_legs: Vec<String> = (self.n + 1..=self.n + self.m).map(|i| i.to_string()).collect();
        write!(f, "root(g={};{})", self.root_genus, root_legs.join(","))?;
        for l in &self.leaves {
            let legs: Vec<String> = l.legs.iter().map(|i| i.to_string()).collect();
            write!(f, " | leaf(g={};{})", l.genus, legs.join(","))?;
        }
        Ok(())
    }
}

/// Set partitions of `{1..n}` with blocks ordered by smallest element.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i > n {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, n, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        rec(i + 1, n, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(1, n, &mut Vec::new(), &mut out);
    out
}

/// Weak compositions of `g` into `parts` non-negative parts.
fn weak_compositions(g: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if g == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![g]];
    }
    let mut out = Vec::new();
    for first in 0..=g {
        for mut rest in weak_compositions(g - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `sum_k S(n, k) C(g + k, k)`: set partitions of the legs times genus distributions.
pub fn pssrt_count(g: u32, n: usize) -> u128 {
    // Stirling numbers of the second kind by the triangle recurrence
    let mut s = vec![vec![0u128; n + 1]; n + 1];
    s[0][0] = 1;
    for i in 1..=n {
        for k in 1..=i {
            s[i][k] = k as u128 * s[i - 1][k] + s[i - 1][k - 1];
        }
    }
    (1..=n)
        .map(|k| {
            let binom = (1..=k as u128).fold(1u128, |acc, j| acc * (g as u128 + j) / j);
            s[n][k] * binom
        })
        .sum()
}

/// Every pre-stable star rooted tree of type `(g, n, m)`, in canonical order.
pub fn enumerate_pssrt(g: u32, n: usize, m: usize) -> Result<Vec<StarTree>> {
    check_domain(g, n, m)?;
    let mut out = Vec::new();
    for blocks in set_partitions(n) {
        for genera in weak_compositions(g, blocks.len() + 1) {
            let tree = StarTree {
                g,
                n,
                m,
                root_genus: genera[0],
                leaves: blocks
                    .iter()
                    .zip(&genera[1..])
                    .map(|(b, &genus)| Leaf { genus, legs: b.clone() })
                    .collect(),
            };
            if tree.is_prestable() {
                out.push(tree);
            }
        }
    }
    out.sort_by(|x, y| (x.leaves.len(), &x.leaves, x.root_genus).cmp(&(y.leaves.len(), &y.leaves, y.root_genus)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_pssrt(0, 2, 1).unwrap().len(), 2);
        assert_eq!(enumerate_pssrt(1, 1, 1).unwrap().len(), 2);
        assert_eq!(enumerate_pssrt(0, 3, 1).unwrap().len(), 5);
    }

    #[test]
    fn domain_errors() {
        assert!(enumerate_pssrt(0, 1, 1).is_err());
        assert!(enumerate_pssrt(1, 0, 1).is_err());
        assert!(enumerate_pssrt(1, 1, 0).is_err());
    }

    #[test]
    fn unstable_vertices() {
        let trees = enumerate_pssrt(0, 2, 1).unwrap();
        let merged = trees.iter().find(|t| t.leaves.len() == 1).unwrap();
        assert!(merged.root_is_unstable());
        assert!(!merged.leaf_is_unstable(0));
        let split = trees.iter().find(|t| t.leaves.len() == 2).unwrap();
        assert!(!split.root_is_unstable());
        assert!(split.leaf_is_unstable(0) && split.leaf_is_unstable(1));
    }

    #[test]
    fn display_is_stable() {
        let t = &enumerate_pssrt(1, 2, 1).unwrap()[0];
        assert_eq!(t.to_string(), "root(g=1;3) | leaf(g=0;1,2)");
    }
}
