//! Pushforward of vertex classes along a star tree gluing map.
//!
//! Root markings are the edges (in leaf order) followed by legs `n+1..n+m`;
//! leaf markings are its legs in increasing order followed by the edge.
//! Unstable `(0, 2)` vertices are contracted: an unstable leaf turns the root
//! end of its edge into its leg, an unstable root turns the leaf end of the
//! single edge into leg `n+1`.

use std::collections::HashMap;
use std::sync::LazyLock;

use parking_lot::RwLock;

use super::taut::TautClass;
use crate::algebra::Rational;
use crate::error::{Error, Result};
use crate::graph::{DecoratedStratum, StableGraph, StarTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Port {
    /// 0-based leg of the ambient space
    Leg(usize),
    /// root end (`false`) or leaf end (`true`) of a glued tree edge
    Edge(usize, bool),
}

/// Where each marking of each stable vertex space goes; index 0 is the root.
fn ports(tree: &StarTree) -> Vec<Option<Vec<Port>>> {
    let n = tree.n;
    let ne = tree.num_edges();
    let mut out = Vec::with_capacity(ne + 1);
    if tree.root_is_unstable() {
        out.push(None);
    } else {
        let mut p: Vec<Port> = (0..ne)
            .map(|e| if tree.leaf_is_unstable(e) { Port::Leg(tree.leaves[e].legs[0] - 1) } else { Port::Edge(e, false) })
            .collect();
        p.extend((0..tree.m).map(|j| Port::Leg(n + j)));
        out.push(Some(p));
    }
    for (e, leaf) in tree.leaves.iter().enumerate() {
        if tree.leaf_is_unstable(e) {
            out.push(None);
            continue;
        }
        let mut p: Vec<Port> = leaf.legs.iter().map(|&i| Port::Leg(i - 1)).collect();
        p.push(if tree.root_is_unstable() { Port::Leg(n) } else { Port::Edge(e, true) });
        out.push(Some(p));
    }
    out
}

type GlueKey = (StarTree, Vec<Option<DecoratedStratum>>);
static GLUED: LazyLock<RwLock<HashMap<GlueKey, (DecoratedStratum, Rational)>>> = LazyLock::new(Default::default);

/// Glue one stratum per stable vertex; returns the canonical stratum and its coefficient.
fn glue(tree: &StarTree, parts: &[Option<&DecoratedStratum>]) -> (DecoratedStratum, Rational) {
    let key: GlueKey = (tree.clone(), parts.iter().map(|p| p.cloned()).collect());
    if let Some(v) = GLUED.read().get(&key) {
        return v.clone();
    }
    let total = tree.num_markings();
    let port_table = ports(tree);
    let mut genera = Vec::new();
    let mut offsets = vec![0usize; parts.len()];
    for (i, p) in parts.iter().enumerate() {
        if let Some(s) = p {
            offsets[i] = genera.len();
            genera.extend_from_slice(s.graph().genera());
        }
    }
    let mut legs = vec![usize::MAX; total];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    // (part, local half-edge) -> glued half-edge, filled after edges are numbered
    let mut half_of: Vec<Vec<usize>> = parts.iter().map(|p| vec![usize::MAX; p.map_or(0, |s| s.graph().num_half_edges())]).collect();
    // tree edge -> [(glued vertex, part, local marking); root end, leaf end]
    let mut tree_edge_ends: HashMap<usize, [(usize, usize, usize); 2]> = HashMap::new();
    for (i, p) in parts.iter().enumerate() {
        let Some(s) = p else { continue };
        let gr = s.graph();
        let table = port_table[i].as_ref().expect("stable vertex has ports");
        for (j, port) in table.iter().enumerate() {
            let v = offsets[i] + gr.legs()[j];
            match *port {
                Port::Leg(l) => {
                    legs[l] = v;
                    half_of[i][j] = l;
                }
                Port::Edge(e, side) => {
                    tree_edge_ends.entry(e).or_insert([(usize::MAX, 0, 0); 2])[side as usize] = (v, i, j);
                }
            }
        }
    }
    let mut tree_edges: Vec<_> = tree_edge_ends.into_iter().collect();
    tree_edges.sort_by_key(|(e, _)| *e);
    for (_, ends) in &tree_edges {
        let t = edges.len();
        edges.push((ends[0].0, ends[1].0));
        for (side, &(_, i, j)) in ends.iter().enumerate() {
            half_of[i][j] = total + 2 * t + side;
        }
    }
    for (i, p) in parts.iter().enumerate() {
        let Some(s) = p else { continue };
        let gr = s.graph();
        let nl = gr.num_legs();
        for (f, &(a, b)) in gr.edges().iter().enumerate() {
            let t = edges.len();
            edges.push((offsets[i] + a, offsets[i] + b));
            half_of[i][nl + 2 * f] = total + 2 * t;
            half_of[i][nl + 2 * f + 1] = total + 2 * t + 1;
        }
    }
    let glued = StableGraph::new(genera, legs, edges);
    let mut psi = vec![0u8; glued.num_half_edges()];
    let mut kappa = vec![Vec::new(); glued.num_vertices()];
    let mut denom = 1i64;
    for (i, p) in parts.iter().enumerate() {
        let Some(s) = p else { continue };
        for (h, &x) in s.psi().iter().enumerate() {
            psi[half_of[i][h]] = x;
        }
        for (v, k) in s.kappa().iter().enumerate() {
            kappa[offsets[i] + v] = k.clone();
        }
        denom *= s.graph().automorphism_count() as i64;
    }
    let stratum = DecoratedStratum::new(&glued, psi, kappa).expect("glued star tree is connected");
    let coef = Rational::new(stratum.graph().automorphism_count() as i64, denom);
    let out = (stratum, coef);
    GLUED.write().entry(key).or_insert(out).clone()
}

/// `(b_T)_*` of a tensor product of vertex classes; `None` exactly at unstable vertices.
pub fn boundary_pushforward(tree: &StarTree, root: Option<&TautClass>, leaves: &[Option<&TautClass>]) -> Result<TautClass> {
    if leaves.len() != tree.num_edges() {
        return Err(Error::Domain(format!("{} leaf classes for {} edges", leaves.len(), tree.num_edges())));
    }
    let mut classes: Vec<Option<&TautClass>> = vec![root];
    classes.extend_from_slice(leaves);
    for (i, c) in classes.iter().enumerate() {
        let (unstable, (g, n)) = if i == 0 {
            (tree.root_is_unstable(), tree.root_space())
        } else {
            (tree.leaf_is_unstable(i - 1), tree.leaf_space(i - 1))
        };
        match (c, unstable) {
            (Some(x), false) => {
                if (x.genus(), x.num_markings()) != (g, n) {
                    return Err(Error::AmbientMismatch(g, n, x.genus(), x.num_markings()));
                }
            }
            (None, true) => {}
            (Some(_), true) => return Err(Error::Domain(format!("vertex {i} is unstable and takes no class"))),
            (None, false) => return Err(Error::Domain(format!("missing class for stable vertex {i}"))),
        }
    }
    let mut out = TautClass::zero(tree.g, tree.num_markings());
    let dim = out.dim();
    let glued_edges = (0..tree.num_edges()).filter(|&e| !tree.leaf_is_unstable(e) && !tree.root_is_unstable()).count() as i64;
    let term_lists: Vec<Vec<Option<(&DecoratedStratum, &Rational)>>> =
        classes.iter().map(|c| c.map_or_else(|| vec![None], |x| x.terms().map(Some).collect())).collect();
    let mut choice = vec![0usize; term_lists.len()];
    if term_lists.iter().any(|l| l.is_empty()) {
        return Ok(out);
    }
    loop {
        let picked: Vec<Option<(&DecoratedStratum, &Rational)>> =
            choice.iter().zip(&term_lists).map(|(&k, l)| l[k]).collect();
        let degree: i64 = glued_edges + picked.iter().flatten().map(|(s, _)| s.degree() as i64).sum::<i64>();
        if degree <= dim {
            let strata: Vec<Option<&DecoratedStratum>> = picked.iter().map(|p| p.map(|(s, _)| s)).collect();
            let (s, c) = glue(tree, &strata);
            let coef = picked.iter().flatten().fold(c, |acc, (_, x)| acc * *x);
            out.add_term(s, coef);
        }
        // next combination
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(out);
            }
            choice[i] += 1;
            if choice[i] < term_lists[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
