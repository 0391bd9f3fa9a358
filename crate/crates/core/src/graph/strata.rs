//! Stable graph enumeration and decorated boundary strata.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, LazyLock};

use parking_lot::RwLock;

use super::stable::{graph_info, StableGraph};
use crate::error::Result;

/// A boundary stratum with psi-exponents on half-edges and a kappa monomial
/// (sorted multiset of positive indices) on each vertex.
///
/// Represents `xi_*(decoration) / |Aut(graph)|`. The graph is canonical and the
/// decoration is the minimal image under graph automorphisms, so equal classes
/// have equal keys.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedStratum {
    graph: Arc<StableGraph>,
    psi: Vec<u8>,
    kappa: Vec<Vec<u8>>,
}

impl DecoratedStratum {
    /// Build from an arbitrary labeling.
    pub fn new(graph: &StableGraph, psi: Vec<u8>, kappa: Vec<Vec<u8>>) -> Result<Self> {
        assert_eq!(psi.len(), graph.num_half_edges());
        assert_eq!(kappa.len(), graph.num_vertices());
        let c = graph.canonicalize()?;
        let mut p = vec![0u8; psi.len()];
        for (h, &x) in psi.iter().enumerate() {
            p[c.half_map[h]] = x;
        }
        let mut k = vec![Vec::new(); kappa.len()];
        for (v, x) in kappa.into_iter().enumerate() {
            k[c.vertex_map[v]] = x;
        }
        Ok(Self::from_canonical(c.graph, p, k))
    }

    /// Build on an already canonical graph; normalizes the decoration.
    pub fn from_canonical(graph: Arc<StableGraph>, psi: Vec<u8>, mut kappa: Vec<Vec<u8>>) -> Self {
        for k in kappa.iter_mut() {
            k.sort_unstable();
        }
        let info = graph_info(&graph);
        if info.auts.len() == 1 {
            return DecoratedStratum { graph, psi, kappa };
        }
        let mut best: Option<(Vec<u8>, Vec<Vec<u8>>)> = None;
        for a in &info.auts {
            let mut p = vec![0u8; psi.len()];
            for (h, &x) in psi.iter().enumerate() {
                p[a.half[h]] = x;
            }
            let mut k = vec![Vec::new(); kappa.len()];
            for (v, x) in kappa.iter().enumerate() {
                k[a.vertex[v]] = x.clone();
            }
            let cand = (p, k);
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
        let (psi, kappa) = best.unwrap();
        DecoratedStratum { graph, psi, kappa }
    }

    /// The undecorated stratum of a canonical graph.
    pub fn plain(graph: Arc<StableGraph>) -> Self {
        let psi = vec![0; graph.num_half_edges()];
        let kappa = vec![Vec::new(); graph.num_vertices()];
        DecoratedStratum { graph, psi, kappa }
    }

    pub fn graph(&self) -> &Arc<StableGraph> {
        &self.graph
    }

    pub fn psi(&self) -> &[u8] {
        &self.psi
    }

    pub fn kappa(&self) -> &[Vec<u8>] {
        &self.kappa
    }

    pub fn decoration_degree(&self) -> u32 {
        self.psi.iter().map(|&x| x as u32).sum::<u32>()
            + self.kappa.iter().flatten().map(|&x| x as u32).sum::<u32>()
    }

    /// Cohomological degree: edges plus decoration degree.
    pub fn degree(&self) -> u32 {
        self.graph.num_edges() as u32 + self.decoration_degree()
    }

    /// Decoration degree at vertex `v`.
    pub fn vertex_degree(&self, v: usize) -> u32 {
        let g = &self.graph;
        (0..g.num_half_edges()).filter(|&h| g.vertex_of(h) == v).map(|h| self.psi[h] as u32).sum::<u32>()
            + self.kappa[v].iter().map(|&x| x as u32).sum::<u32>()
    }

    /// False when some vertex decoration exceeds the vertex dimension (the class is zero).
    pub fn is_dimensionally_valid(&self) -> bool {
        (0..self.graph.num_vertices()).all(|v| self.vertex_degree(v) as i64 <= self.graph.vertex_dim(v))
    }
}

impl fmt::Display for DecoratedStratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.graph.num_edges() == 0 && self.degree() == 0 {
            return write!(f, "fundamental");
        }
        write!(f, "{}", self.graph)?;
        let psi: Vec<String> =
            self.psi.iter().enumerate().filter(|(_, &x)| x > 0).map(|(h, x)| format!("{h}^{x}")).collect();
        if !psi.is_empty() {
            write!(f, " psi[{}]", psi.join(","))?;
        }
        let kap: Vec<String> = self
            .kappa
            .iter()
            .enumerate()
            .filter(|(_, k)| !k.is_empty())
            .map(|(v, k)| format!("{v}:{}", k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(".")))
            .collect();
        if !kap.is_empty() {
            write!(f, " kappa[{}]", kap.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for DecoratedStratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

type GraphLevels = Vec<Arc<Vec<Arc<StableGraph>>>>;
static GRAPHS: LazyLock<RwLock<HashMap<(u32, usize), GraphLevels>>> = LazyLock::new(Default::default);

/// Canonical stable graphs of `M(g, n)` with exactly `k` edges, sorted.
pub fn stable_graphs(g: u32, n: usize, k: usize) -> Arc<Vec<Arc<StableGraph>>> {
    if let Some(levels) = GRAPHS.read().get(&(g, n)) {
        if let Some(l) = levels.get(k) {
            return l.clone();
        }
    }
    let mut map = GRAPHS.write();
    let levels = map.entry((g, n)).or_default();
    if levels.is_empty() {
        let base = StableGraph::trivial(g, n);
        let level0 = if base.is_stable() { vec![Arc::new(base)] } else { vec![] };
        levels.push(Arc::new(level0));
    }
    while levels.len() <= k {
        let prev = levels.last().unwrap().clone();
        let mut next: BTreeSet<Arc<StableGraph>> = BTreeSet::new();
        for gr in prev.iter() {
            for d in degenerations(gr) {
                let c = d.canonicalize().expect("degenerations stay connected");
                next.insert(c.graph);
            }
        }
        levels.push(Arc::new(next.into_iter().collect()));
    }
    levels[k].clone()
}

/// Graphs with one more edge obtained by degenerating a single vertex.
fn degenerations(gr: &StableGraph) -> Vec<StableGraph> {
    let mut out = Vec::new();
    let n = gr.num_legs();
    for v in 0..gr.num_vertices() {
        let gv = gr.genera()[v];
        if gv >= 1 {
            let mut genera = gr.genera().to_vec();
            genera[v] -= 1;
            let mut edges = gr.edges().to_vec();
            edges.push((v, v));
            out.push(StableGraph::new(genera, gr.legs().to_vec(), edges));
        }
        let hs = gr.half_edges_at(v);
        let nh = hs.len();
        for mask in 0u64..(1 << nh) {
            let s2: Vec<usize> = (0..nh).filter(|&i| mask >> i & 1 == 1).map(|i| hs[i]).collect();
            let n1 = nh - s2.len() + 1;
            let n2 = s2.len() + 1;
            for g1 in 0..=gv {
                let g2 = gv - g1;
                if 2 * g1 as i64 - 2 + n1 as i64 <= 0 || 2 * g2 as i64 - 2 + n2 as i64 <= 0 {
                    continue;
                }
                let w = gr.num_vertices();
                let mut genera = gr.genera().to_vec();
                genera[v] = g1;
                genera.push(g2);
                let mut legs = gr.legs().to_vec();
                let mut edges = gr.edges().to_vec();
                for &h in &s2 {
                    if h < n {
                        legs[h] = w;
                    } else {
                        let e = (h - n) / 2;
                        if (h - n) % 2 == 0 {
                            edges[e].0 = w;
                        } else {
                            edges[e].1 = w;
                        }
                    }
                }
                edges.push((v, w));
                out.push(StableGraph::new(genera, legs, edges));
            }
        }
    }
    out
}

/// Partitions of `d` into positive parts, each as a sorted vector.
pub(crate) fn partitions(d: u32) -> Vec<Vec<u8>> {
    fn rec(left: u32, max: u32, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if left == 0 {
            let mut p = cur.clone();
            p.sort_unstable();
            out.push(p);
            return;
        }
        for k in (1..=left.min(max)).rev() {
            cur.push(k as u8);
            rec(left - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, d, &mut Vec::new(), &mut out);
    out
}

/// Exponent vectors of length `len` summing to `d`.
pub(crate) fn compositions(len: usize, d: u32) -> Vec<Vec<u8>> {
    fn rec(len: usize, left: u32, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() + 1 == len {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k as u8);
            rec(len, left - k, cur, out);
            cur.pop();
        }
    }
    if len == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(len, d, &mut Vec::new(), &mut out);
    out
}

/// Decorated strata spanning `R^d(M(g, n))`: every stable graph with at most `d`
/// edges, with every psi/kappa decoration that fills degree `d` and fits each
/// vertex dimension. A spanning set, not a basis.
pub fn enumerate_strata(g: u32, n: usize, d: u32) -> Vec<DecoratedStratum> {
    let mut out: BTreeSet<DecoratedStratum> = BTreeSet::new();
    for k in 0..=d as usize {
        for gr in stable_graphs(g, n, k).iter() {
            let left = d - k as u32;
            let nv = gr.num_vertices();
            // per-vertex decoration lists, indexed by vertex degree
            let vertex_options: Vec<Vec<Vec<(Vec<(usize, u8)>, Vec<u8>)>>> = (0..nv)
                .map(|v| {
                    let hs = gr.half_edges_at(v);
                    let dim = gr.vertex_dim(v).max(0) as u32;
                    (0..=left.min(dim))
                        .map(|dv| {
                            let mut opts = Vec::new();
                            for j in 0..=dv {
                                for kap in partitions(j) {
                                    for comp in compositions(hs.len(), dv - j) {
                                        let ps: Vec<(usize, u8)> = hs.iter().copied().zip(comp).collect();
                                        opts.push((ps, kap.clone()));
                                    }
                                }
                            }
                            opts
                        })
                        .collect()
                })
                .collect();
            let dims: Vec<u32> = (0..nv).map(|v| vertex_options[v].len() as u32 - 1).collect();
            for split in bounded_compositions(&dims, left) {
                let mut partial: Vec<(Vec<u8>, Vec<Vec<u8>>)> =
                    vec![(vec![0; gr.num_half_edges()], vec![Vec::new(); nv])];
                for v in 0..nv {
                    let mut next = Vec::new();
                    for (psi, kap) in &partial {
                        for (ps, kv) in &vertex_options[v][split[v] as usize] {
                            let mut p = psi.clone();
                            for &(h, x) in ps {
                                p[h] = x;
                            }
                            let mut k = kap.clone();
                            k[v] = kv.clone();
                            next.push((p, k));
                        }
                    }
                    partial = next;
                }
                for (psi, kap) in partial {
                    out.insert(DecoratedStratum::from_canonical(gr.clone(), psi, kap));
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Vectors `x` with `x_i <= bounds_i` and `sum x = total`.
fn bounded_compositions(bounds: &[u32], total: u32) -> Vec<Vec<u32>> {
    fn rec(bounds: &[u32], i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == bounds.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for x in 0..=bounds[i].min(left) {
            cur.push(x);
            rec(bounds, i + 1, left - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(bounds, 0, total, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_moduli() {
        let s = enumerate_strata(0, 3, 0);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].degree(), 0);
        assert_eq!(s[0].graph().num_edges(), 0);
    }

    #[test]
    fn codim_one_on_m04() {
        let s = enumerate_strata(0, 4, 1);
        // psi_1..psi_4, kappa_1, and three boundary divisors
        assert_eq!(s.len(), 8);
        assert_eq!(s.iter().filter(|x| x.graph().num_edges() == 1).count(), 3);
    }

    #[test]
    fn codim_one_on_m11() {
        let s = enumerate_strata(1, 1, 1);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn genus_zero_boundary_counts() {
        // Boundary strata of M_{0,5}: 1 + 10 + 15, of M_{0,6}: 1 + 25 + 105 + 105.
        let c5: Vec<usize> = (0..3).map(|k| stable_graphs(0, 5, k).len()).collect();
        assert_eq!(c5, vec![1, 10, 15]);
        let c6: Vec<usize> = (0..4).map(|k| stable_graphs(0, 6, k).len()).collect();
        assert_eq!(c6, vec![1, 25, 105, 105]);
    }

    #[test]
    fn m11_and_m20_graph_counts() {
        assert_eq!(stable_graphs(1, 1, 1).len(), 1);
        assert_eq!(stable_graphs(1, 1, 2).len(), 0);
        // M_2: the open part plus 2 + 2 + 2 boundary strata by codimension
        let c: Vec<usize> = (0..4).map(|k| stable_graphs(2, 0, k).len()).collect();
        assert_eq!(c, vec![1, 2, 2, 2]);
    }

    #[test]
    fn decoration_normalized_under_automorphisms() {
        let g = StableGraph::new(vec![0, 0], vec![0, 1], vec![(0, 1), (0, 1)]);
        let c = g.canonicalize().unwrap().graph;
        let n = c.num_legs();
        let mut p1 = vec![0; c.num_half_edges()];
        p1[n] = 1;
        let mut p2 = vec![0; c.num_half_edges()];
        p2[n + 2] = 1;
        let a = DecoratedStratum::from_canonical(c.clone(), p1, vec![vec![], vec![]]);
        let b = DecoratedStratum::from_canonical(c, p2, vec![vec![], vec![]]);
        assert_eq!(a, b);
    }
}
