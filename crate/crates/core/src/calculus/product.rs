//! Products of decorated strata through generic `(A, B)`-structures.
//!
//! For canonical graphs `A`, `B` in `M(g, N)` the product of `[A, alpha]` and
//! `[B, beta]` is a sum over canonical graphs `Gamma` and edge sets `E_A`, `E_B`
//! covering `E(Gamma)` whose complements contract `Gamma` onto `A` and `B`.
//! Edges in `E_A ∩ E_B` carry the excess class `-psi_h - psi_h'`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, LazyLock};

use parking_lot::{Mutex, RwLock};

use crate::algebra::Rational;
use crate::graph::stable::graph_info;
use crate::graph::{stable_graphs, StableGraph};

/// How a graph maps onto one of its contractions.
#[derive(Debug)]
pub(crate) struct PullMap {
    /// half-edge of the source -> half-edge of the target, `None` if contracted
    pub half: Vec<Option<usize>>,
    /// vertex of the source -> vertex of the target
    pub vertex: Vec<usize>,
}

#[derive(Debug)]
pub(crate) struct Structure {
    pub gamma: Arc<StableGraph>,
    pub a: Arc<PullMap>,
    pub b: Arc<PullMap>,
    /// edges of `gamma` shared by both sides
    pub excess: Vec<usize>,
}

type TargetIndex = BTreeMap<usize, Vec<(u64, Arc<PullMap>)>>;

#[derive(Default)]
struct Ambient {
    graphs: Vec<Arc<StableGraph>>,
    levels: usize,
    by_target: HashMap<Arc<StableGraph>, TargetIndex>,
}

impl Ambient {
    fn ensure_levels(&mut self, g: u32, n: usize, max_edges: usize) {
        while self.levels <= max_edges {
            let k = self.levels;
            for gamma in stable_graphs(g, n, k).iter() {
                let idx = self.graphs.len();
                self.graphs.push(gamma.clone());
                for mask in 0u64..(1u64 << k) {
                    let c = gamma.contract(mask);
                    let can = c.graph.canonicalize().expect("contractions stay connected");
                    let half = c.half_map.iter().map(|x| x.map(|y| can.half_map[y])).collect();
                    let vertex = c.vertex_map.iter().map(|&v| can.vertex_map[v]).collect();
                    self.by_target
                        .entry(can.graph)
                        .or_default()
                        .entry(idx)
                        .or_default()
                        .push((mask, Arc::new(PullMap { half, vertex })));
                }
            }
            self.levels += 1;
        }
    }
}

static AMBIENTS: LazyLock<Mutex<HashMap<(u32, usize), Ambient>>> = LazyLock::new(Default::default);
type StructureKey = (Arc<StableGraph>, Arc<StableGraph>);
static STRUCTURES: LazyLock<RwLock<HashMap<StructureKey, Arc<Vec<Structure>>>>> =
    LazyLock::new(Default::default);

/// All generic `(A, B)`-structures; `a` and `b` are canonical graphs of one ambient space.
pub(crate) fn structures(a: &Arc<StableGraph>, b: &Arc<StableGraph>) -> Arc<Vec<Structure>> {
    let key = (a.clone(), b.clone());
    if let Some(s) = STRUCTURES.read().get(&key) {
        return s.clone();
    }
    let (g, n) = (a.genus(), a.num_legs());
    let dim = a.dim().max(0) as usize;
    let max_edges = (a.num_edges() + b.num_edges()).min(dim);
    let mut out = Vec::new();
    {
        let mut ambients = AMBIENTS.lock();
        let amb = ambients.entry((g, n)).or_default();
        amb.ensure_levels(g, n, max_edges);
        if let (Some(ia), Some(ib)) = (amb.by_target.get(&**a), amb.by_target.get(&**b)) {
            for (gi, a_entries) in ia {
                let gamma = &amb.graphs[*gi];
                if gamma.num_edges() > max_edges {
                    continue;
                }
                let Some(b_entries) = ib.get(gi) else { continue };
                let full = (1u64 << gamma.num_edges()) - 1;
                for (ma, pa) in a_entries {
                    for (mb, pb) in b_entries {
                        if ma | mb != full {
                            continue;
                        }
                        let common = ma & mb;
                        let excess = (0..gamma.num_edges()).filter(|&e| common >> e & 1 == 1).collect();
                        out.push(Structure { gamma: gamma.clone(), a: pa.clone(), b: pb.clone(), excess });
                    }
                }
            }
        }
    }
    let out = Arc::new(out);
    STRUCTURES.write().entry(key).or_insert(out).clone()
}

pub(crate) type Decoration = (Vec<u8>, Vec<Vec<u8>>);

/// The average of a decoration over the automorphisms of its (canonical) graph.
pub(crate) fn symmetrize(graph: &StableGraph, psi: &[u8], kappa: &[Vec<u8>]) -> Vec<(Rational, Decoration)> {
    let info = graph_info(graph);
    if info.auts.len() == 1 {
        return vec![(Rational::one(), (psi.to_vec(), kappa.to_vec()))];
    }
    let mut counts: BTreeMap<Decoration, i64> = BTreeMap::new();
    for a in &info.auts {
        let mut p = vec![0u8; psi.len()];
        for (h, &x) in psi.iter().enumerate() {
            p[a.half[h]] = x;
        }
        let mut k = vec![Vec::new(); kappa.len()];
        for (v, x) in kappa.iter().enumerate() {
            k[a.vertex[v]] = x.clone();
        }
        *counts.entry((p, k)).or_default() += 1;
    }
    let total = info.auts.len() as i64;
    counts.into_iter().map(|(d, c)| (Rational::new(c, total), d)).collect()
}

/// Pull a decoration back along a contraction; kappa classes spread over preimage vertices.
pub(crate) fn pullback(map: &PullMap, gamma: &StableGraph, psi: &[u8], kappa: &[Vec<u8>]) -> Vec<(i64, Decoration)> {
    let p: Vec<u8> = map.half.iter().map(|x| x.map_or(0, |y| psi[y])).collect();
    let nv = gamma.num_vertices();
    if kappa.iter().all(|k| k.is_empty()) {
        return vec![(1, (p, vec![Vec::new(); nv]))];
    }
    let mut pre: Vec<Vec<usize>> = vec![Vec::new(); kappa.len()];
    for (w, &v) in map.vertex.iter().enumerate() {
        pre[v].push(w);
    }
    let mut partial: Vec<Vec<Vec<u8>>> = vec![vec![Vec::new(); nv]];
    for (v, ks) in kappa.iter().enumerate() {
        for &a in ks {
            let mut next = Vec::with_capacity(partial.len() * pre[v].len());
            for k in &partial {
                for &w in &pre[v] {
                    let mut k2 = k.clone();
                    k2[w].push(a);
                    next.push(k2);
                }
            }
            partial = next;
        }
    }
    let mut counts: BTreeMap<Vec<Vec<u8>>, i64> = BTreeMap::new();
    for mut k in partial {
        for x in k.iter_mut() {
            x.sort_unstable();
        }
        *counts.entry(k).or_default() += 1;
    }
    counts.into_iter().map(|(k, c)| (c, (p.clone(), k))).collect()
}

/// Calls `sink(gamma, coefficient, psi, kappa)` for every term of the product
/// `[A, alpha] * [B, beta]`, skipping terms that exceed a vertex dimension.
pub(crate) fn for_each_product_term(
    a: (&Arc<StableGraph>, &[u8], &[Vec<u8>]),
    b: (&Arc<StableGraph>, &[u8], &[Vec<u8>]),
    mut sink: impl FnMut(&Arc<StableGraph>, &Rational, &[u8], &[Vec<u8>]),
) {
    let sym_a = symmetrize(a.0, a.1, a.2);
    let sym_b = symmetrize(b.0, b.1, b.2);
    for s in structures(a.0, b.0).iter() {
        let gamma = &s.gamma;
        let nv = gamma.num_vertices();
        let dims: Vec<i64> = (0..nv).map(|v| gamma.vertex_dim(v)).collect();
        let vertex_of: Vec<usize> = (0..gamma.num_half_edges()).map(|h| gamma.vertex_of(h)).collect();
        let pulled_a: Vec<(Rational, Decoration)> = sym_a
            .iter()
            .flat_map(|(c, (p, k))| pullback(&s.a, gamma, p, k).into_iter().map(move |(m, d)| (c * Rational::from(m), d)))
            .collect();
        let pulled_b: Vec<(Rational, Decoration)> = sym_b
            .iter()
            .flat_map(|(c, (p, k))| pullback(&s.b, gamma, p, k).into_iter().map(move |(m, d)| (c * Rational::from(m), d)))
            .collect();
        let sign = if s.excess.len() % 2 == 1 { -Rational::one() } else { Rational::one() };
        for (ca, (pa, ka)) in &pulled_a {
            for (cb, (pb, kb)) in &pulled_b {
                let psi: Vec<u8> = pa.iter().zip(pb).map(|(x, y)| x + y).collect();
                let kappa: Vec<Vec<u8>> = ka
                    .iter()
                    .zip(kb)
                    .map(|(x, y)| {
                        let mut z: Vec<u8> = x.iter().chain(y).copied().collect();
                        z.sort_unstable();
                        z
                    })
                    .collect();
                let mut deg = vec![0i64; nv];
                for (h, &x) in psi.iter().enumerate() {
                    deg[vertex_of[h]] += x as i64;
                }
                for (v, k) in kappa.iter().enumerate() {
                    deg[v] += k.iter().map(|&x| x as i64).sum::<i64>();
                }
                if (0..nv).any(|v| deg[v] > dims[v]) {
                    continue;
                }
                let coef = &sign * ca * cb;
                expand_excess(gamma, &s.excess, &vertex_of, &dims, psi, &mut deg, kappa.as_slice(), &coef, &mut sink);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn expand_excess(
    gamma: &Arc<StableGraph>,
    excess: &[usize],
    vertex_of: &[usize],
    dims: &[i64],
    mut psi: Vec<u8>,
    deg: &mut [i64],
    kappa: &[Vec<u8>],
    coef: &Rational,
    sink: &mut impl FnMut(&Arc<StableGraph>, &Rational, &[u8], &[Vec<u8>]),
) {
    let Some((&e, rest)) = excess.split_first() else {
        sink(gamma, coef, &psi, kappa);
        return;
    };
    let (h0, h1) = gamma.edge_halves(e);
    for h in [h0, h1] {
        let v = vertex_of[h];
        if deg[v] + 1 > dims[v] {
            continue;
        }
        deg[v] += 1;
        psi[h] += 1;
        expand_excess(gamma, rest, vertex_of, dims, psi.clone(), deg, kappa, coef, sink);
        psi[h] -= 1;
        deg[v] -= 1;
    }
}
