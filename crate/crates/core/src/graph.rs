//! Immutable undirected simple graphs, vertex mappings, and exact-distance
//! neighborhood queries.
//!
//! Vertices are contiguous `0..n` indices stored as `u32`. Adjacency is kept
//! in compressed sparse row form: the neighbors of `u` are the sorted slice
//! `targets[offsets[u]..offsets[u + 1]]`.

use crate::error::{Error, Result};

/// Vertex index. Graphs are limited to fewer than `u32::MAX` vertices.
pub type Vertex = u32;

const UNMAPPED: Vertex = Vertex::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
}

impl Graph {
    /// Builds a simple graph on `n` vertices. Duplicate edges (in either
    /// orientation) and self-loops are dropped.
    pub fn build<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n >= UNMAPPED as usize {
            return Err(Error::domain(format!("vertex count {n} exceeds u32 range")));
        }
        let mut pairs: Vec<(Vertex, Vertex)> = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { u, v, n });
            }
            if u != v {
                pairs.push((u as Vertex, v as Vertex));
                pairs.push((v as Vertex, u as Vertex));
            }
        }
        Ok(Self::from_directed_pairs(n, pairs))
    }

    /// `pairs` must already be symmetric and loop-free; duplicates are removed.
    pub(crate) fn from_directed_pairs(n: usize, mut pairs: Vec<(Vertex, Vertex)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0usize; n + 1];
        for &(u, _) in &pairs {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.into_iter().map(|(_, v)| v).collect();
        Graph { offsets, targets }
    }

    /// Builds from per-vertex neighbor lists that are already sorted, deduplicated,
    /// loop-free and symmetric.
    pub(crate) fn from_sorted_lists(lists: Vec<Vec<Vertex>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let total = lists.iter().map(Vec::len).sum();
        let mut targets = Vec::with_capacity(total);
        for list in lists {
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        Graph { offsets, targets }
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[Vertex] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.vertex_count() && self.neighbors(u).binary_search(&(v as Vertex)).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Relabels vertex `u` as `perm(u)`. `perm` must be a permutation of the vertex set.
    pub fn relabel(&self, perm: &VertexMapping) -> Result<Self> {
        let n = self.vertex_count();
        if !perm.is_permutation() || perm.domain_size() != n {
            return Err(Error::InvalidMapping(
                "relabeling requires a permutation of the vertex set".into(),
            ));
        }
        let mut lists = vec![Vec::new(); n];
        for u in 0..n {
            let pu = perm.image[u] as usize;
            let list: &mut Vec<Vertex> = &mut lists[pu];
            list.extend(self.neighbors(u).iter().map(|&v| perm.image[v as usize]));
            list.sort_unstable();
        }
        Ok(Self::from_sorted_lists(lists))
    }

    /// Subgraph induced on `keep` (strictly increasing vertex list), reindexed so
    /// that `keep[i]` becomes vertex `i`.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Self {
        let mut new_index = vec![UNMAPPED; self.vertex_count()];
        for (i, &u) in keep.iter().enumerate() {
            new_index[u] = i as Vertex;
        }
        let lists = keep
            .iter()
            .map(|&u| {
                self.neighbors(u)
                    .iter()
                    .map(|&v| new_index[v as usize])
                    .filter(|&v| v != UNMAPPED)
                    .collect()
            })
            .collect();
        Self::from_sorted_lists(lists)
    }

    pub fn isolated_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(move |&u| self.degree(u) == 0)
    }
}

/// A possibly partial injective map from `0..domain_size` into `0..codomain_size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexMapping {
    image: Vec<Vertex>,
    codomain_size: usize,
}

impl VertexMapping {
    pub fn identity(n: usize) -> Self {
        VertexMapping {
            image: (0..n as Vertex).collect(),
            codomain_size: n,
        }
    }

    pub fn unmapped(domain_size: usize, codomain_size: usize) -> Self {
        VertexMapping {
            image: vec![UNMAPPED; domain_size],
            codomain_size,
        }
    }

    /// A total mapping onto `0..images.len()`; fails unless `images` is a permutation.
    pub fn from_permutation(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        Self::from_images(n, images.into_iter().map(Some))
    }

    /// Builds a mapping from optional images, checking range and injectivity.
    pub fn from_images<I>(codomain_size: usize, images: I) -> Result<Self>
    where
        I: IntoIterator<Item = Option<usize>>,
    {
        let mut seen = vec![false; codomain_size];
        let mut image = Vec::new();
        for (u, target) in images.into_iter().enumerate() {
            match target {
                None => image.push(UNMAPPED),
                Some(v) => {
                    if v >= codomain_size {
                        return Err(Error::InvalidMapping(format!(
                            "vertex {u} maps to {v}, outside 0..{codomain_size}"
                        )));
                    }
                    if std::mem::replace(&mut seen[v], true) {
                        return Err(Error::InvalidMapping(format!(
                            "vertex {v} is the image of more than one vertex"
                        )));
                    }
                    image.push(v as Vertex);
                }
            }
        }
        Ok(VertexMapping {
            image,
            codomain_size,
        })
    }

    /// Builds from `(u, v)` pairs over the given domain and codomain sizes.
    pub fn from_pairs<I>(domain_size: usize, codomain_size: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut images = vec![None; domain_size];
        for (u, v) in pairs {
            if u >= domain_size {
                return Err(Error::InvalidMapping(format!(
                    "vertex {u} outside domain 0..{domain_size}"
                )));
            }
            if images[u].replace(v).is_some() {
                return Err(Error::InvalidMapping(format!("vertex {u} mapped twice")));
            }
        }
        Self::from_images(codomain_size, images)
    }

    pub(crate) fn from_raw_unchecked(image: Vec<Vertex>, codomain_size: usize) -> Self {
        debug_assert!(image
            .iter()
            .all(|&v| v == UNMAPPED || (v as usize) < codomain_size));
        VertexMapping {
            image,
            codomain_size,
        }
    }

    pub fn domain_size(&self) -> usize {
        self.image.len()
    }

    pub fn codomain_size(&self) -> usize {
        self.codomain_size
    }

    #[inline]
    pub fn get(&self, u: usize) -> Option<usize> {
        match self.image.get(u) {
            Some(&v) if v != UNMAPPED => Some(v as usize),
            _ => None,
        }
    }

    /// Defined `(u, image(u))` pairs in increasing `u`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.image
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != UNMAPPED)
            .map(|(u, &v)| (u, v as usize))
    }

    pub fn defined_count(&self) -> usize {
        self.image.iter().filter(|&&v| v != UNMAPPED).count()
    }

    pub fn is_total(&self) -> bool {
        self.image.iter().all(|&v| v != UNMAPPED)
    }

    pub fn is_permutation(&self) -> bool {
        self.is_total() && self.codomain_size == self.image.len()
    }

    pub fn inverse(&self) -> VertexMapping {
        let mut image = vec![UNMAPPED; self.codomain_size];
        for (u, v) in self.pairs() {
            image[v] = u as Vertex;
        }
        VertexMapping {
            image,
            codomain_size: self.domain_size(),
        }
    }

    /// `u -> outer(self(u))`, undefined wherever either step is undefined.
    pub fn then(&self, outer: &VertexMapping) -> VertexMapping {
        let image = self
            .image
            .iter()
            .map(|&v| {
                if v == UNMAPPED {
                    UNMAPPED
                } else {
                    outer.image.get(v as usize).copied().unwrap_or(UNMAPPED)
                }
            })
            .collect();
        VertexMapping {
            image,
            codomain_size: outer.codomain_size,
        }
    }

    /// Number of `u` with `self(u) == other(u)`, both defined.
    pub fn agreement(&self, other: &VertexMapping) -> usize {
        self.image
            .iter()
            .zip(&other.image)
            .filter(|(&a, &b)| a != UNMAPPED && a == b)
            .count()
    }

    pub(crate) fn raw(&self) -> &[Vertex] {
        &self.image
    }
}

/// Per-vertex sets of vertices at one fixed shortest-path distance, in CSR form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HopSets {
    offsets: Vec<usize>,
    items: Vec<Vertex>,
}

impl HopSets {
    #[inline]
    pub fn get(&self, u: usize) -> &[Vertex] {
        &self.items[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn total_len(&self) -> usize {
        self.items.len()
    }
}

/// Reusable BFS state. Visited marks carry an epoch so no per-source clearing
/// is needed.
#[derive(Debug)]
pub struct BfsScratch {
    mark: Vec<u32>,
    epoch: u32,
    frontier: Vec<Vertex>,
    next: Vec<Vertex>,
    bits: Vec<u64>,
}

impl BfsScratch {
    pub fn new(n: usize) -> Self {
        BfsScratch {
            mark: vec![0; n],
            epoch: 0,
            frontier: Vec::new(),
            next: Vec::new(),
            bits: vec![0; n.div_ceil(64)],
        }
    }

    fn bump(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.fill(0);
            self.epoch = 1;
        }
    }

    /// Vertices at distance exactly `j` from `src`, sorted ascending.
    pub fn exact_hop(&mut self, g: &Graph, src: usize, j: usize) -> Vec<Vertex> {
        self.bump();
        let epoch = self.epoch;
        self.frontier.clear();
        self.frontier.push(src as Vertex);
        self.mark[src] = epoch;
        for _ in 0..j {
            self.next.clear();
            for &x in &self.frontier {
                for &y in g.neighbors(x as usize) {
                    let slot = &mut self.mark[y as usize];
                    if *slot != epoch {
                        *slot = epoch;
                        self.next.push(y);
                    }
                }
            }
            std::mem::swap(&mut self.frontier, &mut self.next);
            if self.frontier.is_empty() {
                break;
            }
        }
        if self.frontier.len() * 16 < self.mark.len() {
            let mut out = self.frontier.clone();
            out.sort_unstable();
            return out;
        }
        // Large frontier: a bitmap scan yields sorted order without a sort.
        for &x in &self.frontier {
            self.bits[x as usize / 64] |= 1 << (x % 64);
        }
        let mut out = Vec::with_capacity(self.frontier.len());
        for (i, word) in self.bits.iter_mut().enumerate() {
            let mut w = std::mem::take(word);
            while w != 0 {
                out.push((i * 64) as Vertex + w.trailing_zeros());
                w &= w - 1;
            }
        }
        out
    }
}

/// For every vertex `u`, the sorted set `{v : d(u, v) = j}`.
pub fn exact_khop_sets(g: &Graph, j: usize) -> Result<HopSets> {
    use rayon::prelude::*;

    if j == 0 {
        return Err(Error::domain("hop count must be at least 1"));
    }
    let n = g.vertex_count();
    if j == 1 {
        return Ok(HopSets {
            offsets: g.offsets.clone(),
            items: g.targets.clone(),
        });
    }
    const CHUNK: usize = 256;
    let chunks: Vec<Vec<Vec<Vertex>>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map_init(
            || BfsScratch::new(n),
            |scratch, c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(n);
                (lo..hi).map(|u| scratch.exact_hop(g, u, j)).collect()
            },
        )
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut items = Vec::new();
    for set in chunks.into_iter().flatten() {
        items.extend_from_slice(&set);
        offsets.push(items.len());
    }
    Ok(HopSets { offsets, items })
}

/// Edges present in both graphs under the alignment `truth` (from `g1`'s
/// vertices into `g2`'s). Edges with an unmapped endpoint are excluded.
pub fn intersection_graph(g1: &Graph, g2: &Graph, truth: &VertexMapping) -> Graph {
    let lists = (0..g1.vertex_count())
        .map(|u| match truth.get(u) {
            None => Vec::new(),
            Some(tu) if tu >= g2.vertex_count() => Vec::new(),
            Some(tu) => g1
                .neighbors(u)
                .iter()
                .copied()
                .filter(|&v| truth.get(v as usize).is_some_and(|tv| g2.has_edge(tu, tv)))
                .collect(),
        })
        .collect();
    Graph::from_sorted_lists(lists)
}
