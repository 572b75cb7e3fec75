//! Random instances of the correlated Erdős–Rényi model with partially-correct
//! seed mappings.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, VertexMapping};
use crate::rng::{purpose_stream, Purpose};

/// Parameters `(n, p, s, beta)` of one synthetic instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    /// Parent edge probability.
    pub p: f64,
    /// Edge-sampling probability of each child graph.
    pub s: f64,
    /// Fraction of seeds that agree with the hidden permutation.
    pub beta: f64,
}

impl ModelParams {
    pub fn new(n: usize, p: f64, s: f64, beta: f64) -> Result<Self> {
        let params = ModelParams { n, p, s, beta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::domain(format!("p = {} outside [0, 1]", self.p)));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::domain(format!("s = {} outside (0, 1]", self.s)));
        }
        correct_seed_count(self.n, self.beta).map(|_| ())
    }

    pub fn correct_seeds(&self) -> usize {
        (self.beta * self.n as f64).round() as usize
    }
}

/// `round(beta * m)`, rejecting `beta` outside `[0, 1]` and the impossible
/// count `m - 1`.
pub fn correct_seed_count(m: usize, beta: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::domain(format!("beta = {beta} outside [0, 1]")));
    }
    let k = (beta * m as f64).round() as usize;
    if m >= 1 && k == m - 1 {
        return Err(Error::domain(format!(
            "round(beta * {m}) = {k}: a permutation cannot have exactly m - 1 fixed points"
        )));
    }
    Ok(k)
}

#[derive(Clone, Debug)]
pub struct CorrelatedInstance {
    pub g0: Graph,
    pub g1: Graph,
    /// Second child, relabeled by `truth`.
    pub g2: Graph,
    /// Hidden alignment from `g1`'s vertices to `g2`'s.
    pub truth: VertexMapping,
    pub seeds: VertexMapping,
}

/// G(n, p) by geometric skipping over the lexicographic sequence of vertex
/// pairs, so the cost is proportional to the number of edges.
pub fn sample_er<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    if n < 2 || p <= 0.0 {
        return Graph::empty(n);
    }
    if p >= 1.0 {
        return Graph::build(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
            .expect("complete graph is in range");
    }
    let log_q = (-p).ln_1p();
    let mut pairs: Vec<(Vertex, Vertex)> = Vec::new();
    // Pairs (w, v) with w < v, enumerated row by row in v.
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.gen();
        let skip = ((1.0 - r).ln() / log_q).floor().min(1e18);
        w += 1 + skip as i64;
        while v < n && w >= v as i64 {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            pairs.push((v as Vertex, w as Vertex));
            pairs.push((w as Vertex, v as Vertex));
        }
    }
    Graph::from_directed_pairs(n, pairs)
}

/// Keeps each edge independently with probability `s`.
pub fn edge_subsample<R: Rng + ?Sized>(g: &Graph, s: f64, rng: &mut R) -> Result<Graph> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::domain(format!("s = {s} outside (0, 1]")));
    }
    if s >= 1.0 {
        return Ok(g.clone());
    }
    let mut pairs = Vec::new();
    for (u, v) in g.edges() {
        if rng.gen::<f64>() < s {
            pairs.push((u as Vertex, v as Vertex));
            pairs.push((v as Vertex, u as Vertex));
        }
    }
    Ok(Graph::from_directed_pairs(g.vertex_count(), pairs))
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> VertexMapping {
    let mut images: Vec<Vertex> = (0..n as Vertex).collect();
    images.shuffle(rng);
    VertexMapping::from_raw_unchecked(images, n)
}

/// Samples a seed mapping with exactly `round(beta * n)` agreements with
/// `truth`, uniform over all such permutations. `truth` must be total.
pub fn make_seed_mapping<R: Rng + ?Sized>(
    truth: &VertexMapping,
    beta: f64,
    rng: &mut R,
) -> Result<VertexMapping> {
    if !truth.is_total() {
        return Err(Error::InvalidMapping("truth mapping must be total".into()));
    }
    let domain: Vec<usize> = (0..truth.domain_size()).collect();
    let k = correct_seed_count(domain.len(), beta)?;
    Ok(seed_mapping_on(truth, &domain, k, rng).0)
}

/// Seed mapping over `domain` (vertices where `truth` is defined) with exactly
/// `k` correct entries. Vertices outside `domain` stay unmapped. Also returns
/// the number of rejection-sampling attempts spent on the derangement.
pub fn seed_mapping_on<R: Rng + ?Sized>(
    truth: &VertexMapping,
    domain: &[usize],
    k: usize,
    rng: &mut R,
) -> (VertexMapping, usize) {
    let m = domain.len();
    assert!(k <= m && (m == 0 || k != m - 1), "invalid correct-seed count {k} of {m}");
    let mut order = domain.to_vec();
    let (correct, rest) = order.partial_shuffle(rng, k);
    let mut image = vec![Vertex::MAX; truth.domain_size()];
    for &u in correct.iter() {
        image[u] = truth.get(u).expect("truth defined on seed domain") as Vertex;
    }
    let (sigma, attempts) = derangement(rest.len(), rng);
    for (i, &u) in rest.iter().enumerate() {
        let donor = rest[sigma[i]];
        image[u] = truth.get(donor).expect("truth defined on seed domain") as Vertex;
    }
    (
        VertexMapping::from_raw_unchecked(image, truth.codomain_size()),
        attempts,
    )
}

/// Uniform fixed-point-free permutation of `0..m` by rejection. Returns the
/// permutation and the number of shuffles drawn. `m == 1` has no derangement.
pub fn derangement<R: Rng + ?Sized>(m: usize, rng: &mut R) -> (Vec<usize>, usize) {
    assert!(m != 1, "no derangement of a single element");
    let mut perm: Vec<usize> = (0..m).collect();
    let mut attempts = 0;
    loop {
        attempts += 1;
        perm.shuffle(rng);
        if perm.iter().enumerate().all(|(i, &x)| i != x) {
            return (perm, attempts);
        }
    }
}

/// Draws the parent, both children, the hidden permutation and the seeds. Each
/// component uses its own substream of `trial_id`.
pub fn make_correlated_pair(params: &ModelParams, trial_id: u64) -> Result<CorrelatedInstance> {
    params.validate()?;
    let n = params.n;
    let g0 = sample_er(n, params.p, &mut purpose_stream(trial_id, Purpose::Parent));
    let g1 = edge_subsample(&g0, params.s, &mut purpose_stream(trial_id, Purpose::SubsampleFirst))?;
    let g2_unlabeled =
        edge_subsample(&g0, params.s, &mut purpose_stream(trial_id, Purpose::SubsampleSecond))?;
    let truth = random_permutation(n, &mut purpose_stream(trial_id, Purpose::Permutation));
    let g2 = g2_unlabeled.relabel(&truth)?;
    let seeds = make_seed_mapping(&truth, params.beta, &mut purpose_stream(trial_id, Purpose::Seeds))?;
    Ok(CorrelatedInstance {
        g0,
        g1,
        g2,
        truth,
        seeds,
    })
}

/// Induced subgraph on a Bernoulli(`alpha`) vertex subset, reindexed
/// contiguously. The second value lists the original id of each kept vertex.
pub fn vertex_subsample<R: Rng + ?Sized>(
    g: &Graph,
    alpha: f64,
    rng: &mut R,
) -> Result<(Graph, Vec<usize>)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} outside (0, 1]")));
    }
    let keep: Vec<usize> = if alpha >= 1.0 {
        (0..g.vertex_count()).collect()
    } else {
        (0..g.vertex_count()).filter(|_| rng.gen::<f64>() < alpha).collect()
    };
    Ok((g.induced_subgraph(&keep), keep))
}
