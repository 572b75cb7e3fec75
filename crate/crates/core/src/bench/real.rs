//! Matching two noisy, partially overlapping copies of a given graph.

use crate::bench::accuracy::accuracy;
use crate::error::{Error, Result};
use crate::graph::{intersection_graph, Graph, Vertex, VertexMapping};
use crate::matcher::{complete_randomly, iterate, Algorithm};
use crate::rng::{purpose_stream, Purpose};
use crate::synth::{correct_seed_count, edge_subsample, random_permutation, seed_mapping_on, vertex_subsample};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealParams {
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub complete_random: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealTrial {
    /// Fraction of common vertices matched to their true counterpart.
    pub accuracy: f64,
    /// One minus the fraction of common vertices isolated in the
    /// intersection graph.
    pub ceiling: f64,
    /// Vertices present in both copies.
    pub common: usize,
    pub matched_count: usize,
    pub substream: u64,
}

/// A correlated pair built from `g0`.
#[derive(Clone, Debug)]
pub struct RealInstance {
    pub g1: Graph,
    pub g2: Graph,
    /// Alignment of the common vertices; undefined elsewhere.
    pub truth: VertexMapping,
    /// Seeds over the common vertices.
    pub seeds: VertexMapping,
    /// First-copy indices of the common vertices.
    pub common: Vec<usize>,
}

/// Each copy keeps every vertex with probability `alpha` and every surviving
/// edge with probability `s`; the second copy is then relabeled at random.
/// Seeds map the common vertices onto their images with exactly
/// `round(beta * m)` correct pairs among the `m` common vertices.
pub fn real_instance(g0: &Graph, s: f64, alpha: f64, beta: f64, trial_id: u64) -> Result<RealInstance> {
    let stream = |p| purpose_stream(trial_id, p);
    let (h1, kept1) = vertex_subsample(g0, alpha, &mut stream(Purpose::VertexFirst))?;
    let (h2, kept2) = vertex_subsample(g0, alpha, &mut stream(Purpose::VertexSecond))?;
    let g1 = edge_subsample(&h1, s, &mut stream(Purpose::SubsampleFirst))?;
    let h2 = edge_subsample(&h2, s, &mut stream(Purpose::SubsampleSecond))?;
    let perm = random_permutation(h2.vertex_count(), &mut stream(Purpose::Permutation));
    let g2 = h2.relabel(&perm)?;

    let mut pos2 = vec![Vertex::MAX; g0.vertex_count()];
    for (i, &x) in kept2.iter().enumerate() {
        pos2[x] = i as Vertex;
    }
    let mut image = vec![None; g1.vertex_count()];
    let mut common = Vec::new();
    for (i, &x) in kept1.iter().enumerate() {
        if pos2[x] != Vertex::MAX {
            image[i] = perm.get(pos2[x] as usize);
            common.push(i);
        }
    }
    let m = common.len();
    if m < 2 {
        return Err(Error::domain(format!("only {m} common vertices")));
    }
    let truth = VertexMapping::from_images(g2.vertex_count(), image)?;
    let k = correct_seed_count(m, beta)?;
    let (seeds, _) = seed_mapping_on(&truth, &common, k, &mut stream(Purpose::Seeds));
    Ok(RealInstance {
        g1,
        g2,
        truth,
        seeds,
        common,
    })
}

/// `1 - (isolated common vertices of G1 ∧ G2) / m`.
pub fn accuracy_ceiling(inst: &RealInstance) -> f64 {
    let both = intersection_graph(&inst.g1, &inst.g2, &inst.truth);
    let isolated = inst.common.iter().filter(|&&u| both.degree(u) == 0).count();
    1.0 - isolated as f64 / inst.common.len() as f64
}

pub fn real_protocol(g0: &Graph, params: &RealParams, trial_id: u64) -> Result<RealTrial> {
    if !(params.s > 0.0 && params.s <= 1.0) || !(params.alpha > 0.0 && params.alpha <= 1.0) {
        return Err(Error::domain("s and alpha must lie in (0, 1]"));
    }
    let inst = real_instance(g0, params.s, params.alpha, params.beta, trial_id)?;
    let mut result = iterate(&inst.g1, &inst.g2, &inst.seeds, params.algorithm, params.iterations)?;
    if params.complete_random {
        result = complete_randomly(&result, &mut purpose_stream(trial_id, Purpose::Algorithm));
    }
    Ok(RealTrial {
        accuracy: accuracy(&result, &inst.truth, Some(&inst.common))?,
        ceiling: accuracy_ceiling(&inst),
        common: inst.common.len(),
        matched_count: result.matched_count,
        substream: trial_id,
    })
}
