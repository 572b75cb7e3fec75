//! From witness counts to vertex correspondences.

use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::hash::{BuildHasherDefault, Hasher};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, VertexMapping};
use crate::witness::{count_witnesses_product, WitnessMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchResult {
    pub mapping: VertexMapping,
    pub matched_count: usize,
    /// Set by [`parallel_argmax`] when two rows chose the same column.
    pub failure: bool,
}

impl MatchResult {
    fn new(mapping: VertexMapping, failure: bool) -> Self {
        MatchResult {
            matched_count: mapping.defined_count(),
            mapping,
            failure,
        }
    }
}

/// Matching algorithms that consume a seed mapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    /// Witness counting at hop distance `j` followed by greedy matching.
    JHop(usize),
    /// Percolation matching with mark threshold `r`.
    NoisySeeds(u32),
    /// Witness counting at hop distance `j` followed by per-row argmax.
    ParallelArgmax(usize),
}

impl Algorithm {
    pub const ONE_HOP: Algorithm = Algorithm::JHop(1);
    pub const TWO_HOP: Algorithm = Algorithm::JHop(2);

    /// Parses `one_hop`, `two_hop`, `j_hop:<j>`, `noisy_seeds:<r>`,
    /// `parallel_argmax` or `parallel_argmax:<j>`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, arg) = match text.split_once(':') {
            Some((name, arg)) => (name.trim(), Some(arg.trim())),
            None => (text, None),
        };
        let number = |what: &str| -> Result<usize> {
            arg.ok_or_else(|| Error::Usage(format!("{name} needs a {what}, e.g. {name}:2")))?
                .parse()
                .map_err(|_| Error::Usage(format!("bad {what} in algorithm `{text}`")))
        };
        let alg = match name {
            "one_hop" if arg.is_none() => Algorithm::ONE_HOP,
            "two_hop" if arg.is_none() => Algorithm::TWO_HOP,
            "j_hop" => Algorithm::JHop(number("hop count")?),
            "noisy_seeds" => Algorithm::NoisySeeds(number("threshold")? as u32),
            "parallel_argmax" if arg.is_none() => Algorithm::ParallelArgmax(2),
            "parallel_argmax" => Algorithm::ParallelArgmax(number("hop count")?),
            _ => return Err(Error::Usage(format!("unknown algorithm `{text}`"))),
        };
        alg.validate()?;
        Ok(alg)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Algorithm::JHop(j) | Algorithm::ParallelArgmax(j)
                if j == 0 || j > crate::witness::MAX_HOPS =>
            {
                Err(Error::domain(format!("hop count {j} outside 1..=4")))
            }
            Algorithm::NoisySeeds(r) if r < 2 => {
                Err(Error::domain(format!("percolation threshold {r} must be at least 2")))
            }
            _ => Ok(()),
        }
    }

    pub fn run(&self, g1: &Graph, g2: &Graph, seeds: &VertexMapping) -> Result<MatchResult> {
        self.validate()?;
        match *self {
            Algorithm::JHop(j) => Ok(gmwm(&count_witnesses_product(g1, g2, seeds, j)?)),
            Algorithm::ParallelArgmax(j) => {
                Ok(parallel_argmax(&count_witnesses_product(g1, g2, seeds, j)?))
            }
            Algorithm::NoisySeeds(r) => noisy_seeds(g1, g2, seeds, r),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Algorithm::JHop(1) => f.write_str("one_hop"),
            Algorithm::JHop(2) => f.write_str("two_hop"),
            Algorithm::JHop(j) => write!(f, "j_hop:{j}"),
            Algorithm::NoisySeeds(r) => write!(f, "noisy_seeds:{r}"),
            Algorithm::ParallelArgmax(2) => f.write_str("parallel_argmax"),
            Algorithm::ParallelArgmax(j) => write!(f, "parallel_argmax:{j}"),
        }
    }
}

/// Order key: larger means earlier in the greedy scan (weight descending,
/// then column ascending).
#[inline]
fn row_key(count: u32, v: usize) -> u64 {
    ((count as u64) << 32) | (u32::MAX - v as u32) as u64
}

#[inline]
fn key_column(key: u64) -> usize {
    (u32::MAX - (key & 0xffff_ffff) as u32) as usize
}

/// Remaining candidates of one row, best last. Refills fetch the next batch
/// of entries strictly after `last` in scan order, doubling the batch size.
struct RowCursor {
    buffer: Vec<u64>,
    last: u64,
    batch: usize,
    exhausted: bool,
}

const INITIAL_BATCH: usize = 16;

impl RowCursor {
    fn refill(&mut self, w: &WitnessMatrix, u: usize, col_used: &[bool], scratch: &mut Vec<u64>) {
        scratch.clear();
        let last = self.last;
        w.for_each_in_row(u, |v, c| {
            let key = row_key(c, v);
            if key < last && !col_used[v] {
                scratch.push(key);
            }
        });
        if scratch.len() > self.batch {
            let cut = scratch.len() - self.batch;
            scratch.select_nth_unstable(cut);
            scratch.drain(..cut);
        } else {
            self.exhausted = true;
        }
        scratch.sort_unstable();
        self.buffer.clear();
        self.buffer.extend_from_slice(scratch);
        self.batch = self.batch.saturating_mul(2);
    }

    /// Next candidate whose column is still free.
    fn head(&mut self, w: &WitnessMatrix, u: usize, col_used: &[bool], scratch: &mut Vec<u64>) -> Option<u64> {
        loop {
            while let Some(&key) = self.buffer.last() {
                if col_used[key_column(key)] {
                    self.last = key;
                    self.buffer.pop();
                } else {
                    return Some(key);
                }
            }
            if self.exhausted {
                return None;
            }
            self.refill(w, u, col_used, scratch);
        }
    }
}

/// Greedy maximum-weight matching over the positive entries of `w`.
///
/// Equivalent to sorting all positive entries by (weight descending, row
/// ascending, column ascending) and accepting each pair whose endpoints are
/// both still free. Rows are visited lazily through a heap of per-row heads,
/// so only the prefix of each row that is actually reached gets sorted.
/// Vertices without an accepted pair stay unmatched.
pub fn gmwm(w: &WitnessMatrix) -> MatchResult {
    let (n1, n2) = (w.rows(), w.cols());
    let mut col_used = vec![false; n2];
    let mut image = vec![Vertex::MAX; n1];
    let mut scratch = Vec::new();
    let mut cursors: Vec<RowCursor> = (0..n1)
        .map(|_| RowCursor {
            buffer: Vec::new(),
            last: u64::MAX,
            batch: INITIAL_BATCH,
            exhausted: false,
        })
        .collect();
    // Heap entries: (weight, reversed row, reversed column) so that the max is
    // the next pair in scan order.
    let mut heap = BinaryHeap::with_capacity(n1);
    for (u, cursor) in cursors.iter_mut().enumerate() {
        if let Some(key) = cursor.head(w, u, &col_used, &mut scratch) {
            heap.push((key >> 32, std::cmp::Reverse(u), key));
        }
    }
    while let Some((_, std::cmp::Reverse(u), key)) = heap.pop() {
        let v = key_column(key);
        if col_used[v] {
            if let Some(next) = cursors[u].head(w, u, &col_used, &mut scratch) {
                heap.push((next >> 32, std::cmp::Reverse(u), next));
            }
            continue;
        }
        col_used[v] = true;
        image[u] = v as Vertex;
        cursors[u].buffer = Vec::new();
    }
    MatchResult::new(VertexMapping::from_raw_unchecked(image, n2), false)
}

/// Per-row argmax (ties to the smallest column). Rows that collide on a column
/// are left unmatched and the failure flag is raised.
pub fn parallel_argmax(w: &WitnessMatrix) -> MatchResult {
    let n2 = w.cols();
    let choice: Vec<Option<usize>> = (0..w.rows())
        .into_par_iter()
        .map(|u| {
            let mut best: Option<(u32, usize)> = None;
            w.for_each_in_row(u, |v, c| {
                if best.is_none_or(|(bc, _)| c > bc) {
                    best = Some((c, v));
                }
            });
            best.map(|(_, v)| v)
        })
        .collect();
    let mut hits = vec![0u32; n2];
    for &v in choice.iter().flatten() {
        hits[v] += 1;
    }
    let failure = hits.iter().any(|&h| h > 1);
    let image = choice
        .iter()
        .map(|c| match *c {
            Some(v) if hits[v] == 1 => v as Vertex,
            _ => Vertex::MAX,
        })
        .collect();
    MatchResult::new(VertexMapping::from_raw_unchecked(image, n2), failure)
}

#[derive(Default)]
struct PairHasher(u64);

impl Hasher for PairHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(8) ^ b as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        }
    }

    fn write_u64(&mut self, x: u64) {
        self.0 = (x ^ (x >> 29)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        self.0 ^= self.0 >> 32;
    }
}

type MarkMap = HashMap<u64, u32, BuildHasherDefault<PairHasher>>;

/// Percolation matching.
///
/// All seed pairs are queued first. Spreading a pair `(w, w')` adds one mark to
/// every candidate in `N1(w) x N2(w')`; a candidate whose endpoints are both
/// unused and whose marks reach `r` is matched and queued to spread in turn.
/// Candidates crossing the threshold during one spread are matched in
/// lexicographic order. Seeds spread marks but are not part of the output, and
/// a matched pair equal to a seed pair does not spread a second time.
pub fn noisy_seeds(g1: &Graph, g2: &Graph, seeds: &VertexMapping, r: u32) -> Result<MatchResult> {
    if r < 2 {
        return Err(Error::domain(format!("percolation threshold {r} must be at least 2")));
    }
    let (n1, n2) = (g1.vertex_count(), g2.vertex_count());
    if seeds.domain_size() != n1 || seeds.pairs().any(|(_, v)| v >= n2) {
        return Err(Error::InvalidMapping("seed mapping does not fit the graphs".into()));
    }
    let mut marks = MarkMap::default();
    let mut used1 = vec![false; n1];
    let mut used2 = vec![false; n2];
    let mut image = vec![Vertex::MAX; n1];
    let mut queue: VecDeque<(usize, usize)> = seeds.pairs().collect();
    let mut crossed: Vec<(usize, usize)> = Vec::new();

    while let Some((w, w2)) = queue.pop_front() {
        crossed.clear();
        for &u in g1.neighbors(w) {
            if used1[u as usize] {
                // Marks on pairs with a used endpoint can never lead to a match.
                continue;
            }
            for &v in g2.neighbors(w2) {
                if used2[v as usize] {
                    continue;
                }
                let m = marks.entry(u as u64 * n2 as u64 + v as u64).or_insert(0);
                *m += 1;
                if *m == r {
                    crossed.push((u as usize, v as usize));
                }
            }
        }
        crossed.sort_unstable();
        for &(u, v) in &crossed {
            if used1[u] || used2[v] {
                continue;
            }
            used1[u] = true;
            used2[v] = true;
            image[u] = v as Vertex;
            if seeds.get(u) != Some(v) {
                queue.push_back((u, v));
            }
        }
    }
    Ok(MatchResult::new(VertexMapping::from_raw_unchecked(image, n2), false))
}

/// Runs `algorithm` `iterations + 1` times, feeding each output mapping back
/// as the next round's seeds.
pub fn iterate(
    g1: &Graph,
    g2: &Graph,
    seeds: &VertexMapping,
    algorithm: Algorithm,
    iterations: usize,
) -> Result<MatchResult> {
    Ok(iterate_rounds(g1, g2, seeds, algorithm, iterations)?
        .pop()
        .expect("at least one round"))
}

/// Like [`iterate`], returning the output of every round.
pub fn iterate_rounds(
    g1: &Graph,
    g2: &Graph,
    seeds: &VertexMapping,
    algorithm: Algorithm,
    iterations: usize,
) -> Result<Vec<MatchResult>> {
    let mut rounds = vec![algorithm.run(g1, g2, seeds)?];
    for _ in 0..iterations {
        let next = algorithm.run(g1, g2, &rounds[rounds.len() - 1].mapping)?;
        rounds.push(next);
    }
    Ok(rounds)
}

/// Pairs the unmatched rows with the unused columns uniformly at random.
pub fn complete_randomly<R: Rng + ?Sized>(result: &MatchResult, rng: &mut R) -> MatchResult {
    let mapping = &result.mapping;
    let mut used = vec![false; mapping.codomain_size()];
    for (_, v) in mapping.pairs() {
        used[v] = true;
    }
    let mut free_cols: Vec<usize> = (0..used.len()).filter(|&v| !used[v]).collect();
    free_cols.shuffle(rng);
    let mut free = free_cols.into_iter();
    let images = (0..mapping.domain_size()).map(|u| mapping.get(u).or_else(|| free.next()));
    let mapping = VertexMapping::from_images(mapping.codomain_size(), images)
        .expect("completion keeps the mapping injective");
    MatchResult::new(mapping, result.failure)
}
