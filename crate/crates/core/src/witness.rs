//! j-hop witness counting.
//!
//! A seed `(w, seeds(w))` witnesses the candidate pair `(u, v)` when
//! `d_G1(u, w) = j` and `d_G2(v, seeds(w)) = j`. Two routes produce the full
//! count matrix:
//!
//! * [`count_witnesses_product`] walks rows of the j-hop adjacency of `G1`
//!   against seed-permuted rows of the j-hop adjacency of `G2`. Sparse rows
//!   accumulate into a dense scratch row; when the j-hop sets are a large
//!   fraction of the graph the rows are intersected as bitsets instead.
//! * [`count_witnesses_explore`] iterates over seeds and adds the outer
//!   product of their two j-hop frontiers.
//!
//! Both are row-partitioned: every output row is produced by exactly one
//! worker, so the result does not depend on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{exact_khop_sets, Graph, HopSets, Vertex, VertexMapping};

pub const MAX_HOPS: usize = 4;

#[derive(Clone, Debug)]
enum Row {
    /// `(column, count)` with strictly increasing columns and positive counts.
    Sparse(Vec<(Vertex, u32)>),
    Dense(Vec<u32>),
}

impl Row {
    fn from_dense(acc: &[u32]) -> Row {
        let nnz = acc.iter().filter(|&&c| c > 0).count();
        if nnz * 2 > acc.len() {
            Row::Dense(acc.to_vec())
        } else {
            Row::Sparse(
                acc.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(v, &c)| (v as Vertex, c))
                    .collect(),
            )
        }
    }

    /// Builds from a scratch accumulator whose nonzero positions are listed in
    /// `touched`, and zeroes those positions.
    fn drain_scratch(acc: &mut [u32], touched: &mut Vec<Vertex>) -> Row {
        let row = if touched.len() * 2 > acc.len() {
            let row = Row::Dense(acc.to_vec());
            for &v in touched.iter() {
                acc[v as usize] = 0;
            }
            row
        } else {
            touched.sort_unstable();
            Row::Sparse(
                touched
                    .iter()
                    .map(|&v| (v, std::mem::take(&mut acc[v as usize])))
                    .collect(),
            )
        };
        touched.clear();
        row
    }
}

/// Witness counts `W(u, v)` for `u` in `G1` and `v` in `G2`, stored row by row
/// as sparse `(column, count)` lists or dense count vectors.
#[derive(Clone, Debug)]
pub struct WitnessMatrix {
    n1: usize,
    n2: usize,
    rows: Vec<Row>,
}

impl WitnessMatrix {
    pub fn zeros(n1: usize, n2: usize) -> Self {
        WitnessMatrix {
            n1,
            n2,
            rows: vec![Row::Sparse(Vec::new()); n1],
        }
    }

    /// Builds from dense rows. All rows must have the same length.
    pub fn from_dense_rows(rows: &[Vec<u32>]) -> Self {
        let n2 = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n2), "ragged witness rows");
        WitnessMatrix {
            n1: rows.len(),
            n2,
            rows: rows.iter().map(|r| Row::from_dense(r)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.n1
    }

    pub fn cols(&self) -> usize {
        self.n2
    }

    pub fn get(&self, u: usize, v: usize) -> u32 {
        match &self.rows[u] {
            Row::Dense(d) => d[v],
            Row::Sparse(s) => s
                .binary_search_by_key(&(v as Vertex), |&(c, _)| c)
                .map_or(0, |i| s[i].1),
        }
    }

    /// Positive entries `(v, W(u, v))` of row `u` in increasing `v`.
    pub fn row_entries(&self, u: usize) -> Box<dyn Iterator<Item = (usize, u32)> + '_> {
        match &self.rows[u] {
            Row::Dense(d) => Box::new(
                d.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(v, &c)| (v, c)),
            ),
            Row::Sparse(s) => Box::new(s.iter().map(|&(v, c)| (v as usize, c))),
        }
    }

    /// Calls `f(v, count)` for every positive entry of row `u`.
    #[inline]
    pub(crate) fn for_each_in_row(&self, u: usize, mut f: impl FnMut(usize, u32)) {
        match &self.rows[u] {
            Row::Dense(d) => {
                for (v, &c) in d.iter().enumerate() {
                    if c > 0 {
                        f(v, c);
                    }
                }
            }
            Row::Sparse(s) => {
                for &(v, c) in s {
                    f(v as usize, c);
                }
            }
        }
    }

    pub fn nonzero_count(&self) -> usize {
        (0..self.n1).map(|u| self.row_entries(u).count()).sum()
    }

    pub fn total(&self) -> u64 {
        (0..self.n1)
            .map(|u| self.row_entries(u).map(|(_, c)| c as u64).sum::<u64>())
            .sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        (0..self.n1)
            .map(|u| {
                let mut row = vec![0; self.n2];
                self.for_each_in_row(u, |v, c| row[v] = c);
                row
            })
            .collect()
    }
}

impl PartialEq for WitnessMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n1 == other.n1
            && self.n2 == other.n2
            && (0..self.n1).all(|u| self.row_entries(u).eq(other.row_entries(u)))
    }
}

impl Eq for WitnessMatrix {}

/// Which kernel the product route uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductKernel {
    /// Pick by estimated work.
    Auto,
    /// Scatter-add permuted rows into a scratch accumulator.
    Scatter,
    /// Bitset intersection with popcount.
    Bitset,
}

fn check_inputs(g1: &Graph, g2: &Graph, seeds: &VertexMapping, j: usize) -> Result<()> {
    if j == 0 || j > MAX_HOPS {
        return Err(Error::domain(format!("hop count {j} outside 1..={MAX_HOPS}")));
    }
    if seeds.domain_size() != g1.vertex_count() {
        return Err(Error::InvalidMapping(format!(
            "seed mapping has domain {} but G1 has {} vertices",
            seeds.domain_size(),
            g1.vertex_count()
        )));
    }
    if seeds.pairs().any(|(_, v)| v >= g2.vertex_count()) {
        return Err(Error::InvalidMapping("seed image outside G2".into()));
    }
    Ok(())
}

/// Full witness matrix through the j-hop adjacency product.
pub fn count_witnesses_product(
    g1: &Graph,
    g2: &Graph,
    seeds: &VertexMapping,
    j: usize,
) -> Result<WitnessMatrix> {
    count_witnesses_product_with(g1, g2, seeds, j, ProductKernel::Auto)
}

pub fn count_witnesses_product_with(
    g1: &Graph,
    g2: &Graph,
    seeds: &VertexMapping,
    j: usize,
    kernel: ProductKernel,
) -> Result<WitnessMatrix> {
    check_inputs(g1, g2, seeds, j)?;
    let a = exact_khop_sets(g1, j)?;
    let b = exact_khop_sets(g2, j)?;
    let kernel = match kernel {
        ProductKernel::Auto => choose_kernel(&a, &b, seeds, g1.vertex_count(), g2.vertex_count()),
        k => k,
    };
    Ok(match kernel {
        ProductKernel::Bitset => product_bitset(&a, &b, seeds, g2.vertex_count()),
        _ => product_scatter(&a, &b, seeds, g2.vertex_count()),
    })
}

fn choose_kernel(a: &HopSets, b: &HopSets, seeds: &VertexMapping, n1: usize, n2: usize) -> ProductKernel {
    // Scatter work equals the total witness mass; bitset work is one
    // word-and-popcount per (u, v, 64 seeds).
    let scatter: f64 = seeds
        .pairs()
        .map(|(w, w2)| a.get(w).len() as f64 * b.get(w2).len() as f64)
        .sum();
    let bitset = n1 as f64 * n2 as f64 * n1.div_ceil(64) as f64;
    if n1 >= 256 && scatter > 0.4 * bitset {
        ProductKernel::Bitset
    } else {
        ProductKernel::Scatter
    }
}

const ROW_CHUNK: usize = 64;

fn product_scatter(a: &HopSets, b: &HopSets, seeds: &VertexMapping, n2: usize) -> WitnessMatrix {
    let n1 = a.vertex_count();
    let seed_image = seeds.raw();
    let rows: Vec<Row> = (0..n1.div_ceil(ROW_CHUNK))
        .into_par_iter()
        .map_init(
            || (vec![0u32; n2], Vec::<Vertex>::new()),
            |(acc, touched), c| {
                let lo = c * ROW_CHUNK;
                let hi = (lo + ROW_CHUNK).min(n1);
                (lo..hi)
                    .map(|u| {
                        for &w in a.get(u) {
                            let w2 = seed_image[w as usize];
                            if w2 == Vertex::MAX {
                                continue;
                            }
                            for &v in b.get(w2 as usize) {
                                let slot = &mut acc[v as usize];
                                if *slot == 0 {
                                    touched.push(v);
                                }
                                *slot += 1;
                            }
                        }
                        Row::drain_scratch(acc, touched)
                    })
                    .collect::<Vec<_>>()
            },
        )
        .flatten()
        .collect();
    WitnessMatrix { n1, n2, rows }
}

struct BitRows {
    words: usize,
    data: Vec<u64>,
}

impl BitRows {
    fn new(rows: usize, bits: usize) -> Self {
        let words = bits.div_ceil(64);
        BitRows {
            words,
            data: vec![0; rows * words],
        }
    }

    #[inline]
    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    #[inline]
    fn set(&mut self, r: usize, bit: usize) {
        self.data[r * self.words + bit / 64] |= 1u64 << (bit % 64);
    }
}

const TILE_U: usize = 16;
const TILE_V: usize = 64;

fn product_bitset(a: &HopSets, b: &HopSets, seeds: &VertexMapping, n2: usize) -> WitnessMatrix {
    let n1 = a.vertex_count();
    // Rows of A_j over G1 vertices w, restricted to seeded w.
    let mut left = BitRows::new(n1, n1);
    for u in 0..n1 {
        for &w in a.get(u) {
            if seeds.get(w as usize).is_some() {
                left.set(u, w as usize);
            }
        }
    }
    // Column v of Pi * B_j as a bitset over G1 vertices: {w : d_G2(v, seeds(w)) = j}.
    let inverse = seeds.inverse();
    let mut right = BitRows::new(n2, n1);
    for v in 0..n2 {
        for &x in b.get(v) {
            if let Some(w) = inverse.get(x as usize) {
                right.set(v, w);
            }
        }
    }
    let rows: Vec<Row> = (0..n1.div_ceil(TILE_U))
        .into_par_iter()
        .map(|c| {
            let lo = c * TILE_U;
            let hi = (lo + TILE_U).min(n1);
            let mut block = vec![0u32; (hi - lo) * n2];
            popcount_tile(&left, &right, lo, hi, n2, &mut block);
            block.chunks_exact(n2).map(Row::from_dense).collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    WitnessMatrix { n1, n2, rows }
}

fn popcount_tile(left: &BitRows, right: &BitRows, lo: usize, hi: usize, n2: usize, out: &mut [u32]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("popcnt") {
            // SAFETY: the required CPU features were detected at runtime.
            unsafe { popcount_tile_avx2(left, right, lo, hi, n2, out) };
            return;
        }
    }
    popcount_tile_generic(left, right, lo, hi, n2, out);
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,popcnt")]
unsafe fn popcount_tile_avx2(left: &BitRows, right: &BitRows, lo: usize, hi: usize, n2: usize, out: &mut [u32]) {
    popcount_tile_generic(left, right, lo, hi, n2, out);
}

#[inline(always)]
fn popcount_tile_generic(left: &BitRows, right: &BitRows, lo: usize, hi: usize, n2: usize, out: &mut [u32]) {
    for v0 in (0..n2).step_by(TILE_V) {
        let v1 = (v0 + TILE_V).min(n2);
        for u in lo..hi {
            let lrow = left.row(u);
            let orow = &mut out[(u - lo) * n2..(u - lo + 1) * n2];
            for v in v0..v1 {
                let rrow = right.row(v);
                let mut count = 0u32;
                for (x, y) in lrow.iter().zip(rrow) {
                    count += (x & y).count_ones();
                }
                orow[v] = count;
            }
        }
    }
}

/// Dense accumulator budget per worker block, in entries.
const EXPLORE_BLOCK_ENTRIES: usize = 1 << 24;

/// Full witness matrix by per-seed neighborhood exploration.
pub fn count_witnesses_explore(
    g1: &Graph,
    g2: &Graph,
    seeds: &VertexMapping,
    j: usize,
) -> Result<WitnessMatrix> {
    check_inputs(g1, g2, seeds, j)?;
    let a = exact_khop_sets(g1, j)?;
    let b = exact_khop_sets(g2, j)?;
    let n1 = g1.vertex_count();
    let n2 = g2.vertex_count();
    if n1 == 0 || n2 == 0 {
        return Ok(WitnessMatrix::zeros(n1, n2));
    }
    let seed_pairs: Vec<(usize, usize)> = seeds.pairs().collect();
    let block_rows = (EXPLORE_BLOCK_ENTRIES / n2)
        .min(n1.div_ceil(rayon::current_num_threads()))
        .max(1);

    let rows: Vec<Row> = (0..n1.div_ceil(block_rows))
        .into_par_iter()
        .map(|c| {
            let lo = c * block_rows;
            let hi = (lo + block_rows).min(n1);
            let mut acc = vec![0u32; (hi - lo) * n2];
            for &(w, w2) in &seed_pairs {
                let frontier = a.get(w);
                // u in khop(w) restricted to this block; frontier is sorted.
                let start = frontier.partition_point(|&u| (u as usize) < lo);
                let end = frontier.partition_point(|&u| (u as usize) < hi);
                if start == end {
                    continue;
                }
                let targets = b.get(w2);
                for &u in &frontier[start..end] {
                    let row = &mut acc[(u as usize - lo) * n2..(u as usize - lo + 1) * n2];
                    for &v in targets {
                        row[v as usize] += 1;
                    }
                }
            }
            acc.chunks_exact(n2).map(Row::from_dense).collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    Ok(WitnessMatrix { n1, n2, rows })
}

/// Number of seeds `w` in `left_set` whose image lies in `right_set`. Both sets
/// must be sorted; this is `W(u, v)` when the sets are the j-hop sets of `u`
/// and `v`.
pub fn witness_count_between(left_set: &[Vertex], right_set: &[Vertex], seeds: &VertexMapping) -> u32 {
    left_set
        .iter()
        .filter_map(|&w| seeds.get(w as usize))
        .filter(|&x| right_set.binary_search(&(x as Vertex)).is_ok())
        .count() as u32
}
