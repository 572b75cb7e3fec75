//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Set `SEEDMATCH_ACCEPTANCE=1,4b,11` to run a subset.

use std::collections::VecDeque;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng;
use seedmatch::bench::collapse::CollapseReport;
use seedmatch::bench::output::{read_csv, MEDIAN};
use seedmatch::bench::sweep::trial_substream;
use seedmatch::bench::{accuracy, collapse_analysis, run_sweep, Curve, ExperimentConfig, PSpec, Rescale};
use seedmatch::graph::exact_khop_sets;
use seedmatch::matcher::{gmwm, iterate_rounds, parallel_argmax};
use seedmatch::rng::{stream, substream_id};
use seedmatch::synth::{make_correlated_pair, ModelParams};
use seedmatch::theory::{self, empirical_event_check, Event, Prior};
use seedmatch::witness::{count_witnesses_explore, count_witnesses_product, WitnessMatrix};
use seedmatch::{Algorithm, Graph, VertexMapping};

const MASTER: u64 = 0x5eed_2024;
const NS: [usize; 3] = [2000, 4000, 8000];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let k = ((to - from) / step).round() as usize;
    (0..=k).map(|i| ((from + i as f64 * step) * 1e9).round() / 1e9).collect()
}

fn sweep_config(alg: Algorithm, gamma: f64, s: f64, beta: Vec<f64>, scale: Rescale) -> ExperimentConfig {
    ExperimentConfig {
        algorithm: alg,
        iterations: 0,
        n: NS.to_vec(),
        p: PSpec::Power(gamma),
        s,
        beta,
        beta_scale: Some(scale),
        trials: 10,
        seed: MASTER,
        complete_random: false,
        timing: false,
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.4}"))
}

fn describe(report: &CollapseReport, level: f64) -> (Option<f64>, String) {
    let l = report.level(level).expect("level computed");
    let crossings: Vec<String> = l
        .crossings
        .iter()
        .map(|(n, _, scaled)| format!("n={n}: {}", fmt_opt(*scaled)))
        .collect();
    (l.spread, format!("{} [{}]", report.rescale.name(), crossings.join(", ")))
}

fn collapse_check(curves: &[Curve], scale: Rescale, bound: f64) -> Outcome {
    let report = match collapse_analysis(curves, scale) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let (spread, text) = describe(&report, 0.5);
    let (spread95, _) = describe(&report, 0.95);
    let pass = spread.is_some_and(|s| s <= bound);
    Outcome::new(
        pass,
        format!(
            "spread at 0.5 = {} (bound {bound}), {text}; spread at 0.95 = {}",
            fmt_opt(spread),
            fmt_opt(spread95)
        ),
    )
}

fn sweep_collapse(alg: Algorithm, gamma: f64, s: f64, beta: Vec<f64>, scale: Rescale, bound: f64) -> Outcome {
    match run_sweep(&sweep_config(alg, gamma, s, beta, scale)) {
        Ok(sweep) => collapse_check(&sweep.curves(), scale, bound),
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

fn distances(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.vertex_count();
    (0..n)
        .map(|src| {
            let mut d = vec![u32::MAX; n];
            d[src] = 0;
            let mut q = VecDeque::from([src]);
            while let Some(x) = q.pop_front() {
                for &y in g.neighbors(x) {
                    if d[y as usize] == u32::MAX {
                        d[y as usize] = d[x] + 1;
                        q.push_back(y as usize);
                    }
                }
            }
            d
        })
        .collect()
}

fn brute_force(g1: &Graph, g2: &Graph, seeds: &VertexMapping, j: u32) -> Vec<Vec<u32>> {
    let (d1, d2) = (distances(g1), distances(g2));
    let pairs: Vec<(usize, usize)> = seeds.pairs().collect();
    (0..g1.vertex_count())
        .map(|u| {
            (0..g2.vertex_count())
                .map(|v| pairs.iter().filter(|&&(a, b)| d1[u][a] == j && d2[v][b] == j).count() as u32)
                .collect()
        })
        .collect()
}

/// Criteria 1 and 2 share their instances.
fn witness_oracles() -> (Outcome, Outcome) {
    let mut rng = stream(substream_id(MASTER, &[1]));
    let (mut equal, mut mass_ok, mut total) = (0, 0, 0);
    let mut first_bad = None;
    while total < 200 {
        let n = rng.gen_range(10..=200);
        let p = [0.02, 0.05, 0.1][rng.gen_range(0..3)];
        let s = [0.8, 1.0][rng.gen_range(0..2)];
        let beta = [0.0, 0.5, 1.0][rng.gen_range(0..3)];
        let j = rng.gen_range(1..=3usize);
        let params = ModelParams::new(n, p, s, beta).unwrap();
        let inst = make_correlated_pair(&params, rng.gen()).unwrap();
        let product = count_witnesses_product(&inst.g1, &inst.g2, &inst.seeds, j).unwrap();
        let explore = count_witnesses_explore(&inst.g1, &inst.g2, &inst.seeds, j).unwrap();
        let oracle = brute_force(&inst.g1, &inst.g2, &inst.seeds, j as u32);
        if product.to_dense() == oracle && explore.to_dense() == oracle {
            equal += 1;
        } else if first_bad.is_none() {
            first_bad = Some(format!("n={n} p={p} s={s} beta={beta} j={j}"));
        }
        let (a, b) = (exact_khop_sets(&inst.g1, j).unwrap(), exact_khop_sets(&inst.g2, j).unwrap());
        let mass: u64 = inst.seeds.pairs().map(|(w, pw)| (a.get(w).len() * b.get(pw).len()) as u64).sum();
        let sum: u64 = oracle.iter().flatten().map(|&x| x as u64).sum();
        if sum == mass && product.total() == mass {
            mass_ok += 1;
        }
        total += 1;
    }
    let bad = first_bad.map_or(String::new(), |b| format!("; first mismatch at {b}"));
    (
        Outcome::new(equal == total, format!("{equal}/{total} instances identical across product, explore and brute force{bad}")),
        Outcome::new(mass_ok == total, format!("{mass_ok}/{total} instances satisfy the mass identity")),
    )
}

fn gmwm_dominance() -> Outcome {
    let mut rng = stream(substream_id(MASTER, &[3]));
    let mut ok = 0;
    for _ in 0..100 {
        let k = rng.gen_range(1..=60);
        let off_max: u32 = rng.gen_range(0..50);
        let rows: Vec<Vec<u32>> = (0..k)
            .map(|u| {
                (0..k)
                    .map(|v| if u == v { rng.gen_range(off_max + 1..=off_max + 20) } else { rng.gen_range(0..=off_max) })
                    .collect()
            })
            .collect();
        let w = WitnessMatrix::from_dense_rows(&rows);
        let id = VertexMapping::identity(k);
        let g = gmwm(&w);
        let pa = parallel_argmax(&w);
        if g.mapping == id && pa.mapping == id && !pa.failure {
            ok += 1;
        }
    }
    Outcome::new(ok == 100, format!("{ok}/100 dominant matrices recovered as the identity by both matchers"))
}

/// Runs 4(a) through the binary with one and with eight threads.
fn one_hop_dense_via_cli() -> (Outcome, Outcome) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(Algorithm::ONE_HOP, 1.0 / 3.0, 0.8, grid(1.0, 2.6, 0.2), Rescale::OneHopDense);
    let cfg_path = dir.path().join("4a.toml");
    std::fs::write(&cfg_path, cfg.to_toml()).unwrap();
    let run = |threads: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(format!("threads{threads}"));
        std::fs::create_dir_all(&out).unwrap();
        let o = Command::new(env!("CARGO_BIN_EXE_seedmatch"))
            .args(["--threads", threads, "--out"])
            .arg(&out)
            .args(["sweep", "--config"])
            .arg(&cfg_path)
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(String::from_utf8_lossy(&o.stderr).into_owned());
        }
        std::fs::read(out.join("sweep.csv")).map_err(|e| e.to_string())
    };
    let (a, b) = match (run("1"), run("8")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return (Outcome::new(false, e.clone()), Outcome::new(false, e)),
    };
    let collapse = curves_from_csv(&dir.path().join("threads1/sweep.csv"))
        .map(|c| collapse_check(&c, Rescale::OneHopDense, 0.30))
        .unwrap_or_else(|e| Outcome::new(false, e));
    let same = a == b;
    let det = Outcome::new(
        same,
        format!(
            "4(a) sweep.csv with --threads 1 and --threads 8: {} ({} bytes)",
            if same { "byte-identical" } else { "differ" },
            a.len()
        ),
    );
    (collapse, det)
}

fn curves_from_csv(path: &Path) -> Result<Vec<Curve>, String> {
    let rows = read_csv(path).map_err(|e| e.to_string())?;
    let mut curves: Vec<(usize, f64, Vec<(f64, f64)>)> = Vec::new();
    for r in rows.iter().filter(|r| r.trial_or_median == MEDIAN) {
        match curves.iter_mut().find(|c| c.0 == r.n) {
            Some(c) => c.2.push((r.beta, r.accuracy)),
            None => curves.push((r.n, r.p, vec![(r.beta, r.accuracy)])),
        }
    }
    Ok(curves.into_iter().map(|(n, p, pts)| Curve::new(n, p, pts)).collect())
}

fn s_one_regime() -> Outcome {
    let cfg = sweep_config(Algorithm::TWO_HOP, 0.5, 1.0, grid(0.5, 1.6, 0.1), Rescale::TwoHopT2);
    let sweep = match run_sweep(&cfg) {
        Ok(s) => s,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let curves = sweep.curves();
    let t2 = collapse_analysis(&curves, Rescale::TwoHopT2).unwrap();
    let t3 = collapse_analysis(&curves, Rescale::TwoHopT3).unwrap();
    let (s2, d2) = describe(&t2, 0.5);
    let (s3, d3) = describe(&t3, 0.5);
    let pass = match (s2, s3) {
        (Some(a), Some(b)) => a <= 0.30 && b >= 1.5 * a,
        _ => false,
    };
    Outcome::new(
        pass,
        format!("spread {} under {d2} (bound 0.30); spread {} under {d3} (need >= 1.5x)", fmt_opt(s2), fmt_opt(s3)),
    )
}

const SPARSE_N: usize = 4000;
const SPARSE_GAMMA: f64 = 0.75;
const SPARSE_S: f64 = 0.9;

fn two_hop_beats_one_hop() -> Outcome {
    let betas = grid(0.02, 0.3, 0.02);
    let medians = |alg| -> Vec<f64> {
        let cfg = ExperimentConfig {
            algorithm: alg,
            iterations: 0,
            n: vec![SPARSE_N],
            p: PSpec::Power(SPARSE_GAMMA),
            s: SPARSE_S,
            beta: betas.clone(),
            beta_scale: None,
            trials: 10,
            seed: MASTER,
            complete_random: false,
            timing: false,
        };
        run_sweep(&cfg).unwrap().points.iter().map(|p| p.median_accuracy).collect()
    };
    let (one, two) = (medians(Algorithm::ONE_HOP), medians(Algorithm::TWO_HOP));
    let hits: Vec<String> = betas
        .iter()
        .zip(one.iter().zip(&two))
        .filter(|(_, (&o, &t))| t >= 0.9 && o <= 0.5)
        .map(|(b, (o, t))| format!("beta={b}: two_hop {t:.3}, one_hop {o:.3}"))
        .collect();
    Outcome::new(
        !hits.is_empty(),
        if hits.is_empty() {
            "no beta on the grid separates the two algorithms".to_string()
        } else {
            format!("{} grid points qualify, e.g. {}", hits.len(), hits[0])
        },
    )
}

/// Median accuracy at L = 0, 1, 2 over `trials` instances.
fn median_by_round(alg: Algorithm, set: u64, trials: usize) -> [f64; 3] {
    let p = (SPARSE_N as f64).powf(-SPARSE_GAMMA);
    let params = ModelParams::new(SPARSE_N, p, SPARSE_S, 0.3).unwrap();
    let mut acc: [Vec<f64>; 3] = Default::default();
    for t in 0..trials {
        let inst = make_correlated_pair(&params, trial_substream(set, alg, SPARSE_N, 0, t)).unwrap();
        let rounds = iterate_rounds(&inst.g1, &inst.g2, &inst.seeds, alg, 2).unwrap();
        for (l, r) in rounds.iter().enumerate() {
            acc[l].push(accuracy(r, &inst.truth, None).unwrap());
        }
    }
    acc.map(|mut v| {
        v.sort_by(f64::total_cmp);
        0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
    })
}

fn iterative_boost() -> Outcome {
    let algs = [Algorithm::ONE_HOP, Algorithm::TWO_HOP, Algorithm::NoisySeeds(3)];
    let mut passing = 0;
    let mut lines = Vec::new();
    for set in 0..10u64 {
        let seed = substream_id(MASTER, &[8, set]);
        let curves: Vec<[f64; 3]> = algs.iter().map(|&a| median_by_round(a, seed, 10)).collect();
        let ok = curves.iter().all(|c| c[0] <= c[1] && c[1] <= c[2]);
        passing += usize::from(ok);
        if set == 0 || !ok {
            let text: Vec<String> = algs
                .iter()
                .zip(&curves)
                .map(|(a, c)| format!("{a} {:.4}/{:.4}/{:.4}", c[0], c[1], c[2]))
                .collect();
            lines.push(format!("set {set}: {}", text.join(", ")));
        }
    }
    let r2 = median_by_round(Algorithm::NoisySeeds(2), substream_id(MASTER, &[8, 0]), 10);
    Outcome::new(
        passing >= 8,
        format!(
            "{passing}/10 trial sets non-decreasing in L for one_hop, two_hop, noisy_seeds:3 ({}); info: noisy_seeds:2 set 0 {:.4}/{:.4}/{:.4}",
            lines.join("; "),
            r2[0],
            r2[1],
            r2[2]
        ),
    )
}

fn concentration_events() -> Outcome {
    let params = ModelParams::new(2000, 0.05, 0.8, 0.5).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for event in [Event::Lemma1Psi, Event::Lemma3R, Event::Lemma6T] {
        match empirical_event_check(&params, event, 100, 100, substream_id(MASTER, &[9])) {
            Ok(r) => {
                pass &= r.rate() <= 0.01;
                parts.push(format!("{} {}/{}", event.name(), r.violations, r.samples));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{}: {e}", event.name()));
            }
        }
    }
    Outcome::new(pass, format!("violation counts {} (bound rate 0.01)", parts.join(", ")))
}

/// Closed forms written out again from scratch, with `ln n` obtained as
/// `log2(n) * ln 2` so that the library's arithmetic is not shared.
mod reference {
    fn ln(x: f64) -> f64 {
        x.log2() * std::f64::consts::LN_2
    }

    pub fn psi_max(n: f64, p: f64, s: f64) -> f64 {
        let m = n * (p * s).powi(2);
        m + (7.0 * ln(n) * m).sqrt() + 7.0 * ln(n) / 3.0 + 2.0
    }

    pub fn tau(n: f64, p: f64, s: f64) -> f64 {
        5.0 * ln(n) + 2.0 * (10.0 * ln(n) * n * p * s * (1.0 - s)).sqrt()
    }

    pub fn epsilon(n: f64, p: f64, s: f64) -> f64 {
        (12.0 * ln(n)).sqrt() / ((n - 1.0) * p).sqrt() / s
    }

    pub fn cond1(n: f64, p: f64, s: f64) -> f64 {
        0.5 / (n * p * s * s).powi(2)
    }

    pub fn cond2(n: f64, p: f64, s: f64) -> f64 {
        f64::max(16.0 * ln(n) / (n * p * s * s), 8.0 * p / 3.0)
    }

    pub fn cond3(n: f64, p: f64, s: f64) -> f64 {
        let a = 45.0 * ln(n) / (n * p * (1.0 - p).powi(2) * s * s);
        let b = 30.0 * ln(n).sqrt() / ((1.0 - p) * s * n.sqrt());
        a.max(b)
    }

    pub fn cond4(n: f64, p: f64, s: f64) -> f64 {
        let a = 600.0 * ln(n) / (n * p * s * s).powi(2);
        let b = 600.0 * ln(n).sqrt() / (s * s * n.sqrt());
        let c = 600.0 * (ln(n) * n * p * p * p * (1.0 - s) / s).sqrt();
        a.max(b).max(c)
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-10 * a.abs().max(b.abs())
}

fn threshold_evaluators() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for &n in &[1e2, 1e3, 1e4, 1e6, 1e8] {
        for &gamma in &[0.2, 0.5, 0.7, 0.85, 0.99] {
            let p = f64::powf(n, -gamma);
            for &s in &[0.3, 0.6, 0.9, 1.0] {
                let pairs = [
                    ("psi_max", theory::psi_max(n, p, s), reference::psi_max(n, p, s)),
                    ("tau", theory::tau(n, p, s), reference::tau(n, p, s)),
                    ("epsilon", theory::epsilon(n, p, s), reference::epsilon(n, p, s)),
                    (
                        "cond1",
                        theory::beta_threshold_prior(n, p, s, Prior::NoisySeeds).unwrap().value,
                        reference::cond1(n, p, s),
                    ),
                    (
                        "cond2",
                        theory::beta_threshold_prior(n, p, s, Prior::OneHopPrior).unwrap().value,
                        reference::cond2(n, p, s),
                    ),
                    ("cond3", theory::beta_threshold_1hop_ours(n, p, s).unwrap().value, reference::cond3(n, p, s)),
                    ("cond4", theory::beta_threshold_2hop_ours(n, p, s).unwrap().value, reference::cond4(n, p, s)),
                ];
                checked += 1;
                for (name, lib, re) in pairs {
                    if !close(lib, re) {
                        bad.push(format!("{name}(n={n}, p={p:.3e}, s={s}): {lib} vs {re}"));
                    }
                }
            }
        }
    }

    let n: f64 = 1e6;
    let s = 0.5;
    let (mut ordered, mut literal, mut points) = (0, 0, 0);
    for i in 0..=200 {
        let p = n.powf(-1.0 + 0.5 * i as f64 / 200.0);
        if p * n <= 1.0 {
            continue;
        }
        points += 1;
        let lo = theory::leading_order(n, p, s).unwrap();
        let prior_lo = if theory::noisy_seeds_window(n, p) {
            lo.noisy_seeds.min(lo.one_hop_prior)
        } else {
            lo.one_hop_prior
        };
        if lo.one_hop_ours.min(lo.two_hop_ours) <= prior_lo {
            ordered += 1;
        }
        let ours = reference::cond3(n, p, s).min(reference::cond4(n, p, s));
        let prior = if theory::noisy_seeds_window(n, p) {
            reference::cond1(n, p, s).min(reference::cond2(n, p, s))
        } else {
            reference::cond2(n, p, s)
        };
        literal += usize::from(ours <= prior);
    }
    let pass = bad.is_empty() && ordered == points;
    Outcome::new(
        pass,
        format!(
            "{checked} grid points x 7 quantities, {} mismatches at 1e-10{}; leading-order ordering holds at {ordered}/{points} p values (n=1e6, s=0.5); info: with the literal constants it holds at {literal}/{points}",
            bad.len(),
            bad.first().map_or(String::new(), |b| format!(" (first: {b})"))
        ),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed().as_secs_f64())
}

#[derive(Default)]
struct Report {
    failed: Vec<String>,
    passed: usize,
}

impl Report {
    fn add(&mut self, id: &str, outcome: Outcome, timing: &str) {
        println!(
            "{} criterion {id}: {} [{timing}]",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        if outcome.pass {
            self.passed += 1;
        } else {
            self.failed.push(id.to_string());
        }
    }

    fn run(&mut self, id: &str, f: impl FnOnce() -> Outcome) {
        let (outcome, secs) = timed(f);
        self.add(id, outcome, &format!("{secs:.1}s"));
    }
}

fn main() -> ExitCode {
    let only: Option<Vec<String>> = std::env::var("SEEDMATCH_ACCEPTANCE")
        .ok()
        .map(|v| v.split(',').map(|s| s.trim().to_string()).collect());
    let wanted = |ids: &[&str]| only.as_ref().is_none_or(|o| ids.iter().any(|id| o.iter().any(|x| x == id)));
    let start = Instant::now();
    let mut report = Report::default();

    if wanted(&["1", "2"]) {
        let ((c1, c2), secs) = timed(witness_oracles);
        let shared = format!("{secs:.1}s, shared by 1 and 2");
        report.add("1", c1, &shared);
        report.add("2", c2, &shared);
    }
    if wanted(&["3"]) {
        report.run("3", gmwm_dominance);
    }
    let mut det = None;
    if wanted(&["4a", "4", "11"]) {
        let ((c4a, c11), secs) = timed(one_hop_dense_via_cli);
        let shared = format!("{secs:.1}s for both CLI sweeps, shared by 4a and 11");
        report.add("4a", c4a, &shared);
        det = Some((c11, shared));
    }
    if wanted(&["4b", "4"]) {
        report.run("4b", || {
            sweep_collapse(Algorithm::ONE_HOP, 2.0 / 3.0, 0.8, grid(0.1, 0.8, 0.05), Rescale::OneHopSparse, 0.30)
        });
    }
    if wanted(&["5a", "5"]) {
        report.run("5a", || sweep_collapse(Algorithm::TWO_HOP, 0.8, 0.8, grid(0.3, 1.6, 0.1), Rescale::TwoHopT1, 0.30));
    }
    if wanted(&["5b", "5"]) {
        report.run("5b", || {
            sweep_collapse(Algorithm::TWO_HOP, 17.0 / 24.0, 0.8, grid(1.5, 4.5, 0.25), Rescale::TwoHopT2, 0.30)
        });
    }
    if wanted(&["5c", "5"]) {
        report.run("5c", || sweep_collapse(Algorithm::TWO_HOP, 0.6, 0.8, grid(0.5, 1.6, 0.1), Rescale::TwoHopT3, 0.35));
    }
    if wanted(&["6"]) {
        report.run("6", s_one_regime);
    }
    if wanted(&["7"]) {
        report.run("7", two_hop_beats_one_hop);
    }
    if wanted(&["8"]) {
        report.run("8", iterative_boost);
    }
    if wanted(&["9"]) {
        report.run("9", concentration_events);
    }
    if wanted(&["10"]) {
        report.run("10", threshold_evaluators);
    }
    if let Some((c11, shared)) = det {
        report.add("11", c11, &shared);
    }

    println!(
        "acceptance: {} passed, {} failed{} in {:.0}s",
        report.passed,
        report.failed.len(),
        if report.failed.is_empty() { String::new() } else { format!(" ({})", report.failed.join(", ")) },
        start.elapsed().as_secs_f64()
    );
    if report.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
