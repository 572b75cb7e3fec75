use seedmatch::bench::output::{sweep_rows, write_csv_to, MEDIAN};
use seedmatch::bench::real::{real_instance, real_protocol, RealParams};
use seedmatch::bench::{accuracy, run_sweep, ExperimentConfig, PSpec};
use seedmatch::matcher::iterate_rounds;
use seedmatch::rng::{stream, substream_id};
use seedmatch::synth::{make_correlated_pair, sample_er, ModelParams};
use seedmatch::theory::{empirical_event_check, Event};
use seedmatch::Algorithm;

fn config(algorithm: Algorithm, n: Vec<usize>, gamma: f64, s: f64, beta: Vec<f64>, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        algorithm,
        iterations: 0,
        n,
        p: PSpec::Power(gamma),
        s,
        beta,
        beta_scale: None,
        trials,
        seed: 2024,
        complete_random: false,
        timing: false,
    }
}

fn csv_bytes(cfg: &ExperimentConfig, threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let sweep = pool.install(|| run_sweep(cfg)).unwrap();
    let mut buf = Vec::new();
    write_csv_to(&sweep_rows(&sweep), &mut buf).unwrap();
    buf
}

#[test]
fn sweep_csv_is_independent_of_thread_count() {
    let cfg = config(Algorithm::TWO_HOP, vec![300, 500], 0.5, 0.8, vec![0.1, 0.3], 3);
    let one = csv_bytes(&cfg, 1);
    assert_eq!(one, csv_bytes(&cfg, 3));
    assert_eq!(one, csv_bytes(&cfg, 1));
}

#[test]
fn median_rows_rederive_from_trial_rows() {
    let cfg = config(Algorithm::ONE_HOP, vec![400], 1.0 / 3.0, 0.8, vec![0.2, 0.4, 0.6], 4);
    let rows = sweep_rows(&run_sweep(&cfg).unwrap());
    for chunk in rows.chunks(cfg.trials + 1) {
        let (trials, med) = chunk.split_at(cfg.trials);
        assert_eq!(med[0].trial_or_median, MEDIAN);
        let mut acc: Vec<f64> = trials.iter().map(|r| r.accuracy).collect();
        acc.sort_by(f64::total_cmp);
        let k = acc.len();
        let textbook = if k % 2 == 1 { acc[k / 2] } else { 0.5 * (acc[k / 2 - 1] + acc[k / 2]) };
        assert_eq!(textbook, med[0].accuracy);
        assert!(trials.iter().all(|r| (0.0..=1.0).contains(&r.accuracy)));
    }
}

// With every seed correct, only vertices lacking a common neighbor can be
// missed, which at this density is a fraction of a percent.
#[test]
fn all_correct_seeds_give_near_perfect_one_hop() {
    let cfg = config(Algorithm::ONE_HOP, vec![4000], 0.75, 0.9, vec![1.0], 10);
    let sweep = run_sweep(&cfg).unwrap();
    let good = sweep.trials.iter().filter(|t| t.accuracy >= 0.99).count();
    assert!(good >= 9, "{:?}", sweep.trials.iter().map(|t| t.accuracy).collect::<Vec<_>>());
}

#[test]
fn iterations_do_not_hurt_two_hop_on_sparse_graphs() {
    let params = ModelParams::new(4000, 4000f64.powf(-6.0 / 7.0), 0.9, 0.5).unwrap();
    let mut monotone = 0;
    for t in 0..10u64 {
        let inst = make_correlated_pair(&params, substream_id(77, &[t])).unwrap();
        let rounds = iterate_rounds(&inst.g1, &inst.g2, &inst.seeds, Algorithm::TWO_HOP, 2).unwrap();
        let acc: Vec<f64> = rounds.iter().map(|r| accuracy(r, &inst.truth, None).unwrap()).collect();
        if acc.windows(2).all(|w| w[1] >= w[0]) {
            monotone += 1;
        }
    }
    assert!(monotone >= 8, "{monotone}/10");
}

#[test]
fn fixed_point_rounds_repeat() {
    let params = ModelParams::new(300, 0.08, 0.9, 0.3).unwrap();
    let inst = make_correlated_pair(&params, 5).unwrap();
    for alg in [Algorithm::ONE_HOP, Algorithm::TWO_HOP, Algorithm::NoisySeeds(2)] {
        let rounds = iterate_rounds(&inst.g1, &inst.g2, &inst.seeds, alg, 6).unwrap();
        if let Some(k) = (0..rounds.len() - 1).find(|&k| rounds[k] == rounds[k + 1]) {
            assert!(rounds[k..].iter().all(|r| *r == rounds[k]), "{alg}");
        }
    }
}

#[test]
fn strong_criterion_rarely_fails_above_threshold_scaling() {
    for p in [0.02, 0.01] {
        let params = ModelParams::new(1000, p, 0.9, 0.5).unwrap();
        let rate = empirical_event_check(&params, Event::CriteriaStrong, 20, 50, 9).unwrap();
        assert!(rate.rate() <= 0.05, "p = {p}: {rate:?}");
    }
}

#[test]
fn lemma6_never_fails_without_edge_noise() {
    let params = ModelParams::new(500, 0.05, 1.0, 0.5).unwrap();
    assert_eq!(empirical_event_check(&params, Event::Lemma6T, 5, 100, 1).unwrap().violations, 0);
}

#[test]
fn real_protocol_respects_ceiling() {
    let g0 = sample_er(1500, 0.004, &mut stream(31));
    for (t, alg) in [Algorithm::ONE_HOP, Algorithm::TWO_HOP, Algorithm::NoisySeeds(2)].into_iter().enumerate() {
        for beta in [0.2, 0.6] {
            let params = RealParams {
                s: 0.9,
                alpha: 0.8,
                beta,
                algorithm: alg,
                iterations: 1,
                complete_random: false,
            };
            let r = real_protocol(&g0, &params, 100 + t as u64).unwrap();
            assert!(r.accuracy <= r.ceiling, "{alg} beta {beta}: {r:?}");
            assert!(r.ceiling < 1.0);
        }
    }
    let inst = real_instance(&g0, 0.9, 0.8, 0.5, 3).unwrap();
    let m = inst.common.len() as f64;
    assert!((m / 1500.0 - 0.64).abs() < 0.05, "{m}");
}
