//! Statistical checks of the simulation examples. These take a few seconds
//! each in an optimised build.

use majority_core::analysis::regularity_report;
use majority_core::bounds::{theory_thresholds, ConstantsConfig};
use majority_core::coloring::{fixed_advantage, RED};
use majority_core::dynamics::landslide_profile;
use majority_core::graph::{generate_gnp, ModelParams};
use majority_core::harness::{day2_check, run_records, run_trials, sweep, ExperimentConfig, Scheme, TrialSummary};
use majority_core::rng::mix;

fn fixed(n: usize, p: f64, delta: usize, trials: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(ModelParams { n, p, delta, seed }, Scheme::FixedAdvantage, trials)
}

#[test]
fn landslide_ratio_bound_holds_for_red_wins() {
    let (n, p) = (30_000, 0.02);
    let cfg = fixed(n, p, 500, 40, 17);
    let records = run_records(&cfg).unwrap();
    let k = ConstantsConfig::default();
    let red: Vec<_> = records.iter().filter(|r| r.outcome().winner() == Some(RED)).collect();
    assert!(!red.is_empty());
    let good = red
        .iter()
        .filter(|r| landslide_profile(&r.trajectory, p, k.c_landslide).within_bound())
        .count();
    assert!(good as f64 >= 0.95 * red.len() as f64, "{good}/{}", red.len());
}

#[test]
fn win_probability_grows_with_advantage() {
    let grid: Vec<_> = [0, 5, 15].iter().map(|&d| fixed(1000, 0.02, d, 200, 23)).collect();
    let rows = sweep(&grid).unwrap();
    for pair in rows.windows(2) {
        let (lo, hi): (&TrialSummary, &TrialSummary) = (&pair[0], &pair[1]);
        // nondecreasing up to sampling noise
        assert!(hi.win_interval().1 >= lo.win_probability(), "{} then {}", lo.win_probability(), hi.win_probability());
    }
    assert!(rows[2].win_probability() > rows[0].win_probability());
}

#[test]
fn day_two_advantage_above_threshold() {
    let (n, p) = (20_000, 0.02);
    let k = ConstantsConfig::default();
    let delta = theory_thresholds(n as u64, p, &k).unwrap().delta_min.ceil() as usize;
    let cfg = fixed(n, p, delta, 30, 29);
    let s = run_trials(&cfg).unwrap();
    let check = day2_check(&cfg, &s).unwrap();
    assert!(check.pass, "{check:?}");
}

/// Share of sampled vertices whose neighbourhood passes every regularity
/// condition at n = 20000, p = 0.02.
fn regular_fraction(graphs: usize, per_graph: usize) -> f64 {
    let (n, p) = (20_000, 0.02);
    let mut regular = 0;
    for i in 0..graphs as u64 {
        let g = generate_gnp(n, p, mix(31, 2 * i)).unwrap();
        let hat0 = fixed_advantage(n, 0, mix(31, 2 * i + 1)).unwrap();
        for j in 0..per_graph {
            let v = (j * (n / per_graph)) % n;
            regular += usize::from(regularity_report(&g, &hat0, v, None, p).unwrap().regular);
        }
    }
    regular as f64 / (graphs * per_graph) as f64
}

#[test]
#[ignore = "the |1ᵀd_U| <= 5 ln n window is far too narrow at pn = 400; see README"]
fn neighbourhoods_are_mostly_regular() {
    let frac = regular_fraction(20, 200);
    assert!(frac >= 0.99, "regular fraction {frac}");
}
