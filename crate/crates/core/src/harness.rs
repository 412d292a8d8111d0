//! Monte Carlo orchestration: seeded trial pipelines, aggregation, grid
//! sweeps with resumable CSV output, threshold bisection and log-log fits.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::ConstantsConfig;
use crate::coloring::{
    balanced_with_defectors, fixed_advantage, random_half, Coloring, BLUE, RED,
};
use crate::dynamics::{run_with, DaySummary, Outcome, RunOptions, Trajectory};
use crate::graph::{generate_gnp, Graph, ModelParams};
use crate::rng::mix;
use crate::{par, Error, Result};

/// `z` for a two-sided 95% interval.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Exactly `⌈n/2⌉ + Δ` Red vertices, chosen uniformly.
    FixedAdvantage,
    /// Independent fair coin per vertex; `delta` is ignored.
    RandomHalf,
    /// A balanced coloring with `Δ` Blue defectors turned Red.
    BalancedDefectors,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::FixedAdvantage, Scheme::RandomHalf, Scheme::BalancedDefectors];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::FixedAdvantage => "fixed_advantage",
            Scheme::RandomHalf => "random_half",
            Scheme::BalancedDefectors => "balanced_defectors",
        }
    }

    /// Draws the day-zero coloring for this scheme.
    pub fn initial_coloring(self, n: usize, delta: usize, seed: u64) -> Result<Coloring> {
        match self {
            Scheme::FixedAdvantage => fixed_advantage(n, delta, seed),
            Scheme::RandomHalf => Ok(random_half(n, seed)),
            Scheme::BalancedDefectors => Ok(balanced_with_defectors(n, delta, seed)?.coloring),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown scheme `{s}` (fixed_advantage|random_half|balanced_defectors)"
                ))
            })
    }
}

fn default_workers() -> usize {
    0
}

/// Everything needed to run a batch of independent trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub scheme: Scheme,
    pub trials: usize,
    /// Day cap per run; `None` means `n + 2`.
    #[serde(default)]
    pub max_days: Option<usize>,
    #[serde(default)]
    pub store_colorings: bool,
    /// `1` sequential, `0` the global pool, `k` a dedicated pool.
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub constants: ConstantsConfig,
}

impl ExperimentConfig {
    pub fn new(params: ModelParams, scheme: Scheme, trials: usize) -> Self {
        ExperimentConfig {
            params,
            scheme,
            trials,
            max_days: None,
            store_colorings: false,
            workers: default_workers(),
            constants: ConstantsConfig::default(),
        }
    }

    /// Rejects configurations that cannot be run; all failures are config
    /// errors.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.max_days == Some(0) {
            return Err(Error::config("max_days must be at least 1"));
        }
        let as_config = |e: Error| Error::config(e.to_string());
        let mut params = self.params;
        if self.scheme == Scheme::RandomHalf {
            params.delta = 0;
        }
        params.validate().map_err(as_config)?;
        self.constants.validate().map_err(as_config)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("bad experiment config: {e}")))
    }

    fn run_options(&self) -> RunOptions {
        RunOptions {
            max_days: self.max_days,
            store_colorings: self.store_colorings,
        }
    }
}

/// Seed of trial `i` under master seed `master`.
pub fn trial_seed(master: u64, i: usize) -> u64 {
    mix(master, i as u64)
}

/// The graph and day-zero coloring of one trial, both derived from its seed.
pub fn trial_instance(cfg: &ExperimentConfig, seed: u64) -> Result<(Graph, Coloring)> {
    let ModelParams { n, p, delta, .. } = cfg.params;
    let g = generate_gnp(n, p, mix(seed, 0))?;
    let c0 = cfg.scheme.initial_coloring(n, delta, mix(seed, 1))?;
    Ok((g, c0))
}

/// Result of one (graph, coloring, run) pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub trajectory: Trajectory,
}

impl TrialRecord {
    pub fn outcome(&self) -> &Outcome {
        &self.trajectory.outcome
    }

    /// `red - blue` on day zero.
    pub fn initial_margin(&self) -> i64 {
        let d0 = &self.trajectory.days[0];
        d0.red as i64 - d0.blue as i64
    }

    /// `Σ_v ℓ₂(v)`, extrapolated when the run settled before day two.
    pub fn day2_sum(&self) -> Option<i64> {
        self.trajectory
            .advantage_on_day(2)
            .map(|a| (2.0 * a).round() as i64)
    }

    /// Whether the side larger on day zero won. `None` on an initial tie.
    pub fn initial_majority_won(&self) -> Option<bool> {
        let majority = match self.initial_margin() {
            0 => return None,
            m if m > 0 => RED,
            _ => BLUE,
        };
        Some(self.outcome().winner() == Some(majority))
    }
}

pub fn run_trial(cfg: &ExperimentConfig, index: usize) -> Result<TrialRecord> {
    let seed = trial_seed(cfg.params.seed, index);
    let (g, c0) = trial_instance(cfg, seed)?;
    let trajectory = run_with(&g, &c0, &cfg.run_options())?;
    Ok(TrialRecord {
        index,
        seed,
        trajectory,
    })
}

/// Runs every trial and returns the records in index order.
pub fn run_records(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    par::map_indexed(cfg.trials, cfg.workers, |i| run_trial(cfg, i))
        .into_iter()
        .collect()
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = (center - half).clamp(0.0, 1.0).min(phat);
    let hi = (center + half).clamp(0.0, 1.0).max(phat);
    (lo, hi)
}

/// Aggregate of a set of trials. Built by [`TrialSummary::add`] and
/// [`TrialSummary::merge`], which commute, so the result does not depend on
/// the order trials finished in.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub red_wins: usize,
    pub blue_wins: usize,
    pub stable_non_unanimous: usize,
    pub two_cycles: usize,
    pub day_capped: usize,
    /// Trials that started with a strict majority.
    pub initial_majority_trials: usize,
    pub initial_majority_wins: usize,
    /// Outcome day -> number of trials.
    pub day_histogram: BTreeMap<usize, usize>,
    pub days_total: u64,
    pub max_days_observed: usize,
    pub delta2_total: i64,
    pub delta2_trials: usize,
    /// `(trial index, trial seed)`, sorted by index.
    pub seeds: Vec<(usize, u64)>,
}

impl TrialSummary {
    pub fn add(&mut self, r: &TrialRecord) {
        self.trials += 1;
        let outcome = r.outcome();
        match outcome {
            Outcome::RedWin { .. } => self.red_wins += 1,
            Outcome::BlueWin { .. } => self.blue_wins += 1,
            Outcome::StableNonUnanimous { .. } => self.stable_non_unanimous += 1,
            Outcome::TwoCycle { .. } => self.two_cycles += 1,
            Outcome::DayCapReached { .. } => self.day_capped += 1,
        }
        if let Some(won) = r.initial_majority_won() {
            self.initial_majority_trials += 1;
            self.initial_majority_wins += usize::from(won);
        }
        let day = outcome.day();
        *self.day_histogram.entry(day).or_default() += 1;
        self.days_total += day as u64;
        self.max_days_observed = self.max_days_observed.max(day);
        if let Some(s) = r.day2_sum() {
            self.delta2_total += s;
            self.delta2_trials += 1;
        }
        let pos = self.seeds.partition_point(|&(i, _)| i < r.index);
        self.seeds.insert(pos, (r.index, r.seed));
    }

    pub fn merge(mut self, other: TrialSummary) -> TrialSummary {
        self.trials += other.trials;
        self.red_wins += other.red_wins;
        self.blue_wins += other.blue_wins;
        self.stable_non_unanimous += other.stable_non_unanimous;
        self.two_cycles += other.two_cycles;
        self.day_capped += other.day_capped;
        self.initial_majority_trials += other.initial_majority_trials;
        self.initial_majority_wins += other.initial_majority_wins;
        for (day, count) in other.day_histogram {
            *self.day_histogram.entry(day).or_default() += count;
        }
        self.days_total += other.days_total;
        self.max_days_observed = self.max_days_observed.max(other.max_days_observed);
        self.delta2_total += other.delta2_total;
        self.delta2_trials += other.delta2_trials;
        self.seeds.extend(other.seeds);
        self.seeds.sort_unstable();
        self
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let mut s = TrialSummary::default();
        for r in records {
            s.add(r);
        }
        s
    }

    pub fn win_probability(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.red_wins as f64 / self.trials as f64
    }

    /// 95% Wilson interval for the Red win probability.
    pub fn win_interval(&self) -> (f64, f64) {
        wilson_interval(self.red_wins, self.trials, Z_95)
    }

    pub fn mean_days(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.days_total as f64 / self.trials as f64
    }

    /// Mean of `Σ_v ℓ₂(v)` over trials where day two is determined.
    pub fn mean_delta2(&self) -> Option<f64> {
        (self.delta2_trials > 0).then(|| self.delta2_total as f64 / self.delta2_trials as f64)
    }
}

pub fn run_trials(cfg: &ExperimentConfig) -> Result<TrialSummary> {
    Ok(TrialSummary::from_records(&run_records(cfg)?))
}

/// Comparison of the mean day-two sum against `2 c Δ pn`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Day2Check {
    pub mean_delta2: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn day2_check(cfg: &ExperimentConfig, summary: &TrialSummary) -> Option<Day2Check> {
    let mean = summary.mean_delta2()?;
    let ModelParams { n, p, delta, .. } = cfg.params;
    let bound = 2.0 * cfg.constants.c_day2 * delta as f64 * p * n as f64;
    Some(Day2Check {
        mean_delta2: mean,
        bound,
        pass: mean >= bound,
    })
}

/// Serialisable form of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub params: ModelParams,
    pub outcome: OutcomeRecord,
    pub days: Vec<DaySummary>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colorings: Option<Vec<Coloring>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeRecord {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub day: usize,
}

impl TrajectoryRecord {
    pub fn new(params: ModelParams, record: &TrialRecord) -> Self {
        let t = &record.trajectory;
        TrajectoryRecord {
            params,
            outcome: OutcomeRecord {
                kind: t.outcome.kind(),
                day: t.outcome.day(),
            },
            days: t.days.clone(),
            seed: record.seed,
            colorings: t.colorings.clone(),
        }
    }
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub p: f64,
    pub delta: usize,
    pub scheme: Scheme,
    pub trials: usize,
    pub red_wins: usize,
    pub blue_wins: usize,
    pub stable: usize,
    pub two_cycles: usize,
    pub day_capped: usize,
    pub win_prob: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_days: f64,
    pub max_days_observed: usize,
    pub mean_delta2: Option<f64>,
    pub seed: u64,
}

impl SweepRow {
    pub fn new(cfg: &ExperimentConfig, s: &TrialSummary) -> Self {
        let (ci_low, ci_high) = s.win_interval();
        SweepRow {
            n: cfg.params.n,
            p: cfg.params.p,
            delta: cfg.params.delta,
            scheme: cfg.scheme,
            trials: s.trials,
            red_wins: s.red_wins,
            blue_wins: s.blue_wins,
            stable: s.stable_non_unanimous,
            two_cycles: s.two_cycles,
            day_capped: s.day_capped,
            win_prob: s.win_probability(),
            ci_low,
            ci_high,
            mean_days: s.mean_days(),
            max_days_observed: s.max_days_observed,
            mean_delta2: s.mean_delta2(),
            seed: cfg.params.seed,
        }
    }
}

pub const SWEEP_COLUMNS: [&str; 17] = [
    "n",
    "p",
    "delta",
    "scheme",
    "trials",
    "red_wins",
    "blue_wins",
    "stable",
    "two_cycles",
    "day_capped",
    "win_prob",
    "ci_low",
    "ci_high",
    "mean_days",
    "max_days_observed",
    "mean_delta2",
    "seed",
];

/// Runs every configuration in memory.
pub fn sweep(grid: &[ExperimentConfig]) -> Result<Vec<TrialSummary>> {
    if grid.is_empty() {
        return Err(Error::config("sweep grid is empty"));
    }
    grid.iter().map(run_trials).collect()
}

pub fn parse_grid(text: &str) -> Result<Vec<ExperimentConfig>> {
    serde_json::from_str(text).map_err(|e| Error::config(format!("bad sweep grid: {e}")))
}

/// Path of the completion marker kept next to a sweep CSV.
pub fn marker_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".done");
    PathBuf::from(name)
}

fn grid_fingerprint(grid: &[ExperimentConfig]) -> Result<String> {
    // worker counts never change results, so they stay out of the fingerprint
    let normalized: Vec<ExperimentConfig> = grid
        .iter()
        .map(|c| ExperimentConfig { workers: 0, ..c.clone() })
        .collect();
    let text = serde_json::to_string(&normalized)?;
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    Ok(format!("grid {h:016x}"))
}

/// What a CSV sweep did.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub rows_total: usize,
    pub rows_resumed: usize,
    pub rows_run: usize,
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::validation(format!("csv: {other:?}")),
    }
}

/// Keeps the header and the first `rows` data lines of `path`.
fn truncate_rows(path: &Path, rows: usize) -> Result<()> {
    let reader = BufReader::new(File::open(path)?);
    let mut keep = 0u64;
    for (i, line) in reader.split(b'\n').enumerate() {
        if i > rows {
            break;
        }
        let line = line?;
        keep += line.len() as u64 + 1;
    }
    let file = OpenOptions::new().write(true).open(path)?;
    let len = file.metadata()?.len();
    file.set_len(keep.min(len))?;
    Ok(())
}

/// Runs the grid row by row, appending to `out`. A marker file
/// (`<out>.done`) records the grid fingerprint and one line per finished
/// row; with `resume` set, finished rows are skipped and any partial tail of
/// the CSV is discarded.
pub fn sweep_to_csv(grid: &[ExperimentConfig], out: &Path, resume: bool) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(Error::config("sweep grid is empty"));
    }
    for cfg in grid {
        cfg.validate()?;
    }
    let fingerprint = grid_fingerprint(grid)?;
    let marker = marker_path(out);

    let mut done = 0;
    if resume && marker.exists() && out.exists() {
        let text = fs::read_to_string(&marker)?;
        let mut lines = text.lines();
        if lines.next() != Some(fingerprint.as_str()) {
            return Err(Error::config(format!(
                "{} belongs to a different grid; remove it to start over",
                marker.display()
            )));
        }
        done = lines.filter(|l| !l.trim().is_empty()).count().min(grid.len());
        truncate_rows(out, done)?;
    } else {
        let mut w = csv::Writer::from_path(out).map_err(csv_error)?;
        w.write_record(SWEEP_COLUMNS).map_err(csv_error)?;
        w.flush()?;
        fs::write(&marker, format!("{fingerprint}\n"))?;
    }

    let file = OpenOptions::new().append(true).open(out)?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let mut marks = OpenOptions::new().append(true).open(&marker)?;
    for (i, cfg) in grid.iter().enumerate().skip(done) {
        let summary = run_trials(cfg)?;
        writer.serialize(SweepRow::new(cfg, &summary)).map_err(csv_error)?;
        writer.flush()?;
        writeln!(marks, "{i}")?;
        marks.flush()?;
    }
    Ok(SweepReport {
        rows_total: grid.len(),
        rows_resumed: done,
        rows_run: grid.len() - done,
    })
}

/// Knobs of [`threshold_bisect`] beyond the required arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BisectOptions {
    pub workers: usize,
    pub max_days: Option<usize>,
    /// Stop a probe as soon as its verdict can no longer change. The
    /// verdict, and hence `delta_star`, is the same either way.
    pub early_stop: bool,
}

impl Default for BisectOptions {
    fn default() -> Self {
        BisectOptions {
            workers: 0,
            max_days: None,
            early_stop: true,
        }
    }
}

/// One evaluated `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub delta: usize,
    pub red_wins: usize,
    /// Trials actually run; below `trials_per_point` after an early stop.
    pub trials_run: usize,
    pub estimate: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisectResult {
    pub delta_star: usize,
    /// Probes in evaluation order.
    pub probes: Vec<Probe>,
}

/// Estimates the Red win probability under the fixed advantage scheme at
/// one `Δ`, with seed `mix(seed, Δ)`, and decides whether it reaches
/// `need` wins out of `trials`.
fn probe(
    n: usize,
    p: f64,
    delta: usize,
    trials: usize,
    need: usize,
    seed: u64,
    opts: &BisectOptions,
) -> Result<Probe> {
    let cfg = ExperimentConfig {
        max_days: opts.max_days,
        workers: opts.workers,
        ..ExperimentConfig::new(
            ModelParams {
                n,
                p,
                delta,
                seed: mix(seed, delta as u64),
            },
            Scheme::FixedAdvantage,
            trials,
        )
    };
    cfg.validate()?;
    let chunk = if opts.early_stop {
        (2 * rayon_threads(opts.workers)).max(8)
    } else {
        trials
    };
    let (mut wins, mut ran) = (0usize, 0usize);
    while ran < trials {
        let len = chunk.min(trials - ran);
        let start = ran;
        let batch: Result<Vec<bool>> = par::map_indexed(len, opts.workers, |i| {
            run_trial(&cfg, start + i).map(|r| r.outcome().winner() == Some(RED))
        })
        .into_iter()
        .collect();
        wins += batch?.into_iter().filter(|&w| w).count();
        ran += len;
        if opts.early_stop && (wins >= need || wins + (trials - ran) < need) {
            break;
        }
    }
    Ok(Probe {
        delta,
        red_wins: wins,
        trials_run: ran,
        estimate: wins as f64 / ran as f64,
        pass: wins >= need,
    })
}

fn rayon_threads(workers: usize) -> usize {
    #[cfg(feature = "parallel")]
    if workers == 0 {
        return rayon::current_num_threads();
    }
    workers.max(1)
}

/// Smallest probed `Δ ∈ [0, ⌊n/2⌋ - 1]` whose estimated Red win probability
/// under the fixed advantage scheme reaches `target`. Probes `Δ = 0`, then
/// `1, 2, 4, …` until one passes, then bisects the last bracket, relying on
/// the win probability being monotone in `Δ`.
pub fn threshold_bisect(
    n: usize,
    p: f64,
    target: f64,
    trials_per_point: usize,
    seed: u64,
    opts: &BisectOptions,
) -> Result<BisectResult> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::parameter(format!("target probability {target} must lie in (0, 1)")));
    }
    if trials_per_point == 0 {
        return Err(Error::parameter("trials_per_point must be at least 1"));
    }
    crate::graph::check_probability(p)?;
    let need = (target * trials_per_point as f64).ceil() as usize;
    // Δ = ⌊n/2⌋ makes every vertex Red on day zero, so it cannot witness anything
    let max_delta = (n / 2).saturating_sub(1);
    let mut probes = Vec::new();
    let eval = |delta: usize, probes: &mut Vec<Probe>| -> Result<bool> {
        let pr = probe(n, p, delta, trials_per_point, need, seed, opts)?;
        probes.push(pr);
        Ok(pr.pass)
    };

    if eval(0, &mut probes)? {
        return Ok(BisectResult { delta_star: 0, probes });
    }
    let (mut lo, mut hi) = (0usize, 1usize);
    loop {
        if hi > max_delta {
            if lo == max_delta {
                let seen: Vec<String> = probes
                    .iter()
                    .map(|p| format!("Δ={}: {}/{}", p.delta, p.red_wins, p.trials_run))
                    .collect();
                return Err(Error::Bracketing(format!(
                    "no Δ in [0, {max_delta}] reaches win probability {target} at n = {n}, p = {p}; probes: {}",
                    seen.join(", ")
                )));
            }
            hi = max_delta;
        }
        if eval(hi, &mut probes)? {
            break;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if eval(mid, &mut probes)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BisectResult { delta_star: hi, probes })
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 2 {
        return Err(Error::parameter("scaling fit needs at least two points"));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(Error::parameter(format!("scaling fit needs positive points, got ({x}, {y})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|l| l.0).sum::<f64>() / k;
    let my = logs.iter().map(|l| l.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
    let syy: f64 = logs.iter().map(|l| (l.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::parameter("scaling fit needs at least two distinct x values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs
        .iter()
        .map(|l| (l.1 - intercept - slope * l.0).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(ScalingFit { slope, intercept, r2 })
}
