//! The synchronous majority update and whole-run orchestration.

use serde::Serialize;

use crate::coloring::{Coloring, BLUE, RED};
use crate::graph::Graph;
use crate::rng::splitmix64;
use crate::{Error, Result};

/// Signed neighbourhood sum `2 * (Red neighbours) - degree` of `v`.
#[inline]
pub(crate) fn neighbor_sum(g: &Graph, labels: &[i8], v: usize) -> i32 {
    g.neighbors(v).iter().map(|&u| labels[u as usize] as i32).sum()
}

#[inline]
fn majority(sum: i32, own: i8) -> i8 {
    match sum {
        s if s > 0 => RED,
        s if s < 0 => BLUE,
        _ => own,
    }
}

pub(crate) fn check_sizes(g: &Graph, c: &Coloring) -> Result<()> {
    if g.n() != c.n() {
        return Err(Error::validation(format!(
            "coloring has {} labels but the graph has {} vertices",
            c.n(),
            g.n()
        )));
    }
    Ok(())
}

/// Writes the next day's labels into `next` from `cur`. Both slices have
/// length `g.n()`.
pub fn step_into(g: &Graph, cur: &[i8], next: &mut [i8]) {
    for (v, slot) in next.iter_mut().enumerate() {
        *slot = majority(neighbor_sum(g, cur, v), cur[v]);
    }
}

/// One day of majority dynamics: every vertex simultaneously adopts the
/// strict majority label of its neighbours, keeping its own label on a tie
/// (including degree 0).
pub fn step(g: &Graph, c: &Coloring) -> Result<Coloring> {
    check_sizes(g, c)?;
    let mut next = vec![0i8; g.n()];
    step_into(g, c.labels(), &mut next);
    Ok(Coloring::from_labels_unchecked(next))
}

/// Same as [`step`], with the vertex loop split across the rayon pool.
#[cfg(feature = "parallel")]
pub fn step_par(g: &Graph, c: &Coloring) -> Result<Coloring> {
    use rayon::prelude::*;
    check_sizes(g, c)?;
    let cur = c.labels();
    let mut next = vec![0i8; g.n()];
    next.par_chunks_mut(4096).enumerate().for_each(|(chunk, out)| {
        let base = chunk * 4096;
        for (i, slot) in out.iter_mut().enumerate() {
            let v = base + i;
            *slot = majority(neighbor_sum(g, cur, v), cur[v]);
        }
    });
    Ok(Coloring::from_labels_unchecked(next))
}

/// 128-bit content hash of a labelling: XOR of two independent per-vertex
/// keys over the Red vertices.
fn content_hash(labels: &[i8]) -> (u64, u64) {
    let mut h = (0u64, 0u64);
    for (v, &l) in labels.iter().enumerate() {
        if l == RED {
            let v = v as u64;
            h.0 ^= splitmix64(v ^ 0x5851_F42D_4C95_7F2D);
            h.1 ^= splitmix64(v.wrapping_add(0x1405_7B7E_F767_814F));
        }
    }
    h
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outcome {
    /// Every vertex Red on `day`.
    RedWin { day: usize },
    /// Every vertex Blue on `day`.
    BlueWin { day: usize },
    /// `ℓ_{day+1} = ℓ_day` without unanimity.
    StableNonUnanimous { day: usize },
    /// `ℓ_{day+2} = ℓ_day ≠ ℓ_{day+1}`; `colorings` holds `(ℓ_day, ℓ_{day+1})`.
    TwoCycle {
        day: usize,
        colorings: Box<(Coloring, Coloring)>,
    },
    /// The day cap was hit before any of the above was detected.
    DayCapReached { day: usize },
}

impl Outcome {
    pub fn day(&self) -> usize {
        match self {
            Outcome::RedWin { day }
            | Outcome::BlueWin { day }
            | Outcome::StableNonUnanimous { day }
            | Outcome::TwoCycle { day, .. }
            | Outcome::DayCapReached { day } => *day,
        }
    }

    /// The winning label, if the run ended in unanimity.
    pub fn winner(&self) -> Option<i8> {
        match self {
            Outcome::RedWin { .. } => Some(RED),
            Outcome::BlueWin { .. } => Some(BLUE),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::RedWin { .. } => "red_win",
            Outcome::BlueWin { .. } => "blue_win",
            Outcome::StableNonUnanimous { .. } => "stable_non_unanimous",
            Outcome::TwoCycle { .. } => "two_cycle",
            Outcome::DayCapReached { .. } => "day_cap_reached",
        }
    }

    fn negated(&self) -> Self {
        match self {
            Outcome::RedWin { day } => Outcome::BlueWin { day: *day },
            Outcome::BlueWin { day } => Outcome::RedWin { day: *day },
            Outcome::TwoCycle { day, colorings } => Outcome::TwoCycle {
                day: *day,
                colorings: Box::new((colorings.0.negated(), colorings.1.negated())),
            },
            other => other.clone(),
        }
    }
}

/// Per-day counts. `delta = (red - blue) / 2`, a half-integer for odd `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DaySummary {
    pub t: usize,
    pub red: usize,
    pub blue: usize,
    pub delta: f64,
}

impl DaySummary {
    fn of(t: usize, c: &Coloring) -> Self {
        DaySummary {
            t,
            red: c.red_count(),
            blue: c.blue_count(),
            delta: c.advantage(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub n: usize,
    pub days: Vec<DaySummary>,
    pub outcome: Outcome,
    /// Index of the last simulated day.
    pub days_elapsed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colorings: Option<Vec<Coloring>>,
}

impl Trajectory {
    pub fn blue_counts(&self) -> Vec<usize> {
        self.days.iter().map(|d| d.blue).collect()
    }

    /// The advantage on day `t`, extrapolating past the last simulated day
    /// when the run ended in a fixed point or a two-cycle.
    pub fn advantage_on_day(&self, t: usize) -> Option<f64> {
        if let Some(d) = self.days.get(t) {
            return Some(d.delta);
        }
        match &self.outcome {
            Outcome::RedWin { .. } | Outcome::BlueWin { .. } | Outcome::StableNonUnanimous { .. } => {
                self.days.last().map(|d| d.delta)
            }
            Outcome::TwoCycle { day, .. } => {
                let idx = day + (t - day) % 2;
                self.days.get(idx).map(|d| d.delta)
            }
            Outcome::DayCapReached { .. } => None,
        }
    }

    /// The trajectory of the color-swapped initial coloring.
    pub fn negated(&self) -> Self {
        Trajectory {
            n: self.n,
            days: self
                .days
                .iter()
                .map(|d| DaySummary {
                    t: d.t,
                    red: d.blue,
                    blue: d.red,
                    delta: -d.delta,
                })
                .collect(),
            outcome: self.outcome.negated(),
            days_elapsed: self.days_elapsed,
            colorings: self
                .colorings
                .as_ref()
                .map(|cs| cs.iter().map(Coloring::negated).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Maximum number of update steps; `None` means `n + 2`, which can never
    /// be reached because every run becomes periodic with period at most two
    /// within `n` days.
    pub max_days: Option<usize>,
    pub store_colorings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_days: None,
            store_colorings: false,
        }
    }
}

/// Iterates [`step`] from `c0` until unanimity, a fixed point, a two-cycle
/// or `max_days` steps.
pub fn run(g: &Graph, c0: &Coloring, max_days: usize) -> Result<Trajectory> {
    run_with(
        g,
        c0,
        &RunOptions {
            max_days: Some(max_days),
            store_colorings: false,
        },
    )
}

pub fn run_with(g: &Graph, c0: &Coloring, opts: &RunOptions) -> Result<Trajectory> {
    check_sizes(g, c0)?;
    let n = g.n();
    let max_days = opts.max_days.unwrap_or(n + 2);
    if max_days == 0 {
        return Err(Error::parameter("max_days must be at least 1"));
    }

    let mut days = vec![DaySummary::of(0, c0)];
    let mut stored = opts.store_colorings.then(|| vec![c0.clone()]);
    let finish = |days: Vec<DaySummary>, outcome: Outcome, stored: Option<Vec<Coloring>>| {
        let days_elapsed = days.len() - 1;
        Trajectory {
            n,
            days,
            outcome,
            days_elapsed,
            colorings: stored,
        }
    };

    if let Some(label) = c0.unanimous() {
        let outcome = if label == RED {
            Outcome::RedWin { day: 0 }
        } else {
            Outcome::BlueWin { day: 0 }
        };
        return Ok(finish(days, outcome, stored));
    }

    // ring of the last three days: cur = day t, prev = day t-1, older = day t-2
    let mut older = vec![0i8; n];
    let mut prev = vec![0i8; n];
    let mut cur = c0.labels().to_vec();
    let mut hashes = [(0u64, 0u64); 3];
    hashes[0] = content_hash(&cur);

    for day in 1..=max_days {
        std::mem::swap(&mut older, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
        step_into(g, &prev, &mut cur);
        let next = Coloring::from_labels_unchecked(cur.clone());
        let hash = content_hash(&cur);
        hashes = [hash, hashes[0], hashes[1]];
        days.push(DaySummary::of(day, &next));

        let outcome = if let Some(label) = next.unanimous() {
            Some(if label == RED {
                Outcome::RedWin { day }
            } else {
                Outcome::BlueWin { day }
            })
        } else if hashes[0] == hashes[1] && cur == prev {
            Some(Outcome::StableNonUnanimous { day: day - 1 })
        } else if day >= 2 && hashes[0] == hashes[2] && cur == older {
            Some(Outcome::TwoCycle {
                day: day - 2,
                colorings: Box::new((
                    Coloring::from_labels_unchecked(older.clone()),
                    Coloring::from_labels_unchecked(prev.clone()),
                )),
            })
        } else {
            None
        };
        if let Some(s) = stored.as_mut() {
            s.push(next);
        }
        if let Some(outcome) = outcome {
            return Ok(finish(days, outcome, stored));
        }
    }
    Ok(finish(days, Outcome::DayCapReached { day: max_days }, stored))
}

/// One row of the landslide profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LandslideRow {
    pub day: usize,
    pub blue_count: usize,
    /// `|B_{t+1}| / |B_t|`.
    pub ratio: f64,
    /// `C / (pn)`.
    pub bound: f64,
    pub violates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandslideProfile {
    pub rows: Vec<LandslideRow>,
    /// `|B_3|`, when day 3 was simulated or implied by a fixed point.
    pub blue_day3: Option<usize>,
}

impl LandslideProfile {
    pub fn within_bound(&self) -> bool {
        self.rows.iter().all(|r| !r.violates)
    }
}

/// First day of the profiled window.
pub const LANDSLIDE_START_DAY: usize = 3;

/// Shrink ratios of the Blue camp from day 3 on, while `|B_t| > pn/4`,
/// checked against `|B_{t+1}| <= (C/(pn)) |B_t|`.
pub fn landslide_profile(traj: &Trajectory, p: f64, c_landslide: f64) -> LandslideProfile {
    let blue = traj.blue_counts();
    let mut profile = landslide_profile_from_counts(&blue, traj.n, p, c_landslide);
    if profile.blue_day3.is_none() && blue.len() <= LANDSLIDE_START_DAY {
        if let Outcome::RedWin { .. } | Outcome::BlueWin { .. } | Outcome::StableNonUnanimous { .. } =
            traj.outcome
        {
            profile.blue_day3 = blue.last().copied();
        }
    }
    profile
}

/// [`landslide_profile`] over a bare sequence of per-day Blue counts, with
/// `blue[t]` the count on day `t`.
pub fn landslide_profile_from_counts(
    blue: &[usize],
    n: usize,
    p: f64,
    c_landslide: f64,
) -> LandslideProfile {
    let pn = p * n as f64;
    let bound = c_landslide / pn;
    let cutoff = pn / 4.0;
    let mut rows = Vec::new();
    let mut t = LANDSLIDE_START_DAY;
    while t + 1 < blue.len() && blue[t] > 0 && blue[t] as f64 > cutoff {
        let ratio = blue[t + 1] as f64 / blue[t] as f64;
        rows.push(LandslideRow {
            day: t,
            blue_count: blue[t],
            ratio,
            bound,
            violates: ratio > bound,
        });
        t += 1;
    }
    LandslideProfile {
        rows,
        blue_day3: blue.get(LANDSLIDE_START_DAY).copied(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4() -> Graph {
        Graph::from_edge_list(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    fn k5() -> Graph {
        let edges: Vec<_> = (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v))).collect();
        Graph::from_edge_list(5, &edges).unwrap()
    }

    #[test]
    fn c4_alternating_step() {
        let c = Coloring::from_rb_str("RBRB").unwrap();
        assert_eq!(step(&cycle4(), &c).unwrap().to_rb_string(), "BRBR");
    }

    #[test]
    fn isolated_vertices_keep_their_labels() {
        let c = Coloring::from_rb_str("RBBRB").unwrap();
        assert_eq!(step(&Graph::empty(5), &c).unwrap(), c);
    }

    #[test]
    fn k5_majority_step() {
        let c = Coloring::from_rb_str("RRRBB").unwrap();
        assert_eq!(step(&k5(), &c).unwrap().unanimous(), Some(RED));
    }

    #[test]
    fn size_mismatch() {
        let c = Coloring::from_rb_str("RB").unwrap();
        assert!(matches!(step(&k5(), &c), Err(Error::Validation(_))));
    }

    #[test]
    fn run_outcomes() {
        let t = run(&k5(), &Coloring::from_rb_str("RRRBB").unwrap(), 10).unwrap();
        assert_eq!(t.outcome, Outcome::RedWin { day: 1 });

        let t = run(&cycle4(), &Coloring::from_rb_str("RBRB").unwrap(), 10).unwrap();
        match &t.outcome {
            Outcome::TwoCycle { day, colorings } => {
                assert!(*day <= 2);
                assert_eq!(colorings.0.to_rb_string(), "RBRB");
                assert_eq!(colorings.1.to_rb_string(), "BRBR");
            }
            other => panic!("expected a two-cycle, got {other:?}"),
        }

        let t = run(&Graph::empty(5), &Coloring::from_rb_str("RRRBB").unwrap(), 10).unwrap();
        assert_eq!(t.outcome, Outcome::StableNonUnanimous { day: 0 });
    }

    #[test]
    fn day_cap_is_an_outcome() {
        let c = Coloring::from_rb_str("RBRB").unwrap();
        let t = run(&cycle4(), &c, 1).unwrap();
        assert_eq!(t.outcome, Outcome::DayCapReached { day: 1 });
        assert_eq!(t.days_elapsed, 1);
        assert!(run(&cycle4(), &c, 0).is_err());
    }

    #[test]
    fn stored_colorings_match_summaries() {
        let g = crate::graph::generate_gnp(200, 0.05, 1).unwrap();
        let c = crate::coloring::random_half(200, 2);
        let t = run_with(&g, &c, &RunOptions { max_days: None, store_colorings: true }).unwrap();
        let cs = t.colorings.as_ref().unwrap();
        assert_eq!(cs.len(), t.days.len());
        for (d, c) in t.days.iter().zip(cs) {
            assert_eq!(d.red, c.red_count());
        }
    }

    #[test]
    fn landslide_arithmetic() {
        // Blue counts 5 -> 1 -> 0 on days 3, 4, 5; pn/4 < 1 so the window
        // runs until Blue is gone.
        let blue = [80, 50, 20, 5, 1, 0];
        let prof = landslide_profile_from_counts(&blue, 100, 0.01, 100.0);
        let ratios: Vec<f64> = prof.rows.iter().map(|r| r.ratio).collect();
        assert_eq!(ratios, vec![0.2, 0.0]);
        assert_eq!(prof.blue_day3, Some(5));
        // C/(pn) = 100
        assert!(prof.within_bound());
    }

    #[test]
    fn landslide_short_or_red_trajectory_is_empty() {
        let prof = landslide_profile_from_counts(&[0], 100, 0.1, 100.0);
        assert!(prof.rows.is_empty());
        let prof = landslide_profile_from_counts(&[10, 5, 2], 100, 0.1, 100.0);
        assert!(prof.rows.is_empty());
    }

    #[test]
    fn landslide_flags_violations() {
        let blue = [900, 800, 700, 600, 500, 400];
        let prof = landslide_profile_from_counts(&blue, 1000, 0.1, 1.0);
        assert!(prof.rows.iter().all(|r| r.violates));
        // stops once |B_t| <= pn/4 = 25
        let blue = [900, 800, 700, 100, 20, 1];
        let prof = landslide_profile_from_counts(&blue, 1000, 0.1, 100.0);
        assert_eq!(prof.rows.len(), 1);
    }

    #[test]
    fn advantage_extrapolation() {
        let t = run(&k5(), &Coloring::from_rb_str("RRRBB").unwrap(), 10).unwrap();
        assert_eq!(t.advantage_on_day(2), Some(2.5));
        let t = run(&cycle4(), &Coloring::from_rb_str("RRBB").unwrap(), 10).unwrap();
        assert!(t.advantage_on_day(7).is_some());
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_step_matches() {
        let g = crate::graph::generate_gnp(20_000, 0.001, 3).unwrap();
        let c = crate::coloring::random_half(20_000, 4);
        assert_eq!(step(&g, &c).unwrap(), step_par(&g, &c).unwrap());
    }

    #[test]
    fn outcome_json_shape() {
        let t = run(&k5(), &Coloring::from_rb_str("RRRBB").unwrap(), 10).unwrap();
        let v = serde_json::to_value(&t.outcome).unwrap();
        assert_eq!(v, serde_json::json!({"type": "red_win", "day": 1}));
    }
}
