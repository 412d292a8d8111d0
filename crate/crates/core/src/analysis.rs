//! Day-one diagnostics of the balanced and defected processes: signed
//! discrepancies, almost-Red sets, flipping and vulnerable vertices, and
//! neighbourhood regularity reports.

use serde::Serialize;

use crate::coloring::{Coloring, DefectorScenario, BLUE, RED};
use crate::dynamics::{check_sizes, neighbor_sum, step};
use crate::graph::Graph;
use crate::{par, Error, Result};

fn check_vertex(g: &Graph, v: usize) -> Result<()> {
    if v >= g.n() {
        return Err(Error::parameter(format!(
            "vertex {v} out of range for n = {}",
            g.n()
        )));
    }
    Ok(())
}

fn check_scenario(g: &Graph, scen: &DefectorScenario) -> Result<()> {
    check_sizes(g, &scen.hat_coloring)?;
    check_sizes(g, &scen.coloring)?;
    if !scen.is_consistent() {
        return Err(Error::validation(
            "defector scenario is inconsistent: swing set must be balanced Blue turned Red",
        ));
    }
    Ok(())
}

/// `d_R(v) - d_B(v)` under `c`, i.e. `Σ_{u ∈ N(v)} c(u)`.
pub fn signed_discrepancy(g: &Graph, c: &Coloring, v: usize) -> Result<i64> {
    check_sizes(g, c)?;
    check_vertex(g, v)?;
    Ok(neighbor_sum(g, c.labels(), v) as i64)
}

/// Signed discrepancy of every vertex.
pub fn discrepancies(g: &Graph, c: &Coloring) -> Result<Vec<i64>> {
    check_sizes(g, c)?;
    Ok((0..g.n())
        .map(|v| neighbor_sum(g, c.labels(), v) as i64)
        .collect())
}

/// The set `A` of `D`-almost Red vertices: those whose day-one balanced
/// neighbourhood sum is at least `-D`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlmostRedReport {
    #[serde(rename = "D")]
    pub d: i64,
    pub members: Vec<usize>,
    pub count: usize,
    /// `|A| - n/2`
    pub excess: f64,
}

impl AlmostRedReport {
    /// Builds the report from precomputed day-one sums `Σ_{u ∈ N(v)} ℓ̂₁(u)`.
    pub fn from_day1_sums(sums: &[i64], d: i64) -> Result<Self> {
        if d < 0 {
            return Err(Error::parameter(format!("D = {d} must be non-negative")));
        }
        let members: Vec<usize> = (0..sums.len()).filter(|&v| sums[v] >= -d).collect();
        let count = members.len();
        Ok(AlmostRedReport {
            d,
            members,
            count,
            excess: count as f64 - sums.len() as f64 / 2.0,
        })
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// `Σ_{u ∈ N(v)} ℓ̂₁(u)` for every `v`, where `ℓ̂₁ = step(g, ℓ̂₀)`.
pub fn day1_sums(g: &Graph, hat0: &Coloring) -> Result<Vec<i64>> {
    let hat1 = step(g, hat0)?;
    discrepancies(g, &hat1)
}

pub fn almost_red_set(g: &Graph, hat0: &Coloring, d: i64) -> Result<AlmostRedReport> {
    AlmostRedReport::from_day1_sums(&day1_sums(g, hat0)?, d)
}

/// Vertices Blue on day one of the balanced process but Red on day one of
/// the defected one.
pub fn flipping_set(g: &Graph, scen: &DefectorScenario) -> Result<Vec<usize>> {
    check_scenario(g, scen)?;
    let hat1 = step(g, &scen.hat_coloring)?;
    let cur1 = step(g, &scen.coloring)?;
    Ok((0..g.n())
        .filter(|&u| hat1.label(u) == BLUE && cur1.label(u) == RED)
        .collect())
}

fn is_vulnerable(g: &Graph, hat0: &Coloring, swing: &[bool], u: usize) -> bool {
    let (mut red, mut blue_rest, mut in_swing) = (0usize, 0usize, 0usize);
    for &w in g.neighbors(u) {
        let w = w as usize;
        if swing[w] {
            in_swing += 1;
        } else if hat0.label(w) == RED {
            red += 1;
        } else {
            blue_rest += 1;
        }
    }
    in_swing >= 1 && red == blue_rest
}

/// Vertices with `d_{R̂₀}(u) = d_{B̂₀ \ S}(u)` and at least one neighbour in
/// the swing set `S`.
pub fn vulnerable_set(g: &Graph, scen: &DefectorScenario) -> Result<Vec<usize>> {
    check_scenario(g, scen)?;
    let swing = scen.swing_mask();
    Ok((0..g.n())
        .filter(|&u| is_vulnerable(g, &scen.hat_coloring, &swing, u))
        .collect())
}

/// One named threshold test inside a [`RegularityReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub value: f64,
    /// Inclusive lower end; absent for one-sided conditions.
    pub lower: Option<f64>,
    pub upper: f64,
    pub pass: bool,
}

impl Condition {
    fn at_most(name: &'static str, value: f64, upper: f64) -> Self {
        Condition {
            name,
            value,
            lower: None,
            upper,
            pass: value <= upper,
        }
    }

    fn window(name: &'static str, value: f64, center: f64, half: f64) -> Self {
        Condition {
            name,
            value,
            lower: Some(center - half),
            upper: center + half,
            pass: (value - center).abs() <= half,
        }
    }
}

/// Colour split of the common and private parts of a pair of neighbourhoods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairStats {
    pub second: usize,
    pub u13_plus: usize,
    pub u13_minus: usize,
    pub u23_plus: usize,
    pub u23_minus: usize,
    pub u3_plus: usize,
    pub u3_minus: usize,
    /// `1ᵀ d_U` restricted to `U₁₃`.
    pub d_sum_13: i64,
    /// `1ᵀ d_U` restricted to `U₂₃`.
    pub d_sum_23: i64,
}

/// Statistics of a neighbourhood `U` and its induced subgraph `H`, checked
/// against the `√(pn ln n)`-scale windows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub v: usize,
    pub p: f64,
    pub ln_n: f64,
    pub u_size: usize,
    pub u_plus: usize,
    pub u_minus: usize,
    pub d_inf: i64,
    /// `‖d_U‖₂²`, kept exact.
    pub d_l2_sq: i64,
    pub d_l2: f64,
    pub d_sum: i64,
    pub pair: Option<PairStats>,
    pub conditions: Vec<Condition>,
    pub regular: bool,
}

impl RegularityReport {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

// membership bits for the pair partition; both bits set marks U₃
const OUT: u8 = 0;
const ONLY_FIRST: u8 = 1;
const ONLY_SECOND: u8 = 2;

/// Regularity of `U = N(v) \ {v, pair}` (single form) or of the partition
/// `U₁ = N(v) \ N(w)`, `U₂ = N(w) \ N(v)`, `U₃ = N(v) ∩ N(w)` minus `{v, w}`
/// (pair form with `w = pair`). `d_U[u] = Σ_{x ∈ N(u) ∩ U} ℓ̂₀(x)` is taken
/// over the induced subgraph only. Logarithms are natural.
pub fn regularity_report(
    g: &Graph,
    hat0: &Coloring,
    v: usize,
    pair: Option<usize>,
    p: f64,
) -> Result<RegularityReport> {
    check_sizes(g, hat0)?;
    check_vertex(g, v)?;
    crate::graph::check_probability(p)?;
    let n = g.n();
    if n < 3 {
        return Err(Error::parameter(format!("regularity needs n >= 3, got {n}")));
    }
    if let Some(w) = pair {
        check_vertex(g, w)?;
        if w == v {
            return Err(Error::parameter("pair vertex must differ from v"));
        }
    }

    let mut tag = vec![OUT; n];
    for &u in g.neighbors(v) {
        tag[u as usize] |= ONLY_FIRST;
    }
    if let Some(w) = pair {
        for &u in g.neighbors(w) {
            tag[u as usize] |= ONLY_SECOND;
        }
        tag[w] = OUT;
    }
    tag[v] = OUT;
    let members: Vec<usize> = (0..n).filter(|&u| tag[u] != OUT).collect();

    let labels = hat0.labels();
    let (mut u_plus, mut u_minus) = (0usize, 0usize);
    let (mut d_inf, mut d_l2_sq, mut d_sum) = (0i64, 0i64, 0i64);
    let mut split = [[0usize; 2]; 4];
    let (mut d_sum_13, mut d_sum_23) = (0i64, 0i64);
    for &u in &members {
        let side = usize::from(labels[u] != RED);
        if side == 0 {
            u_plus += 1;
        } else {
            u_minus += 1;
        }
        split[tag[u] as usize][side] += 1;
        let du: i64 = g
            .neighbors(u)
            .iter()
            .filter(|&&x| tag[x as usize] != OUT)
            .map(|&x| labels[x as usize] as i64)
            .sum();
        d_inf = d_inf.max(du.abs());
        d_l2_sq += du * du;
        d_sum += du;
        if tag[u] & ONLY_FIRST != 0 {
            d_sum_13 += du;
        }
        if tag[u] & ONLY_SECOND != 0 {
            d_sum_23 += du;
        }
    }

    let ln_n = (n as f64).ln();
    let pn = p * n as f64;
    let center = pn / 2.0;
    let half = 3.0 * (pn * ln_n).sqrt();
    let d_l2 = (d_l2_sq as f64).sqrt();
    let mut conditions = Vec::new();
    let pair_stats = match pair {
        None => {
            conditions.push(Condition::window("u_plus", u_plus as f64, center, half));
            conditions.push(Condition::window("u_minus", u_minus as f64, center, half));
            conditions.push(Condition::at_most("d_inf", d_inf as f64, ln_n));
            conditions.push(Condition::at_most("d_sum", d_sum.abs() as f64, 5.0 * ln_n));
            conditions.push(Condition::at_most("d_l2", d_l2, half));
            None
        }
        Some(second) => {
            let [_, first, only2, both] = split;
            let stats = PairStats {
                second,
                u13_plus: first[0] + both[0],
                u13_minus: first[1] + both[1],
                u23_plus: only2[0] + both[0],
                u23_minus: only2[1] + both[1],
                u3_plus: both[0],
                u3_minus: both[1],
                d_sum_13,
                d_sum_23,
            };
            let window = |name, x: usize| Condition::window(name, x as f64, center, half);
            conditions.push(window("u13_plus", stats.u13_plus));
            conditions.push(window("u13_minus", stats.u13_minus));
            conditions.push(window("u23_plus", stats.u23_plus));
            conditions.push(window("u23_minus", stats.u23_minus));
            conditions.push(Condition::at_most("u3_plus", stats.u3_plus as f64, ln_n));
            conditions.push(Condition::at_most("u3_minus", stats.u3_minus as f64, ln_n));
            conditions.push(Condition::at_most("d_inf", d_inf as f64, ln_n));
            conditions.push(Condition::at_most("d_l2", d_l2, half));
            conditions.push(Condition::at_most("d_sum_13", d_sum_13.abs() as f64, 5.0 * ln_n));
            conditions.push(Condition::at_most("d_sum_23", d_sum_23.abs() as f64, 5.0 * ln_n));
            Some(stats)
        }
    };
    let regular = conditions.iter().all(|c| c.pass);
    Ok(RegularityReport {
        v,
        p,
        ln_n,
        u_size: members.len(),
        u_plus,
        u_minus,
        d_inf,
        d_l2_sq,
        d_l2,
        d_sum,
        pair: pair_stats,
        conditions,
        regular,
    })
}

/// One row of the per-vertex analysis table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexRecord {
    pub vertex: usize,
    /// `Σ_{u ∈ N(v)} ℓ̂₁(u)`, the quantity compared against `-D`.
    pub discrepancy: i64,
    pub almost_red: bool,
    pub vulnerable: bool,
    pub flipping: bool,
    pub regular: bool,
}

/// Per-vertex diagnostics of a defector scenario on `g`.
pub fn analyze_instance(
    g: &Graph,
    scen: &DefectorScenario,
    d: i64,
    p: f64,
    workers: usize,
) -> Result<Vec<VertexRecord>> {
    check_scenario(g, scen)?;
    if d < 0 {
        return Err(Error::parameter(format!("D = {d} must be non-negative")));
    }
    let sums = day1_sums(g, &scen.hat_coloring)?;
    let mut flipping = vec![false; g.n()];
    for u in flipping_set(g, scen)? {
        flipping[u] = true;
    }
    let swing = scen.swing_mask();
    let hat0 = &scen.hat_coloring;
    let regular: Vec<Result<bool>> = if g.n() >= 3 {
        par::map_indexed(g.n(), workers, |v| {
            regularity_report(g, hat0, v, None, p).map(|r| r.regular)
        })
    } else {
        (0..g.n()).map(|_| Ok(false)).collect()
    };
    (0..g.n())
        .zip(regular)
        .map(|(v, reg)| {
            Ok(VertexRecord {
                vertex: v,
                discrepancy: sums[v],
                almost_red: sums[v] >= -d,
                vulnerable: is_vulnerable(g, hat0, &swing, v),
                flipping: flipping[v],
                regular: reg?,
            })
        })
        .collect()
}

/// Writes per-vertex rows as CSV with the columns
/// `vertex,discrepancy,almost_red@D,vulnerable,flipping,regular`.
pub fn write_vertex_csv<W: std::io::Write>(rows: &[VertexRecord], d: i64, out: W) -> Result<()> {
    let to_err = |e: csv::Error| Error::validation(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let almost = format!("almost_red@{d}");
    w.write_record(["vertex", "discrepancy", almost.as_str(), "vulnerable", "flipping", "regular"])
        .map_err(to_err)?;
    for r in rows {
        w.serialize((r.vertex, r.discrepancy, r.almost_red, r.vulnerable, r.flipping, r.regular))
            .map_err(to_err)?;
    }
    w.flush()?;
    Ok(())
}
