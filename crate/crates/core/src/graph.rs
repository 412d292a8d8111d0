//! Immutable simple undirected graphs in compressed (offset-indexed) form.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Above this edge probability the generator draws one Bernoulli per pair
/// instead of skipping geometrically.
pub const DENSE_CUTOFF: f64 = 0.5;

/// The parameters of one model instance: `G(n, p)` plus the initial Red
/// advantage `delta` and a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: usize,
    pub p: f64,
    #[serde(default)]
    pub delta: usize,
    pub seed: u64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        check_probability(self.p)?;
        if self.delta > self.n / 2 {
            return Err(Error::parameter(format!(
                "delta = {} exceeds n/2 = {}",
                self.delta,
                self.n / 2
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::parameter(format!("edge probability {p} is outside [0, 1]")));
    }
    Ok(())
}

/// Aggregate degree statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphStats {
    pub edge_count: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
}

/// A simple undirected graph on vertices `0..n`.
///
/// Neighbour lists are stored back to back in `neighbors`; the list of `v` is
/// `neighbors[offsets[v]..offsets[v + 1]]` and is strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Graph {
    /// The graph on `n` vertices without edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            offsets: vec![0; n + 1],
            neighbors: Vec::new(),
        }
    }

    /// Builds the graph from edges `(hi, lo)` with `hi > lo`, sorted by
    /// `(hi, lo)` and free of duplicates. Filling in that order leaves every
    /// neighbour list sorted: all lower neighbours of `x` arrive while
    /// `hi == x`, all higher ones afterwards in increasing order.
    fn from_sorted_pairs(n: usize, pairs: &[(u32, u32)]) -> Self {
        let mut degree = vec![0usize; n];
        for &(a, b) in pairs {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut acc = 0;
        for d in &degree {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor: Vec<usize> = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; acc];
        for &(a, b) in pairs {
            neighbors[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
            neighbors[cursor[b as usize]] = a;
            cursor[b as usize] += 1;
        }
        Graph {
            n,
            offsets,
            neighbors,
        }
    }

    /// Builds a graph with exactly the given undirected edges.
    ///
    /// Self-loops, out-of-range endpoints and repeated edges (in either
    /// orientation) are rejected.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(Error::validation(format!("vertex count {n} does not fit in u32")));
        }
        let mut pairs = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::validation(format!(
                    "edge ({u}, {v}) has an endpoint outside [0, {n})"
                )));
            }
            if u == v {
                return Err(Error::validation(format!("self-loop at vertex {u}")));
            }
            pairs.push((u.max(v) as u32, u.min(v) as u32));
        }
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::validation(format!(
                "duplicate edge ({}, {})",
                w[0].1, w[0].0
            )));
        }
        Ok(Self::from_sorted_pairs(n, &pairs))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Iterates over edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn stats(&self) -> GraphStats {
        let degrees = (0..self.n).map(|v| self.degree(v));
        let min_degree = degrees.clone().min().unwrap_or(0);
        let max_degree = degrees.max().unwrap_or(0);
        let mean_degree = if self.n == 0 {
            0.0
        } else {
            self.neighbors.len() as f64 / self.n as f64
        };
        GraphStats {
            edge_count: self.edge_count(),
            min_degree,
            max_degree,
            mean_degree,
        }
    }

    /// Walks the adjacency structure and checks every representation
    /// invariant: symmetry, strict sortedness, no self-loops and an even
    /// degree sum.
    pub fn validate(&self) -> Result<()> {
        if self.offsets.len() != self.n + 1 || self.offsets[self.n] != self.neighbors.len() {
            return Err(Error::validation("offset table does not match neighbour storage"));
        }
        if self.neighbors.len() % 2 != 0 {
            return Err(Error::validation("odd degree sum"));
        }
        for v in 0..self.n {
            let list = self.neighbors(v);
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::validation(format!("neighbour list of {v} is not strictly sorted")));
                }
            }
            for &u in list {
                let u = u as usize;
                if u == v {
                    return Err(Error::validation(format!("self-loop at {v}")));
                }
                if u >= self.n || !self.has_edge(u, v) {
                    return Err(Error::validation(format!("edge ({v}, {u}) is not symmetric")));
                }
            }
        }
        Ok(())
    }

    /// Writes the plain-text edge list: a header line `n m`, then one `u v`
    /// line per edge with `u < v`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.n, self.edge_count())?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Graph::write_edge_list`].
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::validation("missing header line"))??;
        let (n, m) = parse_pair(&header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (u, v) = parse_pair(&line)?;
            if u >= v {
                return Err(Error::validation(format!("edge line `{line}` must have u < v")));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::validation(format!(
                "header announces {m} edges but {} were read",
                edges.len()
            )));
        }
        Self::from_edge_list(n, &edges)
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(Error::validation(format!("malformed line `{line}`"))),
    }
}

/// Samples `G(n, p)`: every unordered pair is present independently with
/// probability `p`. Deterministic in `(n, p, seed)`.
///
/// Sparse instances walk the pair index `(v, w)`, `w < v`, with geometric
/// jumps (Batagelj–Brandes), so the expected cost is `O(n + m)`.
pub fn generate_gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability(p)?;
    if n > u32::MAX as usize {
        return Err(Error::parameter(format!("vertex count {n} does not fit in u32")));
    }
    if n < 2 || p == 0.0 {
        return Ok(Graph::empty(n));
    }
    let mut rng = rng_from_seed(seed);
    let expected = p * (n as f64) * (n as f64 - 1.0) / 2.0;
    let mut pairs: Vec<(u32, u32)> =
        Vec::with_capacity((expected + 4.0 * expected.sqrt() + 16.0) as usize);

    if p >= DENSE_CUTOFF {
        for v in 1..n {
            for w in 0..v {
                if p == 1.0 || rng.random::<f64>() < p {
                    pairs.push((v as u32, w as u32));
                }
            }
        }
    } else {
        let log_q = (-p).ln_1p();
        let n = n as i64;
        let mut v: i64 = 1;
        let mut w: i64 = -1;
        loop {
            let r: f64 = rng.random();
            let jump = ((-r).ln_1p() / log_q).floor();
            // a jump past the remaining pair count ends the walk either way
            w += 1 + jump.min((n * n) as f64) as i64;
            while w >= v && v < n {
                w -= v;
                v += 1;
            }
            if v >= n {
                break;
            }
            pairs.push((v as u32, w as u32));
        }
    }
    Ok(Graph::from_sorted_pairs(n, &pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edge_list(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn complete_graph_at_p_one() {
        let g = generate_gnp(5, 1.0, 99).unwrap();
        assert_eq!(g.edge_count(), 10);
        assert!((0..5).all(|v| g.degree(v) == 4));
        g.validate().unwrap();
    }

    #[test]
    fn empty_graph_at_p_zero() {
        let g = generate_gnp(7, 0.0, 3).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(
            g.stats(),
            GraphStats { edge_count: 0, min_degree: 0, max_degree: 0, mean_degree: 0.0 }
        );
    }

    #[test]
    fn probability_out_of_range_is_rejected() {
        assert!(matches!(generate_gnp(5, 1.5, 0), Err(Error::Parameter(_))));
        assert!(matches!(generate_gnp(5, -0.1, 0), Err(Error::Parameter(_))));
        assert!(matches!(generate_gnp(5, f64::NAN, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn edge_count_window_at_n2000() {
        // mean p * C(2000, 2) = 19990, allow five Poisson-scale deviations
        let g = generate_gnp(2000, 0.01, 42).unwrap();
        let m = g.edge_count() as f64;
        assert!((m - 19990.0).abs() <= 5.0 * 19990f64.sqrt(), "m = {m}");
        g.validate().unwrap();
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_gnp(500, 0.02, 11).unwrap();
        let b = generate_gnp(500, 0.02, 11).unwrap();
        let c = generate_gnp(500, 0.02, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn dense_path_is_valid() {
        let g = generate_gnp(60, 0.7, 5).unwrap();
        g.validate().unwrap();
        let m = g.edge_count() as f64;
        let mean = 0.7 * 1770.0;
        assert!((m - mean).abs() < 5.0 * (1770.0f64 * 0.21).sqrt());
    }

    #[test]
    fn path_from_edge_list() {
        let g = path3();
        assert_eq!((0..3).map(|v| g.degree(v)).collect::<Vec<_>>(), vec![1, 2, 1]);
        let s = g.stats();
        assert_eq!((s.edge_count, s.min_degree, s.max_degree), (2, 1, 2));
        assert!((s.mean_degree - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn k5_stats() {
        let edges: Vec<_> = (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v))).collect();
        let g = Graph::from_edge_list(5, &edges).unwrap();
        assert_eq!(
            g.stats(),
            GraphStats { edge_count: 10, min_degree: 4, max_degree: 4, mean_degree: 4.0 }
        );
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(Graph::from_edge_list(2, &[(0, 0)]), Err(Error::Validation(_))));
        assert!(matches!(Graph::from_edge_list(4, &[(0, 1), (1, 0)]), Err(Error::Validation(_))));
        assert!(matches!(Graph::from_edge_list(3, &[(0, 3)]), Err(Error::Validation(_))));
    }

    #[test]
    fn text_round_trip() {
        let g = generate_gnp(40, 0.2, 8).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("40 {}\n", g.edge_count())));
        let back = Graph::read_edge_list(&buf[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn text_format_errors() {
        assert!(Graph::read_edge_list(&b"3 2\n0 1\n"[..]).is_err());
        assert!(Graph::read_edge_list(&b"3 1\n2 1\n"[..]).is_err());
        assert!(Graph::read_edge_list(&b"3 1\n0 x\n"[..]).is_err());
    }

    #[test]
    fn model_params_validation() {
        let ok = ModelParams { n: 10, p: 0.5, delta: 5, seed: 0 };
        ok.validate().unwrap();
        assert!(ModelParams { delta: 6, ..ok }.validate().is_err());
        assert!(ModelParams { p: 2.0, ..ok }.validate().is_err());
        let parsed: std::result::Result<ModelParams, _> =
            serde_json::from_str(r#"{"n": 10, "p": 0.5, "delta": 2.5, "seed": 1}"#);
        assert!(parsed.is_err(), "fractional delta must be rejected");
    }
}
