//! Red/Blue colorings and the three initial coloring schemes.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{rng_from_seed, SimRng};
use crate::{Error, Result};

pub const RED: i8 = 1;
pub const BLUE: i8 = -1;

/// A `±1` label per vertex (`+1` Red, `-1` Blue) with a cached Red count.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    labels: Vec<i8>,
    red_count: usize,
}

impl Coloring {
    pub fn from_labels(labels: Vec<i8>) -> Result<Self> {
        if let Some(v) = labels.iter().position(|&l| l != RED && l != BLUE) {
            return Err(Error::validation(format!("label of vertex {v} is not ±1")));
        }
        Ok(Self::from_labels_unchecked(labels))
    }

    pub(crate) fn from_labels_unchecked(labels: Vec<i8>) -> Self {
        let red_count = labels.iter().filter(|&&l| l == RED).count();
        Coloring { labels, red_count }
    }

    /// All vertices Blue except those listed.
    pub fn from_red_set(n: usize, red: &[usize]) -> Result<Self> {
        let mut labels = vec![BLUE; n];
        for &v in red {
            if v >= n {
                return Err(Error::validation(format!("vertex {v} outside [0, {n})")));
            }
            labels[v] = RED;
        }
        Ok(Self::from_labels_unchecked(labels))
    }

    pub fn uniform(n: usize, label: i8) -> Self {
        Self::from_labels_unchecked(vec![label; n])
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, v: usize) -> i8 {
        self.labels[v]
    }

    #[inline]
    pub fn is_red(&self, v: usize) -> bool {
        self.labels[v] == RED
    }

    pub fn red_count(&self) -> usize {
        self.red_count
    }

    pub fn blue_count(&self) -> usize {
        self.labels.len() - self.red_count
    }

    /// `(|R| - |B|) / 2`.
    pub fn advantage(&self) -> f64 {
        (self.red_count as f64 - self.blue_count() as f64) / 2.0
    }

    /// `Some(label)` when every vertex carries the same label. The empty
    /// coloring is not unanimous.
    pub fn unanimous(&self) -> Option<i8> {
        if self.labels.is_empty() {
            None
        } else if self.red_count == self.labels.len() {
            Some(RED)
        } else if self.red_count == 0 {
            Some(BLUE)
        } else {
            None
        }
    }

    pub fn red_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().enumerate().filter(|(_, &l)| l == RED).map(|(v, _)| v)
    }

    pub fn negated(&self) -> Self {
        Coloring {
            labels: self.labels.iter().map(|&l| -l).collect(),
            red_count: self.blue_count(),
        }
    }

    /// `true` when `self(v) <= other(v)` for every vertex.
    pub fn le_pointwise(&self, other: &Coloring) -> bool {
        self.labels.len() == other.labels.len()
            && self.labels.iter().zip(&other.labels).all(|(a, b)| a <= b)
    }

    /// One character per vertex from `{R, B}`.
    pub fn to_rb_string(&self) -> String {
        self.labels.iter().map(|&l| if l == RED { 'R' } else { 'B' }).collect()
    }

    pub fn from_rb_str(s: &str) -> Result<Self> {
        let labels = s
            .trim_end_matches(['\n', '\r'])
            .chars()
            .map(|c| match c {
                'R' => Ok(RED),
                'B' => Ok(BLUE),
                other => Err(Error::validation(format!("unexpected character {other:?} in coloring"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_labels_unchecked(labels))
    }
}

impl Serialize for Coloring {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_rb_string())
    }
}

impl<'de> Deserialize<'de> for Coloring {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Coloring::from_rb_str(&s).map_err(serde::de::Error::custom)
    }
}

/// A balanced coloring, a swing set drawn from its Blue side, and the
/// coloring obtained by flipping the swing set to Red.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefectorScenario {
    pub hat_coloring: Coloring,
    /// Sorted vertex ids of the defectors.
    pub swing_set: Vec<usize>,
    pub coloring: Coloring,
}

impl DefectorScenario {
    pub fn n(&self) -> usize {
        self.coloring.n()
    }

    pub fn delta(&self) -> usize {
        self.swing_set.len()
    }

    /// Membership mask of the swing set.
    pub fn swing_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n()];
        for &v in &self.swing_set {
            mask[v] = true;
        }
        mask
    }

    /// Checks that the swing set lies in the balanced Blue side and that the
    /// two colorings differ exactly on it.
    pub fn is_consistent(&self) -> bool {
        let n = self.n();
        if self.hat_coloring.n() != n || self.hat_coloring.red_count() != n.div_ceil(2) {
            return false;
        }
        let mask = self.swing_mask();
        (0..n).all(|v| {
            let hat = self.hat_coloring.label(v);
            let now = self.coloring.label(v);
            if mask[v] {
                hat == BLUE && now == RED
            } else {
                hat == now
            }
        })
    }
}

/// Shuffles the first `k` slots of `0..n` into a uniform ordered `k`-sample.
fn partial_shuffle(n: usize, k: usize, rng: &mut SimRng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let (head, _) = idx.partial_shuffle(rng, k);
    debug_assert_eq!(head.len(), k);
    idx
}

/// Number of Red vertices under the fixed advantage scheme: `⌈n/2 + Δ⌉`.
pub fn fixed_advantage_red_count(n: usize, delta: usize) -> usize {
    n.div_ceil(2) + delta
}

/// Red set uniform among subsets of size `⌈n/2 + Δ⌉`.
pub fn fixed_advantage(n: usize, delta: usize, seed: u64) -> Result<Coloring> {
    let k = fixed_advantage_red_count(n, delta);
    if k > n {
        return Err(Error::parameter(format!(
            "delta = {delta} needs {k} Red vertices but n = {n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let order = partial_shuffle(n, k, &mut rng);
    Coloring::from_red_set(n, &order[..k])
}

/// Every label independently Red or Blue with probability 1/2.
pub fn random_half(n: usize, seed: u64) -> Coloring {
    let mut rng = rng_from_seed(seed);
    let labels = (0..n).map(|_| if rng.random::<bool>() { RED } else { BLUE }).collect();
    Coloring::from_labels_unchecked(labels)
}

/// Balanced coloring with `⌈n/2⌉` Red vertices, then `Δ` defectors sampled
/// uniformly from its Blue side and flipped to Red.
pub fn balanced_with_defectors(n: usize, delta: usize, seed: u64) -> Result<DefectorScenario> {
    let red = n.div_ceil(2);
    let blue = n - red;
    if delta > blue {
        return Err(Error::parameter(format!(
            "delta = {delta} exceeds the {blue} Blue vertices of the balanced coloring"
        )));
    }
    let mut rng = rng_from_seed(seed);
    // the first `red` slots form the balanced Red side; the next `delta`
    // slots are a uniform sample of the remaining (Blue) vertices
    let order = partial_shuffle(n, red + delta, &mut rng);
    let hat_coloring = Coloring::from_red_set(n, &order[..red])?;
    let mut swing_set = order[red..red + delta].to_vec();
    swing_set.sort_unstable();
    let coloring = Coloring::from_red_set(n, &order[..red + delta])?;
    Ok(DefectorScenario {
        hat_coloring,
        swing_set,
        coloring,
    })
}
