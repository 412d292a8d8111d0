//! Binomial tail bounds, exact binomial oracles and the closed-form day-one
//! estimates used to sanity-check simulations.
//!
//! Exact probabilities are evaluated in log space through Loader's
//! saddle-point form of the binomial pmf (Stirling remainders plus a
//! deviance term), which stays accurate to a few ulps of the result even for
//! `n` in the millions.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest `n` accepted by [`exact_tail`].
pub const EXACT_TAIL_CUTOFF: u64 = 1_000_000;

/// Tunable stand-ins for the unspecified universal constants of the theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsConfig {
    /// `C` in `|B_{t+1}| <= (C / pn) |B_t|`.
    pub c_landslide: f64,
    /// `C_ε` in `Δ >= C_ε p^{-3/2} n^{-1/2} ln n`.
    pub c_threshold: f64,
    /// `c_B` in `E|A| >= n/2 + c_B D sqrt(n/p)`.
    pub c_almost_red: f64,
    /// `c` in `Σ_v ℓ_2(v) >= 2 c Δ p n`.
    pub c_day2: f64,
    /// Constant in `Var|A| <= c_var n ln²n / p`.
    pub c_var: f64,
    /// Largest `m` for which the collision probability is summed exactly.
    pub exact_collision_cutoff: u64,
    pub gaussian_cdf_tolerance: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            c_landslide: 100.0,
            c_threshold: 1.0,
            c_almost_red: 0.01,
            c_day2: 0.05,
            c_var: 1.0,
            exact_collision_cutoff: 1_000_000,
            gaussian_cdf_tolerance: 1e-7,
        }
    }
}

impl ConstantsConfig {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("c_landslide", self.c_landslide),
            ("c_threshold", self.c_threshold),
            ("c_almost_red", self.c_almost_red),
            ("c_day2", self.c_day2),
            ("c_var", self.c_var),
            ("gaussian_cdf_tolerance", self.gaussian_cdf_tolerance),
        ];
        for (name, value) in named {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {value}")));
            }
        }
        if self.exact_collision_cutoff < 1 {
            return Err(Error::config("exact_collision_cutoff must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `P(X >= t)`
    Upper,
    /// `P(X <= t)`
    Lower,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Side::Upper),
            "lower" => Ok(Side::Lower),
            other => Err(Error::parameter(format!("unknown side `{other}` (upper|lower)"))),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Upper => "upper",
            Side::Lower => "lower",
        })
    }
}

/// A one-sided tail event of `X ~ Bin(n, p)` at a real threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailQuery {
    pub n: u64,
    pub p: f64,
    pub threshold: f64,
    pub side: Side,
}

impl TailQuery {
    /// Distance of the threshold from the mean, as a fraction of `n`.
    pub fn epsilon(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let frac = self.threshold / self.n as f64;
        match self.side {
            Side::Upper => frac - self.p,
            Side::Lower => self.p - frac,
        }
    }

    pub fn chernoff(&self) -> f64 {
        chernoff_tail(self.n, self.p, self.epsilon(), self.side)
    }

    pub fn exact(&self) -> Result<f64> {
        exact_tail(self.n, self.p, self.threshold, self.side)
    }
}

/// `x ln(x / y)` with `0 ln 0 = 0` and `+∞` when `y = 0 < x`.
fn xlogy_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).ln()
    }
}

/// Bernoulli relative entropy `D(x ‖ y)`; `+∞` when `y ∈ {0, 1}` and
/// `x ≠ y`.
pub fn kl_divergence(x: f64, y: f64) -> f64 {
    let d = xlogy_ratio(x, y) + xlogy_ratio(1.0 - x, 1.0 - y);
    // rounding can leave a tiny negative residue near x = y
    d.max(0.0)
}

/// Chernoff bound `exp(-D(p ± ε ‖ p) n)` on `P(X >= (p + ε) n)` (upper) or
/// `P(X <= (p - ε) n)` (lower). Outside `0 < ε < 1 - p` (upper) or
/// `0 < ε < p` (lower) the trivial bound `1` is returned.
pub fn chernoff_tail(n: u64, p: f64, eps: f64, side: Side) -> f64 {
    let x = match side {
        Side::Upper if eps > 0.0 && eps < 1.0 - p => p + eps,
        Side::Lower if eps > 0.0 && eps < p => p - eps,
        _ => return 1.0,
    };
    (-kl_divergence(x, p) * n as f64).exp()
}

/// Lower bound `1 - 2 exp(-t² / (2 (1 + t / (3 sqrt(pn)))))` on
/// `P(|X - pn| <= t sqrt(pn))`.
pub fn window_bound(n: u64, p: f64, t: f64) -> Result<f64> {
    let pn = p * n as f64;
    if !(pn > 0.0) {
        return Err(Error::parameter("window bound needs pn > 0"));
    }
    if !(t > 0.0) {
        return Err(Error::parameter(format!("window half-width t = {t} must be positive")));
    }
    Ok(1.0 - 2.0 * (-t * t / (2.0 * (1.0 + t / (3.0 * pn.sqrt())))).exp())
}

/// Poisson-type bound `2 (e p n / t)^t` on `P(X > t)`, valid for
/// `t >= e p n`.
pub fn poisson_tail_bound(n: u64, p: f64, t: f64) -> Result<f64> {
    let epn = E * p * n as f64;
    if !(t >= epn) {
        return Err(Error::parameter(format!(
            "poisson tail bound needs t >= e p n = {epn}, got t = {t}"
        )));
    }
    if t == 0.0 {
        return Ok(2.0);
    }
    Ok(2.0 * (epn / t).powf(t))
}

// Stirling remainders ln k! - [(k + 1/2) ln k - k + ln sqrt(2π)] for k <= 15.
const STIRLERR_SMALL: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_219_670_2,
    0.041_340_695_955_409_294_093_822_1,
    0.027_677_925_684_998_339_148_789_29,
    0.020_790_672_103_765_093_111_522_77,
    0.016_644_691_189_821_192_163_194_87,
    0.013_876_128_823_070_747_998_745_73,
    0.011_896_709_945_891_770_095_055_72,
    0.010_411_265_261_972_096_497_478_567,
    0.009_255_462_182_712_732_917_728_637,
    0.008_330_563_433_362_871_256_469_318,
    0.007_573_675_487_951_840_794_972_024,
    0.006_942_840_107_209_529_865_664_152,
    0.006_408_994_188_004_207_068_439_631,
    0.005_951_370_112_758_847_735_624_416,
    0.005_554_733_551_962_801_371_038_690,
];

const S0: f64 = 1.0 / 12.0;
const S1: f64 = 1.0 / 360.0;
const S2: f64 = 1.0 / 1260.0;
const S3: f64 = 1.0 / 1680.0;
const S4: f64 = 1.0 / 1188.0;
const S5: f64 = 691.0 / 360_360.0;
const S6: f64 = 1.0 / 156.0;

/// Stirling-series remainder for a non-negative integer argument.
fn stirlerr(k: u64) -> f64 {
    if k <= 15 {
        return STIRLERR_SMALL[k as usize];
    }
    let x = k as f64;
    let xx = x * x;
    if x > 15.7e6 {
        S0 / x
    } else if x > 6180.0 {
        (S0 - S1 / xx) / x
    } else if x > 205.0 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if x > 86.0 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else if x > 27.0 {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - (S4 - (S5 - S6 / xx) / xx) / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x / m) + m - x`, computed without cancellation when
/// `x` is close to `m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let d = x - m;
        let mut v = d / (x + m);
        let mut s = d * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `P(Bin(n, p) = k)`.
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    if k == 0 {
        return (n as f64 * (-p).ln_1p()).exp();
    }
    if k == n {
        return (n as f64 * p.ln()).exp();
    }
    let (nf, kf) = (n as f64, k as f64);
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * p) - bd0(nf - kf, nf * q);
    let lf = (2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

fn check_tail_args(n: u64, p: f64) -> Result<()> {
    crate::graph::check_probability(p)?;
    if n > EXACT_TAIL_CUTOFF {
        return Err(Error::parameter(format!(
            "exact tail refused for n = {n} > {EXACT_TAIL_CUTOFF}"
        )));
    }
    Ok(())
}

/// Sums the pmf over `lo..=hi`, starting from the end farther from the mode.
fn pmf_sum(n: u64, p: f64, lo: u64, hi: u64) -> f64 {
    if lo > hi {
        return 0.0;
    }
    let mode = p * n as f64;
    let s: f64 = if (hi as f64 - mode).abs() > (lo as f64 - mode).abs() {
        (lo..=hi).rev().map(|k| binomial_pmf(n, k, p)).sum()
    } else {
        (lo..=hi).map(|k| binomial_pmf(n, k, p)).sum()
    };
    s.min(1.0)
}

/// Exact `P(X >= t)` or `P(X <= t)` for `X ~ Bin(n, p)` by pmf summation.
pub fn exact_tail(n: u64, p: f64, t: f64, side: Side) -> Result<f64> {
    check_tail_args(n, p)?;
    if t.is_nan() {
        return Err(Error::parameter("threshold is NaN"));
    }
    let nf = n as f64;
    Ok(match side {
        Side::Upper => {
            if t <= 0.0 {
                1.0
            } else if t > nf {
                0.0
            } else {
                pmf_sum(n, p, t.ceil() as u64, n)
            }
        }
        Side::Lower => {
            if t < 0.0 {
                0.0
            } else if t >= nf {
                1.0
            } else {
                pmf_sum(n, p, 0, t.floor() as u64)
            }
        }
    })
}

/// Exact `P(|X - pn| <= t sqrt(pn))`.
pub fn exact_window_coverage(n: u64, p: f64, t: f64) -> Result<f64> {
    check_tail_args(n, p)?;
    let pn = p * n as f64;
    let w = t * pn.sqrt();
    // guard the end points against rounding in t * sqrt(pn)
    let lo = (pn - w - 1e-9).ceil().max(0.0);
    let hi = (pn + w + 1e-9).floor().min(n as f64);
    if lo > hi {
        return Ok(0.0);
    }
    let (lo, hi) = (lo as u64, hi as u64);
    let inside = pmf_sum(n, p, lo, hi);
    if inside <= 0.5 {
        return Ok(inside);
    }
    // near 1 the complement is the accurate quantity
    let below = if lo == 0 { 0.0 } else { pmf_sum(n, p, 0, lo - 1) };
    let above = if hi == n { 0.0 } else { pmf_sum(n, p, hi + 1, n) };
    Ok((1.0 - below - above).clamp(0.0, 1.0))
}

/// Standard Gaussian CDF.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionMethod {
    Exact,
    LocalClt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollisionProbability {
    pub value: f64,
    pub method: CollisionMethod,
}

/// `P(Z⁺ = Z⁻)` for independent `Z⁺, Z⁻ ~ Bin(m, p)`: exact `Σ_k pmf(k)²`
/// up to `exact_cutoff`, the local-CLT value `1 / (2 sqrt(π p (1-p) m))`
/// beyond it.
pub fn collision_probability(m: u64, p: f64, exact_cutoff: u64) -> CollisionProbability {
    if m == 0 || p == 0.0 || p == 1.0 {
        return CollisionProbability {
            value: 1.0,
            method: CollisionMethod::Exact,
        };
    }
    if m <= exact_cutoff {
        let value = (0..=m).map(|k| binomial_pmf(m, k, p).powi(2)).sum();
        CollisionProbability {
            value,
            method: CollisionMethod::Exact,
        }
    } else {
        CollisionProbability {
            value: local_clt_collision(m, p),
            method: CollisionMethod::LocalClt,
        }
    }
}

pub fn local_clt_collision(m: u64, p: f64) -> f64 {
    1.0 / (2.0 * (PI * p * (1.0 - p) * m as f64).sqrt())
}

/// The Gaussian day-one estimate of `P(v is D-almost Red)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlmostRedEstimate {
    pub value: f64,
    /// Argument of `Φ`.
    pub argument: f64,
    pub collision: CollisionProbability,
    /// Scale `1 / sqrt(pn)` of the unquantified approximation error.
    pub error_scale: f64,
}

/// `Φ(D / (2 sqrt(pn)) + 2 sign P(Z⁺ = Z⁻) sqrt(pn))`, with
/// `Z± ~ Bin(⌊n/2⌋ - ⌈pn⌉, p)` and `sign = ℓ̂_0(v)`.
pub fn almost_red_probability_estimate(
    n: u64,
    p: f64,
    d: i64,
    sign: i8,
    constants: &ConstantsConfig,
) -> Result<AlmostRedEstimate> {
    let pn = p * n as f64;
    if !(pn > 0.0) {
        return Err(Error::parameter("estimate needs pn > 0"));
    }
    let m = (n / 2) as i64 - pn.ceil() as i64;
    if m < 0 {
        return Err(Error::parameter(format!("n/2 - ceil(pn) = {m} is negative")));
    }
    let collision = collision_probability(m as u64, p, constants.exact_collision_cutoff);
    almost_red_probability_from_collision(pn, d, sign, collision)
}

/// Same as [`almost_red_probability_estimate`] with the collision
/// probability supplied by the caller.
pub fn almost_red_probability_from_collision(
    pn: f64,
    d: i64,
    sign: i8,
    collision: CollisionProbability,
) -> Result<AlmostRedEstimate> {
    if sign != 1 && sign != -1 {
        return Err(Error::parameter(format!("sign must be ±1, got {sign}")));
    }
    if d < 0 {
        return Err(Error::parameter(format!("D = {d} must be non-negative")));
    }
    let root = pn.sqrt();
    let argument = d as f64 / (2.0 * root) + 2.0 * sign as f64 * collision.value * root;
    Ok(AlmostRedEstimate {
        value: gaussian_cdf(argument).clamp(0.0, 1.0),
        argument,
        collision,
        error_scale: 1.0 / root,
    })
}

/// Theory-side thresholds evaluated with the configured constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryThresholds {
    pub n: u64,
    pub p: f64,
    /// `C_ε p^{-3/2} n^{-1/2} ln n`
    pub delta_min: f64,
    /// `c_var n ln²n / p`
    pub var_a_upper: f64,
    pub c_almost_red: f64,
}

impl TheoryThresholds {
    /// `c_B D sqrt(n / p)`: lower bound on `E|A| - n/2`.
    pub fn expected_a_excess_lower(&self, d: f64) -> f64 {
        self.c_almost_red * d * (self.n as f64 / self.p).sqrt()
    }
}

pub fn theory_thresholds(n: u64, p: f64, constants: &ConstantsConfig) -> Result<TheoryThresholds> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::parameter(format!("thresholds need 0 < p < 1, got {p}")));
    }
    if n < 3 {
        return Err(Error::parameter(format!("thresholds need n >= 3, got {n}")));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    Ok(TheoryThresholds {
        n,
        p,
        delta_min: constants.c_threshold * p.powf(-1.5) * nf.powf(-0.5) * ln_n,
        var_a_upper: constants.c_var * nf * ln_n * ln_n / p,
        c_almost_red: constants.c_almost_red,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 50-digit arithmetic (mpmath).
    const KL_08_05: f64 = 0.192_744_757_021_757_43;
    const CHERNOFF_10_05_03: f64 = 0.145_519_152_283_668_52;
    const WINDOW_100_05_3: f64 = 0.961_198_864_817_238_4;
    const POISSON_1000_0001_10: f64 = 4.405_293_158_961_343e-6;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn kl_values() {
        assert_eq!(kl_divergence(0.5, 0.5), 0.0);
        assert!(close(kl_divergence(0.8, 0.5), KL_08_05, 1e-12));
        assert!(close(kl_divergence(0.8, 0.5), 0.192745, 1e-6));
        assert!(close(kl_divergence(0.0, 0.5), 2f64.ln(), 1e-15));
        assert_eq!(kl_divergence(0.3, 0.0), f64::INFINITY);
        assert_eq!(kl_divergence(0.3, 1.0), f64::INFINITY);
        assert_eq!(kl_divergence(1.0, 1.0), 0.0);
    }

    #[test]
    fn chernoff_values() {
        assert!(close(chernoff_tail(10, 0.5, 0.3, Side::Upper), CHERNOFF_10_05_03, 1e-12));
        assert_eq!(chernoff_tail(10, 0.5, 0.6, Side::Upper), 1.0);
        assert_eq!(chernoff_tail(10, 0.5, 0.5, Side::Lower), 1.0);
        let exact = exact_tail(10, 0.5, 8.0, Side::Upper).unwrap();
        assert!(close(exact, 56.0 / 1024.0, 1e-15));
        assert!(exact <= chernoff_tail(10, 0.5, 0.3, Side::Upper));
        let q = TailQuery { n: 10, p: 0.5, threshold: 8.0, side: Side::Upper };
        assert!(close(q.chernoff(), CHERNOFF_10_05_03, 1e-12));
    }

    #[test]
    fn window_values() {
        assert!(close(window_bound(100, 0.5, 3.0).unwrap(), WINDOW_100_05_3, 1e-12));
        assert!(close(window_bound(100, 0.5, 1e3).unwrap(), 1.0, 1e-12));
        assert!(window_bound(0, 0.5, 1.0).is_err());
        assert!(window_bound(100, 0.0, 1.0).is_err());
        let exact = exact_window_coverage(100, 0.5, 3.0).unwrap();
        assert!(exact >= window_bound(100, 0.5, 3.0).unwrap());
        // the whole support is covered exactly, not up to rounding
        assert_eq!(exact_window_coverage(38, 0.05, 40.0).unwrap(), 1.0);
    }

    #[test]
    fn poisson_values() {
        let at_mean = E * 0.001 * 1000.0;
        assert!(close(poisson_tail_bound(1000, 0.001, at_mean).unwrap(), 2.0, 1e-12));
        let b = poisson_tail_bound(1000, 0.001, 10.0).unwrap();
        assert!(close(b / POISSON_1000_0001_10, 1.0, 1e-12));
        // exact P(X > 10) = 9.5999551852282e-9
        let exact = exact_tail(1000, 0.001, 11.0, Side::Upper).unwrap();
        assert!(close(exact / 9.599_955_185_228_218e-9, 1.0, 1e-10));
        assert!(exact <= b);
        assert!(poisson_tail_bound(1000, 0.001, 2.0).is_err());
    }

    #[test]
    fn exact_tail_edges() {
        assert_eq!(exact_tail(5, 1.0, 5.0, Side::Upper).unwrap(), 1.0);
        assert_eq!(exact_tail(5, 0.0, 1.0, Side::Upper).unwrap(), 0.0);
        assert!(exact_tail(EXACT_TAIL_CUTOFF + 1, 0.5, 1.0, Side::Upper).is_err());
        assert_eq!(exact_tail(5, 0.3, -1.0, Side::Lower).unwrap(), 0.0);
        assert_eq!(exact_tail(5, 0.3, 7.0, Side::Lower).unwrap(), 1.0);
    }

    #[test]
    fn exact_tail_precision() {
        let cases = [
            (10_000, 0.3, 3050.0, Side::Upper, 0.140_084_049_487_042_11),
            (10_000, 0.3, 2950.0, Side::Lower, 0.139_976_021_149_544_35),
            (2000, 0.01, 30.0, Side::Upper, 0.021_256_171_404_065_293),
            (10_000, 0.5, 5100.0, Side::Upper, 0.023_292_763_852_473_694),
        ];
        for (n, p, t, side, want) in cases {
            let got = exact_tail(n, p, t, side).unwrap();
            assert!(close(got, want, 1e-12), "n={n} p={p} t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn pmf_sums_to_one() {
        for (n, p) in [(1, 0.3), (17, 0.5), (1000, 0.001), (50_000, 0.37)] {
            let s: f64 = (0..=n).map(|k| binomial_pmf(n, k, p)).sum();
            assert!(close(s, 1.0, 1e-13), "n={n}: {s}");
        }
    }

    #[test]
    fn gaussian_values() {
        assert_eq!(gaussian_cdf(0.0), 0.5);
        assert!(close(gaussian_cdf(1.959964), 0.975, 1e-6));
        let refs = [
            (1.959964, 0.975_000_000_903_557_6),
            (-1.0, 0.158_655_253_931_457_05),
            (0.5, 0.691_462_461_274_013_1),
            (2.5, 0.993_790_334_674_223_9),
            (-3.7, 1.077_997_334_773_883_4e-4),
            (6.0, 0.999_999_999_013_412_4),
            (-6.5, 4.016_000_583_859_118e-11),
            (-8.0, 6.220_960_574_271_784e-16),
        ];
        for (x, want) in refs {
            let got = gaussian_cdf(x);
            assert!(close(got, want, 1e-10), "x={x}: {got} vs {want}");
            if want < 1e-3 {
                assert!(close(got / want, 1.0, 1e-8), "x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn collision_values() {
        assert!(close(collision_probability(1, 0.5, 10).value, 0.5, 1e-15));
        assert!(close(collision_probability(2, 0.5, 10).value, 0.375, 1e-15));
        let c = collision_probability(9600, 0.02, 1_000_000);
        assert_eq!(c.method, CollisionMethod::Exact);
        assert!(close(c.value, 0.020_571_164_560_832_344, 1e-13));
        assert!(close(collision_probability(100, 0.3, 1000).value, 0.061_510_719_206_691_31, 1e-14));
        let approx = collision_probability(9600, 0.02, 100);
        assert_eq!(approx.method, CollisionMethod::LocalClt);
    }

    #[test]
    fn collision_branches_agree_at_cutoff() {
        for p in [0.02, 0.1, 0.3, 0.5, 0.9] {
            let cutoff = 5_000;
            let exact = collision_probability(cutoff, p, cutoff).value;
            let approx = local_clt_collision(cutoff, p);
            assert!((exact / approx - 1.0).abs() < 0.05, "p={p}");
        }
    }

    #[test]
    fn collision_below_four_over_root_pn() {
        for n in [1_000u64, 5_000, 20_000, 100_000] {
            for p in [0.005, 0.01, 0.02, 0.05] {
                let pn = p * n as f64;
                let m = (n / 2) as i64 - pn.ceil() as i64;
                if m <= 0 {
                    continue;
                }
                let c = collision_probability(m as u64, p, 1_000_000).value;
                assert!(c <= 4.0 / pn.sqrt(), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn almost_red_estimate_basics() {
        let zero = CollisionProbability { value: 0.0, method: CollisionMethod::Exact };
        let e = almost_red_probability_from_collision(400.0, 0, 1, zero).unwrap();
        assert_eq!(e.value, 0.5);
        let k = ConstantsConfig::default();
        let plus = almost_red_probability_estimate(20_000, 0.02, 40, 1, &k).unwrap();
        let minus = almost_red_probability_estimate(20_000, 0.02, 40, -1, &k).unwrap();
        assert!(plus.value > minus.value);
        assert!(plus.value + minus.value > 1.0);
        assert!(close(plus.error_scale, 0.05, 1e-15));
        assert!(almost_red_probability_estimate(10, 0.9, 0, 1, &k).is_err());
        assert!(almost_red_probability_from_collision(400.0, 0, 0, zero).is_err());
    }

    #[test]
    fn thresholds() {
        let mut k = ConstantsConfig::default();
        let t = theory_thresholds(1_000_000, 1e-3, &k).unwrap();
        assert!(close(t.delta_min, 436.9, 0.05), "{}", t.delta_min);
        k.c_threshold = 0.0;
        assert_eq!(theory_thresholds(1_000_000, 1e-3, &k).unwrap().delta_min, 0.0);
        assert!(theory_thresholds(2, 0.5, &k).is_err());
    }

    #[test]
    fn constants_validation() {
        ConstantsConfig::default().validate().unwrap();
        let bad = ConstantsConfig { c_var: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let parsed: std::result::Result<ConstantsConfig, _> =
            serde_json::from_str(r#"{"c_landslide": 50, "bogus": 1}"#);
        assert!(parsed.is_err());
    }
    #[test]
    fn kl_quadratic_lower_bound() {
        for i in 0..=200 {
            for j in 1..200 {
                let (x, y) = (i as f64 / 200.0, j as f64 / 200.0);
                let lower = 3.0 * (x - y).powi(2) / (2.0 * x + 4.0 * y);
                assert!(kl_divergence(x, y) >= lower - 1e-15, "x={x} y={y}");
            }
        }
    }

    #[test]
    fn delta_min_decreases_in_p() {
        let k = ConstantsConfig::default();
        let mut last = f64::INFINITY;
        for i in 1..100 {
            let d = theory_thresholds(10_000, i as f64 / 100.0, &k).unwrap().delta_min;
            assert!(d < last);
            last = d;
        }
    }

    proptest::proptest! {
        #[test]
        fn gaussian_monotone(a in -9.0f64..9.0, b in -9.0f64..9.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            proptest::prop_assert!(gaussian_cdf(lo) <= gaussian_cdf(hi));
            proptest::prop_assert!((gaussian_cdf(a) + gaussian_cdf(-a) - 1.0).abs() <= 1e-7);
        }

        #[test]
        fn estimate_is_a_probability(n in 100u64..50_000, p in 0.001f64..0.3, d in 0i64..200) {
            let k = ConstantsConfig::default();
            if let Ok(e) = almost_red_probability_estimate(n, p, d, 1, &k) {
                proptest::prop_assert!((0.0..=1.0).contains(&e.value));
                let minus = almost_red_probability_estimate(n, p, d, -1, &k).unwrap();
                proptest::prop_assert!((0.0..=1.0).contains(&minus.value));
                if d > 0 {
                    proptest::prop_assert!(e.value + minus.value > 1.0);
                }
            }
        }
    }
}
