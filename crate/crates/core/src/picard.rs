//! Estimators of the Picard parameter `k₀` and the noise variance `s²`.
//!
//! All indices in the public API are 1-based (`k0 ∈ [r+1, r+q]`), matching
//! the usual statement of the algorithms; sequences are passed as plain
//! slices of Fourier coefficients `β_1..β_m`.
//!
//! Lilliefors critical values come from a Monte Carlo table stored in
//! `data/lilliefors_critical.txt`. Each line holds `n confidence value`; the
//! table is interpolated linearly in `1/√n` and extrapolated past the largest
//! tabulated size with the asymptotic `c·√(n_max/n)` law. The table is
//! regenerated by `cargo run --release --example lilliefors_table`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Relative-change bound used by [`estimate_v`] unless configured otherwise.
pub const DEFAULT_EPS: f64 = 5e-2;

/// Smallest sample the Lilliefors test accepts.
pub const MIN_SAMPLE: usize = 4;

/// Consecutive rejections that stop the backward scan.
pub const LEGACY_FAILURE_RUN: usize = 10;

pub const FORWARD_CONFIDENCE: f64 = 0.999;
pub const LEGACY_CONFIDENCE: f64 = 0.95;

/// Monte Carlo setup behind the shipped table.
pub const TABLE_TRIALS: usize = 100_000;
pub const TABLE_SEED: u64 = 0x5eed_1111_e70f;
pub const TABLE_CONFIDENCES: [f64; 2] = [0.95, 0.999];
pub const TABLE_VERSION: u32 = 1;

const TABLE_TEXT: &str = include_str!("../data/lilliefors_critical.txt");

/// Step `h = ⌈m/50⌉`.
pub fn default_step(m: usize) -> usize {
    m.div_ceil(50).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PicardMethod {
    #[serde(rename = "V-sequence")]
    VSequence,
    #[serde(rename = "Lilliefors-forward")]
    LillieforsForward,
    #[serde(rename = "Lilliefors-legacy")]
    LillieforsLegacy,
}

impl fmt::Display for PicardMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PicardMethod::VSequence => "V-sequence",
            PicardMethod::LillieforsForward => "Lilliefors-forward",
            PicardMethod::LillieforsLegacy => "Lilliefors-legacy",
        })
    }
}

impl FromStr for PicardMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "v-sequence" | "v" | "vseq" => Ok(PicardMethod::VSequence),
            "lilliefors-forward" | "forward" => Ok(PicardMethod::LillieforsForward),
            "lilliefors-legacy" | "legacy" => Ok(PicardMethod::LillieforsLegacy),
            other => Err(Error::Config(format!("unknown Picard estimator `{other}`"))),
        }
    }
}

/// Output of a Picard estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardEstimate {
    /// 1-based Picard parameter, always in `[r+1, r+q]`.
    pub k0: usize,
    pub s2: f64,
    pub method: PicardMethod,
    /// No level-off was found; `k0 = r+q` and `s2 = 0`.
    pub noiseless: bool,
    /// Every coefficient was zero.
    pub degenerate: bool,
    /// Index produced by the scan before clamping to `[r+1, r+q]`.
    pub raw_k0: usize,
}

impl PicardEstimate {
    fn noiseless(method: PicardMethod, r: usize, q: usize) -> Self {
        PicardEstimate { k0: r + q, s2: 0.0, method, noiseless: true, degenerate: false, raw_k0: r + q }
    }
}

/// Trailing averages `V(k) = (1/(m−k+1)) Σ_{j=k}^m β_j²`.
#[derive(Debug, Clone, PartialEq)]
pub struct VSequence {
    values: Vec<f64>,
}

impl VSequence {
    /// `V(k)` for 1-based `k`.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    /// Values in index order, `values()[k-1] = V(k)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Single backward pass of `V(k) = ((m−k)·V(k+1) + β_k²)/(m−k+1)`.
pub fn v_sequence(beta: &[f64]) -> VSequence {
    let m = beta.len();
    let mut values = vec![0.0; m];
    let mut next = 0.0;
    for k in (1..=m).rev() {
        let tail = (m - k) as f64;
        next = (tail * next + beta[k - 1] * beta[k - 1]) / (tail + 1.0);
        values[k - 1] = next;
    }
    VSequence { values }
}

fn check_block(m: usize, r: usize, q: usize) -> Result<()> {
    if q == 0 || r + q > m {
        return Err(Error::BadK0 { k0: r + 1, lo: r + 1, hi: r + q });
    }
    Ok(())
}

/// Mean of `β_k²` over `k0..=m`.
fn tail_variance(beta: &[f64], k0: usize) -> f64 {
    let tail = &beta[k0 - 1..];
    tail.iter().map(|b| b * b).sum::<f64>() / tail.len() as f64
}

/// Level-off detection on `V(k)`: the smallest `k ∈ [r+1, min(r+q, m−h)]`
/// with `|V(k+h) − V(k)| / V(k) < eps`, and `s² = V(k0)`. Falls back to the
/// noiseless result when no such `k` exists.
pub fn estimate_v(beta: &[f64], r: usize, q: usize, eps: f64, h: usize) -> Result<PicardEstimate> {
    let m = beta.len();
    check_block(m, r, q)?;
    if !(eps > 0.0) {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    if h == 0 || h + r + 1 > m {
        return Err(Error::Config(format!("step h = {h} outside [1, {}]", m.saturating_sub(r + 1))));
    }
    if beta.iter().all(|&b| b == 0.0) {
        let mut est = PicardEstimate::noiseless(PicardMethod::VSequence, r, q);
        est.degenerate = true;
        return Ok(est);
    }
    let v = v_sequence(beta);
    let hi = (r + q).min(m - h);
    for k in r + 1..=hi {
        let vk = v.get(k);
        if vk > 0.0 && (v.get(k + h) - vk).abs() / vk < eps {
            return Ok(PicardEstimate {
                k0: k,
                s2: vk,
                method: PicardMethod::VSequence,
                noiseless: false,
                degenerate: false,
                raw_k0: k,
            });
        }
    }
    Ok(PicardEstimate::noiseless(PicardMethod::VSequence, r, q))
}

/// Forward Lilliefors scan: the smallest `j ∈ [r+1, r+q]` for which the test
/// at `confidence` does not reject normality of `β_j..β_m`. Tails shorter
/// than [`MIN_SAMPLE`] count as rejections.
pub fn estimate_lilliefors_forward(
    beta: &[f64],
    r: usize,
    q: usize,
    confidence: f64,
) -> Result<PicardEstimate> {
    let m = beta.len();
    check_block(m, r, q)?;
    if m - r < MIN_SAMPLE + 1 {
        return Err(Error::SampleTooSmall { len: m - r, min: MIN_SAMPLE + 1 });
    }
    critical_value(MIN_SAMPLE, confidence)?;
    for j in r + 1..=r + q {
        let sample = &beta[j - 1..];
        if sample.len() < MIN_SAMPLE {
            break;
        }
        if !lilliefors_test(sample, confidence)? {
            return Ok(PicardEstimate {
                k0: j,
                s2: tail_variance(beta, j),
                method: PicardMethod::LillieforsForward,
                noiseless: false,
                degenerate: false,
                raw_k0: j,
            });
        }
    }
    Ok(PicardEstimate::noiseless(PicardMethod::LillieforsForward, r, q))
}

/// Backward Lilliefors scan over `j = m−3, m−2, …, 1` at `confidence`.
///
/// A pass resets the failure counter; `k0` is the last passing index once
/// [`LEGACY_FAILURE_RUN`] consecutive rejections follow it (or the smallest
/// passing index if the scan reaches `j = 1`). Rejection at the very first
/// step yields the sentinel `m+1` with `s² = 0`. The result is then moved to
/// whichever of `r+1`, `r+q` is closer when it falls outside that range.
pub fn estimate_lilliefors_legacy(
    beta: &[f64],
    r: usize,
    q: usize,
    confidence: f64,
) -> Result<PicardEstimate> {
    let m = beta.len();
    check_block(m, r, q)?;
    if m < 14 {
        return Err(Error::SampleTooSmall { len: m, min: 14 });
    }
    critical_value(MIN_SAMPLE, confidence)?;

    let start = m - 3;
    let mut raw = None;
    if !lilliefors_test(&beta[start - 1..], confidence)? {
        let mut last_pass = start;
        let mut failures = 0;
        for j in (1..start).rev() {
            if lilliefors_test(&beta[j - 1..], confidence)? {
                failures += 1;
                if failures == LEGACY_FAILURE_RUN {
                    break;
                }
            } else {
                failures = 0;
                last_pass = j;
            }
        }
        raw = Some(last_pass);
    }

    let (raw_k0, s2, noiseless) = match raw {
        Some(k) => (k, tail_variance(beta, k), false),
        None => (m + 1, 0.0, true),
    };
    let (lo, hi) = (r + 1, r + q);
    let k0 = if raw_k0 < lo || raw_k0 > hi {
        if raw_k0.abs_diff(lo) < raw_k0.abs_diff(hi) {
            lo
        } else {
            hi
        }
    } else {
        raw_k0
    };
    Ok(PicardEstimate {
        k0,
        s2,
        method: PicardMethod::LillieforsLegacy,
        noiseless,
        degenerate: beta.iter().all(|&b| b == 0.0),
        raw_k0,
    })
}

/// Dispatches to one of the three estimators with their default settings
/// (`eps`, `h` only matter for the V-sequence rule).
pub fn estimate(
    method: PicardMethod,
    beta: &[f64],
    r: usize,
    q: usize,
    eps: f64,
    h: usize,
) -> Result<PicardEstimate> {
    match method {
        PicardMethod::VSequence => estimate_v(beta, r, q, eps, h),
        PicardMethod::LillieforsForward => estimate_lilliefors_forward(beta, r, q, FORWARD_CONFIDENCE),
        PicardMethod::LillieforsLegacy => estimate_lilliefors_legacy(beta, r, q, LEGACY_CONFIDENCE),
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Kolmogorov-Smirnov distance between the empirical distribution of the
/// sample and a normal with the sample mean and (n−1)-normalized variance.
/// `None` for samples that are too short or have zero spread.
pub fn lilliefors_statistic(sample: &[f64]) -> Option<f64> {
    let n = sample.len();
    if n < MIN_SAMPLE {
        return None;
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mean = sorted.iter().sum::<f64>() / nf;
    let var = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return None;
    }
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let p = normal_cdf((x - mean) / sd);
        d = d.max((i + 1) as f64 / nf - p).max(p - i as f64 / nf);
    }
    Some(d)
}

/// `true` when normality is rejected at `confidence`. Constant samples are
/// always rejected.
pub fn lilliefors_test(sample: &[f64], confidence: f64) -> Result<bool> {
    if sample.len() < MIN_SAMPLE {
        return Err(Error::SampleTooSmall { len: sample.len(), min: MIN_SAMPLE });
    }
    let c = critical_value(sample.len(), confidence)?;
    Ok(match lilliefors_statistic(sample) {
        Some(d) => d > c,
        None => true,
    })
}

/// Parsed critical-value table.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalTable {
    /// `(confidence, [(n, value)])`, sizes ascending.
    levels: Vec<(f64, Vec<(usize, f64)>)>,
}

impl CriticalTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut levels: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Format(format!("critical table line {}: `{line}`", lineno + 1));
            let mut it = line.split_whitespace();
            let n: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            let conf: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            let val: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() {
                return Err(bad());
            }
            match levels.iter_mut().find(|(c, _)| *c == conf) {
                Some((_, rows)) => rows.push((n, val)),
                None => levels.push((conf, vec![(n, val)])),
            }
        }
        for (_, rows) in &mut levels {
            rows.sort_by_key(|&(n, _)| n);
            rows.dedup_by_key(|&mut (n, _)| n);
        }
        if levels.is_empty() {
            return Err(Error::Format("critical table is empty".into()));
        }
        Ok(CriticalTable { levels })
    }

    pub fn confidences(&self) -> Vec<f64> {
        self.levels.iter().map(|(c, _)| *c).collect()
    }

    /// Tabulated entry, if `n` is an exact row.
    pub fn entry(&self, n: usize, confidence: f64) -> Option<f64> {
        let rows = self.rows(confidence)?;
        rows.binary_search_by_key(&n, |&(k, _)| k).ok().map(|i| rows[i].1)
    }

    fn rows(&self, confidence: f64) -> Option<&[(usize, f64)]> {
        self.levels
            .iter()
            .find(|(c, _)| (c - confidence).abs() < 1e-12)
            .map(|(_, rows)| rows.as_slice())
    }

    pub fn value(&self, n: usize, confidence: f64) -> Result<f64> {
        let rows = self.rows(confidence).ok_or_else(|| {
            Error::Config(format!(
                "no Lilliefors table for confidence {confidence}; available: {:?}",
                self.confidences()
            ))
        })?;
        let (n_min, _) = rows[0];
        let (n_max, c_max) = rows[rows.len() - 1];
        if n < n_min {
            return Err(Error::SampleTooSmall { len: n, min: n_min });
        }
        if n >= n_max {
            return Ok(c_max * (n_max as f64 / n as f64).sqrt());
        }
        let i = rows.partition_point(|&(k, _)| k <= n);
        let (n0, c0) = rows[i - 1];
        if n0 == n {
            return Ok(c0);
        }
        let (n1, c1) = rows[i];
        let (x0, x1, x) = (inv_sqrt(n0), inv_sqrt(n1), inv_sqrt(n));
        Ok(c0 + (c1 - c0) * (x - x0) / (x1 - x0))
    }
}

fn inv_sqrt(n: usize) -> f64 {
    1.0 / (n as f64).sqrt()
}

/// The table shipped with the crate.
pub fn critical_table() -> &'static CriticalTable {
    static TABLE: OnceLock<CriticalTable> = OnceLock::new();
    TABLE.get_or_init(|| CriticalTable::parse(TABLE_TEXT).expect("shipped Lilliefors table is valid"))
}

/// Critical value for a sample of size `n` at `confidence`.
pub fn critical_value(n: usize, confidence: f64) -> Result<f64> {
    critical_table().value(n, confidence)
}

/// Sample sizes covered by the table: every size in `4..=100`, then
/// log-spaced sizes up to 2000.
pub fn table_sizes() -> Vec<usize> {
    let mut sizes: Vec<usize> = (MIN_SAMPLE..=100).collect();
    let steps = 16;
    for i in 1..=steps {
        let n = (100.0 * 20f64.powf(i as f64 / steps as f64)).round() as usize;
        if n > *sizes.last().unwrap() {
            sizes.push(n);
        }
    }
    sizes
}

/// Monte Carlo quantiles of the statistic for standard normal samples of
/// size `n`. Each size draws from its own ChaCha stream, so entries can be
/// regenerated independently.
pub fn simulate_critical_values(n: usize, trials: usize, seed: u64, confidences: &[f64]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    let mut sample = vec![0.0; n];
    let mut stats: Vec<f64> = (0..trials)
        .map(|_| {
            for x in sample.iter_mut() {
                *x = StandardNormal.sample(&mut rng);
            }
            lilliefors_statistic(&sample).unwrap_or(f64::INFINITY)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    confidences
        .iter()
        .map(|&c| {
            let idx = ((c * trials as f64) - 1e-9).ceil() as usize;
            stats[idx.clamp(1, trials) - 1]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn normal_vec(rng: &mut ChaCha8Rng, n: usize, sd: f64) -> Vec<f64> {
        (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
    }

    #[test]
    fn v_sequence_small_cases() {
        assert_eq!(v_sequence(&[0.0; 5]).values(), &[0.0; 5]);
        let v = v_sequence(&[2.0, 0.0, 0.0, 0.0]);
        assert_eq!(v.values(), &[1.0, 0.0, 0.0, 0.0]);
        let v = v_sequence(&[1.0, 2.0, 3.0]);
        assert!((v.get(1) - 14.0 / 3.0).abs() < 1e-15);
        assert!((v.get(2) - 6.5).abs() < 1e-15);
        assert_eq!(v.get(3), 9.0);
    }

    #[test]
    fn v_sequence_matches_direct_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let beta = normal_vec(&mut rng, 257, 2.0);
        let v = v_sequence(&beta);
        let m = beta.len();
        for k in 1..=m {
            let direct = beta[k - 1..].iter().map(|b| b * b).sum::<f64>() / (m - k + 1) as f64;
            assert!((v.get(k) - direct).abs() <= 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn v_sequence_mean_of_first_entry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (m, s2, trials) = (400, 2.5f64, 200);
        let mean = (0..trials)
            .map(|_| v_sequence(&normal_vec(&mut rng, m, s2.sqrt())).get(1))
            .sum::<f64>()
            / trials as f64;
        assert!((mean - s2).abs() <= 3.0 * s2 * (2.0 / m as f64).sqrt());
    }

    /// Unit-variance noise plus a smooth part `β_k² = 4^(head−k)` that meets
    /// the noise level at `k = head`.
    fn head_and_tail(rng: &mut ChaCha8Rng, m: usize, head: usize) -> Vec<f64> {
        (1..=m)
            .map(|k| {
                let noise: f64 = rng.sample(StandardNormal);
                if k < head {
                    2f64.powi((head - k) as i32) + noise
                } else {
                    noise
                }
            })
            .collect()
    }

    #[test]
    fn v_rule_finds_level_off() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let beta = head_and_tail(&mut rng, 1000, 17);
            let est = estimate_v(&beta, 0, 1000, DEFAULT_EPS, default_step(1000)).unwrap();
            assert!(est.k0.abs_diff(17) <= 3, "k0 = {}", est.k0);
            assert!((est.s2 - 1.0).abs() < 0.2);
            assert!(!est.noiseless);
        }
    }

    #[test]
    fn v_rule_noiseless_branch() {
        let beta: Vec<f64> = (0..200).map(|k| 0.7f64.powi(k)).collect();
        let est = estimate_v(&beta, 2, 150, DEFAULT_EPS, 4).unwrap();
        assert!(est.noiseless);
        assert_eq!((est.k0, est.s2), (152, 0.0));

        let est = estimate_v(&[0.0; 50], 0, 40, DEFAULT_EPS, 1).unwrap();
        assert!(est.degenerate && est.noiseless);
        assert_eq!(est.k0, 40);
    }

    #[test]
    fn v_rule_rejects_bad_parameters() {
        let beta = vec![1.0; 20];
        assert!(matches!(estimate_v(&beta, 0, 20, 0.0, 1), Err(Error::Config(_))));
        assert!(matches!(estimate_v(&beta, 0, 20, 0.1, 0), Err(Error::Config(_))));
        assert!(matches!(estimate_v(&beta, 5, 15, 0.1, 15), Err(Error::Config(_))));
        assert!(matches!(estimate_v(&beta, 0, 0, 0.1, 1), Err(Error::BadK0 { .. })));
    }

    #[test]
    fn default_step_rounds_up() {
        assert_eq!(default_step(1000), 20);
        assert_eq!(default_step(200), 4);
        assert_eq!(default_step(201), 5);
        assert_eq!(default_step(3), 1);
    }

    #[test]
    fn table_is_consistent() {
        let t = critical_table();
        assert_eq!(t.confidences().len(), 2);
        for &c in &TABLE_CONFIDENCES {
            for n in table_sizes() {
                assert!(t.entry(n, c).is_some(), "missing n = {n}, c = {c}");
            }
        }
        for n in [5, 20, 100, 1000] {
            assert!(t.value(n, 0.999).unwrap() > t.value(n, 0.95).unwrap());
        }
        assert!(t.value(50, 0.95).unwrap() > t.value(60, 0.95).unwrap());
        // large-sample 95% point is about 0.886/√n
        let c = t.value(2000, 0.95).unwrap() * 2000f64.sqrt();
        assert!((c - 0.886).abs() < 0.03, "{c}");
        let far = t.value(8000, 0.95).unwrap();
        assert!((far - t.value(2000, 0.95).unwrap() / 2.0).abs() < 1e-15);
        assert!(matches!(t.value(3, 0.95), Err(Error::SampleTooSmall { .. })));
        assert!(matches!(t.value(30, 0.9), Err(Error::Config(_))));
    }

    #[test]
    fn table_entry_regenerates() {
        let sizes = table_sizes();
        let n = sizes[1];
        let sim = simulate_critical_values(n, TABLE_TRIALS, TABLE_SEED, &TABLE_CONFIDENCES);
        for (c, v) in TABLE_CONFIDENCES.iter().zip(&sim) {
            assert_eq!(critical_table().entry(n, *c).unwrap(), *v);
        }
    }

    #[test]
    fn interpolation_between_rows() {
        let t = CriticalTable::parse("# x\n4 0.95 0.4\n16 0.95 0.2\n").unwrap();
        // 1/√9 sits 1/3 of the way from 1/2 to 1/4... in reverse
        let v = t.value(9, 0.95).unwrap();
        let w = (1.0 / 3.0 - 0.5) / (0.25 - 0.5);
        assert!((v - (0.4 + w * (0.2 - 0.4))).abs() < 1e-15);
        assert_eq!(t.value(16, 0.95).unwrap(), 0.2);
        assert!((t.value(64, 0.95).unwrap() - 0.1).abs() < 1e-15);
        assert!(CriticalTable::parse("4 0.95").is_err());
        assert!(CriticalTable::parse("# only comments").is_err());
    }

    #[test]
    fn statistic_known_value() {
        // sample (−1, 0, 1, 2): mean 0.5, sd √(5/3)
        let sd = (5.0f64 / 3.0).sqrt();
        let p: Vec<f64> = [-1.0, 0.0, 1.0, 2.0].iter().map(|x: &f64| normal_cdf((x - 0.5) / sd)).collect();
        let mut d = 0.0f64;
        for i in 0..4 {
            d = d.max((i + 1) as f64 / 4.0 - p[i]).max(p[i] - i as f64 / 4.0);
        }
        let got = lilliefors_statistic(&[2.0, -1.0, 1.0, 0.0]).unwrap();
        assert!((got - d).abs() < 1e-15);
        assert!(lilliefors_statistic(&[3.0; 10]).is_none());
    }

    #[test]
    fn test_rejects_constant_and_short() {
        assert!(lilliefors_test(&[1.0; 30], 0.95).unwrap());
        assert!(matches!(lilliefors_test(&[1.0, 2.0, 3.0], 0.95), Err(Error::SampleTooSmall { .. })));
    }

    #[test]
    fn test_calibration_normal_and_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let trials = 400;
        let normal_rejects = (0..trials)
            .filter(|_| lilliefors_test(&normal_vec(&mut rng, 1000, 1.0), 0.95).unwrap())
            .count();
        let rate = normal_rejects as f64 / trials as f64;
        // binomial sd at p = 0.05 over 400 trials is about 0.011
        assert!((rate - 0.05).abs() < 0.035, "rate {rate}");

        let uniform_rejects = (0..100)
            .filter(|_| {
                let u: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
                lilliefors_test(&u, 0.95).unwrap()
            })
            .count();
        assert!(uniform_rejects >= 99);
    }

    #[test]
    fn forward_on_pure_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let trials = 500;
        let off = (0..trials)
            .filter(|_| {
                let beta = normal_vec(&mut rng, 200, 1.0);
                estimate_lilliefors_forward(&beta, 0, 200, FORWARD_CONFIDENCE).unwrap().k0 != 1
            })
            .count();
        // expected 0.1 % of 500; allow binomial slack
        assert!(off <= 4, "{off} of {trials}");
    }

    #[test]
    fn forward_with_smooth_head() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let beta = head_and_tail(&mut rng, 500, 20);
            let est = estimate_lilliefors_forward(&beta, 0, 500, FORWARD_CONFIDENCE).unwrap();
            assert!((15..=25).contains(&est.k0), "k0 = {}", est.k0);
            assert!(!est.noiseless);
        }
    }

    #[test]
    fn forward_all_rejected() {
        let beta: Vec<f64> = (0..60).map(|k| 0.5f64.powi(k)).collect();
        let est = estimate_lilliefors_forward(&beta, 3, 40, FORWARD_CONFIDENCE).unwrap();
        assert!(est.noiseless);
        assert_eq!((est.k0, est.s2), (43, 0.0));
        assert!(matches!(
            estimate_lilliefors_forward(&beta[..6], 2, 3, 0.999),
            Err(Error::SampleTooSmall { .. })
        ));
    }

    #[test]
    fn legacy_on_pure_noise_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut small = 0;
        for _ in 0..50 {
            let beta = normal_vec(&mut rng, 200, 1.0);
            let est = estimate_lilliefors_legacy(&beta, 0, 200, LEGACY_CONFIDENCE).unwrap();
            assert!((1..=200).contains(&est.k0));
            if est.k0 <= 20 {
                small += 1;
            }
        }
        assert!(small >= 40, "{small}");
    }

    #[test]
    fn legacy_noiseless_sentinel_clamps_up() {
        let beta: Vec<f64> = (0..100).map(|k| 0.05f64.powi(k)).collect();
        let est = estimate_lilliefors_legacy(&beta, 1, 60, LEGACY_CONFIDENCE).unwrap();
        assert!(est.noiseless);
        assert_eq!((est.raw_k0, est.k0, est.s2), (101, 61, 0.0));
        assert!(matches!(
            estimate_lilliefors_legacy(&beta[..13], 0, 13, 0.95),
            Err(Error::SampleTooSmall { .. })
        ));
    }

    #[test]
    fn legacy_with_smooth_head() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut inside = 0;
        for _ in 0..20 {
            let beta = head_and_tail(&mut rng, 500, 20);
            let est = estimate_lilliefors_legacy(&beta, 0, 500, LEGACY_CONFIDENCE).unwrap();
            if (10..=40).contains(&est.k0) {
                inside += 1;
            }
        }
        assert!(inside >= 15, "{inside}");
    }

    #[test]
    fn legacy_clamps_to_nearest_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let beta = head_and_tail(&mut rng, 300, 20);
        let est = estimate_lilliefors_legacy(&beta, 40, 200, LEGACY_CONFIDENCE).unwrap();
        assert!(est.raw_k0 < 41);
        assert_eq!(est.k0, 41);
    }

    #[test]
    fn method_labels_roundtrip() {
        for m in [PicardMethod::VSequence, PicardMethod::LillieforsForward, PicardMethod::LillieforsLegacy] {
            assert_eq!(m.to_string().parse::<PicardMethod>().unwrap(), m);
        }
    }
}
