//! Sample estimators of Kendall's tau for zero-inflated count pairs.
//!
//! A sample is split by zero pattern into four groups. The positive parts of
//! the groups feed the cross-group crossing (`p*`) and tie (`p†`)
//! frequencies, and the both-positive rows feed the inner `tau_11`. The two
//! plug-in estimators differ only in whether within-margin ties between the
//! `(>0, 0)` and `(>0, >0)` groups are accounted for:
//!
//! ```text
//! tau_H = p11² t11 + 2(p00 p11 - p01 p10) + 2 p11 [p10 (1 - 2p1*)       + p01 (1 - 2p2*)]
//! tau_A = p11² t11 + 2(p00 p11 - p01 p10) + 2 p11 [p10 (1 - 2p1* - p1†) + p01 (1 - 2p2* - p2†)]
//! ```

use serde::{Deserialize, Serialize};

use crate::distributions::PairedSample;
use crate::{Error, Result};

/// Pair counts behind every Kendall-type statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcordanceCounts {
    /// `n (n - 1) / 2`.
    pub pairs: u64,
    pub concordant: u64,
    pub discordant: u64,
    /// Pairs tied in `x` (including those also tied in `y`).
    pub ties_x: u64,
    /// Pairs tied in `y` (including those also tied in `x`).
    pub ties_y: u64,
    /// Pairs tied in both coordinates.
    pub ties_xy: u64,
}

impl ConcordanceCounts {
    /// Knight's O(n log n) algorithm: sort by `(x, y)`, then count strict
    /// inversions of `y` with a merge sort.
    pub fn from_pairs(pairs: &[(u64, u64)]) -> Self {
        let n = pairs.len() as u64;
        let mut sorted = pairs.to_vec();
        sorted.sort_unstable();

        let ties_x = tie_pairs(sorted.iter().map(|p| p.0));
        let ties_xy = tie_pairs(sorted.iter().copied());

        let mut ys: Vec<u64> = sorted.iter().map(|p| p.1).collect();
        let mut buf = vec![0; ys.len()];
        let discordant = merge_count_inversions(&mut ys, &mut buf);
        // `ys` is now sorted.
        let ties_y = tie_pairs(ys.iter().copied());

        let total = n * n.saturating_sub(1) / 2;
        let untied = total + ties_xy - ties_x - ties_y;
        Self {
            pairs: total,
            concordant: untied - discordant,
            discordant,
            ties_x,
            ties_y,
            ties_xy,
        }
    }

    /// Direct O(n²) enumeration of all pairs.
    pub fn from_pairs_naive(pairs: &[(u64, u64)]) -> Self {
        let mut c = Self {
            pairs: 0,
            concordant: 0,
            discordant: 0,
            ties_x: 0,
            ties_y: 0,
            ties_xy: 0,
        };
        for (i, a) in pairs.iter().enumerate() {
            for b in &pairs[i + 1..] {
                c.pairs += 1;
                let tx = a.0 == b.0;
                let ty = a.1 == b.1;
                c.ties_x += tx as u64;
                c.ties_y += ty as u64;
                c.ties_xy += (tx && ty) as u64;
                if !tx && !ty {
                    if (a.0 < b.0) == (a.1 < b.1) {
                        c.concordant += 1;
                    } else {
                        c.discordant += 1;
                    }
                }
            }
        }
        c
    }

    pub fn score(&self) -> i64 {
        self.concordant as i64 - self.discordant as i64
    }
}

/// Number of tied pairs `sum t (t - 1) / 2` in an already sorted sequence.
fn tie_pairs<T: PartialEq, I: Iterator<Item = T>>(sorted: I) -> u64 {
    let mut total = 0;
    let mut run = 0_u64;
    let mut prev: Option<T> = None;
    for v in sorted {
        if prev.as_ref() == Some(&v) {
            run += 1;
        } else {
            total += run * (run.saturating_sub(1)) / 2;
            run = 1;
        }
        prev = Some(v);
    }
    total + run * run.saturating_sub(1) / 2
}

fn merge_count_inversions(v: &mut [u64], buf: &mut [u64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (lo, hi) = v.split_at_mut(mid);
        let (blo, bhi) = buf.split_at_mut(mid);
        merge_count_inversions(lo, blo) + merge_count_inversions(hi, bhi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

/// `(C - D) / (n (n - 1) / 2)`.
pub fn tau_standard(sample: &PairedSample) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: sample.len(),
        });
    }
    let c = ConcordanceCounts::from_pairs(sample.pairs());
    Ok(c.score() as f64 / c.pairs as f64)
}

/// Kendall's tie-corrected `(C - D) / sqrt((n0 - T_x)(n0 - T_y))`.
pub fn tau_b(sample: &PairedSample) -> Result<f64> {
    tau_b_pairs(sample.pairs())
}

fn tau_b_pairs(pairs: &[(u64, u64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: pairs.len(),
        });
    }
    let c = ConcordanceCounts::from_pairs(pairs);
    tau_b_from_counts(&c)
}

fn tau_b_from_counts(c: &ConcordanceCounts) -> Result<f64> {
    let nx = c.pairs - c.ties_x;
    let ny = c.pairs - c.ties_y;
    if nx == 0 {
        return Err(Error::DegenerateMargin('x'));
    }
    if ny == 0 {
        return Err(Error::DegenerateMargin('y'));
    }
    Ok(c.score() as f64 / ((nx as f64) * (ny as f64)).sqrt())
}

/// Plain U-statistic `(C - D) / n0` on the given pairs.
fn tau_a_pairs(pairs: &[(u64, u64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: pairs.len(),
        });
    }
    let c = ConcordanceCounts::from_pairs(pairs);
    Ok(c.score() as f64 / c.pairs as f64)
}

/// Zero-pattern frequencies and the positive parts of each group.
///
/// All multisets are stored sorted, so the value does not depend on row
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroPatternStats {
    pub n: usize,
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    /// `x` values of rows with `x > 0, y = 0`.
    pub x_pos_y_zero: Vec<u64>,
    /// `x` values of rows with `x > 0, y > 0`.
    pub x_pos_y_pos: Vec<u64>,
    /// `y` values of rows with `x = 0, y > 0`.
    pub y_pos_x_zero: Vec<u64>,
    /// `y` values of rows with `x > 0, y > 0`.
    pub y_pos_x_pos: Vec<u64>,
    /// Rows with both coordinates positive.
    pub pos_pos_pairs: Vec<(u64, u64)>,
}

impl ZeroPatternStats {
    pub fn count00(&self) -> usize {
        self.n - self.x_pos_y_zero.len() - self.y_pos_x_zero.len() - self.pos_pos_pairs.len()
    }
}

pub fn zero_pattern_stats(sample: &PairedSample) -> ZeroPatternStats {
    let n = sample.len();
    let mut x_pos_y_zero = Vec::new();
    let mut y_pos_x_zero = Vec::new();
    let mut pos_pos_pairs = Vec::new();
    let mut n00 = 0_usize;
    for &(x, y) in sample.pairs() {
        match (x > 0, y > 0) {
            (false, false) => n00 += 1,
            (false, true) => y_pos_x_zero.push(y),
            (true, false) => x_pos_y_zero.push(x),
            (true, true) => pos_pos_pairs.push((x, y)),
        }
    }
    x_pos_y_zero.sort_unstable();
    y_pos_x_zero.sort_unstable();
    pos_pos_pairs.sort_unstable();
    let mut x_pos_y_pos: Vec<u64> = pos_pos_pairs.iter().map(|p| p.0).collect();
    let mut y_pos_x_pos: Vec<u64> = pos_pos_pairs.iter().map(|p| p.1).collect();
    x_pos_y_pos.sort_unstable();
    y_pos_x_pos.sort_unstable();

    let freq = |k: usize| k as f64 / n as f64;
    ZeroPatternStats {
        n,
        p00: freq(n00),
        p01: freq(y_pos_x_zero.len()),
        p10: freq(x_pos_y_zero.len()),
        p11: freq(pos_pos_pairs.len()),
        x_pos_y_zero,
        x_pos_y_pos,
        y_pos_x_zero,
        y_pos_x_pos,
        pos_pos_pairs,
    }
}

/// Crossing and tie frequencies between the zero-partner group and the
/// both-positive group, per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CrossGroupStats {
    /// Fraction of `(a, b)` with `a` from `x_pos_y_zero`, `b` from
    /// `x_pos_y_pos`, and `a > b`.
    pub p1_star: f64,
    /// Same pairs, `a == b`.
    pub p1_dagger: f64,
    pub p2_star: f64,
    pub p2_dagger: f64,
}

/// Full U-statistic over the product of the two groups. An empty group gives
/// zero for both fractions.
pub fn cross_group_stats(z: &ZeroPatternStats) -> CrossGroupStats {
    let (p1_star, p1_dagger) = crossing_fractions(&z.x_pos_y_zero, &z.x_pos_y_pos);
    let (p2_star, p2_dagger) = crossing_fractions(&z.y_pos_x_zero, &z.y_pos_x_pos);
    CrossGroupStats {
        p1_star,
        p1_dagger,
        p2_star,
        p2_dagger,
    }
}

/// `(#{a > b}, #{a == b}) / (|A| |B|)` for sorted `a_sorted`, `b_sorted`.
fn crossing_fractions(a_sorted: &[u64], b_sorted: &[u64]) -> (f64, f64) {
    if a_sorted.is_empty() || b_sorted.is_empty() {
        return (0.0, 0.0);
    }
    let mut greater = 0_u64;
    let mut equal = 0_u64;
    for &a in a_sorted {
        let below = b_sorted.partition_point(|&b| b < a);
        let not_above = b_sorted.partition_point(|&b| b <= a);
        greater += below as u64;
        equal += (not_above - below) as u64;
    }
    let total = a_sorted.len() as f64 * b_sorted.len() as f64;
    (greater as f64 / total, equal as f64 / total)
}

fn zero_part(z: &ZeroPatternStats) -> f64 {
    2.0 * (z.p00 * z.p11 - z.p01 * z.p10)
}

/// Plug-in estimate without the within-margin tie adjustment.
pub fn tau_h_hat(z: &ZeroPatternStats, cross: &CrossGroupStats, tau11: f64) -> f64 {
    z.p11 * z.p11 * tau11
        + zero_part(z)
        + 2.0 * z.p11 * (z.p10 * (1.0 - 2.0 * cross.p1_star) + z.p01 * (1.0 - 2.0 * cross.p2_star))
}

/// Plug-in estimate with the within-margin tie adjustment.
pub fn tau_a_hat(z: &ZeroPatternStats, cross: &CrossGroupStats, tau11: f64) -> f64 {
    z.p11 * z.p11 * tau11
        + zero_part(z)
        + 2.0
            * z.p11
            * (z.p10 * (1.0 - 2.0 * cross.p1_star - cross.p1_dagger)
                + z.p01 * (1.0 - 2.0 * cross.p2_star - cross.p2_dagger))
}

/// How `tau_11` is estimated on the both-positive rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tau11Method {
    /// Tie-corrected `tau_b`.
    #[default]
    TauB,
    /// Unadjusted `(C - D) / n0`, an unbiased estimate of the population
    /// `tau_11` with ties.
    TauA,
}

/// Conditions under which the report used a fallback value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateWarning {
    /// Fewer than two both-positive rows, or one of their coordinates is
    /// fully tied; `tau_11_hat` was set to 0.
    Tau11Fallback,
    /// The full-sample `tau_b` is undefined because a coordinate is fully
    /// tied.
    TauBDegenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n: usize,
    pub tau_hat: f64,
    /// `None` when a coordinate of the full sample is fully tied.
    pub tau_b: Option<f64>,
    pub tau_11_hat: f64,
    pub tau_h_hat: f64,
    pub tau_a_hat: f64,
    pub stats: ZeroPatternStats,
    pub cross: CrossGroupStats,
    pub warnings: Vec<EstimateWarning>,
}

/// All estimators on one sample, with `tau_11` estimated by `tau_b`.
pub fn estimate(sample: &PairedSample) -> Result<EstimateReport> {
    estimate_with(sample, Tau11Method::TauB)
}

pub fn estimate_with(sample: &PairedSample, method: Tau11Method) -> Result<EstimateReport> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let mut warnings = Vec::new();
    let full = ConcordanceCounts::from_pairs(sample.pairs());
    let tau_hat = full.score() as f64 / full.pairs as f64;
    let tau_b = match tau_b_from_counts(&full) {
        Ok(t) => Some(t),
        Err(_) => {
            warnings.push(EstimateWarning::TauBDegenerate);
            None
        }
    };

    let stats = zero_pattern_stats(sample);
    let cross = cross_group_stats(&stats);
    let tau11 = match method {
        Tau11Method::TauB => tau_b_pairs(&stats.pos_pos_pairs),
        Tau11Method::TauA => tau_a_pairs(&stats.pos_pos_pairs),
    };
    let tau_11_hat = tau11.unwrap_or_else(|_| {
        warnings.push(EstimateWarning::Tau11Fallback);
        0.0
    });

    Ok(EstimateReport {
        n,
        tau_hat,
        tau_b,
        tau_11_hat,
        tau_h_hat: tau_h_hat(&stats, &cross, tau_11_hat),
        tau_a_hat: tau_a_hat(&stats, &cross, tau_11_hat),
        stats,
        cross,
        warnings,
    })
}
