//! Attainable ranges of Kendall's tau for zero-inflated count pairs.
//!
//! Three flavours are provided:
//!
//! * [`denuit_bounds`]: the range of `tau_H`, a function of the two zero
//!   probabilities only.
//! * [`exact_tau_a_bounds`]: the range of `tau_A` for known margins. The
//!   upper end is attained by the comonotone joint `min(F, G)`, the lower
//!   end by the countermonotone joint `max(F + G - 1, 0)`.
//! * [`estimate_bounds`]: the same formulas with empirical cdfs, and the
//!   unknown both-positive tie probability replaced by its lower bound
//!   `max(P[X1 = X1'], P[Y1 = Y1'])` estimated from the data. The estimated
//!   range is slightly wider than the exact one.

use serde::{Deserialize, Serialize};

use crate::distributions::{Comonotone, Countermonotone, JointPmfGrid, PairedSample, ZipMargin};
use crate::oracle::crossing_probs;
use crate::{Error, Result};

/// Iteration cap for threshold searches on arbitrary cdfs.
const THRESHOLD_SEARCH_LIMIT: i64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsKind {
    DenuitTauH,
    ExactTauA,
    EstimatedTauA,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub kind: BoundsKind,
    /// Zero probabilities the bounds were evaluated at.
    pub p1: f64,
    pub p2: f64,
    pub s_tilde: Option<u64>,
    pub t_tilde: Option<u64>,
    pub s_tilde_prime: Option<u64>,
    pub t_tilde_prime: Option<u64>,
    /// Both-positive tie probability used for the upper end.
    pub pu_t11: Option<f64>,
    /// Both-positive tie probability used for the lower end.
    pub pl_t11: Option<f64>,
    /// Set when the requested bounds could not be formed and the `tau_H`
    /// range was returned instead.
    pub fallback: bool,
}

impl BoundsReport {
    fn new(kind: BoundsKind, p1: f64, p2: f64) -> Self {
        Self {
            lower: -1.0,
            upper: 1.0,
            kind,
            p1,
            p2,
            s_tilde: None,
            t_tilde: None,
            s_tilde_prime: None,
            t_tilde_prime: None,
            pu_t11: None,
            pl_t11: None,
            fallback: false,
        }
    }

    pub fn contains(&self, tau: f64, tol: f64) -> bool {
        tau >= self.lower - tol && tau <= self.upper + tol
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("{name} = {p} is not in [0, 1]")));
    }
    Ok(())
}

/// Range of `tau_H` given the zero probabilities `p1 = P(X = 0)` and
/// `p2 = P(Y = 0)`.
pub fn denuit_bounds(p1: f64, p2: f64) -> Result<BoundsReport> {
    check_prob("p1", p1)?;
    check_prob("p2", p2)?;
    let mut r = BoundsReport::new(BoundsKind::DenuitTauH, p1, p2);
    let pmax = p1.max(p2);
    r.upper = 1.0 - pmax * pmax;
    let q = 1.0 - p1 - p2;
    r.lower = if q < 0.0 {
        -2.0 * (1.0 - p1) * (1.0 - p2)
    } else {
        q * q - 2.0 * (1.0 - p1) * (1.0 - p2)
    };
    Ok(r)
}

/// Smallest `s >= 0` with `cdf(s) > p`; then `cdf(s - 1) <= p`.
pub fn find_threshold_upper<F: Fn(i64) -> f64>(cdf: F, p: f64) -> Result<u64> {
    if !(p < 1.0) {
        return Err(Error::Domain(format!("threshold level {p} must be below 1")));
    }
    first_above(&cdf, p)
}

/// Smallest `s >= 0` with `cdf(s) + p - 1 > 0`; then `cdf(s - 1) + p - 1 <= 0`.
pub fn find_threshold_lower<F: Fn(i64) -> f64>(cdf: F, p: f64) -> Result<u64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("threshold level {p} must be in (0, 1]")));
    }
    first_above(&cdf, 1.0 - p)
}

fn first_above<F: Fn(i64) -> f64>(cdf: &F, level: f64) -> Result<u64> {
    (0..THRESHOLD_SEARCH_LIMIT)
        .find(|&s| cdf(s) > level)
        .map(|s| s as u64)
        .ok_or_else(|| Error::Degenerate(format!("cdf never exceeds {level}")))
}

/// Which Fréchet–Hoeffding bound the joint distribution is set to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FhBound {
    /// `min(F(x), G(y))`.
    Upper,
    /// `max(F(x) + G(y) - 1, 0)`.
    Lower,
}

/// Pmf of a positive conditional, or the marker for a conditioning event of
/// probability zero.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupPmf {
    Empty,
    /// Masses indexed by value; index 0 is always 0.
    Pmf(Vec<f64>),
}

impl GroupPmf {
    pub fn is_empty(&self) -> bool {
        matches!(self, GroupPmf::Empty)
    }

    pub fn probs(&self) -> &[f64] {
        match self {
            GroupPmf::Empty => &[],
            GroupPmf::Pmf(p) => p,
        }
    }

    pub fn total(&self) -> f64 {
        self.probs().iter().sum()
    }

    /// `(P(A > B), P(A = B))` for independent draws; zero if either is empty.
    pub fn crossing(&self, other: &GroupPmf) -> (f64, f64) {
        if self.is_empty() || other.is_empty() {
            return (0.0, 0.0);
        }
        crossing_probs(self.probs(), 1.0, other.probs(), 1.0)
    }
}

/// The four positive conditionals under a Fréchet–Hoeffding bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundConditionals {
    /// `X | X > 0, Y = 0`
    pub x10: GroupPmf,
    /// `X | X > 0, Y > 0`
    pub x11: GroupPmf,
    /// `Y | X = 0, Y > 0`
    pub y01: GroupPmf,
    /// `Y | X > 0, Y > 0`
    pub y11: GroupPmf,
    /// Threshold used for the `X` conditionals, if any.
    pub x_threshold: Option<u64>,
    /// Threshold used for the `Y` conditionals, if any.
    pub y_threshold: Option<u64>,
}

/// Closed-form conditional pmfs under the chosen bound, truncated where the
/// margins leave less than `tail_tol` outside.
///
/// Under [`FhBound::Lower`] the margins must satisfy `p1 + p2 <= 1`.
pub fn bound_cond_dists(fx: &ZipMargin, fy: &ZipMargin, which: FhBound, tail_tol: f64) -> Result<BoundConditionals> {
    let order = fx.truncation_point(tail_tol).max(fy.truncation_point(tail_tol));
    let f = fx.cdf_table(order);
    let g = fy.cdf_table(order);
    let (p1, p2) = (f[0], g[0]);
    match which {
        FhBound::Upper if p1 <= p2 => {
            let (x10, x11, y01, y11, s) = upper_oriented(&f, &g)?;
            Ok(BoundConditionals {
                x10,
                x11,
                y01,
                y11,
                x_threshold: s,
                y_threshold: None,
            })
        }
        FhBound::Upper => {
            let (y01, y11, x10, x11, t) = upper_oriented(&g, &f)?;
            Ok(BoundConditionals {
                x10,
                x11,
                y01,
                y11,
                x_threshold: None,
                y_threshold: t,
            })
        }
        FhBound::Lower => {
            if p1 + p2 > 1.0 {
                return Err(Error::Domain(format!(
                    "lower-bound conditionals need p1 + p2 <= 1, got {}",
                    p1 + p2
                )));
            }
            let (x10, x11, s) = lower_oriented(&f, p1, p2)?;
            let (y01, y11, t) = lower_oriented(&g, p2, p1)?;
            Ok(BoundConditionals {
                x10,
                x11,
                y01,
                y11,
                x_threshold: s,
                y_threshold: t,
            })
        }
    }
}

fn cdf_at(table: &[f64], s: i64) -> f64 {
    if s < 0 {
        0.0
    } else {
        table.get(s as usize).copied().unwrap_or(1.0)
    }
}

/// Comonotone case where `a` has the smaller zero probability. Returns the
/// conditionals of `a` given `b = 0` / `b > 0`, those of `b` given `a = 0`
/// / `a > 0`, and the threshold on `a`.
#[allow(clippy::type_complexity)]
fn upper_oriented(a: &[f64], b: &[f64]) -> Result<(GroupPmf, GroupPmf, GroupPmf, GroupPmf, Option<u64>)> {
    let (pa, pb) = (a[0], b[0]);
    let n = a.len();
    let positive_part = |t: &[f64], p0: f64| -> GroupPmf {
        if p0 >= 1.0 {
            return GroupPmf::Empty;
        }
        GroupPmf::Pmf(
            (0..n)
                .map(|v| if v == 0 { 0.0 } else { (t[v] - t[v - 1]) / (1.0 - p0) })
                .collect(),
        )
    };
    // P(a = 0, b > 0) = 0 under the comonotone joint.
    let b01 = GroupPmf::Empty;
    let b11 = positive_part(b, pb);
    if pb <= pa {
        return Ok((GroupPmf::Empty, positive_part(a, pa), b01, b11, None));
    }
    if pb >= 1.0 {
        return Ok((positive_part(a, pa), GroupPmf::Empty, b01, b11, None));
    }
    let s = find_threshold_upper(|v| cdf_at(a, v), pb)? as usize;
    let f = |v: usize| cdf_at(a, v as i64);
    let fm = |v: usize| cdf_at(a, v as i64 - 1);
    let mut a10 = vec![0.0; n.max(s + 1)];
    let mut a11 = vec![0.0; n.max(s + 1)];
    for v in 1..a10.len() {
        if v < s {
            a10[v] = (f(v) - fm(v)) / (pb - pa);
        } else if v == s {
            a10[v] = (pb - fm(v)) / (pb - pa);
            a11[v] = (f(v) - pb) / (1.0 - pb);
        } else {
            a11[v] = (f(v) - fm(v)) / (1.0 - pb);
        }
    }
    Ok((GroupPmf::Pmf(a10), GroupPmf::Pmf(a11), b01, b11, Some(s as u64)))
}

/// Countermonotone case for the coordinate with cdf `a` and zero probability
/// `pa`, partner zero probability `pb`. Returns the conditionals given the
/// partner is zero / positive and the threshold.
fn lower_oriented(a: &[f64], pa: f64, pb: f64) -> Result<(GroupPmf, GroupPmf, Option<u64>)> {
    let n = a.len();
    let q = 1.0 - pa - pb;
    let f = |v: usize| cdf_at(a, v as i64);
    let fm = |v: usize| cdf_at(a, v as i64 - 1);
    if pb <= 0.0 {
        // The partner is never zero: the "given zero" group is empty and the
        // other is the plain positive part.
        let pos = if pa >= 1.0 {
            GroupPmf::Empty
        } else {
            GroupPmf::Pmf(
                (0..n)
                    .map(|v| if v == 0 { 0.0 } else { (f(v) - fm(v)) / (1.0 - pa) })
                    .collect(),
            )
        };
        return Ok((GroupPmf::Empty, pos, None));
    }
    let s = find_threshold_lower(|v| cdf_at(a, v), pb)? as usize;
    let len = n.max(s + 1);
    let mut a10 = vec![0.0; len];
    let mut a11 = vec![0.0; len];
    for v in 1..len {
        if v < s {
            a11[v] = (f(v) - fm(v)) / q;
        } else if v == s {
            a10[v] = (f(v) + pb - 1.0) / pb;
            a11[v] = (1.0 - pb - fm(v)) / q;
        } else {
            a10[v] = (f(v) - fm(v)) / pb;
        }
    }
    let a11 = if q > 0.0 { GroupPmf::Pmf(a11) } else { GroupPmf::Empty };
    Ok((GroupPmf::Pmf(a10), a11, Some(s as u64)))
}

/// Probability that two independent draws of the both-positive conditioned
/// pair tie in at least one coordinate, with the joint set to the chosen
/// Fréchet–Hoeffding bound:
/// `Σ qX(x)² + Σ qY(y)² - Σ q(x, y)²`.
pub fn tie_prob_under_bound(fx: &ZipMargin, fy: &ZipMargin, which: FhBound, tail_tol: f64) -> Result<f64> {
    let grid = match which {
        FhBound::Upper => JointPmfGrid::from_copula(fx, fy, &Comonotone, tail_tol)?,
        FhBound::Lower => JointPmfGrid::from_copula(fx, fy, &Countermonotone, tail_tol)?,
    };
    tie_prob_positive_part(&grid, tail_tol)
}

/// Both-positive tie probability of an arbitrary grid.
pub fn tie_prob_positive_part(grid: &JointPmfGrid, tail_tol: f64) -> Result<f64> {
    let side = grid.side();
    let mut qx = vec![0.0; side];
    let mut qy = vec![0.0; side];
    let mut p11 = 0.0;
    for x in 1..side {
        for y in 1..side {
            let p = grid.prob(x, y);
            qx[x] += p;
            qy[y] += p;
            p11 += p;
        }
    }
    if p11 <= tail_tol {
        return Err(Error::Degenerate(format!(
            "both-positive mass {p11:e} is below the tolerance {tail_tol:e}"
        )));
    }
    let sq = |v: &[f64]| v.iter().map(|p| (p / p11) * (p / p11)).sum::<f64>();
    let mut joint = 0.0;
    for x in 1..side {
        for y in 1..side {
            let q = grid.prob(x, y) / p11;
            joint += q * q;
        }
    }
    Ok(sq(&qx) + sq(&qy) - joint)
}

/// Upper end of the `tau_A` range. `tie_u` is only evaluated when the
/// both-positive mass under the comonotone joint is positive.
fn tau_a_upper<F, G, T>(p1: f64, p2: f64, f: F, g: G, tie_u: T, r: &mut BoundsReport) -> Result<()>
where
    F: Fn(i64) -> f64,
    G: Fn(i64) -> f64,
    T: FnOnce() -> Result<f64>,
{
    // Equal zero probabilities take the first branch; the correction term is
    // then zero in both.
    let (p, cdf): (f64, &dyn Fn(i64) -> f64) = if p1 <= p2 { (p2, &f) } else { (p1, &g) };
    if p >= 1.0 {
        r.upper = 0.0;
        return Ok(());
    }
    let threshold = find_threshold_upper(cdf, p)?;
    let t = threshold as i64;
    let tie = tie_u()?;
    r.pu_t11 = Some(tie);
    if p1 <= p2 {
        r.s_tilde = Some(threshold);
    } else {
        r.t_tilde = Some(threshold);
    }
    r.upper = (1.0 - p * p) - (1.0 - p) * (1.0 - p) * tie - 2.0 * (p - cdf(t - 1)) * (cdf(t) - p);
    Ok(())
}

/// Lower end of the `tau_A` range. `tie_l` is only evaluated when
/// `1 - p1 - p2 > 0`.
fn tau_a_lower<F, G, T>(p1: f64, p2: f64, f: F, g: G, tie_l: T, r: &mut BoundsReport) -> Result<()>
where
    F: Fn(i64) -> f64,
    G: Fn(i64) -> f64,
    T: FnOnce() -> Result<f64>,
{
    let q = 1.0 - p1 - p2;
    if q <= 0.0 {
        r.lower = -2.0 * (1.0 - p1) * (1.0 - p2);
        return Ok(());
    }
    let tie = tie_l()?;
    r.pl_t11 = Some(tie);
    let mut correction = 0.0;
    if p2 > 0.0 {
        let s = find_threshold_lower(&f, p2)?;
        r.s_tilde_prime = Some(s);
        let s = s as i64;
        correction += (f(s) + p2 - 1.0) * (1.0 - p2 - f(s - 1));
    }
    if p1 > 0.0 {
        let t = find_threshold_lower(&g, p1)?;
        r.t_tilde_prime = Some(t);
        let t = t as i64;
        correction += (g(t) + p1 - 1.0) * (1.0 - p1 - g(t - 1));
    }
    r.lower = p1 * p1 + p2 * p2 - 1.0 + q * q * tie + 2.0 * correction;
    Ok(())
}

/// Exact range of `tau_A` for known zero-inflated Poisson margins.
pub fn exact_tau_a_bounds(fx: &ZipMargin, fy: &ZipMargin, tail_tol: f64) -> Result<BoundsReport> {
    let (p1, p2) = (fx.zero_prob(), fy.zero_prob());
    let mut r = BoundsReport::new(BoundsKind::ExactTauA, p1, p2);
    let f = |s: i64| fx.cdf(s);
    let g = |s: i64| fy.cdf(s);
    tau_a_upper(
        p1,
        p2,
        f,
        g,
        || tie_prob_under_bound(fx, fy, FhBound::Upper, tail_tol),
        &mut r,
    )?;
    tau_a_lower(
        p1,
        p2,
        f,
        g,
        || tie_prob_under_bound(fx, fy, FhBound::Lower, tail_tol),
        &mut r,
    )?;
    Ok(r)
}

/// Right-continuous empirical cdf of a sample of counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<u64>,
}

impl EmpiricalCdf {
    pub fn new(values: impl IntoIterator<Item = u64>) -> Self {
        let mut sorted: Vec<u64> = values.into_iter().collect();
        sorted.sort_unstable();
        Self { sorted }
    }

    pub fn cdf(&self, s: i64) -> f64 {
        if s < 0 || self.sorted.is_empty() {
            return 0.0;
        }
        let below = self.sorted.partition_point(|&v| v <= s as u64);
        below as f64 / self.sorted.len() as f64
    }
}

/// Unbiased frequency of ties between two distinct draws,
/// `Σ n_v (n_v - 1) / (m (m - 1))`; zero when `m < 2`.
pub fn pair_tie_frequency(values: impl IntoIterator<Item = u64>) -> f64 {
    let mut v: Vec<u64> = values.into_iter().collect();
    let m = v.len();
    if m < 2 {
        return 0.0;
    }
    v.sort_unstable();
    let tied: u64 = v
        .chunk_by(|a, b| a == b)
        .map(|run| {
            let k = run.len() as u64;
            k * (k - 1)
        })
        .sum();
    tied as f64 / (m as f64 * (m as f64 - 1.0))
}

/// How the both-positive tie probability is estimated in [`estimate_bounds_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieFrequency {
    /// Tied pairs among the `m` both-positive rows over `m (m - 1)`.
    #[default]
    PositivePairs,
    /// Tied pairs among the both-positive rows over `n (n - 1)`, i.e. the
    /// frequency of a tie between two rows that are both positive. Smaller,
    /// so the estimated range is wider.
    AllPairs,
}

/// Nonparametric estimate of the `tau_A` range from a sample.
///
/// Without any both-positive row the `tau_H` range at the sample zero
/// frequencies is returned with `fallback` set.
pub fn estimate_bounds(sample: &PairedSample) -> Result<BoundsReport> {
    estimate_bounds_with(sample, TieFrequency::PositivePairs)
}

pub fn estimate_bounds_with(sample: &PairedSample, ties: TieFrequency) -> Result<BoundsReport> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let fx = EmpiricalCdf::new(sample.xs());
    let fy = EmpiricalCdf::new(sample.ys());
    let (p1, p2) = (fx.cdf(0), fy.cdf(0));
    let positive: Vec<(u64, u64)> = sample
        .pairs()
        .iter()
        .copied()
        .filter(|&(x, y)| x > 0 && y > 0)
        .collect();
    if positive.is_empty() {
        let mut r = denuit_bounds(p1, p2)?;
        r.fallback = true;
        return Ok(r);
    }
    let mut tie =
        pair_tie_frequency(positive.iter().map(|p| p.0)).max(pair_tie_frequency(positive.iter().map(|p| p.1)));
    if ties == TieFrequency::AllPairs {
        let m = positive.len() as f64;
        tie *= m * (m - 1.0) / (n as f64 * (n as f64 - 1.0));
    }
    let mut r = BoundsReport::new(BoundsKind::EstimatedTauA, p1, p2);
    let f = |s: i64| fx.cdf(s);
    let g = |s: i64| fy.cdf(s);
    tau_a_upper(p1, p2, f, g, || Ok(tie), &mut r)?;
    tau_a_lower(p1, p2, f, g, || Ok(tie), &mut r)?;
    Ok(r)
}
