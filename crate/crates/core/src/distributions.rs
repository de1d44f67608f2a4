//! Zero-inflated Poisson margins, copulas on the unit square, truncated joint
//! pmf grids and the exact pair sampler.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Inclusion-exclusion noise tolerated before a cell is declared negative.
pub const NEGATIVE_CELL_TOL: f64 = 1e-12;

/// Largest Poisson mean accepted; `exp(-lambda)` underflows past ~745.
pub const MAX_LAMBDA: f64 = 700.0;

/// A zero-inflated Poisson law: with probability `pi` draw from
/// Poisson(`lambda`), otherwise return 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipMargin {
    pi: f64,
    lambda: f64,
}

impl ZipMargin {
    pub fn new(pi: f64, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pi) {
            return Err(Error::Domain(format!("pi = {pi} is not in [0, 1]")));
        }
        if !(lambda > 0.0 && lambda <= MAX_LAMBDA) {
            return Err(Error::Domain(format!("lambda = {lambda} is not in (0, {MAX_LAMBDA}]")));
        }
        Ok(Self { pi, lambda })
    }

    /// Mass carried by the Poisson component.
    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `P(X = 0) = (1 - pi) + pi * exp(-lambda)`.
    pub fn zero_prob(&self) -> f64 {
        (1.0 - self.pi) + self.pi * (-self.lambda).exp()
    }

    pub fn pmf(&self, s: i64) -> f64 {
        if s < 0 {
            return 0.0;
        }
        let poisson = PoissonTerms::new(self.lambda).nth(s as usize).unwrap();
        if s == 0 {
            (1.0 - self.pi) + self.pi * poisson
        } else {
            self.pi * poisson
        }
    }

    pub fn cdf(&self, s: i64) -> f64 {
        if s < 0 {
            return 0.0;
        }
        let poisson: f64 = PoissonTerms::new(self.lambda).take(s as usize + 1).sum();
        ((1.0 - self.pi) + self.pi * poisson).min(1.0)
    }

    /// Cdf values `F(0), ..., F(max)`, accumulated in one pass.
    pub fn cdf_table(&self, max: usize) -> Vec<f64> {
        let mut acc = 0.0;
        PoissonTerms::new(self.lambda)
            .take(max + 1)
            .map(|term| {
                acc += term;
                ((1.0 - self.pi) + self.pi * acc).min(1.0)
            })
            .collect()
    }

    /// Generalised inverse `min{s >= 0 : F(s) >= u}` for `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> Result<u64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile level {u} is not in (0, 1)")));
        }
        let base = 1.0 - self.pi;
        let mut acc = 0.0;
        for (s, term) in PoissonTerms::new(self.lambda).enumerate() {
            acc += term;
            if base + self.pi * acc >= u {
                return Ok(s as u64);
            }
            // Past the mode with an underflowed term the cdf cannot grow any
            // further in floating point; the remaining gap is rounding.
            if term == 0.0 && s as f64 > self.lambda {
                return Ok(s as u64);
            }
        }
        unreachable!("PoissonTerms is infinite")
    }

    /// Smallest `M` with `1 - F(M) <= tail`.
    pub fn truncation_point(&self, tail: f64) -> usize {
        let base = 1.0 - self.pi;
        let mut acc = 0.0;
        for (s, term) in PoissonTerms::new(self.lambda).enumerate() {
            acc += term;
            if 1.0 - (base + self.pi * acc) <= tail || (term == 0.0 && s as f64 > self.lambda) {
                return s;
            }
        }
        unreachable!("PoissonTerms is infinite")
    }
}

/// Poisson pmf terms by the recurrence `p(k+1) = p(k) * lambda / (k+1)`.
#[derive(Debug, Clone)]
struct PoissonTerms {
    lambda: f64,
    k: usize,
    current: f64,
}

impl PoissonTerms {
    fn new(lambda: f64) -> Self {
        Self {
            lambda,
            k: 0,
            current: (-lambda).exp(),
        }
    }
}

impl Iterator for PoissonTerms {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.current;
        self.k += 1;
        self.current *= self.lambda / self.k as f64;
        Some(out)
    }
}

/// A copula evaluated on the unit square. Arguments are assumed to be in
/// `[0, 1]`; callers that accept user input should go through
/// [`FrechetCopula::cdf`], which validates.
pub trait Copula {
    fn eval(&self, u: f64, v: f64) -> f64;
}

/// `C(u, v) = (1 - rho) u v + rho min(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetCopula {
    rho: f64,
}

impl FrechetCopula {
    pub fn new(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Domain(format!("rho = {rho} is not in [0, 1]")));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        for (name, value) in [("u", u), ("v", v)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Domain(format!("{name} = {value} is not in [0, 1]")));
            }
        }
        Ok(self.eval(u, v))
    }
}

impl Copula for FrechetCopula {
    fn eval(&self, u: f64, v: f64) -> f64 {
        (1.0 - self.rho) * u * v + self.rho * u.min(v)
    }
}

/// Upper Fréchet–Hoeffding bound `M(u, v) = min(u, v)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Comonotone;

impl Copula for Comonotone {
    fn eval(&self, u: f64, v: f64) -> f64 {
        u.min(v)
    }
}

/// Lower Fréchet–Hoeffding bound `W(u, v) = max(u + v - 1, 0)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Countermonotone;

impl Copula for Countermonotone {
    fn eval(&self, u: f64, v: f64) -> f64 {
        (u + v - 1.0).max(0.0)
    }
}

/// A bivariate pmf on `{0..=M}²` plus the probability left outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmfGrid {
    order: usize,
    probs: Vec<f64>,
    tail_mass: f64,
}

impl JointPmfGrid {
    /// Builds `p(x, y)` from `H(x, y) = C(F(x), G(y))` by rectangle
    /// inclusion-exclusion, truncating both margins so each leaves at most
    /// `tail_tol / 2` outside the grid.
    pub fn from_copula<C: Copula>(fx: &ZipMargin, fy: &ZipMargin, copula: &C, tail_tol: f64) -> Result<Self> {
        if !(tail_tol > 0.0) {
            return Err(Error::Domain(format!("tail_tol = {tail_tol} must be positive")));
        }
        let order = fx
            .truncation_point(tail_tol / 2.0)
            .max(fy.truncation_point(tail_tol / 2.0));
        let f = fx.cdf_table(order);
        let g = fy.cdf_table(order);
        Self::from_joint_cdf(order, |x, y| copula.eval(f[x], g[y]))
    }

    /// Builds a grid from an arbitrary joint cdf evaluated at integer points
    /// `0..=order` in each coordinate.
    pub fn from_joint_cdf<H>(order: usize, cdf: H) -> Result<Self>
    where
        H: Fn(usize, usize) -> f64,
    {
        let side = order + 1;
        let mut h = vec![0.0; side * side];
        for x in 0..side {
            for y in 0..side {
                h[x * side + y] = cdf(x, y);
            }
        }
        let at = |x: usize, y: usize| h[x * side + y];
        let mut probs = vec![0.0; side * side];
        let mut total = 0.0;
        for x in 0..side {
            for y in 0..side {
                let mut cell = at(x, y);
                if x > 0 {
                    cell -= at(x - 1, y);
                }
                if y > 0 {
                    cell -= at(x, y - 1);
                }
                if x > 0 && y > 0 {
                    cell += at(x - 1, y - 1);
                }
                if cell < -NEGATIVE_CELL_TOL {
                    return Err(Error::InvalidCdf { x, y, mass: cell });
                }
                let cell = cell.max(0.0);
                probs[x * side + y] = cell;
                total += cell;
            }
        }
        Ok(Self {
            order,
            probs,
            tail_mass: (1.0 - total).max(0.0),
        })
    }

    /// Wraps explicit probabilities (rows indexed by `x`). The matrix must be
    /// square and non-negative with total mass at most one.
    pub fn from_probs(rows: Vec<Vec<f64>>) -> Result<Self> {
        let side = rows.len();
        if side == 0 || rows.iter().any(|r| r.len() != side) {
            return Err(Error::Domain("probability matrix must be square and non-empty".into()));
        }
        let probs: Vec<f64> = rows.into_iter().flatten().collect();
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Domain("probabilities must be non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + NEGATIVE_CELL_TOL {
            return Err(Error::Domain(format!("total mass {total} exceeds one")));
        }
        Ok(Self {
            order: side - 1,
            probs,
            tail_mass: (1.0 - total).max(0.0),
        })
    }

    /// Truncation order `M`; the grid covers `{0..=M}²`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn side(&self) -> usize {
        self.order + 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.side() + y]
    }

    /// Row sums, i.e. the pmf of `X` on the grid.
    pub fn marginal_x(&self) -> Vec<f64> {
        self.probs.chunks(self.side()).map(|row| row.iter().sum()).collect()
    }

    /// Column sums, i.e. the pmf of `Y` on the grid.
    pub fn marginal_y(&self) -> Vec<f64> {
        let side = self.side();
        let mut out = vec![0.0; side];
        for row in self.probs.chunks(side) {
            for (acc, p) in out.iter_mut().zip(row) {
                *acc += p;
            }
        }
        out
    }

    /// Total mass on the grid.
    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Observed `(x, y)` count pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedSample {
    pairs: Vec<(u64, u64)>,
}

impl PairedSample {
    pub fn new(pairs: Vec<(u64, u64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn ys(&self) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().map(|p| p.1)
    }

    /// The sample with coordinates exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            pairs: self.pairs.iter().map(|&(x, y)| (y, x)).collect(),
        }
    }
}

/// Draws `n` pairs from `C(F(x), G(y))` with `C` the Fréchet copula.
///
/// Each pair consumes: `U ~ Open01`, then a Bernoulli(`rho`) switch drawn as
/// another uniform, then (only when the switch is off) an independent
/// `V ~ Open01`. With the switch on, `V = U`. This is exact sampling from the
/// mixture `(1 - rho) * Pi + rho * M`.
pub fn sample_pairs<R: Rng + ?Sized>(
    fx: &ZipMargin,
    fy: &ZipMargin,
    copula: &FrechetCopula,
    n: usize,
    rng: &mut R,
) -> Result<PairedSample> {
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let x_table = QuantileTable::new(fx);
    let y_table = QuantileTable::new(fy);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.sample(Open01);
        let comonotone = rng.random::<f64>() < copula.rho();
        let v: f64 = if comonotone { u } else { rng.sample(Open01) };
        pairs.push((x_table.quantile(u), y_table.quantile(v)));
    }
    PairedSample::new(pairs)
}

/// Cached cdf values for repeated inverse-cdf lookups; falls back to the
/// margin's own scan beyond the cached range.
struct QuantileTable<'a> {
    margin: &'a ZipMargin,
    cdf: Vec<f64>,
}

impl<'a> QuantileTable<'a> {
    fn new(margin: &'a ZipMargin) -> Self {
        let m = margin.truncation_point(1e-12);
        Self {
            margin,
            cdf: margin.cdf_table(m),
        }
    }

    fn quantile(&self, u: f64) -> u64 {
        let idx = self.cdf.partition_point(|&c| c < u);
        if idx < self.cdf.len() {
            idx as u64
        } else {
            self.margin.quantile(u).expect("u drawn from (0, 1)")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn zip(pi: f64, lambda: f64) -> ZipMargin {
        ZipMargin::new(pi, lambda).unwrap()
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(zip(1.0, 2.0).cdf(-1), 0.0);
        // (1 - 0.8) + 0.8 e^{-2}, 40-digit reference
        assert!((zip(0.8, 2.0).cdf(0) - 0.308_268_226_589_290_15).abs() < 1e-15);
        assert_eq!(zip(0.0, 5.0).cdf(0), 1.0);
        let reference = [
            0.308_268_226_589_290_15,
            0.524_804_679_767_870_5,
            0.741_341_132_946_450_8,
        ];
        for (s, want) in reference.iter().enumerate() {
            assert!((zip(0.8, 2.0).cdf(s as i64) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn quantile_examples() {
        let m = zip(0.8, 2.0);
        assert_eq!(m.quantile(0.1).unwrap(), 0);
        assert_eq!(m.quantile(0.31).unwrap(), 1);
        // Poisson(2): F(8) = 0.99976..., F(9) = 0.99995...
        assert_eq!(zip(1.0, 2.0).quantile(0.9999).unwrap(), 9);
        assert!(m.quantile(0.0).is_err());
        assert!(m.quantile(1.0).is_err());
        assert!(m.quantile(f64::NAN).is_err());
    }

    #[test]
    fn quantile_near_one_terminates() {
        let m = zip(1.0, 3.0);
        let q = m.quantile(1.0 - f64::EPSILON / 2.0).unwrap();
        assert!(q > 10 && q < 60);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ZipMargin::new(-0.1, 1.0).is_err());
        assert!(ZipMargin::new(1.1, 1.0).is_err());
        assert!(ZipMargin::new(0.5, 0.0).is_err());
        assert!(ZipMargin::new(0.5, f64::NAN).is_err());
        assert!(FrechetCopula::new(1.5).is_err());
    }

    #[test]
    fn pmf_and_tail_account_for_all_mass() {
        for m in [zip(0.8, 2.0), zip(0.2, 8.0), zip(1.0, 0.5), zip(0.0, 3.0)] {
            for max in [0_i64, 1, 5, 20, 40] {
                let head: f64 = (0..=max).map(|s| m.pmf(s)).sum();
                assert!((head + (1.0 - m.cdf(max)) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frechet_examples() {
        let eval = |rho, u, v| FrechetCopula::new(rho).unwrap().cdf(u, v).unwrap();
        assert!((eval(0.0, 0.3, 0.7) - 0.21).abs() < 1e-15);
        assert_eq!(eval(1.0, 0.3, 0.7), 0.3);
        assert!((eval(0.5, 0.4, 0.6) - 0.32).abs() < 1e-15);
        assert!(FrechetCopula::new(0.5).unwrap().cdf(1.2, 0.5).is_err());
        for rho in [0.0, 0.3, 1.0] {
            for u in [0.0, 0.25, 0.9, 1.0] {
                assert_eq!(eval(rho, u, 0.0), 0.0);
                assert!((eval(rho, u, 1.0) - u).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn degenerate_grid() {
        let m = zip(1.0, 1e-4);
        let grid = JointPmfGrid::from_copula(&m, &m, &FrechetCopula::new(0.3).unwrap(), 1e-10).unwrap();
        assert!((grid.prob(0, 0) - 1.0).abs() < 1e-3);
        assert!(grid.tail_mass() < 1e-10);
    }

    #[test]
    fn independence_grid_factorizes() {
        let m = zip(0.8, 2.0);
        let grid = JointPmfGrid::from_copula(&m, &m, &FrechetCopula::new(0.0).unwrap(), 1e-10).unwrap();
        for x in 0..grid.side() {
            for y in 0..grid.side() {
                let want = m.pmf(x as i64) * m.pmf(y as i64);
                assert!((grid.prob(x, y) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn comonotone_grid_reproduces_margins() {
        let m = zip(0.8, 2.0);
        let grid = JointPmfGrid::from_copula(&m, &m, &Comonotone, 1e-10).unwrap();
        for (x, row) in grid.marginal_x().iter().enumerate() {
            assert!((row - m.pmf(x as i64)).abs() < 1e-10);
        }
        assert!(grid.tail_mass() <= 1e-10);
    }

    #[test]
    fn grid_rejects_non_cdf() {
        // Decreasing in x: every interior cell is negative.
        let err = JointPmfGrid::from_joint_cdf(3, |x, y| (1.0 - x as f64 * 0.2) * y as f64 * 0.1).unwrap_err();
        assert!(matches!(err, Error::InvalidCdf { .. }));
    }

    #[test]
    fn grid_clamps_rounding_noise() {
        let grid = JointPmfGrid::from_joint_cdf(1, |x, y| match (x, y) {
            (0, 0) => 0.5,
            _ => 0.5 + 5e-13,
        })
        .unwrap();
        // p(1, 1) = -5e-13 before clamping
        assert_eq!(grid.prob(1, 1), 0.0);
    }

    #[test]
    fn comonotone_sampling_with_equal_margins() {
        let m = zip(0.8, 2.0);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let s = sample_pairs(&m, &m, &FrechetCopula::new(1.0).unwrap(), 10, &mut rng).unwrap();
        assert!(s.pairs().iter().all(|(x, y)| x == y));
    }

    #[test]
    fn degenerate_margins_sample_zero() {
        let m = zip(0.0, 2.0);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let s = sample_pairs(&m, &m, &FrechetCopula::new(0.4).unwrap(), 5, &mut rng).unwrap();
        assert!(s.pairs().iter().all(|&p| p == (0, 0)));
    }

    #[test]
    fn independent_sampling_has_uncorrelated_zero_indicators() {
        let m = zip(0.8, 2.0);
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        let n = 100_000;
        let s = sample_pairs(&m, &m, &FrechetCopula::new(0.0).unwrap(), n, &mut rng).unwrap();
        let a: Vec<f64> = s.xs().map(|x| (x > 0) as u8 as f64).collect();
        let b: Vec<f64> = s.ys().map(|y| (y > 0) as u8 as f64).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ma, mb) = (mean(&a), mean(&b));
        let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n as f64;
        let corr = cov / (ma * (1.0 - ma) * mb * (1.0 - mb)).sqrt();
        assert!(corr.abs() < 0.02, "corr = {corr}");
    }
}
