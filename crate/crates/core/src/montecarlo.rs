//! Replication engine for the simulation study: Table 1 (estimator means and
//! MSE) and Table 2 (averaged bound estimates).
//!
//! Each replication draws from its own ChaCha20 stream. The generator is
//! seeded with `base_seed` and the stream id is
//! `(scenario_index << 32) | rep`, so any replication can be regenerated on
//! its own and the results do not depend on the thread count. Replications
//! are computed in parallel into per-replication slots and reduced in
//! replication order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{denuit_bounds, estimate_bounds_with, exact_tau_a_bounds, TieFrequency};
use crate::distributions::sample_pairs;
use crate::estimators::{estimate_with, Tau11Method};
use crate::oracle::true_tau;
use crate::{Error, FrechetCopula, JointPmfGrid, Result, ZipMargin, DEFAULT_TAIL_TOL};

/// Stream offset separating Table 2 scenarios from Table 1 scenarios.
pub const TABLE2_INDEX_OFFSET: u32 = 1 << 16;

/// Estimator variants used inside each replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimOptions {
    pub tau11: Tau11Method,
    pub ties: TieFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub pi_f: f64,
    pub pi_g: f64,
    pub lambda_f: f64,
    pub lambda_g: f64,
    pub rho: f64,
    pub n: usize,
    pub reps: usize,
    pub base_seed: u64,
}

impl SimScenario {
    pub fn margins(&self) -> Result<(ZipMargin, ZipMargin)> {
        Ok((
            ZipMargin::new(self.pi_f, self.lambda_f)?,
            ZipMargin::new(self.pi_g, self.lambda_g)?,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        self.margins()?;
        FrechetCopula::new(self.rho)?;
        if self.reps == 0 {
            return Err(Error::Domain("reps must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: self.n });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

/// Per-replication values, in the order they were generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub scenario_index: u32,
    pub rep: usize,
    pub tau_hat: f64,
    /// 0 when undefined; see `flagged`.
    pub tau_b: f64,
    pub tau_h: f64,
    pub tau_a: f64,
    pub bounds_h: Interval,
    pub bounds_a: Interval,
    /// Some estimator fell back to a convention value.
    pub flagged: bool,
    /// The `tau_A` bounds fell back to the `tau_H` range.
    pub bounds_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub scenario: SimScenario,
    pub scenario_index: u32,
    pub true_tau: f64,
    pub mean_tau_h: f64,
    pub mse100_tau_h: f64,
    pub mean_tau_a: f64,
    pub mse100_tau_a: f64,
    pub mean_tau_b: f64,
    pub mse100_tau_b: f64,
    pub mean_bounds_h: Interval,
    pub mean_bounds_a: Interval,
    pub exact_bounds_a: Interval,
    pub flagged_reps: usize,
    pub bounds_fallback_reps: usize,
}

/// The random stream used by replication `rep` of scenario `index`.
pub fn replication_rng(base_seed: u64, index: u32, rep: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(base_seed);
    rng.set_stream((u64::from(index) << 32) | rep as u64);
    rng
}

pub fn run_scenario(s: &SimScenario) -> Result<SimResult> {
    run_scenario_at(s, 0)
}

pub fn run_scenario_at(s: &SimScenario, index: u32) -> Result<SimResult> {
    Ok(run_scenario_detailed(s, index, SimOptions::default())?.0)
}

/// Runs one scenario and also returns the per-replication records.
pub fn run_scenario_detailed(
    s: &SimScenario,
    index: u32,
    opts: SimOptions,
) -> Result<(SimResult, Vec<ReplicationRecord>)> {
    s.validate()?;
    if s.reps > u32::MAX as usize {
        return Err(Error::Domain(format!("reps = {} exceeds the stream space", s.reps)));
    }
    let (fx, fy) = s.margins()?;
    let copula = FrechetCopula::new(s.rho)?;
    let grid = JointPmfGrid::from_copula(&fx, &fy, &copula, DEFAULT_TAIL_TOL)?;
    let tau = true_tau(&grid)?;
    let exact = exact_tau_a_bounds(&fx, &fy, DEFAULT_TAIL_TOL)?;

    let records = (0..s.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(s.base_seed, index, rep);
            let sample = sample_pairs(&fx, &fy, &copula, s.n, &mut rng)?;
            let est = estimate_with(&sample, opts.tau11)?;
            let h = denuit_bounds(est.stats.p00 + est.stats.p01, est.stats.p00 + est.stats.p10)?;
            let a = estimate_bounds_with(&sample, opts.ties)?;
            Ok(ReplicationRecord {
                scenario_index: index,
                rep,
                tau_hat: est.tau_hat,
                tau_b: est.tau_b.unwrap_or(0.0),
                tau_h: est.tau_h_hat,
                tau_a: est.tau_a_hat,
                bounds_h: Interval {
                    lower: h.lower,
                    upper: h.upper,
                },
                bounds_a: Interval {
                    lower: a.lower,
                    upper: a.upper,
                },
                flagged: !est.warnings.is_empty(),
                bounds_fallback: a.fallback,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let reps = records.len() as f64;
    let mean = |f: fn(&ReplicationRecord) -> f64| records.iter().map(f).sum::<f64>() / reps;
    let mse100 =
        |f: fn(&ReplicationRecord) -> f64| 100.0 * records.iter().map(|r| (f(r) - tau).powi(2)).sum::<f64>() / reps;
    let result = SimResult {
        scenario: *s,
        scenario_index: index,
        true_tau: tau,
        mean_tau_h: mean(|r| r.tau_h),
        mse100_tau_h: mse100(|r| r.tau_h),
        mean_tau_a: mean(|r| r.tau_a),
        mse100_tau_a: mse100(|r| r.tau_a),
        mean_tau_b: mean(|r| r.tau_b),
        mse100_tau_b: mse100(|r| r.tau_b),
        mean_bounds_h: Interval {
            lower: mean(|r| r.bounds_h.lower),
            upper: mean(|r| r.bounds_h.upper),
        },
        mean_bounds_a: Interval {
            lower: mean(|r| r.bounds_a.lower),
            upper: mean(|r| r.bounds_a.upper),
        },
        exact_bounds_a: Interval {
            lower: exact.lower,
            upper: exact.upper,
        },
        flagged_reps: records.iter().filter(|r| r.flagged).count(),
        bounds_fallback_reps: records.iter().filter(|r| r.bounds_fallback).count(),
    };
    Ok((result, records))
}

const LAMBDAS: [(f64, f64); 3] = [(2.0, 2.0), (2.0, 8.0), (8.0, 8.0)];
const PIS: [f64; 2] = [0.2, 0.8];
const RHOS: [f64; 3] = [0.2, 0.5, 0.8];

/// The 18 Table 1 scenarios in table order: lambdas, then pi, then rho.
pub fn table1_scenarios(seed: u64, n: usize, reps: usize) -> Vec<SimScenario> {
    let mut out = Vec::with_capacity(18);
    for (lambda_f, lambda_g) in LAMBDAS {
        for pi in PIS {
            for rho in RHOS {
                out.push(SimScenario {
                    pi_f: pi,
                    pi_g: pi,
                    lambda_f,
                    lambda_g,
                    rho,
                    n,
                    reps,
                    base_seed: seed,
                });
            }
        }
    }
    out
}

/// The 6 Table 2 margin settings, sampled at rho = 0.5.
pub fn table2_scenarios(seed: u64, n: usize, reps: usize) -> Vec<SimScenario> {
    let mut out = Vec::with_capacity(6);
    for (lambda_f, lambda_g) in LAMBDAS {
        for pi in PIS {
            out.push(SimScenario {
                pi_f: pi,
                pi_g: pi,
                lambda_f,
                lambda_g,
                rho: 0.5,
                n,
                reps,
                base_seed: seed,
            });
        }
    }
    out
}

/// Runs a list of scenarios; scenario `i` uses stream index `offset + i`.
pub fn run_scenarios(scenarios: &[SimScenario], offset: u32, opts: SimOptions) -> Result<Vec<SimResult>> {
    Ok(run_scenarios_detailed(scenarios, offset, opts)?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}

#[allow(clippy::type_complexity)]
pub fn run_scenarios_detailed(
    scenarios: &[SimScenario],
    offset: u32,
    opts: SimOptions,
) -> Result<Vec<(SimResult, Vec<ReplicationRecord>)>> {
    scenarios
        .iter()
        .enumerate()
        .map(|(i, s)| run_scenario_detailed(s, offset + i as u32, opts))
        .collect()
}

pub fn run_table1(seed: u64) -> Result<Vec<SimResult>> {
    run_scenarios(&table1_scenarios(seed, 150, 1000), 0, SimOptions::default())
}

pub fn run_table2(seed: u64) -> Result<Vec<SimResult>> {
    run_scenarios(
        &table2_scenarios(seed, 150, 1000),
        TABLE2_INDEX_OFFSET,
        SimOptions::default(),
    )
}
