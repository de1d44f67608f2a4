//! Reference tables for the acceptance run in `tests/acceptance.rs`.
//!
//! All values are rounded to two decimals. MSE columns are multiplied by 100.

/// One row of the estimator table.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorRow {
    pub lambda: (f64, f64),
    pub pi: f64,
    pub rho: f64,
    pub true_tau: f64,
    pub mean_h: f64,
    pub mse_h: f64,
    pub mean_a: f64,
    pub mse_a: f64,
}

/// One row of the bounds table.
#[derive(Debug, Clone, Copy)]
pub struct BoundsRow {
    pub lambda: (f64, f64),
    pub pi: f64,
    pub estimated_h: (f64, f64),
    pub estimated_a: (f64, f64),
    pub exact_a: (f64, f64),
}

const fn e(lambda: (f64, f64), pi: f64, rho: f64, v: [f64; 5]) -> EstimatorRow {
    EstimatorRow {
        lambda,
        pi,
        rho,
        true_tau: v[0],
        mean_h: v[1],
        mse_h: v[2],
        mean_a: v[3],
        mse_a: v[4],
    }
}

/// N = 150, 1000 replications, in table order.
pub const ESTIMATOR_TABLE: [EstimatorRow; 18] = [
    e((2.0, 2.0), 0.2, 0.2, [0.07, 0.07, 0.11, 0.06, 0.12]),
    e((2.0, 2.0), 0.2, 0.5, [0.16, 0.16, 0.17, 0.15, 0.17]),
    e((2.0, 2.0), 0.2, 0.8, [0.26, 0.25, 0.21, 0.25, 0.21]),
    e((2.0, 2.0), 0.8, 0.2, [0.15, 0.24, 1.16, 0.15, 0.38]),
    e((2.0, 2.0), 0.8, 0.5, [0.37, 0.46, 1.23, 0.40, 0.48]),
    e((2.0, 2.0), 0.8, 0.8, [0.62, 0.72, 1.21, 0.69, 0.77]),
    e((2.0, 8.0), 0.2, 0.2, [0.07, 0.06, 0.12, 0.06, 0.12]),
    e((2.0, 8.0), 0.2, 0.5, [0.16, 0.16, 0.17, 0.15, 0.18]),
    e((2.0, 8.0), 0.2, 0.8, [0.26, 0.25, 0.21, 0.25, 0.21]),
    e((2.0, 8.0), 0.8, 0.2, [0.15, 0.20, 0.63, 0.14, 0.40]),
    e((2.0, 8.0), 0.8, 0.5, [0.36, 0.42, 0.65, 0.38, 0.41]),
    e((2.0, 8.0), 0.8, 0.8, [0.61, 0.67, 0.57, 0.65, 0.40]),
    e((8.0, 8.0), 0.2, 0.2, [0.08, 0.07, 0.13, 0.07, 0.14]),
    e((8.0, 8.0), 0.2, 0.5, [0.18, 0.18, 0.19, 0.17, 0.19]),
    e((8.0, 8.0), 0.2, 0.8, [0.29, 0.28, 0.23, 0.28, 0.23]),
    e((8.0, 8.0), 0.8, 0.2, [0.16, 0.18, 0.47, 0.15, 0.41]),
    e((8.0, 8.0), 0.8, 0.5, [0.40, 0.44, 0.50, 0.41, 0.42]),
    e((8.0, 8.0), 0.8, 0.8, [0.69, 0.73, 0.39, 0.72, 0.33]),
];

const fn b(lambda: (f64, f64), pi: f64, h: (f64, f64), a: (f64, f64), x: (f64, f64)) -> BoundsRow {
    BoundsRow {
        lambda,
        pi,
        estimated_h: h,
        estimated_a: a,
        exact_a: x,
    }
}

/// Estimated bounds averaged over 1000 samples of size 150, and exact bounds.
pub const BOUNDS_TABLE: [BoundsRow; 6] = [
    b((2.0, 2.0), 0.2, (-0.06, 0.29), (-0.06, 0.29), (-0.06, 0.31)),
    b((2.0, 2.0), 0.8, (-0.81, 0.90), (-0.76, 0.84), (-0.75, 0.78)),
    b((2.0, 8.0), 0.2, (-0.07, 0.32), (-0.07, 0.32), (-0.07, 0.31)),
    b((2.0, 8.0), 0.8, (-0.86, 0.90), (-0.82, 0.85), (-0.80, 0.77)),
    b((8.0, 8.0), 0.2, (-0.06, 0.29), (-0.06, 0.29), (-0.06, 0.31)),
    b((8.0, 8.0), 0.8, (-0.81, 0.90), (-0.76, 0.84), (-0.75, 0.78)),
];
