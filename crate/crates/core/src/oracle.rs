//! Exact Kendall's tau of a known discrete joint pmf.
//!
//! For two independent draws from `p`, with `H` the grid prefix sums and `F`
//! the prefix sums of the `x` margin:
//!
//! ```text
//! P(concordant) = 2 Σ p(x, y) H(x-1, y-1)
//! P(discordant) = 2 Σ p(x, y) (F(x-1) - H(x-1, y))
//! ```
//!
//! [`decompose`] splits the same quantity by zero pattern and reassembles
//! it from the four pattern masses, the crossing/tie probabilities of the
//! positive conditionals and the inner `tau_11`.

use serde::{Deserialize, Serialize};

use crate::distributions::JointPmfGrid;
use crate::{Error, Result};

/// Largest tail mass accepted by the exact routines.
pub const MAX_ORACLE_TAIL: f64 = 1e-8;

/// Largest grid order the O(M⁴) routine will run on.
pub const BRUTE_FORCE_MAX_ORDER: usize = 25;

fn check_tail(grid: &JointPmfGrid) -> Result<()> {
    if grid.tail_mass() > MAX_ORACLE_TAIL {
        return Err(Error::Precision {
            tail_mass: grid.tail_mass(),
            allowed: MAX_ORACLE_TAIL,
        });
    }
    Ok(())
}

/// Kendall's tau of the grid pmf in O(M²).
pub fn true_tau(grid: &JointPmfGrid) -> Result<f64> {
    check_tail(grid)?;
    let side = grid.side();
    let probs: Vec<f64> = (0..side * side).map(|i| grid.prob(i / side, i % side)).collect();
    Ok(tau_of_square(&probs, side))
}

/// Prefix-sum evaluation on a row-major `side × side` array of masses.
fn tau_of_square(probs: &[f64], side: usize) -> f64 {
    // prefix[(x+1)(side+1) + (y+1)] = H(x, y); row/column 0 hold H(-1, ·) = 0.
    let stride = side + 1;
    let mut prefix = vec![0.0; stride * stride];
    for x in 0..side {
        let mut row = 0.0;
        for y in 0..side {
            row += probs[x * side + y];
            prefix[(x + 1) * stride + y + 1] = prefix[x * stride + y + 1] + row;
        }
    }
    let h = |x: usize, y: usize| prefix[x * stride + y];
    let mut conc = 0.0;
    let mut disc = 0.0;
    for x in 0..side {
        // F(x - 1) = H(x - 1, M)
        let f_before = h(x, side);
        for y in 0..side {
            let p = probs[x * side + y];
            if p == 0.0 {
                continue;
            }
            conc += p * h(x, y);
            disc += p * (f_before - h(x, y + 1));
        }
    }
    2.0 * (conc - disc)
}

/// Kendall's tau by summing `sign((x1 - x2)(y1 - y2)) p(x1, y1) p(x2, y2)`
/// over all ordered cell pairs.
pub fn true_tau_bruteforce(grid: &JointPmfGrid) -> Result<f64> {
    if grid.order() > BRUTE_FORCE_MAX_ORDER {
        return Err(Error::CostGuard {
            order: grid.order(),
            limit: BRUTE_FORCE_MAX_ORDER,
        });
    }
    let side = grid.side() as i64;
    let mut total = 0.0;
    for x1 in 0..side {
        for y1 in 0..side {
            let p1 = grid.prob(x1 as usize, y1 as usize);
            if p1 == 0.0 {
                continue;
            }
            for x2 in 0..side {
                for y2 in 0..side {
                    let sign = ((x1 - x2) * (y1 - y2)).signum() as f64;
                    total += sign * p1 * grid.prob(x2 as usize, y2 as usize);
                }
            }
        }
    }
    Ok(total)
}

/// Exact ingredients of the zero-pattern decomposition of Kendall's tau.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauDecomposition {
    pub tau_direct: f64,
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    /// Kendall's tau of the pmf conditioned on both coordinates positive.
    pub tau11: f64,
    /// `P(X10 > X11)`.
    pub p1_star: f64,
    /// `P(X10 = X11)`.
    pub p1_dagger: f64,
    /// `P(Y01 > Y11)`.
    pub p2_star: f64,
    /// `P(Y01 = Y11)`.
    pub p2_dagger: f64,
    /// Reassembled with the within-margin tie terms.
    pub tau_a_assembled: f64,
    /// Reassembled without them.
    pub tau_h_assembled: f64,
    /// `p11 == 0`: `tau11` is reported as 0.
    pub tau11_degenerate: bool,
}

/// Splits the grid by zero pattern and reassembles Kendall's tau from the
/// pieces. `tau_direct` and `tau_a_assembled` agree up to rounding for any
/// grid.
pub fn decompose(grid: &JointPmfGrid) -> Result<TauDecomposition> {
    let tau_direct = true_tau(grid)?;
    let side = grid.side();

    let p00 = grid.prob(0, 0);
    let p01: f64 = (1..side).map(|y| grid.prob(0, y)).sum();
    let p10: f64 = (1..side).map(|x| grid.prob(x, 0)).sum();
    let mut inner = Vec::with_capacity((side - 1) * (side - 1));
    for x in 1..side {
        for y in 1..side {
            inner.push(grid.prob(x, y));
        }
    }
    let p11: f64 = inner.iter().sum();

    // Unnormalised group masses indexed by value; index 0 is always 0.
    let x10: Vec<f64> = (0..side).map(|x| if x == 0 { 0.0 } else { grid.prob(x, 0) }).collect();
    let y01: Vec<f64> = (0..side).map(|y| if y == 0 { 0.0 } else { grid.prob(0, y) }).collect();
    let mut x11 = vec![0.0; side];
    let mut y11 = vec![0.0; side];
    for x in 1..side {
        for y in 1..side {
            let p = grid.prob(x, y);
            x11[x] += p;
            y11[y] += p;
        }
    }
    let (p1_star, p1_dagger) = crossing_probs(&x10, p10, &x11, p11);
    let (p2_star, p2_dagger) = crossing_probs(&y01, p01, &y11, p11);

    let tau11_degenerate = p11 <= 0.0;
    let tau11 = if tau11_degenerate {
        0.0
    } else {
        let normalised: Vec<f64> = inner.iter().map(|p| p / p11).collect();
        tau_of_square(&normalised, side - 1)
    };

    let shared = p11 * p11 * tau11 + 2.0 * (p00 * p11 - p01 * p10);
    let tau_a_assembled =
        shared + 2.0 * p11 * (p10 * (1.0 - 2.0 * p1_star - p1_dagger) + p01 * (1.0 - 2.0 * p2_star - p2_dagger));
    let tau_h_assembled = shared + 2.0 * p11 * (p10 * (1.0 - 2.0 * p1_star) + p01 * (1.0 - 2.0 * p2_star));

    Ok(TauDecomposition {
        tau_direct,
        p00,
        p01,
        p10,
        p11,
        tau11,
        p1_star,
        p1_dagger,
        p2_star,
        p2_dagger,
        tau_a_assembled,
        tau_h_assembled,
        tau11_degenerate,
    })
}

/// `(P(A > B), P(A = B))` for independent `A ~ a / a_mass`, `B ~ b / b_mass`;
/// zero when either group is empty.
pub(crate) fn crossing_probs(a: &[f64], a_mass: f64, b: &[f64], b_mass: f64) -> (f64, f64) {
    if a_mass <= 0.0 || b_mass <= 0.0 {
        return (0.0, 0.0);
    }
    let mut below = 0.0;
    let mut greater = 0.0;
    let mut equal = 0.0;
    for (v, &pa) in a.iter().enumerate() {
        let pb = b.get(v).copied().unwrap_or(0.0);
        greater += pa * below;
        equal += pa * pb;
        below += pb;
    }
    let norm = a_mass * b_mass;
    (greater / norm, equal / norm)
}
