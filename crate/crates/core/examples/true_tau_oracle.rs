//! Exact tau of a discrete joint pmf, its zero-pattern decomposition, and a
//! check of the fast oracle against the quartic brute force.

use zitau::oracle::{decompose, true_tau, true_tau_bruteforce};
use zitau::{FrechetCopula, JointPmfGrid, ZipMargin, DEFAULT_TAIL_TOL};

fn main() -> zitau::Result<()> {
    let fx = ZipMargin::new(0.8, 2.0)?;
    let fy = ZipMargin::new(0.8, 8.0)?;
    for rho in [0.0, 0.2, 0.5, 0.8, 1.0] {
        let grid = JointPmfGrid::from_copula(&fx, &fy, &FrechetCopula::new(rho)?, DEFAULT_TAIL_TOL)?;
        let d = decompose(&grid)?;
        println!(
            "rho {rho:.1}: tau {:.6}  tau_A assembled {:.6}  tau_H assembled {:.6}  (grid order {})",
            true_tau(&grid)?,
            d.tau_a_assembled,
            d.tau_h_assembled,
            grid.order()
        );
    }

    // A small hand-made pmf on {0, 1, 2}^2.
    let grid = JointPmfGrid::from_probs(vec![
        vec![0.20, 0.05, 0.05],
        vec![0.05, 0.20, 0.10],
        vec![0.00, 0.10, 0.25],
    ])?;
    let fast = true_tau(&grid)?;
    let slow = true_tau_bruteforce(&grid)?;
    println!("\nsmall grid: prefix sums {fast:.12}, brute force {slow:.12}");
    let d = decompose(&grid)?;
    println!(
        "p00 {:.2} p01 {:.2} p10 {:.2} p11 {:.2}, tau11 {:.6}",
        d.p00, d.p01, d.p10, d.p11, d.tau11
    );
    Ok(())
}
