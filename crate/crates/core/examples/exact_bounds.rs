//! Exact attainable range of tau_A for a few zero-inflated Poisson margins,
//! next to the tau_H range and the tau actually reached by the comonotone and
//! countermonotone joints.

use zitau::bounds::{denuit_bounds, exact_tau_a_bounds};
use zitau::distributions::{Comonotone, Countermonotone};
use zitau::oracle::true_tau;
use zitau::{JointPmfGrid, ZipMargin, DEFAULT_TAIL_TOL};

fn main() -> zitau::Result<()> {
    let cases = [
        ((0.2, 2.0), (0.2, 2.0)),
        ((0.8, 2.0), (0.8, 2.0)),
        ((0.2, 2.0), (0.2, 8.0)),
        ((0.8, 2.0), (0.8, 8.0)),
        ((0.2, 8.0), (0.2, 8.0)),
        ((0.8, 8.0), (0.8, 8.0)),
    ];
    println!(
        "{:>12} {:>12} | {:>8} {:>8} | {:>8} {:>8} | {:>8} {:>8}",
        "X", "Y", "H low", "H up", "A low", "A up", "tau(W)", "tau(M)"
    );
    for ((pi_x, lx), (pi_y, ly)) in cases {
        let fx = ZipMargin::new(pi_x, lx)?;
        let fy = ZipMargin::new(pi_y, ly)?;
        let h = denuit_bounds(fx.zero_prob(), fy.zero_prob())?;
        let a = exact_tau_a_bounds(&fx, &fy, DEFAULT_TAIL_TOL)?;
        let upper = true_tau(&JointPmfGrid::from_copula(&fx, &fy, &Comonotone, DEFAULT_TAIL_TOL)?)?;
        let lower = true_tau(&JointPmfGrid::from_copula(
            &fx,
            &fy,
            &Countermonotone,
            DEFAULT_TAIL_TOL,
        )?)?;
        println!(
            "{:>12} {:>12} | {:>8.4} {:>8.4} | {:>8.4} {:>8.4} | {:>8.4} {:>8.4}",
            format!("ZIP({pi_x},{lx})"),
            format!("ZIP({pi_y},{ly})"),
            h.lower,
            h.upper,
            a.lower,
            a.upper,
            lower,
            upper
        );
        assert!((a.upper - upper).abs() < 1e-8 && (a.lower - lower).abs() < 1e-8);
    }
    Ok(())
}
