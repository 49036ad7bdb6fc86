//! Convergence audit: run the Armijo descent on `½‖x‖² − ‖x‖₁` and check
//! the sufficient-decrease and `O(1/√N)` stationarity bounds along the
//! trace.
//!
//! ```bash
//! cargo run --example rate_audit
//! ```

use std::sync::Arc;

use subderiv::calculus::sum;
use subderiv::oracles::{half_squared_norm, neg_l1_norm};
use subderiv::solver::{rate_audit, rate_constant, run};
use subderiv::verify::sufficient_decrease_audit;
use subderiv::{pt, FunctionModel, NormChoice, Result, SolverConfig};

fn main() -> Result<()> {
    let f = sum(vec![Arc::new(half_squared_norm(2)), Arc::new(neg_l1_norm(2, 1.0))])?;
    let l = f.descent_constant().expect("sum of models with descent constants");
    let (mu, f_star) = (0.5, -1.0);
    let cfg = SolverConfig {
        epsilon: 1e-3,
        norm: NormChoice::L1,
        max_iter: 10_000,
        ..Default::default()
    };
    let trace = run(&f, &pt![3.0, -3.0], &cfg)?;
    let m = rate_constant(mu, l);
    println!("L = {l}, M = {m}, status {} after {} steps", trace.status.as_str(), trace.records.len());

    let decrease = sufficient_decrease_audit(&trace, m);
    println!("sufficient decrease holds on {}/{} steps", decrease.iter().filter(|b| **b).count(), decrease.len());
    for n in 0..trace.dir_values().len() {
        let a = rate_audit(&trace, f_star, l, mu, n)?;
        println!("N = {n:>2}: min |d_k| = {:.3e} <= {:.3e} : {}", a.lhs, a.rhs, a.rate_holds);
    }
    Ok(())
}
