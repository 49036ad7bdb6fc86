//! Direction search on the difference-of-convex objective
//! `½‖x‖² − λ‖x‖₁` under the three unit balls, cross-checked against a
//! brute-force grid over the sphere.
//!
//! ```bash
//! cargo run --example dc_direction
//! ```

use std::sync::Arc;

use subderiv::calculus::sum;
use subderiv::direction::{solve_l1_extreme, solve_linf_separable};
use subderiv::oracles::{half_squared_norm, neg_l1_norm};
use subderiv::verify::brute_force_direction;
use subderiv::{pt, NormChoice, Result};

fn main() -> Result<()> {
    let f = sum(vec![Arc::new(half_squared_norm(2)), Arc::new(neg_l1_norm(2, 1.0))])?;
    for x in [pt![0.0, 0.0], pt![0.3, -2.0], pt![1.0, 0.0]] {
        let linf = solve_linf_separable(&f, &x)?;
        let l1 = solve_l1_extreme(&f, &x, false)?;
        let l1_reduced = solve_l1_extreme(&f, &x, true)?;
        let brute_inf = brute_force_direction(&f, &x, NormChoice::LInf, 1e-3)?;
        let brute_1 = brute_force_direction(&f, &x, NormChoice::L1, 1e-3)?;
        println!("x = {:?}", x.as_slice());
        println!("  linf separable: w={:?} d={:.6} (grid {:.6})", linf.w.as_slice(), linf.value, brute_inf.value);
        println!("  l1 vertices:    w={:?} d={:.6} (grid {:.6})", l1.w.as_slice(), l1.value, brute_1.value);
        println!("  reduced set (its own gauge ball): w={:?} d={:.6}", l1_reduced.w.as_slice(), l1_reduced.value);
    }
    Ok(())
}
