//! Exact penalty for a complementarity constraint: minimize
//! `½‖x − c‖² + ρ dist(x; {(y, z): ⟨y, z⟩ = 0, y ≤ 0, z ≤ 0})`.
//!
//! ```bash
//! cargo run --example constrained_penalty
//! ```

use std::sync::Arc;

use subderiv::calculus::penalize_smooth;
use subderiv::maps::AffineMap;
use subderiv::oracles::half_squared_distance;
use subderiv::sets::ComplementaritySet;
use subderiv::solver::run;
use subderiv::verify::tangent_membership;
use subderiv::{pt, NormChoice, Result, SetModel, SolverConfig};

fn main() -> Result<()> {
    let set = Arc::new(ComplementaritySet::new(1)?);
    let c = vec![-1.0, -0.5];
    let f = penalize_smooth(
        Arc::new(half_squared_distance(c)),
        Arc::new(AffineMap::identity(2)),
        set.clone(),
        10.0,
    )?;
    let cfg = SolverConfig {
        epsilon: 1e-6,
        norm: NormChoice::LInf,
        max_iter: 5000,
        ..Default::default()
    };
    let trace = run(&f, &pt![1.0, 1.0], &cfg)?;
    let x = &subderiv::Point::new(trace.final_x.clone())?;
    println!(
        "status {} after {} steps: x = {:?}, f = {:.6}, feasible = {}",
        trace.status.as_str(),
        trace.records.len(),
        x.as_slice(),
        trace.final_f,
        set.contains(x)
    );

    // Tangent directions at the corner of the set.
    let id = AffineMap::identity(2);
    let origin = pt![0.0, 0.0];
    for w in [pt![-1.0, 0.0], pt![0.0, -1.0], pt![-1.0, -1.0], pt![1.0, 0.0]] {
        println!(
            "w = {:?} tangent at origin: {}",
            w.as_slice(),
            tangent_membership(&subderiv::maps::SmoothAsSemi(Arc::new(id.clone())), set.as_ref(), &origin, &w)?
        );
    }
    Ok(())
}
