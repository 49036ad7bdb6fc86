//! Moreau envelope of the zero norm: a non-Lipschitz sparsity penalty
//! smoothed into a model with descent constant `1/r`, then minimized.
//!
//! ```bash
//! cargo run --example moreau_sparse
//! ```

use std::sync::Arc;

use subderiv::calculus::sum;
use subderiv::oracles::{half_squared_distance, moreau_envelope, ProxFriendly};
use subderiv::solver::run;
use subderiv::verify::descent_property_sample;
use subderiv::{pt, FunctionModel, NormChoice, Result, SolverConfig};

fn main() -> Result<()> {
    let r = 0.5;
    let env = moreau_envelope(ProxFriendly::ZeroNorm { n: 3, cost: 0.2 }, r)?;
    println!("descent constant of the envelope: {:?}", env.descent_constant());

    // The tie point t = sqrt(2 r cost) has two proximal points.
    let tie = (2.0f64 * r * 0.2).sqrt();
    let x = pt![tie, 1.0, 0.0];
    for w in [pt![1.0, 0.0, 0.0], pt![-1.0, 0.0, 0.0]] {
        println!("d e_r(x)({:?}) = {}", w.as_slice(), env.subderivative(&x, &w)?);
    }
    let sample = descent_property_sample(&env, 1.0 / r, &[-2.0; 3], &[2.0; 3], 2000, 7)?;
    println!(
        "descent property with L = 1/r: {} violations in {} pairs (max gap {:.2e})",
        sample.violations.len(),
        sample.pairs,
        sample.max_gap
    );

    // Sparse fit: ½‖x − c‖² + e_r[cost‖·‖₀](x).
    let f = sum(vec![Arc::new(half_squared_distance(vec![1.5, 0.1, -0.05])), Arc::new(env)])?;
    let cfg = SolverConfig {
        epsilon: 1e-6,
        norm: NormChoice::L2,
        ..Default::default()
    };
    let trace = run(&f, &pt![0.0, 1.0, -1.0], &cfg)?;
    println!(
        "status {} after {} steps, x = {:?}, f = {:.6}",
        trace.status.as_str(),
        trace.records.len(),
        trace.final_x.as_slice(),
        trace.final_f
    );
    Ok(())
}
