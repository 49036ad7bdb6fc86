//! Exact chain and sum rules: build `|x1| + ‖max(0, Ax − b)‖` style
//! composites and compare the closed-form subderivative with a
//! finite-difference quotient.
//!
//! ```bash
//! cargo run --example chain_rule
//! ```

use std::sync::Arc;

use nalgebra::DMatrix;
use subderiv::calculus::{forward_chain, precompose_semidiff, precompose_smooth, sum};
use subderiv::maps::{AffineMap, Relu};
use subderiv::oracles::{half_squared_norm, l1_norm};
use subderiv::verify::{fd_subderivative, FDConfig};
use subderiv::{pt, FunctionModel, Result, SemiDiffMap, SharedModel};

fn main() -> Result<()> {
    // F(x) = max(0, Ax − b), propagated forward layer by layer.
    let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 2.0, 1.0]);
    let affine: Arc<dyn SemiDiffMap> = Arc::new(AffineMap::new(a.clone(), vec![0.0, 1.0])?);
    let relu: Arc<dyn SemiDiffMap> = Arc::new(Relu { dim: 2 });
    let layers = [affine.clone(), relu.clone()];
    let x = pt![1.0, 1.0];
    let w = pt![1.0, -1.0];
    let (y, dy) = forward_chain(&layers, &x, &w)?;
    println!("F(x) = {:?}, dF(x)(w) = {:?}", y.as_slice(), dy.as_slice());

    // g(x) = ½‖max(0, Ax − b)‖² + ‖Ax − b‖₁
    let relu_part: SharedModel = Arc::new(precompose_semidiff(
        Arc::new(half_squared_norm(2)),
        Arc::new(subderiv::maps::ComposedMap::new(relu, affine)?),
    )?);
    let l1_part: SharedModel = Arc::new(precompose_smooth(
        Arc::new(l1_norm(2, 1.0)),
        Arc::new(AffineMap::new(a, vec![0.0, 1.0])?),
    )?);
    let g = sum(vec![relu_part, l1_part])?;

    for x in [pt![1.0, 1.0], pt![0.5, 0.0], pt![0.0, 0.0]] {
        for w in [pt![1.0, 0.0], pt![0.0, 1.0], pt![-1.0, 1.0]] {
            let exact = g.subderivative(&x, &w)?;
            let fd = fd_subderivative(&g, &x, &w, &FDConfig::default())?;
            println!(
                "x={:?} w={:?}: dg = {exact}, finite difference = {} (converged: {})",
                x.as_slice(),
                w.as_slice(),
                fd.value,
                fd.converged
            );
        }
    }
    Ok(())
}
