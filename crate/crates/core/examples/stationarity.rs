//! d-stationarity versus weaker notions: at the origin,
//! `min{0, −x}` has a descent direction although 0 is a Clarke
//! critical point, and the checker reports the certificate.
//!
//! ```bash
//! cargo run --example stationarity
//! ```

use std::sync::Arc;

use subderiv::calculus::pointwise_min;
use subderiv::oracles::linear;
use subderiv::solver::check_d_stationary;
use subderiv::{pt, NormChoice, Result, Strategy};

fn main() -> Result<()> {
    let f = pointwise_min(vec![Arc::new(linear(vec![0.0])), Arc::new(linear(vec![-1.0]))])?;
    for x in [pt![0.0], pt![1.0], pt![-1.0]] {
        let (stationary, witness) = check_d_stationary(&f, &x, 1e-8, NormChoice::L2, Strategy::Auto)?;
        println!(
            "x = {:+.1}: d-stationary = {stationary}, best w = {:?}, d = {:+.3} (exact: {})",
            x[0],
            witness.w.as_slice(),
            witness.value,
            witness.exact
        );
    }
    Ok(())
}
