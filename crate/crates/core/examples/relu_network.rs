//! Training a small ReLU network through the forward-mode chain rule: the
//! loss subderivative is exact, so no smoothing is needed.
//!
//! ```bash
//! cargo run --example relu_network
//! ```

use subderiv::oracles::relu_network_loss;
use subderiv::solver::run;
use subderiv::{FunctionModel, NormChoice, Point, Result, SolverConfig, Strategy};

fn main() -> Result<()> {
    // y = |x| on a handful of points; |x| = relu(x) + relu(−x) is exactly
    // representable with two hidden units.
    let data: Vec<(Vec<f64>, Vec<f64>)> = [-1.0, -0.5, -0.25, 0.25, 0.5, 1.0]
        .iter()
        .map(|&x: &f64| (vec![x], vec![x.abs()]))
        .collect();
    let net = relu_network_loss(vec![1, 2, 1], data)?;
    println!("{} parameters", net.parameter_count());

    // θ = (W1, b1, W2, b2)
    let theta0 = Point::new(vec![0.8, -0.6, 0.1, 0.1, 0.7, 0.5, 0.0])?;
    println!("initial loss {:.6}", net.value(&theta0));
    let cfg = SolverConfig {
        epsilon: 1e-4,
        norm: NormChoice::LInf,
        strategy: Strategy::Auto,
        max_iter: 500,
        ..Default::default()
    };
    let trace = run(&net, &theta0, &cfg)?;
    let theta = Point::new(trace.final_x.clone())?;
    println!(
        "status {} after {} steps, loss {:.3e}",
        trace.status.as_str(),
        trace.records.len(),
        trace.final_f
    );
    for x in [-0.75, 0.0, 0.75] {
        println!("  net({x:+.2}) = {:+.4}", net.predict(&theta, &[x])[0]);
    }
    Ok(())
}
