//! Structural invariants of subderivative models, maps and searches.

use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use subderiv::calculus::{forward_chain, pointwise_max, pointwise_min, sum};
use subderiv::direction::{sample_unit_ball, solve_l1_extreme, solve_linf_separable};
use subderiv::line_search::armijo;
use subderiv::maps::{as_semi, Abs, AffineMap, Relu};
use subderiv::model::homogeneity_check;
use subderiv::oracles::{
    distance_to_set, half_squared_norm, l1_norm, linear, moreau_envelope, neg_l1_norm, relu_network_loss,
    smooth_model, ProxFriendly,
};
use subderiv::sets::{Ball, BoxSet, ComplementaritySet, PolyhedralUnion, Polyhedron};
use subderiv::{ArmijoParams, ExtReal, FunctionModel, NormChoice, Point, SemiDiffMap, SetModel, SharedModel};

fn models3() -> Vec<SharedModel> {
    vec![
        Arc::new(l1_norm(3, 1.3)),
        Arc::new(neg_l1_norm(3, 0.4)),
        Arc::new(distance_to_set(Arc::new(BoxSet::new(vec![-1.0; 3], vec![1.0; 3]).unwrap()))),
        Arc::new(distance_to_set(Arc::new(Ball::new(vec![0.5, 0.0, 0.0], 1.0).unwrap()))),
        Arc::new(moreau_envelope(ProxFriendly::ZeroNorm { n: 3, cost: 1.0 }, 0.5).unwrap()),
        Arc::new(moreau_envelope(ProxFriendly::L1 { n: 3, lambda: 0.7 }, 0.25).unwrap()),
        Arc::new(
            pointwise_max(vec![Arc::new(linear(vec![1.0, 0.0, -1.0])), Arc::new(half_squared_norm(3))]).unwrap(),
        ),
        Arc::new(sum(vec![Arc::new(half_squared_norm(3)), Arc::new(neg_l1_norm(3, 1.0))]).unwrap()),
    ]
}

/// Coordinates snap to small integers often enough to land on kinks.
fn coord() -> impl Strategy<Value = f64> {
    prop_oneof![(-2i32..=2).prop_map(f64::from), -3.0..3.0f64]
}

fn vec3() -> impl Strategy<Value = Point> {
    prop::collection::vec(coord(), 3).prop_map(|v| Point::new(v).unwrap())
}

fn vec4() -> impl Strategy<Value = Point> {
    prop::collection::vec(coord(), 4).prop_map(|v| Point::new(v).unwrap())
}

fn close(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    match (a, b) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())),
        _ => a == b,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn subderivative_is_positively_homogeneous(x in vec3(), w in vec3(), t in 0.01..100.0f64) {
        for f in models3() {
            prop_assert!(homogeneity_check(f.as_ref(), &x, &w, t), "{} at {:?}", f.name(), x.as_slice());
        }
    }

    #[test]
    fn zero_direction_gives_zero(x in vec3()) {
        for f in models3() {
            prop_assert_eq!(f.subderivative(&x, &Point::zeros(3)).unwrap(), ExtReal::Finite(0.0), "{}", f.name());
        }
    }

    #[test]
    fn evaluation_is_pure(x in vec3(), w in vec3()) {
        for f in models3() {
            let (v1, v2) = (f.value(&x), f.value(&x));
            prop_assert_eq!(v1.to_f64().to_bits(), v2.to_f64().to_bits());
            let (d1, d2) = (f.subderivative(&x, &w).unwrap(), f.subderivative(&x, &w).unwrap());
            prop_assert_eq!(d1.to_f64().to_bits(), d2.to_f64().to_bits());
        }
    }

    #[test]
    fn distance_is_one_lipschitz(x in vec4(), y in vec4()) {
        let sets: Vec<Arc<dyn SetModel>> = vec![
            Arc::new(BoxSet::new(vec![-1.0; 4], vec![1.0; 4]).unwrap()),
            Arc::new(Ball::new(vec![0.0; 4], 2.0).unwrap()),
            Arc::new(ComplementaritySet::new(2).unwrap()),
            Arc::new(PolyhedralUnion::new(vec![
                Polyhedron::new(&DMatrix::identity(4, 4), vec![0.0; 4]).unwrap(),
                Polyhedron::new(&(-DMatrix::<f64>::identity(4, 4)), vec![-1.0; 4]).unwrap(),
            ]).unwrap()),
        ];
        for s in sets {
            let d = distance_to_set(s);
            let gap = (d.value(&x).to_f64() - d.value(&y).to_f64()).abs();
            prop_assert!(gap <= x.sub(&y).norm2() + 1e-12, "{}", d.name());
            // |d dist(x)(w)| <= |w|
            let w = y.sub(&x);
            let v = d.subderivative(&x, &w).unwrap().to_f64();
            prop_assert!(v.abs() <= w.norm2() * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn max_and_min_are_dual(
        rows in prop::collection::vec((prop::collection::vec(-2i32..=2, 2), -2i32..=2), 1..4),
        x in prop::collection::vec(-2i32..=2, 2),
        w in prop::collection::vec(-3.0..3.0f64, 2),
    ) {
        // max_i f_i = −min_i (−f_i) for affine f_i, ties included
        let affine = |a: Vec<f64>, c: f64| -> SharedModel {
            let a2 = a.clone();
            Arc::new(smooth_model(2, move |x| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + c, move |_| a2.clone(), Some(0.0)))
        };
        let plus: Vec<SharedModel> = rows.iter().map(|(a, c)| affine(a.iter().map(|v| f64::from(*v)).collect(), f64::from(*c))).collect();
        let minus: Vec<SharedModel> = rows.iter().map(|(a, c)| affine(a.iter().map(|v| -f64::from(*v)).collect(), -f64::from(*c))).collect();
        let mx = pointwise_max(plus).unwrap();
        let mn = pointwise_min(minus).unwrap();
        let x = Point::new(x.into_iter().map(f64::from).collect()).unwrap();
        let w = Point::new(w).unwrap();
        prop_assert_eq!(mx.value(&x).to_f64(), -mn.value(&x).to_f64());
        let a = mx.subderivative(&x, &w).unwrap().to_f64();
        let b = mn.subderivative(&x, &w).unwrap().to_f64();
        prop_assert!((a + b).abs() <= 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn forward_chain_is_homogeneous(x in vec3(), w in vec3(), t in 0.01..50.0f64) {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, 0.5, 2.0, -1.0, 0.0, 1.0, 1.0]);
        let layers: Vec<Arc<dyn SemiDiffMap>> = vec![
            as_semi(Arc::new(AffineMap::new(a.clone(), vec![0.0, 1.0, -1.0]).unwrap())),
            Arc::new(Relu { dim: 3 }),
            as_semi(Arc::new(AffineMap::new(a, vec![1.0, 0.0, 0.0]).unwrap())),
            Arc::new(Abs { dim: 3 }),
        ];
        let (y1, d1) = forward_chain(&layers, &x, &w).unwrap();
        let (y2, d2) = forward_chain(&layers, &x, &w.scale(t)).unwrap();
        prop_assert_eq!(y1, y2);
        for (p, q) in d1.iter().zip(d2.iter()) {
            prop_assert!((p * t - q).abs() <= 1e-9 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn relu_loss_is_homogeneous(theta in prop::collection::vec(coord(), 9), w in prop::collection::vec(-1.0..1.0f64, 9), t in 0.1..10.0f64) {
        let net = relu_network_loss(vec![2, 2, 1], vec![(vec![1.0, -1.0], vec![0.5]), (vec![0.0, 2.0], vec![-1.0])]).unwrap();
        let (theta, w) = (Point::new(theta).unwrap(), Point::new(w).unwrap());
        prop_assert!(homogeneity_check(&net, &theta, &w, t));
    }

    #[test]
    fn exact_searches_beat_any_feasible_direction(x in vec3(), c in prop::collection::vec(-2.0..2.0f64, 3), seed in 0u64..1000) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sep = sum(vec![Arc::new(linear(c.clone())), Arc::new(l1_norm(3, 1.0))]).unwrap();
        let best = solve_linf_separable(&sep, &x).unwrap();
        prop_assert!(best.w.norm_inf() <= 1.0);
        let concave = sum(vec![Arc::new(linear(c)), Arc::new(neg_l1_norm(3, 0.8))]).unwrap();
        let vert = solve_l1_extreme(&concave, &x, false).unwrap();
        for _ in 0..32 {
            let u = sample_unit_ball(&mut rng, 3, NormChoice::LInf);
            prop_assert!(best.value.to_f64() <= sep.subderivative(&x, &u).unwrap().to_f64() + 1e-12);
            let v = sample_unit_ball(&mut rng, 3, NormChoice::L1);
            prop_assert!(vert.value.to_f64() <= concave.subderivative(&x, &v).unwrap().to_f64() + 1e-12);
        }
    }

    #[test]
    fn armijo_step_satisfies_the_test(x in vec3(), mu in 0.1..0.9f64, alpha0 in 0.1..4.0f64) {
        let f = sum(vec![Arc::new(half_squared_norm(3)), Arc::new(neg_l1_norm(3, 1.0))]).unwrap();
        let dir = solve_l1_extreme(&f, &x, false).unwrap();
        let d = dir.value.to_f64();
        prop_assume!(d < -1e-9);
        let p = ArmijoParams { mu, alpha_init: alpha0, max_backtracks: 200 };
        let (alpha, m) = armijo(&f, &x, &dir.w, d, &p).unwrap();
        prop_assert!((alpha - alpha0 * mu.powi(m as i32)).abs() <= 1e-15 * alpha0);
        let fx = f.value(&x).to_f64();
        prop_assert!(f.value(&x.axpy(alpha, &dir.w)).to_f64() - fx < 0.5 * alpha * d);
    }
}

#[test]
fn homogeneity_tolerance_is_relative() {
    let f = l1_norm(3, 1.0);
    let x = Point::new(vec![1e6, 0.0, -1e6]).unwrap();
    let w = Point::new(vec![1.0, 1.0, 1.0]).unwrap();
    assert!(close(f.subderivative(&x, &w.scale(3.0)).unwrap(), f.subderivative(&x, &w).unwrap().scale(3.0), 1e-12));
}
