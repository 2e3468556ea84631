mod common;

use common::{random_batch, worst_gradient_error, GradFamily};
use turbine_pinn::nn::{grad_check, loss_and_gradients, Activation, Batch, Head, MlpModel, Objective};
use turbine_pinn::target::TargetKind;

#[test]
fn mae_matches_central_differences() {
    let e = worst_gradient_error(GradFamily::Mae, 0..10);
    assert!(e < 1e-5, "{e}");
}

#[test]
fn pinn_composites_match_central_differences() {
    for kind in TargetKind::ALL {
        let e = worst_gradient_error(GradFamily::Pinn(kind), 0..10);
        assert!(e < 1e-5, "{kind}: {e}");
    }
}

#[test]
fn evidential_matches_central_differences() {
    let e = worst_gradient_error(GradFamily::Evidential, 0..10);
    assert!(e < 1e-5, "{e}");
}

#[test]
fn relu_network_away_from_kinks() {
    let model = MlpModel::new(&[2, 8, 8, 1], Activation::Relu, 21).unwrap();
    let (x, y, phys) = random_batch(16, 2, 22);
    let batch = Batch {
        inputs: x.view(),
        targets: y.view(),
        physics: Some(phys.view()),
    };
    let e = grad_check(&model, &batch, &Objective::pinn(0.7), 1e-6).unwrap();
    assert!(e < 1e-4, "{e}");
}

#[test]
fn perfect_fit_on_noisy_physics_leaves_only_the_residual() {
    let model = MlpModel::new(&[3, 8, 1], Activation::Tanh, 4).unwrap();
    let (x, _, _) = random_batch(50, 3, 5);
    let out = model.forward_batch(x.view());
    let targets = out.column(0).to_owned();
    let noise: Vec<f64> = (0..50).map(|i| 0.02 * ((i as f64) * 0.7).sin()).collect();
    let physics = &targets + &ndarray::Array1::from(noise.clone());
    let batch = Batch {
        inputs: x.view(),
        targets: targets.view(),
        physics: Some(physics.view()),
    };
    let (parts, _) = loss_and_gradients(&model, &batch, &Objective::pinn(1.0)).unwrap();
    assert_eq!(parts.data, 0.0);
    let expected = noise.iter().map(|n| n.abs()).sum::<f64>() / 50.0;
    assert!((parts.phys.unwrap() - expected).abs() < 1e-15);
    assert!(parts.phys.unwrap() > 0.0);
}

#[test]
fn zero_physics_weight_is_bit_exact() {
    let model = MlpModel::new(&[3, 8, 8, 1], Activation::Tanh, 8).unwrap();
    let (x, y, phys) = random_batch(40, 3, 9);
    let with = Batch {
        inputs: x.view(),
        targets: y.view(),
        physics: Some(phys.view()),
    };
    let without = Batch { physics: None, ..with };
    let (a, ga) = loss_and_gradients(&model, &with, &Objective::pinn(0.0)).unwrap();
    let (b, gb) = loss_and_gradients(&model, &without, &Objective::MAE).unwrap();
    assert_eq!(a.total.to_bits(), b.total.to_bits());
    assert_eq!(ga, gb);
}

#[test]
fn evidential_head_needs_evidential_loss() {
    let model = MlpModel::with_head(&[3, 4, 4], Activation::Tanh, Head::Evidential, 0).unwrap();
    let (x, y, _) = random_batch(4, 3, 0);
    let b = Batch {
        inputs: x.view(),
        targets: y.view(),
        physics: None,
    };
    assert!(loss_and_gradients(&model, &b, &Objective::MAE).is_err());
}
