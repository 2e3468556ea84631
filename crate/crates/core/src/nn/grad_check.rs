use super::loss::{batch_loss, loss_and_gradients, Batch, Objective};
use super::mlp::{Gradients, MlpModel};
use crate::error::Result;

/// |a − n| / max(|a|, |n|, floor). Differences of the loss carry rounding
/// noise of order ε_mach·|L|/step, so gradients smaller than the step are
/// compared on an absolute scale.
fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / analytic.abs().max(numeric.abs()).max(floor)
}

/// Worst relative error between the analytic gradients and central
/// differences with step `eps` over every weight and bias.
pub fn grad_check(model: &MlpModel, batch: &Batch<'_>, objective: &Objective, eps: f64) -> Result<f64> {
    let (_, analytic) = loss_and_gradients(model, batch, objective)?;
    compare_with_differences(model, batch, objective, eps, &analytic)
}

/// Same comparison against externally supplied gradients.
pub fn compare_with_differences(
    model: &MlpModel,
    batch: &Batch<'_>,
    objective: &Objective,
    eps: f64,
    analytic: &Gradients,
) -> Result<f64> {
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    let loss_at = |m: &MlpModel| batch_loss(m, batch, objective).map(|p| p.total);

    for l in 0..model.weights.len() {
        for idx in 0..model.weights[l].len() {
            let (r, c) = (idx / model.weights[l].ncols(), idx % model.weights[l].ncols());
            let orig = probe.weights[l][[r, c]];
            probe.weights[l][[r, c]] = orig + eps;
            let up = loss_at(&probe)?;
            probe.weights[l][[r, c]] = orig - eps;
            let down = loss_at(&probe)?;
            probe.weights[l][[r, c]] = orig;
            worst = worst.max(relative_error(analytic.weights[l][[r, c]], (up - down) / (2.0 * eps), eps));
        }
        for j in 0..model.biases[l].len() {
            let orig = probe.biases[l][j];
            probe.biases[l][j] = orig + eps;
            let up = loss_at(&probe)?;
            probe.biases[l][j] = orig - eps;
            let down = loss_at(&probe)?;
            probe.biases[l][j] = orig;
            worst = worst.max(relative_error(analytic.biases[l][j], (up - down) / (2.0 * eps), eps));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;
    use ndarray::{Array1, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_batch(n: usize, width: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, width), |_| rng.random_range(-2.0..2.0));
        let y = Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
        (x, y)
    }

    #[test]
    fn mae_gradient_passes() {
        let m = MlpModel::new(&[2, 16, 16, 1], Activation::Tanh, 11).unwrap();
        let (x, y) = random_batch(32, 2, 12);
        let b = Batch {
            inputs: x.view(),
            targets: y.view(),
            physics: None,
        };
        let err = grad_check(&m, &b, &Objective::MAE, 1e-5).unwrap();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn zero_network_zero_batch() {
        let mut m = MlpModel::new(&[2, 4, 1], Activation::Tanh, 0).unwrap();
        m.weights.iter_mut().for_each(|w| w.fill(0.0));
        let x = Array2::zeros((8, 2));
        let y = Array1::zeros(8);
        let b = Batch {
            inputs: x.view(),
            targets: y.view(),
            physics: None,
        };
        assert_eq!(grad_check(&m, &b, &Objective::MAE, 1e-5).unwrap(), 0.0);
    }

    #[test]
    fn corrupted_gradient_is_caught() {
        let m = MlpModel::new(&[2, 8, 1], Activation::Tanh, 3).unwrap();
        let (x, y) = random_batch(16, 2, 4);
        let b = Batch {
            inputs: x.view(),
            targets: y.view(),
            physics: None,
        };
        let (_, mut g) = loss_and_gradients(&m, &b, &Objective::MAE).unwrap();
        g.weights[0][[1, 3]] *= 1.5;
        let err = compare_with_differences(&m, &b, &Objective::MAE, 1e-5, &g).unwrap();
        assert!(err > 1e-3, "{err}");
    }
}
