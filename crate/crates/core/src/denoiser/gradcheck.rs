//! Central finite-difference verification of the analytic gradient.

use ndarray::ArrayView2;

use super::Denoiser;
use crate::error::Result;

/// Largest relative error `|a − n| / max(|a| + |n|, 1e-7)` between the
/// analytic gradient `a` and the central difference `n` over all parameters.
pub fn finite_diff_check(
    model: &Denoiser<f64>,
    y_t: ArrayView2<f64>,
    t: usize,
    cond: Option<ArrayView2<f64>>,
    noise: ArrayView2<f64>,
    epsilon: f64,
) -> Result<f64> {
    let (_, grad) = model.loss_and_grad(y_t, t, cond, noise)?;
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for i in 0..grad.len() {
        let base = probe.params[i];
        probe.params[i] = base + epsilon;
        let up = probe.loss(y_t, t, cond, noise)?;
        probe.params[i] = base - epsilon;
        let down = probe.loss(y_t, t, cond, noise)?;
        probe.params[i] = base;
        let numeric = (up - down) / (2.0 * epsilon);
        let rel = (grad[i] - numeric).abs() / (grad[i].abs() + numeric.abs()).max(1e-7);
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoiser::DenoiserConfig;
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    use crate::schedule::ScheduleKind;

    fn tiny() -> DenoiserConfig {
        DenoiserConfig {
            blocks: 2,
            latent_dim: 8,
            heads: 2,
            ff_dim: 12,
            feature_dim: 4,
            seq_len: 5,
            max_timestep: 50,
            schedule: ScheduleKind::Cosine,
            cond_drop_prob: 0.0,
        }
    }

    fn randn(rng: &mut ChaCha8Rng, shape: (usize, usize)) -> Array2<f64> {
        Array2::from_shape_fn(shape, |_| StandardNormal.sample(rng))
    }

    /// Perturbs every parameter so zero-initialised slots get exercised too.
    fn jittered(seed: u64) -> Denoiser<f64> {
        let mut m = Denoiser::<f64>::new(tiny(), seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        for v in &mut m.params {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += 0.1 * z;
        }
        m
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let m = jittered(1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = randn(&mut rng, (5, 4));
        let c = randn(&mut rng, (5, 4));
        let e = randn(&mut rng, (5, 4));
        let cond = finite_diff_check(&m, y.view(), 17, Some(c.view()), e.view(), 1e-4).unwrap();
        let uncond = finite_diff_check(&m, y.view(), 3, None, e.view(), 1e-4).unwrap();
        assert!(cond < 1e-4, "conditioned rel err {cond}");
        assert!(uncond < 1e-4, "unconditioned rel err {uncond}");
    }

    #[test]
    fn zero_loss_has_zero_gradient() {
        let m = jittered(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = randn(&mut rng, (5, 4));
        let (eps, _) = m.forward(y.view(), 9, None).unwrap();
        let (loss, grad) = m.loss_and_grad(y.view(), 9, None, eps.view()).unwrap();
        assert!(loss < 1e-20);
        assert!(grad.iter().all(|g| g.abs() < 1e-8));
    }

    #[test]
    fn directional_derivative_matches() {
        let m = jittered(7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let y = randn(&mut rng, (5, 4));
        let c = randn(&mut rng, (5, 4));
        let e = randn(&mut rng, (5, 4));
        let (_, grad) = m.loss_and_grad(y.view(), 30, Some(c.view()), e.view()).unwrap();
        let dir: Vec<f64> = (0..grad.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let h = 1e-5;
        let shifted = |sign: f64| {
            let mut p = m.clone();
            p.params.iter_mut().zip(&dir).for_each(|(v, d)| *v += sign * h * d);
            p.loss(y.view(), 30, Some(c.view()), e.view()).unwrap()
        };
        let numeric = (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
        let analytic: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        assert!((numeric - analytic).abs() / analytic.abs().max(1e-7) < 1e-5);
    }
}
