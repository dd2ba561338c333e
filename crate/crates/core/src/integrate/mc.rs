//! Seeded Monte Carlo estimates of L^q norms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{IntegralResult, Method, SquaredNormField};
use crate::error::{Error, Result};

/// (E‖f‖^q)^{1/q} from `samples` i.i.d. Gaussian draws.
///
/// The error estimate is one standard error, carried through the q-th root
/// by the delta method.
pub fn lq_norm_mc<F: SquaredNormField + ?Sized>(f: &F, q: f64, samples: usize, seed: u64) -> Result<IntegralResult> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must be ≥ 1, got {q}")));
    }
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!("need at least 1000 samples, got {samples}")));
    }
    let (mean, se) = power_mean_mc(f, q, samples, seed)?;
    let value = mean.powf(1.0 / q);
    let error_estimate = if mean > 0.0 { se * value / (q * mean) } else { se.powf(1.0 / q) };
    Ok(IntegralResult { value, method: Method::MonteCarlo, error_estimate, refinement_history: vec![] })
}

/// Sample mean of ‖f‖^q and its standard error.
pub fn power_mean_mc<F: SquaredNormField + ?Sized>(f: &F, q: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.dim();
    let mut x = vec![0.0; n];
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 0..samples {
        for xi in x.iter_mut() {
            *xi = StandardNormal.sample(&mut rng);
        }
        let v = f.sq_norm_at(&x).max(0.0).powf(q / 2.0);
        if v.is_nan() {
            return Err(Error::NanIntegrand { point: x });
        }
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok((mean, (var / samples as f64).sqrt()))
}
