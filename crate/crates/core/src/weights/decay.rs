use crate::error::{invalid, Result};
use crate::numerics::linear_fit;

/// Empirical decay of a positive sequence from a log–log fit.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Least-squares slope of `ln(1/z_n)` against `ln n`.
    pub rate: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub max_residual: f64,
    /// Slopes between consecutive samples; oscillation here flags data for
    /// which the fitted rate says little about the limit inferior.
    pub local_slopes: Vec<f64>,
}

/// Fits `ln(1/z_n) ≈ intercept + rate·ln n`.
pub fn decay_estimate(samples: &[(f64, f64)]) -> Result<DecayFit> {
    if samples.len() < 4 {
        return Err(invalid(format!("decay estimation needs at least 4 samples, got {}", samples.len())));
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(invalid("sample abscissae must be strictly increasing"));
        }
    }
    for &(n, z) in samples {
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid(format!("sample abscissa must be positive and finite, got {n}")));
        }
        if !(z > 0.0) || !z.is_finite() {
            return Err(invalid(format!("sample value must be positive and finite, got {z}")));
        }
    }
    let xs: Vec<f64> = samples.iter().map(|&(n, _)| n.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, z)| -z.ln()).collect();
    let (rate, intercept) = linear_fit(&xs, &ys);
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - intercept - rate * x).collect();
    let residual_rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let local_slopes = xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect();
    Ok(DecayFit { rate, intercept, residual_rms, max_residual, local_slopes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dyadic(max_pow: u32) -> impl Iterator<Item = f64> {
        (1..=max_pow).map(|k| 2f64.powi(k as i32))
    }

    #[test]
    fn exact_power_law() {
        let samples: Vec<_> = dyadic(10).map(|n| (n, n.powi(-2))).collect();
        let fit = decay_estimate(&samples).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-9);
        assert!(fit.max_residual < 1e-9);
    }

    #[test]
    fn log_corrected_rate() {
        // The ln ln n correction flattens the slope at small n, so the fit
        // starts at n = 2^8.
        let samples: Vec<_> = dyadic(14).skip(7).map(|n| (n, n.recip() * n.ln())).collect();
        let fit = decay_estimate(&samples).unwrap();
        assert!(fit.rate >= 0.85 && fit.rate <= 1.0, "{}", fit.rate);
    }

    #[test]
    fn constant_sequence_has_zero_decay() {
        let samples: Vec<_> = dyadic(6).map(|n| (n, 0.3)).collect();
        assert!(decay_estimate(&samples).unwrap().rate.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decay_estimate(&[(1.0, 1.0), (2.0, 0.5), (3.0, 0.3)]).is_err());
        assert!(decay_estimate(&[(1.0, 1.0), (2.0, 0.5), (2.0, 0.3), (4.0, 0.1)]).is_err());
        assert!(decay_estimate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.3), (4.0, 0.1)]).is_err());
    }

    proptest! {
        #[test]
        fn recovers_power_laws(p in 0.1f64..4.0, c in 0.01f64..100.0) {
            let samples: Vec<_> = dyadic(8).map(|n| (n, c * n.powf(-p))).collect();
            let fit = decay_estimate(&samples).unwrap();
            prop_assert!((fit.rate - p).abs() < 1e-9);
            prop_assert!(fit.local_slopes.iter().all(|s| (s - p).abs() < 1e-9));
        }
    }
}
