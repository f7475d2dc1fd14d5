use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Sample mean with a two-sided 95% Student-t half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// `None` with fewer than two samples.
    pub ci95: Option<f64>,
    pub n: usize,
}

pub fn t_quantile_975(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("df is positive")
        .inverse_cdf(0.975)
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                ci95: None,
                n,
            };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let ci95 = (n >= 2).then(|| {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            t_quantile_975(n - 1) * var.sqrt() / (n as f64).sqrt()
        });
        Self { mean, ci95, n }
    }
}
