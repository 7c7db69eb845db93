//! Sample statistics, two-sample Kolmogorov–Smirnov tests and fits through the origin.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Mean and standard error (sample standard deviation / √n).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

pub fn mean_stderr(xs: &[f64]) -> Option<MeanStderr> {
    let n = xs.len();
    if n == 0 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Some(MeanStderr { mean, stderr, n })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    /// sup |F_a − F_b|.
    pub statistic: f64,
    /// Asymptotic Kolmogorov p-value; conservative for discrete data.
    pub p_value: f64,
}

/// Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the small-sample correction
/// λ = (√n_e + 0.12 + 0.11/√n_e)·D, n_e = n·m/(n+m).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("both samples must be nonempty".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        // Advance through every copy of the smaller value so ties are handled jointly.
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d),
    })
}

/// Least squares y ≈ c·x without intercept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginFit {
    pub slope: f64,
    pub stderr: f64,
    /// Two-sided 95% Student-t interval.
    pub ci: (f64, f64),
    /// y_i/(c·x_i) − 1.
    pub relative_residuals: Vec<f64>,
}

pub fn fit_through_origin(x: &[f64], y: &[f64]) -> Result<OriginFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientData("a fit needs at least two points".into()));
    }
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let slope = sxy / sxx;
    let dof = x.len() - 1;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a).powi(2)).sum();
    let stderr = (rss / dof as f64 / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof as f64)
        .map_err(|e| Error::Domain(e.to_string()))?
        .inverse_cdf(0.975);
    let relative_residuals = x.iter().zip(y).map(|(a, b)| b / (slope * a) - 1.0).collect();
    Ok(OriginFit {
        slope,
        stderr,
        ci: (slope - t * stderr, slope + t * stderr),
        relative_residuals,
    })
}
