//! Expected zero counts of the section f_N^m: closed forms, the Kac–Rice integrand and
//! independent numeric evaluations of the Kac–Rice integral.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::is_nonempty;
use crate::error::{Error, Result};
use crate::harmonic::{sample_rng, standard_complex};
use crate::kernels::{d_value, CovarianceMatrices};
use crate::quadrature::adaptive_simpson;

type C = Complex64;

/// Samples per Monte Carlo chunk; each chunk owns one RNG stream.
pub const MC_CHUNK: usize = 1 << 14;

/// Closed-form predictions for one (N, m).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KacRicePrediction {
    pub n: u32,
    pub m: i32,
    /// (m/2)/D.
    pub eta: f64,
    /// (N² − m²)/2 + N.
    pub d: f64,
    /// (1 + η²)·D/(4π).
    pub expected_zero_count: f64,
    /// |m|(expected_zero_count − 2)/2 + 1.
    pub expected_genus: f64,
    /// (D + m²/D)/2: the Kac–Rice integral evaluated with the derivative covariance
    /// obtained by differentiating Π_N^m (off-diagonal magnitude m, not m/2).
    pub rederived_zero_count: f64,
    /// Fitted c in mean zero count = c·(1 + η²)·D, once available.
    pub normalization_constant: Option<f64>,
}

pub fn predict(n: u32, m: i32) -> Result<KacRicePrediction> {
    if !is_nonempty(n, m) {
        return Err(Error::EmptySpace { n, m });
    }
    if m == 0 {
        return Err(Error::ZeroEquivariance);
    }
    let d = d_value(n, m);
    let mf = m as f64;
    let eta = mf / 2.0 / d;
    let expected_zero_count = (1.0 + eta * eta) * d / (4.0 * PI);
    let expected_genus = mf.abs() * (expected_zero_count - 2.0) / 2.0 + 1.0;
    Ok(KacRicePrediction {
        n,
        m,
        eta,
        d,
        expected_zero_count,
        expected_genus,
        rederived_zero_count: (d + mf * mf / d) / 2.0,
        normalization_constant: None,
    })
}

pub type Rational = Ratio<i128>;

/// A real number r/π + s with rational r and s.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffineInInversePi {
    pub inv_pi: Rational,
    pub constant: Rational,
}

fn rational_d(n: u32, m: i32) -> Rational {
    let (n, m) = (n as i128, m as i128);
    Rational::new(n * n - m * m, 2) + Rational::from_integer(n)
}

/// (1 + η²)·D/(4π) in exact arithmetic.
pub fn expected_zero_count_exact(n: u32, m: i32) -> AffineInInversePi {
    let d = rational_d(n, m);
    let m = m as i128;
    let one_plus_eta_sq_times_d = d + Rational::new(m * m, 4) / d;
    AffineInInversePi {
        inv_pi: one_plus_eta_sq_times_d / 4,
        constant: Rational::from_integer(0),
    }
}

/// (1 + η²)/(8π)·|m|·D − |m| + 1 in exact arithmetic.
pub fn expected_genus_exact(n: u32, m: i32) -> AffineInInversePi {
    let d = rational_d(n, m);
    let am = (m as i128).abs();
    let eta = Rational::new(m as i128, 2) / d;
    let one = Rational::from_integer(1);
    AffineInInversePi {
        inv_pi: (one + eta * eta) / 8 * am * d,
        constant: one - am,
    }
}

/// |m|(k − 2)/2 + 1 applied to an exact expected zero count.
pub fn genus_of_expected_count(m: i32, k: AffineInInversePi) -> AffineInInversePi {
    let am = Rational::from_integer((m as i128).abs());
    let two = Rational::from_integer(2);
    AffineInInversePi {
        inv_pi: am * k.inv_pi / two,
        constant: am * (k.constant - two) / two + 1,
    }
}

/// ∫_{−1}^{1} |η + t| dt for any real η.
pub fn abs_linear_integral(eta: f64) -> f64 {
    if eta.abs() <= 1.0 {
        1.0 + eta * eta
    } else {
        2.0 * eta.abs()
    }
}

/// (1/4π)∫_{−1}^{1} |η + t| dt = (1 + η²)/(4π), valid for |η| ≤ 1/2.
pub fn scalar_integral(eta: f64) -> Result<f64> {
    if !(eta.abs() <= 0.5) {
        return Err(Error::Domain(format!("|eta| = {} exceeds 1/2", eta.abs())));
    }
    Ok((1.0 + eta * eta) / (4.0 * PI))
}

/// The same integral by adaptive quadrature, split at the kink t = −η.
pub fn scalar_integral_quadrature(eta: f64) -> f64 {
    let f = |t: f64| (eta + t).abs() / (4.0 * PI);
    let kink = (-eta).clamp(-1.0, 1.0);
    adaptive_simpson(f, -1.0, kink, 1e-15) + adaptive_simpson(f, kink, 1.0, 1e-15)
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    /// |self − value| in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        (self.mean - value).abs() / self.stderr
    }
}

/// |ξ ∧ ξ̄| = 2|Im(ξ₁ ξ̄₂)|.
pub fn wedge_abs(xi: [C; 2]) -> f64 {
    2.0 * (xi[0] * xi[1].conj()).im.abs()
}

fn hermitian_eigen(lambda: &Matrix2<C>) -> Result<(nalgebra::Vector2<f64>, Matrix2<C>)> {
    let defect = (lambda - lambda.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(defect <= 1e-12 * scale.max(1e-300)) {
        return Err(Error::NotPositiveDefinite);
    }
    let eig = lambda.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Hermitian square root of a positive definite 2×2 matrix.
pub fn hermitian_sqrt(lambda: &Matrix2<C>) -> Result<Matrix2<C>> {
    let (vals, vecs) = hermitian_eigen(lambda)?;
    let root = Matrix2::from_diagonal(&vals.map(|v| C::new(v.sqrt(), 0.0)));
    Ok(vecs * root * vecs.adjoint())
}

/// Eigenvalues of the Hermitian form ζ ↦ 2 Im(ξ₁ ξ̄₂) with ξ = Λ^{1/2}ζ, in decreasing order.
///
/// For ζ standard complex Gaussian, 2 Im(ξ₁ ξ̄₂) has the law of κ₁X₁ + κ₂X₂ with X_j ~ Exp(1).
pub fn wedge_form_eigenvalues(lambda: &Matrix2<C>) -> Result<[f64; 2]> {
    let root = hermitian_sqrt(lambda)?;
    let i = C::new(0.0, 1.0);
    let h = Matrix2::new(C::new(0.0, 0.0), i, -i, C::new(0.0, 0.0));
    let k = root.adjoint() * h * root;
    let k = (k + k.adjoint()) * C::new(0.5, 0.0);
    let e = k.symmetric_eigen().eigenvalues;
    Ok([e[0].max(e[1]), e[0].min(e[1])])
}

/// Monte Carlo estimate of (N+1)/π³ ∫ |Λ^{1/2}ζ ∧ conj(Λ^{1/2}ζ)| e^{−|ζ|²} dL(ζ).
///
/// ζ is drawn as a standard complex Gaussian, so the estimate is (N+1)/π · E|ξ ∧ ξ̄|.
/// Chunk `c` uses RNG stream `c`; chunks are reduced in index order, so the result does
/// not depend on the number of worker threads.
pub fn kacrice_integral_mc(lambda: &Matrix2<C>, n: u32, samples: usize, seed: u64) -> Result<Estimate> {
    let root = hermitian_sqrt(lambda)?;
    if samples < 2 {
        return Err(Error::InsufficientData("at least two samples".into()));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = sample_rng(seed, c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let zeta = nalgebra::Vector2::new(standard_complex(&mut rng), standard_complex(&mut rng));
                let xi = root * zeta;
                let v = wedge_abs([xi[0], xi[1]]);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = partial.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let nf = samples as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    let scale = (n as f64 + 1.0) / PI;
    Ok(Estimate {
        mean: scale * mean,
        stderr: scale * (var / nf).sqrt(),
        samples,
    })
}

/// The same integral by the polar change of variables (r, θ) with (|ζ'₁|, |ζ'₂|) = r(cos θ, sin θ)
/// in eigen-coordinates of the wedge form, evaluated by one-dimensional quadratures:
/// 4 ∫₀^∞ r⁵ e^{−r²} dr · ∫₀^{π/2} cos θ sin θ |κ₁cos²θ + κ₂sin²θ| dθ.
pub fn kacrice_integral_polar(lambda: &Matrix2<C>, n: u32) -> Result<f64> {
    let [k1, k2] = wedge_form_eigenvalues(lambda)?;
    let radial = adaptive_simpson(|r: f64| r.powi(5) * (-r * r).exp(), 0.0, 12.0, 1e-14);
    let angular = |t: f64| t.cos() * t.sin() * (k1 * t.cos().powi(2) + k2 * t.sin().powi(2)).abs();
    let tol = 1e-14 * (k1.abs() + k2.abs());
    let angle = if k1 * k2 < 0.0 {
        let kink = (-k1 / k2).sqrt().atan();
        adaptive_simpson(angular, 0.0, kink, tol) + adaptive_simpson(angular, kink, PI / 2.0, tol)
    } else {
        adaptive_simpson(angular, 0.0, PI / 2.0, tol)
    };
    Ok((n as f64 + 1.0) / PI * 4.0 * radial * angle)
}

/// Closed form of the same integral: (N+1)/π · E|κ₁X₁ + κ₂X₂|.
pub fn kacrice_integral_closed(lambda: &Matrix2<C>, n: u32) -> Result<f64> {
    let [k1, k2] = wedge_form_eigenvalues(lambda)?;
    let e = if k1 * k2 < 0.0 {
        (k1 * k1 + k2 * k2) / (k1 - k2)
    } else {
        (k1 + k2).abs()
    };
    Ok((n as f64 + 1.0) / PI * e)
}

/// Gaussian density of the jet (f, ξ₁, ξ₂) with covariance Δ:
/// exp(−⟨Δ⁻¹v, v⟩)/(π³ det Δ).
pub fn joint_density(x: C, xi: [C; 2], cov: &CovarianceMatrices) -> Result<f64> {
    let delta = cov.delta;
    let chol = delta.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let v = Vector3::new(x, xi[0], xi[1]);
    let w = chol.solve(&v);
    let quad = v.dotc(&w).re;
    let det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.norm_sqr()).product();
    Ok((-quad).exp() / (PI.powi(3) * det))
}

/// Density of f at 0: 1/(π A).
pub fn value_density_at_zero(cov: &CovarianceMatrices) -> f64 {
    1.0 / (PI * cov.a)
}

/// Conditional density of ξ given f = 0: exp(−⟨Λ⁻¹ξ, ξ⟩)/(π² det Λ).
pub fn conditional_derivative_density(xi: [C; 2], cov: &CovarianceMatrices) -> Result<f64> {
    let chol = cov.lambda.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let v = nalgebra::Vector2::new(xi[0], xi[1]);
    let quad = v.dotc(&chol.solve(&v)).re;
    let det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.norm_sqr()).product();
    Ok((-quad).exp() / (PI * PI * det))
}

/// Λ = μI + ν[[0, −i], [i, 0]], the form of the derivative covariance at f = 0.
pub fn lambda_from_mu_nu(mu: f64, nu: f64) -> Matrix2<C> {
    Matrix2::new(C::new(mu, 0.0), C::new(0.0, -nu), C::new(0.0, nu), C::new(mu, 0.0))
}
