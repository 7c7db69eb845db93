//! Chebyshev kernels on S³, the equivariant kernel Π_N^m and the 1-jet covariance matrices.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64;

use crate::basis::is_nonempty;
use crate::error::{Error, Result};
use crate::hopf::{hopf_to_cartesian, CartesianPoint, HopfPoint, CHART_POLE_EPS};
use crate::quadrature::circle_mean;

type C = Complex64;
const I: C = C::new(0.0, 1.0);

/// Largest modulus among complex entries.
pub fn max_norm<'a, It: Iterator<Item = &'a C>>(it: It) -> f64 {
    it.map(|z| z.norm()).fold(0.0, f64::max)
}

/// Finite-difference step for covariance estimates, in radians.
pub const FD_STEP: f64 = 1e-4;

/// U_N(t) and U_N'(t) by the three-term recurrence, without a domain check.
pub fn chebyshev_u_with_derivative(n: u32, t: f64) -> (f64, f64) {
    let (mut u0, mut u1) = (1.0, 2.0 * t);
    let (mut d0, mut d1) = (0.0, 2.0);
    if n == 0 {
        return (1.0, 0.0);
    }
    for _ in 1..n {
        let u2 = 2.0 * t * u1 - u0;
        let d2 = 2.0 * u1 + 2.0 * t * d1 - d0;
        (u0, u1, d0, d1) = (u1, u2, d1, d2);
    }
    (u1, d1)
}

pub fn chebyshev_u(n: u32, t: f64) -> Result<f64> {
    if t.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("U_N argument {t} outside [-1, 1]")));
    }
    Ok(chebyshev_u_with_derivative(n, t).0)
}

/// Π_N(x, y) = U_N(x·y), the zonal kernel of degree-N harmonics with Π_N(x, x) = N+1.
pub fn pi_n(n: u32, x: CartesianPoint, y: CartesianPoint) -> f64 {
    chebyshev_u_with_derivative(n, x.dot(y).clamp(-1.0, 1.0)).0
}

/// Number of fiber nodes for the θ-average; exact for the trigonometric integrands used here.
pub fn fiber_nodes(n: u32) -> usize {
    4 * (n as usize + 1)
}

/// Π_N^m(x, y) = (1/2π) ∫ e^{−imθ} Π_N(e^{iθ}x, y) dθ, normalized so Π_N^m(x, x) = 1.
pub fn pi_nm(n: u32, m: i32, x: CartesianPoint, y: CartesianPoint) -> C {
    let h = x.hermitian(y);
    circle_mean(
        |t| {
            let dot = (C::from_polar(1.0, t) * h).re.clamp(-1.0, 1.0);
            C::from_polar(chebyshev_u_with_derivative(n, dot).0, -(m as f64) * t)
        },
        fiber_nodes(n),
    )
}

/// Ratio between Π_N^m and the basis sum Σ_k e_k(x) ē_k(y) of an orthonormal basis of H_N^m.
pub fn basis_sum_ratio(n: u32) -> f64 {
    2.0 * PI * PI / (n as f64 + 1.0)
}

/// D = (N² − m²)/2 + N.
pub fn d_value(n: u32, m: i32) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (n * n - m * m) / 2.0 + n
}

/// (1/2π) ∫ cos(mθ) U_N(cos θ) dθ.
pub fn chebyshev_moment0(n: u32, m: i32) -> Result<f64> {
    check_moment_args(n, m)?;
    let v = if is_nonempty(n, m) { 1.0 } else { 0.0 };
    debug_assert!((v - moment0_quadrature(n, m)).abs() < 1e-9);
    Ok(v)
}

/// (1/2π) ∫ cos(mθ) U_N'(cos θ) cos θ dθ.
pub fn chebyshev_moment1(n: u32, m: i32) -> Result<f64> {
    check_moment_args(n, m)?;
    let v = if is_nonempty(n, m) { d_value(n, m) } else { 0.0 };
    debug_assert!((v - moment1_quadrature(n, m)).abs() < 1e-9 * v.max(1.0));
    Ok(v)
}

fn check_moment_args(n: u32, m: i32) -> Result<()> {
    if m.unsigned_abs() > n {
        return Err(Error::Domain(format!("|m| = {} exceeds N = {n}", m.abs())));
    }
    Ok(())
}

pub fn moment0_quadrature(n: u32, m: i32) -> f64 {
    circle_mean(
        |t| C::new((m as f64 * t).cos() * chebyshev_u_with_derivative(n, t.cos()).0, 0.0),
        fiber_nodes(n),
    )
    .re
}

pub fn moment1_quadrature(n: u32, m: i32) -> f64 {
    circle_mean(
        |t| {
            C::new(
                (m as f64 * t).cos() * chebyshev_u_with_derivative(n, t.cos()).1 * t.cos(),
                0.0,
            )
        },
        fiber_nodes(n),
    )
    .re
}

/// Coefficient of the off-diagonal entry of the derivative block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossTerm {
    /// i·m/2, the form usually quoted for this matrix.
    Halved,
    /// −i·m in slot (1, 2), the value produced by differentiating Π_N^m.
    Full,
}

/// Covariance of the 1-jet (f, e₁f, e₂f) of the section, normalized by 1/(N+1).
#[derive(Clone, Copy, Debug)]
pub struct CovarianceMatrices {
    pub a: f64,
    pub b: [C; 2],
    pub c: Matrix2<C>,
    pub delta: Matrix3<C>,
    pub lambda: Matrix2<C>,
    pub eta: f64,
    pub mu: f64,
    pub nu: f64,
}

impl CovarianceMatrices {
    fn from_delta(delta: Matrix3<C>) -> Self {
        let a = delta[(0, 0)].re;
        let b = [delta[(0, 1)], delta[(0, 2)]];
        let c = delta.fixed_view::<2, 2>(1, 1).into_owned();
        let mut lambda = c;
        for i in 0..2 {
            for j in 0..2 {
                lambda[(i, j)] -= b[i].conj() * b[j] / a;
            }
        }
        let mu = 0.5 * (lambda[(0, 0)].re + lambda[(1, 1)].re);
        // For Λ = μI + ν·[[0, −i], [i, 0]] the off-diagonal entry is −iν.
        let nu = (I * lambda[(0, 1)]).re;
        CovarianceMatrices {
            a,
            b,
            c,
            delta,
            lambda,
            eta: nu / mu,
            mu,
            nu,
        }
    }

    /// Largest deviation of Δ and Λ from their conjugate transposes.
    pub fn hermitian_defect(&self) -> f64 {
        let d = max_norm((self.delta - self.delta.adjoint()).iter());
        let l = max_norm((self.lambda - self.lambda.adjoint()).iter());
        d.max(l)
    }

    /// Largest entrywise difference in Δ and Λ.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let d = max_norm((self.delta - other.delta).iter());
        let l = max_norm((self.lambda - other.lambda).iter());
        d.max(l)
    }
}

pub fn covariance_closed_form(n: u32, m: i32) -> Result<CovarianceMatrices> {
    covariance_closed_form_with(n, m, CrossTerm::Halved)
}

pub fn covariance_closed_form_with(n: u32, m: i32, cross: CrossTerm) -> Result<CovarianceMatrices> {
    if !is_nonempty(n, m) {
        return Err(Error::EmptySpace { n, m });
    }
    let d = C::new(d_value(n, m), 0.0);
    let off = match cross {
        CrossTerm::Halved => I * (m as f64 / 2.0),
        CrossTerm::Full => -I * m as f64,
    };
    let z = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    let delta = Matrix3::new(one, z, z, z, d, off, z, off.conj(), d) / C::new(n as f64 + 1.0, 0.0);
    let mut out = CovarianceMatrices::from_delta(delta);
    if cross == CrossTerm::Halved {
        // Quoted convention: ν = m/(2(N+1)) > 0 for m > 0, so here (1, i) carries μ − ν.
        out.nu = m as f64 / (2.0 * (n as f64 + 1.0));
        out.eta = out.nu / out.mu;
    }
    Ok(out)
}

/// Finite-difference estimate of the jet covariance at `point`, expressed in the
/// orthonormal horizontal frame.
pub fn covariance_numeric(n: u32, m: i32, point: HopfPoint) -> Result<CovarianceMatrices> {
    Ok(CovarianceMatrices::from_delta(
        chart_delta_numeric(n, m, point)?.frame_delta,
    ))
}

/// Raw chart-coordinate derivatives of Π_N^m at the diagonal and the frame change.
#[derive(Clone, Copy, Debug)]
pub struct ChartDerivatives {
    /// Δ in chart coordinates (f, ∂α f, ∂φ f), scaled by 1/(N+1).
    pub chart_delta: Matrix3<C>,
    /// Δ in the frame (f, e₁f, e₂f), scaled by 1/(N+1).
    pub frame_delta: Matrix3<C>,
}

pub fn chart_delta_numeric(n: u32, m: i32, point: HopfPoint) -> Result<ChartDerivatives> {
    if !is_nonempty(n, m) {
        return Err(Error::EmptySpace { n, m });
    }
    let (alpha, phi, theta) = (point.alpha, point.phi, point.theta);
    if !(CHART_POLE_EPS..=PI / 2.0 - CHART_POLE_EPS).contains(&alpha) {
        return Err(Error::ChartPole {
            alpha,
            eps: CHART_POLE_EPS,
        });
    }
    let h = FD_STEP;
    let at = |da: f64, dp: f64| hopf_to_cartesian(HopfPoint::new(alpha + da, phi + dp, theta));
    let dirs = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
    let k = |i: usize, si: f64, j: usize, sj: f64| {
        let x = at(dirs[i].0 * si * h, dirs[i].1 * si * h);
        let y = at(dirs[j].0 * sj * h, dirs[j].1 * sj * h);
        pi_nm(n, m, x, y)
    };
    let mut chart = Matrix3::<C>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            chart[(i, j)] = match (i, j) {
                (0, 0) => k(0, 0.0, 0, 0.0),
                (0, _) => (k(0, 0.0, j, 1.0) - k(0, 0.0, j, -1.0)) / (2.0 * h),
                (_, 0) => (k(i, 1.0, 0, 0.0) - k(i, -1.0, 0, 0.0)) / (2.0 * h),
                _ => {
                    (k(i, 1.0, j, 1.0) - k(i, 1.0, j, -1.0) - k(i, -1.0, j, 1.0) + k(i, -1.0, j, -1.0)) / (4.0 * h * h)
                }
            };
        }
    }
    chart /= C::new(n as f64 + 1.0, 0.0);
    // e₂f = (∂φ f + i·m·cos2α·f) / sin2α.
    let (s2, c2) = ((2.0 * alpha).sin(), (2.0 * alpha).cos());
    let z = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    let t = Matrix3::new(one, z, z, z, one, z, I * (m as f64 * c2 / s2), z, C::new(1.0 / s2, 0.0));
    Ok(ChartDerivatives {
        chart_delta: chart,
        frame_delta: t * chart * t.adjoint(),
    })
}
