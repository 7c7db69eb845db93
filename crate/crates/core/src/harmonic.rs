//! Gaussian samples of H_N^m, their evaluation on S³ and jets of the associated section.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::{gram_matrix, Bidegree, HarmonicSpaceBasis};
use crate::error::{Error, Result};
use crate::hopf::{chart_point, hopf_to_cartesian, CartesianPoint, HopfPoint, SpherePoint};

type C = Complex64;
const I: C = C::new(0.0, 1.0);

/// Σ_k |e_k(x)|² for any orthonormal basis of H_N^m; independent of x and m.
pub fn kernel_diagonal(n: u32) -> f64 {
    (n as f64 + 1.0) / (2.0 * PI * PI)
}

/// Standard complex Gaussian stream for sample `stream` of a run seeded by `seed`.
pub fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `z` with independent N(0, 1/2) real and imaginary parts.
pub fn standard_complex<R: rand::Rng>(rng: &mut R) -> C {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Value and Wirtinger derivatives ∂/∂z_j, ∂/∂z̄_j of a polynomial at a point of ℂ².
#[derive(Clone, Copy, Debug)]
pub struct Wirtinger {
    pub value: C,
    pub dz: [C; 2],
    pub dzb: [C; 2],
}

impl Wirtinger {
    /// Real directional derivative along a tangent vector `v` of ℂ² = ℝ⁴.
    pub fn along(&self, v: [C; 2]) -> C {
        self.dz[0] * v[0] + self.dz[1] * v[1] + self.dzb[0] * v[0].conj() + self.dzb[1] * v[1].conj()
    }
}

fn powers(z: C, n: u32) -> Vec<C> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = C::new(1.0, 0.0);
    for _ in 0..=n {
        out.push(acc);
        acc *= z;
    }
    out
}

/// Polynomial Σ c_{α,β} z^α z̄^β of fixed bidegree.
#[derive(Clone, Debug, PartialEq)]
pub struct BidegreePolynomial {
    pub bidegree: Bidegree,
    pub coeffs: Vec<C>,
}

impl BidegreePolynomial {
    pub fn eval(&self, x: CartesianPoint) -> C {
        let (p, q) = (self.bidegree.p, self.bidegree.q);
        let (z1, z2) = (powers(x.z1, p), powers(x.z2, p));
        let (w1, w2) = (powers(x.z1.conj(), q), powers(x.z2.conj(), q));
        let mut acc = C::new(0.0, 0.0);
        for a1 in 0..=p {
            let mut inner = C::new(0.0, 0.0);
            for b1 in 0..=q {
                inner += self.coeffs[self.bidegree.index(a1, b1)] * w1[b1 as usize] * w2[(q - b1) as usize];
            }
            acc += inner * z1[a1 as usize] * z2[(p - a1) as usize];
        }
        acc
    }

    pub fn eval_wirtinger(&self, x: CartesianPoint) -> Wirtinger {
        let (p, q) = (self.bidegree.p, self.bidegree.q);
        let (z1, z2) = (powers(x.z1, p), powers(x.z2, p));
        let (w1, w2) = (powers(x.z1.conj(), q), powers(x.z2.conj(), q));
        let zero = C::new(0.0, 0.0);
        let mut out = Wirtinger {
            value: zero,
            dz: [zero; 2],
            dzb: [zero; 2],
        };
        for a1 in 0..=p {
            let a2 = p - a1;
            let za = z1[a1 as usize] * z2[a2 as usize];
            let dza1 = if a1 > 0 {
                a1 as f64 * z1[a1 as usize - 1] * z2[a2 as usize]
            } else {
                zero
            };
            let dza2 = if a2 > 0 {
                a2 as f64 * z1[a1 as usize] * z2[a2 as usize - 1]
            } else {
                zero
            };
            for b1 in 0..=q {
                let b2 = q - b1;
                let c = self.coeffs[self.bidegree.index(a1, b1)];
                if c == zero {
                    continue;
                }
                let wb = w1[b1 as usize] * w2[b2 as usize];
                out.value += c * za * wb;
                out.dz[0] += c * dza1 * wb;
                out.dz[1] += c * dza2 * wb;
                if b1 > 0 {
                    out.dzb[0] += c * za * (b1 as f64 * w1[b1 as usize - 1] * w2[b2 as usize]);
                }
                if b2 > 0 {
                    out.dzb[1] += c * za * (b2 as f64 * w1[b1 as usize] * w2[b2 as usize - 1]);
                }
            }
        }
        out
    }
}

/// One element of H_N^m given by coefficients against an orthonormal basis.
#[derive(Clone, Debug)]
pub struct RandomHarmonic {
    pub basis: Arc<HarmonicSpaceBasis>,
    pub coeffs: Vec<C>,
    /// Master seed and stream index the coefficients were drawn from, if sampled.
    pub seed: Option<(u64, u64)>,
    poly: BidegreePolynomial,
}

impl RandomHarmonic {
    pub fn from_coefficients(basis: Arc<HarmonicSpaceBasis>, coeffs: Vec<C>) -> Result<Self> {
        if basis.dim() == 0 {
            let bd = basis.bidegree;
            return Err(Error::EmptySpace { n: bd.n(), m: bd.m() });
        }
        if coeffs.len() != basis.dim() {
            return Err(Error::Domain(format!(
                "expected {} coefficients, got {}",
                basis.dim(),
                coeffs.len()
            )));
        }
        let bd = basis.bidegree;
        let mut poly = vec![C::new(0.0, 0.0); bd.monomial_count()];
        for (a, v) in coeffs.iter().zip(&basis.vectors) {
            for (slot, &x) in poly.iter_mut().zip(v) {
                *slot += a * x;
            }
        }
        Ok(RandomHarmonic {
            basis,
            coeffs,
            seed: None,
            poly: BidegreePolynomial {
                bidegree: bd,
                coeffs: poly,
            },
        })
    }

    /// Orthogonal projection of a bidegree-(p, q) polynomial onto the harmonic space.
    pub fn from_polynomial(basis: Arc<HarmonicSpaceBasis>, poly: &[C]) -> Result<Self> {
        let g = gram_matrix(basis.bidegree);
        let coeffs = basis
            .vectors
            .iter()
            .map(|v| {
                let mut acc = C::new(0.0, 0.0);
                for (i, c) in poly.iter().enumerate() {
                    for (j, e) in v.iter().enumerate() {
                        acc += c * (e * g[(i, j)]);
                    }
                }
                acc
            })
            .collect();
        Self::from_coefficients(basis, coeffs)
    }

    pub fn n(&self) -> u32 {
        self.basis.bidegree.n()
    }

    pub fn m(&self) -> i32 {
        self.basis.bidegree.m()
    }

    pub fn polynomial(&self) -> &BidegreePolynomial {
        &self.poly
    }

    /// Euclidean norm of the coefficient vector, equal to the L²(S³) norm.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn sample_harmonic(basis: Arc<HarmonicSpaceBasis>, seed: u64) -> Result<RandomHarmonic> {
    sample_harmonic_stream(basis, seed, 0)
}

/// Sample number `stream` of the run seeded by `seed`.
pub fn sample_harmonic_stream(basis: Arc<HarmonicSpaceBasis>, seed: u64, stream: u64) -> Result<RandomHarmonic> {
    let mut rng = sample_rng(seed, stream);
    let coeffs = (0..basis.dim()).map(|_| standard_complex(&mut rng)).collect();
    let mut h = RandomHarmonic::from_coefficients(basis, coeffs)?;
    h.seed = Some((seed, stream));
    Ok(h)
}

pub fn evaluate(h: &RandomHarmonic, x: CartesianPoint) -> C {
    h.poly.eval(x)
}

/// u = Re ψ at a point given in Hopf coordinates.
pub fn real_part_values(h: &RandomHarmonic, p: HopfPoint) -> f64 {
    evaluate(h, hopf_to_cartesian(p)).re
}

/// f(α, φ) = ψ at the θ = 0 lift.
pub fn section_value(h: &RandomHarmonic, alpha: f64, phi: f64) -> C {
    evaluate(h, chart_point(alpha, phi))
}

/// f and its chart derivatives (∂α f, ∂φ f).
pub fn section_chart_jet(h: &RandomHarmonic, alpha: f64, phi: f64) -> (C, [C; 2]) {
    let x = chart_point(alpha, phi);
    let w = h.poly.eval_wirtinger(x);
    let (ea, eb) = (C::from_polar(1.0, phi), C::from_polar(1.0, -phi));
    let d_alpha = [alpha.cos() * ea, -alpha.sin() * eb];
    let d_phi = [I * x.z1, -I * x.z2];
    (w.value, [w.along(d_alpha), w.along(d_phi)])
}

/// Coefficients (a, b) with Re ψ = a cos mθ + b sin mθ along the fiber over (α, φ).
pub fn fiber_coefficients(h: &RandomHarmonic, alpha: f64, phi: f64) -> (f64, f64) {
    let f = section_value(h, alpha, phi);
    (f.re, -f.im)
}

/// 1-jet of the section at a base point of S².
#[derive(Clone, Copy, Debug)]
pub struct SectionJet {
    pub base: SpherePoint,
    pub alpha: f64,
    pub phi: f64,
    pub value: C,
    /// Derivatives along the orthonormal horizontal frame e₁ = ∂α, e₂ = (∂φ + cos2α ∂θ)/sin2α.
    pub gradient: [C; 2],
    /// Chart derivatives (∂α f, ∂φ f) in the θ = 0 gauge.
    pub chart_gradient: [C; 2],
}

pub fn evaluate_jet(h: &RandomHarmonic, base: SpherePoint) -> Result<SectionJet> {
    let (alpha, phi) = base.to_chart_checked()?;
    let (value, cg) = section_chart_jet(h, alpha, phi);
    let m = h.m() as f64;
    let horizontal = (cg[1] + (2.0 * alpha).cos() * I * m * value) / (2.0 * alpha).sin();
    Ok(SectionJet {
        base,
        alpha,
        phi,
        value,
        gradient: [cg[0], horizontal],
        chart_gradient: cg,
    })
}

/// Local trivializations over the polar caps of S², parametrized by u in the unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapGauge {
    /// ψ(u, √(1−|u|²)) near the base point (0, 0, −1).
    South,
    /// ψ(√(1−|u|²), u) near the base point (0, 0, 1).
    North,
}

impl CapGauge {
    pub fn lift(self, u: C) -> CartesianPoint {
        let s = C::new((1.0 - u.norm_sqr()).max(0.0).sqrt(), 0.0);
        match self {
            CapGauge::South => CartesianPoint::new(u, s),
            CapGauge::North => CartesianPoint::new(s, u),
        }
    }
}

/// Section value in a cap gauge and its derivatives along Re u and Im u.
pub fn cap_jet(h: &RandomHarmonic, gauge: CapGauge, u: C) -> (C, [C; 2]) {
    let x = gauge.lift(u);
    let w = h.poly.eval_wirtinger(x);
    let s = (1.0 - u.norm_sqr()).sqrt();
    let ds = [C::new(-u.re / s, 0.0), C::new(-u.im / s, 0.0)];
    let du = [C::new(1.0, 0.0), I];
    let tangent = |j: usize| match gauge {
        CapGauge::South => [du[j], ds[j]],
        CapGauge::North => [ds[j], du[j]],
    };
    (w.value, [w.along(tangent(0)), w.along(tangent(1))])
}
