//! Certified zeros of the section f_N^m over S² and their winding indices.
//!
//! S² is covered by the band α ∈ [α_S, π/2 − α_N] of the (α, φ) chart and two polar caps.
//! Each cap is searched in the same chart after an SU(2) rotation that carries the pole
//! to the chart point (π/4, 0); rotations commute with the circle action, so the rotated
//! function is again in H_N^m and indices are unchanged.
//!
//! Bounds used on a patch, with B = ‖c‖·√((N+1)/2π²) ≥ sup|ψ|:
//! f is a trigonometric polynomial of degree ≤ N in α and in φ, so every first
//! derivative is bounded by N·B and every second derivative by N²·B (Bernstein).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{kernel_diagonal, RandomHarmonic};
use crate::hopf::{chart_point, hopf_projection, CartesianPoint, SpherePoint};

type C = Complex64;
const I: C = C::new(0.0, 1.0);

/// Bisections allowed on one boundary segment before the boundary is declared degenerate.
const SEGMENT_DEPTH: u32 = 40;
const NEWTON_ITERATIONS: usize = 60;

/// Refinement parameters for `count_zeros`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ZeroRefinement {
    /// Quadtree depth below the initial grid.
    pub max_depth: u32,
    /// Angular chart radius of the south cap (α < alpha_south).
    pub alpha_south: f64,
    /// Angular chart radius of the north cap (α > π/2 − alpha_north).
    pub alpha_north: f64,
    /// Start of the fundamental φ-interval [phi0, phi0 + π).
    pub phi0: f64,
    /// Initial band grid (α cells, φ cells).
    pub grid: (usize, usize),
    /// Newton acceptance: |f(root)| / B.
    pub newton_tolerance: f64,
    /// A Newton root may lie in the cell enlarged by this fraction of its size.
    pub expansion: f64,
}

impl Default for ZeroRefinement {
    fn default() -> Self {
        // Cut points are generic so that symmetric test fields have no zeros on cell edges.
        ZeroRefinement {
            max_depth: 12,
            alpha_south: 0.1,
            alpha_north: 0.1137,
            phi0: 0.0731,
            grid: (8, 16),
            newton_tolerance: 1e-10,
            expansion: 0.5,
        }
    }
}

/// Which part of S² a zero was found in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Patch {
    Band,
    SouthCap,
    NorthCap,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SectionZero {
    pub point: SpherePoint,
    pub patch: Patch,
    /// Winding number of f/|f| around the zero.
    pub index: i32,
    /// |f(root)| / B.
    pub newton_residual: f64,
    /// True when uniqueness in the enlarged cell was established; false for zeros
    /// accepted at maximum depth on winding and Newton evidence alone.
    pub certified: bool,
    /// Half-diagonal of the cell in patch chart coordinates.
    pub cell_radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroSet {
    pub zeros: Vec<SectionZero>,
    pub total_count: usize,
    pub index_sum: i32,
    /// Winding of the section around each cap boundary circle (south, north), in the cap gauge.
    pub cap_windings: [i32; 2],
}

impl ZeroSet {
    pub fn all_certified(&self) -> bool {
        self.zeros.iter().all(|z| z.certified)
    }
}

/// ψ∘U restricted to the θ = 0 lift of the (α, φ) chart.
struct PatchField<'a> {
    h: &'a RandomHarmonic,
    u: Matrix2<C>,
}

impl PatchField<'_> {
    fn lift(&self, alpha: f64, phi: f64) -> CartesianPoint {
        let x = chart_point(alpha, phi);
        let y = self.u * nalgebra::Vector2::new(x.z1, x.z2);
        CartesianPoint::new(y[0], y[1])
    }

    fn value(&self, alpha: f64, phi: f64) -> C {
        self.h.polynomial().eval(self.lift(alpha, phi))
    }

    /// f and (∂α f, ∂φ f).
    fn jet(&self, alpha: f64, phi: f64) -> (C, [C; 2]) {
        let w = self.h.polynomial().eval_wirtinger(self.lift(alpha, phi));
        let (ea, eb) = (C::from_polar(1.0, phi), C::from_polar(1.0, -phi));
        let x = chart_point(alpha, phi);
        let push = |v: [C; 2]| {
            let t = self.u * nalgebra::Vector2::new(v[0], v[1]);
            [t[0], t[1]]
        };
        let d_alpha = push([alpha.cos() * ea, -alpha.sin() * eb]);
        let d_phi = push([I * x.z1, -I * x.z2]);
        (w.value, [w.along(d_alpha), w.along(d_phi)])
    }
}

fn su2(a: C, b: C) -> Matrix2<C> {
    Matrix2::new(a, -b.conj(), b, a.conj())
}

/// Rotation taking the chart point (π/4, 0) over (1, 0, 0) to the fiber over the south pole.
fn south_rotation() -> Matrix2<C> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    su2(C::new(s, 0.0), C::new(s, 0.0))
}

fn north_rotation() -> Matrix2<C> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    su2(C::new(s, 0.0), C::new(-s, 0.0))
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    a0: f64,
    a1: f64,
    p0: f64,
    p1: f64,
    depth: u32,
}

impl Cell {
    fn center(&self) -> (f64, f64) {
        (0.5 * (self.a0 + self.a1), 0.5 * (self.p0 + self.p1))
    }

    fn half(&self) -> (f64, f64) {
        (0.5 * (self.a1 - self.a0), 0.5 * (self.p1 - self.p0))
    }

    fn children(&self) -> [Cell; 4] {
        let (ac, pc) = self.center();
        let d = self.depth + 1;
        [
            Cell {
                a0: self.a0,
                a1: ac,
                p0: self.p0,
                p1: pc,
                depth: d,
            },
            Cell {
                a0: ac,
                a1: self.a1,
                p0: self.p0,
                p1: pc,
                depth: d,
            },
            Cell {
                a0: self.a0,
                a1: ac,
                p0: pc,
                p1: self.p1,
                depth: d,
            },
            Cell {
                a0: ac,
                a1: self.a1,
                p0: pc,
                p1: self.p1,
                depth: d,
            },
        ]
    }
}

/// Sum of principal phase increments along a path, refined until each step is provably
/// shorter than the distance to 0: `lip · |Δt| < max(|f(t)|, |f(t + Δt)|)`.
fn phase_change<F: Fn(f64) -> C>(f: &F, t0: f64, t1: f64, lip: f64, initial: usize) -> Result<f64> {
    let mut total = 0.0;
    let step = (t1 - t0) / initial as f64;
    for i in 0..initial {
        let a = t0 + step * i as f64;
        let b = if i + 1 == initial { t1 } else { a + step };
        let mut stack = vec![(a, b, f(a), f(b), 0u32)];
        while let Some((a, b, fa, fb, depth)) = stack.pop() {
            if lip * (b - a).abs() < fa.norm().max(fb.norm()) {
                total += (fb / fa).arg();
                continue;
            }
            if depth >= SEGMENT_DEPTH {
                return Err(Error::CertificationFailure(format!(
                    "section vanishes to working precision near a cell boundary at t = {a:.6e}"
                )));
            }
            let mid = 0.5 * (a + b);
            let fm = f(mid);
            // Push the right half first so the left half is summed first.
            stack.push((mid, b, fm, fb, depth + 1));
            stack.push((a, mid, fa, fm, depth + 1));
        }
    }
    Ok(total)
}

fn winding_from_phase(total: f64) -> i32 {
    (total / (2.0 * PI)).round() as i32
}

/// Winding number of f/|f| along the boundary of a chart cell, counterclockwise in (α, φ).
fn cell_winding(field: &PatchField, cell: &Cell, lip: f64) -> Result<i32> {
    let Cell { a0, a1, p0, p1, .. } = *cell;
    let mut total = 0.0;
    total += phase_change(&|t| field.value(t, p0), a0, a1, lip, 4)?;
    total += phase_change(&|t| field.value(a1, t), p0, p1, lip, 4)?;
    total += phase_change(&|t| field.value(t, p1), a1, a0, lip, 4)?;
    total += phase_change(&|t| field.value(a0, t), p1, p0, lip, 4)?;
    Ok(winding_from_phase(total))
}

/// Distance from 0 to {c + x·u + y·v : |x|, |y| ≤ 1} in ℂ = ℝ².
fn parallelogram_distance(c: C, u: C, v: C) -> f64 {
    let det = u.re * v.im - u.im * v.re;
    if det != 0.0 {
        // Solve x·u + y·v = −c.
        let x = (-c.re * v.im + c.im * v.re) / det;
        let y = (-u.re * c.im + u.im * c.re) / det;
        if x.abs() <= 1.0 && y.abs() <= 1.0 {
            return 0.0;
        }
    }
    let segment = |a: C, b: C| {
        let t = b - a;
        let len = t.norm_sqr();
        let k = if len > 0.0 {
            (-(a.conj() * t).re / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (a + t * k).norm()
    };
    let corners = [c - u - v, c + u - v, c + u + v, c - u + v];
    (0..4)
        .map(|i| segment(corners[i], corners[(i + 1) % 4]))
        .fold(f64::INFINITY, f64::min)
}

fn real_jacobian(d: [C; 2]) -> Matrix2<f64> {
    Matrix2::new(d[0].re, d[1].re, d[0].im, d[1].im)
}

fn smallest_singular_value(j: &Matrix2<f64>) -> f64 {
    let s = j.singular_values();
    s[0].min(s[1])
}

struct NewtonResult {
    alpha: f64,
    phi: f64,
    residual: f64,
    det: f64,
}

fn newton(field: &PatchField, start: (f64, f64), bound: f64) -> Option<NewtonResult> {
    let (mut a, mut p) = start;
    for _ in 0..NEWTON_ITERATIONS {
        let (f, d) = field.jet(a, p);
        let j = real_jacobian(d);
        let step = j.lu().solve(&nalgebra::Vector2::new(f.re, f.im))?;
        a -= step[0];
        p -= step[1];
        if !(a.is_finite() && p.is_finite()) {
            return None;
        }
        if step.norm() < 1e-15 {
            break;
        }
    }
    let (f, d) = field.jet(a, p);
    Some(NewtonResult {
        alpha: a,
        phi: p,
        residual: f.norm() / bound,
        det: real_jacobian(d).determinant(),
    })
}

struct Search<'a> {
    field: PatchField<'a>,
    patch: Patch,
    n: f64,
    bound: f64,
    cfg: ZeroRefinement,
}

impl Search<'_> {
    /// No zero in the cell if either |f(center)| exceeds the first-derivative bound times the
    /// largest chart displacement s = |Δα| + |Δφ|, or the linearization f(c) + J(c)δ stays
    /// farther from 0 than the Taylor remainder ½·N²·B·s².
    fn excluded(&self, cell: &Cell) -> bool {
        let (ac, pc) = cell.center();
        let (ha, hp) = cell.half();
        let s = ha + hp;
        if self.field.value(ac, pc).norm() > self.n * self.bound * s {
            return true;
        }
        let (f, d) = self.field.jet(ac, pc);
        let remainder = 0.5 * self.n * self.n * self.bound * s * s;
        parallelogram_distance(f, d[0] * ha, d[1] * hp) > remainder
    }

    /// f is injective on the enlarged cell when σ_min(J(center)) exceeds
    /// sup‖J(x) − J(center)‖ ≤ √2·N²·B·(|Δα| + |Δφ|).
    fn unique_in_enlarged(&self, cell: &Cell) -> bool {
        let (ac, pc) = cell.center();
        let (ha, hp) = cell.half();
        let grow = 1.0 + 2.0 * self.cfg.expansion;
        let (_, d) = self.field.jet(ac, pc);
        let sigma = smallest_singular_value(&real_jacobian(d));
        sigma > std::f64::consts::SQRT_2 * self.n * self.n * self.bound * grow * (ha + hp)
    }

    fn owns(&self, x: CartesianPoint) -> bool {
        let alpha = x.z1.norm().clamp(0.0, 1.0).asin();
        match self.patch {
            Patch::Band => true,
            Patch::SouthCap => alpha < self.cfg.alpha_south,
            Patch::NorthCap => alpha > FRAC_PI_2 - self.cfg.alpha_north,
        }
    }

    fn run(&self, roots: Vec<Cell>, out: &mut Vec<SectionZero>) -> Result<()> {
        let lip = self.n * self.bound;
        let mut stack: Vec<Cell> = roots.into_iter().rev().collect();
        while let Some(cell) = stack.pop() {
            if self.excluded(&cell) {
                continue;
            }
            let unique = self.unique_in_enlarged(&cell);
            let at_max = cell.depth >= self.cfg.max_depth;
            if !unique && !at_max {
                for child in cell.children().into_iter().rev() {
                    stack.push(child);
                }
                continue;
            }
            let w = cell_winding(&self.field, &cell, lip)?;
            match w {
                0 => continue,
                1 | -1 => {}
                _ if unique => {
                    return Err(Error::CertificationFailure(format!(
                        "winding {w} on a cell where f is injective"
                    )));
                }
                _ => {
                    return Err(Error::CertificationFailure(format!(
                        "winding {w} at maximum depth {} near (α, φ) = {:?}",
                        cell.depth,
                        cell.center()
                    )));
                }
            }
            let found = newton(&self.field, cell.center(), self.bound).filter(|r| {
                let (ac, pc) = cell.center();
                let (ha, hp) = cell.half();
                let grow = 1.0 + self.cfg.expansion;
                r.residual < self.cfg.newton_tolerance
                    && (r.alpha - ac).abs() <= grow * ha
                    && (r.phi - pc).abs() <= grow * hp
                    && r.det.signum() as i32 == w
            });
            let Some(root) = found else {
                if !at_max {
                    for child in cell.children().into_iter().rev() {
                        stack.push(child);
                    }
                    continue;
                }
                return Err(Error::CertificationFailure(format!(
                    "Newton did not confirm the winding-{w} cell at (α, φ) = {:?}",
                    cell.center()
                )));
            };
            let x = self.field.lift(root.alpha, root.phi);
            if !self.owns(x) {
                continue;
            }
            let (ha, hp) = cell.half();
            out.push(SectionZero {
                point: hopf_projection(x),
                patch: self.patch,
                index: w,
                newton_residual: root.residual,
                certified: unique,
                cell_radius: ha.hypot(hp),
            });
        }
        Ok(())
    }
}

fn identity() -> Matrix2<C> {
    Matrix2::identity()
}

/// Winding of the section around the boundary of a cap, counterclockwise in the cap gauge
/// u ↦ ψ(u, √(1−|u|²)) (south) or ψ(√(1−|u|²), u) (north), on |u| = sin(cap angle).
fn cap_circle_winding(h: &RandomHarmonic, north: bool, cap_alpha: f64, lip: f64) -> Result<i32> {
    let r = cap_alpha.sin();
    let s = (1.0 - r * r).sqrt();
    let f = |t: f64| {
        let u = C::from_polar(r, t);
        let x = if north {
            CartesianPoint::new(C::new(s, 0.0), u)
        } else {
            CartesianPoint::new(u, C::new(s, 0.0))
        };
        h.polynomial().eval(x)
    };
    Ok(winding_from_phase(phase_change(&f, 0.0, 2.0 * PI, lip, 16)?))
}

/// All zeros of f_N^m on S² with their indices.
pub fn count_zeros(h: &RandomHarmonic, cfg: &ZeroRefinement) -> Result<ZeroSet> {
    let norm = h.coeff_norm();
    if !(norm > 0.0) {
        return Err(Error::Domain("the zero harmonic has no isolated zeros".into()));
    }
    let n = h.n() as f64;
    let bound = norm * kernel_diagonal(h.n()).sqrt();
    let mut zeros = Vec::new();

    let (na, np) = cfg.grid;
    let (lo, hi) = (cfg.alpha_south, FRAC_PI_2 - cfg.alpha_north);
    let mut band = Vec::with_capacity(na * np);
    for i in 0..na {
        for j in 0..np {
            band.push(Cell {
                a0: lo + (hi - lo) * i as f64 / na as f64,
                a1: if i + 1 == na {
                    hi
                } else {
                    lo + (hi - lo) * (i + 1) as f64 / na as f64
                },
                p0: cfg.phi0 + PI * j as f64 / np as f64,
                p1: cfg.phi0 + PI * (j + 1) as f64 / np as f64,
                depth: 0,
            });
        }
    }
    let search = |u, patch| Search {
        field: PatchField { h, u },
        patch,
        n,
        bound,
        cfg: *cfg,
    };
    search(identity(), Patch::Band).run(band, &mut zeros)?;

    let mut cap_windings = [0; 2];
    for (k, (patch, rot, cap)) in [
        (Patch::SouthCap, south_rotation(), cfg.alpha_south),
        (Patch::NorthCap, north_rotation(), cfg.alpha_north),
    ]
    .into_iter()
    .enumerate()
    {
        // The rotated cap is the disk of chart radius `cap` around (π/4, 0); the box is
        // enlarged by uneven margins so that its bisection lines miss the cap center.
        let root = Cell {
            a0: FRAC_PI_4 - 1.043 * cap,
            a1: FRAC_PI_4 + 1.071 * cap,
            p0: -1.057 * cap,
            p1: 1.029 * cap,
            depth: 0,
        };
        let before = zeros.len();
        search(rot, patch).run(vec![root], &mut zeros)?;
        let inside: i32 = zeros[before..].iter().map(|z| z.index).sum();
        let w = cap_circle_winding(h, patch == Patch::NorthCap, cap, n * bound)?;
        if w != inside {
            return Err(Error::CertificationFailure(format!(
                "{patch:?}: indices inside sum to {inside} but the boundary winding is {w}"
            )));
        }
        cap_windings[k] = w;
    }

    let index_sum = zeros.iter().map(|z| z.index).sum();
    Ok(ZeroSet {
        total_count: zeros.len(),
        index_sum,
        zeros,
        cap_windings,
    })
}

/// Number of θ ∈ [0, 2π) with a cos mθ + b sin mθ = 0 on the fiber over `base`.
pub fn fiber_sheet_count(h: &RandomHarmonic, base: SpherePoint) -> Result<usize> {
    Ok(fiber_zero_angles(h, base)?.len())
}

/// The solutions θ ∈ [0, 2π) of R cos(mθ − θ₀) = 0 in increasing order.
pub fn fiber_zero_angles(h: &RandomHarmonic, base: SpherePoint) -> Result<Vec<f64>> {
    let (alpha, phi) = base.to_chart();
    let (a, b) = crate::harmonic::fiber_coefficients(h, alpha, phi);
    fiber_angles_from_coefficients(h.m(), a, b, h.coeff_norm() * kernel_diagonal(h.n()).sqrt())
}

/// Solutions of a cos mθ + b sin mθ = 0; `scale` sets the threshold for a vanishing (a, b).
pub fn fiber_angles_from_coefficients(m: i32, a: f64, b: f64, scale: f64) -> Result<Vec<f64>> {
    if a.hypot(b) <= 1e-14 * scale {
        return Err(Error::BaseOnZeroSet);
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    // a cos mθ + b sin mθ = R cos(mθ − θ₀) with θ₀ = atan2(b, a).
    let theta0 = b.atan2(a);
    let k = m.unsigned_abs() as usize;
    let mf = m as f64;
    let mut out: Vec<f64> = (0..2 * k)
        .map(|j| ((theta0 + FRAC_PI_2 + PI * j as f64) / mf).rem_euclid(2.0 * PI))
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis_nm;
    use crate::harmonic::{sample_harmonic_stream, section_value};
    use std::sync::Arc;

    fn harmonic_from_poly(n: u32, m: i32, terms: &[((u32, u32), C)]) -> RandomHarmonic {
        let b = Arc::new(build_basis_nm(n, m).unwrap());
        let mut poly = vec![C::new(0.0, 0.0); b.bidegree.monomial_count()];
        for &((a1, b1), c) in terms {
            poly[b.bidegree.index(a1, b1)] = c;
        }
        RandomHarmonic::from_polynomial(b, &poly).unwrap()
    }

    #[test]
    fn z1_has_one_zero_at_the_south_pole() {
        let h = harmonic_from_poly(1, 1, &[((1, 0), C::new(1.0, 0.0))]);
        let z = count_zeros(&h, &ZeroRefinement::default()).unwrap();
        assert_eq!(z.total_count, 1);
        assert_eq!(z.zeros[0].index, 1);
        assert_eq!(z.zeros[0].patch, Patch::SouthCap);
        assert!((z.zeros[0].point.0[2] + 1.0).abs() < 1e-12);
        assert_eq!(z.cap_windings, [1, 0]);
        assert!(z.all_certified());
    }

    #[test]
    fn conjugate_z1_has_index_minus_one() {
        // z̄1 has bidegree (0, 1), m = −1.
        let h = harmonic_from_poly(1, -1, &[((0, 1), C::new(1.0, 0.0))]);
        let z = count_zeros(&h, &ZeroRefinement::default()).unwrap();
        assert_eq!((z.total_count, z.index_sum), (1, -1));
    }

    #[test]
    fn band_zero_has_positive_index() {
        // f = sin α e^{iφ} + cos α e^{−iφ} vanishes once, at α = π/4, 2φ = π.
        let h = harmonic_from_poly(1, 1, &[((1, 0), C::new(1.0, 0.0))]);
        let b = h.basis.clone();
        let mut poly = vec![C::new(0.0, 0.0); 2];
        poly[b.bidegree.index(1, 0)] = C::new(1.0, 0.0);
        poly[b.bidegree.index(0, 0)] = C::new(1.0, 0.0);
        let h = RandomHarmonic::from_polynomial(b, &poly).unwrap();
        let z = count_zeros(&h, &ZeroRefinement::default()).unwrap();
        assert_eq!(z.total_count, 1);
        assert_eq!(z.zeros[0].patch, Patch::Band);
        assert_eq!(z.index_sum, 1);
        let p = z.zeros[0].point.0;
        assert!((p[0] + 1.0).abs() < 1e-10, "{p:?}");
    }

    #[test]
    fn holomorphic_samples_have_m_zeros() {
        let cfg = ZeroRefinement::default();
        for n in 1..=5u32 {
            let b = Arc::new(build_basis_nm(n, n as i32).unwrap());
            for s in 0..10 {
                let h = sample_harmonic_stream(b.clone(), 17, s).unwrap();
                let z = count_zeros(&h, &cfg).unwrap();
                assert_eq!(z.total_count, n as usize);
                assert_eq!(z.index_sum, n as i32);
                assert!(z.zeros.iter().all(|z| z.index == 1));
            }
        }
    }

    #[test]
    fn index_sum_is_m_and_zeros_are_zeros() {
        let cfg = ZeroRefinement::default();
        for (n, m) in [(4, 2), (5, -3), (6, 2), (3, 1)] {
            let b = Arc::new(build_basis_nm(n, m).unwrap());
            for s in 0..10 {
                let h = sample_harmonic_stream(b.clone(), 5, s).unwrap();
                let z = count_zeros(&h, &cfg).unwrap();
                assert_eq!(z.index_sum, m, "(N, m) = ({n}, {m}), sample {s}");
                assert!(z.total_count >= m.unsigned_abs() as usize);
                let scale = h.coeff_norm() * kernel_diagonal(n).sqrt();
                for zero in &z.zeros {
                    let (alpha, phi) = zero.point.to_chart();
                    assert!(section_value(&h, alpha, phi).norm() < 1e-8 * scale);
                }
                // Zeros are distinct points of S².
                for (i, p) in z.zeros.iter().enumerate() {
                    for q in &z.zeros[i + 1..] {
                        assert!(p.point.dot(q.point) < 1.0 - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn counts_do_not_depend_on_the_cut() {
        let b = Arc::new(build_basis_nm(6, 2).unwrap());
        let other = ZeroRefinement {
            alpha_south: 0.23,
            alpha_north: 0.19,
            phi0: 0.41,
            grid: (5, 11),
            ..Default::default()
        };
        for s in 0..8 {
            let h = sample_harmonic_stream(b.clone(), 9, s).unwrap();
            let a = count_zeros(&h, &ZeroRefinement::default()).unwrap();
            let c = count_zeros(&h, &other).unwrap();
            assert_eq!(a.total_count, c.total_count);
        }
    }

    #[test]
    fn zero_count_is_gauge_invariant_under_the_circle_action() {
        let b = Arc::new(build_basis_nm(5, 3).unwrap());
        let h = sample_harmonic_stream(b.clone(), 4, 0).unwrap();
        let rotated: Vec<C> = h.coeffs.iter().map(|c| c * C::from_polar(1.0, 0.7)).collect();
        let g = RandomHarmonic::from_coefficients(b, rotated).unwrap();
        let cfg = ZeroRefinement::default();
        assert_eq!(
            count_zeros(&h, &cfg).unwrap().total_count,
            count_zeros(&g, &cfg).unwrap().total_count
        );
    }

    #[test]
    fn parallelogram_distance_examples() {
        let (u, v) = (C::new(1.0, 0.0), C::new(0.0, 2.0));
        assert_eq!(parallelogram_distance(C::new(0.5, 0.5), u, v), 0.0);
        assert!((parallelogram_distance(C::new(3.0, 0.0), u, v) - 2.0).abs() < 1e-15);
        assert!((parallelogram_distance(C::new(4.0, 6.0), u, v) - 5.0).abs() < 1e-15);
        // Degenerate parallelogram: a segment from −1 to 1 on the real axis.
        assert!((parallelogram_distance(C::new(0.0, 0.5), u, C::new(0.0, 0.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sheet_count_examples() {
        let t = fiber_angles_from_coefficients(1, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(t.len(), 2);
        assert!((t[0] - FRAC_PI_2).abs() < 1e-12 && (t[1] - 3.0 * FRAC_PI_2).abs() < 1e-12);
        assert_eq!(fiber_angles_from_coefficients(2, 0.3, -1.2, 1.0).unwrap().len(), 4);
        assert_eq!(fiber_angles_from_coefficients(-3, 0.3, 0.2, 1.0).unwrap().len(), 6);
        assert!(matches!(
            fiber_angles_from_coefficients(2, 0.0, 0.0, 1.0),
            Err(Error::BaseOnZeroSet)
        ));
        for m in [-3, 1, 2] {
            for (a, b) in [(0.4, 1.1), (-2.0, 0.3)] {
                for t in fiber_angles_from_coefficients(m, a, b, 1.0).unwrap() {
                    let mt = m as f64 * t;
                    assert!((a * mt.cos() + b * mt.sin()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sheet_count_is_constant_over_base_points() {
        let b = Arc::new(build_basis_nm(4, 2).unwrap());
        let h = sample_harmonic_stream(b, 1, 0).unwrap();
        let mut rng = crate::harmonic::sample_rng(3, 0);
        for _ in 0..100 {
            let v: [f64; 3] =
                std::array::from_fn(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng));
            let p = SpherePoint::new(v);
            assert_eq!(fiber_sheet_count(&h, p).unwrap(), 4);
        }
    }
}
