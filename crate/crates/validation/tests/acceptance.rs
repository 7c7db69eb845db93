//! Acceptance criteria 1 through 12, one test each. Every test prints one PASS or FAIL line.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;

use s3nodal_core::basis::{build_basis_nm, dimension, exact, is_nonempty, laplacian_constraint};
use s3nodal_core::experiments::{
    ensemble_equivalence_test, fit_normalization, records_to_csv, run_ensemble, with_threads, Config, Ensemble,
    EnsembleParams, EnsembleReport,
};
use s3nodal_core::harmonic::sample_rng;
use s3nodal_core::hopf::HopfPoint;
use s3nodal_core::kacrice::{kacrice_integral_mc, kacrice_integral_polar, scalar_integral_quadrature};
use s3nodal_core::kernels::{
    chebyshev_moment0, chebyshev_moment1, covariance_closed_form, covariance_closed_form_with, covariance_numeric,
    d_value, moment0_quadrature, moment1_quadrature, CrossTerm,
};
use s3nodal_core::Error;
use s3nodal_validation::{ensemble, verdict};

#[test]
fn criterion_01_dimension_law() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for n in 0..=30u32 {
        for m in -(n as i32)..=n as i32 {
            let expected = if (n as i32 - m) % 2 == 0 { n as usize + 1 } else { 0 };
            let built = match build_basis_nm(n, m) {
                Ok(b) => b.dim(),
                Err(Error::EmptySpace { .. }) => 0,
                Err(e) => panic!("{e}"),
            };
            if built != expected || dimension(n, m) != expected {
                bad.push((n, m));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        1,
        bad.is_empty() && secs < 60.0,
        format!("mismatches {bad:?}, {secs:.2} s for |m| <= N <= 30"),
    );
}

#[test]
fn criterion_02_harmonicity_and_orthonormality() {
    let (mut gram_exact, mut residual_exact, mut gram_f64, mut residual_f64, mut absolute) =
        (0f64, 0f64, 0f64, 0f64, 0f64);
    for n in 0..=30u32 {
        for m in (-(n as i32)..=n as i32).filter(|&m| is_nonempty(n, m)) {
            let b = build_basis_nm(n, m).unwrap();
            gram_exact = gram_exact.max(exact::gram_defect(&b));
            residual_exact = residual_exact.max(exact::constraint_backward_error(&b));
            let id = DMatrix::<f64>::identity(b.dim(), b.dim());
            gram_f64 = gram_f64.max((b.gram() - id).amax());
            let lc = laplacian_constraint(b.bidegree);
            for v in &b.vectors {
                residual_f64 = residual_f64.max(lc.residual(v));
                absolute = absolute.max(lc.absolute_residual(v));
            }
        }
    }
    let pass = gram_exact <= 1e-12 && residual_exact <= 1e-12;
    verdict(
        2,
        pass,
        format!(
            "exact-arithmetic Gram defect {gram_exact:.2e}, backward error {residual_exact:.2e}; \
             f64 Gram defect {gram_f64:.2e}, backward error {residual_f64:.2e}, absolute residual {absolute:.2e}"
        ),
    );
}

#[test]
fn criterion_03_chebyshev_moments() {
    let t = Instant::now();
    let mut worst = 0f64;
    for n in 0..=40u32 {
        for m in 0..=n as i32 {
            let (c0, c1) = (chebyshev_moment0(n, m).unwrap(), chebyshev_moment1(n, m).unwrap());
            let expected = if is_nonempty(n, m) {
                (1.0, d_value(n, m))
            } else {
                (0.0, 0.0)
            };
            assert_eq!((c0, c1), expected);
            worst = worst
                .max((moment0_quadrature(n, m) - c0).abs())
                .max((moment1_quadrature(n, m) - c1).abs());
        }
    }
    verdict(
        3,
        worst <= 1e-10,
        format!(
            "max |quadrature - closed form| {worst:.2e}, {:.2} s",
            t.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_04_covariance_matrices() {
    let pairs = [(2u32, 0i32), (3, 1), (4, 2), (5, 5), (6, 2)];
    let base = HopfPoint::new(FRAC_PI_4, 0.0, 0.0);
    let mut rng = sample_rng(404, 0);
    let points: Vec<HopfPoint> = (0..5)
        .map(|_| {
            HopfPoint::new(
                rng.random_range(0.2..1.37),
                rng.random_range(0.0..PI),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let (mut quoted, mut full, mut spread) = (Vec::new(), 0f64, 0f64);
    for (n, m) in pairs {
        let numeric = covariance_numeric(n, m, base).unwrap();
        quoted.push(((n, m), numeric.max_difference(&covariance_closed_form(n, m).unwrap())));
        full = full.max(numeric.max_difference(&covariance_closed_form_with(n, m, CrossTerm::Full).unwrap()));
        for p in &points {
            spread = spread.max(covariance_numeric(n, m, *p).unwrap().max_difference(&numeric));
        }
    }
    let worst = quoted.iter().map(|q| q.1).fold(0.0, f64::max);
    let detail: Vec<String> = quoted.iter().map(|((n, m), d)| format!("({n},{m}) {d:.1e}")).collect();
    verdict(
        4,
        worst <= 1e-5 && spread <= 1e-5,
        format!(
            "finite difference vs quoted closed form: {}; vs cross term -i*m: {full:.1e}; \
             point independence over 5 random points {spread:.1e}",
            detail.join(", ")
        ),
    );
}

#[test]
fn criterion_05_kacrice_scalar_integral() {
    let mut worst = 0f64;
    for i in 0..21 {
        let eta = -0.5 + i as f64 / 20.0;
        worst = worst.max((scalar_integral_quadrature(eta) - (1.0 + eta * eta) / (4.0 * PI)).abs());
    }
    let (n, m) = (4, 2);
    let lambda = covariance_closed_form(n, m).unwrap().lambda;
    let mc = kacrice_integral_mc(&lambda, n, 1_000_000, 5).unwrap();
    let polar = kacrice_integral_polar(&lambda, n).unwrap();
    let z = mc.z_score(polar);
    verdict(
        5,
        worst <= 1e-12 && z.abs() <= 3.0,
        format!(
            "21-point eta grid max error {worst:.2e}; MC {:.6} +/- {:.1e} vs polar {polar:.6} at (4,2), z = {z:.2}",
            mc.mean, mc.stderr
        ),
    );
}

#[test]
fn criterion_06_holomorphic_anchor() {
    let mut lines = Vec::new();
    let mut pass = true;
    for n in 3..=8u32 {
        let r = ensemble(n, n as i32, 200, 6, true, false);
        let certified: Vec<_> = r
            .records
            .iter()
            .filter(|x| x.status == "ok" && x.all_certified == Some(true))
            .collect();
        let exact = certified
            .iter()
            .filter(|x| x.zero_count == Some(n as usize) && x.index_sum == Some(n as i32))
            .count();
        pass &= exact == certified.len() && !certified.is_empty();
        lines.push(format!(
            "N={n}: {exact}/{} certified runs exact, {} failures",
            certified.len(),
            r.failures
        ));
    }
    verdict(6, pass, lines.join("; "));
}

#[test]
fn criterion_07_index_sum() {
    let mut lines = Vec::new();
    let mut pass = true;
    for (n, m) in [(4u32, 2i32), (5, 3), (6, 2)] {
        let r = ensemble(n, m, 100, 7, true, false);
        let rate = r.index_sum_matches as f64 / r.samples as f64;
        let explicit = r.failure_kinds.get("certification_failure").copied().unwrap_or(0);
        let accounted = r.index_sum_matches + explicit == r.samples;
        pass &= rate >= 0.99 && accounted && (explicit as f64) < 0.01 * r.samples as f64;
        lines.push(format!(
            "({n},{m}): index sum = m on {}/{}, certification failures {explicit}",
            r.index_sum_matches, r.samples
        ));
    }
    verdict(7, pass, lines.join("; "));
}

/// Ensembles with zeros, sheets and meshes at level 5 and 6, shared by criteria 8 and 10.
fn topology_ensembles() -> &'static Vec<EnsembleReport> {
    static CELL: OnceLock<Vec<EnsembleReport>> = OnceLock::new();
    CELL.get_or_init(|| {
        [(3u32, 1i32), (4, 2), (5, 3)]
            .iter()
            .map(|&(n, m)| ensemble(n, m, 100, 8, true, true))
            .collect()
    })
}

#[test]
fn criterion_08_connectivity() {
    let mut lines = Vec::new();
    let mut pass = true;
    for r in topology_ensembles() {
        let connected = r.component_histogram.get(&1).copied().unwrap_or(0);
        pass &= r.stable_runs > 0 && connected == r.stable_runs;
        lines.push(format!(
            "({},{}): components {:?} over {} stable runs of {}",
            r.n, r.m, r.component_histogram, r.stable_runs, r.samples
        ));
    }
    verdict(8, pass, lines.join("; "));
}

#[test]
fn criterion_09_zero_count_shape_law() {
    let cfg = Config::default();
    let mut reports = Vec::new();
    for n in 1..=8u32 {
        for m in (1..=n as i32).filter(|&m| is_nonempty(n, m)) {
            reports.push(ensemble(n, m, 500, 9, true, false));
        }
    }
    let fit = fit_normalization(&reports, cfg.spread_tolerance).unwrap();
    let worst = fit
        .points
        .iter()
        .max_by(|a, b| a.relative_residual.abs().total_cmp(&b.relative_residual.abs()))
        .unwrap();
    let anchor_ok = fit.anchor_within_ci == Some(true);
    verdict(
        9,
        fit.shape_ok && anchor_ok,
        format!(
            "c = {:.4} (95% CI {:.4} to {:.4}) over {} points; spread {:.3} (worst ({},{}) {:+.3}); \
             anchor {:.4} within CI: {anchor_ok}; c / (1/(4 pi)) = {:.3}",
            fit.c,
            fit.ci.0,
            fit.ci.1,
            fit.points.len(),
            fit.spread,
            worst.n,
            worst.m,
            worst.relative_residual,
            fit.anchor_constant.unwrap_or(f64::NAN),
            fit.ratio_to_quoted
        ),
    );
}

#[test]
fn criterion_10_genus_consistency() {
    let mut lines = Vec::new();
    let mut pass = true;
    for r in topology_ensembles() {
        let meshed: Vec<_> = r
            .records
            .iter()
            .filter(|x| x.status == "ok" && x.euler_characteristic.is_some())
            .collect();
        let integer = meshed.iter().all(|x| x.genus.is_some());
        let even = meshed.iter().all(|x| x.euler_characteristic.unwrap() % 2 == 0);
        let ev = &r.genus_evidence;
        let single_sheet = ev.sheet_counts.len() == 1;
        pass &= integer && even && single_sheet && ev.compared > 0 && ev.triple_relation_holds == ev.compared;
        lines.push(format!(
            "({},{}): sheets {:?}, triple relation {}/{}, genus |m|(k-2)/2+1 {}/{}, |m|(k-2)+1 {}/{}",
            r.n,
            r.m,
            ev.sheet_counts,
            ev.triple_relation_holds,
            ev.compared,
            ev.matches_quoted,
            ev.compared,
            ev.matches_two_sheet,
            ev.compared
        ));
    }
    verdict(10, pass, lines.join("; "));
}

#[test]
fn criterion_11_ensemble_equivalence() {
    let alpha = Config::default().ks_alpha;
    let cfg = Config {
        n: 4,
        m: 2,
        samples: 2000,
        seed: 11,
        ..Config::default()
    };
    let r = ensemble_equivalence_test(&cfg).unwrap();
    let ks = |e| r.comparison(e).unwrap().ks;
    let (literal, real, control) = (
        ks(Ensemble::Conditional),
        ks(Ensemble::RealGaussian),
        ks(Ensemble::ConditionalUnscaled),
    );
    let pass = r.self_check.statistic == 0.0 && literal.p_value > alpha && control.p_value < alpha;
    verdict(
        11,
        pass,
        format!(
            "conditional real p = {:.2e}; unscaled control p = {:.2e}; real Gaussian on Re H p = {:.2e}; \
             self-check D = {}",
            literal.p_value, control.p_value, real.p_value, r.self_check.statistic
        ),
    );
}

#[test]
fn criterion_12_reproducibility() {
    let cfg = Config {
        n: 4,
        m: 2,
        samples: 24,
        seed: 12,
        mesh: true,
        level: 4,
        ..Config::default()
    };
    let p = EnsembleParams::from_config(&cfg);
    let csv: Vec<Vec<u8>> = [1usize, 2, 4]
        .iter()
        .map(|&t| records_to_csv(&with_threads(t, || run_ensemble(&p)).unwrap().unwrap().records).unwrap())
        .collect();
    let rerun = records_to_csv(&run_ensemble(&p).unwrap().records).unwrap();
    let same = csv.iter().all(|c| *c == csv[0]) && rerun == csv[0];
    verdict(
        12,
        same,
        format!(
            "{} CSV bytes, identical across 1, 2, 4 threads and a rerun: {same}",
            csv[0].len()
        ),
    );
}
