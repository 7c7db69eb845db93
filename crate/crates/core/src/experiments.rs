//! Seeded ensembles, normalization fits, ensemble-equivalence tests and their reports.
//!
//! Sample `i` of a run seeded by `s` draws its coefficients from ChaCha8 stream `i` of
//! seed `s`, so every row depends only on (seed, config) and not on scheduling.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{build_basis_nm, dimension, is_nonempty, load_or_build, Bidegree, HarmonicSpaceBasis};
use crate::error::{Error, Result};
use crate::harmonic::{sample_harmonic_stream, sample_rng, standard_complex, RandomHarmonic};
use crate::hopf::SpherePoint;
use crate::kacrice::{expected_zero_count_exact, predict, scalar_integral, KacRicePrediction};
use crate::kernels::{
    chebyshev_moment0, chebyshev_moment1, covariance_closed_form, d_value, moment0_quadrature, moment1_quadrature,
};
use crate::nodal::{euler_from_sheets, genus_from_zero_count, genus_two_sheet, refinement_check};
use crate::stats::{fit_through_origin, ks_two_sample, mean_stderr, KsResult, MeanStderr};
use crate::zeros::{count_zeros, fiber_sheet_count, ZeroRefinement};

type C = Complex64;

pub const VERSION_TAG: &str = concat!("s3nodal-", env!("CARGO_PKG_VERSION"));
pub const SCHEMA_VERSION: u32 = 1;
pub const ENV_PREFIX: &str = "S3NODAL_";

/// Seed salts for streams that must not collide with the main coefficient streams.
const SHEET_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const CONDITIONAL_SALT: u64 = 0xbf58_476d_1ce4_e5b9;
const REAL_SALT: u64 = 0x94d0_49bb_1331_11eb;
const UNSCALED_SALT: u64 = 0xd6e8_feb8_6659_fd93;

/// Run configuration. Sources are applied in the order defaults, file, environment, CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub seed: u64,
    pub samples: usize,
    pub n: u32,
    pub m: i32,
    pub level: u32,
    pub max_depth: u32,
    pub zeros: bool,
    pub mesh: bool,
    pub mc_samples: usize,
    pub sigma: f64,
    pub ks_alpha: f64,
    pub spread_tolerance: f64,
    pub fit_n_max: u32,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub basis_cache_dir: Option<PathBuf>,
    pub emit_svg: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 1,
            samples: 100,
            n: 4,
            m: 2,
            level: 5,
            max_depth: 12,
            zeros: true,
            mesh: false,
            mc_samples: 1_000_000,
            sigma: 3.0,
            ks_alpha: 0.01,
            spread_tolerance: 0.05,
            fit_n_max: 8,
            threads: 0,
            out_dir: PathBuf::from("out"),
            basis_cache_dir: None,
            emit_svg: false,
        }
    }
}

/// Keys that change results; `threads`, `out_dir`, `basis_cache_dir` and `emit_svg` do not.
const HASHED_KEYS: [&str; 13] = [
    "seed",
    "samples",
    "n",
    "m",
    "level",
    "max_depth",
    "zeros",
    "mesh",
    "mc_samples",
    "sigma",
    "ks_alpha",
    "spread_tolerance",
    "fit_n_max",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {key} = {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("cannot parse {key} = {value:?} as a boolean"))),
    }
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "seed" => self.seed = parse(&key, value)?,
            "samples" => self.samples = parse(&key, value)?,
            "n" => self.n = parse(&key, value)?,
            "m" => self.m = parse(&key, value)?,
            "level" => self.level = parse(&key, value)?,
            "max_depth" => self.max_depth = parse(&key, value)?,
            "zeros" => self.zeros = parse_bool(&key, value)?,
            "mesh" => self.mesh = parse_bool(&key, value)?,
            "mc_samples" => self.mc_samples = parse(&key, value)?,
            "sigma" => self.sigma = parse(&key, value)?,
            "ks_alpha" => self.ks_alpha = parse(&key, value)?,
            "spread_tolerance" => self.spread_tolerance = parse(&key, value)?,
            "fit_n_max" => self.fit_n_max = parse(&key, value)?,
            "threads" => self.threads = parse(&key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            "basis_cache_dir" => {
                let v = value.trim();
                self.basis_cache_dir = if v.is_empty() { None } else { Some(PathBuf::from(v)) };
            }
            "emit_svg" => self.emit_svg = parse_bool(&key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "seed" => self.seed.to_string(),
            "samples" => self.samples.to_string(),
            "n" => self.n.to_string(),
            "m" => self.m.to_string(),
            "level" => self.level.to_string(),
            "max_depth" => self.max_depth.to_string(),
            "zeros" => self.zeros.to_string(),
            "mesh" => self.mesh.to_string(),
            "mc_samples" => self.mc_samples.to_string(),
            "sigma" => self.sigma.to_string(),
            "ks_alpha" => self.ks_alpha.to_string(),
            "spread_tolerance" => self.spread_tolerance.to_string(),
            "fit_n_max" => self.fit_n_max.to_string(),
            _ => unreachable!("not a hashed key"),
        }
    }

    /// Applies `key = value` lines; blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_text(&std::fs::read_to_string(path)?)
    }

    /// Applies variables named `S3NODAL_<KEY>` from an iterator of (name, value) pairs.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        let mut found: Vec<(String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|s| (s.to_ascii_lowercase(), v)))
            .collect();
        found.sort();
        for (k, v) in found {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// Canonical `key=value` text of the result-affecting keys.
    pub fn canonical(&self) -> String {
        HASHED_KEYS.iter().map(|k| format!("{k}={}\n", self.get(k))).collect()
    }

    /// First 16 hex digits of SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn refinement(&self) -> ZeroRefinement {
        ZeroRefinement {
            max_depth: self.max_depth,
            ..ZeroRefinement::default()
        }
    }
}

/// Runs `f` on a pool of `threads` workers, or on the global pool when `threads` is 0.
pub fn with_threads<T: Send, F: FnOnce() -> T + Send>(threads: usize, f: F) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Orthonormal basis of H_N^m, read from or written to `cache_dir` when given.
pub fn basis_for(n: u32, m: i32, cache_dir: Option<&Path>) -> Result<Arc<HarmonicSpaceBasis>> {
    let basis = match cache_dir {
        Some(dir) => load_or_build(dir, Bidegree::from_nm(n, m)?)?,
        None => build_basis_nm(n, m)?,
    };
    if basis.dim() == 0 {
        return Err(Error::EmptySpace { n, m });
    }
    Ok(Arc::new(basis))
}

/// Analyses run on every sample.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Analyses {
    pub zeros: bool,
    /// Nodal surface at `level` and `level + 1`.
    pub mesh: bool,
}

/// One sample of an ensemble, flattened for CSV output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub config_hash: String,
    pub version: String,
    pub n: u32,
    pub m: i32,
    pub seed: u64,
    pub sample: u64,
    pub status: String,
    pub detail: String,
    pub zero_count: Option<usize>,
    pub index_sum: Option<i32>,
    pub all_certified: Option<bool>,
    pub sheets: Option<usize>,
    pub components: Option<usize>,
    pub euler_characteristic: Option<i64>,
    pub genus: Option<i64>,
    pub closed: Option<bool>,
    pub stable: Option<bool>,
}

fn failure_kind(e: &Error) -> &'static str {
    match e {
        Error::CertificationFailure(_) => "certification_failure",
        Error::BaseOnZeroSet => "base_on_zero_set",
        _ => "error",
    }
}

fn random_base_point(seed: u64, stream: u64) -> SpherePoint {
    let mut rng = sample_rng(seed ^ SHEET_SALT, stream);
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-3 {
            return SpherePoint::new(v);
        }
    }
}

/// Number of fiber sheets of Re ψ = 0 over a random base point.
fn sheets_at_random_base(h: &RandomHarmonic, seed: u64, stream: u64) -> Result<usize> {
    // A base point on the zero set has probability zero; retry with a fresh draw.
    let mut last = Error::BaseOnZeroSet;
    for k in 0..4u64 {
        match fiber_sheet_count(h, random_base_point(seed, stream.wrapping_add(k << 40))) {
            Ok(s) => return Ok(s),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn analyse_sample(
    h: &RandomHarmonic,
    base: SampleRecord,
    analyses: Analyses,
    refinement: &ZeroRefinement,
    level: u32,
) -> SampleRecord {
    let mut rec = base;
    let mut errors: Vec<Error> = Vec::new();
    if analyses.zeros {
        match count_zeros(h, refinement) {
            Ok(z) => {
                rec.zero_count = Some(z.total_count);
                rec.index_sum = Some(z.index_sum);
                rec.all_certified = Some(z.all_certified());
            }
            Err(e) => errors.push(e),
        }
        match sheets_at_random_base(h, rec.seed, rec.sample) {
            Ok(s) => rec.sheets = Some(s),
            Err(e) => errors.push(e),
        }
    }
    if analyses.mesh {
        match refinement_check(h, level) {
            Ok((surface, check)) => {
                rec.components = Some(surface.component_count());
                rec.euler_characteristic = Some(surface.euler_characteristic());
                let g = surface.total_genus();
                rec.genus = g.is_integer().then(|| g.to_integer());
                rec.closed = Some(check.closed);
                rec.stable = Some(check.stable);
            }
            Err(e) => errors.push(e),
        }
    }
    if let Some(e) = errors.first() {
        rec.status = failure_kind(e).to_string();
        rec.detail = errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
    }
    rec
}

/// Per-sample agreement of the mesh topology with the two genus formulas.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenusEvidence {
    /// Samples with zero count, sheet count and a refinement-stable connected closed surface.
    pub compared: usize,
    /// Mesh genus = |m|(k − 2)/2 + 1.
    pub matches_quoted: usize,
    /// Mesh genus = |m|(k − 2) + 1.
    pub matches_two_sheet: usize,
    /// χ = s·(2 − k) with the sheet count s observed on that sample.
    pub triple_relation_holds: usize,
    /// Histogram of observed sheet counts.
    pub sheet_counts: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub schema_version: u32,
    pub version: String,
    pub config_hash: String,
    pub n: u32,
    pub m: i32,
    pub samples: usize,
    pub seed: u64,
    pub successes: usize,
    pub failures: usize,
    pub failure_kinds: BTreeMap<String, usize>,
    pub zero_count: Option<MeanStderr>,
    /// Samples whose index sum equals m.
    pub index_sum_matches: usize,
    pub mesh_genus: Option<MeanStderr>,
    pub component_histogram: BTreeMap<usize, usize>,
    pub stable_runs: usize,
    pub genus_evidence: GenusEvidence,
    pub prediction: Option<KacRicePrediction>,
    /// Mean zero count / ((1 + η²)·D).
    pub shape_constant: Option<MeanStderr>,
    pub ratio_to_quoted_count: Option<f64>,
    pub ratio_to_rederived_count: Option<f64>,
    #[serde(skip)]
    pub records: Vec<SampleRecord>,
}

/// Parameters of one ensemble run.
#[derive(Clone, Debug)]
pub struct EnsembleParams {
    pub n: u32,
    pub m: i32,
    pub samples: usize,
    pub seed: u64,
    pub analyses: Analyses,
    pub refinement: ZeroRefinement,
    pub level: u32,
    pub config_hash: String,
    pub basis_cache_dir: Option<PathBuf>,
}

impl EnsembleParams {
    pub fn from_config(cfg: &Config) -> Self {
        EnsembleParams {
            n: cfg.n,
            m: cfg.m,
            samples: cfg.samples,
            seed: cfg.seed,
            analyses: Analyses {
                zeros: cfg.zeros,
                mesh: cfg.mesh,
            },
            refinement: cfg.refinement(),
            level: cfg.level,
            config_hash: cfg.hash(),
            basis_cache_dir: cfg.basis_cache_dir.clone(),
        }
    }
}

pub fn run_ensemble(p: &EnsembleParams) -> Result<EnsembleReport> {
    if p.analyses.mesh && p.m == 0 {
        return Err(Error::ZeroEquivariance);
    }
    let basis = basis_for(p.n, p.m, p.basis_cache_dir.as_deref())?;
    let records: Vec<SampleRecord> = (0..p.samples as u64)
        .into_par_iter()
        .map(|i| {
            let base = SampleRecord {
                config_hash: p.config_hash.clone(),
                version: VERSION_TAG.to_string(),
                n: p.n,
                m: p.m,
                seed: p.seed,
                sample: i,
                status: "ok".into(),
                detail: String::new(),
                zero_count: None,
                index_sum: None,
                all_certified: None,
                sheets: None,
                components: None,
                euler_characteristic: None,
                genus: None,
                closed: None,
                stable: None,
            };
            match sample_harmonic_stream(basis.clone(), p.seed, i) {
                Ok(h) => analyse_sample(&h, base, p.analyses, &p.refinement, p.level),
                Err(e) => SampleRecord {
                    status: failure_kind(&e).into(),
                    detail: e.to_string(),
                    ..base
                },
            }
        })
        .collect();
    Ok(summarize(p, records))
}

fn summarize(p: &EnsembleParams, records: Vec<SampleRecord>) -> EnsembleReport {
    let ok: Vec<&SampleRecord> = records.iter().filter(|r| r.status == "ok").collect();
    let mut failure_kinds = BTreeMap::new();
    for r in records.iter().filter(|r| r.status != "ok") {
        *failure_kinds.entry(r.status.clone()).or_insert(0) += 1;
    }
    let counts: Vec<f64> = ok.iter().filter_map(|r| r.zero_count.map(|k| k as f64)).collect();
    let zero_count = mean_stderr(&counts);
    let index_sum_matches = ok.iter().filter(|r| r.index_sum == Some(p.m)).count();

    let stable: Vec<&&SampleRecord> = ok.iter().filter(|r| r.stable == Some(true)).collect();
    let genera: Vec<f64> = stable.iter().filter_map(|r| r.genus.map(|g| g as f64)).collect();
    let mut component_histogram = BTreeMap::new();
    for r in &stable {
        if let Some(c) = r.components {
            *component_histogram.entry(c).or_insert(0) += 1;
        }
    }

    let mut ev = GenusEvidence::default();
    for r in &ok {
        if let Some(s) = r.sheets {
            *ev.sheet_counts.entry(s).or_insert(0) += 1;
        }
        let (Some(k), Some(s), Some(chi), Some(g)) = (r.zero_count, r.sheets, r.euler_characteristic, r.genus) else {
            continue;
        };
        if r.stable != Some(true) || r.components != Some(1) || r.closed != Some(true) {
            continue;
        }
        ev.compared += 1;
        let quoted = genus_from_zero_count(p.m, k as u32);
        if quoted.is_integer() && quoted.to_integer() == g {
            ev.matches_quoted += 1;
        }
        if genus_two_sheet(p.m, k as u32) == g {
            ev.matches_two_sheet += 1;
        }
        if euler_from_sheets(s as i64, k as u32) == chi {
            ev.triple_relation_holds += 1;
        }
    }

    let prediction = predict(p.n, p.m).ok();
    let shape_constant = prediction.and_then(|pr| {
        let x = (1.0 + pr.eta * pr.eta) * pr.d;
        zero_count.map(|z| MeanStderr {
            mean: z.mean / x,
            stderr: z.stderr / x,
            n: z.n,
        })
    });
    let ratio = |f: fn(&KacRicePrediction) -> f64| prediction.zip(zero_count).map(|(pr, z)| z.mean / f(&pr));
    EnsembleReport {
        schema_version: SCHEMA_VERSION,
        version: VERSION_TAG.to_string(),
        config_hash: p.config_hash.clone(),
        n: p.n,
        m: p.m,
        samples: p.samples,
        seed: p.seed,
        successes: ok.len(),
        failures: records.len() - ok.len(),
        failure_kinds,
        zero_count,
        index_sum_matches,
        mesh_genus: mean_stderr(&genera),
        component_histogram,
        stable_runs: stable.len(),
        genus_evidence: ev,
        prediction,
        shape_constant,
        ratio_to_quoted_count: ratio(|p| p.expected_zero_count),
        ratio_to_rederived_count: ratio(|p| p.rederived_zero_count),
        records,
    }
}

/// One (N, m) point of a normalization fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: u32,
    pub m: i32,
    /// (1 + η²)·D.
    pub shape: f64,
    pub mean_zero_count: f64,
    pub stderr: f64,
    pub relative_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalizationFit {
    pub c: f64,
    pub stderr: f64,
    pub ci: (f64, f64),
    /// 1/(4π).
    pub quoted_constant: f64,
    pub ratio_to_quoted: f64,
    pub points: Vec<FitPoint>,
    /// max_i |relative residual|.
    pub spread: f64,
    pub shape_ok: bool,
    /// N/((1 + η²)·D) = 4/5 at every m = N point, if any were supplied.
    pub anchor_constant: Option<f64>,
    pub anchor_within_ci: Option<bool>,
}

/// Least-squares fit of mean zero count = c·(1 + η²)·D over reports with m ≠ 0.
pub fn fit_normalization(reports: &[EnsembleReport], spread_tolerance: f64) -> Result<NormalizationFit> {
    let mut points: Vec<FitPoint> = Vec::new();
    for r in reports {
        let (Some(pr), Some(z)) = (r.prediction, r.zero_count) else {
            continue;
        };
        if points.iter().any(|q| (q.n, q.m) == (r.n, r.m)) {
            continue;
        }
        points.push(FitPoint {
            n: r.n,
            m: r.m,
            shape: (1.0 + pr.eta * pr.eta) * pr.d,
            mean_zero_count: z.mean,
            stderr: z.stderr,
            relative_residual: 0.0,
        });
    }
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "normalization fit needs 3 distinct (N, m) with m != 0, got {}",
            points.len()
        )));
    }
    let x: Vec<f64> = points.iter().map(|p| p.shape).collect();
    let y: Vec<f64> = points.iter().map(|p| p.mean_zero_count).collect();
    let fit = fit_through_origin(&x, &y)?;
    for (p, r) in points.iter_mut().zip(&fit.relative_residuals) {
        p.relative_residual = *r;
    }
    let spread = fit.relative_residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let anchors: Vec<f64> = points
        .iter()
        .filter(|p| p.m.unsigned_abs() == p.n)
        .map(|p| p.n as f64 / p.shape)
        .collect();
    let anchor_constant = (!anchors.is_empty()).then(|| anchors.iter().sum::<f64>() / anchors.len() as f64);
    let quoted = 1.0 / (4.0 * PI);
    Ok(NormalizationFit {
        c: fit.slope,
        stderr: fit.stderr,
        ci: fit.ci,
        quoted_constant: quoted,
        ratio_to_quoted: fit.slope / quoted,
        points,
        spread,
        shape_ok: spread < spread_tolerance,
        anchor_constant,
        anchor_within_ci: anchor_constant.map(|a| fit.ci.0 <= a && a <= fit.ci.1),
    })
}

/// Coefficient laws compared by the ensemble-equivalence test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ensemble {
    /// Independent standard complex coefficients.
    Complex,
    /// Imaginary parts set to 0, real parts multiplied by √2.
    Conditional,
    /// Standard real Gaussian on Re H_N^m: u = Σ x_k √2 Re e_k + y_k √2 Im e_k,
    /// i.e. ψ = √2 Σ (x_k − i y_k) e_k.
    RealGaussian,
    /// `Conditional` without the √2.
    ConditionalUnscaled,
}

impl Ensemble {
    fn salt(self) -> u64 {
        match self {
            Ensemble::Complex => 0,
            Ensemble::Conditional => CONDITIONAL_SALT,
            Ensemble::RealGaussian => REAL_SALT,
            Ensemble::ConditionalUnscaled => UNSCALED_SALT,
        }
    }

    pub fn coefficients(self, dim: usize, seed: u64, stream: u64) -> Vec<C> {
        let mut rng = sample_rng(seed ^ self.salt(), stream);
        (0..dim)
            .map(|_| match self {
                Ensemble::Complex => standard_complex(&mut rng),
                Ensemble::Conditional => C::new(standard_complex(&mut rng).re * std::f64::consts::SQRT_2, 0.0),
                Ensemble::ConditionalUnscaled => C::new(standard_complex(&mut rng).re, 0.0),
                Ensemble::RealGaussian => {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    let y: f64 = StandardNormal.sample(&mut rng);
                    C::new(x, -y) * std::f64::consts::SQRT_2
                }
            })
            .collect()
    }
}

/// Zero counts of `samples` draws from `ensemble`; failures are returned separately.
pub fn ensemble_zero_counts(
    basis: &Arc<HarmonicSpaceBasis>,
    ensemble: Ensemble,
    samples: usize,
    seed: u64,
    refinement: &ZeroRefinement,
) -> (Vec<Option<usize>>, usize) {
    let counts: Vec<Option<usize>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let c = ensemble.coefficients(basis.dim(), seed, i);
            let h = RandomHarmonic::from_coefficients(basis.clone(), c).ok()?;
            count_zeros(&h, refinement).ok().map(|z| z.total_count)
        })
        .collect();
    let failures = counts.iter().filter(|c| c.is_none()).count();
    (counts, failures)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleComparison {
    pub ensemble: Ensemble,
    pub mean_zero_count: Option<MeanStderr>,
    pub failures: usize,
    /// KS test against the complex ensemble.
    pub ks: KsResult,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub schema_version: u32,
    pub version: String,
    pub config_hash: String,
    pub n: u32,
    pub m: i32,
    pub samples: usize,
    pub seed: u64,
    pub alpha: f64,
    pub complex_zero_count: Option<MeanStderr>,
    pub complex_failures: usize,
    /// Complex ensemble against an identical rerun of itself.
    pub self_check: KsResult,
    pub comparisons: Vec<EnsembleComparison>,
    #[serde(skip)]
    pub counts: BTreeMap<String, Vec<Option<usize>>>,
}

impl EquivalenceReport {
    pub fn comparison(&self, e: Ensemble) -> Option<&EnsembleComparison> {
        self.comparisons.iter().find(|c| c.ensemble == e)
    }
}

fn as_f64(v: &[Option<usize>]) -> Vec<f64> {
    v.iter().flatten().map(|&k| k as f64).collect()
}

/// Two-sample KS comparisons of zero-count distributions between the complex ensemble and
/// each alternative coefficient law.
pub fn ensemble_equivalence_test(cfg: &Config) -> Result<EquivalenceReport> {
    let (n, m, samples, seed) = (cfg.n, cfg.m, cfg.samples, cfg.seed);
    let refinement = &cfg.refinement();
    let basis = basis_for(n, m, cfg.basis_cache_dir.as_deref())?;
    let (complex, complex_failures) = ensemble_zero_counts(&basis, Ensemble::Complex, samples, seed, refinement);
    let (again, _) = ensemble_zero_counts(&basis, Ensemble::Complex, samples, seed, refinement);
    let reference = as_f64(&complex);
    let self_check = ks_two_sample(&reference, &as_f64(&again))?;
    let mut counts = BTreeMap::new();
    let mut comparisons = Vec::new();
    for e in [
        Ensemble::Conditional,
        Ensemble::RealGaussian,
        Ensemble::ConditionalUnscaled,
    ] {
        let (c, failures) = ensemble_zero_counts(&basis, e, samples, seed, refinement);
        let xs = as_f64(&c);
        comparisons.push(EnsembleComparison {
            ensemble: e,
            mean_zero_count: mean_stderr(&xs),
            failures,
            ks: ks_two_sample(&reference, &xs)?,
        });
        counts.insert(format!("{e:?}"), c);
    }
    counts.insert("Complex".into(), complex);
    Ok(EquivalenceReport {
        schema_version: SCHEMA_VERSION,
        version: VERSION_TAG.to_string(),
        config_hash: cfg.hash(),
        n,
        m,
        samples,
        seed,
        alpha: cfg.ks_alpha,
        complex_zero_count: mean_stderr(&reference),
        complex_failures,
        self_check,
        comparisons,
        counts,
    })
}

/// Moments and covariance constants of H_N^m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub n: u32,
    pub m: i32,
    pub dim: usize,
    pub d: f64,
    pub moment0: f64,
    pub moment0_quadrature: f64,
    pub moment1: f64,
    pub moment1_quadrature: f64,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub eta: Option<f64>,
}

/// One row per 0 ≤ m ≤ N ≤ `n_max`.
pub fn kernels_table(n_max: u32) -> Result<Vec<KernelRow>> {
    let mut rows = Vec::new();
    for n in 0..=n_max {
        for m in 0..=n as i32 {
            let cov = covariance_closed_form(n, m).ok();
            rows.push(KernelRow {
                n,
                m,
                dim: dimension(n, m),
                d: d_value(n, m),
                moment0: chebyshev_moment0(n, m)?,
                moment0_quadrature: moment0_quadrature(n, m),
                moment1: chebyshev_moment1(n, m)?,
                moment1_quadrature: moment1_quadrature(n, m),
                mu: cov.map(|c| c.mu),
                nu: cov.map(|c| c.nu),
                eta: cov.map(|c| c.eta),
            });
        }
    }
    Ok(rows)
}

/// Closed-form Kac–Rice quantities of nonempty H_N^m with m ≠ 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KacRiceRow {
    pub n: u32,
    pub m: i32,
    pub d: f64,
    pub eta: f64,
    pub scalar_integral: f64,
    pub expected_zero_count: f64,
    pub expected_genus: f64,
    pub rederived_zero_count: f64,
    /// Exact expected count as `a/π + b`.
    pub exact_zero_count: String,
}

pub fn kacrice_table(n_max: u32) -> Result<Vec<KacRiceRow>> {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        for m in (1..=n as i32).filter(|&m| is_nonempty(n, m)) {
            let p = predict(n, m)?;
            let exact = expected_zero_count_exact(n, m);
            rows.push(KacRiceRow {
                n,
                m,
                d: p.d,
                eta: p.eta,
                scalar_integral: scalar_integral(p.eta)?,
                expected_zero_count: p.expected_zero_count,
                expected_genus: p.expected_genus,
                rederived_zero_count: p.rederived_zero_count,
                exact_zero_count: format!("{}/pi + {}", exact.inv_pi, exact.constant),
            });
        }
    }
    Ok(rows)
}

/// Serializes records as CSV with a header row.
pub fn records_to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, records_to_csv(rows)?)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
