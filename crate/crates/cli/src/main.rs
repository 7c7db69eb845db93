use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use s3nodal_core::experiments::{
    basis_for, ensemble_equivalence_test, fit_normalization, kacrice_table, kernels_table, run_ensemble, with_threads,
    write_csv, write_json, Config, EnsembleParams, VERSION_TAG,
};
use s3nodal_core::harmonic::sample_harmonic_stream;
use s3nodal_core::nodal::refinement_check;
use s3nodal_core::svg::zeros_svg;
use s3nodal_core::zeros::count_zeros;
use s3nodal_core::{Error, Result};

/// Gaussian random equivariant spherical harmonics on S³: zeros, nodal surfaces and ensembles.
#[derive(Parser)]
#[command(name = "s3nodal", version = VERSION_TAG)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand. Precedence: these flags, then S3NODAL_* variables,
/// then the config file, then built-in defaults.
#[derive(Args, Default)]
struct Common {
    /// key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    basis_cache_dir: Option<PathBuf>,
    /// Also write an SVG of the zero configuration where zeros are computed.
    #[arg(long, global = true)]
    emit_svg: bool,
    /// Any config key, as key=value; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

/// Degree pair and per-sample options.
#[derive(Args)]
struct Space {
    #[arg(short, long)]
    n: Option<u32>,
    #[arg(short, long, allow_hyphen_values = true)]
    m: Option<i32>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one harmonic and write its basis coefficients.
    Sample {
        #[command(flatten)]
        space: Space,
        /// Sample index within the seed's stream family.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Locate and certify the zeros of one sample's section on S².
    Zeros {
        #[command(flatten)]
        space: Space,
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[arg(long)]
        max_depth: Option<u32>,
    },
    /// Extract the nodal surface of one sample as an OFF mesh.
    Surface {
        #[command(flatten)]
        space: Space,
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[arg(long)]
        level: Option<u32>,
    },
    /// Chebyshev moments and covariance constants for 0 ≤ m ≤ N ≤ n_max.
    KernelsTable {
        #[arg(long, default_value_t = 12)]
        n_max: u32,
    },
    /// Closed-form expected zero counts and genera for 1 ≤ m ≤ N ≤ n_max.
    KacriceTable {
        #[arg(long, default_value_t = 12)]
        n_max: u32,
    },
    /// Run a seeded ensemble at one (N, m).
    Ensemble {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        samples: Option<usize>,
        /// Extract nodal surfaces at `level` and `level + 1`.
        #[arg(long)]
        mesh: bool,
        /// Skip zero counting.
        #[arg(long)]
        no_zeros: bool,
        #[arg(long)]
        level: Option<u32>,
    },
    /// Fit mean zero count = c·(1 + η²)·D over every m ≠ 0 with N ≤ fit_n_max.
    Fit {
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Compare zero-count distributions of the complex and real coefficient ensembles.
    Equivalence {
        #[command(flatten)]
        space: Space,
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn load_config(common: &Common, extra: &[(&str, Option<String>)]) -> Result<Config> {
    let mut cfg = Config::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    cfg.apply_env(std::env::vars())?;
    let flags = [
        ("seed", common.seed.map(|v| v.to_string())),
        ("threads", common.threads.map(|v| v.to_string())),
        ("out_dir", common.out_dir.as_ref().map(|p| p.display().to_string())),
        (
            "basis_cache_dir",
            common.basis_cache_dir.as_ref().map(|p| p.display().to_string()),
        ),
        ("emit_svg", common.emit_svg.then(|| "true".to_string())),
    ];
    for (k, v) in flags.iter().chain(extra) {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn space_flags(s: &Space) -> Vec<(&'static str, Option<String>)> {
    vec![("n", s.n.map(|v| v.to_string())), ("m", s.m.map(|v| v.to_string()))]
}

fn out_path(cfg: &Config, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

fn stem(cfg: &Config, what: &str) -> String {
    format!("{what}_n{}_m{}_seed{}", cfg.n, cfg.m, cfg.seed)
}

fn print_written(paths: &[&Path]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

#[derive(Serialize)]
struct CoefficientRow {
    k: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct ZeroRow {
    x: f64,
    y: f64,
    z: f64,
    patch: String,
    index: i32,
    newton_residual: f64,
    certified: bool,
    config_hash: String,
    version: String,
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    match &cli.command {
        Command::Sample { space, index } => {
            let cfg = load_config(common, &space_flags(space))?;
            let basis = basis_for(cfg.n, cfg.m, cfg.basis_cache_dir.as_deref())?;
            let h = sample_harmonic_stream(basis, cfg.seed, *index)?;
            let rows: Vec<CoefficientRow> = h
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| CoefficientRow { k, re: c.re, im: c.im })
                .collect();
            let path = out_path(&cfg, &format!("{}_i{index}.csv", stem(&cfg, "coefficients")));
            write_csv(&path, &rows)?;
            println!("dim H_N^m = {}, |c| = {:.6}", rows.len(), h.coeff_norm());
            print_written(&[&path]);
        }
        Command::Zeros {
            space,
            index,
            max_depth,
        } => {
            let mut extra = space_flags(space);
            extra.push(("max_depth", max_depth.map(|v| v.to_string())));
            let cfg = load_config(common, &extra)?;
            let basis = basis_for(cfg.n, cfg.m, cfg.basis_cache_dir.as_deref())?;
            let h = sample_harmonic_stream(basis, cfg.seed, *index)?;
            let zs = with_threads(cfg.threads, || count_zeros(&h, &cfg.refinement()))??;
            let hash = cfg.hash();
            let rows: Vec<ZeroRow> = zs
                .zeros
                .iter()
                .map(|z| ZeroRow {
                    x: z.point.0[0],
                    y: z.point.0[1],
                    z: z.point.0[2],
                    patch: format!("{:?}", z.patch),
                    index: z.index,
                    newton_residual: z.newton_residual,
                    certified: z.certified,
                    config_hash: hash.clone(),
                    version: VERSION_TAG.to_string(),
                })
                .collect();
            let name = format!("{}_i{index}", stem(&cfg, "zeros"));
            let csv = out_path(&cfg, &format!("{name}.csv"));
            write_csv(&csv, &rows)?;
            println!(
                "zeros: {}, index sum: {}, all certified: {}",
                zs.total_count,
                zs.index_sum,
                zs.all_certified()
            );
            print_written(&[&csv]);
            if cfg.emit_svg {
                let svg = out_path(&cfg, &format!("{name}.svg"));
                std::fs::write(
                    &svg,
                    zeros_svg(
                        &zs,
                        &format!("N = {}, m = {}, seed {}, sample {index}", cfg.n, cfg.m, cfg.seed),
                    ),
                )?;
                print_written(&[&svg]);
            }
        }
        Command::Surface { space, index, level } => {
            let mut extra = space_flags(space);
            extra.push(("level", level.map(|v| v.to_string())));
            let cfg = load_config(common, &extra)?;
            let basis = basis_for(cfg.n, cfg.m, cfg.basis_cache_dir.as_deref())?;
            let h = sample_harmonic_stream(basis, cfg.seed, *index)?;
            let (surface, check) = with_threads(cfg.threads, || refinement_check(&h, cfg.level))??;
            let name = format!("{}_i{index}_l{}", stem(&cfg, "surface"), cfg.level);
            let off = out_path(&cfg, &format!("{name}.off"));
            std::fs::create_dir_all(&cfg.out_dir)?;
            surface.write_off(BufWriter::new(File::create(&off)?))?;
            let json = out_path(&cfg, &format!("{name}.json"));
            write_json(
                &json,
                &serde_json::json!({
                    "version": VERSION_TAG,
                    "config_hash": cfg.hash(),
                    "components": surface.components,
                    "refinement": check,
                }),
            )?;
            println!(
                "components: {}, chi: {}, genus: {}, stable under refinement: {}",
                surface.component_count(),
                surface.euler_characteristic(),
                surface.total_genus(),
                check.stable
            );
            print_written(&[&off, &json]);
        }
        Command::KernelsTable { n_max } => {
            let cfg = load_config(common, &[])?;
            let path = out_path(&cfg, &format!("kernels_nmax{n_max}.csv"));
            write_csv(&path, &kernels_table(*n_max)?)?;
            print_written(&[&path]);
        }
        Command::KacriceTable { n_max } => {
            let cfg = load_config(common, &[])?;
            let path = out_path(&cfg, &format!("kacrice_nmax{n_max}.csv"));
            write_csv(&path, &kacrice_table(*n_max)?)?;
            print_written(&[&path]);
        }
        Command::Ensemble {
            space,
            samples,
            mesh,
            no_zeros,
            level,
        } => {
            let mut extra = space_flags(space);
            extra.push(("samples", samples.map(|v| v.to_string())));
            extra.push(("level", level.map(|v| v.to_string())));
            extra.push(("mesh", mesh.then(|| "true".to_string())));
            extra.push(("zeros", no_zeros.then(|| "false".to_string())));
            let cfg = load_config(common, &extra)?;
            let report = with_threads(cfg.threads, || run_ensemble(&EnsembleParams::from_config(&cfg)))??;
            let name = stem(&cfg, "ensemble");
            let csv = out_path(&cfg, &format!("{name}.csv"));
            let json = out_path(&cfg, &format!("{name}.json"));
            write_csv(&csv, &report.records)?;
            write_json(&json, &report)?;
            if let Some(z) = report.zero_count {
                println!("mean zero count: {:.4} ± {:.4} (n = {})", z.mean, z.stderr, z.n);
            }
            if let Some(g) = report.mesh_genus {
                println!(
                    "mean mesh genus: {:.4} ± {:.4} over {} stable runs",
                    g.mean, g.stderr, report.stable_runs
                );
            }
            println!("successes: {}, failures: {}", report.successes, report.failures);
            print_written(&[&csv, &json]);
        }
        Command::Fit { n_max, samples } => {
            let extra = [
                ("fit_n_max", n_max.map(|v| v.to_string())),
                ("samples", samples.map(|v| v.to_string())),
            ];
            let cfg = load_config(common, &extra)?;
            let mut reports = Vec::new();
            for n in 1..=cfg.fit_n_max {
                for m in (1..=n as i32).filter(|&m| (n as i32 - m) % 2 == 0) {
                    let mut point = cfg.clone();
                    point.n = n;
                    point.m = m;
                    point.mesh = false;
                    point.zeros = true;
                    let r = with_threads(cfg.threads, || run_ensemble(&EnsembleParams::from_config(&point)))??;
                    reports.push(r);
                }
            }
            let fit = fit_normalization(&reports, cfg.spread_tolerance)?;
            let name = format!("fit_nmax{}_seed{}", cfg.fit_n_max, cfg.seed);
            let csv = out_path(&cfg, &format!("{name}.csv"));
            let json = out_path(&cfg, &format!("{name}.json"));
            write_csv(&csv, &fit.points)?;
            write_json(
                &json,
                &serde_json::json!({ "version": VERSION_TAG, "config_hash": cfg.hash(), "fit": fit }),
            )?;
            println!(
                "c = {:.5} (95% CI {:.5} to {:.5}), spread {:.4}",
                fit.c, fit.ci.0, fit.ci.1, fit.spread
            );
            println!("c / (1/(4π)) = {:.4}", fit.ratio_to_quoted);
            if let (Some(a), Some(ok)) = (fit.anchor_constant, fit.anchor_within_ci) {
                println!("anchor constant {a:.5}, within CI: {ok}");
            }
            print_written(&[&csv, &json]);
        }
        Command::Equivalence { space, samples } => {
            let mut extra = space_flags(space);
            extra.push(("samples", samples.map(|v| v.to_string())));
            let cfg = load_config(common, &extra)?;
            let report = with_threads(cfg.threads, || ensemble_equivalence_test(&cfg))??;
            let name = stem(&cfg, "equivalence");
            let json = out_path(&cfg, &format!("{name}.json"));
            write_json(&json, &report)?;
            for c in &report.comparisons {
                println!(
                    "{:?}: KS D = {:.4}, p = {:.3e}",
                    c.ensemble, c.ks.statistic, c.ks.p_value
                );
            }
            print_written(&[&json]);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
