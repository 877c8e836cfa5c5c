//! `elastidg study ...` runs a convergence study and writes CSV and/or
//! markdown tables. A failing level exits with status 2 after writing the
//! levels completed so far and printing one `FAILURE` line on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use elastidg::study::{csv_table, diagnostics_csv, failure_marker, markdown_table, run_study, StudyConfig};
use elastidg::{build_uniform_mesh, SolverKind};

#[derive(Parser)]
#[command(name = "elastidg", version, about = "Mixed LDG linear elasticity with symmetric stress")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the manufactured problem on a sequence of uniform meshes.
    Study(StudyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
    Both,
}

#[derive(clap::Args)]
struct StudyArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    dim: u8,
    /// Displacement degree; the stress degree is k + 1.
    #[arg(long)]
    k: usize,
    /// Cells per side, e.g. 4,8,16,32.
    #[arg(long, value_delimiter = ',', required = true)]
    levels: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value = "direct", value_parser = parse_solver)]
    solver: SolverKind,
    #[arg(long, value_enum, default_value = "both")]
    format: Format,
    /// Output path without extension; `.csv` / `.md` are appended.
    #[arg(long, default_value = "study")]
    out: PathBuf,
    /// none, infsup, kell, lifting or all (comma-separated).
    #[arg(long, default_value = "none")]
    diagnostics: String,
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Record wall-clock solve times (otherwise 0, keeping output reproducible).
    #[arg(long)]
    timings: bool,
    /// Iteration cap for the Schur-CG solver and the direct solver's refinement.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Write a vertex/element/facet listing of every level's mesh into this directory.
    #[arg(long)]
    dump_mesh: Option<PathBuf>,
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse().map_err(|e: elastidg::Error| e.to_string())
}

fn with_extension(base: &Path, ext: &str) -> PathBuf {
    let stem = match base.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("md") => base.with_extension(""),
        _ => base.to_path_buf(),
    };
    let mut s = stem.into_os_string();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("ELASTIDG_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("ELASTIDG_THREADS={v:?}"))?;
        if n == 0 {
            bail!("ELASTIDG_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn study(args: StudyArgs) -> anyhow::Result<ExitCode> {
    let mut config = StudyConfig::new(args.dim as usize, args.k, args.levels.clone());
    config.eta = args.eta;
    config.solver = args.solver;
    config.mu = args.mu;
    config.lambda = args.lambda;
    config.diagnostics = args.diagnostics.parse()?;
    config.max_iterations = args.max_iterations;
    config.validate()?;

    if let Some(dir) = &args.dump_mesh {
        fs::create_dir_all(dir)?;
        for &n in &config.levels {
            let mesh = build_uniform_mesh(config.dim, n)?;
            let path = dir.join(format!("mesh_d{}_n{n}.txt", config.dim));
            mesh.write_listing(fs::File::create(&path)?)?;
        }
    }

    let outcome = run_study(&config)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    if matches!(args.format, Format::Csv | Format::Both) {
        fs::write(with_extension(&args.out, "csv"), csv_table(&outcome, args.timings)?)?;
    }
    let md = markdown_table(&config, &outcome, args.timings);
    if matches!(args.format, Format::Md | Format::Both) {
        fs::write(with_extension(&args.out, "md"), &md)?;
    }
    if config.diagnostics.any() {
        fs::write(with_extension(&args.out, "diagnostics.csv"), diagnostics_csv(&outcome)?)?;
    }
    print!("{md}");
    match &outcome.failure {
        None => Ok(ExitCode::SUCCESS),
        Some(f) => {
            eprintln!(
                "FAILURE level={} completed={} error={:?}",
                f.one_over_h,
                outcome.levels.len(),
                failure_marker(f)
            );
            Ok(ExitCode::from(2))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("FAILURE level=none completed=0 error={:?}", e.to_string());
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Study(args) => study(args),
    };
    result.unwrap_or_else(|e| {
        eprintln!("FAILURE level=none completed=0 error={:?}", format!("{e:#}"));
        ExitCode::from(2)
    })
}
