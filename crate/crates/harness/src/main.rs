use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gbhe_harness::config::parse_mesh_list;
use gbhe_harness::predator::run_predator;
use gbhe_harness::run::{convergence, output_path, solve, write_convergence_csv, write_final_field};
use gbhe_harness::{HarnessError, PredatorConfig, RunConfig, SpaceScheme};

#[derive(Parser)]
#[command(name = "gbhe", about = "Burgers-Huxley solver with memory: single runs, convergence ladders, prey-predator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// One run; writes the final field and prints error norms.
    Solve(Common),
    /// Refinement ladder with N = mesh_n; writes a CSV of errors and rates.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Comma-separated mesh sizes
        #[arg(long, default_value = "8,16,32,64")]
        meshes: String,
    },
    /// Prey-predator run; writes grid snapshots and a time-series CSV.
    Predator(Common),
}

fn load_run(path: Option<&Path>) -> Result<RunConfig, HarnessError> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Solve(c) => {
            let cfg = load_run(c.config.as_deref())?;
            let out = solve(&cfg)?;
            let path = output_path(&cfg, c.out.as_deref(), "solution.csv");
            if let Some(d) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(d)?;
            }
            write_final_field(&out, BufWriter::new(File::create(&path)?))?;
            if !c.quiet {
                let e = &out.row.errors;
                println!("mesh {} dof {} newton {}", out.row.mesh_n, out.row.dof, out.row.newton_iterations);
                println!("l2 {:.6e} h1 {:.6e} h1semi {:.6e}", e.l2_final, e.h1_final, e.h1_semi_final);
                if let Some(dg) = e.dg_final {
                    println!("dg {dg:.6e}");
                }
                println!("wrote {}", path.display());
            }
        }
        Command::Convergence { common: c, meshes } => {
            let cfg = load_run(c.config.as_deref())?;
            let meshes = parse_mesh_list(&meshes)?;
            let report = convergence(&cfg, &meshes)?;
            let path = output_path(&cfg, c.out.as_deref(), "convergence.csv");
            if let Some(d) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(d)?;
            }
            let dg = cfg.space_scheme == SpaceScheme::Dg;
            write_convergence_csv(&report, dg, BufWriter::new(File::create(&path)?))?;
            if !c.quiet {
                write_convergence_csv(&report, dg, std::io::stdout())?;
            }
        }
        Command::Predator(c) => {
            let cfg = match c.config.as_deref() {
                Some(p) => PredatorConfig::load(p)?,
                None => PredatorConfig::default(),
            };
            let dir = c.out.unwrap_or_else(|| PathBuf::from("predator_out"));
            let out = run_predator(&cfg, Some(&dir))?;
            if !c.quiet {
                let last = out.series.last().expect("series has the initial row");
                println!(
                    "t {:.3}: u in [{:.4}, {:.4}] mass {:.4}; v in [{:.4}, {:.4}] mass {:.4}",
                    last.t, last.min_u, last.max_u, last.int_u, last.min_v, last.max_v, last.int_v
                );
                println!("wrote {} snapshots to {}", out.snapshots.len(), dir.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
