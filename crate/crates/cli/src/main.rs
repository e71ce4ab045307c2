use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fieldsaddle_cli::{
    cmd_analyze, cmd_report, cmd_ring, cmd_search, render_analyze, render_ring, CliError,
    ReportOptions, SearchArgs,
};

#[derive(Parser)]
#[command(name = "fieldsaddle", version, about = "Saddle configurations of electrons in a static field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form ring saddles with their exponents, as CSV.
    Ring {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
    /// Multistart Newton search; writes a JSONL store and a manifest.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "FIELDSADDLE_WORKERS", default_value_t = default_workers())]
        workers: usize,
        /// Flat key = value file with search and model parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Full Hessian spectrum of one stored saddle.
    Analyze {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        nu: usize,
    },
    /// Tables and figure coordinate files from a directory of stores.
    Report {
        #[arg(long)]
        stores: PathBuf,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long)]
        tables: bool,
        #[arg(long)]
        figures: bool,
        /// Also emit a gnuplot script for the coordinate files.
        #[arg(long)]
        plot_script: bool,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ring { n_min, n_max } => {
            print!("{}", render_ring(&cmd_ring(n_min, n_max)?));
        }
        Command::Search {
            n,
            starts,
            seed,
            workers,
            params,
            out,
        } => {
            let res = cmd_search(&SearchArgs {
                n,
                starts,
                seed,
                workers,
                params_file: params,
                out_dir: out,
            })?;
            let c = &res.manifest.counts;
            eprintln!(
                "{} saddles ({} converged, {} upfield, {} diverged, {} singular, {} max-iters) in {:.1}s",
                res.records.len(),
                c.converged,
                c.upfield,
                c.diverged,
                c.singular,
                c.max_iters,
                res.manifest.wall_seconds
            );
            print!("{}", fieldsaddle_cli::report::render_enumeration(&res.records));
            eprintln!("store: {}", res.store.display());
        }
        Command::Analyze { store, nu } => {
            print!("{}", render_analyze(&cmd_analyze(&store, nu)?));
        }
        Command::Report {
            stores,
            out,
            n_min,
            n_max,
            tables,
            figures,
            plot_script,
        } => {
            let (tables, figures) = if !tables && !figures { (true, true) } else { (tables, figures) };
            let res = cmd_report(&ReportOptions {
                stores_dir: stores,
                out_dir: out,
                n_min,
                n_max,
                tables,
                figures,
                plot_script,
            })?;
            print!("{}", fieldsaddle_cli::report::render_summary(&res.summary));
            for note in &res.notes {
                eprintln!("{note}");
            }
            eprintln!("wrote {} files", res.files.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
