use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rdhei::codec::{DEFAULT_BLOCK_SIZE, DEFAULT_FIXED_LEN, DEFAULT_RUN_BITS};
use rdhei::CodecParams;
use rdhei_bench::{run_corpus, sweep, write_records_csv, BenchError, Outcome, SweepSpec};

#[derive(Parser, Debug)]
#[command(name = "rdhei-bench", about = "Corpus runs and parameter sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full round trip on every PGM in a directory.
    Corpus {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE)]
        t: usize,
        #[arg(long, default_value_t = DEFAULT_FIXED_LEN)]
        lfix: u8,
        #[arg(long, default_value_t = DEFAULT_RUN_BITS)]
        lrun: u8,
        /// Also write per-image rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Mean embedding rate over a grid of parameters.
    Sweep {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [DEFAULT_BLOCK_SIZE])]
        t: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [DEFAULT_FIXED_LEN])]
        lfix: Vec<u8>,
        #[arg(long, value_delimiter = ',', default_values_t = [DEFAULT_RUN_BITS])]
        lrun: Vec<u8>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn execute(cli: Cli) -> Result<bool, BenchError> {
    match cli.command {
        Command::Corpus {
            dir,
            t,
            lfix,
            lrun,
            csv,
        } => {
            let params = CodecParams {
                t,
                l_fix: lfix,
                l_run: lrun,
            };
            let report = run_corpus(&dir, &params)?;
            for r in &report.records {
                match &r.outcome {
                    Outcome::Ok => println!(
                        "{}: c={} bpp={:.4} mse={} ssim={} ms={:.1}",
                        r.name,
                        r.capacity,
                        r.bpp,
                        r.mse,
                        r.ssim,
                        r.elapsed.as_secs_f64() * 1e3
                    ),
                    Outcome::Failed(why) => eprintln!("{}: failed: {why}", r.name),
                    Outcome::NotReversible(why) => eprintln!("{}: NOT REVERSIBLE: {why}", r.name),
                }
            }
            println!("mean_bpp={:.4}", report.mean_bpp());
            println!("images={}", report.records.len());
            println!("failures={}", report.failures());
            if let Some(path) = csv {
                write_records_csv(&path, &report)?;
            }
            Ok(report.reversibility_failures() == 0)
        }
        Command::Sweep {
            dir,
            t,
            lfix,
            lrun,
            out,
            seed,
        } => {
            let spec = SweepSpec {
                corpus: dir,
                t,
                l_fix: lfix,
                l_run: lrun,
                output: out,
                seed,
            };
            for row in sweep(&spec)? {
                println!(
                    "t={} lfix={} lrun={} mean_bpp={:.4} images={} failures={}",
                    row.params.t,
                    row.params.l_fix,
                    row.params.l_run,
                    row.mean_bpp,
                    row.images,
                    row.failures
                );
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("rdhei-bench: {e}");
            ExitCode::from(if matches!(e, BenchError::Usage(_)) {
                2
            } else {
                1
            })
        }
    }
}
