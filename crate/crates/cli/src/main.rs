use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pointbin::secondstats::{
    csr_envelope, default_g_bandwidth, default_k2_bandwidth, default_r_grid, evaluate_statistic,
    pair_correlation, SummaryStatistic,
};
use pointbin::RandomStream;
use pointbin_cli::census::{read_census_csv, write_pattern_csv, SINGLE_PATTERN_ID};
use pointbin_cli::config::{EnvelopeStatistic, GeneratorSpec, RunConfig};
use pointbin_cli::output::envelope_table;
use pointbin_cli::study::{compare_binning, comparison_table, Density};
use pointbin_cli::{run_pipeline, CliError, CliResult};

#[derive(Parser)]
#[command(name = "pointbin", version, about = "Optimal-binning analysis of spatial point patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a point pattern and write it as `x,y` CSV.
    Generate {
        #[command(flatten)]
        spec: GeneratorSpec,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the analyses listed in a config file.
    Analyze {
        #[arg(long)]
        config: PathBuf,
    },
    /// Knuth versus Stone bin counts on repeated one-dimensional samples.
    CompareBinning {
        #[arg(long, value_enum, default_value_t = Density::Gaussian)]
        density: Density,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        runs: usize,
        #[arg(long, default_value_t = 100)]
        cap: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// CSR envelope of one summary statistic for one pattern.
    Envelope {
        #[arg(long)]
        input: PathBuf,
        /// Species to analyse; required when the file holds several.
        #[arg(long)]
        species: Option<String>,
        #[arg(long, value_enum, default_value_t = EnvelopeStatistic::L)]
        statistic: EnvelopeStatistic,
        #[arg(long, default_value_t = 199)]
        n_sims: usize,
        #[arg(long, default_value_t = 0.99)]
        level: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn emit(output: Option<&PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn run(command: Command) -> CliResult<i32> {
    match command {
        Command::Generate { spec, seed, output } => {
            let pattern = spec.generate(&mut RandomStream::new(seed))?;
            let mut buf = Vec::new();
            write_pattern_csv(&mut buf, &pattern)?;
            emit(output.as_ref(), &buf)?;
            Ok(0)
        }
        Command::Analyze { config } => {
            let config = RunConfig::from_path(&config)?;
            let report = run_pipeline(&config)?;
            for s in report.statuses.iter().filter(|s| s.status == "error") {
                eprintln!("{}: {}", s.species, s.error.as_deref().unwrap_or("failed"));
            }
            eprintln!("wrote {}", report.manifest.display());
            Ok(report.exit_code())
        }
        Command::CompareBinning { density, samples, runs, cap, seed, output } => {
            let rows = compare_binning(density, samples, runs, cap, seed)?;
            emit(output.as_ref(), &comparison_table(&rows)?)?;
            let wins = rows.iter().filter(|r| r.l2_knuth <= r.l2_stone).count();
            eprintln!("Knuth L2 <= Stone L2 in {wins}/{} runs", rows.len());
            Ok(0)
        }
        Command::Envelope { input, species, statistic, n_sims, level, seed, output } => {
            let table = read_census_csv(&input, None)?;
            let mut patterns = table.patterns()?;
            let id = match species {
                Some(id) => id,
                None if patterns.len() == 1 => patterns.keys().next().cloned().unwrap_or(SINGLE_PATTERN_ID.into()),
                None => return Err(CliError::config("file holds several species; pass --species")),
            };
            let pattern = patterns
                .remove(&id)
                .ok_or_else(|| CliError::config(format!("species {id:?} not found")))?;
            let r = default_r_grid(&pattern);
            let g_bw = default_g_bandwidth(&pattern);
            let summary = match statistic {
                EnvelopeStatistic::K => SummaryStatistic::K,
                EnvelopeStatistic::L => SummaryStatistic::L,
                EnvelopeStatistic::G => SummaryStatistic::G { bandwidth: g_bw },
                EnvelopeStatistic::K2 => {
                    let g = pair_correlation(&pattern, &r, g_bw)?;
                    SummaryStatistic::K2 { g_bandwidth: g_bw, k2_bandwidth: default_k2_bandwidth(&g) }
                }
            };
            let band = csr_envelope(&pattern, &summary, &r, n_sims, level, &RandomStream::new(seed))?;
            let observed = evaluate_statistic(&pattern, &summary, &r)?;
            emit(output.as_ref(), &envelope_table(&observed, &band)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                CliError::Analysis(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
