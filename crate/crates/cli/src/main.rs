//! `qdp`: build, transpile, estimate and check quantum dot-plot circuits for
//! a pair of sequences.
//!
//! Exit codes: 0 success, 1 failed validation, 2 bad configuration or
//! input, 3 internal error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdp_core::pipeline::{self, AlphabetChoice, PipelineError, RunConfig};
use qdp_core::McxMode;

#[derive(Parser)]
#[command(name = "qdp", version, about = "Quantum dot-plot circuits for pairwise sequence comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NEQR encoding of the reference alone.
    Encode(Common),
    /// Full QPR circuit with MCX gates decomposed.
    Build(Common),
    /// Lower to the backend's native gates and route.
    Transpile(Common),
    /// Resource report (JSON and CSV).
    Estimate(Common),
    /// Sample the QPR circuit on the statevector engine.
    Simulate(Common),
    /// Exhaustive and sampled checks against the classical dot plot.
    Validate(Common),
    /// Brute-force against minimized encodings.
    CompareModes(Common),
    /// Everything: report, QASM and, with --validate, validation reports.
    Run(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Chain,
    SingleAncilla,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphabetArg {
    Dna,
    Auto,
}

#[derive(Args)]
struct Common {
    /// Reference FASTA file (first record is used).
    #[arg(long)]
    reference: PathBuf,
    /// Query FASTA file; omitted means the reference against itself.
    #[arg(long)]
    query: Option<PathBuf>,
    /// Backend preset (allsim, superconducting-53, ion-40) or JSON path.
    #[arg(long, default_value = "allsim")]
    backend: String,
    #[arg(long, value_enum, default_value = "chain")]
    mcx_mode: ModeArg,
    /// Encode with one MCX per nonzero row instead of the minimized cover.
    #[arg(long)]
    no_minimize: bool,
    #[arg(long, default_value_t = pipeline::DEFAULT_SHOTS)]
    shots: u64,
    #[arg(long, default_value_t = pipeline::DEFAULT_SEED)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "qdp-out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "dna")]
    alphabet: AlphabetArg,
    /// Run both validation methods (used by `run`).
    #[arg(long)]
    validate: bool,
    /// Dataset label for the CSV row.
    #[arg(long)]
    dataset: Option<String>,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            reference: self.reference.clone(),
            query: self.query.clone(),
            alphabet: match self.alphabet {
                AlphabetArg::Dna => AlphabetChoice::Dna,
                AlphabetArg::Auto => AlphabetChoice::Auto,
            },
            mcx_mode: match self.mcx_mode {
                ModeArg::Chain => McxMode::CcnotChain,
                ModeArg::SingleAncilla => McxMode::SingleAncilla,
            },
            backend: self.backend.clone(),
            use_minimizer: !self.no_minimize,
            out_dir: self.out.clone(),
            seed: self.seed,
            shots: self.shots,
            validate: self.validate,
            dataset: self.dataset.clone(),
        }
    }
}

fn print_validations(out: &pipeline::RunOutcome) {
    for v in &out.validations {
        let status = if v.passed { "PASS" } else { "FAIL" };
        println!("{} {status}: {} checks, {} failures", v.method, v.checks, v.failures);
        if let Some(chi) = &v.chi_square {
            println!("  chi-square {:.3} (dof {}), p = {:.4}", chi.statistic, chi.degrees_of_freedom, chi.p_value);
        }
        for ce in &v.counterexamples {
            println!("  x={} y={} expected {} got {:?}", ce.x, ce.y, ce.expected, ce.got);
        }
    }
}

fn execute(command: Command) -> Result<i32, PipelineError> {
    match command {
        Command::Encode(c) => {
            let s = pipeline::run_encode(&c.config())?;
            println!("neqr: width {} depth {} gates {}", s.width, s.depth, s.gate_counts.values().sum::<usize>());
        }
        Command::Build(c) => {
            let s = pipeline::run_build(&c.config())?;
            println!("qpr: width {} depth {}", s.width, s.depth);
            for (stage, d) in &s.depth_per_stage {
                println!("  {stage}: depth {d}");
            }
        }
        Command::Transpile(c) => {
            let s = pipeline::run_transpile(&c.config())?;
            println!(
                "{}: width {} depth {} swaps {}",
                s.backend, s.circuit.width, s.circuit.depth, s.swaps_inserted
            );
        }
        Command::Estimate(c) => {
            let r = pipeline::run_estimate(&c.config())?;
            println!("{}", qdp_core::transpile::CSV_HEADER);
            println!("{}", r.resources.csv_row(&r.input.dataset));
        }
        Command::Simulate(c) => {
            let s = pipeline::run_simulate(&c.config())?;
            println!("shots {} seed {}: v=1 in {:.4} of shots", s.shots, s.seed, s.v_one_fraction);
        }
        Command::Validate(c) => {
            let out = pipeline::run_validate(&c.config())?;
            print_validations(&out);
            return Ok(out.exit_code());
        }
        Command::CompareModes(c) => {
            let rows = pipeline::compare_modes(&c.config())?;
            println!("sequence,length,brute_mcx,minimized_mcx,brute_ccnot,minimized_ccnot,brute_depth,minimized_depth,compression");
            for r in rows {
                println!(
                    "{},{},{},{},{},{},{},{},{}",
                    r.sequence,
                    r.length,
                    r.brute_mcx,
                    r.minimized_mcx,
                    r.brute_chain_ccnot,
                    r.minimized_chain_ccnot,
                    r.brute_depth,
                    r.minimized_depth,
                    r.compression
                );
            }
        }
        Command::Run(c) => {
            let out = pipeline::run_pipeline(&c.config())?;
            let r = &out.report;
            println!(
                "{}: width {} (bounds {}..={}) depth {}",
                r.input.dataset, r.resources.width, r.width_bounds.0, r.width_bounds.1, r.resources.total_depth
            );
            print_validations(&out);
            return Ok(out.exit_code());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
