//! The `tl` command: check, run, analyze, and difftest over tensor
//! programs. Diagnostics go to stderr, data to stdout or the requested
//! output file. Exit codes: 0 success, 1 parse or type error, 2 I/O or
//! initial-store error, 3 differential mismatch.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tl_core::analysis::{analyze, dead_code_eliminate};
use tl_core::eval::{run, RunError};
use tl_core::index::VectorLength;
use tl_core::padded::run_padded;
use tl_core::store::InitSpec;
use tl_core::storefile::{dump_store, parse_init_spec, DumpOptions};
use tl_core::syntax::{parse_program, pretty_print, Program, Qualifier, SyntaxError};
use tl_core::typecheck::{check_program, StaticContext, TypeError};
use tl_harness::{check_simulation, GenConfig, Mutation};

#[derive(Parser)]
#[command(name = "tl", about = "Tensor program checker, interpreter, and test driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and typecheck a program.
    Check {
        /// Program file.
        program: PathBuf,
    },
    /// Run a program and dump the final store.
    Run {
        /// Program file.
        program: PathBuf,
        /// Initial values, in store file format.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Run on padded storage with this vector length.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        pad: Option<u64>,
        /// Append each tensor's padding cells to its block.
        #[arg(long, requires = "pad")]
        dump_padding: bool,
        /// Dump only output-qualified variables.
        #[arg(long)]
        only_output: bool,
        /// Write the dump here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report possibly-uninitialized uses and dead statements.
    Analyze {
        /// Program file.
        program: PathBuf,
        /// Also write the program with dead statements removed.
        #[arg(long, requires = "output")]
        dce: bool,
        /// Where to write the transformed program.
        #[arg(short, long, requires = "dce")]
        output: Option<PathBuf>,
    },
    /// Differential testing over generated programs.
    Difftest {
        /// How many consecutive seeds to test.
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        /// Padding widths for the padded runs.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 4, 8],
              value_parser = clap::value_parser!(u64).range(1..))]
        pad: Vec<u64>,
        /// Inject a deliberate fault to prove mismatches are caught.
        #[arg(long, value_enum)]
        mutate: Option<MutateArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MutateArg {
    /// Leave padding cells undefined instead of zero-filling them.
    SkipZeroFill,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { program } => cmd_check(&program),
        Command::Run { program, init, pad, dump_padding, only_output, output } => {
            cmd_run(&program, init.as_deref(), pad, dump_padding, only_output, output.as_deref())
        }
        Command::Analyze { program, dce, output } => cmd_analyze(&program, dce, output.as_deref()),
        Command::Difftest { seeds, base_seed, pad, mutate } => {
            cmd_difftest(seeds, base_seed, &pad, mutate)
        }
    };
    ExitCode::from(code)
}

/// Writes data to stdout. A false return means the reader went away (a
/// closed pipe); callers stop emitting and treat the run as delivered.
fn emit(data: &str) -> bool {
    io::stdout().write_all(data.as_bytes()).is_ok()
}

fn read_file(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("ERROR io: {}: {e}", path.display());
        2
    })
}

fn write_output(path: Option<&Path>, data: &str) -> Result<(), u8> {
    match path {
        Some(path) => fs::write(path, data).map_err(|e| {
            eprintln!("ERROR io: {}: {e}", path.display());
            2
        }),
        None => {
            emit(data);
            Ok(())
        }
    }
}

fn report_syntax(e: &SyntaxError) -> u8 {
    eprintln!("ERROR {} at {}: {}", e.kind_str(), e.pos, e.message);
    1
}

fn report_type(e: &TypeError) -> u8 {
    eprintln!("ERROR {e}");
    1
}

fn load_program(path: &Path) -> Result<(Program, StaticContext), u8> {
    let text = read_file(path)?;
    let program = parse_program(&text).map_err(|e| report_syntax(&e))?;
    let ctx = check_program(&program).map_err(|e| report_type(&e))?;
    Ok((program, ctx))
}

fn cmd_check(path: &Path) -> u8 {
    match load_program(path) {
        Ok(_) => {
            emit("OK\n");
            0
        }
        Err(code) => code,
    }
}

fn cmd_run(
    path: &Path,
    init_path: Option<&Path>,
    pad: Option<u64>,
    dump_padding: bool,
    only_output: bool,
    out_path: Option<&Path>,
) -> u8 {
    let (program, ctx) = match load_program(path) {
        Ok(loaded) => loaded,
        Err(code) => return code,
    };
    let init = match init_path {
        None => InitSpec::empty(),
        Some(p) => {
            let text = match read_file(p) {
                Ok(t) => t,
                Err(code) => return code,
            };
            match parse_init_spec(&text) {
                Ok(spec) => spec,
                Err(e) => {
                    eprintln!("ERROR init: {}: {e}", p.display());
                    return 2;
                }
            }
        }
    };
    if only_output && ctx.iter().all(|(_, b)| b.qualifier != Qualifier::Output) {
        eprintln!("ERROR usage: --only-output, but the program declares no outputs");
        return 2;
    }
    let result = match pad {
        None => run(&program, &init),
        Some(m) => {
            let m = VectorLength::new(m as usize).expect("argument range starts at 1");
            run_padded(&program, &init, m)
        }
    };
    let store = match result {
        Ok(store) => store,
        Err(RunError::Type(e)) => return report_type(&e),
        Err(RunError::Init(e)) => {
            eprintln!("ERROR init: {e}");
            return 2;
        }
        Err(RunError::Access(e)) => {
            eprintln!("ERROR internal: {e}");
            return 2;
        }
    };
    let dump = dump_store(&store, &ctx, DumpOptions { only_output, dump_padding });
    match write_output(out_path, &dump) {
        Ok(()) => 0,
        Err(code) => code,
    }
}

fn cmd_analyze(path: &Path, dce: bool, out_path: Option<&Path>) -> u8 {
    let (program, _) = match load_program(path) {
        Ok(loaded) => loaded,
        Err(code) => return code,
    };
    let report = analyze(&program);
    let mut lines = String::new();
    for finding in &report.uninitialized {
        lines.push_str(&format!("WARN uninit {} {}\n", finding.statement + 1, finding.identifier));
    }
    for k in &report.dead {
        lines.push_str(&format!("INFO dead {}\n", k + 1));
    }
    emit(&lines);
    if dce {
        let slim = dead_code_eliminate(&program);
        if let Err(code) = write_output(out_path, &pretty_print(&slim)) {
            return code;
        }
    }
    0
}

fn cmd_difftest(seeds: u64, base_seed: u64, pads: &[u64], mutate: Option<MutateArg>) -> u8 {
    let cfg = GenConfig::with_seed(base_seed);
    let pads: Vec<usize> = pads.iter().map(|&p| p as usize).collect();
    let mutation = match mutate {
        None => Mutation::None,
        Some(MutateArg::SkipZeroFill) => Mutation::SkipZeroFill,
    };
    let report = check_simulation(&cfg, seeds, &pads, mutation);
    for m in &report.mismatches {
        let pad = m.pad.map_or_else(|| "-".to_string(), |p| p.to_string());
        let index: Vec<String> = m.index.iter().map(|c| c.to_string()).collect();
        let mut record = format!(
            "MISMATCH seed={} pad={} id={} index=[{}] got={} want={}\nREPRO\n",
            m.seed,
            pad,
            m.id,
            index.join(" "),
            m.got,
            m.want
        );
        record.push_str(&m.render_repro());
        record.push_str("END\n");
        if !emit(&record) {
            break;
        }
    }
    eprintln!(
        "ran {} programs: {} mismatches, {} traps",
        report.programs_run,
        report.mismatches.len(),
        report.traps
    );
    if report.ok() {
        0
    } else {
        3
    }
}
