use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use limla::bench::{bench, fit_scaling, Engine, Generator, CSV_HEADER};
use limla::fuzz::{fuzz, write_reproducer, FuzzConfig, FuzzMode};
use limla::linear::Fault;
use limla::trace::write_jsonl;
use limla::{
    parse_machine, run_linear, run_naive, serialize_machine, validate_automaton, zoo, Automaton,
    LinearOptions, RunError, RunOptions,
};

const EXIT_REJECT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

const SHOWN_DIVERGENCES: usize = 20;
/// Reproducer bundles written per fuzz run; the full list goes to `report.txt`.
const MAX_BUNDLES: usize = 10;

#[derive(Parser)]
#[command(name = "limla", version, about = "Run and test d-limited automata")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a machine file.
    Check { file: PathBuf },
    /// Run a machine on one word.
    Run(RunArgs),
    /// Measure step counts over a family of inputs and write CSV.
    Bench(BenchArgs),
    /// Compare both engines on random machines.
    Fuzz(FuzzArgs),
    /// Print a built-in machine in canonical form.
    Zoo {
        #[arg(value_parser = zoo::NAMES)]
        name: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Naive,
    Linear,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("word").required(true).args(["input", "input_tokens"]))]
struct RunArgs {
    file: PathBuf,
    /// Word, one character per symbol or comma-separated tokens.
    #[arg(long, allow_hyphen_values = true)]
    input: Option<String>,
    /// Comma-separated tokens.
    #[arg(long)]
    input_tokens: Option<String>,
    #[arg(long, value_enum, default_value = "linear")]
    engine: EngineArg,
    /// Write the step trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Check every new map against a direct walk (linear engine).
    #[arg(long)]
    shadow: bool,
    #[arg(long)]
    max_steps: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchEngine {
    Both,
    Naive,
    Linear,
}

#[derive(Args)]
struct BenchArgs {
    file: PathBuf,
    /// anbn, unary or random:SEED
    #[arg(long = "gen", value_parser = Generator::parse)]
    generator: Generator,
    /// Comma-separated input lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    lengths: Vec<usize>,
    #[arg(long, value_enum, default_value = "both")]
    engine: BenchEngine,
    /// CSV output path; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ranked,
    Counted,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    None,
    SkipRightMerge,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    states: u64,
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[arg(long, value_enum, default_value = "ranked")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    machines: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    maxlen: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=26))]
    alphabet_size: u64,
    /// Directory for reproducer bundles.
    #[arg(long, default_value = "fuzz-repro")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "none", hide = true)]
    fault: FaultArg,
}

/// Exit with status 2 and a message.
struct Fail(String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

fn load(path: &Path) -> Result<Automaton, Fail> {
    let text = fs::read_to_string(path).map_err(|e| Fail(format!("{}: {e}", path.display())))?;
    let aut = parse_machine(&text).map_err(|e| Fail(format!("{}: {e}", path.display())))?;
    let report = validate_automaton(&aut);
    if !report.is_ok() {
        return Err(Fail(format!(
            "{}: invalid machine\n{report}",
            path.display()
        )));
    }
    Ok(aut)
}

fn cmd_check(file: &Path) -> Result<u8, Fail> {
    let text = fs::read_to_string(file).map_err(|e| Fail(format!("{}: {e}", file.display())))?;
    let aut = parse_machine(&text).map_err(|e| Fail(format!("{}: {e}", file.display())))?;
    let report = validate_automaton(&aut);
    print!("{report}");
    Ok(if report.is_ok() { 0 } else { EXIT_USAGE })
}

fn cmd_run(args: &RunArgs) -> Result<u8, Fail> {
    let aut = load(&args.file)?;
    let word = match (&args.input, &args.input_tokens) {
        (Some(w), _) => aut.parse_word(w)?,
        (None, Some(t)) => aut.parse_tokens(t)?,
        (None, None) => unreachable!("clap requires one of the word arguments"),
    };
    let trace = args.trace.is_some();
    let (result, linear) = match args.engine {
        EngineArg::Naive => (
            run_naive(
                &aut,
                &word,
                RunOptions {
                    trace,
                    max_steps: args.max_steps,
                },
            ),
            false,
        ),
        EngineArg::Linear => {
            let opts = LinearOptions {
                trace,
                shadow: args.shadow,
                max_steps: args.max_steps,
                ..Default::default()
            };
            (run_linear(&aut, &word, opts), true)
        }
    };
    let out = match result {
        Ok(out) => out,
        Err(RunError::BudgetExceeded(steps)) => {
            println!("budget exceeded steps={steps}");
            return Ok(EXIT_BUDGET);
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &args.trace {
        let mut w = BufWriter::new(fs::File::create(path)?);
        write_jsonl(&aut, &out, linear, &mut w)?;
        w.flush()?;
    }
    if out.verdict.is_accept() {
        println!("accept steps={}", out.steps);
        Ok(0)
    } else {
        println!("reject steps={}", out.steps);
        Ok(EXIT_REJECT)
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<u8, Fail> {
    let aut = load(&args.file)?;
    let machine = args
        .file
        .file_stem()
        .map_or_else(|| "machine".into(), |s| s.to_string_lossy().into_owned());
    let engines: &[Engine] = match args.engine {
        BenchEngine::Both => &[Engine::Naive, Engine::Linear],
        BenchEngine::Naive => &[Engine::Naive],
        BenchEngine::Linear => &[Engine::Linear],
    };
    let rows = bench(&machine, &aut, args.generator, &args.lengths, engines).map_err(Fail)?;
    let mut csv = format!("{CSV_HEADER}\n");
    for r in &rows {
        csv.push_str(&r.csv());
        csv.push('\n');
    }
    match &args.out {
        Some(path) => fs::write(path, csv)?,
        None => io::stdout().write_all(csv.as_bytes())?,
    }
    for &engine in engines {
        let mine: Vec<_> = rows
            .iter()
            .filter(|r| r.engine == engine)
            .cloned()
            .collect();
        match fit_scaling(&mine) {
            Ok(fit) => eprintln!(
                "{engine}: slope {:.3} residual {:.4} over {} points",
                fit.slope, fit.residual, fit.points
            ),
            Err(e) => eprintln!("{engine}: no fit ({e})"),
        }
    }
    Ok(0)
}

fn cmd_fuzz(args: &FuzzArgs) -> Result<u8, Fail> {
    let cfg = FuzzConfig {
        states: args.states as usize,
        d: args.d,
        mode: match args.mode {
            ModeArg::Ranked => FuzzMode::Ranked,
            ModeArg::Counted => FuzzMode::Counted,
        },
        seed: args.seed,
        machines: args.machines as usize,
        maxlen: args.maxlen as usize,
        alphabet_size: args.alphabet_size as usize,
        fault: match args.fault {
            FaultArg::None => Fault::None,
            FaultArg::SkipRightMerge => Fault::SkipRightMerge,
        },
        ..FuzzConfig::default()
    };
    let report = fuzz(&cfg);
    let summary = report.summary();
    let mut lines = summary.lines();
    println!("{}", lines.next().unwrap_or_default());
    for line in lines.by_ref().take(SHOWN_DIVERGENCES) {
        println!("{line}");
    }
    if report.divergences.is_empty() {
        return Ok(0);
    }
    if report.divergences.len() > SHOWN_DIVERGENCES {
        println!("... {} more", report.divergences.len() - SHOWN_DIVERGENCES);
    }
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("report.txt"), &summary)?;
    for (i, d) in report.divergences.iter().take(MAX_BUNDLES).enumerate() {
        let dir = write_reproducer(&cfg, d, &args.out, i)?;
        println!("reproducer: {}", dir.display());
    }
    Ok(EXIT_REJECT)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Check { file } => cmd_check(file),
        Cmd::Run(args) => cmd_run(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Fuzz(args) => cmd_fuzz(args),
        Cmd::Zoo { name } => {
            print!(
                "{}",
                serialize_machine(&zoo::by_name(name).expect("validated by clap"))
            );
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Fail(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
