use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use malias_core::effects::Config;
use malias_core::evaluator::{run_program_with, PipelineError, RunOptions, RunReport};
use malias_core::laws::{run_suite, GenSpec, LawReport, Suite};
use malias_core::programs::fib;
use malias_core::strategies::StrategyId;
use malias_core::syntax::{parse_program, pretty_target_program, Program, SourceType, TargetType, ARG_NAME};
use malias_core::translate::{translate_program, translate_type, Translation};
use malias_core::typecheck::{check_program, SourceContext};
use serde::Serialize;
use serde_json::json;

const OK: u8 = 0;
const RUNTIME: u8 = 1;
const STATIC: u8 = 2;

#[derive(Parser)]
#[command(name = "malias", version, about = "Translate and run lambda programs under pluggable evaluation strategies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check, translate and run a program.
    Run(RunArgs),
    /// Print the translation of a program and the type of its main term.
    Translate(TranslateArgs),
    /// Check the malias laws and related properties on generated cases.
    Laws(LawsArgs),
    /// Run the Fibonacci program on the parallel scheduler for a range of sizes.
    BenchPar(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Args)]
struct RunArgs {
    program: PathBuf,
    /// TOML file of integer keys for `read`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "need", value_parser = parse_strategy)]
    strategy: StrategyId,
    /// Value substituted for the free variable `arg`.
    #[arg(long, allow_negative_numbers = true)]
    arg: Option<i64>,
    #[arg(long, default_value = "cba", value_parser = parse_translation)]
    translation: Translation,
    #[arg(long, default_value_t = malias_core::effects::Fuel::DEFAULT)]
    fuel: u64,
    #[arg(long, value_enum, default_value = "text")]
    output: Output,
}

#[derive(Args)]
struct TranslateArgs {
    program: PathBuf,
    #[arg(long, default_value = "cba", value_parser = parse_translation)]
    translation: Translation,
    #[arg(long, allow_negative_numbers = true)]
    arg: Option<i64>,
    #[arg(long, value_enum, default_value = "text")]
    output: Output,
}

#[derive(Args)]
struct LawsArgs {
    /// Strategy to check; all four when omitted.
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<StrategyId>,
    #[arg(long, default_value_t = 1000)]
    cases: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "malias", value_parser = parse_suite)]
    suite: Suite,
    #[arg(long, default_value_t = 4)]
    max_depth: usize,
    #[arg(long, value_enum, default_value = "text")]
    output: Output,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 5)]
    min_n: i64,
    #[arg(long, default_value_t = 15)]
    max_n: i64,
    #[arg(long, value_enum, default_value = "text")]
    output: Output,
}

fn parse_strategy(s: &str) -> Result<StrategyId, String> {
    s.parse()
}

fn parse_translation(s: &str) -> Result<Translation, String> {
    s.parse()
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e| format!("{e} (expected one of {})", Suite::NAMES.join(", ")))
}

/// A failure before anything ran: bad file, syntax or types.
struct StaticError {
    stage: &'static str,
    message: String,
}

impl StaticError {
    fn new(stage: &'static str, message: impl Display) -> Self {
        StaticError {
            stage,
            message: message.to_string(),
        }
    }

    fn report(&self, path: &Path, output: Output) -> ExitCode {
        match output {
            Output::Json => print_json(&json!({ "error": { "stage": self.stage, "message": self.message } })),
            Output::Text => eprintln!("{}: {} error: {}", path.display(), self.stage, self.message),
        }
        ExitCode::from(STATIC)
    }
}

impl From<PipelineError> for StaticError {
    fn from(e: PipelineError) -> Self {
        let message = match &e {
            PipelineError::Parse(p) => p.to_string(),
            PipelineError::Type(t) => t.to_string(),
        };
        StaticError::new(e.stage(), message)
    }
}

fn load_program(path: &Path, arg: Option<i64>) -> Result<Program, StaticError> {
    let text = fs::read_to_string(path).map_err(|e| StaticError::new("io", e))?;
    let program = parse_program(&text).map_err(|e| StaticError::new("parse", e))?;
    Ok(match arg {
        Some(n) => program.with_arg(n),
        None => program,
    })
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let program = match load_program(&args.program, args.arg) {
        Ok(p) => p,
        Err(e) => return e.report(&args.program, args.output),
    };
    let config = match &args.config {
        Some(path) => match Config::load(path) {
            Ok(c) => c,
            Err(e) => return StaticError::new("config", e).report(path, args.output),
        },
        None => Config::new(),
    };
    let opts = RunOptions {
        fuel: args.fuel,
        translation: args.translation,
    };
    let run = match run_program_with(&program, args.strategy, &config, &opts) {
        Ok(run) => run,
        Err(e) => {
            let mut e = StaticError::from(e);
            if args.arg.is_none() && e.message.contains(&format!("`{ARG_NAME}`")) {
                e.message.push_str(" (pass --arg N)");
            }
            return e.report(&args.program, args.output);
        }
    };
    let report = run.report(args.strategy);
    match args.output {
        Output::Json => print_json(&report),
        Output::Text => print_run(&report),
    }
    ExitCode::from(if report.error.is_some() { RUNTIME } else { OK })
}

fn print_run(report: &RunReport) {
    if let Some(v) = &report.value {
        println!("value: {v}");
    }
    println!("trace ({} events):", report.trace.events.len());
    for event in &report.trace.events {
        println!("  {event}");
    }
    if report.strategy.is_parallel() {
        println!("span: {}", report.trace.span);
        println!("work: {}", report.trace.work);
    }
    if let Some(e) = &report.error {
        eprintln!("runtime error ({}): {}", e.kind, e.message);
    }
}

fn cmd_translate(args: TranslateArgs) -> ExitCode {
    let program = match load_program(&args.program, args.arg) {
        Ok(p) => p,
        Err(e) => return e.report(&args.program, args.output),
    };
    // Without --arg the program may still mention `arg`; it is an int.
    let ctx = match args.arg {
        Some(_) => SourceContext::new(),
        None => SourceContext::new().with(ARG_NAME, SourceType::INT),
    };
    let (program, ty) = match check_program(&ctx, &program) {
        Ok(checked) => checked,
        Err(e) => return StaticError::new("typecheck", e).report(&args.program, args.output),
    };
    let target = translate_program(args.translation, &program);
    let target_ty = TargetType::m(translate_type(args.translation, &ty));
    let text = pretty_target_program(&target);
    match args.output {
        Output::Json => print_json(&json!({
            "translation": args.translation.name(),
            "program": text,
            "source_type": ty.to_string(),
            "type": target_ty.to_string(),
        })),
        Output::Text => {
            print!("{text}");
            println!("-- main : {target_ty}");
        }
    }
    ExitCode::from(OK)
}

fn cmd_laws(args: LawsArgs) -> ExitCode {
    let spec = GenSpec::new(args.seed).with_max_depth(args.max_depth);
    let strategies = match args.strategy {
        Some(s) => vec![s],
        None => StrategyId::ALL.to_vec(),
    };
    let mut reports: Vec<LawReport> = Vec::new();
    for strategy in strategies {
        for report in run_suite(args.suite, strategy, &spec, args.cases) {
            // The equivalence suite does not depend on the strategy.
            if !reports.iter().any(|r| r.law == report.law && r.strategy == report.strategy) {
                reports.push(report);
            }
        }
    }
    let passed = reports.iter().all(|r| r.passed);
    match args.output {
        Output::Json => print_json(&reports),
        Output::Text => {
            for r in &reports {
                println!("{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!("{} checks, {failed} failed (seed {}, {} cases)", reports.len(), args.seed, args.cases);
        }
    }
    ExitCode::from(if passed { OK } else { RUNTIME })
}

#[derive(Serialize)]
struct BenchRow {
    n: i64,
    value: malias_core::effects::Observed,
    work: u64,
    span: u64,
    speedup: Option<f64>,
    tasks: Option<usize>,
}

fn cmd_bench_par(args: BenchArgs) -> ExitCode {
    if args.min_n > args.max_n {
        eprintln!("error: --min-n must not exceed --max-n");
        return ExitCode::from(STATIC);
    }
    let mut rows = Vec::new();
    for n in args.min_n..=args.max_n {
        let run = match run_program_with(&fib(n), StrategyId::CbParNeed, &Config::new(), &RunOptions::default()) {
            Ok(run) => run,
            Err(e) => return StaticError::from(e).report(Path::new("fib"), args.output),
        };
        let value = match &run.result {
            Ok(v) => v.observe(),
            Err(e) => {
                eprintln!("fib {n}: runtime error: {e}");
                return ExitCode::from(RUNTIME);
            }
        };
        let (work, span) = (run.trace.work, run.trace.span);
        rows.push(BenchRow {
            n,
            value,
            work,
            span,
            speedup: (span > 0).then(|| work as f64 / span as f64),
            tasks: run.tasks,
        });
    }
    match args.output {
        Output::Json => print_json(&rows),
        Output::Text => {
            println!("{:>4} {:>8} {:>8} {:>6} {:>9}", "n", "value", "work", "span", "speedup");
            for r in &rows {
                let speedup = r.speedup.map_or("-".to_string(), |s| format!("{s:.2}"));
                println!("{:>4} {:>8} {:>8} {:>6} {:>9}", r.n, r.value.to_string(), r.work, r.span, speedup);
            }
        }
    }
    ExitCode::from(OK)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Translate(args) => cmd_translate(args),
        Command::Laws(args) => cmd_laws(args),
        Command::BenchPar(args) => cmd_bench_par(args),
    }
}
