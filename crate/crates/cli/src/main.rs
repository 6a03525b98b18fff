use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use dissipact::zoo::{self, build_model, ModelSpec};
use dissipact_cli::{
    load_system_file, parse_config, run, CheckLevel, CliError, ExitStatus, ModelSource, RunSpec, SchemeName, SystemFile,
};
use log::debug;

#[derive(Parser)]
#[command(name = "dissipact", version, about = "Dissipation-preserving simulation of energy-based systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more configurations.
    Run(RunArgs),
    /// Check the structure of a system file.
    Validate { system_file: PathBuf },
    /// Inspect the model collection.
    #[command(subcommand)]
    Zoo(ZooCommand),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(required = true)]
    configs: Vec<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    check: Option<CheckArg>,
    /// Output directory; with several configs each gets a subdirectory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Seed of the sampled gradient self-check.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of configurations run concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SchemeArg {
    Midpoint,
    DiscreteGradient,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CheckArg {
    None,
    Dissipation,
    Full,
}

#[derive(Subcommand)]
enum ZooCommand {
    List,
    Describe {
        name: String,
    },
    /// Write a model as a system file.
    Export {
        name: String,
        #[arg(long)]
        grid: Option<usize>,
        /// Parameter override `key=value`; repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("DISSIPACT_LOG", "warn"))
        .format_timestamp(None)
        .init();
    // Usage errors share exit code 1 with other errors; 2 means a failed check.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let status = match cli.command {
        Command::Run(args) => run_all(&args),
        Command::Validate { system_file } => report(validate(&system_file)),
        Command::Zoo(cmd) => report(zoo_command(cmd)),
    };
    ExitCode::from(status.code() as u8)
}

fn report(result: Result<ExitStatus, CliError>) -> ExitStatus {
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitStatus::Error
    })
}

fn load_spec(path: &Path, args: &RunArgs, out_dir: Option<PathBuf>) -> Result<RunSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.into(), source: e })?;
    let mut spec = parse_config(&text)?;
    // System files are found relative to the config that names them.
    if let ModelSource::SystemFile(p) = &mut spec.model {
        if p.is_relative() {
            *p = path.parent().unwrap_or(Path::new("")).join(&*p);
        }
    }
    if let Some(tau) = args.tau {
        spec.grid.tau = tau;
    }
    if let Some(t_end) = args.t_end {
        spec.grid.t_end = t_end;
    }
    if let Some(s) = args.scheme {
        spec.scheme = match s {
            SchemeArg::Midpoint => SchemeName::Midpoint,
            SchemeArg::DiscreteGradient => SchemeName::DiscreteGradient,
        };
    }
    if let Some(c) = args.check {
        spec.check = match c {
            CheckArg::None => CheckLevel::None,
            CheckArg::Dissipation => CheckLevel::Dissipation,
            CheckArg::Full => CheckLevel::Full,
        };
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(dir) = out_dir {
        spec.outputs.dir = dir;
    }
    spec.check_values()?;
    Ok(spec)
}

/// Output directory of each config: the flag as given for a single run,
/// one subdirectory per config stem otherwise.
fn out_dirs(args: &RunArgs) -> Vec<Option<PathBuf>> {
    let single = args.configs.len() == 1;
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    args.configs
        .iter()
        .map(|c| {
            if single {
                return args.out_dir.clone();
            }
            let stem = c.file_stem().map_or("run".to_string(), |s| s.to_string_lossy().into_owned());
            let count = seen.entry(stem.clone()).or_insert(0);
            *count += 1;
            let name = if *count == 1 { stem } else { format!("{stem}-{count}") };
            Some(args.out_dir.clone().unwrap_or_else(|| PathBuf::from("dissipact-out")).join(name))
        })
        .collect()
}

fn run_one(path: &Path, args: &RunArgs, out_dir: Option<PathBuf>) -> (ExitStatus, String) {
    match load_spec(path, args, out_dir).and_then(|spec| run(&spec)) {
        Ok(rep) => (rep.status(), rep.summary()),
        Err(e) => {
            debug!("{}: {e:?}", path.display());
            (ExitStatus::Error, format!("error: {e}"))
        }
    }
}

fn run_all(args: &RunArgs) -> ExitStatus {
    let dirs = out_dirs(args);
    let results: Mutex<Vec<Option<(ExitStatus, String)>>> = Mutex::new(vec![None; args.configs.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..args.jobs.clamp(1, args.configs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= args.configs.len() {
                    break;
                }
                let r = run_one(&args.configs[i], args, dirs[i].clone());
                results.lock().expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });
    let results: Vec<(ExitStatus, String)> = results.into_inner().unwrap().into_iter().map(Option::unwrap).collect();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    for (path, (status, line)) in args.configs.iter().zip(&results) {
        let sink: &mut dyn Write = if *status == ExitStatus::Error { &mut stderr } else { &mut stdout };
        let _ = writeln!(sink, "{}: {line}", path.display());
    }
    ExitStatus::worst(results.iter().map(|r| r.0))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn validate(path: &Path) -> Result<ExitStatus, CliError> {
    let loaded = load_system_file(path)?;
    let rep = dissipact::diagnostics::structure_report(&loaded.system);
    emit(&(serde_json::to_string_pretty(&rep).expect("reports serialize to JSON") + "\n"));
    Ok(if rep.passed { ExitStatus::Pass } else { ExitStatus::CheckFailed })
}

fn zoo_command(cmd: ZooCommand) -> Result<ExitStatus, CliError> {
    match cmd {
        ZooCommand::List => {
            let mut out = String::new();
            for name in zoo::list() {
                let _ = writeln!(out, "{name:<30} {}", zoo::describe(name)?.summary);
            }
            emit(&out);
        }
        ZooCommand::Describe { name } => {
            let info = zoo::describe(&name)?;
            let mut out = format!("{}\n  {}\n", info.name, info.summary);
            if let Some(g) = info.grid {
                let _ = writeln!(out, "  grid: default {g}, minimum {}", info.min_grid);
            }
            for p in info.params {
                let kind = format!("{:?}", p.kind).to_lowercase();
                let _ = writeln!(out, "  {:<14} {:<10} {:<12} {}", p.name, p.default, kind, p.help);
            }
            emit(&out);
        }
        ZooCommand::Export { name, grid, params, output } => {
            let mut spec = ModelSpec::new(name);
            spec.grid = grid;
            spec.params.extend(params);
            let m = build_model(&spec)?;
            let input = (!m.default_input.is_zero()).then_some(&m.default_input);
            let text = SystemFile::from_system(&m.system, &m.z0, input)?.to_toml();
            match output {
                Some(path) => std::fs::write(&path, text).map_err(|e| CliError::Io { path, source: e })?,
                None => emit(&text),
            }
        }
    }
    Ok(ExitStatus::Pass)
}
