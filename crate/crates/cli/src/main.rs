use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use stable_expand::harness::instance_digest;
use stable_expand::uct::{default_exploration, write_trajectory_csv};
use stable_expand::{
    datagen::default_capacities, generate_partial, generate_set1, generate_set2, load_instance,
    run_method, save_instance, GapTable, MatchingInstance, Method, PartialParams, RunConfig,
    RunRecord, SyntheticParams,
};

#[derive(Parser)]
#[command(
    name = "stable-expand",
    version,
    about = "Capacity expansion search for two-sided matching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic instance files.
    Gen(GenArgs),
    /// Run one method on one instance and write a run record.
    Solve(SolveArgs),
    /// Run several methods over many instances and write a gap table.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SetKind {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Partial,
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetKind::One => "set1",
            SetKind::Two => "set2",
            SetKind::Partial => "partial",
        })
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    set: SetKind,
    #[arg(long)]
    residents: usize,
    #[arg(long)]
    hospitals: usize,
    #[arg(long)]
    budget: u32,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Seed of the first instance; later ones use seed+1, seed+2, ...
    #[arg(long, env = "STABLE_EXPAND_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Partial set only: hospitals each resident applies to.
    #[arg(long)]
    applications: Option<usize>,
    /// Partial set only: total seats per hospital, comma separated.
    #[arg(long, value_delimiter = ',')]
    capacities: Option<Vec<u32>>,
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// UCT rounds; defaults to 1000 per budget seat.
    #[arg(long)]
    rounds: Option<u64>,
    /// UCT exploration constant.
    #[arg(long, default_value_t = default_exploration())]
    cp: f64,
    #[arg(long, env = "STABLE_EXPAND_SEED", default_value_t = 0)]
    seed: u64,
    /// Wall-clock cap per run, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

impl SearchArgs {
    fn run_config(&self) -> anyhow::Result<RunConfig> {
        if !(self.cp.is_finite() && self.cp >= 0.0) {
            return Err(Validation(format!(
                "--cp must be a nonnegative number, got {}",
                self.cp
            ))
            .into());
        }
        if let Some(limit) = self.time_limit {
            if !(limit.is_finite() && limit > 0.0) {
                return Err(
                    Validation(format!("--time-limit must be positive, got {limit}")).into(),
                );
            }
        }
        Ok(RunConfig {
            rounds: self.rounds,
            exploration: self.cp,
            seed: self.seed,
            time_limit_secs: self.time_limit,
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long)]
    method: Method,
    #[command(flatten)]
    search: SearchArgs,
    /// Run record path; defaults to `<instance stem>.<method>.record.json` beside the instance.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Instance files or glob patterns.
    #[arg(required = true)]
    instances: Vec<String>,
    /// Methods to tabulate; defaults to every method except the reference.
    #[arg(long = "method", value_delimiter = ',')]
    methods: Vec<Method>,
    #[arg(long, default_value = "oracle")]
    reference: Method,
    #[command(flatten)]
    search: SearchArgs,
    /// Gap table CSV; printed to standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory of run records, reused when they match and filled otherwise.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

/// Problems with user input that are caught before any run starts.
#[derive(Debug)]
struct Validation(String);

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Validation {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use stable_expand::Error as E;
    for cause in err.chain() {
        if cause.is::<Validation>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Parse { .. }
                | E::Invalid(_)
                | E::InfeasibleExpansion(_)
                | E::InfeasibleBudget { .. }
                | E::DummyPresent
                | E::Parameter(_) => 2,
                _ => 3,
            };
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Compare(args) => cmd_compare(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> anyhow::Result<()> {
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(Validation(format!(
            "alpha out of range: {} (expected 0..=1)",
            args.alpha
        ))
        .into());
    }
    if args.count == 0 {
        return Ok(());
    }
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for seed in args.seed..args.seed + args.count {
        let instance = match args.set {
            SetKind::One | SetKind::Two => {
                let params = SyntheticParams {
                    residents: args.residents,
                    hospitals: args.hospitals,
                    budget: args.budget,
                    alpha: args.alpha,
                    seed,
                };
                if matches!(args.set, SetKind::One) {
                    generate_set1(&params)?
                } else {
                    generate_set2(&params)?
                }
            }
            SetKind::Partial => generate_partial(&PartialParams {
                residents: args.residents,
                hospitals: args.hospitals,
                applications_per_resident: args.applications.unwrap_or(args.hospitals.min(5)),
                capacities: args.capacities.clone().unwrap_or_else(|| {
                    default_capacities(args.residents, args.hospitals, args.budget)
                }),
                budget: args.budget,
                seed,
            })?,
        };
        let name = format!(
            "{}_D{}_H{}_B{}_a{:?}_s{}.json",
            args.set, args.residents, args.hospitals, args.budget, args.alpha, seed
        );
        let path = args.out.join(name);
        write_atomic(&path, save_instance(&instance).as_bytes())?;
        println!("{}", path.display());
    }
    Ok(())
}

struct Loaded {
    path: PathBuf,
    digest: String,
    instance: MatchingInstance,
}

fn load(path: &Path) -> anyhow::Result<Loaded> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Validation(format!("{} is not UTF-8", path.display())))?;
    let instance = load_instance(&text).with_context(|| format!("loading {}", path.display()))?;
    Ok(Loaded {
        path: path.to_path_buf(),
        digest: instance_digest(&bytes),
        instance,
    })
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into())
}

/// Runs `method`, writes the record to `out` (plus a trajectory CSV beside it
/// for UCT methods) and returns the record.
fn solve_to(
    loaded: &Loaded,
    method: Method,
    config: &RunConfig,
    out: &Path,
) -> anyhow::Result<RunRecord> {
    let outcome = run_method(&loaded.instance, method, config)
        .with_context(|| format!("{method} on {}", loaded.path.display()))?;
    let trajectory_path = match &outcome.trajectory {
        Some(points) => {
            let path = trajectory_path_for(out);
            let mut buf = Vec::new();
            write_trajectory_csv(points, &mut buf)?;
            write_atomic(&path, &buf)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let record = RunRecord::new(
        loaded.path.display().to_string(),
        loaded.digest.clone(),
        config,
        &outcome,
        trajectory_path,
    );
    write_atomic(out, record.to_json().as_bytes())?;
    Ok(record)
}

const RECORD_SUFFIX: &str = ".record.json";

fn default_record_path(dir: &Path, instance: &Path, method: Method) -> PathBuf {
    dir.join(format!("{}.{}{RECORD_SUFFIX}", file_stem(instance), method))
}

fn trajectory_path_for(record: &Path) -> PathBuf {
    let name = record
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = name
        .strip_suffix(RECORD_SUFFIX)
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(&name);
    record.with_file_name(format!("{stem}.trajectory.csv"))
}

fn cmd_solve(args: &SolveArgs) -> anyhow::Result<()> {
    let config = args.search.run_config()?;
    let loaded = load(&args.instance)?;
    let out = args.out.clone().unwrap_or_else(|| {
        let dir = args.instance.parent().unwrap_or(Path::new("."));
        default_record_path(dir, &args.instance, args.method)
    });
    let record = solve_to(&loaded, args.method, &config, &out)?;
    println!("{}", record.best_cost);
    eprintln!(
        "{}: cost {} expansion {:?} ({:.3}s) -> {}",
        record.method,
        record.best_cost,
        record.best_expansion,
        record.wall_time_secs,
        out.display()
    );
    Ok(())
}

fn expand_instances(patterns: &[String]) -> anyhow::Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for pattern in patterns {
        let direct = PathBuf::from(pattern);
        if direct.is_file() {
            paths.push(direct);
            continue;
        }
        let matches =
            glob::glob(pattern).map_err(|e| Validation(format!("bad pattern {pattern:?}: {e}")))?;
        let before = paths.len();
        for entry in matches {
            let path = entry?;
            // run records written beside instances are not instances
            if path.is_file() && !path.to_string_lossy().ends_with(RECORD_SUFFIX) {
                paths.push(path);
            }
        }
        if paths.len() == before {
            return Err(Validation(format!("no instance files match {pattern:?}")).into());
        }
    }
    paths.sort();
    paths.dedup();
    Ok(paths)
}

fn reusable(path: &Path, loaded: &Loaded, method: Method, config: &RunConfig) -> Option<RunRecord> {
    let text = fs::read_to_string(path).ok()?;
    let record: RunRecord = serde_json::from_str(&text).ok()?;
    (record.instance_digest == loaded.digest && record.method == method && &record.config == config)
        .then_some(record)
}

fn cost_of(
    loaded: &Loaded,
    method: Method,
    config: &RunConfig,
    records: Option<&Path>,
) -> anyhow::Result<u64> {
    match records {
        Some(dir) => {
            let path = default_record_path(dir, &loaded.path, method);
            if let Some(record) = reusable(&path, loaded, method, config) {
                return Ok(record.best_cost);
            }
            Ok(solve_to(loaded, method, config, &path)?.best_cost)
        }
        None => Ok(run_method(&loaded.instance, method, config)?.best_cost),
    }
}

fn cmd_compare(args: &CompareArgs) -> anyhow::Result<()> {
    let config = args.search.run_config()?;
    let paths = expand_instances(&args.instances)?;
    let methods: Vec<Method> = if args.methods.is_empty() {
        Method::all()
            .into_iter()
            .filter(|&m| m != args.reference)
            .collect()
    } else {
        args.methods.clone()
    };
    if let Some(dir) = &args.records {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let instances = paths
        .iter()
        .map(|p| load(p))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()?;
    let records = args.records.as_deref();
    let rows: Vec<anyhow::Result<(u64, Vec<u64>)>> = pool.install(|| {
        instances
            .par_iter()
            .map(|loaded| {
                let reference = cost_of(loaded, args.reference, &config, records).map_err(|e| {
                    anyhow::anyhow!("missing reference run for {}: {e:#}", loaded.path.display())
                })?;
                let costs = methods
                    .par_iter()
                    .map(|&m| cost_of(loaded, m, &config, records))
                    .collect::<anyhow::Result<Vec<_>>>()?;
                Ok((reference, costs))
            })
            .collect()
    });

    let mut table = GapTable::new(methods.clone());
    for (loaded, row) in instances.iter().zip(rows) {
        let (reference, costs) = row?;
        if reference == 0 || costs.contains(&0) {
            bail!("zero cost on {}; gaps are undefined", loaded.path.display());
        }
        table.push(file_stem(&loaded.path), &costs, reference);
    }
    let csv = table.to_csv();
    match &args.out {
        Some(path) => write_atomic(path, csv.as_bytes())?,
        None => io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(())
}
