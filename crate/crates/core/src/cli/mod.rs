//! The `nrm` command line: argument parsing, file I/O and exit codes.
//!
//! Exit codes are 0 on success, 1 for usage errors (bad flags, missing
//! arguments) and 2 when the inputs themselves are rejected.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{ExperimentConfig, EXPERIMENT_FORMAT};

use crate::automata::{self, MooreMachine};
use crate::error::{Error, Result};
use crate::gridworld::{synth_dataset, traces_from_csv, traces_to_csv, GridConfig, Policy};
use crate::nrm::{ground_offline, GroundingConfig, ProbMachine, GROUNDER_HIDDEN};
use crate::plot::{learning_curve_svg, Series};
use crate::rl::{returns_from_csv, run_experiment, Experiment, SUMMARY_HEADER};
use crate::urs::{self, UrsOptions};
use crate::{ltlf, tasks};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nrm", version, about = "Reward machines, reasoning shortcuts and neural reward machine agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile an LTLf formula into a reward machine.
    Compile(CompileArgs),
    /// Find the unremovable reasoning shortcuts of a machine.
    Urs(UrsArgs),
    /// Generate labelled gridworld episodes.
    Synth(SynthArgs),
    /// Train a symbol grounder from reward traces.
    Ground(GroundArgs),
    /// Train RL agents and write learning curves.
    Train(TrainArgs),
    /// Plot learning-curve CSV files as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["formula", "task"])))]
struct CompileArgs {
    #[arg(long)]
    formula: Option<String>,
    /// Benchmark task number 1..8 instead of a formula.
    #[arg(long)]
    task: Option<usize>,
    /// Comma-separated symbol names.
    #[arg(long, default_value = "a,b,c,d,e")]
    alphabet: String,
    /// Graphviz output.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Machine file output; printed to stdout when neither output is given.
    #[arg(long)]
    machine: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["machine", "task"])))]
struct UrsArgs {
    #[arg(long)]
    machine: Option<PathBuf>,
    #[arg(long)]
    task: Option<usize>,
    /// `none`, `exact`, `bounded` (length |Q|^2) or `bounded:L`.
    #[arg(long, default_value = "none")]
    oracle: String,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Report CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Wall-clock times CSV. Defaults to `<out>.timing.csv` when `--out` is given.
    #[arg(long)]
    timing: Option<PathBuf>,
    /// Disable the absorbing-state and self-loop pruning rules.
    #[arg(long)]
    no_pruning: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["machine", "task"])))]
struct SynthArgs {
    #[arg(long)]
    machine: Option<PathBuf>,
    #[arg(long)]
    task: Option<usize>,
    /// Map file; the built-in 5x5 map when absent.
    #[arg(long)]
    map: Option<PathBuf>,
    /// `random`, `eps-optimal` or `mixture`.
    #[arg(long, default_value = "mixture")]
    policy: String,
    #[arg(long, default_value_t = 500)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["machine", "task"])))]
struct GroundArgs {
    #[arg(long)]
    machine: Option<PathBuf>,
    #[arg(long)]
    task: Option<usize>,
    #[arg(long)]
    traces: PathBuf,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = GROUNDER_HIDDEN)]
    hidden: usize,
    #[arg(long)]
    lr: Option<f64>,
    /// Independent initialisations; the one with the lowest final loss is kept.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Task number 1..8 or a formula over the map alphabet.
    #[arg(long)]
    task: Option<String>,
    /// Comma-separated agents: rm, nrm, rnn.
    #[arg(long)]
    agent: Option<String>,
    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    episodes: Option<usize>,
    /// Experiment file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Map file overriding the experiment's map.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Seeds trained in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Curve CSV files, optionally as `label=path`. Files sharing a label
    /// are drawn as one band; the default label is the file name without
    /// its `_seedN` suffix.
    #[arg(required = true)]
    curves: Vec<String>,
    #[arg(long, default_value_t = 100)]
    window: usize,
    #[arg(long, default_value = "learning curves")]
    title: String,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match run(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}

fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Compile(a) => compile(a, out),
        Command::Urs(a) => urs_cmd(a, out),
        Command::Synth(a) => synth(a, out),
        Command::Ground(a) => ground(a, out),
        Command::Train(a) => train(a, out),
        Command::Plot(a) => plot(a, out),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn load_machine(path: Option<&Path>, task: Option<usize>) -> Result<MooreMachine> {
    match (path, task) {
        (Some(p), _) => automata::deserialize(&read(p)?),
        (None, Some(id)) => Ok(tasks::task(id)?.machine()),
        (None, None) => Err(Error::Usage("a machine file or a task number is required".into())),
    }
}

fn load_map(path: Option<&Path>) -> Result<GridConfig> {
    match path {
        Some(p) => GridConfig::from_map_text(&read(p)?),
        None => Ok(GridConfig::default_map()),
    }
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn compile(a: CompileArgs, out: &mut dyn Write) -> Result<()> {
    let formula = match (&a.formula, a.task) {
        (Some(f), _) => f.clone(),
        (None, Some(id)) => tasks::task(id)?.formula.to_owned(),
        (None, None) => unreachable!("clap requires a source"),
    };
    let alphabet: Vec<String> = split_list(&a.alphabet).map(String::from).collect();
    let m = ltlf::compile_str(&formula, &alphabet)?;
    if let Some(p) = &a.dot {
        write_file(p, &automata::export_dot(&m))?;
    }
    if let Some(p) = &a.machine {
        write_file(p, &automata::serialize(&m))?;
    }
    if a.dot.is_none() && a.machine.is_none() {
        write!(out, "{}", automata::serialize(&m))?;
    } else {
        writeln!(out, "states {} symbols {}", m.num_states(), m.num_symbols())?;
    }
    Ok(())
}

enum Oracle {
    None,
    Exact,
    Bounded(Option<usize>),
}

fn parse_oracle(text: &str) -> Result<Oracle> {
    match text {
        "none" => Ok(Oracle::None),
        "exact" => Ok(Oracle::Exact),
        "bounded" => Ok(Oracle::Bounded(None)),
        _ => match text.strip_prefix("bounded:").map(str::parse::<usize>) {
            Some(Ok(l)) => Ok(Oracle::Bounded(Some(l))),
            _ => Err(Error::input(format!("unknown oracle `{text}` (none, exact, bounded, bounded:L)"))),
        },
    }
}

fn urs_cmd(a: UrsArgs, out: &mut dyn Write) -> Result<()> {
    let oracle = parse_oracle(&a.oracle)?;
    let m = load_machine(a.machine.as_deref(), a.task)?;
    let opts = UrsOptions {
        skip_absorbing: !a.no_pruning,
        skip_self_loops: !a.no_pruning,
        jobs: a.jobs,
        ..UrsOptions::default()
    };
    let t0 = Instant::now();
    let report = urs::find_urs_with(&m, opts)?;
    let elapsed = t0.elapsed();
    let checked = match oracle {
        Oracle::None => None,
        Oracle::Exact => {
            let t = Instant::now();
            Some(("exact".to_string(), urs::urs_oracle_exact(&m)?, t.elapsed()))
        }
        Oracle::Bounded(l) => {
            let l = l.unwrap_or(m.num_states() * m.num_states());
            let t = Instant::now();
            Some((format!("bounded{l}"), urs::urs_oracle_bounded(&m, l)?, t.elapsed()))
        }
    };
    let csv = urs::report_csv(&report, m.alphabet(), checked.as_ref().map(|(n, maps, _)| (n.as_str(), maps.as_slice())));
    let timing = urs::timing_csv(elapsed, checked.as_ref().map(|(n, _, t)| (n.as_str(), *t)));
    match &a.out {
        Some(p) => {
            write_file(p, &csv)?;
            let tp = a.timing.clone().unwrap_or_else(|| sidecar(p));
            write_file(&tp, &timing)?;
        }
        None => {
            write!(out, "{csv}")?;
            if let Some(tp) = &a.timing {
                write_file(tp, &timing)?;
            }
        }
    }
    if a.out.is_some() {
        write!(out, "count {}", report.count())?;
        if let Some((name, maps, _)) = &checked {
            write!(out, " {name} {} agree {}", maps.len(), *maps == report.shortcuts)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn sidecar(p: &Path) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    p.with_file_name(format!("{stem}.timing.csv"))
}

fn synth(a: SynthArgs, out: &mut dyn Write) -> Result<()> {
    let m = load_machine(a.machine.as_deref(), a.task)?;
    let grid = load_map(a.map.as_deref())?;
    let policy = Policy::parse(&a.policy)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let data = synth_dataset(&grid, &m, policy, a.episodes, &mut rng)?;
    write_file(&a.out, &traces_to_csv(&data)?)?;
    let steps: usize = data.iter().map(|t| t.len()).sum();
    writeln!(out, "episodes {} steps {steps} policy {}", data.len(), a.policy)?;
    Ok(())
}

fn ground(a: GroundArgs, out: &mut dyn Write) -> Result<()> {
    let m = load_machine(a.machine.as_deref(), a.task)?;
    let data = traces_from_csv(&read(&a.traces)?)?;
    let cfg = GroundingConfig {
        epochs: a.epochs,
        lr: a.lr.unwrap_or(GroundingConfig::default().lr),
        ..GroundingConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (g, log) = ground_offline(&ProbMachine::from_machine(&m), &data, a.hidden, &cfg, a.restarts, &mut rng)?;
    let file = fs::File::create(&a.out).map_err(|e| Error::input(format!("{}: {e}", a.out.display())))?;
    let mut w = BufWriter::new(file);
    g.write_to(&mut w)?;
    w.flush()?;
    let last = log.losses.last().copied().unwrap_or(f64::NAN);
    writeln!(out, "epochs {} loss {last:.6} early_stop {}", log.losses.len(), log.stopped_early)?;
    Ok(())
}

fn train(a: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let mut exp = match &a.config {
        Some(p) => ExperimentConfig::parse(&read(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(t) = &a.task {
        exp.formula = Some(tasks::resolve_formula(t)?);
    }
    if let Some(list) = &a.agent {
        exp.agents = split_list(list).map(str::parse).collect::<Result<_>>()?;
    }
    if let Some(list) = &a.seeds {
        exp.train.seeds = split_list(list)
            .map(|s| s.parse::<u64>().map_err(|_| Error::input(format!("bad seed `{s}`"))))
            .collect::<Result<_>>()?;
    }
    if let Some(n) = a.episodes {
        exp.train.episodes = n;
    }
    if let Some(p) = &a.map {
        exp.grid = GridConfig::from_map_text(&read(p)?)?;
    }
    let formula = exp
        .formula
        .clone()
        .ok_or_else(|| Error::input("no task: pass --task or set it in the experiment file"))?;
    if exp.agents.is_empty() {
        return Err(Error::input("no agents selected"));
    }
    let machine = ltlf::compile_str(&formula, &exp.grid.alphabet)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::input(format!("{}: {e}", a.out.display())))?;

    let mut summary = format!("{SUMMARY_HEADER}\n");
    let mut series = Vec::new();
    for &agent in &exp.agents {
        let result = run_experiment(&exp.grid, &machine, agent, &exp.train, a.jobs)?;
        for run in &result.runs {
            let path = a.out.join(format!("{agent}_seed{}.csv", run.seed));
            write_file(&path, &Experiment::curve_csv(run, result.window))?;
        }
        summary.extend(result.summary_csv().lines().skip(1).map(|l| format!("{l}\n")));
        writeln!(out, "{agent}: final mean {:.3} over {} seeds", result.final_mean(), result.runs.len())?;
        series.push(Series {
            label: agent.to_string(),
            runs: result.runs.into_iter().map(|r| r.returns).collect(),
        });
    }
    write_file(&a.out.join("summary.csv"), &summary)?;
    let svg = learning_curve_svg(&series, exp.train.window, &formula)?;
    write_file(&a.out.join("learning_curves.svg"), &svg)?;
    Ok(())
}

fn plot_label(arg: &str) -> (String, PathBuf) {
    if let Some((label, path)) = arg.split_once('=') {
        return (label.to_string(), PathBuf::from(path));
    }
    let path = PathBuf::from(arg);
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let label = match stem.rsplit_once("_seed") {
        Some((base, n)) if !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()) => base.to_string(),
        _ => stem,
    };
    (label, path)
}

fn plot(a: PlotArgs, out: &mut dyn Write) -> Result<()> {
    let mut series: Vec<Series> = Vec::new();
    for arg in &a.curves {
        let (label, path) = plot_label(arg);
        let returns = returns_from_csv(&read(&path)?).map_err(|e| match e {
            Error::Input(msg) => Error::input(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.runs.push(returns),
            None => series.push(Series { label, runs: vec![returns] }),
        }
    }
    let svg = learning_curve_svg(&series, a.window, &a.title)?;
    write_file(&a.out, &svg)?;
    writeln!(out, "series {} curves {}", series.len(), a.curves.len())?;
    Ok(())
}

/// Reads a grounder checkpoint written by `ground`.
pub fn read_grounder(path: &Path) -> Result<crate::nrm::Grounder> {
    let file = fs::File::open(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    crate::nrm::Grounder::read_from(&mut BufReader::new(file))
}
