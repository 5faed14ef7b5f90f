//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 I/O error,
//! 3 internal invariant violation.

pub mod config;
pub mod export;
pub mod scenario;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::automata::{parse_hoa, translate_reachability, write_hoa, Dra};
use crate::game::{build_grid_game, load_grid, GridGame, Owner};
use crate::learn::{
    align_alphabet, multi_pair_learn_observed, resolve_winning, sink_value, FiniteMemoryStrategy,
    LearnConfig, MultiPairOutcome, QTable, Schedule,
};
use crate::ltl::{build_ids, format_ltl, parse_ltl};
use crate::product::{ProductGame, Shaping};
use crate::verify::{
    best_response_value, brute_force_maximin, induced_mc, rabin_sat_prob, value_iteration,
    BruteLimits,
};

use config::{parse_start, parse_timing, IdsParams, IdsSource, RunConfig, TaskSource};
use scenario::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            msg: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "specgame", version, about = "Security-aware controller synthesis on stochastic games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a formula and print it in normalized form.
    Parse {
        formula: String,
        /// Print the core-connective expansion as well.
        #[arg(long)]
        expand: bool,
    },
    /// Translate a reachability formula (or IDS parameters) to HOA.
    Translate {
        #[arg(long, conflicts_with = "ids_m")]
        ltl: Option<String>,
        #[command(flatten)]
        ids: IdsArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report the size of a product game.
    Product {
        #[arg(long)]
        grid: PathBuf,
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long, conflicts_with = "ids_m")]
        ids_hoa: Option<PathBuf>,
        #[command(flatten)]
        ids: IdsArgs,
    },
    /// Learn controller and attacker strategies.
    Learn(LearnArgs),
    /// Export figure data and run oracles on learned artifacts, or evaluate
    /// fixed-strategy scenarios.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug, Clone)]
struct IdsArgs {
    #[arg(long, requires = "ids_n")]
    ids_m: Option<u32>,
    #[arg(long, requires = "ids_m")]
    ids_n: Option<u32>,
    #[arg(long)]
    extended: bool,
}

impl IdsArgs {
    fn params(&self) -> Option<IdsParams> {
        Some(IdsParams {
            m: self.ids_m?,
            n: self.ids_n?,
            extended: self.extended,
        })
    }
}

#[derive(Args, Debug, Clone)]
struct TaskArgs {
    /// Task automaton (HOA).
    #[arg(long, conflicts_with = "task_ltl")]
    task: Option<PathBuf>,
    /// Task formula (reachability fragment).
    #[arg(long)]
    task_ltl: Option<String>,
}

#[derive(Args, Debug)]
struct LearnArgs {
    /// Run configuration (TOML).
    config: Option<PathBuf>,
    #[arg(long)]
    grid: Option<PathBuf>,
    #[command(flatten)]
    task: TaskArgs,
    #[command(flatten)]
    ids: IdsArgs,
    #[arg(long)]
    episodes: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    gamma_curriculum: Option<f64>,
    /// START:END
    #[arg(long)]
    epsilon: Option<String>,
    /// START:END
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, env = "SPECGAME_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    skip_detected_attacks: bool,
    #[arg(long)]
    start_dist: Option<String>,
    /// per-turn | per-event | on-leave
    #[arg(long)]
    timing: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the configuration's full training budget.
    #[arg(long)]
    full: bool,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    runs: u32,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Run configuration the artifacts were learned with.
    config: Option<PathBuf>,
    /// Directory holding the artifacts (defaults to the configured one).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run model-based oracles and write oracle_report.txt.
    #[arg(long)]
    oracle: bool,
    /// Evaluate a fixed-strategy scenario instead.
    #[arg(long)]
    scenario: Vec<PathBuf>,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<String, CliError> {
    match cmd {
        Command::Parse { formula, expand } => cmd_parse(&formula, expand),
        Command::Translate { ltl, ids, output } => cmd_translate(ltl.as_deref(), ids.params(), output.as_deref()),
        Command::Product {
            grid,
            task,
            ids_hoa,
            ids,
        } => {
            let mut cfg = RunConfig::blank();
            cfg.grid = grid;
            cfg.task = task_source(&task);
            cfg.ids = match (ids_hoa, ids.params()) {
                (Some(p), _) => Some(IdsSource::Hoa(p)),
                (None, Some(p)) => Some(IdsSource::Params(p)),
                (None, None) => None,
            };
            cmd_product(&cfg)
        }
        Command::Learn(a) => cmd_learn(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
    }
}

fn task_source(t: &TaskArgs) -> Option<TaskSource> {
    match (&t.task, &t.task_ltl) {
        (Some(p), _) => Some(TaskSource::Hoa(p.clone())),
        (None, Some(f)) => Some(TaskSource::Ltl(f.clone())),
        (None, None) => None,
    }
}

pub fn cmd_parse(formula: &str, expand: bool) -> Result<String, CliError> {
    let f = parse_ltl(formula).map_err(usage)?;
    let mut out = format!("{}\n", format_ltl(&f));
    if expand {
        let _ = writeln!(out, "{}", format_ltl(&f.expand_sugar()));
    }
    Ok(out)
}

pub fn cmd_translate(
    ltl: Option<&str>,
    ids: Option<IdsParams>,
    output: Option<&Path>,
) -> Result<String, CliError> {
    let f = match (ltl, ids) {
        (Some(s), _) => parse_ltl(s).map_err(usage)?,
        (None, Some(p)) => build_ids(p.m, p.n, p.extended),
        (None, None) => return Err(usage("give --ltl or --ids-m/--ids-n")),
    };
    let dra = translate_reachability(&f).map_err(usage)?;
    let text = write_hoa(&dra);
    // The written document must read back to the same automaton.
    let back = parse_hoa(&text).map_err(|e| CliError::Internal(e.to_string()))?;
    if back != dra {
        return Err(CliError::Internal("HOA round trip changed the automaton".into()));
    }
    match output {
        Some(p) => {
            std::fs::write(p, &text).map_err(|e| CliError::io(p, e))?;
            Ok(format!("wrote {} ({} states)\n", p.display(), dra.num_states()))
        }
        None => Ok(text),
    }
}

fn load_grid_game(path: &Path) -> Result<GridGame, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let spec = load_grid(&text).map_err(usage)?;
    build_grid_game(&spec).map_err(usage)
}

/// Grid game and product for a configuration.
pub fn build_run_product(cfg: &RunConfig) -> Result<(GridGame, ProductGame), CliError> {
    let gg = load_grid_game(&cfg.grid)?;
    let dra: Dra = resolve_winning(&cfg.winning_condition()?).map_err(usage)?;
    let dra = align_alphabet(&dra, &gg.game).map_err(usage)?;
    let pg = ProductGame::new(gg.game.clone(), dra, cfg.learn.timing).map_err(usage)?;
    Ok((gg, pg))
}

pub fn cmd_product(cfg: &RunConfig) -> Result<String, CliError> {
    if !cfg.grid.is_file() {
        return Err(CliError::Io {
            path: cfg.grid.clone(),
            msg: "not found".into(),
        });
    }
    let (gg, pg) = build_run_product(cfg)?;
    let g = &gg.game;
    let count = |o| g.states_of(o).count();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "game states: {} (controller {}, attacker {}, chance {})",
        g.num_states(),
        count(Owner::Controller),
        count(Owner::Attacker),
        count(Owner::Chance)
    );
    let _ = writeln!(out, "automaton states: {}", pg.num_modes());
    let _ = writeln!(
        out,
        "product states: {} x {} = {}",
        g.num_states(),
        pg.num_modes(),
        pg.num_states()
    );
    let _ = writeln!(out, "reachable product states: {}", pg.reachable().len());
    let _ = writeln!(out, "acceptance pairs: {}", pg.dra().pairs().len());
    Ok(out)
}

fn parse_schedule(s: &str) -> Result<Schedule, CliError> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("schedule {s:?} is not START:END")))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|_| usage(format!("bad number {t:?}")));
    Ok(Schedule::new(p(a)?, p(b)?))
}

fn learn_config(a: &LearnArgs) -> Result<(RunConfig, LearnConfig), CliError> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::blank(),
    };
    if let Some(g) = &a.grid {
        cfg.grid = g.clone();
    }
    if let Some(t) = task_source(&a.task) {
        cfg.task = Some(t);
    }
    if let Some(p) = a.ids.params() {
        cfg.ids = Some(IdsSource::Params(p));
    }
    if let Some(o) = &a.out {
        cfg.out = o.clone();
    }
    let l = &mut cfg.learn;
    if let Some(v) = a.gamma {
        l.gamma = v;
    }
    if let Some(v) = a.gamma_curriculum {
        l.gamma_curriculum = Some(v);
    }
    if let Some(s) = &a.epsilon {
        l.epsilon = parse_schedule(s)?;
    }
    if let Some(s) = &a.alpha {
        l.alpha = parse_schedule(s)?;
    }
    if let Some(v) = a.seed {
        l.seed = v;
    }
    if a.skip_detected_attacks {
        l.skip_detected_attacks = true;
    }
    if let Some(s) = &a.start_dist {
        l.start = parse_start(s)?;
    }
    if let Some(s) = &a.timing {
        l.timing = parse_timing(s)?;
    }
    cfg.validate()?;
    let mut run = cfg.budgeted(a.full);
    if let Some(v) = a.episodes {
        run.episodes = v;
    }
    if let Some(v) = a.steps {
        run.steps_per_episode = v;
    }
    run.validate().map_err(usage)?;
    Ok((cfg, run))
}

/// Learning curve sample points: about a thousand evenly spaced episodes
/// and always the last one.
fn curve_stride(episodes: u64) -> u64 {
    episodes.div_ceil(1000).max(1)
}

struct RunResult {
    outcome: MultiPairOutcome,
    curve: Vec<(u64, f64)>,
}

fn learn_once(pg: &ProductGame, cfg: &LearnConfig) -> Result<RunResult, CliError> {
    let k = pg.dra().pairs().len();
    let stride = curve_stride(cfg.episodes);
    let sinks: Vec<Vec<bool>> = (0..k)
        .map(|i| {
            let s = pg.dra().winning_sink(i);
            (0..pg.num_modes()).map(|q| s.contains(&q)).collect()
        })
        .collect();
    let x0 = pg.initial();
    let mut curves: Vec<Vec<(u64, f64)>> = vec![Vec::new(); k];
    let outcome = multi_pair_learn_observed(pg, cfg, |i, e, q| {
        if (e + 1) % stride == 0 || e + 1 == cfg.episodes {
            curves[i].push((e + 1, export::learned_value(q, pg, &sinks[i], x0)));
        }
    })
    .map_err(usage)?;
    let curve = std::mem::take(&mut curves[outcome.pair]);
    Ok(RunResult { outcome, curve })
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let p = dir.join(name);
    std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))
}

fn write_artifacts(dir: &Path, pg: &ProductGame, cfg: &LearnConfig, r: &RunResult) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let o = &r.outcome;
    write_file(dir, "qtable.txt", &export::write_qtable(&o.tables[o.pair]))?;
    write_file(dir, "controller.strategy", &o.controller.to_text())?;
    write_file(dir, "attacker.strategy", &o.attacker.to_text())?;
    write_file(dir, "learning_curve.csv", &export::write_curve(&r.curve))?;
    let mut s = String::new();
    let _ = writeln!(s, "episodes {}", cfg.episodes);
    let _ = writeln!(s, "steps_per_episode {}", cfg.steps_per_episode);
    let _ = writeln!(s, "gamma {}", cfg.gamma);
    let _ = writeln!(s, "seed {}", cfg.seed);
    let _ = writeln!(s, "product_states {}", pg.num_states());
    let _ = writeln!(s, "designated_pair {}", o.pair);
    for (i, v) in o.values.iter().enumerate() {
        let _ = writeln!(s, "pair {i} initial_value {v}");
    }
    write_file(dir, "summary.txt", &s)
}

fn cmd_learn(a: &LearnArgs) -> Result<String, CliError> {
    let (cfg, run) = learn_config(a)?;
    if a.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let (_, pg) = build_run_product(&cfg)?;
    let mut out = String::new();
    if a.runs == 1 {
        let r = learn_once(&pg, &run)?;
        write_artifacts(&cfg.out, &pg, &run, &r)?;
        let _ = writeln!(
            out,
            "learned {} episodes; initial value {} (pair {}); artifacts in {}",
            run.episodes,
            r.outcome.values[r.outcome.pair],
            r.outcome.pair,
            cfg.out.display()
        );
        return Ok(out);
    }
    let results: Vec<Result<RunResult, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..a.runs)
            .map(|i| {
                let mut c = run.clone();
                c.seed = run.seed.wrapping_add(i as u64);
                let pg = &pg;
                scope.spawn(move || learn_once(pg, &c).map(|r| (c, r)))
            })
            .collect();
        handles
            .into_iter()
            .enumerate()
            .map(|(i, h)| {
                let (c, r) = h
                    .join()
                    .map_err(|_| CliError::Internal("learning thread panicked".into()))??;
                write_artifacts(&cfg.out.join(format!("run-{i}")), &pg, &c, &r)?;
                Ok(r)
            })
            .collect()
    });
    let results: Vec<RunResult> = results.into_iter().collect::<Result<_, _>>()?;
    let n = results.len() as f64;
    let mean: Vec<(u64, f64)> = (0..results[0].curve.len())
        .map(|j| {
            let e = results[0].curve[j].0;
            (e, results.iter().map(|r| r.curve[j].1).sum::<f64>() / n)
        })
        .collect();
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    write_file(&cfg.out, "learning_curve.csv", &export::write_curve(&mean))?;
    let _ = writeln!(out, "learned {} runs; artifacts in {}", a.runs, cfg.out.display());
    Ok(out)
}

fn read_artifact(dir: &Path, name: &str) -> Result<String, CliError> {
    let p = dir.join(name);
    std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))
}

fn read_pair(dir: &Path) -> Result<usize, CliError> {
    let text = read_artifact(dir, "summary.txt")?;
    text.lines()
        .find_map(|l| l.strip_prefix("designated_pair ")?.trim().parse().ok())
        .ok_or_else(|| usage("summary.txt lacks designated_pair"))
}

/// Loaded learning artifacts of one run.
pub struct Artifacts {
    pub qtable: QTable,
    pub controller: FiniteMemoryStrategy,
    pub attacker: FiniteMemoryStrategy,
    pub pair: usize,
}

pub fn load_artifacts(dir: &Path, pg: &ProductGame) -> Result<Artifacts, CliError> {
    let qtable = export::read_qtable(&read_artifact(dir, "qtable.txt")?)?;
    let strat = |name| {
        FiniteMemoryStrategy::from_text(&read_artifact(dir, name)?).map_err(usage)
    };
    let controller = strat("controller.strategy")?;
    let attacker = strat("attacker.strategy")?;
    if qtable.num_states() != pg.num_states()
        || controller.num_states() != pg.game().num_states()
        || controller.num_modes() != pg.num_modes()
    {
        return Err(usage("artifacts do not match the configured product"));
    }
    Ok(Artifacts {
        qtable,
        controller,
        attacker,
        pair: read_pair(dir)?,
    })
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<String, CliError> {
    let mut out = String::new();
    for path in &a.scenario {
        let sc = Scenario::load(path)?;
        let r = sc.run()?;
        let _ = writeln!(
            out,
            "scenario {}: event {:?} probability {:.6} ({} chain states)",
            path.display(),
            sc.event,
            r.probability,
            r.chain.num_states()
        );
    }
    let Some(cpath) = &a.config else {
        if a.scenario.is_empty() {
            return Err(usage("give a run configuration or --scenario"));
        }
        return Ok(out);
    };
    let cfg = RunConfig::load(cpath)?;
    cfg.validate()?;
    let dir = a.out.clone().unwrap_or_else(|| cfg.out.clone());
    let (gg, pg) = build_run_product(&cfg)?;
    let art = load_artifacts(&dir, &pg)?;
    let shaping =
        Shaping::new(pg.dra(), art.pair, &cfg.learn.shaping(cfg.learn.gamma)).map_err(usage)?;
    if cfg.export.heatmap {
        write_file(&dir, "heatmap.csv", &export::heatmap(&art.qtable, &pg, &gg, shaping.sink()))?;
    }
    if cfg.export.arrows {
        write_file(&dir, "arrows.csv", &export::arrows(&pg, &gg, &art.controller, &art.attacker))?;
    }
    let _ = writeln!(out, "exports written to {}", dir.display());
    if a.oracle {
        let report = oracle_report(&pg, &cfg, &art)?;
        write_file(&dir, "oracle_report.txt", &report)?;
        out.push_str(&report);
    }
    Ok(out)
}

fn oracle_report(pg: &ProductGame, cfg: &RunConfig, art: &Artifacts) -> Result<String, CliError> {
    let params = cfg.learn.shaping(cfg.learn.gamma);
    let x0 = pg.initial();
    let tol = 1e-7;
    let mut r = String::new();
    let _ = writeln!(r, "oracle report (pair {}, gamma {})", art.pair, params.gamma);
    let _ = writeln!(
        r,
        "learned initial value: {}",
        sink_value(pg, art.pair, &art.qtable, x0)
    );
    let vi = value_iteration(pg, art.pair, &params, tol).map_err(|e| CliError::Internal(e.to_string()))?;
    let _ = writeln!(r, "value iteration initial value: {} ({} sweeps)", vi.get(x0), vi.sweeps());
    match best_response_value(pg, art.pair, &params, &art.controller, tol) {
        Ok(br) => {
            let _ = writeln!(r, "best response to learned controller: {}", br.get(x0));
        }
        Err(e) => {
            let _ = writeln!(r, "best response skipped: {e}");
        }
    }
    match induced_mc(pg, &art.controller, &art.attacker) {
        Ok(mc) => {
            let _ = writeln!(
                r,
                "induced chain acceptance probability: {} ({} states)",
                rabin_sat_prob(&mc, pg.dra().pairs()),
                mc.num_states()
            );
        }
        Err(e) => {
            let _ = writeln!(r, "induced chain skipped: {e}");
        }
    }
    match brute_force_maximin(pg, BruteLimits::default()) {
        Ok(v) => {
            let _ = writeln!(r, "brute-force maximin: {v}");
        }
        Err(e) => {
            let _ = writeln!(r, "brute-force maximin skipped: {e}");
        }
    }
    Ok(r)
}
