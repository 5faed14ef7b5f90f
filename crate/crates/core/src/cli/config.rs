//! Run configuration documents (TOML) and their resolution against the
//! file system.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;
use crate::automata::{dra_union, dra_union_cosafety, parse_hoa, translate_reachability, Dra};
use crate::learn::{LearnConfig, Schedule, StartDistribution, WinningCondition};
use crate::ltl::{build_ids, build_win, parse_ltl};
use crate::product::LabelTiming;

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunDoc {
    grid: Option<String>,
    task: Option<String>,
    task_ltl: Option<String>,
    ids: Option<IdsDoc>,
    ids_hoa: Option<String>,
    out: Option<String>,
    #[serde(default)]
    learn: LearnDoc,
    #[serde(default)]
    export: ExportDoc,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct IdsParams {
    pub m: u32,
    pub n: u32,
    #[serde(default)]
    pub extended: bool,
}

type IdsDoc = IdsParams;

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct LearnDoc {
    episodes: Option<u64>,
    steps: Option<u64>,
    gamma: Option<f64>,
    gamma_curriculum: Option<f64>,
    epsilon: Option<[f64; 2]>,
    alpha: Option<[f64; 2]>,
    seed: Option<u64>,
    skip_detected_attacks: Option<bool>,
    start_dist: Option<String>,
    exponent_b: Option<f64>,
    exponent_c: Option<f64>,
    timing: Option<String>,
    quick: Option<BudgetDoc>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct BudgetDoc {
    episodes: u64,
    steps: u64,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ExportDoc {
    #[serde(default = "yes")]
    pub heatmap: bool,
    #[serde(default = "yes")]
    pub arrows: bool,
}

impl Default for ExportDoc {
    fn default() -> Self {
        Self {
            heatmap: true,
            arrows: true,
        }
    }
}

fn yes() -> bool {
    true
}

pub type ExportToggles = ExportDoc;

#[derive(Debug, Clone, PartialEq)]
pub enum TaskSource {
    Hoa(PathBuf),
    Ltl(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum IdsSource {
    Params(IdsParams),
    Hoa(PathBuf),
}

/// A fully resolved run: paths are absolute or relative to the working
/// directory, learning parameters validated.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: PathBuf,
    pub task: Option<TaskSource>,
    pub ids: Option<IdsSource>,
    /// Full training budget.
    pub learn: LearnConfig,
    /// Episodes and steps used without `--full`.
    pub quick: (u64, u64),
    pub out: PathBuf,
    pub export: ExportToggles,
}

/// Budget used when a document does not declare a quick one.
pub const DEFAULT_QUICK: (u64, u64) = (2000, 200);

pub fn parse_start(s: &str) -> Result<StartDistribution, CliError> {
    match s {
        "uniform-product" => Ok(StartDistribution::UniformProduct),
        "initial-dra-only" => Ok(StartDistribution::InitialDraOnly),
        _ => Err(CliError::Usage(format!("unknown start distribution {s:?}"))),
    }
}

pub fn parse_timing(s: &str) -> Result<LabelTiming, CliError> {
    match s {
        "per-turn" => Ok(LabelTiming::PerTurn),
        "per-event" => Ok(LabelTiming::PerEvent),
        "on-leave" => Ok(LabelTiming::OnLeave),
        _ => Err(CliError::Usage(format!("unknown label timing {s:?}"))),
    }
}

impl RunConfig {
    /// Parses a run document; relative paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, CliError> {
        let doc: RunDoc =
            toml::from_str(text).map_err(|e| CliError::Usage(format!("run config: {}", e.message())))?;
        let rel = |p: &str| base.join(p);
        let task = match (doc.task, doc.task_ltl) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("give either task or task_ltl, not both".into()))
            }
            (Some(p), None) => Some(TaskSource::Hoa(rel(&p))),
            (None, Some(f)) => Some(TaskSource::Ltl(f)),
            (None, None) => None,
        };
        let ids = match (doc.ids, doc.ids_hoa) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("give either [ids] or ids_hoa, not both".into()))
            }
            (Some(p), None) => Some(IdsSource::Params(p)),
            (None, Some(p)) => Some(IdsSource::Hoa(rel(&p))),
            (None, None) => None,
        };
        let mut learn = LearnConfig::default();
        let l = doc.learn;
        if let Some(v) = l.episodes {
            learn.episodes = v;
        }
        if let Some(v) = l.steps {
            learn.steps_per_episode = v;
        }
        if let Some(v) = l.gamma {
            learn.gamma = v;
        }
        learn.gamma_curriculum = l.gamma_curriculum.or(learn.gamma_curriculum);
        if let Some([s, e]) = l.epsilon {
            learn.epsilon = Schedule::new(s, e);
        }
        if let Some([s, e]) = l.alpha {
            learn.alpha = Schedule::new(s, e);
        }
        if let Some(v) = l.seed {
            learn.seed = v;
        }
        if let Some(v) = l.skip_detected_attacks {
            learn.skip_detected_attacks = v;
        }
        if let Some(s) = l.start_dist {
            learn.start = parse_start(&s)?;
        }
        if let Some(v) = l.exponent_b {
            learn.exponent_b = v;
        }
        if let Some(v) = l.exponent_c {
            learn.exponent_c = v;
        }
        if let Some(s) = l.timing {
            learn.timing = parse_timing(&s)?;
        }
        let quick = l.quick.map_or(DEFAULT_QUICK, |b| (b.episodes, b.steps));
        Ok(Self {
            grid: rel(doc.grid.as_deref().unwrap_or("")),
            task,
            ids,
            learn,
            quick,
            out: rel(doc.out.as_deref().unwrap_or("out")),
            export: doc.export,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Empty configuration to be filled from flags.
    pub fn blank() -> Self {
        Self::from_toml("", Path::new(".")).expect("empty document is valid")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid.as_os_str().is_empty() || !self.grid.is_file() {
            return Err(CliError::Usage(format!("grid file {:?} not found", self.grid)));
        }
        if let Some(TaskSource::Hoa(p)) = &self.task {
            if !p.is_file() {
                return Err(CliError::Usage(format!("task file {p:?} not found")));
            }
        }
        if let Some(IdsSource::Hoa(p)) = &self.ids {
            if !p.is_file() {
                return Err(CliError::Usage(format!("IDS file {p:?} not found")));
            }
        }
        if self.task.is_none() && self.ids.is_none() {
            return Err(CliError::Usage("no task and no IDS given".into()));
        }
        self.learn.validate().map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Winning condition described by the task and IDS sources.
    pub fn winning_condition(&self) -> Result<WinningCondition, CliError> {
        let read = |p: &PathBuf| std::fs::read_to_string(p).map_err(|e| CliError::io(p, e));
        let task_formula = |f: &str| parse_ltl(f).map_err(|e| CliError::Usage(e.to_string()));
        let ids_dra = |src: &IdsSource| -> Result<Dra, CliError> {
            match src {
                IdsSource::Params(p) => translate_reachability(&build_ids(p.m, p.n, p.extended))
                    .map_err(|e| CliError::Usage(e.to_string())),
                IdsSource::Hoa(path) => parse_hoa(&read(path)?).map_err(|e| CliError::Usage(e.to_string())),
            }
        };
        Ok(match (&self.ids, &self.task) {
            (None, Some(TaskSource::Hoa(p))) => WinningCondition::Hoa(read(p)?),
            (None, Some(TaskSource::Ltl(f))) => WinningCondition::Ltl(task_formula(f)?),
            (Some(IdsSource::Params(p)), Some(TaskSource::Ltl(f))) => {
                WinningCondition::Ltl(build_win(build_ids(p.m, p.n, p.extended), task_formula(f)?))
            }
            (Some(IdsSource::Params(p)), Some(TaskSource::Hoa(path))) => WinningCondition::Union {
                ids: build_ids(p.m, p.n, p.extended),
                task_hoa: read(path)?,
            },
            (Some(ids), task) => {
                let a = ids_dra(ids)?;
                let b = match task {
                    None => return Ok(WinningCondition::Dra(a)),
                    Some(TaskSource::Hoa(p)) => parse_hoa(&read(p)?),
                    Some(TaskSource::Ltl(f)) => translate_reachability(&task_formula(f)?),
                }
                .map_err(|e| CliError::Usage(e.to_string()))?;
                let u = if a.is_cosafety() {
                    dra_union_cosafety(&a, &b)
                } else {
                    dra_union(&a, &b)
                };
                WinningCondition::Dra(u.map_err(|e| CliError::Usage(e.to_string()))?)
            }
            (None, None) => return Err(CliError::Usage("no task and no IDS given".into())),
        })
    }

    /// Learning parameters for this invocation.
    pub fn budgeted(&self, full: bool) -> LearnConfig {
        let mut c = self.learn.clone();
        if !full {
            c.episodes = self.quick.0;
            c.steps_per_episode = self.quick.1;
        }
        c
    }
}
