//! Fixed-strategy attack scenarios on grid worlds: both players repeat one
//! action and the probability of a reachability event is computed on the
//! induced chain.

use std::path::Path;

use serde::Deserialize;

use super::CliError;
use crate::automata::translate_reachability;
use crate::game::{build_grid_game, load_grid, Action, Cell, GridGame, Owner};
use crate::learn::{align_alphabet, FiniteMemoryStrategy};
use crate::ltl::parse_ltl;
use crate::product::{LabelTiming, ProductGame};
use crate::verify::{induced_mc_from, rabin_sat_prob, MarkovChain};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    grid: String,
    event: String,
    start: String,
    controller: String,
    attacker: String,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: GridGame,
    pub event: String,
    pub start: Cell,
    pub controller: Action,
    pub attacker: Action,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub probability: f64,
    pub chain: MarkovChain,
}

fn action(s: &str) -> Result<Action, CliError> {
    Action::from_name(s).ok_or_else(|| CliError::Usage(format!("unknown action {s:?}")))
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let doc: ScenarioDoc =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("scenario: {}", e.message())))?;
        let gpath = path.parent().unwrap_or(Path::new(".")).join(&doc.grid);
        let gtext = std::fs::read_to_string(&gpath).map_err(|e| CliError::io(&gpath, e))?;
        let spec = load_grid(&gtext).map_err(|e| CliError::Usage(e.to_string()))?;
        let start = doc
            .start
            .split_once(',')
            .and_then(|(r, c)| Some((r.trim().parse().ok()?, c.trim().parse().ok()?)))
            .ok_or_else(|| CliError::Usage(format!("bad start cell {:?}", doc.start)))?;
        spec.check(start).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Self {
            grid: build_grid_game(&spec).map_err(|e| CliError::Usage(e.to_string()))?,
            event: doc.event,
            start,
            controller: action(&doc.controller)?,
            attacker: action(&doc.attacker)?,
        })
    }

    pub fn run(&self) -> Result<ScenarioReport, CliError> {
        let usage = |e: String| CliError::Usage(e);
        let f = parse_ltl(&self.event).map_err(|e| usage(e.to_string()))?;
        let dra = translate_reachability(&f).map_err(|e| usage(e.to_string()))?;
        let dra = align_alphabet(&dra, &self.grid.game).map_err(|e| usage(e.to_string()))?;
        let pg = ProductGame::new(self.grid.game.clone(), dra, LabelTiming::PerTurn)
            .map_err(|e| usage(e.to_string()))?;
        let g = pg.game();
        let constant = |owner: Owner, a: Action| {
            let mut s = FiniteMemoryStrategy::new(owner, pg.num_modes(), g.num_states(), pg.dra().initial());
            for st in g.states_of(owner) {
                for m in 0..pg.num_modes() {
                    s.set(m, st, a.index());
                }
            }
            s
        };
        let mu = constant(Owner::Controller, self.controller);
        let nu = constant(Owner::Attacker, self.attacker);
        let start = pg.enter(self.grid.controller_state(self.start), pg.dra().initial());
        let chain = induced_mc_from(&pg, start, &mu, &nu).map_err(|e| CliError::Internal(e.to_string()))?;
        let probability = rabin_sat_prob(&chain, pg.dra().pairs());
        Ok(ScenarioReport { probability, chain })
    }
}
