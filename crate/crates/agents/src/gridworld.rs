//! Deterministic grid worlds with an exact optimal agent.
//!
//! Goal and pit cells are terminal: entering one collects its reward and ends
//! the episode. Bumping into a wall leaves the agent in place. The value of a
//! terminal cell is reported as its reward.

use std::collections::BTreeMap;
use std::fmt;

use sarfa_core::{score_feature, FeatureStatus, Method, QOracle, QProfile, ScoreBreakdown};
use serde::{Deserialize, Serialize};

use crate::AgentError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Floor,
    Wall,
    Goal(f64),
    Pit(f64),
}

impl Cell {
    fn terminal_reward(self) -> Option<f64> {
        match self {
            Cell::Goal(r) => Some(r),
            Cell::Pit(r) => Some(-r.abs()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GridAction {
    Up,
    Down,
    Left,
    Right,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [GridAction::Up, GridAction::Down, GridAction::Left, GridAction::Right];

    pub fn name(self) -> &'static str {
        match self {
            GridAction::Up => "up",
            GridAction::Down => "down",
            GridAction::Left => "left",
            GridAction::Right => "right",
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            GridAction::Up => (0, -1),
            GridAction::Down => (0, 1),
            GridAction::Left => (-1, 0),
            GridAction::Right => (1, 0),
        }
    }
}

impl fmt::Display for GridAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rectangular world, row-major, `(0, 0)` top left. The outer ring is wall
/// and at least one goal exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridWorld {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    discount: f64,
    step_reward: f64,
}

impl GridWorld {
    pub fn new(width: usize, height: usize, cells: Vec<Cell>, discount: f64, step_reward: f64) -> Result<Self, AgentError> {
        let world = GridWorld {
            width,
            height,
            cells,
            discount,
            step_reward,
        };
        world.validate()?;
        Ok(world)
    }

    /// `#` wall, `.` floor, `G` goal worth `goal`, `X` pit costing `pit`.
    pub fn from_ascii(rows: &[&str], goal: f64, pit: f64, discount: f64, step_reward: f64) -> Result<Self, AgentError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut cells = Vec::with_capacity(width * height);
        for row in rows {
            if row.chars().count() != width {
                return Err(AgentError::Config("ragged gridworld rows".into()));
            }
            for c in row.chars() {
                cells.push(match c {
                    '#' => Cell::Wall,
                    '.' => Cell::Floor,
                    'G' => Cell::Goal(goal),
                    'X' => Cell::Pit(pit),
                    other => return Err(AgentError::Config(format!("unknown gridworld cell `{other}`"))),
                });
            }
        }
        GridWorld::new(width, height, cells, discount, step_reward)
    }

    fn validate(&self) -> Result<(), AgentError> {
        let err = |m: String| Err(AgentError::Config(m));
        if self.width < 2 || self.height < 2 {
            return err(format!("gridworld must be at least 2x2, got {}x{}", self.width, self.height));
        }
        if self.cells.len() != self.width * self.height {
            return err("cell count does not match dimensions".into());
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return err(format!("discount must lie in (0, 1), got {}", self.discount));
        }
        if !self.step_reward.is_finite() {
            return err("step reward must be finite".into());
        }
        for y in 0..self.height {
            for x in 0..self.width {
                let border = x == 0 || y == 0 || x + 1 == self.width || y + 1 == self.height;
                if border && self.cell(x, y) != Cell::Wall {
                    return err(format!("border cell ({x}, {y}) must be a wall"));
                }
            }
        }
        if !self.cells.iter().any(|c| matches!(c, Cell::Goal(_))) {
            return err("gridworld needs at least one goal".into());
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn cell(&self, x: usize, y: usize) -> Cell {
        self.cells[y * self.width + x]
    }

    /// The world with cell `(x, y)` turned into wall.
    pub fn blank(&self, x: usize, y: usize) -> Result<GridWorld, AgentError> {
        if x >= self.width || y >= self.height {
            return Err(AgentError::InvalidState(format!("({x}, {y}) is outside the world")));
        }
        if self.cell(x, y) == Cell::Wall {
            return Err(AgentError::InvalidState(format!("({x}, {y}) is already a wall")));
        }
        let mut next = self.clone();
        next.cells[y * self.width + x] = Cell::Wall;
        next.validate().map_err(|e| AgentError::InvalidState(e.to_string()))?;
        Ok(next)
    }

    fn step(&self, x: usize, y: usize, action: GridAction) -> (usize, usize) {
        let (dx, dy) = action.delta();
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        if nx < 0 || ny < 0 || nx as usize >= self.width || ny as usize >= self.height {
            return (x, y);
        }
        let (nx, ny) = (nx as usize, ny as usize);
        if self.cell(nx, ny) == Cell::Wall {
            (x, y)
        } else {
            (nx, ny)
        }
    }
}

/// Optimal action values per cell. Walls and terminal cells have no Q row.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    width: usize,
    q: Vec<Option<[f64; 4]>>,
    v: Vec<f64>,
}

impl QTable {
    pub fn q(&self, x: usize, y: usize) -> Option<[f64; 4]> {
        self.q[y * self.width + x]
    }

    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.v[y * self.width + x]
    }

    /// Largest violation of the Bellman optimality equation.
    pub fn bellman_residual(&self, world: &GridWorld) -> f64 {
        let mut worst: f64 = 0.0;
        for y in 0..world.height {
            for x in 0..world.width {
                let Some(row) = self.q(x, y) else { continue };
                for (i, a) in GridAction::ALL.into_iter().enumerate() {
                    let target = backup(world, &self.v, x, y, a);
                    worst = worst.max((row[i] - target).abs());
                }
                let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max((self.value(x, y) - max).abs());
            }
        }
        worst
    }
}

fn backup(world: &GridWorld, v: &[f64], x: usize, y: usize, a: GridAction) -> f64 {
    let (nx, ny) = world.step(x, y, a);
    let next = world.cell(nx, ny);
    world.step_reward
        + match next.terminal_reward() {
            Some(r) => r,
            None => world.discount * v[ny * world.width + nx],
        }
}

/// Value iteration until successive sweeps differ by less than `tolerance`
/// in sup norm.
pub fn solve_gridworld(world: &GridWorld, tolerance: f64) -> QTable {
    assert!(tolerance > 0.0, "tolerance must be positive");
    let n = world.width * world.height;
    let mut v: Vec<f64> = world
        .cells
        .iter()
        .map(|c| c.terminal_reward().unwrap_or(0.0))
        .collect();
    loop {
        let mut next = v.clone();
        let mut delta: f64 = 0.0;
        for y in 0..world.height {
            for x in 0..world.width {
                if world.cell(x, y) != Cell::Floor {
                    continue;
                }
                let best = GridAction::ALL
                    .into_iter()
                    .map(|a| backup(world, &v, x, y, a))
                    .fold(f64::NEG_INFINITY, f64::max);
                delta = delta.max((best - v[y * world.width + x]).abs());
                next[y * world.width + x] = best;
            }
        }
        v = next;
        if delta < tolerance {
            break;
        }
    }
    let q = (0..n)
        .map(|i| {
            let (x, y) = (i % world.width, i / world.width);
            (world.cell(x, y) == Cell::Floor).then(|| GridAction::ALL.map(|a| backup(world, &v, x, y, a)))
        })
        .collect();
    QTable { width: world.width, q, v }
}

/// Agent position inside a world.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub world: GridWorld,
    pub agent: (usize, usize),
}

/// Exact optimal agent. The table for the world it was built with is
/// precomputed; other worlds are solved on demand.
pub struct GridworldOracle {
    base: GridWorld,
    table: QTable,
    tolerance: f64,
}

impl GridworldOracle {
    pub const DEFAULT_TOLERANCE: f64 = 1e-12;

    pub fn new(world: GridWorld) -> Self {
        Self::with_tolerance(world, Self::DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(world: GridWorld, tolerance: f64) -> Self {
        let table = solve_gridworld(&world, tolerance);
        GridworldOracle {
            base: world,
            table,
            tolerance,
        }
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }
}

impl QOracle<GridState> for GridworldOracle {
    type Error = AgentError;

    fn evaluate(&mut self, state: &GridState) -> Result<QProfile, AgentError> {
        let (x, y) = state.agent;
        if x >= state.world.width || y >= state.world.height {
            return Err(AgentError::InvalidState(format!("agent at ({x}, {y}) is outside the world")));
        }
        match state.world.cell(x, y) {
            Cell::Floor => {}
            Cell::Wall => return Err(AgentError::InvalidState(format!("agent at ({x}, {y}) is inside a wall"))),
            _ => return Err(AgentError::NoLegalMoves),
        }
        let solved;
        let table = if state.world == self.base {
            &self.table
        } else {
            solved = solve_gridworld(&state.world, self.tolerance);
            &solved
        };
        let row = table.q(x, y).expect("floor cells have Q rows");
        QProfile::new(
            format!("{x},{y}"),
            GridAction::ALL.iter().zip(row).map(|(a, q)| (a.name(), q)),
        )
        .map_err(|e| AgentError::InvalidState(e.to_string()))
    }
}

/// Saliency of every interior cell that can be blanked (turned into wall)
/// for `action` taken at `state.agent`. The agent's own cell is not a
/// feature; cells whose blanking is invalid (e.g. the last goal) are skipped.
pub fn compute_grid_saliency<O: QOracle<GridState>>(
    state: &GridState,
    action: GridAction,
    oracle: &mut O,
    method: Method,
) -> Result<BTreeMap<(usize, usize), ScoreBreakdown>, O::Error> {
    let original = oracle.evaluate(state)?;
    let mut out = BTreeMap::new();
    for y in 1..state.world.height - 1 {
        for x in 1..state.world.width - 1 {
            if (x, y) == state.agent || state.world.cell(x, y) == Cell::Wall {
                continue;
            }
            let id = format!("{x},{y}");
            let skipped = || ScoreBreakdown::skipped(id.clone(), FeatureStatus::SkippedInvalidPerturbation);
            let breakdown = match state.world.blank(x, y) {
                Err(_) => skipped(),
                Ok(world) => match oracle.evaluate(&GridState { world, agent: state.agent }) {
                    Err(_) => skipped(),
                    Ok(q) => score_feature(method, &original, &q.with_state_id(id.clone()), action.name(), 1.0)
                        .unwrap_or_else(|_| skipped()),
                },
            };
            out.insert((x, y), breakdown);
        }
    }
    Ok(out)
}
