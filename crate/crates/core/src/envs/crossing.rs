//! 9×9 SimpleCrossing: reach the goal in the far corner through gaps in
//! full-span interior walls.
//!
//! Coordinates are `(col, row)` with row growing downwards. Interior walls
//! sit on even coordinates, their single gap on an odd one; the start `(1, 1)`
//! and goal `(7, 7)` are odd–odd and therefore never covered.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::{check_action, EnvName, EnvSpec, Environment, StepResult};
use crate::error::{Error, Result};

pub const GRID_SIZE: usize = 9;
pub const VIEW_SIZE: usize = 7;
const START: (usize, usize) = (1, 1);
const GOAL: (usize, usize) = (GRID_SIZE - 2, GRID_SIZE - 2);
const WALL_COORDS: [usize; 3] = [2, 4, 6];
const GAP_COORDS: [usize; 4] = [1, 3, 5, 7];
const MAX_LAYOUT_ATTEMPTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Empty,
    Wall,
    Goal,
}

impl Cell {
    fn code(self) -> f64 {
        match self {
            Cell::Empty => 1.0,
            Cell::Wall => 2.0,
            Cell::Goal => 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    East,
    South,
    West,
    North,
}

impl Direction {
    fn index(self) -> usize {
        self as usize
    }

    fn from_index(i: usize) -> Self {
        [Direction::East, Direction::South, Direction::West, Direction::North][i % 4]
    }

    pub fn left(self) -> Self {
        Self::from_index(self.index() + 3)
    }

    pub fn right(self) -> Self {
        Self::from_index(self.index() + 1)
    }

    /// Unit step `(dcol, drow)`.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
            Direction::North => (0, -1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Vertical,
    Horizontal,
}

/// One interior wall: its even coordinate and the odd coordinate of its gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WallLine {
    pub orientation: Orientation,
    pub at: usize,
    pub gap: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    /// Indexed `[row][col]`.
    pub grid: [[Cell; GRID_SIZE]; GRID_SIZE],
    pub agent_pos: (usize, usize),
    pub agent_dir: Direction,
    pub step_count: usize,
    pub n_crossings: usize,
    pub walls: Vec<WallLine>,
}

impl GridState {
    /// Random solvable layout with `n_crossings` interior walls of alternating orientation.
    pub fn generate<R: Rng + ?Sized>(rng: &mut R, n_crossings: usize) -> Result<Self> {
        if !(1..=WALL_COORDS.len()).contains(&n_crossings) {
            return Err(Error::config(format!(
                "n_crossings must be 1..={} on a {GRID_SIZE}x{GRID_SIZE} grid, got {n_crossings}",
                WALL_COORDS.len()
            )));
        }
        for _ in 0..MAX_LAYOUT_ATTEMPTS {
            let first = if rng.gen::<bool>() {
                Orientation::Vertical
            } else {
                Orientation::Horizontal
            };
            let n_first = n_crossings.div_ceil(2);
            let n_second = n_crossings / 2;
            let pick = |rng: &mut R, k: usize| -> Vec<usize> {
                WALL_COORDS.choose_multiple(rng, k).copied().collect()
            };
            let first_at = pick(rng, n_first);
            let second_at = pick(rng, n_second);
            let second = match first {
                Orientation::Vertical => Orientation::Horizontal,
                Orientation::Horizontal => Orientation::Vertical,
            };
            let mut walls = Vec::with_capacity(n_crossings);
            for i in 0..n_crossings {
                let (orientation, at) = if i % 2 == 0 {
                    (first, first_at[i / 2])
                } else {
                    (second, second_at[i / 2])
                };
                let gap = *GAP_COORDS.choose(rng).expect("non-empty");
                walls.push(WallLine { orientation, at, gap });
            }
            let state = Self::from_walls(&walls);
            if state.shortest_path_len().is_some() {
                return Ok(Self {
                    n_crossings,
                    ..state
                });
            }
        }
        Err(Error::config(format!(
            "no solvable layout with {n_crossings} crossings after {MAX_LAYOUT_ATTEMPTS} attempts"
        )))
    }

    /// Builds the grid for an explicit wall list (no solvability check).
    pub fn from_walls(walls: &[WallLine]) -> Self {
        let mut grid = [[Cell::Empty; GRID_SIZE]; GRID_SIZE];
        for i in 0..GRID_SIZE {
            grid[0][i] = Cell::Wall;
            grid[GRID_SIZE - 1][i] = Cell::Wall;
            grid[i][0] = Cell::Wall;
            grid[i][GRID_SIZE - 1] = Cell::Wall;
        }
        for w in walls {
            for k in 1..GRID_SIZE - 1 {
                if k == w.gap {
                    continue;
                }
                match w.orientation {
                    Orientation::Vertical => grid[k][w.at] = Cell::Wall,
                    Orientation::Horizontal => grid[w.at][k] = Cell::Wall,
                }
            }
        }
        grid[GOAL.1][GOAL.0] = Cell::Goal;
        Self {
            grid,
            agent_pos: START,
            agent_dir: Direction::East,
            step_count: 0,
            n_crossings: walls.len(),
            walls: walls.to_vec(),
        }
    }

    pub fn cell(&self, col: i64, row: i64) -> Option<Cell> {
        let n = GRID_SIZE as i64;
        if (0..n).contains(&col) && (0..n).contains(&row) {
            Some(self.grid[row as usize][col as usize])
        } else {
            None
        }
    }

    /// Length of the shortest 4-connected path from the agent to the goal.
    pub fn shortest_path_len(&self) -> Option<usize> {
        let mut dist = [[usize::MAX; GRID_SIZE]; GRID_SIZE];
        let mut queue = VecDeque::from([self.agent_pos]);
        dist[self.agent_pos.1][self.agent_pos.0] = 0;
        while let Some((c, r)) = queue.pop_front() {
            if self.grid[r][c] == Cell::Goal {
                return Some(dist[r][c]);
            }
            for d in [Direction::East, Direction::South, Direction::West, Direction::North] {
                let (dc, dr) = d.delta();
                let (nc, nr) = (c as i64 + dc, r as i64 + dr);
                match self.cell(nc, nr) {
                    Some(Cell::Wall) | None => {}
                    Some(_) => {
                        let (nc, nr) = (nc as usize, nr as usize);
                        if dist[nr][nc] == usize::MAX {
                            dist[nr][nc] = dist[r][c] + 1;
                            queue.push_back((nc, nr));
                        }
                    }
                }
            }
        }
        None
    }

    /// The 7×7 window ahead of the agent, three channels per cell.
    ///
    /// Window row 0 is farthest ahead, row 6 holds the agent at column 3;
    /// columns run from the agent's left to its right. The result is
    /// flattened as `(row · 7 + col) · 3 + channel`.
    pub fn observe(&self) -> Vec<f64> {
        let (fc, fr) = self.agent_dir.delta();
        let (rc, rr) = self.agent_dir.right().delta();
        let half = (VIEW_SIZE / 2) as i64;
        let mut out = vec![0.0; VIEW_SIZE * VIEW_SIZE * 3];
        for row in 0..VIEW_SIZE {
            for col in 0..VIEW_SIZE {
                let ahead = (VIEW_SIZE - 1 - row) as i64;
                let lateral = col as i64 - half;
                let c = self.agent_pos.0 as i64 + fc * ahead + rc * lateral;
                let r = self.agent_pos.1 as i64 + fr * ahead + rr * lateral;
                if let Some(cell) = self.cell(c, r) {
                    out[(row * VIEW_SIZE + col) * 3] = cell.code();
                }
            }
        }
        out
    }
}

pub struct Crossing {
    spec: EnvSpec,
    n_crossings: usize,
    state: GridState,
    done: bool,
}

impl Crossing {
    pub fn new(n_crossings: usize, max_steps: usize) -> Result<Self> {
        if !(1..=WALL_COORDS.len()).contains(&n_crossings) {
            return Err(Error::config(format!("unsupported crossing count {n_crossings}")));
        }
        Ok(Self {
            spec: EnvName::Crossing(n_crossings).spec(max_steps),
            n_crossings,
            state: GridState::from_walls(&[]),
            done: true,
        })
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    pub fn set_state(&mut self, state: GridState) {
        self.state = state;
        self.done = false;
    }

    pub fn try_reset(&mut self, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        self.state = GridState::generate(rng, self.n_crossings)?;
        self.done = false;
        Ok(self.state.observe())
    }
}

impl Environment for Crossing {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.try_reset(rng)
            .expect("crossing count validated at construction")
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::usage("crossing: step called on a finished episode"));
        }
        check_action(action, &self.spec)?;
        let s = &mut self.state;
        s.step_count += 1;
        let mut terminal = false;
        let mut reward = 0.0;
        match action {
            0 => s.agent_dir = s.agent_dir.left(),
            1 => s.agent_dir = s.agent_dir.right(),
            2 => {
                let (dc, dr) = s.agent_dir.delta();
                let (c, r) = (s.agent_pos.0 as i64 + dc, s.agent_pos.1 as i64 + dr);
                match s.cell(c, r) {
                    Some(Cell::Wall) | None => {}
                    Some(cell) => {
                        s.agent_pos = (c as usize, r as usize);
                        if cell == Cell::Goal {
                            terminal = true;
                            reward = 1.0 - 0.9 * (s.step_count as f64 / self.spec.max_steps as f64);
                        }
                    }
                }
            }
            // pickup, drop, toggle: nothing to act on in this task
            _ => {}
        }
        let truncated = s.step_count >= self.spec.max_steps;
        self.done = terminal || truncated;
        Ok(StepResult {
            obs: s.observe(),
            reward,
            terminal,
            truncated,
        })
    }
}
