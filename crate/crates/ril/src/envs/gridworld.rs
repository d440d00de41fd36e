//! Grid navigation with walls, terminal traps, and one goal.
//!
//! Moves cost -1; walking into a wall (or off the edge) keeps position and
//! still costs -1; entering a trap ends the episode at -600; reaching the
//! goal ends it at +100.

use super::{EnvError, EnvSpec, Environment, GridView, Observation, ObsView, StepResult};
use crate::rules::ActionId;

pub const UP: ActionId = ActionId(0);
pub const DOWN: ActionId = ActionId(1);
pub const LEFT: ActionId = ActionId(2);
pub const RIGHT: ActionId = ActionId(3);

pub const MOVE_REWARD: f64 = -1.0;
pub const TRAP_REWARD: f64 = -600.0;
pub const GOAL_REWARD: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Empty,
    Wall,
    Trap,
    Goal,
}

/// Rectangular grid parsed from an ASCII map: `S` start, `#` wall, `T` trap,
/// `G` goal, `.` empty.
#[derive(Clone, Debug)]
pub struct Layout {
    pub name: &'static str,
    width: i32,
    height: i32,
    cells: Vec<Cell>,
    start: (i32, i32),
    max_episode_steps: u32,
}

const DEFAULT_MAP: &str = "\
S.........
.##.##.#..
.#..T..#..
.#.###.##.
...#T...#.
##.#.##.#.
T..#.#..#.
.#.#.#.#..
.#...#T#..
...#....G.
";

const SMALL_MAP: &str = "\
S....
.#T#.
...#.
T#...
...#G
";

impl Layout {
    pub fn parse(
        name: &'static str,
        map: &str,
        max_episode_steps: u32,
    ) -> Result<Layout, String> {
        let rows: Vec<&str> = map.lines().filter(|l| !l.is_empty()).collect();
        let height = rows.len() as i32;
        if height == 0 {
            return Err("empty map".into());
        }
        let width = rows[0].chars().count() as i32;
        let mut cells = Vec::with_capacity((width * height) as usize);
        let mut start = None;
        let mut goals = 0;
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() as i32 != width {
                return Err(format!("ragged row {y}"));
            }
            for (x, ch) in row.chars().enumerate() {
                cells.push(match ch {
                    '.' => Cell::Empty,
                    '#' => Cell::Wall,
                    'T' => Cell::Trap,
                    'G' => {
                        goals += 1;
                        Cell::Goal
                    }
                    'S' => {
                        if start.replace((x as i32, y as i32)).is_some() {
                            return Err("multiple start cells".into());
                        }
                        Cell::Empty
                    }
                    other => return Err(format!("unknown cell {other:?}")),
                });
            }
        }
        let start = start.ok_or("no start cell")?;
        if goals == 0 {
            return Err("no goal cell".into());
        }
        let layout = Layout {
            name,
            width,
            height,
            cells,
            start,
            max_episode_steps,
        };
        // A cell trapped on all four sides would leave the safety rule with
        // an empty recommendation; reject such maps outright.
        for y in 0..height {
            for x in 0..width {
                let walkable = matches!(layout.cell(x, y), Cell::Empty);
                if walkable
                    && [(0, -1), (0, 1), (-1, 0), (1, 0)]
                        .iter()
                        .all(|&(dx, dy)| layout.cell(x + dx, y + dy) == Cell::Trap)
                {
                    return Err(format!("cell ({x}, {y}) is surrounded by traps"));
                }
            }
        }
        Ok(layout)
    }

    pub fn named(name: &str) -> Option<Layout> {
        match name {
            "default" => Some(Layout::parse("default", DEFAULT_MAP, 200).expect("builtin map")),
            "small" => Some(Layout::parse("small", SMALL_MAP, 100).expect("builtin map")),
            _ => None,
        }
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn start(&self) -> (i32, i32) {
        self.start
    }

    pub fn max_episode_steps(&self) -> u32 {
        self.max_episode_steps
    }

    /// Out-of-bounds coordinates read as walls.
    pub fn cell(&self, x: i32, y: i32) -> Cell {
        if x < 0 || y < 0 || x >= self.width || y >= self.height {
            Cell::Wall
        } else {
            self.cells[(y * self.width + x) as usize]
        }
    }

    /// Walkable (non-wall, non-trap, non-goal) cells, for exhaustive sweeps.
    pub fn walkable_cells(&self) -> Vec<(i32, i32)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.cell(x, y) == Cell::Empty {
                    out.push((x, y));
                }
            }
        }
        out
    }
}

pub struct GridWorld {
    layout: Layout,
    spec: EnvSpec,
    pos: (i32, i32),
    steps: u32,
    done: bool,
}

fn move_delta(action: ActionId) -> Option<(i32, i32)> {
    match action {
        UP => Some((0, -1)),
        DOWN => Some((0, 1)),
        LEFT => Some((-1, 0)),
        RIGHT => Some((1, 0)),
        _ => None,
    }
}

impl GridWorld {
    pub fn new(layout: Layout) -> Self {
        let spec = EnvSpec {
            name: "gridworld".into(),
            action_labels: vec!["up", "down", "left", "right"],
            feature_dim: 2,
            max_episode_steps: layout.max_episode_steps(),
            constants: vec![
                ("width", layout.width() as f64),
                ("height", layout.height() as f64),
                ("move_reward", MOVE_REWARD),
                ("trap_reward", TRAP_REWARD),
                ("goal_reward", GOAL_REWARD),
            ],
        };
        let start = layout.start();
        GridWorld {
            layout,
            spec,
            pos: start,
            steps: 0,
            done: true,
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn observe_at(&self, x: i32, y: i32) -> Observation {
        let view = GridView {
            x,
            y,
            trap_up: self.layout.cell(x, y - 1) == Cell::Trap,
            trap_down: self.layout.cell(x, y + 1) == Cell::Trap,
            trap_left: self.layout.cell(x - 1, y) == Cell::Trap,
            trap_right: self.layout.cell(x + 1, y) == Cell::Trap,
        };
        let features = vec![
            2.0 * x as f64 / (self.layout.width() - 1).max(1) as f64 - 1.0,
            2.0 * y as f64 / (self.layout.height() - 1).max(1) as f64 - 1.0,
        ];
        Observation {
            features,
            view: ObsView::Grid(view),
        }
    }
}

impl Environment for GridWorld {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _seed: u64) -> Observation {
        // Fixed layout and start cell: nothing stochastic here.
        self.pos = self.layout.start();
        self.steps = 0;
        self.done = false;
        self.observe_at(self.pos.0, self.pos.1)
    }

    fn step(&mut self, action: ActionId) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let (dx, dy) = move_delta(action).ok_or(EnvError::InvalidAction(action))?;
        let target = (self.pos.0 + dx, self.pos.1 + dy);
        let (reward, mut terminal) = match self.layout.cell(target.0, target.1) {
            Cell::Wall => (MOVE_REWARD, false),
            Cell::Empty => {
                self.pos = target;
                (MOVE_REWARD, false)
            }
            Cell::Trap => {
                self.pos = target;
                (TRAP_REWARD, true)
            }
            Cell::Goal => {
                self.pos = target;
                (GOAL_REWARD, true)
            }
        };
        self.steps += 1;
        if self.steps >= self.spec.max_episode_steps {
            terminal = true;
        }
        self.done = terminal;
        Ok(StepResult {
            obs: self.observe_at(self.pos.0, self.pos.1),
            reward,
            terminal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    /// Shortest safe path length from start to any goal, walls and traps
    /// impassable. Independent of the environment's step logic.
    pub fn bfs_shortest_path(layout: &Layout) -> Option<u32> {
        let mut seen = vec![false; (layout.width() * layout.height()) as usize];
        let mut queue = VecDeque::new();
        queue.push_back((layout.start(), 0u32));
        seen[(layout.start().1 * layout.width() + layout.start().0) as usize] = true;
        while let Some(((x, y), dist)) = queue.pop_front() {
            for (dx, dy) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
                let (nx, ny) = (x + dx, y + dy);
                match layout.cell(nx, ny) {
                    Cell::Goal => return Some(dist + 1),
                    Cell::Empty => {
                        let idx = (ny * layout.width() + nx) as usize;
                        if !seen[idx] {
                            seen[idx] = true;
                            queue.push_back(((nx, ny), dist + 1));
                        }
                    }
                    Cell::Wall | Cell::Trap => {}
                }
            }
        }
        None
    }

    #[test]
    fn both_builtin_layouts_are_solvable() {
        for name in ["default", "small"] {
            let layout = Layout::named(name).unwrap();
            assert!(
                bfs_shortest_path(&layout).is_some(),
                "{name} has no safe path"
            );
        }
    }

    #[test]
    fn reset_places_agent_at_start_with_zero_steps() {
        let mut env = GridWorld::new(Layout::named("small").unwrap());
        let obs = env.reset(0);
        match obs.view {
            ObsView::Grid(v) => {
                assert_eq!((v.x, v.y), env.layout().start());
            }
            _ => panic!("wrong view"),
        }
        assert_eq!(env.steps, 0);
    }

    #[test]
    fn plain_move_costs_one() {
        let mut env = GridWorld::new(Layout::named("small").unwrap());
        env.reset(0);
        let r = env.step(RIGHT).unwrap();
        assert_eq!(r.reward, MOVE_REWARD);
        assert!(!r.terminal);
    }

    #[test]
    fn wall_bump_keeps_position_and_costs_one() {
        let mut env = GridWorld::new(Layout::named("small").unwrap());
        env.reset(0);
        let r = env.step(UP).unwrap(); // off the top edge
        assert_eq!(r.reward, MOVE_REWARD);
        match r.obs.view {
            ObsView::Grid(v) => assert_eq!((v.x, v.y), (0, 0)),
            _ => panic!("wrong view"),
        }
    }

    #[test]
    fn trap_entry_is_terminal_minus_600() {
        // Small map: trap at (2, 1); walk (0,0) -> (1,0) -> (2,0) -> down.
        let mut env = GridWorld::new(Layout::named("small").unwrap());
        env.reset(0);
        env.step(RIGHT).unwrap();
        env.step(RIGHT).unwrap();
        let r = env.step(DOWN).unwrap();
        assert_eq!(r.reward, TRAP_REWARD);
        assert!(r.terminal);
        assert_eq!(env.step(DOWN), Err(EnvError::EpisodeOver));
    }

    #[test]
    fn goal_entry_is_terminal_plus_100() {
        let mut env = GridWorld::new(Layout::named("small").unwrap());
        env.reset(0);
        // Path along the top edge and down the right column to (4,4).
        for action in [RIGHT, RIGHT, RIGHT, RIGHT, DOWN, DOWN, DOWN, DOWN] {
            let r = env.step(action).unwrap();
            if r.terminal {
                assert_eq!(r.reward, GOAL_REWARD);
                return;
            }
        }
        panic!("never reached the goal");
    }

    #[test]
    fn optimal_return_matches_bfs_oracle() {
        let layout = Layout::named("small").unwrap();
        let path_len = bfs_shortest_path(&layout).unwrap();
        // One reward per move: -1 for each of the first path_len - 1 moves,
        // +100 for the final move into the goal.
        let expected_return = GOAL_REWARD + MOVE_REWARD * (path_len - 1) as f64;
        assert_eq!(path_len, 8);
        assert_eq!(expected_return, 93.0);
        // The concrete top-edge/right-column path realizes the BFS length.
        let mut env = GridWorld::new(layout);
        env.reset(0);
        let mut total = 0.0;
        let mut moves = 0;
        for action in [RIGHT, RIGHT, RIGHT, RIGHT, DOWN, DOWN, DOWN, DOWN] {
            let r = env.step(action).unwrap();
            total += r.reward;
            moves += 1;
            if r.terminal {
                break;
            }
        }
        assert_eq!(moves, path_len);
        assert_eq!(total, expected_return);
    }

    #[test]
    fn step_cap_terminates_episode() {
        let mut env = GridWorld::new(Layout::named("small").unwrap());
        env.reset(0);
        let cap = env.spec().max_episode_steps;
        for i in 1..=cap {
            let r = env.step(UP).unwrap(); // bump the wall forever
            assert_eq!(r.terminal, i == cap);
        }
    }

    #[test]
    fn trap_adjacency_view_is_correct() {
        let env = GridWorld::new(Layout::named("small").unwrap());
        // (2, 0): trap directly below at (2, 1).
        match env.observe_at(2, 0).view {
            ObsView::Grid(v) => {
                assert!(v.trap_down && !v.trap_up && !v.trap_left && !v.trap_right);
                assert!(v.near_trap());
            }
            _ => panic!("wrong view"),
        }
        // (1, 0): no adjacent traps ((1,1) is a wall).
        match env.observe_at(1, 0).view {
            ObsView::Grid(v) => assert!(!v.near_trap()),
            _ => panic!("wrong view"),
        }
    }

    #[test]
    fn surrounded_cell_rejected_at_parse() {
        // (2, 1) is walkable but trapped on all four sides.
        let map = "\
S.T.G
.T.T.
..T..
";
        let err = Layout::parse("bad", map, 50);
        assert!(err.is_err());
    }
}
