//! Deterministic-given-seed, vector-state game environments behind one
//! interface.
//!
//! Observations carry both the normalized feature vector fed to the learner
//! and a typed view consumed by rule preconditions (gap clearances, nearest
//! enemy side, ball-paddle offset, trap adjacency). Each environment's
//! geometry and reward constants live in its [`EnvSpec`] and are echoed into
//! metrics file headers.

pub mod breakout;
pub mod chain;
pub mod flappy;
pub mod gridworld;
pub mod spacewar;

pub use breakout::BreakoutLite;
pub use chain::ChainMdp;
pub use flappy::FlappyLite;
pub use gridworld::{GridWorld, Layout};
pub use spacewar::SpaceWarLite;

use thiserror::Error;

use crate::rules::ActionId;

/// Static description of an environment: labeled action space, feature
/// dimension, step cap, and every reward/geometry constant.
#[derive(Clone, Debug)]
pub struct EnvSpec {
    pub name: String,
    pub action_labels: Vec<&'static str>,
    pub feature_dim: usize,
    pub max_episode_steps: u32,
    pub constants: Vec<(&'static str, f64)>,
}

impl EnvSpec {
    pub fn action_count(&self) -> usize {
        self.action_labels.len()
    }

    pub fn actions(&self) -> impl Iterator<Item = (ActionId, &'static str)> + '_ {
        self.action_labels
            .iter()
            .enumerate()
            .map(|(i, &label)| (ActionId(i as u8), label))
    }

    pub fn action_label(&self, a: ActionId) -> Option<&'static str> {
        self.action_labels.get(a.index()).copied()
    }

    pub fn is_valid_action(&self, a: ActionId) -> bool {
        a.index() < self.action_labels.len()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("episode already terminal; reset before stepping")]
    EpisodeOver,
    #[error("action {0:?} outside the action space")]
    InvalidAction(ActionId),
}

/// Typed accessor views backing rule preconditions.
#[derive(Clone, Debug, PartialEq)]
pub enum ObsView {
    Grid(GridView),
    Flappy(FlappyView),
    SpaceWar(SpaceWarView),
    Breakout(BreakoutView),
    Plain,
}

/// Agent cell plus trap adjacency in the four move directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridView {
    pub x: i32,
    pub y: i32,
    pub trap_up: bool,
    pub trap_down: bool,
    pub trap_left: bool,
    pub trap_right: bool,
}

impl GridView {
    pub fn near_trap(&self) -> bool {
        self.trap_up || self.trap_down || self.trap_left || self.trap_right
    }
}

/// Bird geometry relative to the pipe pair being approached or crossed.
///
/// Clearances measure the space between the bird and the gap edges:
/// `clearance_below` to the top of the ground-side pipe, `clearance_above`
/// to the bottom of the ceiling-side pipe. Negative clearance means the
/// bird is already past that edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlappyView {
    pub crossing: bool,
    pub clearance_above: f64,
    pub clearance_below: f64,
    pub bird_size: f64,
}

/// Horizontal offset of the nearest live enemy (`enemy_col - agent_col`),
/// ties broken to the left; `None` when no enemy is alive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceWarView {
    pub nearest_enemy_dx: Option<i32>,
}

/// Horizontal offset of the ball from the paddle center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BreakoutView {
    pub ball_dx: i32,
}

/// Feature vector plus the typed view rule preconditions read.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub features: Vec<f64>,
    pub view: ObsView,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    pub terminal: bool,
}

pub trait Environment {
    fn spec(&self) -> &EnvSpec;

    /// Fresh start state; every stochastic element (pipe gaps, spawn
    /// columns, serve direction) is driven by `seed`.
    fn reset(&mut self, seed: u64) -> Observation;

    /// Advance one tick. Stepping a terminal episode is a usage error.
    fn step(&mut self, action: ActionId) -> Result<StepResult, EnvError>;
}

/// Constructor overrides read from the run config.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnvParams {
    /// GridWorld layout name ("default" or "small").
    pub layout: Option<String>,
    /// SpaceWarLite strip width.
    pub width: Option<usize>,
}

pub const ENV_NAMES: &[&str] = &["gridworld", "flappy", "spacewar", "breakout", "chain"];

pub fn make_env(name: &str, params: &EnvParams) -> Result<Box<dyn Environment>, String> {
    match name {
        "gridworld" => {
            let layout_name = params.layout.as_deref().unwrap_or("default");
            let layout = Layout::named(layout_name).ok_or_else(|| {
                format!("unknown gridworld layout {layout_name:?}; valid: default, small")
            })?;
            Ok(Box::new(GridWorld::new(layout)))
        }
        "flappy" => Ok(Box::new(FlappyLite::new())),
        "spacewar" => Ok(Box::new(SpaceWarLite::new(
            params.width.unwrap_or(spacewar::DEFAULT_WIDTH),
        ))),
        "breakout" => Ok(Box::new(BreakoutLite::new())),
        "chain" => Ok(Box::new(ChainMdp::new())),
        other => Err(format!(
            "unknown environment {other:?}; valid: {}",
            ENV_NAMES.join(", ")
        )),
    }
}
