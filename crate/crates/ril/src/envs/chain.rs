//! Three-state deterministic chain used as a convergence and evaluation
//! oracle: small per-step temptation reward for retreating, large terminal
//! reward for walking the chain forward.

use super::{EnvError, EnvSpec, Environment, Observation, ObsView, StepResult};
use crate::rules::ActionId;

pub const FORWARD: ActionId = ActionId(0);
pub const BACK: ActionId = ActionId(1);

pub const NUM_STATES: usize = 3;
pub const GOAL_REWARD: f64 = 10.0;
pub const BACK_REWARD: f64 = 0.1;
pub const MAX_STEPS: u32 = 50;

pub struct ChainMdp {
    spec: EnvSpec,
    state: usize,
    steps: u32,
    done: bool,
}

impl ChainMdp {
    pub fn new() -> Self {
        let spec = EnvSpec {
            name: "chain".into(),
            action_labels: vec!["forward", "back"],
            feature_dim: 1,
            max_episode_steps: MAX_STEPS,
            constants: vec![
                ("states", NUM_STATES as f64),
                ("goal_reward", GOAL_REWARD),
                ("back_reward", BACK_REWARD),
            ],
        };
        ChainMdp {
            spec,
            state: 0,
            steps: 0,
            done: true,
        }
    }

    fn observe(&self) -> Observation {
        Observation {
            features: vec![self.state as f64],
            view: ObsView::Plain,
        }
    }

    /// Transition function exposed for oracle computations:
    /// `(next_state, reward, terminal)`.
    pub fn dynamics(state: usize, action: ActionId) -> (usize, f64, bool) {
        match action {
            FORWARD => {
                if state + 1 == NUM_STATES {
                    (state, GOAL_REWARD, true)
                } else {
                    (state + 1, 0.0, false)
                }
            }
            BACK => (state.saturating_sub(1), BACK_REWARD, false),
            _ => unreachable!("two-action environment"),
        }
    }
}

impl Default for ChainMdp {
    fn default() -> Self {
        ChainMdp::new()
    }
}

impl Environment for ChainMdp {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _seed: u64) -> Observation {
        self.state = 0;
        self.steps = 0;
        self.done = false;
        self.observe()
    }

    fn step(&mut self, action: ActionId) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        if !self.spec.is_valid_action(action) {
            return Err(EnvError::InvalidAction(action));
        }
        let (next, reward, mut terminal) = Self::dynamics(self.state, action);
        self.state = next;
        self.steps += 1;
        if self.steps >= self.spec.max_episode_steps {
            terminal = true;
        }
        self.done = terminal;
        Ok(StepResult {
            obs: self.observe(),
            reward,
            terminal,
        })
    }
}
