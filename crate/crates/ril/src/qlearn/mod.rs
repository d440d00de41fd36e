//! Q-learning core: replay memory, epsilon-greedy behavior policy, Bellman
//! targets, squared-error gradient step, and periodic target-network sync.

mod checkpoint;
mod mlp;
mod tabular;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, CheckpointError};
pub use mlp::Mlp;
pub use tabular::TabularQ;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interpose::ActionSource;
use crate::rules::ActionId;

/// One stored experience step.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: ActionId,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

#[derive(Debug, Error)]
pub enum QError {
    #[error("cannot sample from an empty replay memory")]
    EmptyMemory,
    #[error("non-finite loss ({loss}) during gradient step; learning rate likely too high")]
    NonFiniteLoss { loss: f64 },
}

/// FIFO ring of transitions; inserting into a full memory evicts the oldest.
#[derive(Clone, Debug)]
pub struct ReplayMemory {
    capacity: usize,
    buffer: std::collections::VecDeque<Transition>,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayMemory {
            capacity,
            buffer: std::collections::VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, transition: Transition) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(transition);
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.buffer.iter()
    }

    /// Uniform sample with replacement of `batch_size` transitions.
    pub fn sample<R: Rng>(
        &self,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<Vec<Transition>, QError> {
        if self.buffer.is_empty() {
            return Err(QError::EmptyMemory);
        }
        Ok((0..batch_size)
            .map(|_| self.buffer[rng.random_range(0..self.buffer.len())].clone())
            .collect())
    }
}

/// Action-value approximator: exact table or two-layer ReLU perceptron.
#[derive(Clone, Debug, PartialEq)]
pub enum QFunction {
    Tabular(TabularQ),
    Mlp(Mlp),
}

impl QFunction {
    pub fn num_actions(&self) -> usize {
        match self {
            QFunction::Tabular(t) => t.num_actions(),
            QFunction::Mlp(m) => m.output_dim,
        }
    }

    /// Input dimension enforced by the approximator, if it enforces one.
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            QFunction::Tabular(_) => None,
            QFunction::Mlp(m) => Some(m.input_dim),
        }
    }

    /// One value per action; all-zero rows for unseen tabular states.
    pub fn q_values(&self, state: &[f64]) -> Vec<f64> {
        match self {
            QFunction::Tabular(t) => t.q_values(state),
            QFunction::Mlp(m) => m.forward(state),
        }
    }

    /// Argmax over `q_values`, ties broken by lowest action id.
    pub fn greedy_action(&self, state: &[f64]) -> ActionId {
        greedy_from_values(&self.q_values(state))
    }

    /// One stochastic-gradient step on the mean squared error between
    /// `targets` and the taken actions' predictions; returns the pre-update
    /// loss. The tabular variant applies the per-entry update
    /// `Q(s, a) += lr * (y - Q(s, a))` sequentially over the batch.
    pub fn gradient_step(
        &mut self,
        batch: &[Transition],
        targets: &[f64],
        lr: f64,
    ) -> Result<f64, QError> {
        assert_eq!(batch.len(), targets.len());
        assert!(!batch.is_empty());
        let loss = match self {
            QFunction::Tabular(table) => {
                let loss = batch
                    .iter()
                    .zip(targets)
                    .map(|(tr, &y)| {
                        let diff = y - table.q_values(&tr.state)[tr.action.index()];
                        diff * diff
                    })
                    .sum::<f64>()
                    / batch.len() as f64;
                for (tr, &y) in batch.iter().zip(targets) {
                    table.nudge(&tr.state, tr.action.index(), y, lr);
                }
                loss
            }
            QFunction::Mlp(net) => {
                let samples: Vec<(&[f64], usize, f64)> = batch
                    .iter()
                    .zip(targets)
                    .map(|(tr, &y)| (tr.state.as_slice(), tr.action.index(), y))
                    .collect();
                net.sgd_step(&samples, lr)
            }
        };
        if !loss.is_finite() {
            return Err(QError::NonFiniteLoss { loss });
        }
        Ok(loss)
    }
}

fn greedy_from_values(values: &[f64]) -> ActionId {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    ActionId(best as u8)
}

/// Epsilon-greedy selection: uniform random action with probability
/// `epsilon`, greedy otherwise. The probability roll is always drawn; the
/// action-index draw happens only on the exploration branch.
pub fn epsilon_greedy<R: Rng>(
    q: &QFunction,
    state: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> (ActionId, ActionSource) {
    debug_assert!((0.0..=1.0).contains(&epsilon));
    if rng.random::<f64>() < epsilon {
        let a = rng.random_range(0..q.num_actions());
        (ActionId(a as u8), ActionSource::RandomExploration)
    } else {
        (q.greedy_action(state), ActionSource::NetworkGreedy)
    }
}

/// Bellman targets: `y = r` on terminal transitions, otherwise
/// `y = r + discount * max_a Q*(next_state, a)`.
pub fn bellman_target(batch: &[Transition], target: &TargetNetwork, discount: f64) -> Vec<f64> {
    assert!(!batch.is_empty());
    batch
        .iter()
        .map(|tr| {
            if tr.terminal {
                tr.reward
            } else {
                let next = target.q_values(&tr.next_state);
                let max = next.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                tr.reward + discount * max
            }
        })
        .collect()
}

/// Frozen parameter copy refreshed every `sync_period` steps.
#[derive(Clone, Debug)]
pub struct TargetNetwork {
    frozen: QFunction,
    sync_period: u64,
}

impl TargetNetwork {
    pub fn new(q: &QFunction, sync_period: u64) -> Self {
        assert!(sync_period > 0);
        TargetNetwork {
            frozen: q.clone(),
            sync_period,
        }
    }

    pub fn q_values(&self, state: &[f64]) -> Vec<f64> {
        self.frozen.q_values(state)
    }

    pub fn frozen(&self) -> &QFunction {
        &self.frozen
    }

    /// Copies the online parameters iff `global_step % sync_period == 0`;
    /// returns whether a sync happened.
    pub fn maybe_sync(&mut self, q: &QFunction, global_step: u64) -> bool {
        if global_step % self.sync_period == 0 {
            self.frozen = q.clone();
            true
        } else {
            false
        }
    }
}

/// Linear anneal from `start` to `end` over `decay_steps` global steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn value_at(&self, global_step: u64) -> f64 {
        if global_step >= self.decay_steps || self.decay_steps == 0 {
            self.end
        } else {
            let frac = global_step as f64 / self.decay_steps as f64;
            self.start + (self.end - self.start) * frac
        }
    }
}

/// Learning hyperparameters plus the training-round limits `(M, T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub discount: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub capacity: usize,
    pub sync_period: u64,
    pub epsilon: EpsilonSchedule,
    pub episodes: u32,
    pub max_steps_per_episode: u32,
}

impl HyperParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..1.0).contains(&self.discount) {
            return Err(format!("discount must lie in [0, 1), got {}", self.discount));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if self.batch_size == 0 {
            return Err("batch_size must be positive".into());
        }
        if self.capacity == 0 {
            return Err("capacity must be positive".into());
        }
        if self.sync_period == 0 {
            return Err("sync_period must be positive".into());
        }
        for (name, eps) in [("epsilon_start", self.epsilon.start), ("epsilon_end", self.epsilon.end)] {
            if !(0.0..=1.0).contains(&eps) {
                return Err(format!("{name} must lie in [0, 1], got {eps}"));
            }
        }
        if self.max_steps_per_episode == 0 {
            return Err("max_steps_per_episode must be positive".into());
        }
        Ok(())
    }
}
