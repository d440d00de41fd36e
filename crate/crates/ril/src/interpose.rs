//! Per-step arbitration between the learner's tentative action and the rule
//! knowledge base.
//!
//! A schedule `P_t = p0 * decay^t` controls how often an action that falls
//! outside the rules' activation set is replaced by a recommended one.
//! Safety rules run with `p0 = 1, decay = 1` (always on); acceleration rules
//! use `decay < 1` so the network gradually takes over. The dual arbiter
//! additionally guarantees that a non-empty, consistent safety set is never
//! violated, whatever the schedule says.
//!
//! RNG discipline: the override roll is drawn first, then (only when
//! overriding) the uniform action index, so a fixed seed replays exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::{ActionId, RuleSet};

/// Which counter drives the exponent in `P_t = p0 * decay^t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleClock {
    /// `t` is the episode index (default; decay spans the whole run).
    PerEpisode,
    /// `t` is the global environment-step count.
    PerGlobalStep,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("p0 must lie in [0, 1], got {0}")]
    InitialProbability(f64),
    #[error("decay must lie in (0, 1], got {0}")]
    Decay(f64),
}

/// Interposing probability schedule `P_t = p0 * decay^t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterposeSchedule {
    pub p0: f64,
    pub decay: f64,
    pub clock: ScheduleClock,
}

impl InterposeSchedule {
    pub fn new(p0: f64, decay: f64, clock: ScheduleClock) -> Result<Self, ScheduleError> {
        if !(0.0..=1.0).contains(&p0) || !p0.is_finite() {
            return Err(ScheduleError::InitialProbability(p0));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(ScheduleError::Decay(decay));
        }
        Ok(InterposeSchedule { p0, decay, clock })
    }

    /// Always-on schedule used for safety rule sets.
    pub fn always_on() -> Self {
        InterposeSchedule {
            p0: 1.0,
            decay: 1.0,
            clock: ScheduleClock::PerEpisode,
        }
    }

    /// `p0 * decay^t`; monotonically non-increasing in `t`.
    pub fn probability_at(&self, t: u64) -> f64 {
        self.p0 * self.decay.powf(t as f64)
    }
}

/// Where the executed action came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionSource {
    RandomExploration,
    NetworkGreedy,
    RuleOverride,
}

/// Result of one arbitration step.
///
/// `interpose_roll` is the uniform draw consumed by the probabilistic
/// override branch, `None` when no roll happened (rules silent, tentative
/// already compliant, or a forced safety replacement).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArbitrationOutcome {
    pub action: ActionId,
    pub source: ActionSource,
    pub interpose_roll: Option<f64>,
}

fn pick_uniform<R: Rng>(set: crate::rules::ActionSet, rng: &mut R) -> ActionId {
    debug_assert!(!set.is_empty());
    let idx = rng.random_range(0..set.len());
    set.nth(idx).expect("index within set length")
}

/// Single-set arbitration.
///
/// When the activation set is non-empty, consistent, and the tentative
/// action falls outside it, the tentative action is replaced by a uniform
/// member of the set with probability `P_t`. Otherwise the tentative action
/// passes through unchanged (and when it already complies, no RNG is
/// consumed at all).
pub fn arbitrate_single<O: ?Sized, R: Rng>(
    tentative: ActionId,
    source: ActionSource,
    rules: &RuleSet<O>,
    obs: &O,
    sched: &InterposeSchedule,
    t: u64,
    rng: &mut R,
) -> ArbitrationOutcome {
    let activation = rules.kb_activation(obs);
    if activation.is_empty() || !rules.is_consistent(obs) || activation.contains(tentative) {
        return ArbitrationOutcome {
            action: tentative,
            source,
            interpose_roll: None,
        };
    }
    let roll: f64 = rng.random();
    if roll < sched.probability_at(t) {
        ArbitrationOutcome {
            action: pick_uniform(activation, rng),
            source: ActionSource::RuleOverride,
            interpose_roll: Some(roll),
        }
    } else {
        ArbitrationOutcome {
            action: tentative,
            source,
            interpose_roll: Some(roll),
        }
    }
}

/// Two-set arbitration: an always-enforced safety set plus a scheduled
/// acceleration set.
///
/// When the safety set is non-empty, consistent, and violated by the
/// tentative action, the replacement is drawn from `accel ∩ safety` with
/// probability `P_t` and from the safety set otherwise — the safety set is
/// never escaped on that branch. When the safety set is silent or already
/// satisfied, plain single-set arbitration runs against the acceleration
/// set.
pub fn arbitrate_dual<O: ?Sized, R: Rng>(
    tentative: ActionId,
    source: ActionSource,
    safety: &RuleSet<O>,
    accel: &RuleSet<O>,
    obs: &O,
    sched: &InterposeSchedule,
    t: u64,
    rng: &mut R,
) -> ArbitrationOutcome {
    let safe_set = safety.kb_activation(obs);
    let safety_active = !safe_set.is_empty() && safety.is_consistent(obs);
    if !safety_active || safe_set.contains(tentative) {
        return arbitrate_single(tentative, source, accel, obs, sched, t, rng);
    }
    let joint = accel.kb_activation(obs).intersect(safe_set);
    if joint.is_empty() {
        return ArbitrationOutcome {
            action: pick_uniform(safe_set, rng),
            source: ActionSource::RuleOverride,
            interpose_roll: None,
        };
    }
    let roll: f64 = rng.random();
    let pool = if roll < sched.probability_at(t) {
        joint
    } else {
        safe_set
    };
    ArbitrationOutcome {
        action: pick_uniform(pool, rng),
        source: ActionSource::RuleOverride,
        interpose_roll: Some(roll),
    }
}
