//! Rule-interposing deep Q-learning.
//!
//! A knowledge base of `(precondition, recommended-action-set)` rules sits
//! between an epsilon-greedy DQN policy and the environment. When the
//! tentative action falls outside the rules' activation set, it is replaced
//! (with a decaying probability for acceleration rules, always for safety
//! rules) by a uniformly random recommended action. The crate ships the
//! learning core, four small vector-state game environments with their rule
//! sets, and an experiment harness that emits per-episode training curves.

pub mod config;
pub mod envs;
pub mod harness;
pub mod interpose;
pub mod qlearn;
pub mod report;
pub mod rules;
pub mod rulesets;
pub mod stats;

pub use envs::{EnvSpec, Environment, Observation, StepResult};
pub use interpose::{ActionSource, ArbitrationOutcome, InterposeSchedule, ScheduleClock};
pub use qlearn::{HyperParams, QFunction, ReplayMemory, TargetNetwork, Transition};
pub use rules::{ActionId, ActionSet, Rule, RuleKind, RuleSet};
