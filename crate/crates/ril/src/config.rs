//! Run configuration: built-in per-environment defaults, a TOML override
//! file, and validation of mode/rule-set compatibility.
//!
//! Precedence is defaults < config file < command-line flags. The full
//! effective configuration is echoed (as parseable TOML) at the top of every
//! emitted file.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::{self, EnvParams};
use crate::interpose::{InterposeSchedule, ScheduleClock};
use crate::qlearn::{EpsilonSchedule, HyperParams};
use crate::rules::RuleKind;
use crate::rulesets;

/// Which arbitration the training loop applies.
///
/// `ril-safety` always runs its rule set with the always-on schedule
/// (`p0 = 1, decay = 1`); the configured `[schedule]` applies to the
/// acceleration set in `ril-accel` and `ril-both`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Baseline,
    RilAccel,
    RilSafety,
    RilBoth,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::RilAccel => "ril-accel",
            Mode::RilSafety => "ril-safety",
            Mode::RilBoth => "ril-both",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "baseline" => Some(Mode::Baseline),
            "ril-accel" => Some(Mode::RilAccel),
            "ril-safety" => Some(Mode::RilSafety),
            "ril-both" => Some(Mode::RilBoth),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QVariant {
    Tabular,
    Mlp,
}

/// Full experiment specification for one training session.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub env: String,
    pub env_params: EnvParams,
    pub mode: Mode,
    pub rule_sets: Vec<String>,
    pub schedule: InterposeSchedule,
    pub hyper: HyperParams,
    pub q_variant: QVariant,
    pub hidden_dim: usize,
    pub seed: u64,
    /// Stop at the first episode boundary at or past this many env steps.
    pub max_total_steps: Option<u64>,
    /// Reward threshold for episodes-to-threshold summaries.
    pub threshold: f64,
    /// Trailing-mean window for the threshold test.
    pub threshold_window: usize,
    /// Output directory (used by the CLI only; the library never writes).
    pub out: Option<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown environment {name:?}; valid environments: {valid}")]
    UnknownEnv { name: String, valid: String },
    #[error("unknown rule set {name:?}; valid rule sets: {valid}")]
    UnknownRuleSet { name: String, valid: String },
    #[error("unknown mode {0:?}; valid modes: baseline, ril-accel, ril-safety, ril-both")]
    UnknownMode(String),
    #[error("{0}")]
    Env(String),
    #[error("mode/rule-set mismatch: {0}")]
    ModeRules(String),
    #[error("invalid hyperparameters: {0}")]
    Hyper(String),
    #[error("invalid interposing schedule: {0}")]
    Schedule(String),
    #[error("config file: {0}")]
    File(String),
}

impl RunConfig {
    /// Built-in defaults for an environment (tabular learners for the
    /// discrete worlds, a small MLP for the games), baseline mode, seed 0.
    pub fn defaults_for(env: &str) -> Result<RunConfig, ConfigError> {
        let (q_variant, learning_rate, discount, episodes, threshold) = match env {
            "gridworld" => (QVariant::Tabular, 0.3, 0.95, 500, 50.0),
            "chain" => (QVariant::Tabular, 0.5, 0.9, 300, 9.0),
            "flappy" => (QVariant::Mlp, 0.002, 0.95, 400, 0.5),
            "spacewar" => (QVariant::Mlp, 0.002, 0.95, 400, 3.0),
            "breakout" => (QVariant::Mlp, 0.002, 0.95, 400, 2.0),
            other => {
                return Err(ConfigError::UnknownEnv {
                    name: other.to_string(),
                    valid: envs::ENV_NAMES.join(", "),
                })
            }
        };
        let probe = envs::make_env(env, &EnvParams::default()).map_err(ConfigError::Env)?;
        let max_steps_per_episode = probe.spec().max_episode_steps;
        Ok(RunConfig {
            env: env.to_string(),
            env_params: EnvParams::default(),
            mode: Mode::Baseline,
            rule_sets: Vec::new(),
            schedule: InterposeSchedule {
                p0: 1.0,
                decay: 0.8,
                clock: ScheduleClock::PerEpisode,
            },
            hyper: HyperParams {
                discount,
                learning_rate,
                batch_size: 32,
                capacity: 10_000,
                sync_period: 250,
                epsilon: EpsilonSchedule {
                    start: 1.0,
                    end: 0.05,
                    decay_steps: 10_000,
                },
                episodes,
                max_steps_per_episode,
            },
            q_variant,
            hidden_dim: 32,
            seed: 0,
            max_total_steps: None,
            threshold,
            threshold_window: 10,
            out: None,
        })
    }

    /// The rule sets the environment's RIL modes use when none are named
    /// explicitly.
    pub fn default_rules_for(env: &str, mode: Mode) -> Vec<String> {
        let accel = match env {
            "flappy" => Some("flappy"),
            "spacewar" => Some("spacewar"),
            "breakout" => Some("breakout"),
            _ => None,
        };
        let safety = match env {
            "gridworld" => Some("gridworld-safety"),
            _ => None,
        };
        match mode {
            Mode::Baseline => Vec::new(),
            Mode::RilAccel => accel.into_iter().map(String::from).collect(),
            Mode::RilSafety => safety.into_iter().map(String::from).collect(),
            Mode::RilBoth => accel
                .into_iter()
                .chain(safety)
                .map(String::from)
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        envs::make_env(&self.env, &self.env_params).map_err(|msg| {
            if msg.starts_with("unknown environment") {
                ConfigError::UnknownEnv {
                    name: self.env.clone(),
                    valid: envs::ENV_NAMES.join(", "),
                }
            } else {
                ConfigError::Env(msg)
            }
        })?;
        InterposeSchedule::new(self.schedule.p0, self.schedule.decay, self.schedule.clock)
            .map_err(|e| ConfigError::Schedule(e.to_string()))?;
        self.hyper.validate().map_err(ConfigError::Hyper)?;
        if self.hidden_dim == 0 {
            return Err(ConfigError::Hyper("hidden_dim must be positive".into()));
        }
        if self.threshold_window == 0 {
            return Err(ConfigError::Hyper(
                "threshold_window must be positive".into(),
            ));
        }

        let mut kinds = Vec::new();
        for name in &self.rule_sets {
            let set = rulesets::by_name(name).ok_or_else(|| ConfigError::UnknownRuleSet {
                name: name.clone(),
                valid: rulesets::RULE_SET_NAMES.join(", "),
            })?;
            kinds.push(set.kind());
        }
        let safety_count = kinds.iter().filter(|k| **k == RuleKind::Safety).count();
        let accel_count = kinds.len() - safety_count;
        match self.mode {
            Mode::Baseline => {
                if !kinds.is_empty() {
                    return Err(ConfigError::ModeRules(
                        "baseline mode takes no rule sets".into(),
                    ));
                }
            }
            Mode::RilAccel => {
                if safety_count > 0 || accel_count > 1 {
                    return Err(ConfigError::ModeRules(
                        "ril-accel takes at most one acceleration rule set".into(),
                    ));
                }
            }
            Mode::RilSafety => {
                if safety_count != 1 || accel_count > 0 {
                    return Err(ConfigError::ModeRules(
                        "ril-safety requires exactly one safety rule set".into(),
                    ));
                }
            }
            Mode::RilBoth => {
                if safety_count != 1 || accel_count != 1 {
                    return Err(ConfigError::ModeRules(
                        "ril-both requires one safety and one acceleration rule set".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The effective configuration as parseable TOML: applying this text as
    /// a config file on top of the same environment's defaults rebuilds the
    /// config exactly.
    pub fn echo_toml(&self) -> String {
        let file = ConfigFile::snapshot(self);
        toml::to_string(&file).expect("config serializes")
    }
}

/// TOML override-file schema; every field optional.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub env: Option<String>,
    pub mode: Option<Mode>,
    pub rules: Option<Vec<String>>,
    pub q: Option<QVariant>,
    pub hidden_dim: Option<usize>,
    pub seed: Option<u64>,
    pub max_total_steps: Option<u64>,
    pub threshold: Option<f64>,
    pub threshold_window: Option<usize>,
    pub out: Option<String>,
    pub schedule: Option<ScheduleFile>,
    pub hyper: Option<HyperFile>,
    pub env_params: Option<EnvParamsFile>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub p0: Option<f64>,
    pub decay: Option<f64>,
    pub clock: Option<ScheduleClock>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HyperFile {
    pub discount: Option<f64>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub capacity: Option<usize>,
    pub sync_period: Option<u64>,
    pub epsilon_start: Option<f64>,
    pub epsilon_end: Option<f64>,
    pub epsilon_decay_steps: Option<u64>,
    pub episodes: Option<u32>,
    pub max_steps_per_episode: Option<u32>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EnvParamsFile {
    pub layout: Option<String>,
    pub width: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::File(e.to_string()))
    }

    /// Every field populated from a concrete config (for echoing).
    pub fn snapshot(cfg: &RunConfig) -> ConfigFile {
        ConfigFile {
            env: Some(cfg.env.clone()),
            mode: Some(cfg.mode),
            rules: Some(cfg.rule_sets.clone()),
            q: Some(cfg.q_variant),
            hidden_dim: Some(cfg.hidden_dim),
            seed: Some(cfg.seed),
            max_total_steps: cfg.max_total_steps,
            threshold: Some(cfg.threshold),
            threshold_window: Some(cfg.threshold_window),
            out: cfg.out.clone(),
            schedule: Some(ScheduleFile {
                p0: Some(cfg.schedule.p0),
                decay: Some(cfg.schedule.decay),
                clock: Some(cfg.schedule.clock),
            }),
            hyper: Some(HyperFile {
                discount: Some(cfg.hyper.discount),
                learning_rate: Some(cfg.hyper.learning_rate),
                batch_size: Some(cfg.hyper.batch_size),
                capacity: Some(cfg.hyper.capacity),
                sync_period: Some(cfg.hyper.sync_period),
                epsilon_start: Some(cfg.hyper.epsilon.start),
                epsilon_end: Some(cfg.hyper.epsilon.end),
                epsilon_decay_steps: Some(cfg.hyper.epsilon.decay_steps),
                episodes: Some(cfg.hyper.episodes),
                max_steps_per_episode: Some(cfg.hyper.max_steps_per_episode),
            }),
            env_params: Some(EnvParamsFile {
                layout: cfg.env_params.layout.clone(),
                width: cfg.env_params.width,
            }),
        }
    }

    /// Overlay this file's populated fields onto `base`.
    pub fn apply(&self, base: &RunConfig) -> RunConfig {
        let mut cfg = base.clone();
        if let Some(env) = &self.env {
            cfg.env = env.clone();
        }
        if let Some(mode) = self.mode {
            cfg.mode = mode;
        }
        if let Some(rules) = &self.rules {
            cfg.rule_sets = rules.clone();
        }
        if let Some(q) = self.q {
            cfg.q_variant = q;
        }
        if let Some(h) = self.hidden_dim {
            cfg.hidden_dim = h;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(steps) = self.max_total_steps {
            cfg.max_total_steps = Some(steps);
        }
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if let Some(w) = self.threshold_window {
            cfg.threshold_window = w;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(s) = &self.schedule {
            if let Some(p0) = s.p0 {
                cfg.schedule.p0 = p0;
            }
            if let Some(d) = s.decay {
                cfg.schedule.decay = d;
            }
            if let Some(c) = s.clock {
                cfg.schedule.clock = c;
            }
        }
        if let Some(h) = &self.hyper {
            if let Some(x) = h.discount {
                cfg.hyper.discount = x;
            }
            if let Some(x) = h.learning_rate {
                cfg.hyper.learning_rate = x;
            }
            if let Some(x) = h.batch_size {
                cfg.hyper.batch_size = x;
            }
            if let Some(x) = h.capacity {
                cfg.hyper.capacity = x;
            }
            if let Some(x) = h.sync_period {
                cfg.hyper.sync_period = x;
            }
            if let Some(x) = h.epsilon_start {
                cfg.hyper.epsilon.start = x;
            }
            if let Some(x) = h.epsilon_end {
                cfg.hyper.epsilon.end = x;
            }
            if let Some(x) = h.epsilon_decay_steps {
                cfg.hyper.epsilon.decay_steps = x;
            }
            if let Some(x) = h.episodes {
                cfg.hyper.episodes = x;
            }
            if let Some(x) = h.max_steps_per_episode {
                cfg.hyper.max_steps_per_episode = x;
            }
        }
        if let Some(e) = &self.env_params {
            if let Some(layout) = &e.layout {
                cfg.env_params.layout = Some(layout.clone());
            }
            if let Some(width) = e.width {
                cfg.env_params.width = Some(width);
            }
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_exist_for_every_env() {
        for env in envs::ENV_NAMES {
            let cfg = RunConfig::defaults_for(env).unwrap();
            assert!(cfg.validate().is_ok(), "{env} defaults invalid");
        }
        assert!(matches!(
            RunConfig::defaults_for("pole"),
            Err(ConfigError::UnknownEnv { .. })
        ));
    }

    #[test]
    fn echo_round_trips_through_the_file_parser() {
        let mut cfg = RunConfig::defaults_for("spacewar").unwrap();
        cfg.mode = Mode::RilAccel;
        cfg.rule_sets = vec!["spacewar".into()];
        cfg.seed = 17;
        cfg.env_params.width = Some(13);
        cfg.max_total_steps = Some(100_000);
        cfg.out = Some("runs/x".into());
        let echo = cfg.echo_toml();
        let file = ConfigFile::parse(&echo).unwrap();
        let rebuilt = file.apply(&RunConfig::defaults_for("spacewar").unwrap());
        assert_eq!(rebuilt, cfg);
    }

    #[test]
    fn file_overrides_defaults_and_nested_fields() {
        let text = r#"
env = "gridworld"
mode = "ril-safety"
rules = ["gridworld-safety"]
seed = 3

[schedule]
decay = 1.0

[hyper]
learning_rate = 0.1
episodes = 42

[env_params]
layout = "small"
"#;
        let file = ConfigFile::parse(text).unwrap();
        let cfg = file.apply(&RunConfig::defaults_for("gridworld").unwrap());
        assert_eq!(cfg.mode, Mode::RilSafety);
        assert_eq!(cfg.rule_sets, vec!["gridworld-safety".to_string()]);
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.schedule.decay, 1.0);
        assert_eq!(cfg.schedule.p0, 1.0); // untouched default
        assert_eq!(cfg.hyper.learning_rate, 0.1);
        assert_eq!(cfg.hyper.episodes, 42);
        assert_eq!(cfg.env_params.layout.as_deref(), Some("small"));
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ConfigFile::parse("bogus_key = 1").is_err());
    }

    #[test]
    fn mode_rule_compatibility_enforced() {
        let mut cfg = RunConfig::defaults_for("flappy").unwrap();
        cfg.mode = Mode::RilSafety;
        // No safety set exists for flappy; rejected before any work.
        assert!(matches!(cfg.validate(), Err(ConfigError::ModeRules(_))));

        cfg.mode = Mode::Baseline;
        cfg.rule_sets = vec!["flappy".into()];
        assert!(matches!(cfg.validate(), Err(ConfigError::ModeRules(_))));

        cfg.mode = Mode::RilAccel;
        assert!(cfg.validate().is_ok());

        cfg.rule_sets = vec!["gridworld-safety".into()];
        assert!(matches!(cfg.validate(), Err(ConfigError::ModeRules(_))));

        cfg.rule_sets = vec!["made-up".into()];
        assert!(matches!(cfg.validate(), Err(ConfigError::UnknownRuleSet { .. })));
    }

    #[test]
    fn ril_accel_with_no_rules_is_legal() {
        // Degenerate arm used by the baseline-equivalence differential test.
        let mut cfg = RunConfig::defaults_for("flappy").unwrap();
        cfg.mode = Mode::RilAccel;
        cfg.rule_sets.clear();
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn default_rules_match_env_and_mode() {
        assert_eq!(
            RunConfig::default_rules_for("gridworld", Mode::RilSafety),
            vec!["gridworld-safety".to_string()]
        );
        assert_eq!(
            RunConfig::default_rules_for("flappy", Mode::RilAccel),
            vec!["flappy".to_string()]
        );
        assert!(RunConfig::default_rules_for("flappy", Mode::Baseline).is_empty());
        assert!(RunConfig::default_rules_for("chain", Mode::RilAccel).is_empty());
    }
}
