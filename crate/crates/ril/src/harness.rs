//! Training sessions: epsilon-greedy action selection filtered through the
//! configured arbitration mode, replay learning with a target network, and
//! per-episode metrics. Sessions are share-nothing; sweeps run them in
//! parallel and aggregate per-arm statistics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, Mode, QVariant, RunConfig};
use crate::envs::{self, Environment, Observation};
use crate::interpose::{
    arbitrate_dual, arbitrate_single, ActionSource, InterposeSchedule, ScheduleClock,
};
use crate::qlearn::{
    bellman_target, epsilon_greedy, Mlp, QFunction, ReplayMemory, TabularQ, TargetNetwork,
    Transition,
};
use crate::rules::{RuleKind, RuleSet};
use crate::stats;

/// Per-episode training record.
///
/// `n_explore + n_greedy + n_override == steps`; `n_eligible` counts steps
/// where an override roll was made (the denominator for schedule-fidelity
/// checks) and is carried in memory only, not in the session CSV schema.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: u32,
    pub total_reward: f64,
    pub steps: u32,
    pub mean_max_q: f64,
    pub n_explore: u32,
    pub n_greedy: u32,
    pub n_override: u32,
    pub n_safety_violations: u32,
    pub n_eligible: u32,
}

#[derive(Clone, Debug)]
pub struct SessionResult {
    pub metrics: Vec<EpisodeMetrics>,
    pub final_q: QFunction,
    pub total_steps: u64,
}

/// A run that hit a non-finite loss: metrics up to the failure plus the
/// parameters snapshotted at the last completed episode.
#[derive(Clone, Debug)]
pub struct SessionAbort {
    pub reason: String,
    pub episode: u32,
    pub metrics: Vec<EpisodeMetrics>,
    pub last_good: QFunction,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("session aborted at episode {}: {}", .0.episode, .0.reason)]
    Abort(Box<SessionAbort>),
}

/// Stream-separation constants for deriving independent RNG streams from
/// one session seed.
const STREAM_INIT: u64 = 1;
const STREAM_POLICY: u64 = 2;
const STREAM_ENV: u64 = 3;
const STREAM_EVAL: u64 = 4;

/// splitmix64 finalizer over (seed, stream).
fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn episode_env_seed(seed: u64, stream: u64, episode: u32) -> u64 {
    mix(mix(seed, stream), episode as u64)
}

struct ResolvedRules {
    safety: RuleSet<Observation>,
    accel: RuleSet<Observation>,
}

fn resolve_rules(config: &RunConfig) -> ResolvedRules {
    let mut safety = RuleSet::empty(RuleKind::Safety);
    let mut accel = RuleSet::empty(RuleKind::Acceleration);
    for name in &config.rule_sets {
        let set = crate::rulesets::by_name(name).expect("validated rule set name");
        match set.kind() {
            RuleKind::Safety => safety = set,
            RuleKind::Acceleration => accel = set,
        }
    }
    ResolvedRules { safety, accel }
}

/// Reference safety set used for violation accounting in every mode (so a
/// baseline run still reports the trap entries a safety run would have
/// prevented). Only environments that ship a safety set have a monitor.
fn violation_monitor(env: &str) -> Option<RuleSet<Observation>> {
    match env {
        "gridworld" => Some(crate::rulesets::gridworld_rules()),
        _ => None,
    }
}

fn build_q(config: &RunConfig, n_actions: usize, feature_dim: usize) -> QFunction {
    match config.q_variant {
        QVariant::Tabular => QFunction::Tabular(TabularQ::new(n_actions)),
        QVariant::Mlp => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(config.seed, STREAM_INIT));
            QFunction::Mlp(Mlp::new(feature_dim, config.hidden_dim, n_actions, &mut rng))
        }
    }
}

/// Run one training session to completion.
pub fn train(config: &RunConfig) -> Result<SessionResult, TrainError> {
    config.validate()?;
    let mut env = envs::make_env(&config.env, &config.env_params).expect("validated env");
    let rules = resolve_rules(config);
    let monitor = violation_monitor(&config.env);
    let hyper = &config.hyper;
    let n_actions = env.spec().action_count();
    let feature_dim = env.spec().feature_dim;

    // Safety rules are always on whatever the configured schedule says;
    // the configured schedule drives acceleration interposing.
    let accel_sched = config.schedule;
    let safety_sched = InterposeSchedule::always_on();

    let mut q = build_q(config, n_actions, feature_dim);
    let mut target = TargetNetwork::new(&q, hyper.sync_period);
    let mut memory = ReplayMemory::new(hyper.capacity);
    let mut policy_rng = ChaCha8Rng::seed_from_u64(mix(config.seed, STREAM_POLICY));
    let mut last_good = q.clone();
    let mut metrics: Vec<EpisodeMetrics> = Vec::new();
    let mut global_step: u64 = 0;

    for episode in 0..hyper.episodes {
        if let Some(budget) = config.max_total_steps {
            if global_step >= budget {
                break;
            }
        }
        let mut obs = env.reset(episode_env_seed(config.seed, STREAM_ENV, episode));
        let mut total_reward = 0.0;
        let mut sum_max_q = 0.0;
        let mut steps = 0u32;
        let (mut n_explore, mut n_greedy, mut n_override) = (0u32, 0u32, 0u32);
        let mut n_eligible = 0u32;
        let mut n_violations = 0u32;

        for _ in 0..hyper.max_steps_per_episode {
            let epsilon = hyper.epsilon.value_at(global_step);
            let q_row = q.q_values(&obs.features);
            sum_max_q += q_row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let (tentative, source) = epsilon_greedy(&q, &obs.features, epsilon, &mut policy_rng);
            let clock_t = match accel_sched.clock {
                ScheduleClock::PerEpisode => episode as u64,
                ScheduleClock::PerGlobalStep => global_step,
            };
            let outcome = match config.mode {
                Mode::Baseline | Mode::RilAccel => arbitrate_single(
                    tentative,
                    source,
                    &rules.accel,
                    &obs,
                    &accel_sched,
                    clock_t,
                    &mut policy_rng,
                ),
                Mode::RilSafety => arbitrate_single(
                    tentative,
                    source,
                    &rules.safety,
                    &obs,
                    &safety_sched,
                    clock_t,
                    &mut policy_rng,
                ),
                Mode::RilBoth => arbitrate_dual(
                    tentative,
                    source,
                    &rules.safety,
                    &rules.accel,
                    &obs,
                    &accel_sched,
                    clock_t,
                    &mut policy_rng,
                ),
            };
            if outcome.interpose_roll.is_some() {
                n_eligible += 1;
            }
            match outcome.source {
                ActionSource::RandomExploration => n_explore += 1,
                ActionSource::NetworkGreedy => n_greedy += 1,
                ActionSource::RuleOverride => n_override += 1,
            }
            // Core safety theorem, checked on every safeguarded step.
            if matches!(config.mode, Mode::RilSafety | Mode::RilBoth) {
                let active = rules.safety.kb_activation(&obs);
                if !active.is_empty() && rules.safety.is_consistent(&obs) {
                    assert!(
                        active.contains(outcome.action),
                        "safety set violated at episode {episode}"
                    );
                }
            }
            if let Some(mon) = &monitor {
                let active = mon.kb_activation(&obs);
                if !active.is_empty() && mon.is_consistent(&obs) && !active.contains(outcome.action)
                {
                    n_violations += 1;
                }
            }

            let step = env.step(outcome.action).expect("episode not terminal");
            total_reward += step.reward;
            steps += 1;
            memory.push(Transition {
                state: obs.features.clone(),
                action: outcome.action,
                reward: step.reward,
                next_state: step.obs.features.clone(),
                terminal: step.terminal,
            });
            // Learning starts once a full batch is available.
            if memory.len() >= hyper.batch_size {
                let batch = memory
                    .sample(hyper.batch_size, &mut policy_rng)
                    .expect("memory non-empty");
                let targets = bellman_target(&batch, &target, hyper.discount);
                if let Err(e) = q.gradient_step(&batch, &targets, hyper.learning_rate) {
                    return Err(TrainError::Abort(Box::new(SessionAbort {
                        reason: e.to_string(),
                        episode,
                        metrics,
                        last_good,
                    })));
                }
            }
            global_step += 1;
            target.maybe_sync(&q, global_step);
            if step.terminal {
                break;
            }
            obs = step.obs;
        }

        metrics.push(EpisodeMetrics {
            episode,
            total_reward,
            steps,
            mean_max_q: if steps > 0 {
                sum_max_q / steps as f64
            } else {
                0.0
            },
            n_explore,
            n_greedy,
            n_override,
            n_safety_violations: n_violations,
            n_eligible,
        });
        last_good = q.clone();
    }

    Ok(SessionResult {
        metrics,
        final_q: q,
        total_steps: global_step,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub episodes: u32,
    pub mean_return: f64,
    /// True when zero episodes were requested (mean_return is 0 by
    /// definition, not measurement).
    pub empty: bool,
}

/// Greedy-policy evaluation: no exploration, no rules, no learning.
pub fn evaluate(
    q: &QFunction,
    env: &mut dyn Environment,
    episodes: u32,
    seed: u64,
) -> Result<EvalResult, String> {
    let spec = env.spec();
    if q.num_actions() != spec.action_count() {
        return Err(format!(
            "checkpoint has {} actions but {} expects {}",
            q.num_actions(),
            spec.name,
            spec.action_count()
        ));
    }
    if let Some(dim) = q.input_dim() {
        if dim != spec.feature_dim {
            return Err(format!(
                "checkpoint expects {}-dim features but {} provides {}",
                dim, spec.name, spec.feature_dim
            ));
        }
    }
    if episodes == 0 {
        return Ok(EvalResult {
            episodes: 0,
            mean_return: 0.0,
            empty: true,
        });
    }
    let mut total = 0.0;
    for episode in 0..episodes {
        let mut obs = env.reset(episode_env_seed(seed, STREAM_EVAL, episode));
        loop {
            let action = q.greedy_action(&obs.features);
            let step = env.step(action).expect("episode not terminal");
            total += step.reward;
            if step.terminal {
                break;
            }
            obs = step.obs;
        }
    }
    Ok(EvalResult {
        episodes,
        mean_return: total / episodes as f64,
        empty: false,
    })
}

/// One experiment arm: the same configuration over several seeds.
#[derive(Clone, Debug)]
pub struct Arm {
    pub name: String,
    pub configs: Vec<RunConfig>,
}

#[derive(Debug)]
pub struct ArmResult {
    pub name: String,
    pub configs: Vec<RunConfig>,
    pub sessions: Vec<Result<SessionResult, SessionAbort>>,
}

/// Run every session of every arm, `parallelism` at a time. Configs are
/// validated up front; individual aborts are recorded, not fatal.
pub fn sweep(arms: Vec<Arm>, parallelism: usize) -> Result<Vec<ArmResult>, ConfigError> {
    for arm in &arms {
        for config in &arm.configs {
            config.validate()?;
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .expect("thread pool");
    let mut jobs: Vec<(usize, usize, &RunConfig)> = Vec::new();
    for (ai, arm) in arms.iter().enumerate() {
        for (ci, config) in arm.configs.iter().enumerate() {
            jobs.push((ai, ci, config));
        }
    }
    let mut outcomes: Vec<(usize, usize, Result<SessionResult, SessionAbort>)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(ai, ci, config)| {
                let result = match train(config) {
                    Ok(r) => Ok(r),
                    Err(TrainError::Abort(a)) => Err(*a),
                    Err(TrainError::Config(e)) => unreachable!("pre-validated config: {e}"),
                };
                (ai, ci, result)
            })
            .collect()
    });
    outcomes.sort_by_key(|(ai, ci, _)| (*ai, *ci));

    let mut results: Vec<ArmResult> = arms
        .into_iter()
        .map(|arm| ArmResult {
            name: arm.name,
            configs: arm.configs,
            sessions: Vec::new(),
        })
        .collect();
    for (ai, _, outcome) in outcomes {
        results[ai].sessions.push(outcome);
    }
    Ok(results)
}

/// Per-seed and aggregate statistics for one arm.
#[derive(Clone, Debug)]
pub struct ArmSummary {
    pub name: String,
    pub seeds: Vec<u64>,
    pub aborts: u32,
    /// Median per-episode reward across seeds, truncated to the shortest
    /// session.
    pub median_curve: Vec<f64>,
    pub q1_curve: Vec<f64>,
    pub q3_curve: Vec<f64>,
    /// Per seed: mean episode reward over the whole (fixed-budget) run.
    pub mean_episode_reward: Vec<f64>,
    /// Per seed: episodes until the trailing mean first reached the
    /// threshold (None if never).
    pub episodes_to_threshold: Vec<Option<usize>>,
    /// Per seed: env steps consumed up to and including that episode.
    pub steps_to_threshold: Vec<Option<u64>>,
    /// Per seed: episodes actually run and total env steps (the caps used
    /// for unreached thresholds).
    pub episodes_run: Vec<usize>,
    pub total_steps: Vec<u64>,
    pub total_violations: Vec<u64>,
}

impl ArmSummary {
    pub fn reached_count(&self) -> usize {
        self.episodes_to_threshold
            .iter()
            .filter(|e| e.is_some())
            .count()
    }

    /// Median episodes-to-threshold with unreached seeds counted at their
    /// episode cap.
    pub fn median_episodes_to_threshold(&self) -> f64 {
        let effective: Vec<f64> = self
            .episodes_to_threshold
            .iter()
            .zip(&self.episodes_run)
            .map(|(e, &cap)| e.unwrap_or(cap) as f64)
            .collect();
        stats::median(&effective)
    }

    /// Median env-steps-to-threshold with unreached seeds counted at their
    /// step total.
    pub fn median_steps_to_threshold(&self) -> f64 {
        let effective: Vec<f64> = self
            .steps_to_threshold
            .iter()
            .zip(&self.total_steps)
            .map(|(s, &cap)| s.unwrap_or(cap) as f64)
            .collect();
        stats::median(&effective)
    }

    pub fn median_mean_reward(&self) -> f64 {
        stats::median(&self.mean_episode_reward)
    }

    pub fn violations_total(&self) -> u64 {
        self.total_violations.iter().sum()
    }
}

/// Aggregate one arm's sessions (aborted sessions excluded from curve and
/// threshold statistics, counted in `aborts`).
pub fn summarize_arm(result: &ArmResult, threshold: f64, window: usize) -> ArmSummary {
    let seeds = result.configs.iter().map(|c| c.seed).collect();
    let completed: Vec<&SessionResult> = result
        .sessions
        .iter()
        .filter_map(|s| s.as_ref().ok())
        .collect();
    let aborts = (result.sessions.len() - completed.len()) as u32;

    let min_len = completed
        .iter()
        .map(|s| s.metrics.len())
        .min()
        .unwrap_or(0);
    let mut median_curve = Vec::with_capacity(min_len);
    let mut q1_curve = Vec::with_capacity(min_len);
    let mut q3_curve = Vec::with_capacity(min_len);
    for i in 0..min_len {
        let rewards: Vec<f64> = completed
            .iter()
            .map(|s| s.metrics[i].total_reward)
            .collect();
        median_curve.push(stats::median(&rewards));
        q1_curve.push(stats::quantile(&rewards, 0.25));
        q3_curve.push(stats::quantile(&rewards, 0.75));
    }

    let mut mean_episode_reward = Vec::new();
    let mut episodes_to_threshold = Vec::new();
    let mut steps_to_threshold = Vec::new();
    let mut episodes_run = Vec::new();
    let mut total_steps = Vec::new();
    let mut total_violations = Vec::new();
    for session in &completed {
        let rewards: Vec<f64> = session.metrics.iter().map(|m| m.total_reward).collect();
        let mean = if rewards.is_empty() {
            0.0
        } else {
            rewards.iter().sum::<f64>() / rewards.len() as f64
        };
        mean_episode_reward.push(mean);
        let crossed = stats::episodes_to_threshold(&rewards, window, threshold);
        episodes_to_threshold.push(crossed);
        steps_to_threshold.push(crossed.map(|e| {
            session.metrics[..=e]
                .iter()
                .map(|m| m.steps as u64)
                .sum::<u64>()
        }));
        episodes_run.push(session.metrics.len());
        total_steps.push(session.total_steps);
        total_violations.push(
            session
                .metrics
                .iter()
                .map(|m| m.n_safety_violations as u64)
                .sum(),
        );
    }

    ArmSummary {
        name: result.name.clone(),
        seeds,
        aborts,
        median_curve,
        q1_curve,
        q3_curve,
        mean_episode_reward,
        episodes_to_threshold,
        steps_to_threshold,
        episodes_run,
        total_steps,
        total_violations,
    }
}

/// Fixed-reward time saving and fixed-budget reward improvement of `arm`
/// against `base`, both in percent, time measured in environment steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmComparison {
    pub time_saved_pct: f64,
    pub reward_improved_pct: f64,
}

pub fn compare_arms(base: &ArmSummary, arm: &ArmSummary) -> ArmComparison {
    let base_steps = base.median_steps_to_threshold();
    let arm_steps = arm.median_steps_to_threshold();
    let time_saved_pct = 100.0 * (base_steps - arm_steps) / base_steps.abs().max(1e-9);
    let base_reward = base.median_mean_reward();
    let arm_reward = arm.median_mean_reward();
    let reward_improved_pct = 100.0 * (arm_reward - base_reward) / base_reward.abs().max(1e-9);
    ArmComparison {
        time_saved_pct,
        reward_improved_pct,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::EnvParams;

    fn quick_config(env: &str) -> RunConfig {
        let mut cfg = RunConfig::defaults_for(env).unwrap();
        cfg.hyper.episodes = 20;
        cfg.hyper.epsilon.decay_steps = 200;
        cfg
    }

    #[test]
    fn zero_episodes_give_empty_metrics() {
        let mut cfg = quick_config("chain");
        cfg.hyper.episodes = 0;
        let result = train(&cfg).unwrap();
        assert!(result.metrics.is_empty());
        assert_eq!(result.total_steps, 0);
    }

    #[test]
    fn action_source_counts_sum_to_steps() {
        let mut cfg = quick_config("gridworld");
        cfg.env_params.layout = Some("small".into());
        cfg.mode = Mode::RilSafety;
        cfg.rule_sets = vec!["gridworld-safety".into()];
        let result = train(&cfg).unwrap();
        assert_eq!(result.metrics.len(), 20);
        for m in &result.metrics {
            assert_eq!(m.n_explore + m.n_greedy + m.n_override, m.steps);
        }
    }

    #[test]
    fn identical_config_identical_metrics() {
        let mut cfg = quick_config("flappy");
        cfg.mode = Mode::RilAccel;
        cfg.rule_sets = vec!["flappy".into()];
        cfg.seed = 5;
        let a = train(&cfg).unwrap();
        let b = train(&cfg).unwrap();
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.final_q, b.final_q);
    }

    #[test]
    fn baseline_equals_ril_accel_with_no_rules() {
        let mut base = quick_config("spacewar");
        base.seed = 9;
        let mut empty_ril = base.clone();
        empty_ril.mode = Mode::RilAccel;
        empty_ril.rule_sets.clear();
        let a = train(&base).unwrap();
        let b = train(&empty_ril).unwrap();
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.final_q, b.final_q);
        assert_eq!(a.total_steps, b.total_steps);
    }

    #[test]
    fn safety_mode_never_enters_traps() {
        let mut cfg = quick_config("gridworld");
        cfg.env_params.layout = Some("small".into());
        cfg.mode = Mode::RilSafety;
        cfg.rule_sets = vec!["gridworld-safety".into()];
        cfg.hyper.episodes = 100;
        let result = train(&cfg).unwrap();
        for m in &result.metrics {
            assert_eq!(m.n_safety_violations, 0, "episode {}", m.episode);
        }
    }

    #[test]
    fn baseline_mode_does_enter_traps() {
        let mut cfg = quick_config("gridworld");
        cfg.env_params.layout = Some("small".into());
        cfg.hyper.episodes = 50;
        let result = train(&cfg).unwrap();
        let violations: u32 = result.metrics.iter().map(|m| m.n_safety_violations).sum();
        assert!(violations > 0, "random exploration never hit a trap");
    }

    #[test]
    fn step_budget_stops_at_episode_boundary() {
        let mut cfg = quick_config("chain");
        cfg.hyper.episodes = 10_000;
        cfg.max_total_steps = Some(200);
        let result = train(&cfg).unwrap();
        assert!(result.total_steps >= 200);
        let before_last: u64 = result
            .metrics
            .iter()
            .take(result.metrics.len() - 1)
            .map(|m| m.steps as u64)
            .sum();
        assert!(before_last < 200, "ran a whole episode past the budget");
    }

    #[test]
    fn evaluate_rejects_mismatched_checkpoints() {
        let mut env = envs::make_env("chain", &EnvParams::default()).unwrap();
        let q = QFunction::Tabular(TabularQ::new(4));
        assert!(evaluate(&q, env.as_mut(), 1, 0).is_err());
        let q = QFunction::Mlp(Mlp::zeroed(3, 4, 2));
        assert!(evaluate(&q, env.as_mut(), 1, 0).is_err());
    }

    #[test]
    fn evaluate_zero_episodes_is_flagged_empty() {
        let mut env = envs::make_env("chain", &EnvParams::default()).unwrap();
        let q = QFunction::Tabular(TabularQ::new(2));
        let r = evaluate(&q, env.as_mut(), 0, 0).unwrap();
        assert!(r.empty);
        assert_eq!(r.mean_return, 0.0);
    }

    #[test]
    fn zero_q_gridworld_eval_matches_fixed_policy_simulation() {
        // All-zero table: greedy always picks action 0 (up), which bumps the
        // wall above the start cell until the step cap.
        let mut env = envs::make_env(
            "gridworld",
            &EnvParams {
                layout: Some("small".into()),
                ..Default::default()
            },
        )
        .unwrap();
        let cap = env.spec().max_episode_steps;
        let q = QFunction::Tabular(TabularQ::new(4));
        let r = evaluate(&q, env.as_mut(), 3, 0).unwrap();
        assert_eq!(r.mean_return, -(cap as f64));
    }

    #[test]
    fn sweep_groups_sessions_by_arm() {
        let mk = |seed: u64| {
            let mut c = quick_config("chain");
            c.seed = seed;
            c.hyper.episodes = 5;
            c
        };
        let arms = vec![
            Arm {
                name: "a".into(),
                configs: vec![mk(0), mk(1)],
            },
            Arm {
                name: "b".into(),
                configs: vec![mk(0), mk(1)],
            },
        ];
        let results = sweep(arms, 2).unwrap();
        assert_eq!(results.len(), 2);
        assert!(results.iter().all(|r| r.sessions.len() == 2));
        // Identical arms, identical seeds: identical outcomes.
        let a0 = results[0].sessions[0].as_ref().unwrap();
        let b0 = results[1].sessions[0].as_ref().unwrap();
        assert_eq!(a0.metrics, b0.metrics);
        // Distinct seeds inside an arm: distinct trajectories.
        let a1 = results[0].sessions[1].as_ref().unwrap();
        assert_ne!(a0.metrics, a1.metrics);
    }

    #[test]
    fn summaries_compare_identical_arms_to_zero_deltas() {
        let mk = |seed: u64| {
            let mut c = quick_config("chain");
            c.seed = seed;
            c.hyper.episodes = 30;
            c
        };
        let arms = vec![
            Arm {
                name: "x".into(),
                configs: vec![mk(0), mk(1), mk(2)],
            },
            Arm {
                name: "y".into(),
                configs: vec![mk(0), mk(1), mk(2)],
            },
        ];
        let results = sweep(arms, 2).unwrap();
        let sx = summarize_arm(&results[0], 5.0, 5);
        let sy = summarize_arm(&results[1], 5.0, 5);
        let cmp = compare_arms(&sx, &sy);
        assert_eq!(cmp.time_saved_pct, 0.0);
        assert_eq!(cmp.reward_improved_pct, 0.0);
        assert_eq!(sx.median_curve, sy.median_curve);
    }

    #[test]
    fn interpose_frequency_decays_per_episode() {
        // Spacewar rules fire nearly every step; pooled over seeds the
        // override fraction among eligible steps must track 0.8^episode.
        let mut arms = Vec::new();
        for seed in 0..6u64 {
            let mut c = quick_config("spacewar");
            c.mode = Mode::RilAccel;
            c.rule_sets = vec!["spacewar".into()];
            c.seed = seed;
            c.hyper.episodes = 8;
            arms.push(c);
        }
        let results = sweep(
            vec![Arm {
                name: "accel".into(),
                configs: arms,
            }],
            2,
        )
        .unwrap();
        let sessions: Vec<&SessionResult> = results[0]
            .sessions
            .iter()
            .map(|s| s.as_ref().unwrap())
            .collect();
        for episode in 0..8usize {
            let eligible: u64 = sessions
                .iter()
                .map(|s| s.metrics[episode].n_eligible as u64)
                .sum();
            let overrides: u64 = sessions
                .iter()
                .map(|s| s.metrics[episode].n_override as u64)
                .sum();
            if eligible < 30 {
                continue;
            }
            let p = 0.8f64.powi(episode as i32);
            let freq = overrides as f64 / eligible as f64;
            let se = (p * (1.0 - p) / eligible as f64).sqrt();
            assert!(
                (freq - p).abs() <= 3.0 * se + 1e-12,
                "episode {episode}: {freq} vs {p} (n={eligible})"
            );
        }
    }
}
