//! Pure renderers for every file the CLI emits: per-session metrics CSV,
//! sweep summary CSV, and plot-ready median/IQR curves. Each file starts
//! with the full config echoed as `# `-prefixed TOML plus the environment's
//! constants; a `# timestamp` line is the only part excluded from
//! byte-comparison.

use crate::config::RunConfig;
use crate::envs::EnvSpec;
use crate::harness::{ArmComparison, ArmSummary, EpisodeMetrics};

pub const SESSION_HEADER: &str =
    "episode,total_reward,steps,mean_max_q,n_explore,n_greedy,n_override,n_safety_violations";

const CONFIG_BEGIN: &str = "# --- config ---";
const CONFIG_END: &str = "# --- end config ---";

fn push_config_echo(out: &mut String, config: &RunConfig, timestamp: &str) {
    out.push_str(CONFIG_BEGIN);
    out.push('\n');
    for line in config.echo_toml().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(CONFIG_END);
    out.push('\n');
    out.push_str(&format!("# timestamp = {timestamp}\n"));
}

fn push_envspec(out: &mut String, spec: &EnvSpec) {
    out.push_str(&format!("# envspec.name = {}\n", spec.name));
    out.push_str(&format!(
        "# envspec.actions = {}\n",
        spec.action_labels.join("|")
    ));
    out.push_str(&format!("# envspec.feature_dim = {}\n", spec.feature_dim));
    out.push_str(&format!(
        "# envspec.max_episode_steps = {}\n",
        spec.max_episode_steps
    ));
    for (key, value) in &spec.constants {
        out.push_str(&format!("# envspec.{key} = {value}\n"));
    }
}

/// One CSV per training session.
pub fn render_session_csv(
    config: &RunConfig,
    spec: &EnvSpec,
    metrics: &[EpisodeMetrics],
    timestamp: &str,
) -> String {
    let mut out = String::new();
    push_config_echo(&mut out, config, timestamp);
    push_envspec(&mut out, spec);
    out.push_str(SESSION_HEADER);
    out.push('\n');
    for m in metrics {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            m.episode,
            m.total_reward,
            m.steps,
            m.mean_max_q,
            m.n_explore,
            m.n_greedy,
            m.n_override,
            m.n_safety_violations
        ));
    }
    out
}

/// Per-arm aggregates plus fixed-reward/fixed-budget comparisons against
/// the first (reference) arm.
pub fn render_summary_csv(
    config: &RunConfig,
    spec: &EnvSpec,
    summaries: &[ArmSummary],
    comparisons: &[ArmComparison],
    timestamp: &str,
) -> String {
    assert_eq!(summaries.len(), comparisons.len());
    let mut out = String::new();
    push_config_echo(&mut out, config, timestamp);
    push_envspec(&mut out, spec);
    out.push_str(
        "arm,seeds,aborts,median_mean_episode_reward,reward_q1,reward_q3,\
         reached_threshold,median_episodes_to_threshold,median_steps_to_threshold,\
         total_safety_violations,time_saved_pct,reward_improved_pct\n",
    );
    for (summary, cmp) in summaries.iter().zip(comparisons) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            summary.name,
            summary.seeds.len(),
            summary.aborts,
            summary.median_mean_reward(),
            crate::stats::quantile(&summary.mean_episode_reward, 0.25),
            crate::stats::quantile(&summary.mean_episode_reward, 0.75),
            summary.reached_count(),
            summary.median_episodes_to_threshold(),
            summary.median_steps_to_threshold(),
            summary.violations_total(),
            cmp.time_saved_pct,
            cmp.reward_improved_pct
        ));
    }
    out
}

/// Plot data: per-episode median and quartiles, one column triple per arm.
pub fn render_curves_csv(
    config: &RunConfig,
    spec: &EnvSpec,
    summaries: &[ArmSummary],
    timestamp: &str,
) -> String {
    let mut out = String::new();
    push_config_echo(&mut out, config, timestamp);
    push_envspec(&mut out, spec);
    out.push_str("episode");
    for s in summaries {
        out.push_str(&format!(",{0}_median,{0}_q1,{0}_q3", s.name));
    }
    out.push('\n');
    let len = summaries
        .iter()
        .map(|s| s.median_curve.len())
        .min()
        .unwrap_or(0);
    for i in 0..len {
        out.push_str(&format!("{i}"));
        for s in summaries {
            out.push_str(&format!(
                ",{},{},{}",
                s.median_curve[i], s.q1_curve[i], s.q3_curve[i]
            ));
        }
        out.push('\n');
    }
    out
}

/// Drop the timestamp line, for byte-for-byte reproducibility comparisons.
pub fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# timestamp = "))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Recover the embedded config TOML from an emitted file.
pub fn extract_config_echo(text: &str) -> Option<String> {
    let mut lines = Vec::new();
    let mut inside = false;
    for line in text.lines() {
        match line {
            l if l == CONFIG_BEGIN => inside = true,
            l if l == CONFIG_END => return Some(lines.join("\n")),
            l if inside => lines.push(l.strip_prefix("# ").unwrap_or(l)),
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigFile;
    use crate::envs::{make_env, EnvParams};

    fn sample_metrics() -> Vec<EpisodeMetrics> {
        vec![EpisodeMetrics {
            episode: 0,
            total_reward: -3.5,
            steps: 7,
            mean_max_q: 0.25,
            n_explore: 4,
            n_greedy: 2,
            n_override: 1,
            n_safety_violations: 0,
            n_eligible: 2,
        }]
    }

    #[test]
    fn session_csv_has_echo_and_rows() {
        let cfg = RunConfig::defaults_for("chain").unwrap();
        let env = make_env("chain", &EnvParams::default()).unwrap();
        let csv = render_session_csv(&cfg, env.spec(), &sample_metrics(), "123");
        assert!(csv.contains("# env = \"chain\""));
        assert!(csv.contains("# timestamp = 123"));
        assert!(csv.contains(SESSION_HEADER));
        assert!(csv.ends_with("0,-3.5,7,0.25,4,2,1,0\n"));
    }

    #[test]
    fn timestamp_is_the_only_unstable_line() {
        let cfg = RunConfig::defaults_for("chain").unwrap();
        let env = make_env("chain", &EnvParams::default()).unwrap();
        let a = render_session_csv(&cfg, env.spec(), &sample_metrics(), "111");
        let b = render_session_csv(&cfg, env.spec(), &sample_metrics(), "222");
        assert_ne!(a, b);
        assert_eq!(strip_timestamp(&a), strip_timestamp(&b));
    }

    #[test]
    fn embedded_echo_parses_back_to_the_same_config() {
        let mut cfg = RunConfig::defaults_for("gridworld").unwrap();
        cfg.mode = crate::config::Mode::RilSafety;
        cfg.rule_sets = vec!["gridworld-safety".into()];
        cfg.env_params.layout = Some("small".into());
        let env = make_env("gridworld", &cfg.env_params).unwrap();
        let csv = render_session_csv(&cfg, env.spec(), &[], "0");
        let echo = extract_config_echo(&csv).unwrap();
        let rebuilt =
            ConfigFile::parse(&echo).unwrap().apply(&RunConfig::defaults_for("gridworld").unwrap());
        assert_eq!(rebuilt, cfg);
    }
}
