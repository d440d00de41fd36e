//! Command-line entry point: single training runs, baseline-vs-RIL
//! comparison sweeps, and greedy checkpoint evaluation. All file I/O lives
//! here; the library stays pure.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ril::config::{ConfigFile, Mode, RunConfig};
use ril::envs;
use ril::harness::{self, Arm, ArmSummary};
use ril::qlearn::{decode_checkpoint, encode_checkpoint};
use ril::report;

#[derive(Parser)]
#[command(name = "ril", version, about = "Rule-interposing deep Q-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one session and write its metrics CSV and final checkpoint.
    Train(TrainArgs),
    /// Run a multi-seed comparison sweep between two arms.
    Compare(CompareArgs),
    /// Evaluate a checkpoint greedily (no exploration, no rules, no learning).
    Eval(EvalArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Environment name (gridworld, flappy, spacewar, breakout, chain).
    #[arg(long)]
    env: Option<String>,
    /// baseline, ril-accel, ril-safety, or ril-both.
    #[arg(long)]
    mode: Option<String>,
    /// Rule set name; repeat for ril-both.
    #[arg(long)]
    rules: Vec<String>,
    /// Session seed (falls back to RIL_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<u32>,
    /// TOML config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    env: Option<String>,
    /// Number of seeds per arm (seeds run base..base+N).
    #[arg(long, default_value_t = 10)]
    seeds: u32,
    /// Environment-step budget per session.
    #[arg(long)]
    budget: Option<u64>,
    /// Exactly two arm modes, comma separated (e.g. baseline,ril-accel).
    #[arg(long, value_delimiter = ',')]
    arms: Vec<String>,
    /// Rule sets for the non-baseline arm (defaults per environment).
    #[arg(long)]
    rules: Vec<String>,
    /// Reward threshold for episodes-to-threshold (default per environment).
    #[arg(long)]
    threshold: Option<f64>,
    /// Base seed (falls back to RIL_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 2)]
    parallelism: usize,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    env: String,
    #[arg(long, default_value_t = 100)]
    episodes: u32,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Eval(args) => cmd_eval(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn timestamp() -> String {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".to_string())
}

fn env_var_seed() -> Option<u64> {
    std::env::var("RIL_SEED").ok().and_then(|v| v.parse().ok())
}

fn load_config_file(path: &Option<PathBuf>) -> Result<ConfigFile> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config file {}", p.display()))?;
            Ok(ConfigFile::parse(&text)?)
        }
    }
}

/// defaults < file < flags, with the environment name resolved first.
fn build_train_config(args: &TrainArgs) -> Result<RunConfig> {
    let file = load_config_file(&args.config)?;
    let env = args
        .env
        .clone()
        .or_else(|| file.env.clone())
        .context("no environment given (--env or `env` in the config file)")?;
    let mut cfg = file.apply(&RunConfig::defaults_for(&env)?);
    cfg.env = env;
    if let Some(mode) = &args.mode {
        cfg.mode = Mode::parse(mode)
            .ok_or_else(|| ril::config::ConfigError::UnknownMode(mode.clone()))?;
    }
    if !args.rules.is_empty() {
        cfg.rule_sets = args.rules.clone();
    }
    if let Some(seed) = args.seed.or_else(env_var_seed) {
        cfg.seed = seed;
    }
    if let Some(episodes) = args.episodes {
        cfg.hyper.episodes = episodes;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let cfg = build_train_config(&args)?;
    let out_dir = PathBuf::from(cfg.out.clone().unwrap_or_else(|| {
        format!("runs/{}-{}-s{}", cfg.env, cfg.mode.as_str(), cfg.seed)
    }));
    let env = envs::make_env(&cfg.env, &cfg.env_params).expect("validated");
    let spec = env.spec().clone();
    let stamp = timestamp();
    match harness::train(&cfg) {
        Ok(result) => {
            let csv = report::render_session_csv(&cfg, &spec, &result.metrics, &stamp);
            let metrics_path = out_dir.join("metrics.csv");
            write_file(&metrics_path, csv.as_bytes())?;
            let ck_path = out_dir.join("checkpoint.bin");
            write_file(&ck_path, &encode_checkpoint(&result.final_q, cfg.seed))?;
            let total_reward: f64 = result.metrics.iter().map(|m| m.total_reward).sum();
            println!(
                "trained {} episodes ({} env steps) on {} [{}]; mean episode reward {}",
                result.metrics.len(),
                result.total_steps,
                cfg.env,
                cfg.mode.as_str(),
                if result.metrics.is_empty() {
                    0.0
                } else {
                    total_reward / result.metrics.len() as f64
                }
            );
            println!("metrics: {}", metrics_path.display());
            println!("checkpoint: {}", ck_path.display());
            Ok(())
        }
        Err(harness::TrainError::Abort(abort)) => {
            let csv = report::render_session_csv(&cfg, &spec, &abort.metrics, &stamp);
            write_file(&out_dir.join("metrics.csv"), csv.as_bytes())?;
            write_file(
                &out_dir.join("checkpoint.bin"),
                &encode_checkpoint(&abort.last_good, cfg.seed),
            )?;
            bail!(
                "run aborted at episode {}: {} (partial metrics and last-good checkpoint written to {})",
                abort.episode,
                abort.reason,
                out_dir.display()
            );
        }
        Err(harness::TrainError::Config(e)) => Err(e.into()),
    }
}

fn build_compare_arms(args: &CompareArgs) -> Result<(RunConfig, Vec<Arm>)> {
    let file = load_config_file(&args.config)?;
    let env = args
        .env
        .clone()
        .or_else(|| file.env.clone())
        .context("no environment given (--env or `env` in the config file)")?;
    let mut base = file.apply(&RunConfig::defaults_for(&env)?);
    base.env = env.clone();
    if let Some(budget) = args.budget {
        base.max_total_steps = Some(budget);
        // Budget-bounded runs: let the step budget, not the episode count,
        // end the session.
        base.hyper.episodes = 1_000_000;
    }
    if let Some(threshold) = args.threshold {
        base.threshold = threshold;
    }
    let base_seed = args.seed.or_else(env_var_seed).unwrap_or(base.seed);
    if args.arms.len() != 2 {
        bail!(
            "--arms needs exactly two comma-separated modes, got {:?}",
            args.arms
        );
    }
    let mut arms = Vec::new();
    for (i, arm_name) in args.arms.iter().enumerate() {
        let mode = Mode::parse(arm_name)
            .ok_or_else(|| ril::config::ConfigError::UnknownMode(arm_name.clone()))?;
        let rules = if mode == Mode::Baseline {
            Vec::new()
        } else if !args.rules.is_empty() {
            args.rules.clone()
        } else if !base.rule_sets.is_empty() {
            base.rule_sets.clone()
        } else {
            RunConfig::default_rules_for(&env, mode)
        };
        let mut configs = Vec::new();
        for s in 0..args.seeds {
            let mut cfg = base.clone();
            cfg.mode = mode;
            cfg.rule_sets = rules.clone();
            cfg.seed = base_seed + s as u64;
            cfg.validate()?;
            configs.push(cfg);
        }
        // Duplicate mode names (baseline vs baseline) stay distinguishable.
        let name = if args.arms[..i].contains(arm_name) {
            format!("{arm_name}-{i}")
        } else {
            arm_name.clone()
        };
        arms.push(Arm { name, configs });
    }
    Ok((base, arms))
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let (base, arms) = build_compare_arms(&args)?;
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("runs/compare-{}", base.env)));
    let env = envs::make_env(&base.env, &base.env_params).expect("validated");
    let spec = env.spec().clone();
    let stamp = timestamp();

    let results = harness::sweep(arms, args.parallelism)?;
    for result in &results {
        for (cfg, session) in result.configs.iter().zip(&result.sessions) {
            let metrics = match session {
                Ok(r) => &r.metrics,
                Err(a) => &a.metrics,
            };
            let csv = report::render_session_csv(cfg, &spec, metrics, &stamp);
            let path = out_dir
                .join("sessions")
                .join(format!("{}-s{}.csv", result.name, cfg.seed));
            write_file(&path, csv.as_bytes())?;
        }
    }

    let summaries: Vec<ArmSummary> = results
        .iter()
        .map(|r| harness::summarize_arm(r, base.threshold, base.threshold_window))
        .collect();
    let comparisons: Vec<harness::ArmComparison> = summaries
        .iter()
        .map(|s| harness::compare_arms(&summaries[0], s))
        .collect();
    let summary_csv =
        report::render_summary_csv(&base, &spec, &summaries, &comparisons, &stamp);
    write_file(&out_dir.join("summary.csv"), summary_csv.as_bytes())?;
    let curves_csv = report::render_curves_csv(&base, &spec, &summaries, &stamp);
    write_file(&out_dir.join("curves.csv"), curves_csv.as_bytes())?;

    for (summary, cmp) in summaries.iter().zip(&comparisons) {
        println!(
            "arm {:>12}: median reward/episode {:.3}, reached threshold {}/{} \
             (median episodes {:.1}, steps {:.0}), violations {}, aborts {}",
            summary.name,
            summary.median_mean_reward(),
            summary.reached_count(),
            summary.seeds.len(),
            summary.median_episodes_to_threshold(),
            summary.median_steps_to_threshold(),
            summary.violations_total(),
            summary.aborts
        );
        if summary.name != summaries[0].name {
            println!(
                "  vs {}: time saved {:.2}% (env steps to threshold {}), reward improved {:.2}%",
                summaries[0].name, cmp.time_saved_pct, base.threshold, cmp.reward_improved_pct
            );
        }
    }
    println!("summary: {}", out_dir.join("summary.csv").display());
    println!("curves: {}", out_dir.join("curves.csv").display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let bytes = std::fs::read(&args.checkpoint)
        .with_context(|| format!("reading checkpoint {}", args.checkpoint.display()))?;
    let (q, _seed) = decode_checkpoint(&bytes)
        .with_context(|| format!("decoding checkpoint {}", args.checkpoint.display()))?;
    let mut env = envs::make_env(&args.env, &envs::EnvParams::default())
        .map_err(|e| anyhow::anyhow!(e))?;
    let seed = args.seed.or_else(env_var_seed).unwrap_or(0);
    let result = harness::evaluate(&q, env.as_mut(), args.episodes, seed)
        .map_err(|e| anyhow::anyhow!(e))?;
    if result.empty {
        println!("no episodes requested; nothing evaluated");
    } else {
        println!(
            "mean return over {} greedy episodes on {}: {}",
            result.episodes, args.env, result.mean_return
        );
    }
    Ok(())
}
