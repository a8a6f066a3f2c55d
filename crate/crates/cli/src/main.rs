use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use narrative_tension::metrics::{causal_graph, EdgeFilterConfig};
use narrative_tension::parse::{parse_formula, Vocabulary};
use narrative_tension::replay::replay;
use narrative_tension::{load, Story, Time};

/// Replay a story through a nonmonotonic listener and report its curiosity,
/// suspense and surprise.
#[derive(Parser)]
#[command(name = "ntension", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the System Z strata of the story's default rules.
    Stratify { file: PathBuf },
    /// Decide `premise |~ conclusion` against the listener's state.
    Infer {
        file: PathBuf,
        #[arg(long, default_value = "true")]
        premise: String,
        #[arg(long)]
        conclusion: String,
        /// Use the facts revealed up to this step (default: all of them).
        #[arg(long)]
        step: Option<Time>,
        /// Restrict the state to time points up to this one.
        #[arg(long)]
        until: Option<Time>,
    },
    /// Full replay report as JSON.
    Emotions { file: PathBuf },
    /// Causal graph in DOT.
    Graph {
        file: PathBuf,
        #[arg(long)]
        until: Option<Time>,
        /// Keep vacuous and backward strict-rule edges.
        #[arg(long)]
        raw_edges: bool,
        #[arg(long)]
        step: Option<Time>,
    },
    /// Per-query intensities over time as CSV.
    Tension { file: PathBuf },
}

fn state(
    story: &Story,
    step: Option<Time>,
    until: Option<Time>,
) -> narrative_tension::EpistemicState {
    let b = step.map_or_else(|| story.full_state(), |s| story.state_at(s));
    match until {
        Some(t) => b.until(t),
        None => b,
    }
}

fn check_time(story: &Story, flag: &str, t: Option<Time>) -> Result<()> {
    if let Some(t) = t {
        anyhow::ensure!(
            t <= story.horizon,
            "--{flag} {t} exceeds horizon {}",
            story.horizon
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Stratify { file } => {
            let story = load(&file)?;
            let base = narrative_tension::stratify(&story.defaults)?;
            println!("n = {}", base.n());
            for (i, stratum) in base.strata().iter().enumerate() {
                println!("stratum {} ({} rules)", i + 1, stratum.len());
                for r in stratum {
                    println!("  {r}");
                }
            }
        }
        Command::Infer {
            file,
            premise,
            conclusion,
            step,
            until,
        } => {
            let story = load(&file)?;
            check_time(&story, "step", step)?;
            check_time(&story, "until", until)?;
            let vocab = Vocabulary::new(story.horizon, &story.variables);
            let alpha = parse_formula(&premise, vocab).context("--premise")?;
            let beta = parse_formula(&conclusion, vocab).context("--conclusion")?;
            let b = state(&story, step, until);
            let out = match b.query(&alpha)? {
                Some(mut q) => {
                    let verdict = q.entails(&beta);
                    json!({
                        "premise": alpha.to_string(),
                        "conclusion": beta.to_string(),
                        "verdict": verdict,
                        "consistent": true,
                        "cardinality_vector": q.family().vector(),
                        "preferred_subbases": q.family().len(),
                    })
                }
                None => json!({
                    "premise": alpha.to_string(),
                    "conclusion": beta.to_string(),
                    "verdict": false,
                    "consistent": false,
                    "cardinality_vector": null,
                    "preferred_subbases": 0,
                }),
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Emotions { file } => {
            let report = replay(&load(&file)?);
            println!("{}", report.to_json());
            if report.has_errors() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Graph {
            file,
            until,
            raw_edges,
            step,
        } => {
            let story = load(&file)?;
            check_time(&story, "step", step)?;
            check_time(&story, "until", until)?;
            let filter = if raw_edges {
                EdgeFilterConfig::raw()
            } else {
                EdgeFilterConfig::default()
            };
            print!(
                "{}",
                causal_graph(&state(&story, step, until), filter).to_dot()
            );
        }
        Command::Tension { file } => {
            let report = replay(&load(&file)?);
            print!("{}", report.to_csv());
            if report.has_errors() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
