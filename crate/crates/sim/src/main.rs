use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use platoon_cache::config_file::load_config;
use platoon_cache::core::config::{PolicyKind, ProviderKind, SimConfig};
use platoon_cache::core::experiment::{prompt_at_round, World};
use platoon_cache::dataset::load_dataset;
use platoon_cache::synth::{generate, write_dataset, SynthSpec};

#[derive(Parser)]
#[command(name = "platoon-cache", version, about = "Three-tier platoon content caching simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured policy, seed and sweep point.
    Simulate(SimulateArgs),
    /// Check a config file and the dataset it points to.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the prompt for one round without calling any provider.
    InspectPrompt {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        round: u32,
        /// Defaults to the first configured seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a synthetic MovieLens-format dataset.
    GenDataset {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = SynthSpec::default().users)]
        users: u32,
        #[arg(long, default_value_t = SynthSpec::default().movies)]
        movies: u32,
        #[arg(long, default_value_t = SynthSpec::default().seed)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Repeatable; replaces the configured roster.
    #[arg(long = "policy", value_parser = parse_policy)]
    policies: Vec<PolicyKind>,
    /// Total platoon cache in content units, `start:end:step` or a comma list.
    #[arg(long, value_parser = parse_cache_sweep)]
    sweep_cache: Option<CacheSweep>,
    /// Target mean VFC sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sweep_vfc: Option<Vec<f64>>,
    /// Replaces the configured seed list.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    #[arg(long, value_parser = parse_provider)]
    provider: Option<ProviderKind>,
    /// Transcript to replay with the recorded provider.
    #[arg(long)]
    record: Option<PathBuf>,
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    PolicyKind::parse(s).ok_or_else(|| format!("unknown policy {s:?} (llm, popularity, random, clairvoyant)"))
}

fn parse_provider(s: &str) -> Result<ProviderKind, String> {
    match s {
        "mock" => Ok(ProviderKind::Mock),
        "recorded" => Ok(ProviderKind::Recorded),
        "http" => Ok(ProviderKind::Http),
        _ => Err(format!("unknown provider {s:?} (mock, recorded, http)")),
    }
}

#[derive(Debug, Clone)]
struct CacheSweep(Vec<u32>);

fn parse_cache_sweep(s: &str) -> Result<CacheSweep, String> {
    let num = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("{t:?}: {e}"));
    if let Some((a, rest)) = s.split_once(':') {
        let (b, step) = rest.split_once(':').ok_or("expected start:end:step")?;
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if step == 0 || a > b {
            return Err("need start <= end and step > 0".into());
        }
        Ok(CacheSweep((a..=b).step_by(step as usize).collect()))
    } else {
        s.split(',').map(num).collect::<Result<_, _>>().map(CacheSweep)
    }
}

fn apply(args: &SimulateArgs, mut config: SimConfig) -> anyhow::Result<SimConfig> {
    if !args.policies.is_empty() {
        config.policies = args.policies.clone();
    }
    if let Some(CacheSweep(v)) = &args.sweep_cache {
        config.sweep_cache_units = v.clone();
    }
    if let Some(v) = &args.sweep_vfc {
        config.sweep_vfc = v.clone();
    }
    if let Some(seed) = args.seed {
        config.seeds = vec![seed];
    }
    if let Some(p) = args.provider {
        config.provider = p;
    }
    if let Some(r) = &args.record {
        config.record_path = Some(r.to_string_lossy().into_owned());
        if args.provider.is_none() {
            config.provider = ProviderKind::Recorded;
        }
    }
    config.validate().context("invalid configuration after command-line overrides")?;
    Ok(config)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let config = apply(&args, load_config(&args.config)?)?;
            let run = platoon_cache::simulate(&config, &args.out)?;
            print!("{}", std::fs::read_to_string(&run.paths.results)?);
            for o in &run.outcomes {
                let fallbacks = o.result.rounds.iter().filter(|r| r.provider_error.is_some()).count();
                if fallbacks > 0 {
                    eprintln!("{}: {fallbacks} round(s) fell back to popularity", o.job.label());
                }
            }
            eprintln!("run directory: {}", run.paths.dir.display());
        }
        Command::ValidateConfig { config } => {
            let c = load_config(&config)?;
            let d = load_dataset(&c)?;
            let kept = d.truncate(c.n_users, c.n_contents)?;
            println!(
                "ok: {} users, {} contents, {} ratings after truncation; {} policies, {} seeds",
                kept.users.len(),
                kept.catalog.len(),
                kept.ratings.len(),
                c.policies.len(),
                c.seeds.len()
            );
        }
        Command::InspectPrompt { config, round, seed } => {
            let c = load_config(&config)?;
            if round < 1 || round > c.rounds {
                bail!("round must lie in 1..={}", c.rounds);
            }
            let seed = seed.unwrap_or(c.seeds[0]);
            let world = World::prepare(&c, &load_dataset(&c)?, seed)?;
            let prompt = prompt_at_round(&world, round)?;
            print!("{}", prompt.assembled);
            eprintln!("prompt digest: {}", prompt.digest());
        }
        Command::GenDataset { out, users, movies, seed } => {
            let spec = SynthSpec { users, movies, seed, ..SynthSpec::default() };
            write_dataset(&out, &generate(&spec))?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
