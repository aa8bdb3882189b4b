//! `rulemcts`: generate merge scenarios, run single episodes and benchmark
//! planner variants.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rulemcts::behavior::BehaviorParams;
use rulemcts::bench::{
    aggregate, aggregate_timing, emit_report, emit_timing, generate_suite, load_scenario,
    run_episode, EpisodeResult, EpisodeSetup, Scenario,
};
use rulemcts::ltlf::RuleSet;
use rulemcts::planner::{PlannerConfig, Variant};

#[derive(Parser)]
#[command(name = "rulemcts", version, about = "Rule-aware MCTS merge benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded suite of merge scenarios.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run one episode and write its result (with trace) as JSON.
    Run {
        /// Scenario file.
        scenario: PathBuf,
        #[arg(long, default_value = "SA-Lex-Zip-SD")]
        variant: Variant,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run every variant x budget x scenario x seed and write a report.
    Bench {
        /// Directory of scenario files (`*.toml`).
        scenarios: PathBuf,
        /// Comma-separated variant names, or `all`.
        #[arg(long, default_value = "all")]
        variants: String,
        #[arg(long, value_delimiter = ',', default_value = "200,500,1000")]
        iterations: Vec<usize>,
        /// Number of seeds per cell; seeds are 0, 1, ...
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Rebuild the report from an `episodes.jsonl` file.
    Report {
        episodes: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Planner configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Behavior model parameters (TOML).
    #[arg(long)]
    behavior: Option<PathBuf>,
    /// Rule definitions; defaults to the shipped zipper and safe-distance
    /// rules.
    #[arg(long)]
    rules: Option<PathBuf>,
}

impl CommonArgs {
    fn setup(&self) -> Result<EpisodeSetup> {
        let planner = match &self.config {
            Some(p) => {
                let text =
                    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                PlannerConfig::from_toml(&text).with_context(|| format!("{}", p.display()))?
            }
            None => PlannerConfig::default(),
        };
        let behavior = match &self.behavior {
            Some(p) => {
                let text =
                    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                let b: BehaviorParams =
                    toml::from_str(&text).with_context(|| format!("{}", p.display()))?;
                if let Err(e) = b.validate() {
                    bail!("{}: {e}", p.display());
                }
                b
            }
            None => BehaviorParams::default(),
        };
        let rules = match &self.rules {
            Some(p) => {
                let text =
                    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                RuleSet::parse(&text).with_context(|| format!("{}", p.display()))?
            }
            None => RuleSet::default_traffic(),
        };
        let compiled = rules.compile().context("compiling rules")?;
        Ok(EpisodeSetup::new(planner, behavior, compiled))
    }
}

fn load_dir(dir: &Path) -> Result<Vec<Scenario>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no scenario files in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| load_scenario(p).with_context(|| format!("loading {}", p.display())))
        .collect()
}

fn parse_variants(s: &str) -> Result<Vec<Variant>> {
    if s == "all" {
        return Ok(Variant::ALL.to_vec());
    }
    s.split(',')
        .map(|v| v.trim().parse::<Variant>().map_err(anyhow::Error::msg))
        .collect()
}

fn gen(seed: u64, count: usize, out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for sc in generate_suite(seed, count) {
        let p = out.join(format!("{}.toml", sc.name));
        fs::write(&p, sc.to_toml()).with_context(|| format!("writing {}", p.display()))?;
    }
    println!("wrote {count} scenarios to {}", out.display());
    Ok(())
}

fn run(
    scenario: &Path,
    variant: Variant,
    iterations: usize,
    seed: u64,
    out: Option<&Path>,
    common: &CommonArgs,
) -> Result<()> {
    let sc = load_scenario(scenario).with_context(|| format!("loading {}", scenario.display()))?;
    let setup = common.setup()?;
    let result = run_episode(&sc, &setup, variant, iterations, seed)?;
    println!(
        "{} {} it={} seed={}: {:?} after {} steps, violations {:?}",
        sc.name, variant, iterations, seed, result.outcome, result.steps, result.violations
    );
    if let Some(p) = out {
        fs::write(p, result.to_json() + "\n")
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

struct Job<'a> {
    scenario: &'a Scenario,
    variant: Variant,
    budget: usize,
    seed: u64,
}

fn bench(
    dir: &Path,
    variants: &str,
    budgets: &[usize],
    seeds: u64,
    jobs: usize,
    out: &Path,
    common: &CommonArgs,
) -> Result<bool> {
    let scenarios = load_dir(dir)?;
    let variants = parse_variants(variants)?;
    let setup = common.setup()?;
    let mut queue = Vec::new();
    for &variant in &variants {
        for &budget in budgets {
            for sc in &scenarios {
                for seed in 0..seeds {
                    queue.push(Job {
                        scenario: sc,
                        variant,
                        budget,
                        seed,
                    });
                }
            }
        }
    }
    let total = queue.len();
    eprintln!("running {total} episodes on {} thread(s)", jobs.max(1));

    let next = Mutex::new(0usize);
    type Slot = Mutex<Option<(Result<EpisodeResult, String>, f64)>>;
    let slots: Vec<Slot> = (0..total).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(|| loop {
                let i = {
                    let mut n = next.lock().unwrap();
                    let i = *n;
                    *n += 1;
                    i
                };
                let Some(job) = queue.get(i) else { break };
                let start = Instant::now();
                let r = run_episode(job.scenario, &setup, job.variant, job.budget, job.seed)
                    .map_err(|e| e.to_string());
                let secs = start.elapsed().as_secs_f64();
                *slots[i].lock().unwrap() = Some((r, secs));
            });
        }
    });

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut results = Vec::new();
    let mut timed = Vec::new();
    let mut failed = 0;
    for slot in slots {
        match slot.into_inner().unwrap().expect("every job ran") {
            (Ok(r), secs) => {
                timed.push(secs);
                results.push(r);
            }
            (Err(e), _) => {
                eprintln!("error: {e}");
                failed += 1;
            }
        }
    }
    let episodes_path = out.join("episodes.jsonl");
    let mut f = fs::File::create(&episodes_path)
        .with_context(|| format!("creating {}", episodes_path.display()))?;
    for r in &results {
        writeln!(f, "{}", r.to_json())?;
    }
    if !results.is_empty() {
        let report = aggregate(&results)?;
        emit_report(&report, out)?;
        let pairs: Vec<(&EpisodeResult, f64)> = results.iter().zip(timed.iter().copied()).collect();
        emit_timing(&aggregate_timing(&pairs), out)?;
        print_table(&report);
    }
    eprintln!(
        "{} episodes ok, {failed} failed; output in {}",
        results.len(),
        out.display()
    );
    Ok(failed == 0)
}

fn print_table(report: &rulemcts::bench::BenchmarkReport) {
    println!(
        "{:<15} {:>6} {:>5} {:>8} {:>8} {:>8} {:>8}",
        "variant", "budget", "n", "coll%", "succ%", "zip%", "sd%"
    );
    for r in &report.rows {
        println!(
            "{:<15} {:>6} {:>5} {:>8.1} {:>8.1} {:>8.1} {:>8.1}",
            r.variant.name(),
            r.budget,
            r.episodes,
            r.collision_rate,
            r.success_rate,
            r.zip_violation_rate,
            r.sd_violation_rate
        );
    }
}

fn report(episodes: &Path, out: &Path) -> Result<()> {
    let f = fs::File::open(episodes).with_context(|| format!("opening {}", episodes.display()))?;
    let mut results = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: EpisodeResult = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}", episodes.display(), i + 1))?;
        results.push(r);
    }
    let report = aggregate(&results)?;
    emit_report(&report, out)?;
    print_table(&report);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { seed, count, out } => gen(seed, count, &out),
        Command::Run {
            scenario,
            variant,
            iterations,
            seed,
            out,
            common,
        } => run(
            &scenario,
            variant,
            iterations,
            seed,
            out.as_deref(),
            &common,
        ),
        Command::Bench {
            scenarios,
            variants,
            iterations,
            seeds,
            jobs,
            out,
            common,
        } => {
            if !bench(
                &scenarios,
                &variants,
                &iterations,
                seeds,
                jobs,
                &out,
                &common,
            )? {
                std::process::exit(1);
            }
            Ok(())
        }
        Command::Report { episodes, out } => report(&episodes, &out),
    }
}
