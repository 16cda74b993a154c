use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fpv_bench::{
    default_lambdas, generate_grid, load_files, prefix_len, run_benchmark, timing_profile,
    write_report, BenchConfig, BenchError, GridSpec, InstancePaths, PreparedInstance,
    RecognitionInstance, TimingConfig,
};
use fpv_core::{
    estimate_all, exact_oracle, recognize, recognize_online, Aggregation, CoreError,
    EstimatorConfig, FactProbabilityTable, OracleConfig, RecognitionStep, DEFAULT_MAX_STATES,
};
use fpv_pddl::{FactId, GroundProblem};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "fpv",
    version,
    about = "Online goal recognition with fact probability vectors"
)]
struct Cli {
    /// Worker threads for parallel sections; output does not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate fact observation probabilities for every hypothesis
    Estimate {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Directory for the per-goal CSV files
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Rank hypotheses after every observation
    Recognize {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        obs: PathBuf,
        /// File naming the true hypothesis, echoed in the output
        #[arg(long)]
        real: Option<PathBuf>,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Only report the prefix of length floor(T * lambda)
        #[arg(long)]
        at_lambda: Option<f64>,
        /// Include per-step wall-clock times (makes output nondeterministic)
        #[arg(long)]
        timings: bool,
        /// Write here instead of standard output
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Exact probabilities over all cost-optimal plans (small problems only)
    Oracle {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Give up after expanding this many states
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Evaluate precision and spread over a dataset of instances
    Bench {
        #[arg(long)]
        dataset: PathBuf,
        /// Observation fractions, comma separated
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        timings: bool,
        /// Directory for report.json and precision.csv
        #[arg(long)]
        output: PathBuf,
    },
    /// Write a random grid navigation instance
    GenGrid {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        goals: usize,
        /// Probability that a cell is an obstacle
        #[arg(long, default_value_t = 0.0)]
        blocked: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance directory to create
        #[arg(long)]
        output: PathBuf,
    },
    /// Estimation and per-observation recognition times on generated grids
    Timing {
        #[arg(long, value_delimiter = ',', default_value = "5,10,25,50,100")]
        observations: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "5,10")]
        goals: Vec<usize>,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, default_value_t = 5)]
        rounds: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    domain: PathBuf,
    /// Problem file with a <HYPOTHESIS> goal placeholder
    #[arg(long)]
    template: PathBuf,
    /// One hypothesis per line, atoms separated by commas
    #[arg(long)]
    hyps: PathBuf,
}

#[derive(Args)]
struct SamplingArgs {
    /// Supporter sets sampled per goal
    #[arg(long, default_value_t = 10)]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "empirical-union")]
    aggregation: Aggregation,
}

impl SamplingArgs {
    fn config(&self) -> Result<EstimatorConfig> {
        if self.n_samples == 0 {
            bail!("--n-samples must be at least 1");
        }
        Ok(EstimatorConfig {
            samples: self.n_samples,
            seed: self.seed,
            aggregation: self.aggregation,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

/// The error chain joined with `: `, skipping causes the outer message
/// already spells out.
fn message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

/// 2 when a resource cap stopped the run, 1 for everything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    let capped = e.chain().any(|c| {
        matches!(
            c.downcast_ref::<CoreError>(),
            Some(CoreError::CapExceeded { .. })
        ) || matches!(
            c.downcast_ref::<BenchError>(),
            Some(BenchError::Core(CoreError::CapExceeded { .. }))
        )
    });
    if capped {
        2
    } else {
        1
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Estimate {
            instance,
            sampling,
            output,
            format,
        } => {
            let config = sampling.config()?;
            let (inst, prepared) = load(&instance, None, None)?;
            let tables = estimate_all(&prepared.problem, &config)?;
            let comments = vec![
                ("aggregation", config.aggregation.to_string()),
                ("samples", config.samples.to_string()),
                ("seed", config.seed.to_string()),
            ];
            emit_tables(
                &inst,
                &prepared.problem,
                &tables,
                &comments,
                output.as_deref(),
                format,
            )
        }
        Command::Oracle {
            instance,
            max_states,
            output,
            format,
        } => {
            let (inst, prepared) = load(&instance, None, None)?;
            let problem = &prepared.problem;
            let config = OracleConfig { max_states };
            let tables = (0..problem.goals().len())
                .into_par_iter()
                .map(|g| {
                    exact_oracle(problem, g, &config)
                        .with_context(|| format!("goal {}", hyp_name(&inst, g)))
                })
                .collect::<Result<Vec<_>>>()?;
            let comments = vec![("method", "exact-optimal-plans".to_string())];
            emit_tables(
                &inst,
                problem,
                &tables,
                &comments,
                output.as_deref(),
                format,
            )
        }
        Command::Recognize {
            instance,
            obs,
            real,
            sampling,
            at_lambda,
            timings,
            output,
            format,
        } => {
            let config = sampling.config()?;
            let (inst, prepared) = load(&instance, Some(obs), real.clone())?;
            let report = recognition_report(
                &inst,
                &prepared,
                &config,
                at_lambda,
                timings,
                real.is_some(),
            )?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
                Format::Text => report.to_text(),
                Format::Csv => bail!("recognize supports --format json or text"),
            };
            match output {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
                }
                None => io::stdout()
                    .write_all(text.as_bytes())
                    .context("writing to standard output"),
            }
        }
        Command::Bench {
            dataset,
            lambdas,
            sampling,
            repeats,
            timings,
            output,
        } => {
            if repeats == 0 {
                bail!("--repeats must be at least 1");
            }
            let config = BenchConfig {
                lambdas: lambdas.unwrap_or_else(default_lambdas),
                estimator: sampling.config()?,
                repeats,
                timings,
            };
            let report = run_benchmark(&dataset, &config)?;
            write_report(&report, &output)?;
            let mut out = io::stdout().lock();
            writeln!(
                out,
                "{} instances, {} failed",
                report.instances_total, report.instances_failed
            )?;
            for f in &report.failures {
                writeln!(out, "  failed {}: {}", f.instance, f.error)?;
            }
            let lambdas: Vec<String> = report.lambdas.iter().map(|l| format!("{l:>6}")).collect();
            writeln!(out, "lambda   {}      S", lambdas.join(""))?;
            for (name, m) in [("fpv", &report.fpv), ("uniform", &report.uniform)] {
                let row: Vec<String> = m.precision.iter().map(|p| format!("{p:>6.3}")).collect();
                writeln!(out, "{name:<8} {} {:>6.2}", row.join(""), m.mean_spread)?;
            }
            writeln!(out, "wrote {}", output.display())?;
            Ok(())
        }
        Command::GenGrid {
            width,
            height,
            goals,
            blocked,
            seed,
            output,
        } => {
            let inst = generate_grid(&GridSpec {
                width,
                height,
                goals,
                blocked,
                seed,
            })?;
            inst.write_to(&output)?;
            println!(
                "wrote {} ({} goals, {} observations)",
                output.display(),
                inst.hypotheses.len(),
                inst.observations.len()
            );
            Ok(())
        }
        Command::Timing {
            observations,
            goals,
            sampling,
            rounds,
            format,
        } => {
            let rows = timing_profile(&TimingConfig {
                observation_counts: observations,
                goal_counts: goals,
                estimator: sampling.config()?,
                rounds,
            })?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
                Format::Text | Format::Csv => {
                    println!("goals  obs  facts  estimate/goal(ms)  recognize/obs(us)");
                    for r in rows {
                        println!(
                            "{:>5} {:>4} {:>6} {:>18.3} {:>18.3}",
                            r.goals,
                            r.observations,
                            r.facts,
                            r.estimation_ns_per_goal / 1e6,
                            r.recognition_ns_per_observation / 1e3
                        );
                    }
                }
            }
            Ok(())
        }
    }
}

fn load(
    args: &InstanceArgs,
    obs: Option<PathBuf>,
    real: Option<PathBuf>,
) -> Result<(RecognitionInstance, PreparedInstance)> {
    let paths = InstancePaths {
        domain: args.domain.clone(),
        template: args.template.clone(),
        hyps: args.hyps.clone(),
        obs,
        real,
    };
    let inst = load_files(&paths)?;
    let prepared = inst.prepare()?;
    Ok((inst, prepared))
}

fn hyp_name(inst: &RecognitionInstance, g: usize) -> String {
    inst.hypotheses[g]
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Serialize)]
struct TableJson<'a> {
    hypothesis: String,
    unreachable: bool,
    facts: Vec<FactJson<'a>>,
}

#[derive(Serialize)]
struct FactJson<'a> {
    fact: &'a str,
    p_observed: f64,
    p_not_observed: f64,
}

fn emit_tables(
    inst: &RecognitionInstance,
    problem: &GroundProblem,
    tables: &[FactProbabilityTable],
    comments: &[(&str, String)],
    output: Option<&Path>,
    format: Format,
) -> Result<()> {
    match format {
        Format::Csv => {
            let Some(dir) = output else {
                bail!("--output <DIR> is required for CSV tables");
            };
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (g, table) in tables.iter().enumerate() {
                let mut lines = vec![("goal", hyp_name(inst, g))];
                lines.extend(comments.iter().cloned());
                if table.is_unreachable() {
                    lines.push(("unreachable", "true".into()));
                }
                let path = dir.join(format!("goal_{g}.csv"));
                let file = fs::File::create(&path)
                    .with_context(|| format!("creating {}", path.display()))?;
                table
                    .write_csv(problem, &lines, io::BufWriter::new(file))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            println!("wrote {} tables to {}", tables.len(), dir.display());
        }
        Format::Json => {
            let out: Vec<TableJson> = tables
                .iter()
                .enumerate()
                .map(|(g, t)| TableJson {
                    hypothesis: hyp_name(inst, g),
                    unreachable: t.is_unreachable(),
                    facts: problem
                        .facts()
                        .iter()
                        .map(|f| FactJson {
                            fact: &f.name,
                            p_observed: t.values()[f.id.index()],
                            p_not_observed: 1.0 - t.values()[f.id.index()],
                        })
                        .collect(),
                })
                .collect();
            let text = serde_json::to_string_pretty(&out)? + "\n";
            write_out(output, &text)?;
        }
        Format::Text => {
            let mut text = String::new();
            let names: Vec<String> = (0..tables.len())
                .map(|g| format!("{:>10}", format!("G{g}")))
                .collect();
            text.push_str(&format!("{:<30}{}\n", "fact", names.join("")));
            for i in 0..problem.fact_count() {
                let f = FactId::from(i);
                let row: Vec<String> = tables
                    .iter()
                    .map(|t| format!("{:>10.3}", t.values()[i]))
                    .collect();
                let name = &problem.fact(f).expect("fact in range").name;
                text.push_str(&format!("{name:<30}{}\n", row.join("")));
            }
            write_out(output, &text)?;
        }
    }
    Ok(())
}

fn write_out(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .context("writing to standard output"),
    }
}

#[derive(Serialize)]
struct RecognitionReport {
    goals: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    true_goal: Option<usize>,
    observations: usize,
    steps: Vec<RecognitionStep>,
}

impl RecognitionReport {
    fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, g) in self.goals.iter().enumerate() {
            let mark = if self.true_goal == Some(i) {
                " (true)"
            } else {
                ""
            };
            out.push_str(&format!("G{i}: {g}{mark}\n"));
        }
        for s in &self.steps {
            let h: Vec<String> = s.h.iter().map(|v| format!("{v:.4}")).collect();
            out.push_str(&format!(
                "t={} h=[{}] recognized={:?}\n",
                s.t,
                h.join(", "),
                s.recognized
            ));
        }
        out
    }
}

fn recognition_report(
    inst: &RecognitionInstance,
    prepared: &PreparedInstance,
    config: &EstimatorConfig,
    at_lambda: Option<f64>,
    timings: bool,
    with_truth: bool,
) -> Result<RecognitionReport> {
    let problem = &prepared.problem;
    let tables = estimate_all(problem, config)?;
    let obs = &prepared.observations;
    let steps = match at_lambda {
        Some(l) if !(0.0..=1.0).contains(&l) => bail!("--at-lambda must be within [0, 1]"),
        Some(l) => {
            let k = prefix_len(obs.len(), l);
            let r = recognize(problem, &tables, &obs[..k])?;
            vec![RecognitionStep {
                t: k,
                h: r.h,
                recognized: r.recognized,
                elapsed_ns: None,
            }]
        }
        None => {
            let trace = recognize_online(problem, &tables, obs)?;
            if timings {
                trace.steps
            } else {
                trace.without_timings().steps
            }
        }
    };
    Ok(RecognitionReport {
        goals: (0..problem.goals().len())
            .map(|g| hyp_name(inst, g))
            .collect(),
        true_goal: with_truth.then_some(prepared.true_goal),
        observations: obs.len(),
        steps,
    })
}
