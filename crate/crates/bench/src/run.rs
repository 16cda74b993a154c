use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fpv_core::{
    derive_seed, estimate, recognize_online, Aggregation, EstimatorConfig, RecognitionStep,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::BenchError;
use crate::instance::{load_instance, RecognitionInstance};
use crate::metrics::{mean_std, precision, prefix_len, spread};

/// `0.1, 0.2, ..., 1.0`
pub fn default_lambdas() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub lambdas: Vec<f64>,
    pub estimator: EstimatorConfig,
    pub repeats: usize,
    /// Record wall-clock times. Off by default so reports are reproducible.
    pub timings: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            lambdas: default_lambdas(),
            estimator: EstimatorConfig::default(),
            repeats: 1,
            timings: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    /// Per lambda, mean over repeats.
    pub precision: Vec<f64>,
    pub precision_std: Vec<f64>,
    pub spread: Vec<f64>,
    pub spread_std: Vec<f64>,
    /// Spread averaged over all lambdas.
    pub mean_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceRun {
    pub seed: u64,
    /// Recognized goal indices per lambda.
    pub recognized: Vec<Vec<usize>>,
    pub trace: Vec<RecognitionStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceReport {
    pub name: String,
    pub goals: usize,
    pub true_goal: usize,
    pub observations: usize,
    pub runs: Vec<InstanceRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub instance: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingSummary {
    pub estimation_ns_per_goal: f64,
    pub recognition_ns_per_observation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub lambdas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub repeats: usize,
    pub aggregation: Aggregation,
    pub instances_total: usize,
    pub instances_failed: usize,
    pub fpv: MethodSummary,
    /// Recognizes every goal at every step.
    pub uniform: MethodSummary,
    pub instances: Vec<InstanceReport>,
    pub failures: Vec<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingSummary>,
}

/// Instance directories under `root`, sorted by name.
pub fn list_instances(root: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let entries = fs::read_dir(root).map_err(|source| BenchError::Io {
        path: root.to_path_buf(),
        source,
    })?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(BenchError::EmptyDataset(root.to_path_buf()));
    }
    Ok(dirs)
}

/// Loads every instance under `root` and evaluates it.
pub fn run_benchmark(root: &Path, config: &BenchConfig) -> Result<EvaluationReport, BenchError> {
    let loaded: Vec<(String, Result<RecognitionInstance, BenchError>)> = list_instances(root)?
        .into_iter()
        .map(|dir| {
            let name = dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            (name, load_instance(&dir))
        })
        .collect();
    run_instances(loaded, config)
}

fn repeat_seed(seed: u64, r: usize) -> u64 {
    if r == 0 {
        seed
    } else {
        derive_seed(seed, &[r as u64])
    }
}

struct Evaluated {
    report: InstanceReport,
    estimation_ns: Vec<f64>,
    step_ns: Vec<f64>,
}

fn evaluate(instance: &RecognitionInstance, config: &BenchConfig) -> Result<Evaluated, BenchError> {
    let prepared = instance.prepare()?;
    let problem = &prepared.problem;
    let goals = problem.goals().len();
    let total = prepared.observations.len();
    let mut runs = Vec::with_capacity(config.repeats);
    let mut estimation_ns = Vec::new();
    let mut step_ns = Vec::new();
    for r in 0..config.repeats {
        let estimator = EstimatorConfig {
            seed: repeat_seed(config.estimator.seed, r),
            ..config.estimator
        };
        let start = Instant::now();
        let tables = (0..goals)
            .map(|g| estimate(problem, g, &estimator))
            .collect::<Result<Vec<_>, _>>()?;
        estimation_ns.push(start.elapsed().as_nanos() as f64 / goals as f64);
        if tables[prepared.true_goal].is_unreachable() {
            let name = instance.hypotheses[prepared.true_goal]
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            return Err(BenchError::UnreachableTrueGoal(name));
        }

        // one online pass serves every lambda
        let trace = recognize_online(problem, &tables, &prepared.observations)?;
        step_ns.extend(
            trace
                .steps
                .iter()
                .filter_map(|s| s.elapsed_ns)
                .map(|n| n as f64),
        );
        let recognized = config
            .lambdas
            .iter()
            .map(|&l| match prefix_len(total, l) {
                0 => (0..goals).collect(),
                k => trace.steps[k - 1].recognized.clone(),
            })
            .collect();
        let trace = if config.timings {
            trace
        } else {
            trace.without_timings()
        };
        runs.push(InstanceRun {
            seed: estimator.seed,
            recognized,
            trace: trace.steps,
        });
    }
    Ok(Evaluated {
        report: InstanceReport {
            name: instance.name.clone(),
            goals,
            true_goal: prepared.true_goal,
            observations: total,
            runs,
        },
        estimation_ns,
        step_ns,
    })
}

/// Precision and spread per lambda for one repeat.
type RepeatScores = (Vec<f64>, Vec<f64>);

fn summarize(per_repeat: &[RepeatScores], lambdas: usize) -> MethodSummary {
    let column = |pick: &dyn Fn(&RepeatScores) -> f64| {
        mean_std(&per_repeat.iter().map(pick).collect::<Vec<_>>())
    };
    let mut s = MethodSummary {
        precision: Vec::new(),
        precision_std: Vec::new(),
        spread: Vec::new(),
        spread_std: Vec::new(),
        mean_spread: 0.0,
    };
    for i in 0..lambdas {
        let (p, ps) = column(&|r| r.0[i]);
        let (sp, sps) = column(&|r| r.1[i]);
        s.precision.push(p);
        s.precision_std.push(ps);
        s.spread.push(sp);
        s.spread_std.push(sps);
    }
    s.mean_spread = s.spread.iter().sum::<f64>() / lambdas as f64;
    s
}

/// Evaluates already loaded instances; load failures are passed in as errors
/// and reported like any other failure.
pub fn run_instances(
    instances: Vec<(String, Result<RecognitionInstance, BenchError>)>,
    config: &BenchConfig,
) -> Result<EvaluationReport, BenchError> {
    if let Some(&l) = config.lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(BenchError::InvalidLambda(l));
    }
    if config.estimator.samples == 0 {
        return Err(fpv_core::CoreError::ZeroSamples.into());
    }
    let total = instances.len();
    let outcomes: Vec<(String, Result<Evaluated, BenchError>)> = instances
        .into_par_iter()
        .map(|(name, inst)| {
            let result = inst.and_then(|i| evaluate(&i, config));
            (name, result)
        })
        .collect();

    let mut done = Vec::new();
    let mut failures = Vec::new();
    for (name, outcome) in outcomes {
        match outcome {
            Ok(e) => done.push(e),
            Err(e) => failures.push(Failure {
                instance: name,
                error: e.to_string(),
            }),
        }
    }
    if done.is_empty() {
        return Err(BenchError::NoResults);
    }

    let truths: Vec<usize> = done.iter().map(|e| e.report.true_goal).collect();
    let nl = config.lambdas.len();
    let mut fpv = Vec::with_capacity(config.repeats);
    for r in 0..config.repeats {
        let mut prec = Vec::with_capacity(nl);
        let mut spr = Vec::with_capacity(nl);
        for li in 0..nl {
            let sets: Vec<Vec<usize>> = done
                .iter()
                .map(|e| e.report.runs[r].recognized[li].clone())
                .collect();
            prec.push(precision(&sets, &truths)?);
            spr.push(spread(&sets));
        }
        fpv.push((prec, spr));
    }
    let all: Vec<Vec<usize>> = done.iter().map(|e| (0..e.report.goals).collect()).collect();
    let uniform_row = (vec![precision(&all, &truths)?; nl], vec![spread(&all); nl]);

    let timing = config.timings.then(|| {
        let est: Vec<f64> = done
            .iter()
            .flat_map(|e| e.estimation_ns.iter().copied())
            .collect();
        let steps: Vec<f64> = done
            .iter()
            .flat_map(|e| e.step_ns.iter().copied())
            .collect();
        TimingSummary {
            estimation_ns_per_goal: mean_std(&est).0,
            recognition_ns_per_observation: mean_std(&steps).0,
        }
    });

    Ok(EvaluationReport {
        lambdas: config.lambdas.clone(),
        samples: config.estimator.samples,
        seed: config.estimator.seed,
        repeats: config.repeats,
        aggregation: config.estimator.aggregation,
        instances_total: total,
        instances_failed: failures.len(),
        fpv: summarize(&fpv, nl),
        uniform: summarize(&[uniform_row], nl),
        instances: done.into_iter().map(|e| e.report).collect(),
        failures,
        timing,
    })
}

/// Writes `report.json` and `precision.csv` into `dir`.
///
/// The CSV has one column per lambda plus `S`, the spread averaged over
/// lambdas, and rows `fpv`, `fpv_std` and `uniform`.
pub fn write_report(report: &EvaluationReport, dir: &Path) -> Result<(), BenchError> {
    let io = |path: PathBuf| move |source| BenchError::Io { path, source };
    fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
    let json_path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(&json_path, json + "\n").map_err(io(json_path.clone()))?;

    let csv_path = dir.join("precision.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| BenchError::Io {
        path: csv_path.clone(),
        source: e.into(),
    })?;
    let mut header = vec!["approach".to_string()];
    header.extend(report.lambdas.iter().map(|l| l.to_string()));
    header.push("S".into());
    let rows: [(&str, &[f64], f64); 3] = [
        ("fpv", &report.fpv.precision, report.fpv.mean_spread),
        (
            "fpv_std",
            &report.fpv.precision_std,
            mean_std(&report.fpv.spread_std).0,
        ),
        (
            "uniform",
            &report.uniform.precision,
            report.uniform.mean_spread,
        ),
    ];
    let write = |w: &mut csv::Writer<fs::File>, rec: Vec<String>| {
        w.write_record(rec).map_err(|e| BenchError::Io {
            path: csv_path.clone(),
            source: e.into(),
        })
    };
    write(&mut w, header)?;
    for (name, values, s) in rows {
        let mut rec = vec![name.to_string()];
        rec.extend(values.iter().map(|v| format!("{v:.4}")));
        rec.push(format!("{s:.4}"));
        write(&mut w, rec)?;
    }
    w.flush().map_err(io(csv_path.clone()))?;
    Ok(())
}
