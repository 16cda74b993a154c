//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fpv_bench::{
    generate_grid, load_instance, precision, run_benchmark, spread, timing_profile, BenchConfig,
    GridSpec, PreparedInstance, TimingConfig,
};
use fpv_core::{
    build_rpg, derive_seed, estimate_all, generate_goal_supporters, heuristic, heuristic_terms,
    map_probs, map_state, recognize, recognize_online, relaxed_reachable,
    sample_subgoal_supporters, EstimatorConfig, FactProbabilityTable, ObservationEvent,
    RelaxedState, SamplerState,
};
use fpv_pddl::{ActionId, FactId, GroundProblem};

const FIXTURES: [&str; 3] = ["chain", "grid", "logistics"];

/// Cells with probability one and one half on the way from c23 to c1 and
/// to c5; every other cell is zero.
const PUBLISHED: [([usize; 2], [usize; 10]); 2] = [
    ([1, 23], [2, 3, 6, 8, 11, 13, 16, 18, 21, 22]),
    ([5, 23], [3, 4, 8, 10, 13, 15, 18, 20, 24, 25]),
];

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixtures_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../bench/fixtures")
}

fn fixture(name: &str) -> PreparedInstance {
    load_instance(&fixtures_root().join(name))
        .unwrap()
        .prepare()
        .unwrap()
}

fn cell(g: &GroundProblem, i: usize) -> FactId {
    g.fact_id(&format!("(is-at c{i})")).unwrap()
}

fn published_value(goal: usize, c: usize) -> f64 {
    let (ones, halves) = &PUBLISHED[goal];
    if ones.contains(&c) {
        1.0
    } else if halves.contains(&c) {
        0.5
    } else {
        0.0
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Outcome {
    check((a - b).abs() <= tol, || {
        format!("{what}: got {a}, expected {b} within {tol}")
    })
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let inst = fixture("grid");
    let g = &inst.problem;
    let tables: Vec<FactProbabilityTable> = (0..2)
        .map(|goal| {
            let mut values = vec![0.0; g.fact_count()];
            for c in 1..=25 {
                values[cell(g, c).index()] = published_value(goal, c);
            }
            FactProbabilityTable::from_values(goal, values, g).unwrap()
        })
        .collect();
    let nf = g.fact_count();
    let s0 = map_state(g.s0().iter().copied(), nf);
    let st = map_state([cell(g, 23), cell(g, 22), cell(g, 21)], nf);
    let g1 = heuristic_terms(&s0, &st, &map_probs(&tables[0])).unwrap();
    let g2 = heuristic_terms(&s0, &st, &map_probs(&tables[1])).unwrap();
    let r = recognize(g, &tables, &inst.observations).unwrap();
    let elapsed = start.elapsed();

    let mut errors = Vec::new();
    let checks = [
        close(g1.initial, 3.5f64.sqrt(), 1e-9, "first norm for G1"),
        close(g1.current, 3.0f64.sqrt(), 1e-9, "second norm for G1"),
        close(g1.value(), 0.14, 0.005, "h(G1)"),
        close(g2.value(), 0.0, 1e-9, "h(G2)"),
        check(r.recognized == vec![0], || {
            format!("recognized {:?}", r.recognized)
        }),
        check(elapsed < Duration::from_secs(1), || {
            format!("took {elapsed:?}")
        }),
    ];
    for c in checks {
        if let Err(e) = c {
            errors.push(e);
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors.join("; "))
    }
}

fn oracle_table() -> Outcome {
    let fpv = env!("CARGO_BIN_EXE_fpv");
    let dir = fixtures_root().join("grid");
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let args = |extra: &[&str]| {
        let mut cmd = Command::new(fpv);
        cmd.arg("oracle")
            .arg("--domain")
            .arg(dir.join("domain.pddl"))
            .arg("--template")
            .arg(dir.join("template.pddl"))
            .arg("--hyps")
            .arg(dir.join("hyps.dat"))
            .args(extra);
        cmd
    };
    let start = Instant::now();
    let status = args(&["--output"])
        .arg(out.path())
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(status.status.success(), || {
        String::from_utf8_lossy(&status.stderr).into_owned()
    })?;
    check(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;

    let mut entries = 0;
    for goal in 0..2 {
        let text = fs::read_to_string(out.path().join(format!("goal_{goal}.csv")))
            .map_err(|e| e.to_string())?;
        let rows: BTreeMap<String, (f64, f64)> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("fact_name"))
            .map(|l| {
                let mut parts = l.rsplitn(3, ',');
                let not: f64 = parts.next().unwrap().parse().unwrap();
                let obs: f64 = parts.next().unwrap().parse().unwrap();
                (parts.next().unwrap().to_string(), (obs, not))
            })
            .collect();
        for c in 1..=25 {
            let want = published_value(goal, c);
            let got = rows
                .get(&format!("(is-at c{c})"))
                .ok_or_else(|| format!("goal {goal}: no row for c{c}"))?;
            check(*got == (want, 1.0 - want), || {
                format!("goal {goal} c{c}: {got:?}, want {want}")
            })?;
            entries += 2;
        }
    }
    check(entries == 100, || format!("{entries} entries"))?;

    let capped = args(&["--max-states", "10", "--format", "json"])
        .output()
        .map_err(|e| e.to_string())?;
    check(capped.status.code() == Some(2), || {
        format!("state cap exit status {:?}", capped.status.code())
    })
}

fn estimator_properties() -> Outcome {
    for name in FIXTURES {
        let inst = fixture(name);
        let g = &inst.problem;
        for seed in [0, 1, 42] {
            let cfg = EstimatorConfig {
                seed,
                ..Default::default()
            };
            let tables = estimate_all(g, &cfg).map_err(|e| e.to_string())?;
            check(tables == estimate_all(g, &cfg).unwrap(), || {
                format!("{name}: seed {seed} not reproducible")
            })?;
            for (gi, t) in tables.iter().enumerate() {
                let ctx = |what: &str| format!("{name} goal {gi} seed {seed}: {what}");
                let rpg = build_rpg(g, g.goal(gi).unwrap()).unwrap();
                for (i, &p) in t.values().iter().enumerate() {
                    let f = FactId::from(i);
                    check((0.0..=1.0).contains(&p), || ctx(&format!("p = {p}")))?;
                    check(p == 0.0 || relaxed_reachable(&rpg, f).unwrap(), || {
                        ctx("positive but unreachable")
                    })?;
                    check((p + (1.0 - p) - 1.0).abs() < 1e-12, || ctx("complement"))?;
                }
                for &f in g.s0() {
                    check(t.observed(f).unwrap() == 1.0, || {
                        ctx("initial fact below one")
                    })?;
                }
                if !t.is_unreachable() {
                    for &f in g.goal(gi).unwrap() {
                        check(t.observed(f).unwrap() == 1.0, || ctx("subgoal below one"))?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Deterministic pick in `0..n` from a seed path.
fn pick(seed: u64, path: &[u64], n: usize) -> usize {
    (derive_seed(seed, path) % n as u64) as usize
}

fn heuristic_properties() -> Outcome {
    let mut cases = 0;
    let mut seed = 0u64;
    while cases < 1000 {
        seed += 1;
        let spec = GridSpec {
            width: 3 + pick(seed, &[0], 4),
            height: 3 + pick(seed, &[1], 4),
            goals: 2 + pick(seed, &[2], 2),
            blocked: 0.15,
            seed,
        };
        let Ok(inst) = generate_grid(&spec) else {
            continue;
        };
        let prepared = inst.prepare().map_err(|e| e.to_string())?;
        let g = &prepared.problem;
        let nf = g.fact_count();
        let tables = estimate_all(
            g,
            &EstimatorConfig {
                seed,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let s0 = map_state(g.s0().iter().copied(), nf);
        let ctx = |what: &str| format!("grid seed {seed}: {what}");

        // a random set of facts on top of s0
        let base: Vec<FactId> = (0..pick(seed, &[3], 5))
            .map(|k| FactId::from(pick(seed, &[4, k as u64], nf)))
            .chain(g.s0().iter().copied())
            .collect();
        for (gi, t) in tables.iter().enumerate() {
            let v = map_probs(t);
            let before = heuristic(&s0, &map_state(base.iter().copied(), nf), &v).unwrap();

            let positive: Vec<FactId> = (0..nf)
                .map(FactId::from)
                .filter(|f| v.0[f.index()] > 0.0)
                .collect();
            let f = positive[pick(seed, &[5, gi as u64], positive.len())];
            let mut grown = base.clone();
            grown.push(f);
            let after = heuristic(&s0, &map_state(grown.iter().copied(), nf), &v).unwrap();
            check(after >= before, || ctx("adding a positive fact lowered h"))?;
            cases += 1;

            let zero: Vec<FactId> = (0..nf)
                .map(FactId::from)
                .filter(|f| v.0[f.index()] == 0.0 && !g.is_initial(*f) && !base.contains(f))
                .collect();
            if !zero.is_empty() {
                let f = zero[pick(seed, &[6, gi as u64], zero.len())];
                let mut grown = base.clone();
                grown.push(f);
                let after = heuristic(&s0, &map_state(grown.iter().copied(), nf), &v).unwrap();
                check(after < before, || ctx("adding a zero fact did not lower h"))?;
                cases += 1;
            }
        }

        let empty = recognize(g, &tables, &[]).unwrap();
        check(empty.h.iter().all(|h| *h == 0.0), || {
            ctx("h nonzero without observations")
        })?;
        check(empty.recognized.len() == g.goals().len(), || {
            ctx("not all goals without observations")
        })?;
        cases += 1;

        let obs = &prepared.observations;
        let trace = recognize_online(g, &tables, obs).unwrap();
        for step in &trace.steps {
            let r = recognize(g, &tables, &obs[..step.t]).unwrap();
            check(step.h == r.h && step.recognized == r.recognized, || {
                ctx("online step differs from prefix")
            })?;
        }
        cases += 1;

        // the same observed facts, as state events in another order
        let mut shuffled: Vec<ObservationEvent> = obs
            .iter()
            .map(|o| match o {
                ObservationEvent::Action(a) => {
                    ObservationEvent::State(g.action(*a).unwrap().add.clone())
                }
                other => other.clone(),
            })
            .collect();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, pick(seed, &[7, i as u64], i + 1));
        }
        check(
            recognize(g, &tables, obs).unwrap() == recognize(g, &tables, &shuffled).unwrap(),
            || ctx("reordering changed the result"),
        )?;
        cases += 1;
    }
    println!("  heuristic cases: {cases} over {seed} grids");
    Ok(())
}

fn replay(g: &GroundProblem, set: &[ActionId]) -> RelaxedState {
    let mut s = RelaxedState::initial(g);
    loop {
        let before = s.len();
        for &a in set {
            let action = g.action(a).unwrap();
            if action.pre.iter().all(|f| s.contains(*f)) {
                s.apply(action, g).unwrap();
            }
        }
        if s.len() == before {
            return s;
        }
    }
}

fn sampler_properties() -> Outcome {
    for name in FIXTURES {
        let inst = fixture(name);
        let g = &inst.problem;
        for (gi, goal) in g.goals().iter().enumerate() {
            let rpg = build_rpg(g, goal).map_err(|e| e.to_string())?;
            if !rpg.is_goal_reachable() {
                continue;
            }
            let mut per = BTreeMap::new();
            for &sub in goal {
                let mut s = SamplerState::new(11);
                let samples = sample_subgoal_supporters(sub, &rpg, g, 10, &mut s)
                    .map_err(|e| e.to_string())?;
                for i in 0..g.fact_count() {
                    let f = FactId::from(i);
                    let Some(level) = rpg.fact_level(f).unwrap() else {
                        continue;
                    };
                    if level == 0 {
                        continue;
                    }
                    let counts: Vec<u32> = g
                        .achievers(f)
                        .iter()
                        .filter(|a| rpg.action_level(**a) == Some(level - 1))
                        .map(|a| s.count(*a))
                        .collect();
                    let lo = counts.iter().min().copied().unwrap_or(0);
                    let hi = counts.iter().max().copied().unwrap_or(0);
                    check(hi - lo <= 1, || {
                        format!("{name} goal {gi}: unbalanced counts {counts:?}")
                    })?;
                }
                per.insert(sub, samples);
            }
            let mut s = SamplerState::new(5);
            let sets = generate_goal_supporters(per, 10, goal, gi, g, &mut s)
                .map_err(|e| e.to_string())?;
            for set in sets {
                let reached = replay(g, &set.actions.iter().copied().collect::<Vec<_>>());
                check(goal.iter().all(|f| reached.contains(*f)), || {
                    format!("{name} goal {gi}: replay misses goal")
                })?;
            }
        }
    }
    Ok(())
}

fn timing_scaling() -> Outcome {
    let start = Instant::now();
    let rows = timing_profile(&TimingConfig {
        observation_counts: vec![5, 100],
        goal_counts: vec![5, 10],
        estimator: EstimatorConfig::default(),
        rounds: 5,
    })
    .map_err(|e| e.to_string())?;
    let row = |goals: usize, obs: usize| {
        rows.iter()
            .find(|r| r.goals == goals && r.observations == obs)
            .unwrap()
    };
    let obs_ratio =
        row(5, 100).recognition_ns_per_observation / row(5, 5).recognition_ns_per_observation;
    let est_ratio = row(10, 5).estimation_ns_total / row(5, 5).estimation_ns_total;
    println!("  per-observation ratio {obs_ratio:.2}, estimation ratio {est_ratio:.2}");
    check(obs_ratio <= 2.0, || {
        format!("per-observation time grew {obs_ratio:.2}x")
    })?;
    check(est_ratio <= 2.5, || {
        format!("estimation time grew {est_ratio:.2}x")
    })?;
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(120), || {
        format!("took {elapsed:?}")
    })
}

fn harness_arithmetic() -> Outcome {
    check(precision(&[vec![2]], &[2]).unwrap() == 1.0, || {
        "singleton correct".into()
    })?;
    check(precision(&[vec![0, 3]], &[3]).unwrap() == 0.5, || {
        "two-way tie".into()
    })?;
    check(precision(&[vec![1]], &[0]).unwrap() == 0.0, || {
        "singleton wrong".into()
    })?;
    let inst = fixture("logistics");
    let tables = estimate_all(&inst.problem, &EstimatorConfig::default()).unwrap();
    let none = recognize(&inst.problem, &tables, &[]).unwrap().recognized;
    let n = inst.problem.goals().len();
    check(
        precision(&[none], &[inst.true_goal]).unwrap() == 1.0 / n as f64,
        || "no observations".into(),
    )?;
    check(spread(&[vec![0], vec![0, 1, 2]]) == 2.0, || {
        "spread of two sets".into()
    })?;
    check(spread(&[vec![4]]) == 1.0, || "spread of a singleton".into())
}

fn fixture_suite() -> Outcome {
    let config = BenchConfig {
        lambdas: vec![0.5, 1.0],
        estimator: EstimatorConfig::default(),
        repeats: 20,
        timings: false,
    };
    let report = run_benchmark(&fixtures_root(), &config).map_err(|e| e.to_string())?;
    check(report.instances_failed == 0, || {
        format!("{:?}", report.failures)
    })?;
    let last = config.lambdas.len() - 1;
    let (fpv, uni) = (&report.fpv, &report.uniform);
    println!(
        "  lambda 1: precision {:.3} vs {:.3}, spread {:.3} vs {:.3}, std {:?}",
        fpv.precision[last],
        uni.precision[last],
        fpv.spread[last],
        uni.spread[last],
        fpv.precision_std
    );
    check(fpv.precision[last] >= uni.precision[last], || {
        "precision below uniform".into()
    })?;
    check(fpv.spread[last] <= uni.spread[last], || {
        "spread above uniform".into()
    })?;
    let grid = report
        .instances
        .iter()
        .find(|i| i.name == "grid")
        .ok_or("grid missing")?;
    for run in &grid.runs {
        check(run.recognized[last] == vec![grid.true_goal], || {
            format!("grid recognized {:?}", run.recognized[last])
        })?;
    }
    check(fpv.precision_std.iter().all(|s| *s <= 0.08), || {
        format!("std {:?}", fpv.precision_std)
    })
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("worked example distances and ranking", worked_example),
        ("exact oracle reproduces the published table", oracle_table),
        ("estimator properties on fixtures", estimator_properties),
        (
            "heuristic properties on generated grids",
            heuristic_properties,
        ),
        (
            "sampler termination, replay and balance",
            sampler_properties,
        ),
        ("recognition time flat in observations", timing_scaling),
        ("precision and spread arithmetic", harness_arithmetic),
        ("fixture suite against uniform baseline", fixture_suite),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(()) => println!("criterion {}: PASS {name}", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {e}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
