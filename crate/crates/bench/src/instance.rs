use std::fs;
use std::path::{Path, PathBuf};

use fpv_core::ObservationEvent;
use fpv_pddl::{
    compile_negations_with_goals, ground, parse_domain, parse_ground_literals, parse_problem,
    GroundProblem, Literal,
};

use crate::error::BenchError;

pub const PLACEHOLDER: &str = "<HYPOTHESIS>";

/// One recognition problem as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionInstance {
    pub name: String,
    pub domain: String,
    pub template: String,
    pub hypotheses: Vec<Vec<Literal>>,
    pub true_goal_index: usize,
    /// Canonical ground action names, e.g. `(m c23 c22)`.
    pub observations: Vec<String>,
    /// Where the files were read from, for error messages.
    pub paths: Option<InstancePaths>,
}

/// A grounded instance ready for estimation and recognition.
#[derive(Debug, Clone)]
pub struct PreparedInstance {
    pub problem: GroundProblem,
    pub observations: Vec<ObservationEvent>,
    pub true_goal: usize,
}

fn read(path: &Path) -> Result<String, BenchError> {
    fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with(';'))
}

/// Canonical text of a hypothesis: lowercase, single spaces, literals sorted
/// and joined with `", "`.
pub fn normalize_hypothesis(line: &str) -> Result<String, fpv_pddl::PddlError> {
    Ok(normalize(&parse_ground_literals(line)?))
}

fn normalize(lits: &[Literal]) -> String {
    let mut parts: Vec<String> = lits.iter().map(|l| l.to_string()).collect();
    parts.sort();
    parts.dedup();
    parts.join(", ")
}

/// Locations of the instance files. Without observations the instance can
/// still be estimated; without a real hypothesis the first one is assumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstancePaths {
    pub domain: PathBuf,
    pub template: PathBuf,
    pub hyps: PathBuf,
    pub obs: Option<PathBuf>,
    pub real: Option<PathBuf>,
}

impl InstancePaths {
    /// The standard layout of an instance directory.
    pub fn in_dir(dir: &Path) -> Self {
        InstancePaths {
            domain: dir.join("domain.pddl"),
            template: dir.join("template.pddl"),
            hyps: dir.join("hyps.dat"),
            obs: Some(dir.join("obs.dat")),
            real: Some(dir.join("real_hyp.dat")),
        }
    }
}

/// Reads `domain.pddl`, `template.pddl`, `hyps.dat`, `obs.dat` and
/// `real_hyp.dat` from `dir`.
pub fn load_instance(dir: &Path) -> Result<RecognitionInstance, BenchError> {
    let mut inst = load_files(&InstancePaths::in_dir(dir))?;
    if inst.observations.is_empty() {
        return Err(BenchError::NoObservations {
            path: dir.join("obs.dat"),
        });
    }
    inst.name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(inst)
}

/// Reads an instance from explicitly named files.
pub fn load_files(paths: &InstancePaths) -> Result<RecognitionInstance, BenchError> {
    let domain = read(&paths.domain)?;
    let template = read(&paths.template)?;
    let hyps_text = read(&paths.hyps)?;

    let mut hypotheses = Vec::new();
    for (_, line) in content_lines(&hyps_text) {
        let lits = parse_ground_literals(line).map_err(|source| BenchError::Pddl {
            path: paths.hyps.clone(),
            source,
        })?;
        hypotheses.push(lits);
    }
    if hypotheses.is_empty() {
        return Err(BenchError::NoHypotheses {
            path: paths.hyps.clone(),
        });
    }

    let mut true_goal_index = 0;
    if let Some(real_path) = &paths.real {
        let real_text = read(real_path)?;
        let real_line = content_lines(&real_text)
            .map(|(_, l)| l)
            .next()
            .unwrap_or_default();
        let real = normalize_hypothesis(real_line).map_err(|source| BenchError::Pddl {
            path: real_path.clone(),
            source,
        })?;
        true_goal_index = hypotheses.iter().position(|h| normalize(h) == real).ok_or(
            BenchError::RealHypothesisNotFound {
                path: real_path.clone(),
                hypothesis: real,
            },
        )?;
    }

    let mut observations = Vec::new();
    if let Some(obs_path) = &paths.obs {
        let obs_text = read(obs_path)?;
        for (line, text) in content_lines(&obs_text) {
            let bad = |reason: String| BenchError::BadObservation {
                path: obs_path.clone(),
                line,
                text: text.to_string(),
                reason,
            };
            let lits = parse_ground_literals(text).map_err(|e| bad(e.to_string()))?;
            match lits.as_slice() {
                [lit] if lit.positive => observations.push(lit.atom.to_string()),
                _ => return Err(bad("expected exactly one ground action".into())),
            }
        }
    }

    let name = paths
        .template
        .parent()
        .and_then(|d| d.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(RecognitionInstance {
        name,
        domain,
        template,
        hypotheses,
        true_goal_index,
        observations,
        paths: Some(paths.clone()),
    })
}

impl RecognitionInstance {
    /// Parses and grounds the instance with every hypothesis as a goal.
    ///
    /// The template's placeholder is filled with the first hypothesis to get
    /// a well-formed problem; the goal it ends up with is not used.
    pub fn prepare(&self) -> Result<PreparedInstance, BenchError> {
        let pddl_err = |pick: fn(&InstancePaths) -> &PathBuf, file: &str| {
            let path = match &self.paths {
                Some(p) => pick(p).clone(),
                None => PathBuf::from(&self.name).join(file),
            };
            move |source| BenchError::Pddl { path, source }
        };
        let domain = parse_domain(&self.domain).map_err(pddl_err(|p| &p.domain, "domain.pddl"))?;
        let first: Vec<String> = self.hypotheses[0].iter().map(|l| l.to_string()).collect();
        let text = self.template.replace(PLACEHOLDER, &first.join(" "));
        let problem =
            parse_problem(&text, &domain).map_err(pddl_err(|p| &p.template, "template.pddl"))?;
        let (domain, problem, hyps) =
            compile_negations_with_goals(&domain, &problem, &self.hypotheses);
        let problem =
            ground(&domain, &problem, &hyps).map_err(pddl_err(|p| &p.hyps, "hyps.dat"))?;
        let observations = self
            .observations
            .iter()
            .map(|o| {
                problem
                    .action_id(o)
                    .map(ObservationEvent::Action)
                    .ok_or_else(|| BenchError::UnknownAction(o.clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(PreparedInstance {
            problem,
            observations,
            true_goal: self.true_goal_index,
        })
    }

    /// Writes the five instance files into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<(), BenchError> {
        let io = |path: PathBuf| move |source| BenchError::Io { path, source };
        fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        let hyp_line = |h: &Vec<Literal>| {
            h.iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let hyps: String = self.hypotheses.iter().map(|h| hyp_line(h) + "\n").collect();
        let obs: String = self.observations.iter().map(|o| format!("{o}\n")).collect();
        let real = hyp_line(&self.hypotheses[self.true_goal_index]) + "\n";
        for (file, text) in [
            ("domain.pddl", self.domain.as_str()),
            ("template.pddl", self.template.as_str()),
            ("hyps.dat", hyps.as_str()),
            ("obs.dat", obs.as_str()),
            ("real_hyp.dat", real.as_str()),
        ] {
            let path = dir.join(file);
            fs::write(&path, text).map_err(io(path.clone()))?;
        }
        Ok(())
    }
}
