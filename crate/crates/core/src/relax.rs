//! Delete relaxation: relaxed states, relaxed application and the relaxed
//! planning graph used as the supporter source for sampling.

use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use fpv_pddl::{ActionId, FactId, GroundAction, GroundProblem};

use crate::error::CoreError;

/// A set of facts that only ever grows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelaxedState {
    facts: FixedBitSet,
}

impl RelaxedState {
    pub fn empty(fact_count: usize) -> Self {
        RelaxedState {
            facts: FixedBitSet::with_capacity(fact_count),
        }
    }

    pub fn from_facts(fact_count: usize, facts: impl IntoIterator<Item = FactId>) -> Self {
        let mut s = Self::empty(fact_count);
        for f in facts {
            s.facts.insert(f.index());
        }
        s
    }

    pub fn initial(problem: &GroundProblem) -> Self {
        Self::from_facts(problem.fact_count(), problem.s0().iter().copied())
    }

    pub fn contains(&self, f: FactId) -> bool {
        self.facts.contains(f.index())
    }

    /// Adds `f`; returns whether it was new.
    pub fn insert(&mut self, f: FactId) -> bool {
        !self.facts.put(f.index())
    }

    pub fn is_superset(&self, other: &RelaxedState) -> bool {
        self.facts.is_superset(&other.facts)
    }

    pub fn facts(&self) -> impl Iterator<Item = FactId> + '_ {
        self.facts.ones().map(FactId::from)
    }

    pub fn len(&self) -> usize {
        self.facts.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_clear()
    }

    /// Size of the fact universe this state lives in.
    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    /// In-place relaxed application.
    pub fn apply(
        &mut self,
        action: &GroundAction,
        problem: &GroundProblem,
    ) -> Result<(), CoreError> {
        if let Some(&missing) = action.pre.iter().find(|f| !self.contains(**f)) {
            return Err(CoreError::InapplicableAction {
                action: action.name.clone(),
                missing: fact_name(problem, missing),
            });
        }
        for &f in &action.add {
            self.facts.insert(f.index());
        }
        Ok(())
    }
}

/// `s ∪ add(a)` if `pre(a) ⊆ s`.
pub fn relaxed_apply(
    state: &RelaxedState,
    action: &GroundAction,
    problem: &GroundProblem,
) -> Result<RelaxedState, CoreError> {
    let mut next = state.clone();
    next.apply(action, problem)?;
    Ok(next)
}

pub(crate) fn fact_name(problem: &GroundProblem, f: FactId) -> String {
    problem
        .fact(f)
        .map(|x| x.name.clone())
        .unwrap_or_else(|| format!("#{f}"))
}

/// Layered reachability under delete relaxation, grown until the goal holds
/// or nothing new appears.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedPlanningGraph {
    fact_levels: Vec<Option<usize>>,
    action_of_level: Vec<Option<usize>>,
    action_levels: Vec<Vec<ActionId>>,
    goal: Vec<FactId>,
    unreached: Vec<FactId>,
}

/// Builds the graph from `s0` towards `goal`.
///
/// Facts of `s0` are at level 0. Layer `t` holds the actions whose
/// preconditions first all hold at level `t`; their new add effects form
/// level `t + 1`. Expansion stops once every goal fact has a level, or when a
/// layer adds nothing, in which case the graph is flagged unreachable.
pub fn build_rpg(
    problem: &GroundProblem,
    goal: &[FactId],
) -> Result<RelaxedPlanningGraph, CoreError> {
    let nf = problem.fact_count();
    if let Some(&bad) = goal.iter().find(|f| f.index() >= nf) {
        return Err(CoreError::UnknownFact(bad));
    }
    let actions = problem.actions();

    let mut consumers: Vec<Vec<ActionId>> = vec![Vec::new(); nf];
    let mut missing: Vec<usize> = Vec::with_capacity(actions.len());
    let mut ready: Vec<ActionId> = Vec::new();
    for a in actions {
        for f in &a.pre {
            consumers[f.index()].push(a.id);
        }
        missing.push(a.pre.len());
        if a.pre.is_empty() {
            ready.push(a.id);
        }
    }

    let mut fact_levels = vec![None; nf];
    let mut action_of_level = vec![None; actions.len()];
    let mut action_levels = Vec::new();
    let mut fresh: Vec<FactId> = problem.s0().to_vec();
    for f in &fresh {
        fact_levels[f.index()] = Some(0);
    }

    loop {
        for f in fresh.drain(..) {
            for &a in &consumers[f.index()] {
                missing[a.index()] -= 1;
                if missing[a.index()] == 0 {
                    ready.push(a);
                }
            }
        }
        if goal.iter().all(|f| fact_levels[f.index()].is_some()) || ready.is_empty() {
            break;
        }
        let t = action_levels.len();
        let mut layer = std::mem::take(&mut ready);
        layer.sort_unstable();
        for &a in &layer {
            for &f in &actions[a.index()].add {
                if fact_levels[f.index()].is_none() {
                    fact_levels[f.index()] = Some(t + 1);
                    fresh.push(f);
                }
            }
        }
        if fresh.is_empty() {
            // fixpoint: this layer is applicable but changes nothing
            break;
        }
        for &a in &layer {
            action_of_level[a.index()] = Some(t);
        }
        action_levels.push(layer);
    }

    let unreached: Vec<FactId> = goal
        .iter()
        .copied()
        .filter(|f| fact_levels[f.index()].is_none())
        .collect();
    Ok(RelaxedPlanningGraph {
        fact_levels,
        action_of_level,
        action_levels,
        goal: goal.to_vec(),
        unreached,
    })
}

/// Whether `f` appears anywhere in the graph.
pub fn relaxed_reachable(rpg: &RelaxedPlanningGraph, f: FactId) -> Result<bool, CoreError> {
    rpg.fact_level(f).map(|l| l.is_some())
}

impl RelaxedPlanningGraph {
    /// Index of the last fact level.
    pub fn levels(&self) -> usize {
        self.action_levels.len()
    }

    pub fn fact_level(&self, f: FactId) -> Result<Option<usize>, CoreError> {
        self.fact_levels
            .get(f.index())
            .copied()
            .ok_or(CoreError::UnknownFact(f))
    }

    /// Layer of `a`, if it entered the graph.
    pub fn action_level(&self, a: ActionId) -> Option<usize> {
        self.action_of_level.get(a.index()).copied().flatten()
    }

    /// Actions first applicable at level `t`; empty past the last layer.
    pub fn layer(&self, t: usize) -> &[ActionId] {
        self.action_levels
            .get(t)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn goal(&self) -> &[FactId] {
        &self.goal
    }

    pub fn is_goal_reachable(&self) -> bool {
        self.unreached.is_empty()
    }

    /// Goal facts the graph never reached.
    pub fn unreached(&self) -> &[FactId] {
        &self.unreached
    }

    /// Human-readable dump of every level.
    pub fn dump(&self, problem: &GroundProblem) -> String {
        let mut out = String::new();
        for t in 0..=self.levels() {
            let facts: Vec<String> = self
                .fact_levels
                .iter()
                .enumerate()
                .filter(|(_, l)| **l == Some(t))
                .map(|(i, _)| fact_name(problem, FactId::from(i)))
                .collect();
            let _ = writeln!(out, "F{t}: {}", facts.join(" "));
            if t < self.levels() {
                let acts: Vec<&str> = self
                    .layer(t)
                    .iter()
                    .filter_map(|a| problem.action(*a))
                    .map(|a| a.name.as_str())
                    .collect();
                let _ = writeln!(out, "A{t}: {}", acts.join(" "));
            }
        }
        if !self.unreached.is_empty() {
            let names: Vec<String> = self
                .unreached
                .iter()
                .map(|f| fact_name(problem, *f))
                .collect();
            let _ = writeln!(out, "unreached: {}", names.join(" "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpv_pddl::Cost;

    fn action(id: usize, name: &str, pre: &[u32], add: &[u32]) -> GroundAction {
        GroundAction {
            id: ActionId::from(id),
            name: name.into(),
            pre: pre.iter().map(|&f| FactId(f)).collect(),
            add: add.iter().map(|&f| FactId(f)).collect(),
            del: vec![],
            cost: Cost::from_integer(1),
        }
    }

    /// f0 -a0-> f1 -a1-> f2 -a2-> f3, plus a dead end needing f4.
    fn chain() -> GroundProblem {
        GroundProblem::from_parts(
            (0..5).map(|i| format!("(f{i})")).collect(),
            vec![
                action(0, "(a0)", &[0], &[1]),
                action(1, "(a1)", &[1], &[2]),
                action(2, "(a2)", &[2], &[3]),
                action(3, "(dead)", &[4], &[0]),
            ],
            vec![FactId(0)],
            vec![vec![FactId(3)], vec![FactId(4)], vec![FactId(0)]],
        )
        .unwrap()
    }

    #[test]
    fn chain_levels() {
        let p = chain();
        let g = build_rpg(&p, &[FactId(3)]).unwrap();
        assert_eq!(g.levels(), 3);
        assert!(g.is_goal_reachable());
        for i in 0..4 {
            assert_eq!(g.fact_level(FactId(i)).unwrap(), Some(i as usize));
        }
        assert_eq!(g.layer(1), &[ActionId(1)]);
        assert_eq!(g.action_level(ActionId(3)), None);
        assert!(g.layer(7).is_empty());
    }

    #[test]
    fn stops_at_goal() {
        let p = chain();
        let g = build_rpg(&p, &[FactId(1)]).unwrap();
        assert_eq!(g.levels(), 1);
        assert!(!relaxed_reachable(&g, FactId(2)).unwrap());
    }

    #[test]
    fn goal_in_initial_state_has_no_layers() {
        let p = chain();
        let g = build_rpg(&p, &[FactId(0)]).unwrap();
        assert_eq!(g.levels(), 0);
        assert!(g.is_goal_reachable());
    }

    #[test]
    fn unreachable_goal_is_flagged() {
        let p = chain();
        let g = build_rpg(&p, &[FactId(4)]).unwrap();
        assert!(!g.is_goal_reachable());
        assert_eq!(g.unreached(), &[FactId(4)]);
        assert_eq!(g.levels(), 3);
        assert!(g.dump(&p).contains("unreached: (f4)"));
    }

    #[test]
    fn relaxed_apply_checks_preconditions() {
        let p = chain();
        let s = RelaxedState::initial(&p);
        let err = relaxed_apply(&s, &p.actions()[1], &p).unwrap_err();
        assert_eq!(
            err,
            CoreError::InapplicableAction {
                action: "(a1)".into(),
                missing: "(f1)".into()
            }
        );
        let s1 = relaxed_apply(&s, &p.actions()[0], &p).unwrap();
        assert!(s1.contains(FactId(0)) && s1.contains(FactId(1)));
        assert!(s1.is_superset(&s));
    }

    #[test]
    fn unknown_fact_is_an_error() {
        let p = chain();
        let g = build_rpg(&p, &[FactId(3)]).unwrap();
        assert_eq!(
            relaxed_reachable(&g, FactId(99)),
            Err(CoreError::UnknownFact(FactId(99)))
        );
        assert!(build_rpg(&p, &[FactId(99)]).is_err());
    }
}
