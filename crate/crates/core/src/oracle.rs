//! Exact fact observation probabilities for small problems: the fraction of
//! cost-optimal plans that make each fact true at some point.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use fixedbitset::FixedBitSet;
use fpv_pddl::{ActionId, Cost, FactId, GroundProblem};

use crate::error::CoreError;
use crate::prob::FactProbabilityTable;

pub const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Expansion budget for the uniform-cost search.
    pub max_states: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

struct Edge {
    from: usize,
    to: usize,
    action: ActionId,
}

/// Enumerates all optimal plans of goal `goal_index` implicitly and weights
/// them uniformly.
///
/// Uniform-cost search finds every state on an optimal path (goal states are
/// not expanded further). The optimal edges form a DAG, paths are counted on
/// it, and for each fact the paths that avoid every edge adding it are
/// counted again.
pub fn exact_oracle(
    problem: &GroundProblem,
    goal_index: usize,
    config: &OracleConfig,
) -> Result<FactProbabilityTable, CoreError> {
    let goal = problem
        .goal(goal_index)
        .ok_or(CoreError::UnknownGoal(goal_index))?;
    let nf = problem.fact_count();
    let mut goal_bits = FixedBitSet::with_capacity(nf);
    for f in goal {
        goal_bits.insert(f.index());
    }

    let mut s0 = FixedBitSet::with_capacity(nf);
    for f in problem.s0() {
        s0.insert(f.index());
    }

    let mut states: Vec<FixedBitSet> = vec![s0.clone()];
    let mut index: HashMap<FixedBitSet, usize> = HashMap::from([(s0, 0)]);
    let mut g: Vec<Cost> = vec![Cost::from_integer(0)];
    let mut closed: Vec<bool> = vec![false];
    let mut transitions: Vec<Edge> = Vec::new();
    let mut goal_nodes: Vec<usize> = Vec::new();
    let mut best: Option<Cost> = None;
    let mut expanded = 0usize;

    let mut heap = BinaryHeap::from([Reverse((Cost::from_integer(0), 0usize))]);
    while let Some(Reverse((c, u))) = heap.pop() {
        if closed[u] || c > g[u] {
            continue;
        }
        if best.is_some_and(|b| c > b) {
            break;
        }
        closed[u] = true;
        if goal_bits.is_subset(&states[u]) {
            best.get_or_insert(c);
            goal_nodes.push(u);
            continue;
        }
        expanded += 1;
        if expanded > config.max_states {
            return Err(CoreError::CapExceeded {
                cap: config.max_states,
            });
        }
        for a in problem.actions() {
            if !a.pre.iter().all(|f| states[u].contains(f.index())) {
                continue;
            }
            let cost = c + a.cost;
            if best.is_some_and(|b| cost > b) {
                continue;
            }
            let mut next = states[u].clone();
            for f in &a.del {
                next.set(f.index(), false);
            }
            for f in &a.add {
                next.insert(f.index());
            }
            let v = match index.get(&next) {
                Some(&v) => v,
                None => {
                    let v = states.len();
                    index.insert(next.clone(), v);
                    states.push(next);
                    g.push(cost);
                    closed.push(false);
                    heap.push(Reverse((cost, v)));
                    v
                }
            };
            if cost < g[v] {
                g[v] = cost;
                heap.push(Reverse((cost, v)));
            }
            transitions.push(Edge {
                from: u,
                to: v,
                action: a.id,
            });
        }
    }
    if best.is_none() {
        return Err(CoreError::UnreachableGoal(goal_index));
    }

    // keep optimal edges between settled states
    let edges: Vec<Edge> = transitions
        .into_iter()
        .filter(|e| closed[e.to] && g[e.from] + problem.actions()[e.action.index()].cost == g[e.to])
        .collect();

    // restrict to states that lead to a goal
    let n = states.len();
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        incoming[e.to].push(i);
    }
    let mut useful = vec![false; n];
    let mut stack = goal_nodes.clone();
    for &v in &goal_nodes {
        useful[v] = true;
    }
    while let Some(v) = stack.pop() {
        for &i in &incoming[v] {
            let u = edges[i].from;
            if !useful[u] {
                useful[u] = true;
                stack.push(u);
            }
        }
    }
    let edges: Vec<Edge> = edges
        .into_iter()
        .filter(|e| useful[e.from] && useful[e.to])
        .collect();
    let order = topological_order(n, &useful, &edges)?;

    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        outgoing[e.from].push(i);
    }
    let count_paths = |skip: &dyn Fn(ActionId) -> bool| -> f64 {
        let mut paths = vec![0.0f64; n];
        paths[0] = 1.0;
        for &u in &order {
            if paths[u] == 0.0 {
                continue;
            }
            for &i in &outgoing[u] {
                let e = &edges[i];
                if !skip(e.action) {
                    paths[e.to] += paths[u];
                }
            }
        }
        goal_nodes.iter().map(|&v| paths[v]).sum()
    };

    let total = count_paths(&|_| false);
    let mut on_path = FixedBitSet::with_capacity(nf);
    for e in &edges {
        for f in &problem.actions()[e.action.index()].add {
            on_path.insert(f.index());
        }
    }
    let mut observed = vec![0.0; nf];
    for (i, p) in observed.iter_mut().enumerate() {
        let f = FactId::from(i);
        if problem.is_initial(f) {
            *p = 1.0;
        } else if on_path.contains(i) {
            let avoiding = count_paths(&|a| problem.actions()[a.index()].adds(f));
            *p = 1.0 - avoiding / total;
        }
    }
    Ok(FactProbabilityTable::unchecked(goal_index, observed, false))
}

fn topological_order(n: usize, useful: &[bool], edges: &[Edge]) -> Result<Vec<usize>, CoreError> {
    let mut indegree = vec![0usize; n];
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in edges {
        indegree[e.to] += 1;
        outgoing[e.from].push(e.to);
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| useful[v] && indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop() {
        order.push(u);
        for &v in &outgoing[u] {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                ready.push(v);
            }
        }
    }
    if order.len() < useful.iter().filter(|u| **u).count() {
        return Err(CoreError::ZeroCostCycle);
    }
    Ok(order)
}
