use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::ast::{ActionSchema, Atom, Cost, DomainAst, Literal, ProblemAst, Term};
use crate::error::PddlError;
use crate::sexpr::canonical_name;
use crate::universe::Universe;

macro_rules! dense_id {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            fn from(i: usize) -> Self {
                $name(u32::try_from(i).expect("id overflows u32"))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

dense_id!(FactId);
dense_id!(ActionId);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundFact {
    pub id: FactId,
    pub name: String,
}

/// Ground STRIPS action. `pre`, `add` and `del` are sorted and duplicate
/// free, and `add` and `del` are disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub id: ActionId,
    pub name: String,
    pub pre: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
    pub cost: Cost,
}

impl GroundAction {
    pub fn adds(&self, f: FactId) -> bool {
        self.add.binary_search(&f).is_ok()
    }
}

/// Propositional planning task with an ordered list of candidate goals.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundProblem {
    facts: Vec<GroundFact>,
    actions: Vec<GroundAction>,
    s0: Vec<FactId>,
    goals: Vec<Vec<FactId>>,
    fact_index: HashMap<String, FactId>,
    action_index: HashMap<String, ActionId>,
    achievers: Vec<Vec<ActionId>>,
    initial: Vec<bool>,
    complement_pairs: Vec<(FactId, FactId)>,
}

fn sorted_unique<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}

impl GroundProblem {
    /// Assembles a problem from already grounded parts. Action ids are
    /// reassigned by position; fact ids are positions in `fact_names`.
    pub fn from_parts(
        fact_names: Vec<String>,
        actions: Vec<GroundAction>,
        s0: Vec<FactId>,
        goals: Vec<Vec<FactId>>,
    ) -> Result<Self, PddlError> {
        Self::assemble(fact_names, actions, s0, goals, Vec::new())
    }

    fn assemble(
        fact_names: Vec<String>,
        actions: Vec<GroundAction>,
        s0: Vec<FactId>,
        goals: Vec<Vec<FactId>>,
        complement_pairs: Vec<(FactId, FactId)>,
    ) -> Result<Self, PddlError> {
        if goals.is_empty() {
            return Err(PddlError::NoGoals);
        }
        let n = fact_names.len();
        let valid = |ids: &[FactId]| ids.iter().all(|f| f.index() < n);
        let invalid = |what: &str| PddlError::NotGroundable {
            literal: what.to_string(),
            reason: "fact id out of range".into(),
        };

        let mut fact_index = HashMap::with_capacity(n);
        let facts: Vec<GroundFact> = fact_names
            .into_iter()
            .enumerate()
            .map(|(i, name)| {
                fact_index.insert(name.clone(), FactId::from(i));
                GroundFact {
                    id: FactId::from(i),
                    name,
                }
            })
            .collect();

        let mut achievers = vec![Vec::new(); n];
        let mut action_index = HashMap::with_capacity(actions.len());
        let mut normalized = Vec::with_capacity(actions.len());
        for (i, a) in actions.into_iter().enumerate() {
            let id = ActionId::from(i);
            let pre = sorted_unique(a.pre);
            let add = sorted_unique(a.add);
            let del: Vec<FactId> = sorted_unique(a.del)
                .into_iter()
                .filter(|f| add.binary_search(f).is_err())
                .collect();
            if !valid(&pre) || !valid(&add) || !valid(&del) {
                return Err(invalid(&a.name));
            }
            for f in &add {
                achievers[f.index()].push(id);
            }
            action_index.insert(a.name.clone(), id);
            normalized.push(GroundAction {
                id,
                name: a.name,
                pre,
                add,
                del,
                cost: a.cost,
            });
        }

        let s0 = sorted_unique(s0);
        if !valid(&s0) {
            return Err(invalid("initial state"));
        }
        let goals: Vec<Vec<FactId>> = goals.into_iter().map(sorted_unique).collect();
        if !goals.iter().all(|g| valid(g)) {
            return Err(invalid("goal"));
        }
        let mut initial = vec![false; n];
        for f in &s0 {
            initial[f.index()] = true;
        }
        Ok(GroundProblem {
            facts,
            actions: normalized,
            s0,
            goals,
            fact_index,
            action_index,
            achievers,
            initial,
            complement_pairs,
        })
    }

    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn facts(&self) -> &[GroundFact] {
        &self.facts
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn fact(&self, id: FactId) -> Option<&GroundFact> {
        self.facts.get(id.index())
    }

    pub fn action(&self, id: ActionId) -> Option<&GroundAction> {
        self.actions.get(id.index())
    }

    pub fn fact_id(&self, name: &str) -> Option<FactId> {
        self.fact_index.get(name).copied()
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.action_index.get(name).copied()
    }

    /// Sorted initial state.
    pub fn s0(&self) -> &[FactId] {
        &self.s0
    }

    pub fn is_initial(&self, f: FactId) -> bool {
        self.initial.get(f.index()).copied().unwrap_or(false)
    }

    pub fn goals(&self) -> &[Vec<FactId>] {
        &self.goals
    }

    pub fn goal(&self, index: usize) -> Option<&[FactId]> {
        self.goals.get(index).map(Vec::as_slice)
    }

    /// Actions with `f` in their add list, ascending by id.
    pub fn achievers(&self, f: FactId) -> &[ActionId] {
        self.achievers
            .get(f.index())
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    /// `(p, not-p)` fact pairs produced by negation compilation.
    pub fn complement_pairs(&self) -> &[(FactId, FactId)] {
        &self.complement_pairs
    }

    /// Replaces the goal list, keeping everything else.
    pub fn with_goals(&self, goals: Vec<Vec<FactId>>) -> Result<Self, PddlError> {
        let n = self.facts.len();
        if goals.is_empty() {
            return Err(PddlError::NoGoals);
        }
        if goals.iter().flatten().any(|f| f.index() >= n) {
            return Err(PddlError::NotGroundable {
                literal: "goal".into(),
                reason: "fact id out of range".into(),
            });
        }
        let mut out = self.clone();
        out.goals = goals.into_iter().map(sorted_unique).collect();
        Ok(out)
    }
}

fn substitute(atom: &Atom, params: &[String], binding: &[&str]) -> Vec<String> {
    atom.args
        .iter()
        .map(|t| match t {
            Term::Const(c) => c.clone(),
            Term::Var(v) => {
                let i = params
                    .iter()
                    .position(|p| p == v)
                    .expect("variables are validated");
                binding[i].to_string()
            }
        })
        .collect()
}

struct RawAction {
    name: String,
    pre: Vec<String>,
    add: Vec<String>,
    del: Vec<String>,
    cost: Cost,
}

struct SchemaGrounder<'a> {
    schema: &'a ActionSchema,
    params: Vec<String>,
    universe: &'a Universe,
    fluent: &'a HashSet<String>,
    static_true: &'a HashSet<String>,
    /// static literals grouped by the binding depth at which they become ground
    checks: Vec<Vec<&'a Literal>>,
    /// per parameter: positive static literals that pin down its candidates
    /// once the earlier parameters are bound
    filters: Vec<Vec<StaticFilter<'a>>>,
}

/// Index of one static precondition: the values of the parameter being bound
/// that occur in a true static atom, keyed by the literal's other arguments.
struct StaticFilter<'a> {
    key: Vec<&'a Term>,
    values: HashMap<Vec<String>, BTreeSet<String>>,
}

impl<'a> SchemaGrounder<'a> {
    fn new(
        schema: &'a ActionSchema,
        universe: &'a Universe,
        fluent: &'a HashSet<String>,
        static_true: &'a HashSet<String>,
        static_atoms: &HashMap<&str, Vec<Vec<&str>>>,
    ) -> Self {
        let params: Vec<String> = schema.params.iter().map(|p| p.name.clone()).collect();
        let mut checks = vec![Vec::new(); params.len() + 1];
        for lit in &schema.precondition {
            if fluent.contains(&lit.atom.predicate) {
                continue;
            }
            let depth = lit
                .atom
                .args
                .iter()
                .filter_map(|t| match t {
                    Term::Var(v) => params.iter().position(|p| p == v).map(|i| i + 1),
                    Term::Const(_) => None,
                })
                .max()
                .unwrap_or(0);
            checks[depth].push(lit);
        }
        let mut filters: Vec<Vec<StaticFilter>> = (0..params.len()).map(|_| Vec::new()).collect();
        for (depth, lits) in checks.iter().enumerate().skip(1) {
            let var = &params[depth - 1];
            for lit in lits.iter().filter(|l| l.positive) {
                let is_var = |t: &Term| matches!(t, Term::Var(v) if v == var);
                let key: Vec<&Term> = lit.atom.args.iter().filter(|t| !is_var(t)).collect();
                let mut values: HashMap<Vec<String>, BTreeSet<String>> = HashMap::new();
                for tuple in static_atoms
                    .get(lit.atom.predicate.as_str())
                    .into_iter()
                    .flatten()
                {
                    let mut value: Option<&str> = None;
                    let mut consistent = true;
                    let mut k = Vec::with_capacity(key.len());
                    for (t, obj) in lit.atom.args.iter().zip(tuple) {
                        if is_var(t) {
                            consistent &= value.is_none_or(|v| v == *obj);
                            value = Some(obj);
                        } else {
                            k.push(obj.to_string());
                        }
                    }
                    if let (true, Some(v)) = (consistent, value) {
                        values.entry(k).or_default().insert(v.to_string());
                    }
                }
                filters[depth - 1].push(StaticFilter { key, values });
            }
        }
        SchemaGrounder {
            schema,
            params,
            universe,
            fluent,
            static_true,
            checks,
            filters,
        }
    }

    /// Objects allowed for parameter `depth` by the static index, or `None`
    /// when no static literal constrains it.
    fn candidates(&self, depth: usize, binding: &[&str]) -> Option<Vec<&str>> {
        let mut out: Option<Vec<&str>> = None;
        for filter in &self.filters[depth] {
            let key: Vec<String> = filter
                .key
                .iter()
                .map(|t| match t {
                    Term::Const(c) => c.clone(),
                    Term::Var(v) => {
                        let i = self
                            .params
                            .iter()
                            .position(|p| p == v)
                            .expect("bound earlier");
                        binding[i].to_string()
                    }
                })
                .collect();
            let allowed = filter.values.get(&key);
            out = Some(match (out, allowed) {
                (_, None) => Vec::new(),
                (None, Some(set)) => set.iter().map(String::as_str).collect(),
                (Some(prev), Some(set)) => prev.into_iter().filter(|o| set.contains(*o)).collect(),
            });
        }
        out
    }

    fn statics_hold(&self, depth: usize, binding: &[&str]) -> bool {
        self.checks[depth].iter().all(|lit| {
            let name = canonical_name(
                &lit.atom.predicate,
                &substitute(&lit.atom, &self.params, binding),
            );
            self.static_true.contains(&name) == lit.positive
        })
    }

    fn run(&self, out: &mut Vec<RawAction>) -> Result<(), PddlError> {
        let mut binding = Vec::with_capacity(self.params.len());
        if self.statics_hold(0, &binding) {
            self.extend(&mut binding, out)?;
        }
        Ok(())
    }

    fn extend<'b>(
        &'b self,
        binding: &mut Vec<&'b str>,
        out: &mut Vec<RawAction>,
    ) -> Result<(), PddlError> {
        let depth = binding.len();
        if depth == self.params.len() {
            return self.emit(binding, out);
        }
        let typed = self.universe.of_type(&self.schema.params[depth].ty);
        let objects: Vec<&str> = match self.candidates(depth, binding) {
            Some(c) => c
                .into_iter()
                .filter(|o| typed.binary_search_by(|t| t.as_str().cmp(o)).is_ok())
                .collect(),
            None => typed.iter().map(String::as_str).collect(),
        };
        for obj in objects {
            binding.push(obj);
            if self.statics_hold(depth + 1, binding) {
                self.extend(binding, out)?;
            }
            binding.pop();
        }
        Ok(())
    }

    fn emit(&self, binding: &[&str], out: &mut Vec<RawAction>) -> Result<(), PddlError> {
        let ground =
            |atom: &Atom| canonical_name(&atom.predicate, &substitute(atom, &self.params, binding));
        let mut pre = Vec::new();
        for lit in &self.schema.precondition {
            if !self.fluent.contains(&lit.atom.predicate) {
                continue;
            }
            if !lit.positive {
                return Err(PddlError::UncompiledNegation {
                    literal: format!("(not {})", ground(&lit.atom)),
                });
            }
            pre.push(ground(&lit.atom));
        }
        out.push(RawAction {
            name: canonical_name(&self.schema.name, binding),
            pre,
            add: self.schema.add.iter().map(ground).collect(),
            del: self.schema.delete.iter().map(ground).collect(),
            cost: self.schema.cost,
        });
        Ok(())
    }
}

/// Grounds every type-consistent instantiation of the fluent predicates and
/// action schemas. Predicates that no action changes are static: they are
/// evaluated against the initial state while grounding and do not become
/// facts. Facts and actions are numbered in lexicographic order of their
/// canonical names. When `hypotheses` is empty the problem's own goal is the
/// single goal description.
pub fn ground(
    domain: &DomainAst,
    problem: &ProblemAst,
    hypotheses: &[Vec<Literal>],
) -> Result<GroundProblem, PddlError> {
    let universe = Universe::new(domain, problem);
    let fluent: HashSet<String> = domain
        .actions
        .iter()
        .flat_map(|a| a.add.iter().chain(&a.delete))
        .map(|atom| atom.predicate.clone())
        .collect();
    let atom_name = |atom: &Atom| {
        let args: Vec<&str> = atom.args.iter().map(Term::name).collect();
        canonical_name(&atom.predicate, &args)
    };
    let static_true: HashSet<String> = problem
        .init
        .iter()
        .filter(|a| !fluent.contains(&a.predicate))
        .map(atom_name)
        .collect();

    // canonical name -> (predicate, args)
    let mut fact_atoms: BTreeMap<String, (String, Vec<String>)> = BTreeMap::new();
    fn note_fact(
        atoms: &mut BTreeMap<String, (String, Vec<String>)>,
        name: String,
        pred: &str,
        args: Vec<String>,
    ) {
        atoms
            .entry(name)
            .or_insert_with(|| (pred.to_string(), args));
    }
    for decl in domain
        .predicates
        .iter()
        .filter(|p| fluent.contains(&p.name))
    {
        for tuple in universe.tuples(&decl.params) {
            note_fact(
                &mut fact_atoms,
                canonical_name(&decl.name, &tuple),
                &decl.name,
                tuple,
            );
        }
    }
    let init_fluent: Vec<&Atom> = problem
        .init
        .iter()
        .filter(|a| fluent.contains(&a.predicate))
        .collect();
    for atom in &init_fluent {
        let args = atom.args.iter().map(|t| t.name().to_string()).collect();
        note_fact(&mut fact_atoms, atom_name(atom), &atom.predicate, args);
    }

    let mut static_atoms: HashMap<&str, Vec<Vec<&str>>> = HashMap::new();
    for atom in problem
        .init
        .iter()
        .filter(|a| !fluent.contains(&a.predicate))
    {
        static_atoms
            .entry(atom.predicate.as_str())
            .or_default()
            .push(atom.args.iter().map(Term::name).collect());
    }

    let mut raw = Vec::new();
    for schema in &domain.actions {
        SchemaGrounder::new(schema, &universe, &fluent, &static_true, &static_atoms)
            .run(&mut raw)?;
    }
    // facts reached only through loosely typed action parameters
    for a in &raw {
        for name in a.pre.iter().chain(&a.add).chain(&a.del) {
            if !fact_atoms.contains_key(name.as_str()) {
                let inner = name.trim_start_matches('(').trim_end_matches(')');
                let mut parts = inner.split(' ').map(str::to_string);
                let pred = parts.next().unwrap_or_default();
                note_fact(&mut fact_atoms, name.clone(), &pred, parts.collect());
            }
        }
    }

    let names: Vec<String> = fact_atoms.keys().cloned().collect();
    let id_of: HashMap<&str, FactId> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), FactId::from(i)))
        .collect();

    let mut partner: HashMap<FactId, FactId> = HashMap::new();
    let mut pairs = Vec::new();
    for (name, (pred, args)) in &fact_atoms {
        if let Some(comp) = domain.complements.get(pred) {
            let comp_name = canonical_name(comp, args);
            if let Some(&c) = id_of.get(comp_name.as_str()) {
                let p = id_of[name.as_str()];
                partner.insert(p, c);
                pairs.push((p, c));
            }
        }
    }

    raw.sort_by(|a, b| a.name.cmp(&b.name));
    let ids = |v: &[String]| -> Vec<FactId> { v.iter().map(|n| id_of[n.as_str()]).collect() };
    let actions: Vec<GroundAction> = raw
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut add: BTreeSet<FactId> = ids(&a.add).into_iter().collect();
            let mut del: BTreeSet<FactId> = ids(&a.del)
                .into_iter()
                .filter(|f| !add.contains(f))
                .collect();
            // keep complement pairs exclusive when an action both adds and
            // deletes instances that coincide after grounding
            for (&p, &c) in &partner {
                if add.contains(&p) {
                    add.remove(&c);
                    del.insert(c);
                    del.remove(&p);
                } else if del.contains(&p) {
                    add.insert(c);
                    del.remove(&c);
                }
            }
            GroundAction {
                id: ActionId::from(i),
                name: a.name.clone(),
                pre: ids(&a.pre),
                add: add.into_iter().collect(),
                del: del.into_iter().collect(),
                cost: a.cost,
            }
        })
        .collect();

    let s0: Vec<FactId> = init_fluent
        .iter()
        .map(|a| id_of[atom_name(a).as_str()])
        .collect();

    let sources: Vec<Vec<Literal>> = if hypotheses.is_empty() {
        vec![problem.goal.clone()]
    } else {
        hypotheses.to_vec()
    };
    let mut goals = Vec::with_capacity(sources.len());
    for lits in &sources {
        let mut goal = Vec::new();
        for lit in lits {
            let name = atom_name(&lit.atom);
            let not_groundable = |reason: &str| PddlError::NotGroundable {
                literal: lit.to_string(),
                reason: reason.to_string(),
            };
            if !lit.positive {
                return Err(PddlError::UncompiledNegation {
                    literal: lit.to_string(),
                });
            }
            let Some(decl) = domain.predicate(&lit.atom.predicate) else {
                return Err(not_groundable("unknown predicate"));
            };
            if decl.params.len() != lit.atom.args.len() {
                return Err(not_groundable("wrong number of arguments"));
            }
            if !lit.atom.is_ground() {
                return Err(not_groundable("not a ground literal"));
            }
            if lit.atom.args.iter().any(|t| {
                universe
                    .of_type(crate::ast::OBJECT_TYPE)
                    .binary_search_by(|o| o.as_str().cmp(t.name()))
                    .is_err()
            }) {
                return Err(not_groundable("unknown object"));
            }
            if !fluent.contains(&decl.name) {
                if static_true.contains(&name) {
                    continue;
                }
                return Err(not_groundable(
                    "static fact that is false in the initial state",
                ));
            }
            match id_of.get(name.as_str()) {
                Some(&f) => goal.push(f),
                None => {
                    return Err(not_groundable(
                        "arguments do not match the predicate's types",
                    ))
                }
            }
        }
        goals.push(goal);
    }

    GroundProblem::assemble(names, actions, s0, goals, pairs)
}
