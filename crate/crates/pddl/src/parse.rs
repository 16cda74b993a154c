use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::ast::{
    ActionSchema, Atom, Cost, DomainAst, Literal, PredicateDecl, ProblemAst, Requirement, Term,
    TypedName, OBJECT_TYPE,
};
use crate::error::{PddlError, Pos};
use crate::sexpr::{read_all, SExpr};

fn single_define(text: &str) -> Result<Vec<SExpr>, PddlError> {
    let mut top = read_all(text)?;
    match top.len() {
        0 => Err(PddlError::syntax(Pos { line: 1, col: 1 }, "empty input")),
        1 => {
            let root = top.pop().expect("one element");
            let items = root.expect_list("`(define ...)`")?;
            if items.first().and_then(SExpr::as_symbol) != Some("define") {
                return Err(PddlError::syntax(root.pos(), "expected `(define ...)`"));
            }
            Ok(items.to_vec())
        }
        _ => Err(PddlError::syntax(
            top[1].pos(),
            "unexpected content after the `define` form",
        )),
    }
}

/// `(kind name)` header such as `(domain grid)`.
fn header<'a>(items: &'a [SExpr], kind: &str, at: Pos) -> Result<&'a str, PddlError> {
    let h = items
        .get(1)
        .ok_or_else(|| PddlError::syntax(at, format!("missing `({kind} <name>)`")))?;
    let list = h.expect_list(&format!("`({kind} <name>)`"))?;
    match list {
        [SExpr::Symbol { text: k, .. }, name] if k == kind => name.expect_symbol("a name"),
        _ => Err(PddlError::syntax(
            h.pos(),
            format!("expected `({kind} <name>)`"),
        )),
    }
}

/// Typed list `a b - t c` -> [(a,t),(b,t),(c,object)].
fn typed_list(items: &[SExpr], vars: bool) -> Result<Vec<(TypedName, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut iter = items.iter();
    while let Some(item) = iter.next() {
        let sym = item.expect_symbol(if vars { "a variable" } else { "a name" })?;
        if sym == "-" {
            let ty_expr = iter
                .next()
                .ok_or_else(|| PddlError::syntax(item.pos(), "missing type after `-`"))?;
            let ty = match ty_expr {
                SExpr::Symbol { text, .. } => text.clone(),
                SExpr::List { pos, .. } => {
                    return Err(PddlError::Unsupported {
                        pos: *pos,
                        msg: "`either` types".into(),
                    })
                }
            };
            if pending.is_empty() {
                return Err(PddlError::syntax(item.pos(), "type without names"));
            }
            out.extend(
                pending
                    .drain(..)
                    .map(|(n, p)| (TypedName::new(n, ty.clone()), p)),
            );
            continue;
        }
        let name = if vars {
            sym.strip_prefix('?')
                .filter(|n| !n.is_empty())
                .ok_or_else(|| {
                    PddlError::syntax(item.pos(), format!("expected a variable, found `{sym}`"))
                })?
        } else {
            if sym.starts_with('?') {
                return Err(PddlError::syntax(
                    item.pos(),
                    format!("unexpected variable `{sym}`"),
                ));
            }
            sym
        };
        pending.push((name.to_string(), item.pos()));
    }
    out.extend(
        pending
            .into_iter()
            .map(|(n, p)| (TypedName::new(n, OBJECT_TYPE), p)),
    );
    Ok(out)
}

/// Name resolution for atoms: schema parameters plus constants, or a fixed
/// object set for ground contexts.
struct Scope<'a> {
    schema: Option<&'a str>,
    vars: HashSet<&'a str>,
    constants: &'a HashSet<String>,
}

struct Checker<'a> {
    predicates: &'a [PredicateDecl],
}

impl Checker<'_> {
    fn atom(&self, expr: &SExpr, scope: &Scope<'_>) -> Result<Atom, PddlError> {
        let items = expr.expect_list("an atom")?;
        let (head, args) = items
            .split_first()
            .ok_or_else(|| PddlError::syntax(expr.pos(), "empty atom"))?;
        let pred = head.expect_symbol("a predicate name")?;
        if matches!(
            pred,
            "or" | "imply"
                | "exists"
                | "forall"
                | "when"
                | "="
                | "and"
                | "not"
                | "increase"
                | "decrease"
        ) {
            return Err(PddlError::Unsupported {
                pos: expr.pos(),
                msg: format!("`{pred}` is not allowed here"),
            });
        }
        let decl = self
            .predicates
            .iter()
            .find(|p| p.name == pred)
            .ok_or_else(|| PddlError::UndeclaredPredicate {
                name: pred.to_string(),
                pos: head.pos(),
            })?;
        if decl.params.len() != args.len() {
            return Err(PddlError::ArityMismatch {
                predicate: pred.to_string(),
                expected: decl.params.len(),
                found: args.len(),
                pos: expr.pos(),
            });
        }
        let mut terms = Vec::with_capacity(args.len());
        for arg in args {
            let sym = arg.expect_symbol("a term")?;
            if let Some(var) = sym.strip_prefix('?') {
                match scope.schema {
                    Some(_) if scope.vars.contains(var) => terms.push(Term::Var(var.to_string())),
                    Some(schema) => {
                        return Err(PddlError::UndeclaredVariable {
                            schema: schema.to_string(),
                            var: var.to_string(),
                            pos: arg.pos(),
                        })
                    }
                    None => {
                        return Err(PddlError::syntax(
                            arg.pos(),
                            format!("variable `{sym}` in a ground context"),
                        ))
                    }
                }
            } else if scope.constants.contains(sym) {
                terms.push(Term::Const(sym.to_string()));
            } else {
                return Err(PddlError::UndeclaredObject {
                    name: sym.to_string(),
                    pos: arg.pos(),
                });
            }
        }
        Ok(Atom::new(pred, terms))
    }

    /// Conjunction of literals; nested `and` is flattened.
    fn condition(
        &self,
        expr: &SExpr,
        scope: &Scope<'_>,
        out: &mut Vec<Literal>,
    ) -> Result<(), PddlError> {
        let items = expr.expect_list("a condition")?;
        match expr.head() {
            None if items.is_empty() => Ok(()),
            Some("and") => items[1..]
                .iter()
                .try_for_each(|c| self.condition(c, scope, out)),
            Some("not") => {
                let [_, inner] = items else {
                    return Err(PddlError::syntax(
                        expr.pos(),
                        "`not` takes exactly one atom",
                    ));
                };
                out.push(Literal::neg(self.atom(inner, scope)?));
                Ok(())
            }
            _ => {
                out.push(Literal::pos(self.atom(expr, scope)?));
                Ok(())
            }
        }
    }
}

fn parse_number(expr: &SExpr) -> Result<Cost, PddlError> {
    let Some(text) = expr.as_symbol() else {
        return Err(PddlError::Unsupported {
            pos: expr.pos(),
            msg: "action costs must be numeric constants".into(),
        });
    };
    let bad = || PddlError::syntax(expr.pos(), format!("invalid cost `{text}`"));
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let numer: u64 = if digits.is_empty() {
        0
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let denom = 10u64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    Ok(Cost::new(numer, denom))
}

fn is_total_cost(expr: &SExpr) -> bool {
    matches!(expr.as_list(), Some([SExpr::Symbol { text, .. }]) if text == "total-cost")
}

fn effects(
    checker: &Checker<'_>,
    expr: &SExpr,
    scope: &Scope<'_>,
    add: &mut Vec<Atom>,
    delete: &mut Vec<Atom>,
    cost: &mut Option<Cost>,
) -> Result<(), PddlError> {
    let items = expr.expect_list("an effect")?;
    match expr.head() {
        None if items.is_empty() => Ok(()),
        Some("and") => items[1..]
            .iter()
            .try_for_each(|e| effects(checker, e, scope, add, delete, cost)),
        Some("not") => {
            let [_, inner] = items else {
                return Err(PddlError::syntax(
                    expr.pos(),
                    "`not` takes exactly one atom",
                ));
            };
            delete.push(checker.atom(inner, scope)?);
            Ok(())
        }
        Some("increase") => match items {
            [_, target, amount] if is_total_cost(target) => {
                let c = parse_number(amount)?;
                *cost = Some(cost.unwrap_or_default() + c);
                Ok(())
            }
            _ => Err(PddlError::Unsupported {
                pos: expr.pos(),
                msg: "only `(increase (total-cost) <number>)` is supported".into(),
            }),
        },
        _ => {
            add.push(checker.atom(expr, scope)?);
            Ok(())
        }
    }
}

/// Parses a domain file restricted to `:strips`, `:typing`,
/// `:negative-preconditions` and `:action-costs`.
pub fn parse_domain(text: &str) -> Result<DomainAst, PddlError> {
    let items = single_define(text)?;
    let root_pos = items[0].pos();
    let name = header(&items, "domain", root_pos)?.to_string();

    let mut domain = DomainAst {
        name,
        requirements: BTreeSet::new(),
        types: BTreeMap::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
        complements: BTreeMap::new(),
    };
    let mut action_exprs = Vec::new();
    let mut declared_types: Vec<(String, Pos)> = Vec::new();
    let mut constants: Vec<(TypedName, Pos)> = Vec::new();

    for section in &items[2..] {
        let list = section.expect_list("a domain section")?;
        match section.head() {
            Some(":requirements") => {
                for tag in &list[1..] {
                    let t = tag.expect_symbol("a requirement")?;
                    let req = Requirement::from_tag(t).ok_or_else(|| {
                        PddlError::UnsupportedRequirement {
                            tag: t.to_string(),
                            pos: tag.pos(),
                        }
                    })?;
                    domain.requirements.insert(req);
                }
            }
            Some(":types") => {
                for (tn, pos) in typed_list(&list[1..], false)? {
                    if tn.name != OBJECT_TYPE {
                        declared_types.push((tn.ty.clone(), pos));
                        domain.types.insert(tn.name, tn.ty);
                    }
                }
            }
            Some(":constants") => constants.extend(typed_list(&list[1..], false)?),
            Some(":predicates") => {
                for p in &list[1..] {
                    let decl = p.expect_list("a predicate declaration")?;
                    let (head, params) = decl
                        .split_first()
                        .ok_or_else(|| PddlError::syntax(p.pos(), "empty predicate declaration"))?;
                    let params = typed_list(params, true)?;
                    for (tn, pos) in &params {
                        declared_types.push((tn.ty.clone(), *pos));
                    }
                    domain.predicates.push(PredicateDecl {
                        name: head.expect_symbol("a predicate name")?.to_string(),
                        params: params.into_iter().map(|(tn, _)| tn).collect(),
                    });
                }
            }
            Some(":functions") => {
                let mut rest = list[1..].iter();
                while let Some(f) = rest.next() {
                    if !is_total_cost(f) {
                        return Err(PddlError::Unsupported {
                            pos: f.pos(),
                            msg: "numeric fluents other than (total-cost)".into(),
                        });
                    }
                    if let Some(SExpr::Symbol { text, .. }) = rest.clone().next() {
                        if text == "-" {
                            rest.next();
                            rest.next();
                        }
                    }
                }
            }
            Some(":action") => action_exprs.push(section),
            Some(other) => {
                return Err(PddlError::Unsupported {
                    pos: section.pos(),
                    msg: format!("domain section `{other}`"),
                })
            }
            None => {
                return Err(PddlError::syntax(
                    section.pos(),
                    "expected a domain section",
                ))
            }
        }
    }

    // parent types that are only mentioned on the right of `-` are implicit
    // subtypes of object
    for (ty, _) in &declared_types {
        if !domain.has_type(ty) && domain.types.values().any(|p| p == ty) {
            domain.types.insert(ty.clone(), OBJECT_TYPE.to_string());
        }
    }
    let type_refs = declared_types
        .iter()
        .cloned()
        .chain(constants.iter().map(|(tn, pos)| (tn.ty.clone(), *pos)));
    for (ty, pos) in type_refs {
        if !domain.has_type(&ty) {
            return Err(PddlError::UndeclaredType { name: ty, pos });
        }
    }
    domain.constants = constants.into_iter().map(|(tn, _)| tn).collect();

    let constant_names: HashSet<String> = domain.constants.iter().map(|c| c.name.clone()).collect();
    let checker = Checker {
        predicates: &domain.predicates,
    };
    let mut actions = Vec::new();
    let mut seen = HashSet::new();
    for expr in action_exprs {
        let schema = parse_action(&checker, expr, &constant_names, &domain)?;
        if !seen.insert(schema.name.clone()) {
            return Err(PddlError::DuplicateSchema {
                name: schema.name,
                pos: expr.pos(),
            });
        }
        actions.push(schema);
    }
    domain.actions = actions;
    Ok(domain)
}

fn parse_action(
    checker: &Checker<'_>,
    expr: &SExpr,
    constants: &HashSet<String>,
    domain: &DomainAst,
) -> Result<ActionSchema, PddlError> {
    let items = expr.expect_list("an action")?;
    let name = items
        .get(1)
        .ok_or_else(|| PddlError::syntax(expr.pos(), "action without a name"))?
        .expect_symbol("an action name")?
        .to_string();

    let mut params = Vec::new();
    let mut pre_expr = None;
    let mut eff_expr = None;
    let mut rest = items[2..].iter();
    while let Some(key) = rest.next() {
        let k = key.expect_symbol("an action keyword")?;
        let value = rest
            .next()
            .ok_or_else(|| PddlError::syntax(key.pos(), format!("missing value for `{k}`")))?;
        match k {
            ":parameters" => {
                for (tn, pos) in typed_list(value.expect_list("a parameter list")?, true)? {
                    if !domain.has_type(&tn.ty) {
                        return Err(PddlError::UndeclaredType { name: tn.ty, pos });
                    }
                    params.push(tn);
                }
            }
            ":precondition" => pre_expr = Some(value),
            ":effect" => eff_expr = Some(value),
            other => {
                return Err(PddlError::Unsupported {
                    pos: key.pos(),
                    msg: format!("action keyword `{other}`"),
                })
            }
        }
    }

    let scope = Scope {
        schema: Some(&name),
        vars: params.iter().map(|p| p.name.as_str()).collect(),
        constants,
    };
    let mut precondition = Vec::new();
    if let Some(pre) = pre_expr {
        checker.condition(pre, &scope, &mut precondition)?;
    }
    let (mut add, mut delete, mut cost) = (Vec::new(), Vec::new(), None);
    if let Some(eff) = eff_expr {
        effects(checker, eff, &scope, &mut add, &mut delete, &mut cost)?;
    }
    Ok(ActionSchema {
        name: name.clone(),
        params,
        precondition,
        add,
        delete,
        cost: cost.unwrap_or_else(|| Cost::from_integer(1)),
    })
}

/// Parses a problem file against an already parsed domain.
pub fn parse_problem(text: &str, domain: &DomainAst) -> Result<ProblemAst, PddlError> {
    let items = single_define(text)?;
    let root_pos = items[0].pos();
    let name = header(&items, "problem", root_pos)?.to_string();

    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut init_expr = None;
    let mut goal_expr = None;
    for section in &items[2..] {
        let list = section.expect_list("a problem section")?;
        match section.head() {
            Some(":domain") => {
                let [_, d] = list else {
                    return Err(PddlError::syntax(
                        section.pos(),
                        "expected `(:domain <name>)`",
                    ));
                };
                domain_name = Some(d.expect_symbol("a domain name")?.to_string());
            }
            Some(":objects") => {
                for (tn, pos) in typed_list(&list[1..], false)? {
                    if !domain.has_type(&tn.ty) {
                        return Err(PddlError::UndeclaredType { name: tn.ty, pos });
                    }
                    objects.push(tn);
                }
            }
            Some(":init") => init_expr = Some(list),
            Some(":goal") => goal_expr = Some(section),
            Some(":metric") | Some(":requirements") => {}
            Some(other) => {
                return Err(PddlError::Unsupported {
                    pos: section.pos(),
                    msg: format!("problem section `{other}`"),
                })
            }
            None => {
                return Err(PddlError::syntax(
                    section.pos(),
                    "expected a problem section",
                ))
            }
        }
    }

    let domain_name =
        domain_name.ok_or_else(|| PddlError::syntax(root_pos, "missing `(:domain <name>)`"))?;
    if domain_name != domain.name {
        return Err(PddlError::DomainMismatch {
            expected: domain.name.clone(),
            found: domain_name,
        });
    }

    let names: HashSet<String> = objects
        .iter()
        .chain(domain.constants.iter())
        .map(|o| o.name.clone())
        .collect();
    let checker = Checker {
        predicates: &domain.predicates,
    };
    let scope = Scope {
        schema: None,
        vars: HashSet::new(),
        constants: &names,
    };

    let mut init = Vec::new();
    for atom in init_expr.map(|l| &l[1..]).unwrap_or_default() {
        match atom.head() {
            // (= (total-cost) 0)
            Some("=")
                if atom
                    .as_list()
                    .is_some_and(|l| l.len() == 3 && is_total_cost(&l[1])) => {}
            Some("not") => {
                return Err(PddlError::syntax(
                    atom.pos(),
                    "initial state must contain positive atoms only",
                ))
            }
            _ => init.push(checker.atom(atom, &scope)?),
        }
    }

    let mut goal = Vec::new();
    if let Some(g) = goal_expr {
        let list = g.as_list().unwrap_or_default();
        for cond in &list[1..] {
            checker.condition(cond, &scope, &mut goal)?;
        }
    }

    Ok(ProblemAst {
        name,
        domain_name,
        objects,
        init,
        goal,
    })
}

/// Parses a list of ground literals such as `(on a b), (not (clear c))`.
/// Commas are treated as separators; names are not checked against a
/// domain here.
pub fn parse_ground_literals(text: &str) -> Result<Vec<Literal>, PddlError> {
    let cleaned = text.replace(',', " ");
    let mut out = Vec::new();
    for expr in read_all(&cleaned)? {
        let items = expr.expect_list("a ground literal")?;
        let (positive, atom_expr) = match expr.head() {
            Some("not") => match items {
                [_, inner] => (false, inner),
                _ => {
                    return Err(PddlError::syntax(
                        expr.pos(),
                        "`not` takes exactly one atom",
                    ))
                }
            },
            _ => (true, &expr),
        };
        let parts = atom_expr.expect_list("an atom")?;
        let (head, args) = parts
            .split_first()
            .ok_or_else(|| PddlError::syntax(atom_expr.pos(), "empty atom"))?;
        let mut terms = Vec::with_capacity(args.len());
        for a in args {
            let s = a.expect_symbol("a constant")?;
            if s.starts_with('?') {
                return Err(PddlError::syntax(
                    a.pos(),
                    format!("variable `{s}` in a ground literal"),
                ));
            }
            terms.push(Term::Const(s.to_string()));
        }
        let atom = Atom::new(head.expect_symbol("a predicate name")?, terms);
        out.push(Literal { atom, positive });
    }
    Ok(out)
}
