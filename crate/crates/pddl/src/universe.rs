use std::collections::BTreeMap;

use crate::ast::{DomainAst, ProblemAst, TypedName};

/// Domain constants plus problem objects, indexed by (transitive) type.
pub(crate) struct Universe {
    by_type: BTreeMap<String, Vec<String>>,
}

impl Universe {
    pub fn new(domain: &DomainAst, problem: &ProblemAst) -> Self {
        let mut objects: BTreeMap<&str, &str> = BTreeMap::new();
        for TypedName { name, ty } in domain.constants.iter().chain(&problem.objects) {
            objects.insert(name, ty);
        }
        let mut types: Vec<&str> = domain.types.keys().map(String::as_str).collect();
        types.push(crate::ast::OBJECT_TYPE);
        let mut by_type = BTreeMap::new();
        for ty in types {
            // BTreeMap iteration keeps each list sorted
            let members: Vec<String> = objects
                .iter()
                .filter(|(_, obj_ty)| domain.is_subtype(obj_ty, ty))
                .map(|(name, _)| name.to_string())
                .collect();
            by_type.insert(ty.to_string(), members);
        }
        Universe { by_type }
    }

    pub fn of_type(&self, ty: &str) -> &[String] {
        self.by_type.get(ty).map(Vec::as_slice).unwrap_or_default()
    }

    /// All type-consistent argument tuples for a parameter list, in
    /// lexicographic order.
    pub fn tuples(&self, params: &[TypedName]) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new()];
        for p in params {
            let members = self.of_type(&p.ty);
            let mut next = Vec::with_capacity(out.len() * members.len());
            for prefix in &out {
                for m in members {
                    let mut t = prefix.clone();
                    t.push(m.clone());
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }
}
