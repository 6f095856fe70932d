use std::collections::BTreeSet;

use super::name::ActionName;
use super::term::SessionBehaviour;

/// An unvalidated behaviour expression with named recursion variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RawBehaviour {
    Done,
    Ext(Vec<(ActionName, RawBehaviour)>),
    Int(Vec<(ActionName, RawBehaviour)>),
    Var(String),
    Rec(String, Box<RawBehaviour>),
}

impl RawBehaviour {
    pub fn input(name: ActionName, cont: RawBehaviour) -> Self {
        RawBehaviour::Ext(vec![(name, cont)])
    }

    pub fn output(name: ActionName, cont: RawBehaviour) -> Self {
        RawBehaviour::Int(vec![(name, cont)])
    }

    pub fn rec(var: impl Into<String>, body: RawBehaviour) -> Self {
        RawBehaviour::Rec(var.into(), Box::new(body))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Number of AST nodes, counting each prefix as one node plus its continuation.
    pub fn size(&self) -> usize {
        match self {
            RawBehaviour::Done | RawBehaviour::Var(_) => 1,
            RawBehaviour::Ext(bs) | RawBehaviour::Int(bs) => {
                bs.iter().map(|(_, c)| 1 + c.size()).sum()
            }
            RawBehaviour::Rec(_, body) => 1 + body.size(),
        }
    }
}

fn collect_free<'a>(raw: &'a RawBehaviour, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
    match raw {
        RawBehaviour::Done => {}
        RawBehaviour::Ext(bs) | RawBehaviour::Int(bs) => {
            for (_, c) in bs {
                collect_free(c, bound, out);
            }
        }
        RawBehaviour::Var(x) => {
            if !bound.contains(&x.as_str()) {
                out.insert(x.clone());
            }
        }
        RawBehaviour::Rec(x, body) => {
            bound.push(x);
            collect_free(body, bound, out);
            bound.pop();
        }
    }
}

/// Replaces the free occurrences of `var` in `raw` with `replacement`.
///
/// The replacement is closed, so no binder of `raw` can capture anything in it.
pub fn substitute(raw: &RawBehaviour, var: &str, replacement: &SessionBehaviour) -> RawBehaviour {
    let replacement = replacement.to_raw();
    subst_raw(raw, var, &replacement)
}

fn subst_raw(raw: &RawBehaviour, var: &str, rep: &RawBehaviour) -> RawBehaviour {
    match raw {
        RawBehaviour::Done => RawBehaviour::Done,
        RawBehaviour::Ext(bs) => RawBehaviour::Ext(
            bs.iter()
                .map(|(n, c)| (n.clone(), subst_raw(c, var, rep)))
                .collect(),
        ),
        RawBehaviour::Int(bs) => RawBehaviour::Int(
            bs.iter()
                .map(|(n, c)| (n.clone(), subst_raw(c, var, rep)))
                .collect(),
        ),
        RawBehaviour::Var(x) if x == var => rep.clone(),
        RawBehaviour::Var(x) => RawBehaviour::Var(x.clone()),
        // shadowed
        RawBehaviour::Rec(x, _) if x == var => raw.clone(),
        RawBehaviour::Rec(x, body) => RawBehaviour::Rec(x.clone(), Box::new(subst_raw(body, var, rep))),
    }
}
