//! Canonical session behaviours.
//!
//! Terms are hash-consed-lite: every node caches its structural hash and the
//! number of enclosing binders it needs, so equality checks on shared
//! subterms are pointer comparisons and unfolding leaves closed subterms
//! untouched. Recursion variables are de Bruijn indices and choice branches
//! are sorted by name, which makes structural equality coincide with
//! equality modulo commutativity of choices and alpha-renaming.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use super::name::{ActionLabel, ActionName, Polarity};
use super::raw::RawBehaviour;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("free recursion variable `{0}`")]
    NotClosed(String),
    #[error("duplicate branch `{0}` in a choice")]
    DuplicateBranch(String),
    #[error("body of `rec {0}` is a bare variable")]
    UnguardedRec(String),
    #[error("empty choice")]
    EmptyChoice,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Branch {
    pub name: ActionName,
    pub cont: SessionBehaviour,
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum Kind {
    Done,
    Ext(Vec<Branch>),
    Int(Vec<Branch>),
    Var(u32),
    Rec(SessionBehaviour),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    hash: u64,
    /// Smallest `n` such that every free de Bruijn index is below `n`.
    scope: u32,
}

/// A validated, canonical session behaviour.
///
/// Values obtained through the public API are always closed. Open subterms
/// (bodies of `rec`) exist only internally.
#[derive(Clone)]
pub struct SessionBehaviour(Arc<Node>);

/// Shape of a closed behaviour. Branch continuations of a non-`rec` closed
/// term are closed themselves; a `rec` must be unfolded to be inspected.
#[derive(Debug, Clone, Copy)]
pub enum View<'a> {
    Done,
    Ext(&'a [Branch]),
    Int(&'a [Branch]),
    Rec,
}

impl SessionBehaviour {
    fn mk(kind: Kind) -> Self {
        let mut h = DefaultHasher::new();
        let scope = match &kind {
            Kind::Done => {
                0u8.hash(&mut h);
                0
            }
            Kind::Ext(bs) | Kind::Int(bs) => {
                (if matches!(kind, Kind::Ext(_)) { 1u8 } else { 2u8 }).hash(&mut h);
                let mut scope = 0;
                for b in bs {
                    b.name.hash(&mut h);
                    b.cont.0.hash.hash(&mut h);
                    scope = scope.max(b.cont.0.scope);
                }
                scope
            }
            Kind::Var(i) => {
                3u8.hash(&mut h);
                i.hash(&mut h);
                i + 1
            }
            Kind::Rec(body) => {
                4u8.hash(&mut h);
                body.0.hash.hash(&mut h);
                body.0.scope.saturating_sub(1)
            }
        };
        SessionBehaviour(Arc::new(Node {
            kind,
            hash: h.finish(),
            scope,
        }))
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn done() -> Self {
        Self::mk(Kind::Done)
    }

    /// `a.cont`
    pub fn input(name: ActionName, cont: SessionBehaviour) -> Self {
        Self::mk(Kind::Ext(vec![Branch { name, cont }]))
    }

    /// `!a.cont`
    pub fn output(name: ActionName, cont: SessionBehaviour) -> Self {
        Self::mk(Kind::Int(vec![Branch { name, cont }]))
    }

    /// Builds a choice from closed continuations, sorting the branches.
    pub fn choice(
        polarity: Polarity,
        branches: impl IntoIterator<Item = (ActionName, SessionBehaviour)>,
    ) -> Result<Self, ValidationError> {
        let bs = sorted_branches(
            branches
                .into_iter()
                .map(|(name, cont)| Branch { name, cont })
                .collect(),
        )?;
        Ok(Self::mk(match polarity {
            Polarity::Input => Kind::Ext(bs),
            Polarity::Output => Kind::Int(bs),
        }))
    }

    pub fn view(&self) -> View<'_> {
        match self.kind() {
            Kind::Done => View::Done,
            Kind::Ext(bs) => View::Ext(bs),
            Kind::Int(bs) => View::Int(bs),
            Kind::Rec(_) => View::Rec,
            Kind::Var(_) => unreachable!("open term escaped through the public API"),
        }
    }

    pub fn is_done(&self) -> bool {
        matches!(self.kind(), Kind::Done)
    }

    pub fn is_rec(&self) -> bool {
        matches!(self.kind(), Kind::Rec(_))
    }

    pub fn is_closed(&self) -> bool {
        self.0.scope == 0
    }

    /// One-step unfolding `σ[rec x.σ/x]` of a `rec`; `None` for other shapes.
    pub fn unfold(&self) -> Option<SessionBehaviour> {
        match self.kind() {
            Kind::Rec(body) => Some(subst(body, 0, self)),
            _ => None,
        }
    }

    /// Unfolds leading `rec`s until the head is a choice or `1`.
    pub fn unfold_all(&self) -> SessionBehaviour {
        let mut t = self.clone();
        while let Some(next) = t.unfold() {
            t = next;
        }
        t
    }

    /// Swaps inputs with outputs and external with internal choice.
    pub fn dual(&self) -> SessionBehaviour {
        match self.kind() {
            Kind::Done => self.clone(),
            Kind::Ext(bs) => Self::mk(Kind::Int(dual_branches(bs))),
            Kind::Int(bs) => Self::mk(Kind::Ext(dual_branches(bs))),
            Kind::Var(_) => self.clone(),
            Kind::Rec(body) => Self::mk(Kind::Rec(body.dual())),
        }
    }

    /// Action names occurring anywhere in the term.
    pub fn names(&self) -> BTreeSet<ActionName> {
        let mut out = BTreeSet::new();
        let mut seen = HashSet::new();
        collect_names(self, &mut out, &mut seen);
        out
    }

    /// Node count with the same convention as [`RawBehaviour::size`].
    pub fn size(&self) -> usize {
        match self.kind() {
            Kind::Done | Kind::Var(_) => 1,
            Kind::Ext(bs) | Kind::Int(bs) => bs.iter().map(|b| 1 + b.cont.size()).sum(),
            Kind::Rec(body) => 1 + body.size(),
        }
    }

    /// Converts back to a named expression. Recursion variables get names
    /// that do not collide with any action name of the term.
    pub fn to_raw(&self) -> RawBehaviour {
        let names = self.names();
        let mut pool = VarNames::new(&names);
        to_raw(self, &mut Vec::new(), &mut pool)
    }
}

impl PartialEq for SessionBehaviour {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.0.kind == other.0.kind)
    }
}

impl Eq for SessionBehaviour {}

impl Hash for SessionBehaviour {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for SessionBehaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_closed() {
            write!(f, "`{}`", super::render::render(self))
        } else {
            write!(f, "{:?}", self.0.kind)
        }
    }
}

impl fmt::Display for SessionBehaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render::render(self))
    }
}

impl Branch {
    pub fn label(&self, polarity: Polarity) -> ActionLabel {
        ActionLabel {
            polarity,
            name: self.name.clone(),
        }
    }
}

fn dual_branches(bs: &[Branch]) -> Vec<Branch> {
    bs.iter()
        .map(|b| Branch {
            name: b.name.clone(),
            cont: b.cont.dual(),
        })
        .collect()
}

fn sorted_branches(mut bs: Vec<Branch>) -> Result<Vec<Branch>, ValidationError> {
    if bs.is_empty() {
        return Err(ValidationError::EmptyChoice);
    }
    bs.sort_by(|a, b| a.name.cmp(&b.name));
    if let Some(w) = bs.windows(2).find(|w| w[0].name == w[1].name) {
        return Err(ValidationError::DuplicateBranch(w[0].name.to_string()));
    }
    Ok(bs)
}

/// Replaces de Bruijn index `k` with the closed term `rep`.
fn subst(t: &SessionBehaviour, k: u32, rep: &SessionBehaviour) -> SessionBehaviour {
    if t.0.scope <= k {
        return t.clone();
    }
    match t.kind() {
        Kind::Done => t.clone(),
        Kind::Var(i) if *i == k => rep.clone(),
        Kind::Var(_) => t.clone(),
        Kind::Ext(bs) => SessionBehaviour::mk(Kind::Ext(subst_branches(bs, k, rep))),
        Kind::Int(bs) => SessionBehaviour::mk(Kind::Int(subst_branches(bs, k, rep))),
        Kind::Rec(body) => SessionBehaviour::mk(Kind::Rec(subst(body, k + 1, rep))),
    }
}

fn subst_branches(bs: &[Branch], k: u32, rep: &SessionBehaviour) -> Vec<Branch> {
    bs.iter()
        .map(|b| Branch {
            name: b.name.clone(),
            cont: subst(&b.cont, k, rep),
        })
        .collect()
}

fn collect_names(
    t: &SessionBehaviour,
    out: &mut BTreeSet<ActionName>,
    seen: &mut HashSet<*const Node>,
) {
    if !seen.insert(Arc::as_ptr(&t.0)) {
        return;
    }
    match t.kind() {
        Kind::Done | Kind::Var(_) => {}
        Kind::Ext(bs) | Kind::Int(bs) => {
            for b in bs {
                out.insert(b.name.clone());
                collect_names(&b.cont, out, seen);
            }
        }
        Kind::Rec(body) => collect_names(body, out, seen),
    }
}

struct VarNames {
    names: Vec<String>,
    taken: BTreeSet<String>,
    next: usize,
}

impl VarNames {
    fn new(actions: &BTreeSet<ActionName>) -> Self {
        VarNames {
            names: Vec::new(),
            taken: actions.iter().map(|a| a.to_string()).collect(),
            next: 0,
        }
    }

    fn at(&mut self, depth: usize) -> String {
        const BASE: [&str; 6] = ["x", "y", "z", "w", "v", "u"];
        while self.names.len() <= depth {
            loop {
                let i = self.next;
                self.next += 1;
                let candidate = if i < BASE.len() {
                    BASE[i].to_string()
                } else {
                    format!("{}{}", BASE[i % BASE.len()], i / BASE.len())
                };
                if !self.taken.contains(&candidate) {
                    self.taken.insert(candidate.clone());
                    self.names.push(candidate);
                    break;
                }
            }
        }
        self.names[depth].clone()
    }
}

fn to_raw(t: &SessionBehaviour, binders: &mut Vec<String>, pool: &mut VarNames) -> RawBehaviour {
    match t.kind() {
        Kind::Done => RawBehaviour::Done,
        Kind::Ext(bs) => RawBehaviour::Ext(raw_branches(bs, binders, pool)),
        Kind::Int(bs) => RawBehaviour::Int(raw_branches(bs, binders, pool)),
        Kind::Var(i) => RawBehaviour::Var(binders[binders.len() - 1 - *i as usize].clone()),
        Kind::Rec(body) => {
            let name = pool.at(binders.len());
            binders.push(name.clone());
            let body = to_raw(body, binders, pool);
            binders.pop();
            RawBehaviour::Rec(name, Box::new(body))
        }
    }
}

fn raw_branches(
    bs: &[Branch],
    binders: &mut Vec<String>,
    pool: &mut VarNames,
) -> Vec<(ActionName, RawBehaviour)> {
    bs.iter()
        .map(|b| (b.name.clone(), to_raw(&b.cont, binders, pool)))
        .collect()
}

/// Checks the session-behaviour conditions and produces the canonical term.
pub fn validate(raw: &RawBehaviour) -> Result<SessionBehaviour, ValidationError> {
    canon(raw, &mut Vec::new())
}

fn canon<'a>(raw: &'a RawBehaviour, binders: &mut Vec<&'a str>) -> Result<SessionBehaviour, ValidationError> {
    Ok(match raw {
        RawBehaviour::Done => SessionBehaviour::done(),
        RawBehaviour::Ext(bs) => SessionBehaviour::mk(Kind::Ext(canon_branches(bs, binders)?)),
        RawBehaviour::Int(bs) => SessionBehaviour::mk(Kind::Int(canon_branches(bs, binders)?)),
        RawBehaviour::Var(x) => {
            let pos = binders
                .iter()
                .rposition(|b| b == x)
                .ok_or_else(|| ValidationError::NotClosed(x.clone()))?;
            SessionBehaviour::mk(Kind::Var((binders.len() - 1 - pos) as u32))
        }
        RawBehaviour::Rec(x, body) => {
            if matches!(**body, RawBehaviour::Var(_)) {
                return Err(ValidationError::UnguardedRec(x.clone()));
            }
            binders.push(x);
            let body = canon(body, binders);
            binders.pop();
            SessionBehaviour::mk(Kind::Rec(body?))
        }
    })
}

fn canon_branches<'a>(
    bs: &'a [(ActionName, RawBehaviour)],
    binders: &mut Vec<&'a str>,
) -> Result<Vec<Branch>, ValidationError> {
    let mut out = Vec::with_capacity(bs.len());
    for (name, cont) in bs {
        out.push(Branch {
            name: name.clone(),
            cont: canon(cont, binders)?,
        });
    }
    sorted_branches(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn n(s: &str) -> ActionName {
        ActionName::new(s).unwrap()
    }

    fn sb(s: &str) -> SessionBehaviour {
        validate(&parse(s).unwrap()).unwrap()
    }

    #[test]
    fn duplicate_branches_are_rejected() {
        let raw = RawBehaviour::Int(vec![(n("a"), RawBehaviour::Done), (n("a"), RawBehaviour::Done)]);
        assert_eq!(validate(&raw), Err(ValidationError::DuplicateBranch("a".into())));
    }

    #[test]
    fn unguarded_recursion_is_rejected() {
        let raw = RawBehaviour::rec("x", RawBehaviour::Var("x".into()));
        assert_eq!(validate(&raw), Err(ValidationError::UnguardedRec("x".into())));
        let nested = RawBehaviour::rec("x", RawBehaviour::rec("y", RawBehaviour::Var("x".into())));
        assert_eq!(validate(&nested), Err(ValidationError::UnguardedRec("y".into())));
    }

    #[test]
    fn free_variable_is_rejected() {
        assert_eq!(
            validate(&RawBehaviour::Var("x".into())),
            Err(ValidationError::NotClosed("x".into()))
        );
    }

    #[test]
    fn empty_choice_is_rejected() {
        assert_eq!(validate(&RawBehaviour::Ext(vec![])), Err(ValidationError::EmptyChoice));
    }

    #[test]
    fn canonical_equality_ignores_order_and_binder_names() {
        assert_eq!(sb("a.1 + b.1"), sb("b + a"));
        assert_eq!(sb("rec x.(!a.x (+) !b)"), sb("rec y.(!b (+) !a.y)"));
        assert_ne!(sb("a + b"), sb("!a (+) !b"));
        assert_ne!(sb("rec x.a.x"), sb("rec x.a.rec y.a.y"));
    }

    #[test]
    fn unfold_substitutes_the_whole_rec() {
        let t = sb("rec x.!a.x");
        assert_eq!(t.unfold().unwrap(), sb("!a.rec x.!a.x"));
        assert!(sb("a").unfold().is_none());
        let nested = sb("rec x.rec y.(a.x + b.y)");
        let once = nested.unfold().unwrap();
        assert!(once.is_rec());
        let twice = once.unfold().unwrap();
        assert!(matches!(twice.view(), View::Ext(bs) if bs.len() == 2));
        assert!(twice.is_closed());
    }

    #[test]
    fn dual_swaps_choices() {
        assert_eq!(sb("a.!b").dual(), sb("!a.b"));
        assert_eq!(sb("rec x.(!a.x (+) !b)").dual(), sb("rec x.(a.x + b)"));
        let t = sb("rec x. !login.(wrong.x + overload.x + ok.!voteA)");
        assert_eq!(t.dual().dual(), t);
    }

    #[test]
    fn to_raw_avoids_action_names() {
        let t = sb("rec q.(x.q + y.!z.q)");
        let raw = t.to_raw();
        match &raw {
            RawBehaviour::Rec(v, _) => assert!(!["x", "y", "z"].contains(&v.as_str())),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(validate(&raw).unwrap(), t);
    }

    #[test]
    fn names_and_size() {
        let t = sb("rec x.(a.x + b.!c)");
        let names: Vec<_> = t.names().into_iter().map(|n| n.to_string()).collect();
        assert_eq!(names, ["a", "b", "c"]);
        assert_eq!(t.size(), 1 + (1 + 1) + (1 + 1 + 1));
    }

    #[test]
    fn choice_constructor_sorts_and_checks() {
        let c = SessionBehaviour::choice(
            Polarity::Input,
            [(n("b"), SessionBehaviour::done()), (n("a"), SessionBehaviour::done())],
        )
        .unwrap();
        assert_eq!(c, sb("a + b"));
        assert!(SessionBehaviour::choice(
            Polarity::Output,
            [(n("a"), SessionBehaviour::done()), (n("a"), SessionBehaviour::done())]
        )
        .is_err());
    }
}
