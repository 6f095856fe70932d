//! Bottom-up proof reconstruction for `Γ ▷ ρ ⊣skp σ`.
//!
//! The rules are syntax directed, so reconstruction never backtracks. Every
//! statement met at a communication rule is recorded in the environment:
//! marked ✗ when only a skip has happened since, and ✓ once a handshake has
//! occurred. Meeting a ✓ statement again closes the branch; meeting a ✗
//! statement again means the server can skip forever.

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::product::Configuration;
use crate::syntax::{render, Branch, Kind, SessionBehaviour};
use crate::{behaviour, Error, Limits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mark {
    Check,
    Cross,
}

impl Mark {
    fn as_str(self) -> &'static str {
        match self {
            Mark::Check => "check",
            Mark::Cross => "cross",
        }
    }
}

#[derive(Debug)]
struct Entry {
    stmt: Configuration,
    mark: Mark,
    /// Number of entries below this one.
    pos: usize,
    below: Option<Arc<Entry>>,
}

/// A marked environment, shared persistently between the branches of a tree.
///
/// Entries below the `checked` watermark read as ✓ whatever their stored
/// mark, which makes the all-✓ upgrade constant time.
#[derive(Clone, Default)]
pub struct Env {
    head: Option<Arc<Entry>>,
    len: usize,
    checked: usize,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&self, stmt: Configuration, mark: Mark) -> Env {
        Env {
            head: Some(Arc::new(Entry { stmt, mark, pos: self.len, below: self.head.clone() })),
            len: self.len + 1,
            checked: self.checked,
        }
    }

    /// Γ✓: every assumption marked ✓.
    pub fn all_checked(&self) -> Env {
        Env { head: self.head.clone(), len: self.len, checked: self.len }
    }

    fn effective(&self, e: &Entry) -> Mark {
        if e.pos < self.checked {
            Mark::Check
        } else {
            e.mark
        }
    }

    pub fn lookup(&self, stmt: &Configuration) -> Option<Mark> {
        let mut at = self.head.as_deref();
        while let Some(e) = at {
            if e.stmt == *stmt {
                return Some(self.effective(e));
            }
            at = e.below.as_deref();
        }
        None
    }

    /// Assumptions from oldest to newest.
    pub fn entries(&self) -> Vec<(Configuration, Mark)> {
        let mut out = Vec::with_capacity(self.len);
        let mut at = self.head.as_deref();
        while let Some(e) = at {
            out.push((e.stmt.clone(), self.effective(e)));
            at = e.below.as_deref();
        }
        out.reverse();
        out
    }

    /// No statement carries two marks.
    pub fn is_coherent(&self) -> bool {
        let entries = self.entries();
        entries
            .iter()
            .enumerate()
            .all(|(i, (s, _))| entries[i + 1..].iter().all(|(t, _)| s != t))
    }
}

impl PartialEq for Env {
    fn eq(&self, other: &Self) -> bool {
        self.entries() == other.entries()
    }
}

impl Eq for Env {}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.entries().iter().map(|(s, m)| format!("({s}){}", if *m == Mark::Check { "✓" } else { "✗" })))
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub env: Env,
    pub client: SessionBehaviour,
    pub server: SessionBehaviour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Ax,
    Hyp,
    UnfL,
    UnfR,
    /// Client external choice against server internal choice.
    ExtInt,
    /// Both sides internal: the server output is skipped.
    IntInt,
    /// Client internal choice against server external choice.
    IntExt,
}

impl Rule {
    pub const ALL: [Rule; 7] = [Rule::Ax, Rule::Hyp, Rule::UnfL, Rule::UnfR, Rule::ExtInt, Rule::IntInt, Rule::IntExt];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Ax => "Ax",
            Rule::Hyp => "Hyp",
            Rule::UnfL => "UnfL",
            Rule::UnfR => "UnfR",
            Rule::ExtInt => "ExtInt",
            Rule::IntInt => "IntInt",
            Rule::IntExt => "IntExt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Failure {
    /// The goal is assumed with mark ✗.
    WrongHypothesis,
    NoRuleApplies,
    /// The server finished while the client still expects to communicate.
    PrematureServerEnd,
}

impl Failure {
    pub const ALL: [Failure; 3] = [Failure::WrongHypothesis, Failure::NoRuleApplies, Failure::PrematureServerEnd];

    pub fn name(self) -> &'static str {
        match self {
            Failure::WrongHypothesis => "WrongHypothesis",
            Failure::NoRuleApplies => "NoRuleApplies",
            Failure::PrematureServerEnd => "PrematureServerEnd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTree {
    pub goal: Judgment,
    /// `None` exactly on failure leaves.
    pub rule: Option<Rule>,
    pub children: Vec<DerivationTree>,
    pub failure: Option<Failure>,
}

impl DerivationTree {
    pub fn succeeded(&self) -> bool {
        self.first_failure().is_none()
    }

    /// The leftmost failure leaf.
    pub fn first_failure(&self) -> Option<&DerivationTree> {
        if self.failure.is_some() {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.first_failure())
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(DerivationTree::size).sum::<usize>()
    }

    pub fn nodes(&self) -> Vec<&DerivationTree> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let n = out[i];
            out.extend(n.children.iter());
            i += 1;
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let env: Vec<Value> = self
            .goal
            .env
            .entries()
            .iter()
            .map(|(s, m)| json!({"client": render(&s.client), "server": render(&s.server), "mark": m.as_str()}))
            .collect();
        let mut obj = Map::new();
        obj.insert(
            "goal".into(),
            json!({"env": env, "client": render(&self.goal.client), "server": render(&self.goal.server)}),
        );
        if let Some(r) = self.rule {
            obj.insert("rule".into(), r.name().into());
        }
        obj.insert("children".into(), self.children.iter().map(DerivationTree::to_json).collect());
        if let Some(f) = self.failure {
            obj.insert("failure".into(), f.name().into());
        }
        Value::Object(obj)
    }

    pub fn from_json(v: &Value) -> Result<DerivationTree, ImportError> {
        let text = |o: &Value, k: &str| -> Result<SessionBehaviour, ImportError> {
            let s = field(o, k)?.as_str().ok_or_else(|| ImportError::Type(k.to_string()))?;
            behaviour(s).map_err(|e| ImportError::Term(e.to_string()))
        };
        let goal = field(v, "goal")?;
        let mut env = Env::new();
        for a in field(goal, "env")?.as_array().ok_or_else(|| ImportError::Type("env".into()))? {
            let mark = match field(a, "mark")?.as_str() {
                Some("check") => Mark::Check,
                Some("cross") => Mark::Cross,
                _ => return Err(ImportError::Type("mark".into())),
            };
            env = env.push(Configuration::new(text(a, "client")?, text(a, "server")?), mark);
        }
        let rule = match v.get("rule") {
            None | Some(Value::Null) => None,
            Some(r) => Some(
                Rule::ALL
                    .into_iter()
                    .find(|x| Some(x.name()) == r.as_str())
                    .ok_or_else(|| ImportError::Type("rule".into()))?,
            ),
        };
        let failure = match v.get("failure") {
            None | Some(Value::Null) => None,
            Some(f) => Some(
                Failure::ALL
                    .into_iter()
                    .find(|x| Some(x.name()) == f.as_str())
                    .ok_or_else(|| ImportError::Type("failure".into()))?,
            ),
        };
        let children = match v.get("children") {
            None => Vec::new(),
            Some(c) => c
                .as_array()
                .ok_or_else(|| ImportError::Type("children".into()))?
                .iter()
                .map(DerivationTree::from_json)
                .collect::<Result<_, _>>()?,
        };
        Ok(DerivationTree {
            goal: Judgment { env, client: text(goal, "client")?, server: text(goal, "server")? },
            rule,
            children,
            failure,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImportError {
    #[error("missing field `{0}`")]
    Missing(String),
    #[error("field `{0}` has the wrong type or value")]
    Type(String),
    #[error("bad behaviour: {0}")]
    Term(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeriveOptions {
    /// Keep expanding premises after a failure.
    pub collect_all: bool,
    /// Cap on the number of tree nodes.
    pub limits: Limits,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions { collect_all: false, limits: Limits { max_nodes: 1_000_000 } }
    }
}

pub fn derive(client: &SessionBehaviour, server: &SessionBehaviour) -> Result<DerivationTree, Error> {
    derive_with(client, server, DeriveOptions::default())
}

pub fn derive_with(
    client: &SessionBehaviour,
    server: &SessionBehaviour,
    opts: DeriveOptions,
) -> Result<DerivationTree, Error> {
    let mut cx = Cx { opts, count: 0 };
    let (tree, _) = cx.go(Env::new(), client.clone(), server.clone())?;
    Ok(tree)
}

struct Cx {
    opts: DeriveOptions,
    count: usize,
}

impl Cx {
    /// Returns the tree and whether it contains a failure.
    fn go(&mut self, env: Env, client: SessionBehaviour, server: SessionBehaviour) -> Result<(DerivationTree, bool), Error> {
        self.count += 1;
        if self.count > self.opts.limits.max_nodes {
            return Err(Error::ResourceLimit { limit: self.opts.limits.max_nodes });
        }
        let stmt = Configuration::new(client.clone(), server.clone());
        let leaf = |env: Env, rule: Option<Rule>, failure: Option<Failure>| DerivationTree {
            goal: Judgment { env, client: client.clone(), server: server.clone() },
            rule,
            children: Vec::new(),
            failure,
        };

        if client.is_done() {
            return Ok((leaf(env, Some(Rule::Ax), None), false));
        }
        match env.lookup(&stmt) {
            Some(Mark::Check) => return Ok((leaf(env, Some(Rule::Hyp), None), false)),
            Some(Mark::Cross) => return Ok((leaf(env, None, Some(Failure::WrongHypothesis)), true)),
            None => {}
        }
        if let Some(next) = client.unfold() {
            return self.node(env.clone(), &client, &server, Rule::UnfL, vec![(env, next, server.clone())]);
        }
        if let Some(next) = server.unfold() {
            return self.node(env.clone(), &client, &server, Rule::UnfR, vec![(env, client.clone(), next)]);
        }

        let skipped = || env.push(stmt.clone(), Mark::Cross);
        let synced = || env.all_checked().push(stmt.clone(), Mark::Check);
        match (client.kind(), server.kind()) {
            (Kind::Ext(ks), Kind::Int(is)) => {
                let mut premises = Vec::new();
                for i in is.iter().filter(|i| find(ks, i).is_none()) {
                    premises.push((skipped(), client.clone(), i.cont.clone()));
                }
                for i in is {
                    if let Some(k) = find(ks, i) {
                        premises.push((synced(), k.cont.clone(), i.cont.clone()));
                    }
                }
                self.node(env.clone(), &client, &server, Rule::ExtInt, premises)
            }
            (Kind::Int(_), Kind::Int(is)) => {
                let premises = is.iter().map(|i| (skipped(), client.clone(), i.cont.clone())).collect();
                self.node(env.clone(), &client, &server, Rule::IntInt, premises)
            }
            (Kind::Int(ks), Kind::Ext(is)) => {
                let matched: Option<Vec<_>> = ks.iter().map(|k| find(is, k).map(|i| (k, i))).collect();
                match matched {
                    Some(pairs) => {
                        let premises = pairs
                            .into_iter()
                            .map(|(k, i)| (synced(), k.cont.clone(), i.cont.clone()))
                            .collect();
                        self.node(env.clone(), &client, &server, Rule::IntExt, premises)
                    }
                    None => Ok((leaf(env, None, Some(Failure::NoRuleApplies)), true)),
                }
            }
            (_, Kind::Done) => Ok((leaf(env, None, Some(Failure::PrematureServerEnd)), true)),
            _ => Ok((leaf(env, None, Some(Failure::NoRuleApplies)), true)),
        }
    }

    fn node(
        &mut self,
        env: Env,
        client: &SessionBehaviour,
        server: &SessionBehaviour,
        rule: Rule,
        premises: Vec<(Env, SessionBehaviour, SessionBehaviour)>,
    ) -> Result<(DerivationTree, bool), Error> {
        let mut children = Vec::with_capacity(premises.len());
        let mut failed = false;
        for (e, c, s) in premises {
            let (child, f) = self.go(e, c, s)?;
            children.push(child);
            failed |= f;
            if failed && !self.opts.collect_all {
                break;
            }
        }
        let tree = DerivationTree {
            goal: Judgment { env, client: client.clone(), server: server.clone() },
            rule: Some(rule),
            children,
            failure: None,
        };
        Ok((tree, failed))
    }
}

fn field<'a>(o: &'a Value, k: &str) -> Result<&'a Value, ImportError> {
    o.get(k).ok_or_else(|| ImportError::Missing(k.to_string()))
}

fn find<'a>(bs: &'a [Branch], b: &Branch) -> Option<&'a Branch> {
    bs.binary_search_by(|x| x.name.cmp(&b.name)).ok().map(|i| &bs[i])
}
