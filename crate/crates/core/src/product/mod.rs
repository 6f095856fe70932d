//! The client/server pair LTS and its finite graph.

mod embed;
mod lasso;
mod traces;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde_json::{json, Value};

use crate::lts::{converge, step, StepLabel};
use crate::syntax::{render, ActionLabel, ActionName, SessionBehaviour};
use crate::{Error, Limits};

pub use embed::seq_embed;
pub use lasso::{definitely_skp_cycle, stuck_nodes, Lasso};
pub use traces::{sync_traces, sync_traces_in, SyncAction, SyncTrace};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub client: SessionBehaviour,
    pub server: SessionBehaviour,
}

impl Configuration {
    pub fn new(client: SessionBehaviour, server: SessionBehaviour) -> Self {
        Configuration { client, server }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} || {}", self.client, self.server)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    SilentL(StepLabel),
    SilentR(StepLabel),
    /// A handshake; carries the client's half.
    Tau(ActionLabel),
    /// The client discards a server output it cannot accept.
    Skp(ActionName),
}

impl EdgeLabel {
    pub fn is_silent(&self) -> bool {
        matches!(self, EdgeLabel::SilentL(_) | EdgeLabel::SilentR(_))
    }

    pub fn is_skp(&self) -> bool {
        matches!(self, EdgeLabel::Skp(_))
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, EdgeLabel::Tau(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EdgeLabel::SilentL(_) => "silentL",
            EdgeLabel::SilentR(_) => "silentR",
            EdgeLabel::Tau(_) => "tau",
            EdgeLabel::Skp(_) => "skp",
        }
    }

    /// Inverse of the `kind`/`action` pair used in JSON exports.
    pub fn from_parts(kind: &str, action: &str) -> Option<EdgeLabel> {
        let step = |a: &str| match a {
            "oplus" => Some(StepLabel::Oplus),
            "rec" => Some(StepLabel::Rec),
            _ => None,
        };
        match kind {
            "silentL" => step(action).map(EdgeLabel::SilentL),
            "silentR" => step(action).map(EdgeLabel::SilentR),
            "tau" => {
                let (out, name) = match action.strip_prefix('!') {
                    Some(n) => (true, n),
                    None => (false, action),
                };
                let name = ActionName::new(name).ok()?;
                Some(EdgeLabel::Tau(if out {
                    ActionLabel::output(name)
                } else {
                    ActionLabel::input(name)
                }))
            }
            "skp" => ActionName::new(action).ok().map(EdgeLabel::Skp),
            _ => None,
        }
    }

    pub fn action(&self) -> String {
        match self {
            EdgeLabel::SilentL(s) | EdgeLabel::SilentR(s) => s.to_string(),
            EdgeLabel::Tau(l) => l.to_string(),
            EdgeLabel::Skp(n) => n.to_string(),
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Tau(l) => write!(f, "tau({l})"),
            EdgeLabel::Skp(n) => write!(f, "skp(!{n})"),
            EdgeLabel::SilentL(s) => write!(f, "silentL({s})"),
            EdgeLabel::SilentR(s) => write!(f, "silentR({s})"),
        }
    }
}

/// Whether the client can never input `name` before committing elsewhere.
fn cannot_input(client: &SessionBehaviour, name: &ActionName) -> bool {
    !converge(client).offers_input(name.as_str())
}

/// All moves of a configuration, including skips.
pub fn product_step(c: &Configuration) -> Vec<(EdgeLabel, Configuration)> {
    moves(c, true)
}

/// Moves without skips, the classical pair semantics.
pub fn product_step_strong(c: &Configuration) -> Vec<(EdgeLabel, Configuration)> {
    moves(c, false)
}

fn moves(c: &Configuration, with_skp: bool) -> Vec<(EdgeLabel, Configuration)> {
    let mut out = Vec::new();
    let server_steps = step(&c.server);
    for cs in step(&c.client) {
        match &cs.label {
            StepLabel::Act(l) => {
                let dual = StepLabel::Act(l.dual());
                for ss in server_steps.iter().filter(|s| s.label == dual) {
                    out.push((
                        EdgeLabel::Tau(l.clone()),
                        Configuration::new(cs.target.clone(), ss.target.clone()),
                    ));
                }
            }
            silent => out.push((
                EdgeLabel::SilentL(silent.clone()),
                Configuration::new(cs.target.clone(), c.server.clone()),
            )),
        }
    }
    for ss in server_steps {
        match &ss.label {
            StepLabel::Act(l) if l.is_input() => {}
            StepLabel::Act(l) => {
                if with_skp && cannot_input(&c.client, &l.name) {
                    out.push((
                        EdgeLabel::Skp(l.name.clone()),
                        Configuration::new(c.client.clone(), ss.target),
                    ));
                }
            }
            silent => out.push((
                EdgeLabel::SilentR(silent.clone()),
                Configuration::new(c.client.clone(), ss.target),
            )),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub label: EdgeLabel,
    pub to: usize,
}

/// Every configuration reachable from a root pair. Node 0 is the root;
/// nodes are numbered in breadth-first order.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    pub nodes: Vec<Configuration>,
    pub edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    pub with_skp: bool,
}

impl ProductGraph {
    pub fn root(&self) -> &Configuration {
        &self.nodes[0]
    }

    /// Indices into `edges` of the edges leaving `node`.
    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    pub fn is_stuck(&self, node: usize) -> bool {
        self.out[node].is_empty()
    }

    /// The client of `node` is `1` up to unfolding.
    pub fn client_finished(&self, node: usize) -> bool {
        self.nodes[node].client.unfold_all().is_done()
    }

    /// Shortest path of edge indices from `from` to `to`, using only edges
    /// accepted by `allow`.
    pub fn shortest_path(&self, from: usize, to: usize, allow: impl Fn(&Edge) -> bool) -> Option<Vec<usize>> {
        let mut pred: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(n) = queue.pop_front() {
            if n == to {
                let mut path = Vec::new();
                let mut at = to;
                while at != from {
                    let e = pred[at].expect("bfs predecessor");
                    path.push(e);
                    at = self.edges[e].from;
                }
                path.reverse();
                return Some(path);
            }
            for &e in &self.out[n] {
                let edge = &self.edges[e];
                if allow(edge) && !seen[edge.to] {
                    seen[edge.to] = true;
                    pred[edge.to] = Some(e);
                    queue.push_back(edge.to);
                }
            }
        }
        None
    }

    /// Breadth-first distance of every node from the root.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![usize::MAX; self.nodes.len()];
        depth[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(n) = queue.pop_front() {
            for &e in &self.out[n] {
                let to = self.edges[e].to;
                if depth[to] == usize::MAX {
                    depth[to] = depth[n] + 1;
                    queue.push_back(to);
                }
            }
        }
        depth
    }

    pub fn edge_json(&self, e: usize) -> Value {
        let edge = &self.edges[e];
        json!({
            "from": edge.from,
            "label": edge.label.kind(),
            "action": edge.label.action(),
            "to": edge.to,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "nodes": self.nodes.iter().enumerate()
                .map(|(id, c)| json!({"id": id, "client": render(&c.client), "server": render(&c.server)}))
                .collect::<Vec<_>>(),
            "edges": (0..self.edges.len()).map(|e| self.edge_json(e)).collect::<Vec<_>>(),
        })
    }
}

pub fn build_product_graph(
    client: &SessionBehaviour,
    server: &SessionBehaviour,
    limits: Limits,
) -> Result<ProductGraph, Error> {
    build(client, server, true, limits)
}

/// The product graph without skip edges.
pub fn build_strong_product_graph(
    client: &SessionBehaviour,
    server: &SessionBehaviour,
    limits: Limits,
) -> Result<ProductGraph, Error> {
    build(client, server, false, limits)
}

fn build(
    client: &SessionBehaviour,
    server: &SessionBehaviour,
    with_skp: bool,
    limits: Limits,
) -> Result<ProductGraph, Error> {
    let root = Configuration::new(client.clone(), server.clone());
    let mut index = HashMap::from([(root.clone(), 0usize)]);
    let mut g = ProductGraph {
        nodes: vec![root],
        edges: Vec::new(),
        out: vec![Vec::new()],
        with_skp,
    };
    let mut next = 0;
    while next < g.nodes.len() {
        let here = g.nodes[next].clone();
        for (label, target) in moves(&here, with_skp) {
            let to = match index.get(&target) {
                Some(&i) => i,
                None => {
                    if g.nodes.len() >= limits.max_nodes {
                        return Err(Error::ResourceLimit { limit: limits.max_nodes });
                    }
                    index.insert(target.clone(), g.nodes.len());
                    g.nodes.push(target);
                    g.out.push(Vec::new());
                    g.nodes.len() - 1
                }
            };
            g.out[next].push(g.edges.len());
            g.edges.push(Edge { from: next, label, to });
        }
        next += 1;
    }
    Ok(g)
}
