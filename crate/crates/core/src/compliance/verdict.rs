use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::product::{product_step, product_step_strong, Configuration, EdgeLabel, Lasso, ProductGraph};
use crate::syntax::render;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Compliant,
    NonCompliant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// A path to a configuration with no moves and an unfinished client.
    StuckTrace,
    /// A path to a cycle of silent moves and skips containing a skip.
    SkpLasso,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessStep {
    pub from: usize,
    pub label: EdgeLabel,
    pub to: usize,
}

/// A counterexample to compliance, replayable from the root pair. Node ids
/// refer to the product graph it was extracted from; `nodes` holds every
/// configuration the steps mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub kind: WitnessKind,
    pub stem: Vec<WitnessStep>,
    /// Empty for a stuck trace.
    pub cycle: Vec<WitnessStep>,
    pub nodes: BTreeMap<usize, Configuration>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes: usize,
    pub edges: usize,
    pub rules: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    pub stats: Stats,
}

impl Verdict {
    pub fn is_compliant(&self) -> bool {
        self.outcome == Outcome::Compliant
    }

    pub fn to_json(&self) -> Value {
        json!({
            "result": match self.outcome {
                Outcome::Compliant => "compliant",
                Outcome::NonCompliant => "noncompliant",
            },
            "witness": self.witness.as_ref().map(Witness::to_json),
            "stats": {"nodes": self.stats.nodes, "edges": self.stats.edges, "rules": self.stats.rules},
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("witness does not start at the root pair")]
    WrongRoot,
    #[error("step {index} ({label}) is not a move of {from}")]
    NoSuchMove { index: usize, label: String, from: String },
    #[error("final configuration {0} is not stuck")]
    NotStuck(String),
    #[error("final configuration {0} has a finished client")]
    ClientFinished(String),
    #[error("cycle is empty or does not return to its start")]
    OpenCycle,
    #[error("cycle contains a handshake")]
    HandshakeInCycle,
    #[error("cycle contains no skip")]
    NoSkipInCycle,
    #[error("witness refers to unknown node {0}")]
    UnknownNode(usize),
}

fn step_json(s: &WitnessStep) -> Value {
    json!({"from": s.from, "label": s.label.kind(), "action": s.label.action(), "to": s.to})
}

impl Witness {
    pub(crate) fn stuck(g: &ProductGraph, path: Vec<usize>) -> Witness {
        Witness::from_edges(g, WitnessKind::StuckTrace, path, Vec::new())
    }

    pub(crate) fn lasso(g: &ProductGraph, lasso: Lasso) -> Witness {
        Witness::from_edges(g, WitnessKind::SkpLasso, lasso.stem, lasso.cycle)
    }

    fn from_edges(g: &ProductGraph, kind: WitnessKind, stem: Vec<usize>, cycle: Vec<usize>) -> Witness {
        let mut nodes = BTreeMap::from([(0, g.nodes[0].clone())]);
        let mut conv = |ids: Vec<usize>| -> Vec<WitnessStep> {
            ids.into_iter()
                .map(|e| {
                    let edge = &g.edges[e];
                    nodes.insert(edge.from, g.nodes[edge.from].clone());
                    nodes.insert(edge.to, g.nodes[edge.to].clone());
                    WitnessStep { from: edge.from, label: edge.label.clone(), to: edge.to }
                })
                .collect()
        };
        let stem = conv(stem);
        let cycle = conv(cycle);
        Witness { kind, stem, cycle, nodes }
    }

    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .map(|(id, c)| json!({"id": id, "client": render(&c.client), "server": render(&c.server)}))
            .collect();
        match self.kind {
            WitnessKind::StuckTrace => json!({
                "kind": "stuck",
                "path": self.stem.iter().map(step_json).collect::<Vec<_>>(),
                "nodes": nodes,
            }),
            WitnessKind::SkpLasso => json!({
                "kind": "lasso",
                "stem": self.stem.iter().map(step_json).collect::<Vec<_>>(),
                "cycle": self.cycle.iter().map(step_json).collect::<Vec<_>>(),
                "nodes": nodes,
            }),
        }
    }

    /// Visible labels along the witness: `τ` and `skp`.
    pub fn visible(&self) -> Vec<&'static str> {
        self.stem
            .iter()
            .chain(&self.cycle)
            .filter_map(|s| match s.label {
                EdgeLabel::Tau(_) => Some("τ"),
                EdgeLabel::Skp(_) => Some("skp"),
                _ => None,
            })
            .collect()
    }

    /// Re-executes the witness from `root` with the pair semantics (with or
    /// without skips), independently of the graph it came from.
    pub fn replay(&self, root: &Configuration, with_skp: bool) -> Result<(), ReplayError> {
        let moves = |c: &Configuration| if with_skp { product_step(c) } else { product_step_strong(c) };
        let node = |id: usize| self.nodes.get(&id).ok_or(ReplayError::UnknownNode(id));

        let follow = |start: &Configuration, steps: &[WitnessStep], offset: usize| -> Result<Configuration, ReplayError> {
            let mut here = start.clone();
            for (i, s) in steps.iter().enumerate() {
                if *node(s.from)? != here {
                    return Err(ReplayError::NoSuchMove {
                        index: offset + i,
                        label: s.label.to_string(),
                        from: here.to_string(),
                    });
                }
                let target = node(s.to)?;
                if !moves(&here).iter().any(|(l, t)| *l == s.label && t == target) {
                    return Err(ReplayError::NoSuchMove {
                        index: offset + i,
                        label: s.label.to_string(),
                        from: here.to_string(),
                    });
                }
                here = target.clone();
            }
            Ok(here)
        };

        if self.nodes.get(&0) != Some(root) {
            return Err(ReplayError::WrongRoot);
        }
        let end = follow(root, &self.stem, 0)?;
        match self.kind {
            WitnessKind::StuckTrace => {
                if end.client.is_done() {
                    return Err(ReplayError::ClientFinished(end.to_string()));
                }
                if !moves(&end).is_empty() {
                    return Err(ReplayError::NotStuck(end.to_string()));
                }
            }
            WitnessKind::SkpLasso => {
                if self.cycle.is_empty() {
                    return Err(ReplayError::OpenCycle);
                }
                let back = follow(&end, &self.cycle, self.stem.len())?;
                if back != end {
                    return Err(ReplayError::OpenCycle);
                }
                if self.cycle.iter().any(|s| s.label.is_tau()) {
                    return Err(ReplayError::HandshakeInCycle);
                }
                if !self.cycle.iter().any(|s| s.label.is_skp()) {
                    return Err(ReplayError::NoSkipInCycle);
                }
                for s in &self.cycle {
                    let c = node(s.from)?;
                    if c.client.is_done() {
                        return Err(ReplayError::ClientFinished(c.to_string()));
                    }
                }
            }
        }
        Ok(())
    }
}
