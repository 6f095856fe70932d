use std::collections::HashMap;

use petgraph::algo::is_cyclic_directed;
use petgraph::graph::DiGraph;
use serde_json::{json, Value};

use super::{step, StepLabel};
use crate::syntax::{render, SessionBehaviour};
use crate::{Error, Limits};

/// The finite transition graph of a behaviour. Node 0 is the initial state.
#[derive(Debug, Clone)]
pub struct StateGraph {
    pub nodes: Vec<SessionBehaviour>,
    pub edges: Vec<(usize, StepLabel, usize)>,
}

impl StateGraph {
    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = &(usize, StepLabel, usize)> {
        self.edges.iter().filter(move |e| e.0 == node)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "nodes": self.nodes.iter().enumerate()
                .map(|(id, t)| json!({"id": id, "term": render(t)}))
                .collect::<Vec<_>>(),
            "edges": self.edges.iter()
                .map(|(from, label, to)| json!({"from": from, "label": label.to_string(), "to": to}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Breadth-first expansion of `root`, following only the steps `follow` accepts.
pub(crate) fn explore(
    root: &SessionBehaviour,
    limits: Limits,
    follow: impl Fn(&StepLabel) -> bool,
) -> Result<StateGraph, Error> {
    let mut index: HashMap<SessionBehaviour, usize> = HashMap::from([(root.clone(), 0)]);
    let mut g = StateGraph {
        nodes: vec![root.clone()],
        edges: Vec::new(),
    };
    let mut next = 0;
    while next < g.nodes.len() {
        let here = g.nodes[next].clone();
        for s in step(&here) {
            if !follow(&s.label) {
                continue;
            }
            let to = match index.get(&s.target) {
                Some(&i) => i,
                None => {
                    if g.nodes.len() >= limits.max_nodes {
                        return Err(Error::ResourceLimit { limit: limits.max_nodes });
                    }
                    index.insert(s.target.clone(), g.nodes.len());
                    g.nodes.push(s.target);
                    g.nodes.len() - 1
                }
            };
            g.edges.push((next, s.label, to));
        }
        next += 1;
    }
    debug_assert!(!has_silent_cycle(&g), "silent cycle in a guarded behaviour");
    Ok(g)
}

fn has_silent_cycle(g: &StateGraph) -> bool {
    let mut pg = DiGraph::<(), ()>::new();
    let ids: Vec<_> = g.nodes.iter().map(|_| pg.add_node(())).collect();
    for (from, label, to) in &g.edges {
        if label.is_silent() {
            pg.add_edge(ids[*from], ids[*to], ());
        }
    }
    is_cyclic_directed(&pg)
}

/// Every state reachable from `t`, deduplicated up to canonical equality.
pub fn reachable(t: &SessionBehaviour, limits: Limits) -> Result<StateGraph, Error> {
    explore(t, limits, |_| true)
}
