use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use super::{build_product_graph, ProductGraph};
use crate::syntax::SessionBehaviour;
use crate::{Error, Limits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SyncAction {
    Tau,
    Skp,
}

/// A synchronisation trace: visible handshakes and skips, ended by `✓` when
/// the client finished, or cut at the bound.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SyncTrace {
    pub actions: Vec<SyncAction>,
    pub tick: bool,
    pub truncated: bool,
}

impl fmt::Display for SyncTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<&str> = self
            .actions
            .iter()
            .map(|a| match a {
                SyncAction::Tau => "τ",
                SyncAction::Skp => "skp",
            })
            .collect();
        if self.tick {
            parts.push("✓");
        }
        if parts.is_empty() {
            parts.push("ε");
        }
        f.write_str(&parts.join(" "))?;
        if self.truncated {
            f.write_str(" (truncated)")?;
        }
        Ok(())
    }
}

/// Synchronisation traces of `client || server`, at most `bound` actions long.
///
/// A configuration whose client is syntactically `1` contributes `✓` even
/// when the server could still move. Otherwise every weak move `=>ξ` (silent
/// steps, one handshake or skip, silent steps) is followed, and a
/// configuration without any contributes the empty trace.
pub fn sync_traces(
    client: &SessionBehaviour,
    server: &SessionBehaviour,
    bound: usize,
) -> Result<BTreeSet<SyncTrace>, Error> {
    let g = build_product_graph(client, server, Limits::default())?;
    Ok(sync_traces_in(&g, bound))
}

pub fn sync_traces_in(g: &ProductGraph, bound: usize) -> BTreeSet<SyncTrace> {
    let closure: Vec<Vec<usize>> = (0..g.nodes.len()).map(|n| silent_closure(g, n)).collect();
    let mut memo = HashMap::new();
    let suffixes = walk(g, &closure, 0, bound, &mut memo);
    suffixes.iter().cloned().collect()
}

fn silent_closure(g: &ProductGraph, n: usize) -> Vec<usize> {
    let mut seen = vec![n];
    let mut i = 0;
    while i < seen.len() {
        for &e in g.out_edges(seen[i]) {
            let edge = &g.edges[e];
            if edge.label.is_silent() && !seen.contains(&edge.to) {
                seen.push(edge.to);
            }
        }
        i += 1;
    }
    seen
}

type Memo = HashMap<(usize, usize), Rc<BTreeSet<SyncTrace>>>;

fn walk(g: &ProductGraph, closure: &[Vec<usize>], n: usize, budget: usize, memo: &mut Memo) -> Rc<BTreeSet<SyncTrace>> {
    if let Some(hit) = memo.get(&(n, budget)) {
        return hit.clone();
    }
    let leaf = |tick, truncated| {
        Rc::new(BTreeSet::from([SyncTrace { actions: Vec::new(), tick, truncated }]))
    };
    let result = if g.nodes[n].client.is_done() {
        leaf(true, false)
    } else {
        let mut moves = BTreeSet::new();
        for &x in &closure[n] {
            for &e in g.out_edges(x) {
                let edge = &g.edges[e];
                let action = if edge.label.is_tau() {
                    SyncAction::Tau
                } else if edge.label.is_skp() {
                    SyncAction::Skp
                } else {
                    continue;
                };
                for &y in &closure[edge.to] {
                    moves.insert((action, y));
                }
            }
        }
        if moves.is_empty() {
            leaf(false, false)
        } else if budget == 0 {
            leaf(false, true)
        } else {
            let mut out = BTreeSet::new();
            for (action, y) in moves {
                for t in walk(g, closure, y, budget - 1, memo).iter() {
                    let mut actions = Vec::with_capacity(t.actions.len() + 1);
                    actions.push(action);
                    actions.extend_from_slice(&t.actions);
                    out.insert(SyncTrace { actions, ..*t });
                }
            }
            Rc::new(out)
        }
    };
    memo.insert((n, budget), result.clone());
    result
}
