use petgraph::algo::is_cyclic_directed;
use petgraph::graph::DiGraph;

use super::graph::explore;
use super::StepLabel;
use crate::syntax::{ActionLabel, Kind, Polarity, SessionBehaviour};
use crate::Limits;

/// Whether a partner performing `action` is eventually answered by `server`,
/// when the partner discards every server output it is not waiting for.
///
/// For an input `a` the server must reach an output `!a` after finitely many
/// other outputs and without ever waiting for input. For an output `!a` the
/// server must have no infinite run of outputs, and every external choice it
/// stops at must accept `a`.
pub fn syncable(action: &ActionLabel, server: &SessionBehaviour) -> bool {
    let follow = |l: &StepLabel| match l {
        StepLabel::Act(l) => l.polarity == Polarity::Output,
        _ => true,
    };
    // A state space over the cap is reported as not syncable.
    let Ok(g) = explore(server, Limits::default(), follow) else {
        return false;
    };
    let wanted = ActionLabel::output(action.name.clone());

    match action.polarity {
        Polarity::Input => {
            let mut good = vec![false; g.nodes.len()];
            let mut out: Vec<Vec<(bool, usize)>> = vec![Vec::new(); g.nodes.len()];
            for (from, label, to) in &g.edges {
                out[*from].push((*label == StepLabel::Act(wanted.clone()), *to));
            }
            let mut changed = true;
            while changed {
                changed = false;
                for n in 0..g.nodes.len() {
                    if good[n] || out[n].is_empty() || matches!(g.nodes[n].kind(), Kind::Ext(_)) {
                        continue;
                    }
                    if out[n].iter().all(|&(hit, to)| hit || good[to]) {
                        good[n] = true;
                        changed = true;
                    }
                }
            }
            good[0]
        }
        Polarity::Output => {
            let mut pg = DiGraph::<(), ()>::new();
            let ids: Vec<_> = g.nodes.iter().map(|_| pg.add_node(())).collect();
            let mut has_out = vec![false; g.nodes.len()];
            for (from, _, to) in &g.edges {
                pg.add_edge(ids[*from], ids[*to], ());
                has_out[*from] = true;
            }
            if is_cyclic_directed(&pg) {
                return false;
            }
            g.nodes.iter().zip(&has_out).all(|(t, &moves)| {
                moves
                    || match t.kind() {
                        Kind::Ext(bs) => bs.iter().any(|b| b.name == action.name),
                        _ => false,
                    }
            })
        }
    }
}
