//! Compliance deciders: strong compliance, the graph oracle for
//! skp-compliance, and the marked-environment derivation system.

mod derive;
mod verdict;

use crate::product::{
    build_product_graph, build_strong_product_graph, definitely_skp_cycle, stuck_nodes, ProductGraph,
};
use crate::syntax::SessionBehaviour;
use crate::{Error, Limits};

pub use derive::{
    derive, derive_with, DeriveOptions, DerivationTree, Env, Failure, ImportError, Judgment, Mark, Rule,
};
pub use verdict::{Outcome, ReplayError, Stats, Verdict, Witness, WitnessKind, WitnessStep};

fn stats(g: &ProductGraph) -> Stats {
    Stats { nodes: g.nodes.len(), edges: g.edges.len(), rules: 0 }
}

/// Classical compliance: whenever the pair can no longer move, the client
/// has finished.
pub fn check_strong(client: &SessionBehaviour, server: &SessionBehaviour, limits: Limits) -> Result<Verdict, Error> {
    let g = build_strong_product_graph(client, server, limits)?;
    Ok(verdict_from_stuck(&g, None))
}

/// skp-compliance decided on the product graph: no reachable deadlock with
/// an unfinished client, and no reachable cycle that skips forever.
pub fn check_skp_graph(client: &SessionBehaviour, server: &SessionBehaviour, limits: Limits) -> Result<Verdict, Error> {
    let g = build_product_graph(client, server, limits)?;
    let lasso = definitely_skp_cycle(&g);
    Ok(verdict_from_stuck(&g, lasso))
}

/// Picks the counterexample closest to the root, preferring a deadlock on ties.
fn verdict_from_stuck(g: &ProductGraph, lasso: Option<crate::product::Lasso>) -> Verdict {
    let depth = g.depths();
    let stuck = stuck_nodes(g).into_iter().min_by_key(|&n| (depth[n], n));
    let witness = match (stuck, lasso) {
        (None, None) => None,
        (Some(n), Some(l)) if depth[n] > l.stem.len() => Some(Witness::lasso(g, l)),
        (Some(n), _) => Some(Witness::stuck(g, g.shortest_path(0, n, |_| true).expect("reachable"))),
        (None, Some(l)) => Some(Witness::lasso(g, l)),
    };
    Verdict {
        outcome: if witness.is_some() { Outcome::NonCompliant } else { Outcome::Compliant },
        witness,
        stats: stats(g),
    }
}
