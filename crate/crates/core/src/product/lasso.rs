use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde_json::{json, Value};

use super::ProductGraph;

/// A path from the root followed by a cycle back to the cycle's first node.
/// Both are lists of edge indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Lasso {
    pub fn to_json(&self, g: &ProductGraph) -> Value {
        json!({
            "stem": self.stem.iter().map(|&e| g.edge_json(e)).collect::<Vec<_>>(),
            "cycle": self.cycle.iter().map(|&e| g.edge_json(e)).collect::<Vec<_>>(),
        })
    }
}

/// Reachable configurations with no move whose client has not finished.
pub fn stuck_nodes(g: &ProductGraph) -> Vec<usize> {
    (0..g.nodes.len())
        .filter(|&n| g.is_stuck(n) && !g.nodes[n].client.is_done())
        .collect()
}

/// A reachable cycle of silent and skip moves with at least one skip, along
/// which the client is never `1`, not even up to unfolding. Among all such cycles the one entered
/// closest to the root is returned.
pub fn definitely_skp_cycle(g: &ProductGraph) -> Option<Lasso> {
    let live = |n: usize| !g.client_finished(n);
    let usable = |e: &super::Edge| (e.label.is_silent() || e.label.is_skp()) && live(e.from) && live(e.to);

    let mut pg = DiGraph::<(), usize>::new();
    let ids: Vec<_> = g.nodes.iter().map(|_| pg.add_node(())).collect();
    for (i, e) in g.edges.iter().enumerate() {
        if usable(e) {
            pg.add_edge(ids[e.from], ids[e.to], i);
        }
    }
    let mut component = vec![usize::MAX; g.nodes.len()];
    for (c, scc) in tarjan_scc(&pg).into_iter().enumerate() {
        for n in scc {
            component[n.index()] = c;
        }
    }

    let depth = g.depths();
    let entry = g
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.label.is_skp() && usable(e) && component[e.from] == component[e.to])
        .min_by_key(|(i, e)| (depth[e.from], *i))?;
    let (skip, e) = entry;
    let c = component[e.from];

    let stem = g.shortest_path(0, e.from, |_| true).expect("node is reachable");
    let mut cycle = vec![skip];
    cycle.extend(
        g.shortest_path(e.to, e.from, |x| usable(x) && component[x.from] == c && component[x.to] == c)
            .expect("strongly connected"),
    );
    debug_assert!(
        cycle.iter().any(|&i| g.edges[i].label.is_skp()),
        "silent-only cycle"
    );
    Some(Lasso { stem, cycle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviour;
    use crate::product::{build_product_graph, build_strong_product_graph};
    use crate::Limits;

    fn graph(c: &str, s: &str) -> ProductGraph {
        build_product_graph(&behaviour(c).unwrap(), &behaviour(s).unwrap(), Limits::default()).unwrap()
    }

    #[test]
    fn skipping_forever_is_found() {
        let g = graph("b", "rec x.(!a.x (+) !b)");
        let lasso = definitely_skp_cycle(&g).unwrap();
        let cycle_kinds: Vec<_> = lasso.cycle.iter().map(|&e| g.edges[e].label.kind()).collect();
        assert_eq!(cycle_kinds.iter().filter(|k| **k == "skp").count(), 1);
        assert!(!cycle_kinds.contains(&"tau"));
        let first = g.edges[lasso.cycle[0]].from;
        assert_eq!(g.edges[*lasso.cycle.last().unwrap()].to, first);
        assert_eq!(g.nodes[first].server, behaviour("!a.rec x.(!a.x (+) !b)").unwrap());
        let stem_end = lasso.stem.last().map_or(0, |&e| g.edges[e].to);
        assert_eq!(stem_end, first);
    }

    #[test]
    fn cycles_through_a_handshake_are_fine() {
        let g = graph("rec x.b.x", "rec x.!a.!a.!b.x");
        assert!(definitely_skp_cycle(&g).is_none());
        assert!(stuck_nodes(&g).is_empty());
    }

    #[test]
    fn no_skips_no_lasso() {
        let g = build_strong_product_graph(
            &behaviour("rec x.b.x").unwrap(),
            &behaviour("rec x.!a.!a.!b.x").unwrap(),
            Limits::default(),
        )
        .unwrap();
        assert!(g.edges.iter().all(|e| !e.label.is_skp()));
        assert!(definitely_skp_cycle(&g).is_none());
    }

    #[test]
    fn finished_client_ignores_skips() {
        let g = graph("1", "rec x.!a.x");
        assert!(definitely_skp_cycle(&g).is_none());
        assert!(stuck_nodes(&g).is_empty());
    }

    #[test]
    fn stuck_after_skip() {
        let g = graph("a", "!b");
        assert_eq!(stuck_nodes(&g), vec![1]);
    }
}
