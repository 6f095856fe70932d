use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde_json::{json, Value};
use skp_core::preorder::subbehaviour;
use skp_core::syntax::SessionBehaviour;
use skp_core::{Error, Limits};

/// Pairwise subbehaviour edges between stored contracts: `(i, j)` means the
/// contract of `i` is below the contract of `j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PreorderIndex {
    ids: BTreeSet<u64>,
    edges: BTreeSet<(u64, u64)>,
}

impl PreorderIndex {
    /// Adds `id` and checks it against every contract already present, in
    /// both directions.
    pub fn insert<'a>(
        &mut self,
        id: u64,
        contract: &SessionBehaviour,
        others: impl IntoIterator<Item = (u64, &'a SessionBehaviour)>,
        limits: Limits,
    ) -> Result<(), Error> {
        let mut edges = vec![(id, id)];
        for (j, other) in others {
            if j == id {
                continue;
            }
            if subbehaviour(other, contract, limits)?.is_sub() {
                edges.push((j, id));
            }
            if subbehaviour(contract, other, limits)?.is_sub() {
                edges.push((id, j));
            }
        }
        self.ids.insert(id);
        self.edges.extend(edges);
        Ok(())
    }

    pub fn remove(&mut self, id: u64) {
        self.ids.remove(&id);
        self.edges.retain(|&(i, j)| i != id && j != id);
    }

    pub fn ids(&self) -> &BTreeSet<u64> {
        &self.ids
    }

    pub fn edges(&self) -> &BTreeSet<(u64, u64)> {
        &self.edges
    }

    pub fn has_edge(&self, i: u64, j: u64) -> bool {
        self.edges.contains(&(i, j))
    }

    /// Pairs `(i, k)` missing although `(i, j)` and `(j, k)` are present.
    pub fn closure_gaps(&self) -> Vec<(u64, u64, u64)> {
        let mut succ: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &(i, j) in &self.edges {
            succ.entry(i).or_default().push(j);
        }
        let mut gaps = Vec::new();
        for &(i, j) in &self.edges {
            for &k in succ.get(&j).into_iter().flatten() {
                if !self.edges.contains(&(i, k)) {
                    gaps.push((i, j, k));
                }
            }
        }
        gaps
    }

    /// Strongly connected groups of ids, each sorted, ordered by the length
    /// of the longest chain of classes below them and then by smallest id.
    pub fn classes(&self) -> Vec<Vec<u64>> {
        let mut g = DiGraph::<u64, ()>::new();
        let nodes: BTreeMap<u64, _> = self.ids.iter().map(|&id| (id, g.add_node(id))).collect();
        for &(i, j) in &self.edges {
            if i != j {
                g.add_edge(nodes[&i], nodes[&j], ());
            }
        }
        // Tarjan yields sinks first, so reversing gives sources first.
        let classes: Vec<Vec<u64>> = tarjan_scc(&g)
            .into_iter()
            .rev()
            .map(|scc| {
                let mut ids: Vec<u64> = scc.into_iter().map(|n| g[n]).collect();
                ids.sort_unstable();
                ids
            })
            .collect();
        let class_of = class_map(&classes);
        let mut height = vec![0usize; classes.len()];
        for (k, class) in classes.iter().enumerate() {
            for &(i, j) in &self.edges {
                if class.contains(&j) && class_of[&i] != k {
                    height[k] = height[k].max(height[class_of[&i]] + 1);
                }
            }
        }
        let mut keyed: Vec<_> = classes.into_iter().zip(height).collect();
        keyed.sort_by_key(|(c, h)| (*h, c[0]));
        keyed.into_iter().map(|(c, _)| c).collect()
    }

    /// Ids with no incoming edge from outside their own class.
    pub fn minimal(&self) -> Vec<u64> {
        let class_of = class_map(&self.classes());
        let mut out: Vec<u64> = self
            .ids
            .iter()
            .copied()
            .filter(|&j| !self.edges.iter().any(|&(i, k)| k == j && class_of[&i] != class_of[&j]))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ids": self.ids.iter().collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
            "minimal": self.minimal(),
        })
    }
}

pub(crate) fn class_map(classes: &[Vec<u64>]) -> BTreeMap<u64, usize> {
    classes.iter().enumerate().flat_map(|(k, ids)| ids.iter().map(move |&i| (i, k))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use skp_core::behaviour;

    fn build(contracts: &[&str]) -> PreorderIndex {
        let parsed: Vec<_> = contracts.iter().map(|c| behaviour(c).unwrap()).collect();
        let mut ix = PreorderIndex::default();
        for (k, c) in parsed.iter().enumerate() {
            let others = parsed[..k].iter().enumerate().map(|(j, o)| (j as u64 + 1, o));
            ix.insert(k as u64 + 1, c, others, Limits::default()).unwrap();
        }
        ix
    }

    #[test]
    fn single_record_is_reflexive() {
        let ix = build(&["!a"]);
        assert_eq!(ix.edges().iter().copied().collect::<Vec<_>>(), vec![(1, 1)]);
        assert_eq!(ix.minimal(), vec![1]);
    }

    #[test]
    fn skipped_prefix_sits_above() {
        let ix = build(&["a", "!c.a", "!b"]);
        assert!(ix.has_edge(1, 2) && !ix.has_edge(2, 1));
        assert_eq!(ix.minimal(), vec![1, 3]);
    }

    #[test]
    fn equivalent_contracts_share_a_class() {
        // Both serve exactly the clients `1` and `!a`.
        let ix = build(&["a", "rec x.a", "!b"]);
        assert!(ix.has_edge(1, 2) && ix.has_edge(2, 1));
        assert!(ix.classes().contains(&vec![1, 2]));
        assert_eq!(ix.minimal(), vec![1, 2, 3]);
    }

    #[test]
    fn removal_drops_edges() {
        let mut ix = build(&["a", "!c.a"]);
        ix.remove(1);
        assert!(ix.edges().iter().all(|&(i, j)| i != 1 && j != 1));
        assert_eq!(ix.ids().len(), 1);
    }

    #[test]
    fn classes_are_topological() {
        let ix = build(&["!a.!c (+) !b", "!b", "!a.!b", "a", "!c.a"]);
        let classes = ix.classes();
        let pos = |id: u64| classes.iter().position(|c| c.contains(&id)).unwrap();
        for &(i, j) in ix.edges() {
            assert!(pos(i) <= pos(j), "{i} -> {j} in {classes:?}");
        }
    }
}
