//! The skp-subbehaviour preorder, decided through duals.
//!
//! `σ ⪯ σ′` holds when every skp-compliant client of `σ` is also one of `σ′`.
//! The dual of `σ` is the least server of its own dual client, so it is
//! enough to check that client against `σ′`.

use std::collections::HashMap;

use serde_json::{json, Value};

use crate::compliance::check_skp_graph;
use crate::syntax::{render, ActionName, Polarity, SessionBehaviour};
use crate::{Error, Limits};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreorderResult {
    Sub,
    NotSub,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreorderVerdict {
    pub result: PreorderResult,
    /// On `NotSub`, a client compliant with the smaller side but not the larger.
    pub counterexample: Option<SessionBehaviour>,
}

impl PreorderVerdict {
    pub fn is_sub(&self) -> bool {
        self.result == PreorderResult::Sub
    }

    pub fn to_json(&self) -> Value {
        json!({
            "result": match self.result {
                PreorderResult::Sub => "sub",
                PreorderResult::NotSub => "notsub",
            },
            "counterexample": self.counterexample.as_ref().map(render),
        })
    }
}

/// Decides `sub ⪯ sup`.
pub fn subbehaviour(sub: &SessionBehaviour, sup: &SessionBehaviour, limits: Limits) -> Result<PreorderVerdict, Error> {
    let client = sub.dual();
    if check_skp_graph(&client, sup, limits)?.is_compliant() {
        Ok(PreorderVerdict { result: PreorderResult::Sub, counterexample: None })
    } else {
        Ok(PreorderVerdict { result: PreorderResult::NotSub, counterexample: Some(client) })
    }
}

/// The least server of `client` with respect to the preorder.
pub fn minimal_server(client: &SessionBehaviour) -> SessionBehaviour {
    client.dual()
}

/// Every recursion-free behaviour over `alphabet` of size at most `max_size`,
/// once each, smallest first. `1` has size 1 and a choice has size
/// `Σ (1 + size of continuation)`.
pub fn enumerate_clients(alphabet: &[ActionName], max_size: usize) -> impl Iterator<Item = SessionBehaviour> {
    let mut names = alphabet.to_vec();
    names.sort();
    names.dedup();
    let mut e = Enumerator { names, exact: HashMap::new(), runs: HashMap::new() };
    let all: Vec<_> = (1..=max_size).flat_map(|n| e.exact(n)).collect();
    all.into_iter()
}

struct Enumerator {
    names: Vec<ActionName>,
    exact: HashMap<usize, Vec<SessionBehaviour>>,
    /// Branch lists using names from index `from` on, of total size `n`.
    runs: HashMap<(usize, usize), Vec<Vec<(ActionName, SessionBehaviour)>>>,
}

impl Enumerator {
    fn exact(&mut self, n: usize) -> Vec<SessionBehaviour> {
        if let Some(v) = self.exact.get(&n) {
            return v.clone();
        }
        let out = if n == 0 {
            Vec::new()
        } else if n == 1 {
            vec![SessionBehaviour::done()]
        } else {
            let runs = self.runs(0, n);
            let mut out = Vec::with_capacity(2 * runs.len());
            for polarity in [Polarity::Input, Polarity::Output] {
                for r in &runs {
                    out.push(SessionBehaviour::choice(polarity, r.iter().cloned()).expect("distinct closed branches"));
                }
            }
            out
        };
        self.exact.insert(n, out.clone());
        out
    }

    fn runs(&mut self, from: usize, n: usize) -> Vec<Vec<(ActionName, SessionBehaviour)>> {
        if let Some(v) = self.runs.get(&(from, n)) {
            return v.clone();
        }
        let mut out = Vec::new();
        for i in from..self.names.len() {
            for s in 1..n {
                for cont in self.exact(s) {
                    let rest = n - 1 - s;
                    let head = (self.names[i].clone(), cont);
                    if rest == 0 {
                        out.push(vec![head]);
                    } else {
                        for tail in self.runs(i + 1, rest) {
                            let mut r = vec![head.clone()];
                            r.extend(tail);
                            out.push(r);
                        }
                    }
                }
            }
        }
        self.runs.insert((from, n), out.clone());
        out
    }
}
