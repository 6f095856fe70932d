use std::collections::BTreeSet;
use std::fmt;

use super::{converge, NormalForm};
use crate::syntax::{ActionLabel, Polarity, SessionBehaviour};

pub const DEFAULT_TRACE_DEPTH: usize = 32;

/// A finite prefix of a trace. `complete` traces end at `1`; the others were
/// cut at the depth bound.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace {
    pub labels: Vec<ActionLabel>,
    pub complete: bool,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.labels.is_empty() {
            f.write_str("ε")?;
        }
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        if !self.complete {
            f.write_str(" (truncated)")?;
        }
        Ok(())
    }
}

/// Traces of `t` up to `depth` labels.
pub fn traces(t: &SessionBehaviour, depth: usize) -> BTreeSet<Trace> {
    let mut out = BTreeSet::new();
    walk(t, depth, &mut Vec::new(), &mut out);
    out
}

fn walk(t: &SessionBehaviour, depth: usize, prefix: &mut Vec<ActionLabel>, out: &mut BTreeSet<Trace>) {
    let (polarity, branches) = match converge(t) {
        NormalForm::Done => {
            out.insert(Trace { labels: prefix.clone(), complete: true });
            return;
        }
        NormalForm::ExtChoice(bs) => (Polarity::Input, bs),
        NormalForm::IntBranches(bs) => (Polarity::Output, bs),
    };
    if prefix.len() == depth {
        out.insert(Trace { labels: prefix.clone(), complete: false });
        return;
    }
    for b in branches {
        prefix.push(b.label(polarity));
        walk(&b.cont, depth, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviour;

    fn shown(t: &str, depth: usize) -> Vec<String> {
        traces(&behaviour(t).unwrap(), depth).iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn done_has_the_empty_trace() {
        assert_eq!(shown("1", 5), ["ε"]);
        assert_eq!(shown("1", 0), ["ε"]);
    }

    #[test]
    fn linear_trace() {
        assert_eq!(shown("!a.!b", 2), ["!a !b"]);
        assert_eq!(shown("!a.!b", 1), ["!a (truncated)"]);
    }

    #[test]
    fn recursive_internal_choice() {
        let mut got = shown("rec x.(!a.x (+) !b)", 2);
        got.sort();
        assert_eq!(got, ["!a !a (truncated)", "!a !b", "!b"]);
    }
}
