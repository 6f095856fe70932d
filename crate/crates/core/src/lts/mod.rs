//! Transitions of a single behaviour.

mod graph;
mod syncable;
mod traces;

use std::fmt;

use crate::syntax::{ActionLabel, Branch, Kind, Polarity, SessionBehaviour};

pub use graph::{reachable, StateGraph};
pub use syncable::syncable;
pub use traces::{traces, Trace, DEFAULT_TRACE_DEPTH};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepLabel {
    Act(ActionLabel),
    /// Resolution of an internal choice.
    Oplus,
    /// Unfolding of `rec`.
    Rec,
}

impl StepLabel {
    pub fn is_silent(&self) -> bool {
        !matches!(self, StepLabel::Act(_))
    }
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepLabel::Act(l) if l.is_input() => write!(f, "in:{}", l.name),
            StepLabel::Act(l) => write!(f, "out:{}", l.name),
            StepLabel::Oplus => f.write_str("oplus"),
            StepLabel::Rec => f.write_str("rec"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BehaviourStep {
    pub label: StepLabel,
    pub target: SessionBehaviour,
}

/// All transitions of `t`.
///
/// A one-branch internal choice is a committed output and fires its label
/// directly; only choices with two or more branches take `oplus` steps.
pub fn step(t: &SessionBehaviour) -> Vec<BehaviourStep> {
    match t.kind() {
        Kind::Done => Vec::new(),
        Kind::Ext(bs) => bs
            .iter()
            .map(|b| BehaviourStep {
                label: StepLabel::Act(b.label(Polarity::Input)),
                target: b.cont.clone(),
            })
            .collect(),
        Kind::Int(bs) if bs.len() == 1 => vec![BehaviourStep {
            label: StepLabel::Act(bs[0].label(Polarity::Output)),
            target: bs[0].cont.clone(),
        }],
        Kind::Int(bs) => bs
            .iter()
            .map(|b| BehaviourStep {
                label: StepLabel::Oplus,
                target: SessionBehaviour::output(b.name.clone(), b.cont.clone()),
            })
            .collect(),
        Kind::Rec(_) => vec![BehaviourStep {
            label: StepLabel::Rec,
            target: t.unfold().expect("rec unfolds"),
        }],
        Kind::Var(_) => unreachable!("open term"),
    }
}

/// Where a behaviour ends up once every silent step has been taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalForm {
    Done,
    ExtChoice(Vec<Branch>),
    /// The output prefixes an internal choice may commit to.
    IntBranches(Vec<Branch>),
}

impl NormalForm {
    pub fn offers_input(&self, name: &str) -> bool {
        match self {
            NormalForm::ExtChoice(bs) => bs.iter().any(|b| b.name.as_str() == name),
            _ => false,
        }
    }
}

pub fn converge(t: &SessionBehaviour) -> NormalForm {
    let t = t.unfold_all();
    match t.kind() {
        Kind::Done => NormalForm::Done,
        Kind::Ext(bs) => NormalForm::ExtChoice(bs.clone()),
        Kind::Int(bs) => NormalForm::IntBranches(bs.clone()),
        Kind::Rec(_) | Kind::Var(_) => unreachable!("unfold_all removes leading recs"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviour;
    use crate::syntax::{gen_random, ActionName};
    use std::collections::HashSet;

    fn sb(s: &str) -> SessionBehaviour {
        behaviour(s).unwrap()
    }

    fn act(polarity: Polarity, n: &str) -> StepLabel {
        StepLabel::Act(ActionLabel {
            polarity,
            name: ActionName::new(n).unwrap(),
        })
    }

    fn steps(t: &str) -> HashSet<(StepLabel, SessionBehaviour)> {
        step(&sb(t)).into_iter().map(|s| (s.label, s.target)).collect()
    }

    #[test]
    fn external_choice_inputs() {
        let expected = HashSet::from([
            (act(Polarity::Input, "a"), sb("1")),
            (act(Polarity::Input, "b"), sb("1")),
        ]);
        assert_eq!(steps("a.1 + b.1"), expected);
    }

    #[test]
    fn rec_unfolds() {
        assert_eq!(
            steps("rec x.!a.x"),
            HashSet::from([(StepLabel::Rec, sb("!a.rec x.!a.x"))])
        );
    }

    #[test]
    fn internal_choice_commits_silently() {
        let expected = HashSet::from([(StepLabel::Oplus, sb("!a")), (StepLabel::Oplus, sb("!b"))]);
        assert_eq!(steps("!a.1 (+) !b.1"), expected);
        assert_eq!(steps("!a"), HashSet::from([(act(Polarity::Output, "a"), sb("1"))]));
        assert!(steps("1").is_empty());
    }

    #[test]
    fn convergence_examples() {
        assert_eq!(converge(&sb("1")), NormalForm::Done);
        let t = sb("rec x.(!a.x (+) !b)");
        match converge(&t) {
            NormalForm::IntBranches(bs) => {
                let got: Vec<_> = bs.iter().map(|b| (b.name.to_string(), b.cont.clone())).collect();
                assert_eq!(got, vec![("a".into(), t.clone()), ("b".into(), sb("1"))]);
            }
            other => panic!("{other:?}"),
        }
        let u = sb("rec x.(a.1 + b.x)");
        match converge(&u) {
            NormalForm::ExtChoice(bs) => {
                let got: Vec<_> = bs.iter().map(|b| (b.name.to_string(), b.cont.clone())).collect();
                assert_eq!(got, vec![("a".into(), sb("1")), ("b".into(), u.clone())]);
            }
            other => panic!("{other:?}"),
        }
    }

    /// States reachable by silent steps that have no further silent step.
    fn silent_sinks(t: &SessionBehaviour) -> HashSet<SessionBehaviour> {
        let mut out = HashSet::new();
        let mut stack = vec![t.clone()];
        let mut seen = HashSet::new();
        while let Some(s) = stack.pop() {
            if !seen.insert(s.clone()) {
                continue;
            }
            let silent: Vec<_> = step(&s).into_iter().filter(|x| x.label.is_silent()).collect();
            if silent.is_empty() {
                out.insert(s);
            }
            stack.extend(silent.into_iter().map(|x| x.target));
        }
        out
    }

    #[test]
    fn converge_agrees_with_silent_closure() {
        for seed in 0..10_000 {
            let t = gen_random(seed, 6, 4);
            let sinks = silent_sinks(&t);
            let expected: HashSet<SessionBehaviour> = match converge(&t) {
                NormalForm::Done => HashSet::from([SessionBehaviour::done()]),
                NormalForm::ExtChoice(bs) => HashSet::from([SessionBehaviour::choice(
                    Polarity::Input,
                    bs.into_iter().map(|b| (b.name, b.cont)),
                )
                .unwrap()]),
                NormalForm::IntBranches(bs) => bs
                    .into_iter()
                    .map(|b| SessionBehaviour::output(b.name, b.cont))
                    .collect(),
            };
            assert_eq!(sinks, expected, "seed {seed}: {t}");
        }
    }
}
