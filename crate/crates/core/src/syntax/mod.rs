//! Contract syntax: names, raw and canonical behaviours, parsing, rendering
//! and random generation.

mod gen;
mod name;
mod parse;
mod raw;
mod render;
mod term;

pub use gen::{alphabet, gen_random, Generator};
pub use name::{ActionLabel, ActionName, InvalidName, Polarity};
pub use parse::{parse, SyntaxError};
pub use raw::{substitute, RawBehaviour};
pub use render::{render, render_raw};
pub use term::{validate, Branch, SessionBehaviour, ValidationError, View};

pub(crate) use term::Kind;

/// Dual of a behaviour.
pub fn dual(t: &SessionBehaviour) -> SessionBehaviour {
    t.dual()
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb_behaviour() -> impl Strategy<Value = SessionBehaviour> {
        (any::<u64>(), 1usize..=6, 1usize..=4).prop_map(|(s, d, k)| gen_random(s, d, k))
    }

    /// Reverses every choice and renames every binder.
    fn scramble(raw: &RawBehaviour) -> RawBehaviour {
        match raw {
            RawBehaviour::Done => RawBehaviour::Done,
            RawBehaviour::Var(x) => RawBehaviour::Var(format!("{x}_r")),
            RawBehaviour::Ext(bs) => {
                RawBehaviour::Ext(bs.iter().rev().map(|(n, c)| (n.clone(), scramble(c))).collect())
            }
            RawBehaviour::Int(bs) => {
                RawBehaviour::Int(bs.iter().rev().map(|(n, c)| (n.clone(), scramble(c))).collect())
            }
            RawBehaviour::Rec(x, b) => RawBehaviour::rec(format!("{x}_r"), scramble(b)),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn dual_is_an_involution(t in arb_behaviour()) {
            prop_assert_eq!(t.dual().dual(), t);
        }

        #[test]
        fn render_parse_round_trip(t in arb_behaviour()) {
            let text = render(&t);
            let back = validate(&parse(&text).unwrap()).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn canonical_under_permutation_and_renaming(t in arb_behaviour()) {
            prop_assert_eq!(validate(&scramble(&t.to_raw())).unwrap(), t);
        }
    }
}
