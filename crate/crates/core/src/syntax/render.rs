use std::fmt::Write;

use super::raw::RawBehaviour;
use super::term::SessionBehaviour;

/// Concrete syntax for a behaviour; `parse` of the result validates back to
/// the same canonical term.
pub fn render(t: &SessionBehaviour) -> String {
    render_raw(&t.to_raw())
}

pub fn render_raw(raw: &RawBehaviour) -> String {
    let mut out = String::new();
    go(raw, true, &mut out);
    out
}

/// `tail` is true when nothing follows this subterm before the end of the
/// enclosing group, so a `rec` body may extend to the right unbracketed.
fn go(raw: &RawBehaviour, tail: bool, out: &mut String) {
    match raw {
        RawBehaviour::Done => out.push('1'),
        RawBehaviour::Var(x) => out.push_str(x),
        RawBehaviour::Ext(bs) | RawBehaviour::Int(bs) => {
            let output = matches!(raw, RawBehaviour::Int(_));
            for (i, (name, cont)) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(if output { " (+) " } else { " + " });
                }
                if output {
                    out.push('!');
                }
                out.push_str(name.as_str());
                if *cont != RawBehaviour::Done {
                    out.push('.');
                    continuation(cont, tail && i + 1 == bs.len(), out);
                }
            }
        }
        RawBehaviour::Rec(x, body) => {
            if !tail {
                out.push('(');
            }
            let _ = write!(out, "rec {x}.");
            if is_multi_choice(body) {
                out.push('(');
                go(body, true, out);
                out.push(')');
            } else {
                go(body, true, out);
            }
            if !tail {
                out.push(')');
            }
        }
    }
}

fn continuation(cont: &RawBehaviour, tail: bool, out: &mut String) {
    if is_multi_choice(cont) {
        out.push('(');
        go(cont, true, out);
        out.push(')');
    } else {
        go(cont, tail, out);
    }
}

fn is_multi_choice(raw: &RawBehaviour) -> bool {
    matches!(raw, RawBehaviour::Ext(bs) | RawBehaviour::Int(bs) if bs.len() > 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, validate};

    fn round(src: &str) -> String {
        render(&validate(&parse(src).unwrap()).unwrap())
    }

    #[test]
    fn renders_basic_shapes() {
        assert_eq!(round("1"), "1");
        assert_eq!(round("b.1 + a"), "a + b");
        assert_eq!(round("!a.(b + c)"), "!a.(b + c)");
        assert_eq!(round("rec y.(!b (+) !a.y)"), "rec x.(!a.x (+) !b)");
        assert_eq!(
            render(&validate(&parse("a + b").unwrap()).unwrap().dual()),
            "!a (+) !b"
        );
    }

    #[test]
    fn rec_in_non_tail_position_is_bracketed() {
        let src = "a.rec x.b.x + c";
        let t = validate(&parse("a.(rec x.b.x) + c").unwrap()).unwrap();
        let text = render(&t);
        assert_eq!(text, "a.(rec x.b.x) + c");
        assert_ne!(validate(&parse(src).unwrap()).unwrap(), t);
        assert_eq!(validate(&parse(&text).unwrap()).unwrap(), t);
    }

    #[test]
    fn variable_names_avoid_action_names() {
        let text = round("rec q.(x.q + y.!z.rec r.!x.r)");
        let t = validate(&parse(&text).unwrap()).unwrap();
        assert_eq!(t, validate(&parse("rec q.(x.q + y.!z.rec r.!x.r)").unwrap()).unwrap());
        assert!(text.starts_with("rec w."), "{text}");
    }
}
