//! Hand-written lexer and recursive-descent parser for the contract language.
//!
//! ```text
//! B    ::= "1" | EXT | INT | PRE | "rec" IDENT "." B | IDENT | "(" B ")"
//! PRE  ::= IDENT "." C | IDENT | "!" IDENT "." C | "!" IDENT
//! EXT  ::= input-PRE ("+" input-PRE)+
//! INT  ::= output-PRE ("(+)" output-PRE)+
//! C    ::= "1" | PRE | "rec" IDENT "." B | IDENT | "(" B ")"
//! ```
//!
//! A lone identifier is a recursion variable when an enclosing `rec` binds
//! it and an input prefix `a.1` otherwise. The body of `rec` extends as far
//! to the right as possible.

use std::fmt;

use thiserror::Error;

use super::name::{is_ident_continue, is_ident_start, ActionName};
use super::raw::RawBehaviour;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    One,
    Rec,
    Ident(String),
    Bang,
    Dot,
    Plus,
    OPlus,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::One => f.write_str("`1`"),
            Tok::Rec => f.write_str("`rec`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::OPlus => f.write_str("`(+)`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);

    // Advances over `n` characters, keeping line/column in sync.
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        let (tok, len) = match c {
            '1' => {
                if chars.get(i + 1).is_some_and(|&d| is_ident_continue(d)) {
                    return Err(err(pos, "unexpected character after `1`"));
                }
                (Tok::One, 1)
            }
            '!' => (Tok::Bang, 1),
            '.' => (Tok::Dot, 1),
            '+' => (Tok::Plus, 1),
            '⊕' => (Tok::OPlus, 1),
            ')' => (Tok::RParen, 1),
            '(' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_whitespace() {
                    j += 1;
                }
                if chars.get(j) == Some(&'+') {
                    let mut k = j + 1;
                    while k < chars.len() && chars[k].is_whitespace() {
                        k += 1;
                    }
                    if chars.get(k) == Some(&')') {
                        (Tok::OPlus, k + 1 - i)
                    } else {
                        (Tok::LParen, 1)
                    }
                } else {
                    (Tok::LParen, 1)
                }
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_continue(chars[j]) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = if word == "rec" { Tok::Rec } else { Tok::Ident(word) };
                (tok, j - i)
            }
            other => return Err(err(pos, &format!("unexpected character `{other}`"))),
        };
        out.push((tok, pos));
        advance(&mut i, &mut line, &mut col, len);
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

fn err(pos: Pos, message: &str) -> SyntaxError {
    SyntaxError {
        line: pos.line,
        column: pos.column,
        message: message.to_string(),
    }
}

/// A parsed operand, remembering whether it was written as a prefix so that
/// choices can reject anything else as a branch.
enum Operand {
    Prefix { output: bool, name: ActionName, cont: RawBehaviour },
    BareIdent(String),
    Other(RawBehaviour),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    binders: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {want}")))
        }
    }

    fn unexpected(&self, what: &str) -> SyntaxError {
        err(self.pos(), &format!("{what}, found {}", self.peek()))
    }

    fn ident(&mut self) -> Result<(String, Pos), SyntaxError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(s) => Ok((s, pos)),
            _ => {
                self.at -= 1;
                Err(self.unexpected("expected an identifier"))
            }
        }
    }

    fn behaviour(&mut self) -> Result<RawBehaviour, SyntaxError> {
        let first_pos = self.pos();
        let first = self.operand()?;
        let kind = match self.peek() {
            Tok::Plus => false,
            Tok::OPlus => true,
            _ => return Ok(self.close(first)),
        };
        let mut branches = vec![branch(first, kind, first_pos)?];
        loop {
            match self.peek() {
                Tok::Plus if !kind => {}
                Tok::OPlus if kind => {}
                Tok::Plus | Tok::OPlus => {
                    return Err(err(
                        self.pos(),
                        "internal and external choice cannot be mixed without parentheses",
                    ))
                }
                _ => break,
            }
            self.bump();
            let pos = self.pos();
            let op = self.operand()?;
            branches.push(branch(op, kind, pos)?);
        }
        Ok(if kind {
            RawBehaviour::Int(branches)
        } else {
            RawBehaviour::Ext(branches)
        })
    }

    /// Resolves an operand that stands alone.
    fn close(&self, op: Operand) -> RawBehaviour {
        match op {
            Operand::Prefix { output: false, name, cont } => RawBehaviour::input(name, cont),
            Operand::Prefix { output: true, name, cont } => RawBehaviour::output(name, cont),
            Operand::BareIdent(x) if self.binders.contains(&x) => RawBehaviour::Var(x),
            Operand::BareIdent(x) => {
                RawBehaviour::input(ActionName::new(&x).expect("lexed identifier"), RawBehaviour::Done)
            }
            Operand::Other(raw) => raw,
        }
    }

    fn operand(&mut self) -> Result<Operand, SyntaxError> {
        match self.peek().clone() {
            Tok::One => {
                self.bump();
                Ok(Operand::Other(RawBehaviour::Done))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.behaviour()?;
                self.expect(Tok::RParen)?;
                Ok(Operand::Other(inner))
            }
            Tok::Rec => {
                self.bump();
                let (x, _) = self.ident()?;
                self.expect(Tok::Dot)?;
                self.binders.push(x.clone());
                let body = self.behaviour();
                self.binders.pop();
                Ok(Operand::Other(RawBehaviour::rec(x, body?)))
            }
            Tok::Bang => {
                self.bump();
                let (x, pos) = self.ident()?;
                let name = action(&x, pos)?;
                let cont = self.continuation()?;
                Ok(Operand::Prefix { output: true, name, cont })
            }
            Tok::Ident(x) => {
                let pos = self.pos();
                self.bump();
                if *self.peek() == Tok::Dot {
                    let name = action(&x, pos)?;
                    self.bump();
                    let cont = self.operand()?;
                    Ok(Operand::Prefix { output: false, name, cont: self.close(cont) })
                } else {
                    Ok(Operand::BareIdent(x))
                }
            }
            _ => Err(self.unexpected("expected a behaviour")),
        }
    }

    fn continuation(&mut self) -> Result<RawBehaviour, SyntaxError> {
        if *self.peek() == Tok::Dot {
            self.bump();
            let op = self.operand()?;
            Ok(self.close(op))
        } else {
            Ok(RawBehaviour::Done)
        }
    }
}

fn action(x: &str, pos: Pos) -> Result<ActionName, SyntaxError> {
    ActionName::new(x).map_err(|e| err(pos, &e.to_string()))
}

fn branch(op: Operand, output: bool, pos: Pos) -> Result<(ActionName, RawBehaviour), SyntaxError> {
    match op {
        Operand::Prefix { output: o, name, cont } if o == output => Ok((name, cont)),
        Operand::BareIdent(x) if !output => Ok((action(&x, pos)?, RawBehaviour::Done)),
        Operand::Prefix { .. } | Operand::BareIdent(_) => Err(err(
            pos,
            "internal and external choice cannot be mixed without parentheses",
        )),
        Operand::Other(_) => Err(err(
            pos,
            if output {
                "a branch of `(+)` must be an output prefix"
            } else {
                "a branch of `+` must be an input prefix"
            },
        )),
    }
}

/// Parses one behaviour. Recursion variables are resolved syntactically;
/// closedness and the other well-formedness conditions are left to
/// [`validate`](super::validate).
pub fn parse(text: &str) -> Result<RawBehaviour, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        binders: Vec::new(),
    };
    let raw = p.behaviour()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("expected end of input"));
    }
    Ok(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> ActionName {
        ActionName::new(s).unwrap()
    }

    fn var(x: &str) -> RawBehaviour {
        RawBehaviour::Var(x.into())
    }

    #[test]
    fn done_literal() {
        assert_eq!(parse("1").unwrap(), RawBehaviour::Done);
        assert_eq!(parse("  (1) # trailing comment").unwrap(), RawBehaviour::Done);
    }

    #[test]
    fn bare_action_abbreviates_prefix() {
        assert_eq!(parse("a").unwrap(), RawBehaviour::input(n("a"), RawBehaviour::Done));
        assert_eq!(parse("!a").unwrap(), RawBehaviour::output(n("a"), RawBehaviour::Done));
    }

    #[test]
    fn voter_shape() {
        let got = parse("rec x. !login.(wrong.x + overload.x + ok.!voteA)").unwrap();
        let expected = RawBehaviour::rec(
            "x",
            RawBehaviour::output(
                n("login"),
                RawBehaviour::Ext(vec![
                    (n("wrong"), var("x")),
                    (n("overload"), var("x")),
                    (n("ok"), RawBehaviour::output(n("voteA"), RawBehaviour::Done)),
                ]),
            ),
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn prefix_binds_tighter_than_choice() {
        let got = parse("a.b.c + d").unwrap();
        let expected = RawBehaviour::Ext(vec![
            (n("a"), RawBehaviour::input(n("b"), RawBehaviour::input(n("c"), RawBehaviour::Done))),
            (n("d"), RawBehaviour::Done),
        ]);
        assert_eq!(got, expected);
    }

    #[test]
    fn internal_choice_operator_spellings() {
        let a = parse("!a (+) !b").unwrap();
        assert_eq!(parse("!a(+)!b").unwrap(), a);
        assert_eq!(parse("!a ( + ) !b").unwrap(), a);
        assert_eq!(parse("!a ⊕ !b").unwrap(), a);
    }

    #[test]
    fn rec_body_extends_right() {
        let got = parse("rec x. !a.x (+) !b").unwrap();
        assert!(matches!(got, RawBehaviour::Rec(_, ref body) if matches!(**body, RawBehaviour::Int(ref bs) if bs.len() == 2)));
    }

    #[test]
    fn unbound_bare_ident_is_an_input() {
        let got = parse("rec x.a.y").unwrap();
        assert_eq!(
            got,
            RawBehaviour::rec("x", RawBehaviour::input(n("a"), RawBehaviour::input(n("y"), RawBehaviour::Done)))
        );
    }

    #[test]
    fn dangling_operator_is_an_error() {
        let e = parse("a.b +").unwrap_err();
        assert_eq!((e.line, e.column), (1, 6));
    }

    #[test]
    fn mixed_choice_is_an_error() {
        assert!(parse("a + !b").is_err());
        assert!(parse("!a (+) !b + c").is_err());
        assert!(parse("1 + a").is_err());
        assert!(parse("(a + b) + c").is_err());
        assert!(parse("(a + b) + (!c (+) !d)").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("a.\n  (b + )").unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(e.column, 8);
        assert!(parse("a $").is_err());
        assert!(parse("rec 1.a").is_err());
        assert!(parse("a b").is_err());
        assert!(parse("").is_err());
        assert!(parse("!rec").is_err());
        assert!(parse("12").is_err());
    }
}
