use super::{Record, Role, TptpProblem};
use crate::fol::{Formula, Term};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("TPTP syntax error at byte {offset}: {message}")]
pub struct FofError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Upper(String),
    Lower(String),
    Dollar(String),
    Sym(&'static str),
}

const SYMBOLS: [&str; 17] = ["<=>", "<~>", "=>", "<=", "!=", "~|", "~&", "(", ")", "[", "]", ",", ":", ".", "&", "|", "~"];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, FofError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'%' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let end = text[i + 2..].find("*/").ok_or(FofError { offset: i, message: "unterminated comment".into() })?;
            i += end + 4;
        } else if c.is_ascii_alphanumeric() || c == b'_' || c == b'$' {
            let start = i;
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = text[start..i].to_string();
            let tok = if c == b'$' {
                Tok::Dollar(word)
            } else if c.is_ascii_uppercase() {
                Tok::Upper(word)
            } else {
                Tok::Lower(word)
            };
            out.push((tok, start));
        } else if c == b'!' && bytes.get(i + 1) != Some(&b'=') {
            out.push((Tok::Sym("!"), i));
            i += 1;
        } else if c == b'?' {
            out.push((Tok::Sym("?"), i));
            i += 1;
        } else if c == b'=' && bytes.get(i + 1) != Some(&b'>') {
            out.push((Tok::Sym("="), i));
            i += 1;
        } else {
            let sym = SYMBOLS
                .iter()
                .find(|s| text[i..].starts_with(**s))
                .ok_or(FofError { offset: i, message: format!("unexpected character `{}`", &text[i..].chars().next().unwrap()) })?;
            out.push((Tok::Sym(sym), i));
            i += sym.len();
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, FofError> {
        Err(FofError { offset: self.offset(), message: message.into() })
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), FofError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.fail(format!("expected `{sym}`"))
        }
    }

    fn lower(&mut self) -> Result<String, FofError> {
        match self.peek() {
            Some(Tok::Lower(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.fail("expected a lower-case word"),
        }
    }

    fn problem(&mut self) -> Result<TptpProblem, FofError> {
        let mut records = Vec::new();
        while self.peek().is_some() {
            let kw = self.lower()?;
            if kw != "fof" {
                return self.fail(format!("unsupported record `{kw}`"));
            }
            self.expect("(")?;
            let name = self.lower()?;
            self.expect(",")?;
            let role = match self.lower()?.as_str() {
                "axiom" | "hypothesis" | "definition" => Role::Axiom,
                "conjecture" => Role::Conjecture,
                other => return self.fail(format!("unsupported role `{other}`")),
            };
            self.expect(",")?;
            let formula = self.formula()?;
            self.expect(")")?;
            self.expect(".")?;
            records.push(Record { name, role, formula });
        }
        Ok(TptpProblem { records })
    }

    fn formula(&mut self) -> Result<Formula, FofError> {
        let lhs = self.unitary()?;
        let op = match self.peek() {
            Some(Tok::Sym(s)) if ["<=>", "<~>", "=>", "<=", "~|", "~&", "&", "|"].contains(s) => *s,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        if op == "&" || op == "|" {
            let mut acc = lhs;
            loop {
                let rhs = self.unitary()?;
                acc = if op == "&" { Formula::and(acc, rhs) } else { Formula::or(acc, rhs) };
                if !self.eat(op) {
                    return Ok(acc);
                }
            }
        }
        let rhs = self.unitary()?;
        Ok(match op {
            "<=>" => Formula::iff(lhs, rhs),
            "<~>" => Formula::not(Formula::iff(lhs, rhs)),
            "=>" => Formula::implies(lhs, rhs),
            "<=" => Formula::implies(rhs, lhs),
            "~|" => Formula::not(Formula::or(lhs, rhs)),
            _ => Formula::not(Formula::and(lhs, rhs)),
        })
    }

    fn unitary(&mut self) -> Result<Formula, FofError> {
        if self.eat("(") {
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        if self.eat("~") {
            return Ok(Formula::not(self.unitary()?));
        }
        let universal = self.eat("!");
        if universal || self.eat("?") {
            self.expect("[")?;
            let mut vars = Vec::new();
            loop {
                match self.peek() {
                    Some(Tok::Upper(v)) => vars.push(v.clone()),
                    _ => return self.fail("expected a variable"),
                }
                self.pos += 1;
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("]")?;
            self.expect(":")?;
            let body = self.unitary()?;
            return Ok(if universal { Formula::forall_many(&vars, body) } else { Formula::exists_many(&vars, body) });
        }
        if let Some(Tok::Dollar(w)) = self.peek() {
            let f = match w.as_str() {
                "$true" => Formula::Top,
                "$false" => Formula::Bottom,
                _ => return self.fail(format!("unsupported `{w}`")),
            };
            self.pos += 1;
            return Ok(f);
        }
        let lhs = self.term()?;
        if self.eat("=") {
            return Ok(Formula::eq(lhs, self.term()?));
        }
        if self.eat("!=") {
            return Ok(Formula::not(Formula::eq(lhs, self.term()?)));
        }
        match lhs {
            Term::Const(p) => Ok(Formula::pred(p, vec![])),
            Term::App(p, args) => Ok(Formula::pred(p, args)),
            Term::Var(v) => self.fail(format!("variable `{v}` used as a formula")),
        }
    }

    fn term(&mut self) -> Result<Term, FofError> {
        match self.peek().cloned() {
            Some(Tok::Upper(v)) => {
                self.pos += 1;
                Ok(Term::Var(v))
            }
            Some(Tok::Lower(f)) => {
                self.pos += 1;
                if !self.eat("(") {
                    return Ok(Term::Const(f));
                }
                let mut args = vec![self.term()?];
                while self.eat(",") {
                    args.push(self.term()?);
                }
                self.expect(")")?;
                Ok(Term::App(f, args))
            }
            _ => self.fail("expected a term"),
        }
    }
}

/// Parses FOF records. Variables stay as written; the result of
/// [`super::mangle`] is reproduced exactly on rendered problems.
pub fn parse_fof(text: &str) -> Result<TptpProblem, FofError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0, end: text.len() }.problem()
}
