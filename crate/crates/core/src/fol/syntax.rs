//! Raw textual syntax for formulas: `∀x, y. p(x) ∧ q(y) → x = y`.
//!
//! Bound variables print bare, free variables carry a `?` prefix and every
//! other unbound identifier is a constant. Runs of universal quantifiers
//! whose body is a conjunction of guards `g(v, ..)` implying something print
//! in guarded form `∀ set(A), set(B). φ` (and dually `∃ in(y, B). φ` for a
//! guarded conjunction).

use super::{Formula, Ident, Term};

const PREC_IFF: u8 = 1;
const PREC_IMPLIES: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_ATOM: u8 = 5;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => 0,
        Formula::Iff(..) => PREC_IFF,
        Formula::Implies(..) => PREC_IMPLIES,
        Formula::Or(..) => PREC_OR,
        Formula::And(..) => PREC_AND,
        _ => PREC_ATOM,
    }
}

pub(crate) fn render_formula(f: &Formula) -> String {
    let mut out = String::new();
    let mut scope = Vec::new();
    write_formula(f, &mut scope, &mut out);
    out
}

pub(crate) fn render_term(t: &Term, scope: &[Ident]) -> String {
    let mut out = String::new();
    write_term(t, scope, &mut out);
    out
}

fn write_term(t: &Term, scope: &[Ident], out: &mut String) {
    match t {
        Term::Var(v) => {
            if !scope.contains(v) {
                out.push('?');
            }
            out.push_str(v);
        }
        Term::Const(c) => out.push_str(c),
        Term::App(f, args) => {
            out.push_str(f);
            write_args(args, scope, out);
        }
    }
}

fn write_args(args: &[Term], scope: &[Ident], out: &mut String) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_term(a, scope, out);
    }
    out.push(')');
}

fn write_child(f: &Formula, parens: bool, scope: &mut Vec<Ident>, out: &mut String) {
    if parens {
        out.push('(');
        write_formula(f, scope, out);
        out.push(')');
    } else {
        write_formula(f, scope, out);
    }
}

fn write_binary(a: &Formula, b: &Formula, op: &str, p: u8, left_assoc: bool, scope: &mut Vec<Ident>, out: &mut String) {
    let pa = prec(a);
    let left_parens = pa < p || (pa == p && !left_assoc) || pa == 0;
    write_child(a, left_parens, scope, out);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    let pb = prec(b);
    write_child(b, pb <= p, scope, out);
}

/// Splits `g1 ∧ ... ∧ gn` (left nested) into exactly `n` parts.
fn split_left_conj(f: &Formula, n: usize) -> Option<Vec<&Formula>> {
    let mut parts = Vec::with_capacity(n);
    let mut cur = f;
    for _ in 1..n {
        match cur {
            Formula::And(l, r) => {
                parts.push(&**r);
                cur = l;
            }
            _ => return None,
        }
    }
    parts.push(cur);
    parts.reverse();
    Some(parts)
}

fn is_guard_for(g: &Formula, var: &str) -> bool {
    matches!(g, Formula::Pred(_, args) if matches!(args.first(), Some(Term::Var(v)) if v == var))
}

/// For a quantifier run over `vars` with `body`, finds the longest suffix of
/// `vars` whose guards make up the head of the body.
fn guarded_split<'a>(universal: bool, vars: &[Ident], body: &'a Formula) -> Option<(usize, Vec<&'a Formula>, &'a Formula)> {
    let (guards, rest) = match (universal, body) {
        (true, Formula::Implies(g, r)) => (&**g, &**r),
        (false, Formula::And(g, r)) => (&**g, &**r),
        _ => return None,
    };
    for n in (1..=vars.len()).rev() {
        let tail = &vars[vars.len() - n..];
        if let Some(parts) = split_left_conj(guards, n) {
            if parts.iter().zip(tail).all(|(g, v)| is_guard_for(g, v)) {
                return Some((n, parts, rest));
            }
        }
    }
    None
}

fn write_formula(f: &Formula, scope: &mut Vec<Ident>, out: &mut String) {
    match f {
        Formula::Pred(p, args) => {
            out.push_str(p);
            if !args.is_empty() {
                write_args(args, scope, out);
            }
        }
        Formula::Eq(l, r) => {
            write_term(l, scope, out);
            out.push_str(" = ");
            write_term(r, scope, out);
        }
        Formula::Not(inner) => {
            if let Formula::Eq(l, r) = &**inner {
                write_term(l, scope, out);
                out.push_str(" ≠ ");
                write_term(r, scope, out);
            } else {
                out.push('¬');
                write_child(inner, prec(inner) < PREC_ATOM, scope, out);
            }
        }
        Formula::And(a, b) => write_binary(a, b, "∧", PREC_AND, true, scope, out),
        Formula::Or(a, b) => write_binary(a, b, "∨", PREC_OR, true, scope, out),
        Formula::Implies(a, b) => write_binary(a, b, "→", PREC_IMPLIES, false, scope, out),
        Formula::Iff(a, b) => write_binary(a, b, "↔", PREC_IFF, false, scope, out),
        Formula::Forall(..) | Formula::Exists(..) => {
            let universal = matches!(f, Formula::Forall(..));
            let mut vars = Vec::new();
            let mut body = f;
            loop {
                match (universal, body) {
                    (true, Formula::Forall(v, b)) | (false, Formula::Exists(v, b)) => {
                        vars.push(v.clone());
                        body = b;
                    }
                    _ => break,
                }
            }
            let symbol = if universal { "∀" } else { "∃" };
            let depth = scope.len();
            match guarded_split(universal, &vars, body) {
                Some((n, guards, rest)) => {
                    let plain = &vars[..vars.len() - n];
                    if !plain.is_empty() {
                        out.push_str(symbol);
                        out.push_str(&plain.join(", "));
                        out.push_str(". ");
                        scope.extend(plain.iter().cloned());
                    }
                    out.push_str(symbol);
                    out.push(' ');
                    for (i, g) in guards.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        scope.push(vars[vars.len() - n + i].clone());
                        write_formula(g, scope, out);
                    }
                    out.push_str(". ");
                    write_formula(rest, scope, out);
                }
                None => {
                    out.push_str(symbol);
                    out.push_str(&vars.join(", "));
                    out.push_str(". ");
                    scope.extend(vars.iter().cloned());
                    write_formula(body, scope, out);
                }
            }
            scope.truncate(depth);
        }
        Formula::Top => out.push('⊤'),
        Formula::Bottom => out.push('⊥'),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    FreeVar(String),
    Sym(char),
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if is_ident_char(c) || c == '?' {
            let start = i;
            let free = c == '?';
            if free {
                chars.next();
            }
            let mut name = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if is_ident_char(c) {
                    name.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            if name.is_empty() {
                return Err(SyntaxError { offset: start, message: "`?` must prefix a variable name".into() });
            }
            out.push((if free { Tok::FreeVar(name) } else { Tok::Ident(name) }, start));
        } else if "∀∃¬∧∨→↔=≠⊤⊥(),.".contains(c) {
            out.push((Tok::Sym(c), i));
            chars.next();
        } else {
            return Err(SyntaxError { offset: i, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    scope: Vec<Ident>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError { offset: self.offset(), message: message.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        if matches!(self.peek(), Some(Tok::Sym('∀')) | Some(Tok::Sym('∃'))) {
            return self.quantified();
        }
        let lhs = self.implication()?;
        if self.eat('↔') {
            let rhs = self.implication()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn quantified(&mut self) -> Result<Formula, SyntaxError> {
        let universal = self.eat('∀');
        if !universal {
            self.expect('∃')?;
        }
        let depth = self.scope.len();
        let guarded = matches!(self.toks.get(self.pos + 1), Some((Tok::Sym('('), _)));
        let mut vars = Vec::new();
        let mut guards = Vec::new();
        loop {
            if guarded {
                let pred = self.ident()?;
                self.expect('(')?;
                let var = self.ident()?;
                self.scope.push(var.clone());
                let mut args = vec![Term::Var(var.clone())];
                while self.eat(',') {
                    args.push(self.term()?);
                }
                self.expect(')')?;
                vars.push(var);
                guards.push(Formula::Pred(pred, args));
            } else {
                let var = self.ident()?;
                self.scope.push(var.clone());
                vars.push(var);
            }
            if !self.eat(',') {
                break;
            }
        }
        self.expect('.')?;
        let body = self.formula()?;
        self.scope.truncate(depth);
        let body = match (guarded, universal) {
            (false, _) => body,
            (true, true) => Formula::implies(Formula::conj(guards), body),
            (true, false) => Formula::and(Formula::conj(guards), body),
        };
        Ok(if universal { Formula::forall_many(&vars, body) } else { Formula::exists_many(&vars, body) })
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if self.eat('→') {
            let rhs = if matches!(self.peek(), Some(Tok::Sym('∀')) | Some(Tok::Sym('∃'))) {
                self.quantified()?
            } else {
                self.implication()?
            };
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.conjunction()?;
        while self.eat('∨') {
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.unary()?;
        while self.eat('∧') {
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek() {
            Some(Tok::Sym('¬')) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Sym('∀')) | Some(Tok::Sym('∃')) => self.quantified(),
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(')')?;
                Ok(f)
            }
            Some(Tok::Sym('⊤')) => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(Tok::Sym('⊥')) => {
                self.pos += 1;
                Ok(Formula::Bottom)
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, SyntaxError> {
        let start = self.pos;
        let lhs = self.term()?;
        if self.eat('=') {
            return Ok(Formula::eq(lhs, self.term()?));
        }
        if self.eat('≠') {
            return Ok(Formula::not(Formula::eq(lhs, self.term()?)));
        }
        match (&self.toks[start].0, lhs) {
            (Tok::Ident(name), Term::Var(_)) | (Tok::Ident(name), Term::Const(_)) => Ok(Formula::Pred(name.clone(), vec![])),
            (_, Term::App(p, args)) => Ok(Formula::Pred(p, args)),
            _ => {
                self.pos = start;
                self.err("expected a formula")
            }
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::FreeVar(name)) => {
                self.pos += 1;
                Ok(Term::Var(name))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let mut args = vec![self.term()?];
                    while self.eat(',') {
                        args.push(self.term()?);
                    }
                    self.expect(')')?;
                    Ok(Term::App(name, args))
                } else if self.scope.contains(&name) {
                    Ok(Term::Var(name))
                } else {
                    Ok(Term::Const(name))
                }
            }
            _ => self.err("expected a term"),
        }
    }
}

/// Reads the output of [`Formula::render`].
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), scope: Vec::new() };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), scope: Vec::new() };
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(t)
}
