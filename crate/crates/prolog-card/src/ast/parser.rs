//! Tokenizer and operator-precedence parser for the supported Prolog subset.

use super::{RawClause, RawTerm};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported construct `{name}` at {line}:{col}")]
    Unsupported { line: usize, col: usize, name: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Var(String),
    Atom(String),
    /// An atom written with quotes; never treated as an operator.
    QAtom(String),
    Int(i64),
    /// `(` immediately after a name: opens an argument list.
    OpenCall,
    Open,
    Close,
    OpenList,
    CloseList,
    Bar,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
    /// Whitespace (or a comment) precedes this token.
    spaced: bool,
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut spaced = true;
    let mut anon = 0usize;
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            spaced = true;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            spaced = true;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::Syntax { line: l0, col: c0, msg: "unterminated block comment".into() });
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            spaced = true;
            continue;
        }
        let (tl, tc) = (line, col);
        let tok = if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<i64>().map_err(|_| ParseError::Syntax {
                line: tl,
                col: tc,
                msg: format!("integer {s} out of range"),
            })?;
            Tok::Int(v)
        } else if c == '_' || c.is_ascii_uppercase() {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let s: String = chars[start..i].iter().collect();
            if s == "_" {
                anon += 1;
                Tok::Var(format!("_#{anon}"))
            } else {
                Tok::Var(s)
            }
        } else if c.is_ascii_lowercase() {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            Tok::Atom(chars[start..i].iter().collect())
        } else if c == '\'' {
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::Syntax { line: tl, col: tc, msg: "unterminated quoted atom".into() });
                }
                if chars[i] == '\'' {
                    if chars.get(i + 1) == Some(&'\'') {
                        s.push('\'');
                        bump!();
                        bump!();
                        continue;
                    }
                    bump!();
                    break;
                }
                s.push(chars[i]);
                bump!();
            }
            Tok::QAtom(s)
        } else if c == '(' {
            bump!();
            if spaced || !matches!(out.last(), Some(Token { tok: Tok::Atom(_) | Tok::QAtom(_), .. })) {
                Tok::Open
            } else {
                Tok::OpenCall
            }
        } else if c == ')' {
            bump!();
            Tok::Close
        } else if c == '[' {
            bump!();
            if chars.get(i) == Some(&']') {
                bump!();
                Tok::Atom("[]".into())
            } else {
                Tok::OpenList
            }
        } else if c == ']' {
            bump!();
            Tok::CloseList
        } else if c == '|' {
            bump!();
            Tok::Bar
        } else if c == ',' {
            bump!();
            Tok::Comma
        } else if c == '!' || c == ';' {
            bump!();
            Tok::Atom(c.to_string())
        } else if c == '.' && chars.get(i + 1).is_none_or(|n| n.is_whitespace() || *n == '%') {
            bump!();
            Tok::End
        } else if SYMBOL_CHARS.contains(c) {
            let start = i;
            while i < chars.len() && SYMBOL_CHARS.contains(chars[i]) {
                bump!();
            }
            Tok::Atom(chars[start..i].iter().collect())
        } else {
            return Err(ParseError::Syntax { line: tl, col: tc, msg: format!("unexpected character `{c}`") });
        };
        out.push(Token { tok, line: tl, col: tc, spaced });
        spaced = false;
    }
    Ok(out)
}

/// A parsed term that still remembers where it started.
#[derive(Debug, Clone)]
struct PTerm {
    kind: PKind,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone)]
enum PKind {
    Var(String),
    Int(i64),
    Fn(String, Vec<PTerm>),
}

impl PTerm {
    fn raw(&self) -> RawTerm {
        match &self.kind {
            PKind::Var(v) => RawTerm::Var(v.clone()),
            PKind::Int(v) => RawTerm::Int(*v),
            PKind::Fn(f, args) => RawTerm::Fn(f.clone(), args.iter().map(PTerm::raw).collect()),
        }
    }

    fn functor(&self) -> Option<(&str, usize)> {
        match &self.kind {
            PKind::Fn(f, args) => Some((f.as_str(), args.len())),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Assoc {
    Xfx,
    Xfy,
    Yfx,
}

fn infix(name: &str) -> Option<(u32, Assoc)> {
    Some(match name {
        ":-" => (1200, Assoc::Xfx),
        ";" => (1100, Assoc::Xfy),
        "->" => (1050, Assoc::Xfy),
        "," => (1000, Assoc::Xfy),
        "=" | "\\=" | "<" | ">" | "=<" | ">=" | ":=" | "<>" | "is" | "=:=" | "=\\=" | "==" | "\\==" => {
            (700, Assoc::Xfx)
        }
        "+" | "-" => (500, Assoc::Yfx),
        "*" | "/" | "//" | "mod" => (400, Assoc::Yfx),
        _ => return None,
    })
}

fn prefix(name: &str) -> Option<u32> {
    match name {
        ":-" => Some(1200),
        "\\+" => Some(900),
        "-" => Some(200),
        _ => None,
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn err_here(&self, msg: &str) -> ParseError {
        match self.peek().or(self.toks.last()) {
            Some(t) => ParseError::Syntax { line: t.line, col: t.col, msg: msg.to_string() },
            None => ParseError::Syntax { line: 1, col: 1, msg: msg.to_string() },
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err_here(&format!("expected {what}"))),
        }
    }

    /// Name of an infix operator at the current position, if any.
    fn infix_here(&self) -> Option<(String, u32, Assoc)> {
        let t = self.peek()?;
        let name = match &t.tok {
            Tok::Atom(a) => a.clone(),
            Tok::Comma => ",".to_string(),
            _ => return None,
        };
        let (p, a) = infix(&name)?;
        Some((name, p, a))
    }

    fn parse(&mut self, max: u32) -> Result<PTerm, ParseError> {
        let (mut left, mut left_prec) = self.primary(max)?;
        while let Some((name, prec, assoc)) = self.infix_here() {
            if prec > max {
                break;
            }
            let left_max = if assoc == Assoc::Yfx { prec } else { prec - 1 };
            if left_prec > left_max {
                break;
            }
            let right_max = if assoc == Assoc::Xfy { prec } else { prec - 1 };
            self.pos += 1;
            let right = self.parse(right_max)?;
            left = PTerm { line: left.line, col: left.col, kind: PKind::Fn(name, vec![left, right]) };
            left_prec = prec;
        }
        Ok(left)
    }

    fn args(&mut self) -> Result<Vec<PTerm>, ParseError> {
        let mut args = vec![self.parse(999)?];
        while matches!(self.peek(), Some(Token { tok: Tok::Comma, .. })) {
            self.pos += 1;
            args.push(self.parse(999)?);
        }
        Ok(args)
    }

    fn primary(&mut self, max: u32) -> Result<(PTerm, u32), ParseError> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.err_here("unexpected end of input"));
        };
        self.pos += 1;
        let at = |kind| PTerm { kind, line: t.line, col: t.col };
        match t.tok {
            Tok::Var(v) => Ok((at(PKind::Var(v)), 0)),
            Tok::Int(v) => Ok((at(PKind::Int(v)), 0)),
            Tok::Open => {
                let inner = self.parse(1200)?;
                self.expect(Tok::Close, "`)`")?;
                Ok((inner, 0))
            }
            Tok::OpenList => {
                let mut items = self.args()?;
                let tail = if matches!(self.peek(), Some(Token { tok: Tok::Bar, .. })) {
                    self.pos += 1;
                    self.parse(999)?
                } else {
                    at(PKind::Fn("[]".into(), Vec::new()))
                };
                self.expect(Tok::CloseList, "`]`")?;
                let mut list = tail;
                while let Some(h) = items.pop() {
                    list = PTerm { line: h.line, col: h.col, kind: PKind::Fn(".".into(), vec![h, list]) };
                }
                Ok((list, 0))
            }
            Tok::QAtom(a) => self.after_name(a, t.line, t.col),
            Tok::Atom(a) => {
                // -3 as a literal, when the digit follows the sign directly
                if a == "-" {
                    if let Some(Token { tok: Tok::Int(v), spaced: false, .. }) = self.peek().cloned() {
                        self.pos += 1;
                        return Ok((at(PKind::Int(-v)), 0));
                    }
                }
                if let Some(p) = prefix(&a) {
                    let next_is_operand = match self.peek() {
                        Some(Token {
                            tok: Tok::Var(_) | Tok::Int(_) | Tok::Open | Tok::OpenList | Tok::QAtom(_),
                            ..
                        }) => true,
                        Some(Token { tok: Tok::Atom(b), .. }) => infix(b).is_none() || prefix(b).is_some(),
                        _ => false,
                    };
                    if next_is_operand && !matches!(self.peek(), Some(Token { tok: Tok::OpenCall, .. })) {
                        let p = p.min(max);
                        let arg = self.parse(if a == "-" { p } else { p - 1 })?;
                        return Ok((at(PKind::Fn(a, vec![arg])), p));
                    }
                }
                self.after_name(a, t.line, t.col)
            }
            Tok::CloseList | Tok::Close | Tok::Bar | Tok::Comma | Tok::End | Tok::OpenCall => {
                Err(ParseError::Syntax { line: t.line, col: t.col, msg: "unexpected token".into() })
            }
        }
    }

    fn after_name(&mut self, name: String, line: usize, col: usize) -> Result<(PTerm, u32), ParseError> {
        if matches!(self.peek(), Some(Token { tok: Tok::OpenCall, .. })) {
            self.pos += 1;
            let args = self.args()?;
            self.expect(Tok::Close, "`)`")?;
            return Ok((PTerm { kind: PKind::Fn(name, args), line, col }, 0));
        }
        Ok((PTerm { kind: PKind::Fn(name, Vec::new()), line, col }, 0))
    }
}

const COMPARISONS: [&str; 8] = ["<", ">", "=<", ">=", "<>", "=:=", "=\\=", ":="];

fn unsupported(t: &PTerm, name: &str) -> ParseError {
    ParseError::Unsupported { line: t.line, col: t.col, name: name.to_string() }
}

fn check_arith(t: &PTerm) -> Result<(), ParseError> {
    match &t.kind {
        PKind::Var(_) | PKind::Int(_) => Ok(()),
        PKind::Fn(f, args) => match (f.as_str(), args.len()) {
            ("+" | "-" | "*" | "//" | "/" | "mod", 2) => args.iter().try_for_each(check_arith),
            ("-" | "+", 1) => check_arith(&args[0]),
            _ => Err(unsupported(t, &format!("non-arithmetic expression {}", t.raw()))),
        },
    }
}

fn check_goal(g: &PTerm) -> Result<(), ParseError> {
    let Some((name, arity)) = g.functor() else {
        return Err(match g.kind {
            PKind::Var(_) => unsupported(g, "variable goal"),
            _ => unsupported(g, "integer goal"),
        });
    };
    let PKind::Fn(_, args) = &g.kind else { unreachable!() };
    match (name, arity) {
        (";", 2) => Err(unsupported(g, ";")),
        ("->", 2) => Err(unsupported(g, "->")),
        ("\\+", 1) | ("not", 1) => Err(unsupported(g, "\\+")),
        ("==", 2) | ("\\==", 2) | ("\\=", 2) => Err(unsupported(g, name)),
        ("call", _) | ("findall", 3) | ("bagof", 3) | ("setof", 3) => Err(unsupported(g, name)),
        ("assert" | "asserta" | "assertz" | "retract", 1) => Err(unsupported(g, name)),
        ("is", 2) | (":=", 2) => check_arith(&args[1]),
        (op, 2) if COMPARISONS.contains(&op) => {
            check_arith(&args[0])?;
            check_arith(&args[1])
        }
        _ => Ok(()),
    }
}

fn flatten_conj(t: PTerm, out: &mut Vec<PTerm>) {
    match t.kind {
        PKind::Fn(ref f, _) if f == "," => {
            let PKind::Fn(_, args) = t.kind else { unreachable!() };
            for a in args {
                flatten_conj(a, out);
            }
        }
        _ => out.push(t),
    }
}

fn check_head(h: &PTerm) -> Result<(), ParseError> {
    match &h.kind {
        PKind::Fn(f, _) if f == "," || f == ";" || f == "->" || f == ":-" => Err(unsupported(h, f)),
        PKind::Fn(_, _) => Ok(()),
        PKind::Var(_) => Err(unsupported(h, "variable clause head")),
        PKind::Int(_) => Err(ParseError::Syntax { line: h.line, col: h.col, msg: "integer clause head".into() }),
    }
}

/// Parses `text` into raw clauses in source order.
pub fn parse(text: &str) -> Result<Vec<RawClause>, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let mut clauses = Vec::new();
    while p.peek().is_some() {
        let t = p.parse(1200)?;
        p.expect(Tok::End, "`.` ending the clause")?;
        let (head, body) = match t.kind {
            PKind::Fn(ref f, ref args) if f == ":-" && args.len() == 2 => {
                let PKind::Fn(_, mut args) = t.kind else { unreachable!() };
                let b = args.pop().unwrap();
                let h = args.pop().unwrap();
                let mut goals = Vec::new();
                flatten_conj(b, &mut goals);
                (h, goals)
            }
            PKind::Fn(ref f, ref args) if f == ":-" && args.len() == 1 => return Err(unsupported(&t, "directive")),
            _ => (t, Vec::new()),
        };
        check_head(&head)?;
        for g in &body {
            check_goal(g)?;
        }
        clauses.push(RawClause {
            line: head.line,
            head: head.raw(),
            body: body
                .iter()
                .filter(|g| !matches!(&g.kind, PKind::Fn(f, a) if f == "true" && a.is_empty()))
                .map(PTerm::raw)
                .collect(),
        });
    }
    Ok(clauses)
}
