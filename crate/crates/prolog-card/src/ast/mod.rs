//! Source terms, the normalized clause syntax, and the parser/normalizer pair
//! that maps one to the other.

mod normalize;
mod parser;

use indexmap::IndexMap;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

pub use normalize::{normalize, normalize_clause};
pub use parser::{parse, ParseError};

/// Function symbol name: a plain atom or an integer constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    Atom(Arc<str>),
    Int(i64),
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Atom(a) => f.write_str(a),
            Sym::Int(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Functor {
    pub sym: Sym,
    pub arity: usize,
}

impl Functor {
    pub fn atom(name: &str, arity: usize) -> Self {
        Functor { sym: Sym::Atom(name.into()), arity }
    }

    pub fn int(v: i64) -> Self {
        Functor { sym: Sym::Int(v), arity: 0 }
    }

    pub fn nil() -> Self {
        Self::atom("[]", 0)
    }

    pub fn cons() -> Self {
        Self::atom(".", 2)
    }

    pub fn is_cons(&self) -> bool {
        self.arity == 2 && self.sym == Sym::Atom(".".into())
    }

    pub fn is_nil(&self) -> bool {
        self.arity == 0 && self.sym == Sym::Atom("[]".into())
    }

    pub fn int_value(&self) -> Option<i64> {
        match self.sym {
            Sym::Int(v) if self.arity == 0 => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Functor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.sym, self.arity)
    }
}

/// A term as written in the source. Lists are already desugared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawTerm {
    Var(String),
    Int(i64),
    Fn(String, Vec<RawTerm>),
}

impl RawTerm {
    pub fn atom(name: &str) -> Self {
        RawTerm::Fn(name.to_string(), Vec::new())
    }
}

impl fmt::Display for RawTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawTerm::Var(v) => f.write_str(v),
            RawTerm::Int(v) => write!(f, "{v}"),
            RawTerm::Fn(name, args) if args.is_empty() => f.write_str(name),
            RawTerm::Fn(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawClause {
    pub head: RawTerm,
    pub body: Vec<RawTerm>,
    pub line: usize,
}

/// Program variable `x_n`; numbering starts at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    /// Zero-based position, for indexing substitution vectors.
    pub fn ix(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_ix(i: usize) -> Self {
        Var(i as u32 + 1)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Rel {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Eq => a == b,
            Rel::Ne => a != b,
            Rel::Ge => a >= b,
            Rel::Gt => a > b,
        }
    }

    /// The relation with its operands swapped: `a < b` iff `b > a`.
    pub fn flip(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
            r => r,
        }
    }

    pub fn negate(self) -> Rel {
        match self {
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "=<",
            Rel::Eq => "=:=",
            Rel::Ne => "<>",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    Var(Var),
    Const(i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Var),
    Const(i64),
    Neg(Box<Expr>),
    Bin(ArithOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl Expr {
    pub fn vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Var(v) => out.push(*v),
            Expr::Const(_) => {}
            Expr::Neg(e) => e.vars(out),
            Expr::Bin(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    fn rename(&self, map: &dyn Fn(Var) -> Var) -> Expr {
        match self {
            Expr::Var(v) => Expr::Var(map(*v)),
            Expr::Const(c) => Expr::Const(*c),
            Expr::Neg(e) => Expr::Neg(Box::new(e.rename(map))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.rename(map)), Box::new(b.rename(map))),
        }
    }

    /// Evaluates with `lookup` supplying variable values; `None` when a
    /// variable has no integer value or a division by zero occurs.
    pub fn eval(&self, lookup: &dyn Fn(Var) -> Option<i64>) -> Option<i64> {
        match self {
            Expr::Var(v) => lookup(*v),
            Expr::Const(c) => Some(*c),
            Expr::Neg(e) => e.eval(lookup)?.checked_neg(),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(lookup)?, b.eval(lookup)?);
                match op {
                    ArithOp::Add => x.checked_add(y),
                    ArithOp::Sub => x.checked_sub(y),
                    ArithOp::Mul => x.checked_mul(y),
                    ArithOp::Div => x.checked_div(y),
                    ArithOp::Mod => x.checked_rem_euclid(y),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                    ArithOp::Div => "//",
                    ArithOp::Mod => " mod ",
                };
                write!(f, "({a}{s}{b})")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeTestKind {
    Var,
    Ground,
    NoVar,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Literal {
    Call { name: String, arity: usize, args: Vec<Var> },
    UnifVar(Var, Var),
    UnifFunc { var: Var, functor: Functor, args: Vec<Var> },
    Cut,
    ArithTest { rel: Rel, lhs: Operand, rhs: Operand },
    ArithEval { target: Var, expr: Expr },
    TypeTest { kind: TypeTestKind, var: Var },
}

impl Literal {
    /// Program variables of the literal in formal-parameter order: the
    /// i-th entry becomes `x_i` when the literal is restricted to its own
    /// variables.
    pub fn vars(&self) -> Vec<Var> {
        match self {
            Literal::Call { args, .. } => args.clone(),
            Literal::UnifVar(a, b) => vec![*a, *b],
            Literal::UnifFunc { var, args, .. } => {
                let mut v = vec![*var];
                v.extend(args);
                v
            }
            Literal::Cut => Vec::new(),
            Literal::ArithTest { lhs, rhs, .. } => [lhs, rhs]
                .iter()
                .filter_map(|o| match o {
                    Operand::Var(v) => Some(*v),
                    Operand::Const(_) => None,
                })
                .collect(),
            Literal::ArithEval { target, expr } => {
                let mut v = vec![*target];
                expr.vars(&mut v);
                v
            }
            Literal::TypeTest { var, .. } => vec![*var],
        }
    }

    /// The same literal over its formal parameters x1..xr.
    pub fn formal(&self) -> Literal {
        let vars = self.vars();
        let map = |v: Var| Var::from_ix(vars.iter().position(|w| *w == v).expect("literal variable"));
        let op = |o: &Operand| match o {
            Operand::Var(v) => Operand::Var(map(*v)),
            Operand::Const(c) => Operand::Const(*c),
        };
        match self {
            Literal::Call { name, arity, args } => {
                Literal::Call { name: name.clone(), arity: *arity, args: args.iter().map(|v| map(*v)).collect() }
            }
            Literal::UnifVar(a, b) => Literal::UnifVar(map(*a), map(*b)),
            Literal::UnifFunc { var, functor, args } => Literal::UnifFunc {
                var: map(*var),
                functor: functor.clone(),
                args: args.iter().map(|v| map(*v)).collect(),
            },
            Literal::Cut => Literal::Cut,
            Literal::ArithTest { rel, lhs, rhs } => Literal::ArithTest { rel: *rel, lhs: op(lhs), rhs: op(rhs) },
            Literal::ArithEval { target, expr } => Literal::ArithEval { target: map(*target), expr: expr.rename(&map) },
            Literal::TypeTest { kind, var } => Literal::TypeTest { kind: *kind, var: map(*var) },
        }
    }

    pub fn is_call(&self) -> bool {
        matches!(self, Literal::Call { .. })
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |vs: &[Var]| vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        let op = |o: &Operand| match o {
            Operand::Var(v) => v.to_string(),
            Operand::Const(c) => c.to_string(),
        };
        match self {
            Literal::Call { name, args, .. } if args.is_empty() => write!(f, "{name}"),
            Literal::Call { name, args, .. } => write!(f, "{name}({})", list(args)),
            Literal::UnifVar(a, b) => write!(f, "{a}={b}"),
            Literal::UnifFunc { var, functor, args } if args.is_empty() => write!(f, "{var}={}", functor.sym),
            Literal::UnifFunc { var, functor, args } => write!(f, "{var}={}({})", functor.sym, list(args)),
            Literal::Cut => f.write_str("!"),
            Literal::ArithTest { rel, lhs, rhs } => write!(f, "{}{}{}", op(lhs), rel.symbol(), op(rhs)),
            Literal::ArithEval { target, expr } => write!(f, "{target} is {expr}"),
            Literal::TypeTest { kind, var } => {
                let k = match kind {
                    TypeTestKind::Var => "var",
                    TypeTestKind::Ground => "ground",
                    TypeTestKind::NoVar => "nonvar",
                };
                write!(f, "{k}({var})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub name: String,
    pub arity: usize,
    pub body: Vec<Literal>,
    pub var_count: usize,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<String> = (1..=self.arity).map(|i| format!("x{i}")).collect();
        if head.is_empty() {
            write!(f, "{}", self.name)?;
        } else {
            write!(f, "{}({})", self.name, head.join(","))?;
        }
        if !self.body.is_empty() {
            let body: Vec<String> = self.body.iter().map(|l| l.to_string()).collect();
            write!(f, " :- {}", body.join(", "))?;
        }
        f.write_str(".")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PredKey {
    pub name: String,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: &str, arity: usize) -> Self {
        PredKey { name: name.to_string(), arity }
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// Procedures in order of first definition, each with its clauses in
/// source order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub procs: IndexMap<PredKey, Vec<Clause>>,
}

impl Program {
    pub fn clauses(&self, key: &PredKey) -> Option<&[Clause]> {
        self.procs.get(key).map(|v| v.as_slice())
    }

    /// Parses and normalizes in one step.
    pub fn from_source(text: &str) -> Result<Program, ParseError> {
        Ok(normalize(&parse(text)?))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for clauses in self.procs.values() {
            for c in clauses {
                writeln!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

/// Checks the structural invariants of a normalized clause; returns a
/// description of the first violation.
pub fn validate_clause(c: &Clause) -> Result<(), String> {
    if c.arity > c.var_count {
        return Err(format!("arity {} exceeds variable count {}", c.arity, c.var_count));
    }
    for lit in &c.body {
        let vars = lit.vars();
        for (i, v) in vars.iter().enumerate() {
            if v.0 == 0 || v.0 as usize > c.var_count {
                return Err(format!("variable {v} out of range in {lit}"));
            }
            if vars[..i].contains(v) {
                return Err(format!("variable {v} repeated in {lit}"));
            }
        }
        if let Literal::UnifFunc { functor, args, .. } = lit {
            if functor.arity != args.len() {
                return Err(format!("arity mismatch in {lit}"));
            }
        }
        if let Literal::Call { arity, args, .. } = lit {
            if *arity != args.len() {
                return Err(format!("arity mismatch in {lit}"));
            }
        }
    }
    Ok(())
}
