//! Flattening of raw clauses into normalized clauses over x1..xm.

use super::{
    ArithOp, Clause, Expr, Functor, Literal, Operand, PredKey, Program, RawClause, RawTerm, Rel, TypeTestKind, Var,
};
use std::collections::HashMap;

struct Ctx {
    names: HashMap<String, Var>,
    next: u32,
    body: Vec<Literal>,
}

impl Ctx {
    fn fresh(&mut self) -> Var {
        self.next += 1;
        Var(self.next)
    }

    fn var(&mut self, name: &str) -> Var {
        if let Some(v) = self.names.get(name) {
            return *v;
        }
        let v = self.fresh();
        self.names.insert(name.to_string(), v);
        v
    }

    fn functor_of(t: &RawTerm) -> Functor {
        match t {
            RawTerm::Int(v) => Functor::int(*v),
            RawTerm::Fn(f, args) => Functor::atom(f, args.len()),
            RawTerm::Var(_) => unreachable!("variables have no functor"),
        }
    }

    /// Emits `x = t` for a non-variable `t`, pre-order: the literal for
    /// `t` comes first, then the literals for its compound arguments.
    fn bind(&mut self, x: Var, t: &RawTerm) {
        let functor = Self::functor_of(t);
        let raw_args: &[RawTerm] = match t {
            RawTerm::Fn(_, a) => a,
            _ => &[],
        };
        let mut args: Vec<Var> = Vec::with_capacity(raw_args.len());
        let mut deferred: Vec<(Var, &RawTerm)> = Vec::new();
        let mut splits: Vec<(Var, Var)> = Vec::new();
        for a in raw_args {
            match a {
                RawTerm::Var(name) => {
                    let v = self.var(name);
                    if v == x || args.contains(&v) {
                        let y = self.fresh();
                        splits.push((v, y));
                        args.push(y);
                    } else {
                        args.push(v);
                    }
                }
                _ => {
                    let y = self.fresh();
                    args.push(y);
                    deferred.push((y, a));
                }
            }
        }
        self.body.push(Literal::UnifFunc { var: x, functor, args });
        for (v, y) in splits {
            self.body.push(Literal::UnifVar(v, y));
        }
        for (y, a) in deferred {
            self.bind(y, a);
        }
    }

    /// A variable standing for `t`; non-variables are bound first.
    fn operand_var(&mut self, t: &RawTerm) -> Var {
        match t {
            RawTerm::Var(name) => self.var(name),
            _ => {
                let y = self.fresh();
                self.bind(y, t);
                y
            }
        }
    }

    /// Gives each variable occurrence in `vs` after the first a fresh
    /// variable, emitting the linking unification before the literal.
    fn distinct(&mut self, vs: &mut [Var]) {
        for i in 0..vs.len() {
            if vs[..i].contains(&vs[i]) {
                let y = self.fresh();
                self.body.push(Literal::UnifVar(vs[i], y));
                vs[i] = y;
            }
        }
    }

    fn expr(&mut self, t: &RawTerm) -> Expr {
        match t {
            RawTerm::Var(name) => Expr::Var(self.var(name)),
            RawTerm::Int(v) => Expr::Const(*v),
            RawTerm::Fn(f, args) => match (f.as_str(), args.as_slice()) {
                ("-", [a]) => match self.expr(a) {
                    Expr::Const(c) => Expr::Const(-c),
                    e => Expr::Neg(Box::new(e)),
                },
                ("+", [a]) => self.expr(a),
                (op, [a, b]) => {
                    let op = match op {
                        "+" => ArithOp::Add,
                        "-" => ArithOp::Sub,
                        "*" => ArithOp::Mul,
                        "//" | "/" => ArithOp::Div,
                        "mod" => ArithOp::Mod,
                        _ => unreachable!("checked by the parser"),
                    };
                    let (a, b) = (self.expr(a), self.expr(b));
                    Expr::Bin(op, Box::new(a), Box::new(b))
                }
                _ => unreachable!("checked by the parser"),
            },
        }
    }

    fn expr_vars_mut<'a>(e: &'a mut Expr, out: &mut Vec<&'a mut Var>) {
        match e {
            Expr::Var(v) => out.push(v),
            Expr::Const(_) => {}
            Expr::Neg(a) => Self::expr_vars_mut(a, out),
            Expr::Bin(_, a, b) => {
                Self::expr_vars_mut(a, out);
                Self::expr_vars_mut(b, out);
            }
        }
    }

    fn arith_operand(&mut self, t: &RawTerm) -> Operand {
        match t {
            RawTerm::Var(name) => Operand::Var(self.var(name)),
            RawTerm::Int(v) => Operand::Const(*v),
            _ => match self.expr(t) {
                Expr::Const(c) => Operand::Const(c),
                e => {
                    let y = self.fresh();
                    self.eval(y, e);
                    Operand::Var(y)
                }
            },
        }
    }

    fn eval(&mut self, target: Var, mut expr: Expr) {
        let mut seen = vec![target];
        let mut slots = Vec::new();
        Self::expr_vars_mut(&mut expr, &mut slots);
        let mut links = Vec::new();
        for slot in slots {
            if seen.contains(slot) {
                self.next += 1;
                let y = Var(self.next);
                links.push(Literal::UnifVar(*slot, y));
                *slot = y;
            }
            seen.push(*slot);
        }
        self.body.extend(links);
        self.body.push(Literal::ArithEval { target, expr });
    }

    fn goal(&mut self, g: &RawTerm) {
        let RawTerm::Fn(name, args) = g else { unreachable!("checked by the parser") };
        match (name.as_str(), args.as_slice()) {
            ("!", []) => self.body.push(Literal::Cut),
            ("=", [a, b]) => match (a, b) {
                (RawTerm::Var(x), RawTerm::Var(y)) => {
                    let (x, y) = (self.var(x), self.var(y));
                    if x != y {
                        self.body.push(Literal::UnifVar(x, y));
                    }
                }
                (RawTerm::Var(x), t) | (t, RawTerm::Var(x)) => {
                    let x = self.var(x);
                    self.bind(x, t);
                }
                _ => {
                    let z = self.fresh();
                    self.bind(z, a);
                    self.bind(z, b);
                }
            },
            ("is" | ":=", [lhs, rhs]) => match lhs {
                RawTerm::Var(x) => {
                    let x = self.var(x);
                    let e = self.expr(rhs);
                    self.eval(x, e);
                }
                _ => {
                    let e = self.expr(rhs);
                    let y = self.fresh();
                    self.eval(y, e);
                    self.bind(y, lhs);
                }
            },
            (op @ ("<" | ">" | "=<" | ">=" | "<>" | "=:=" | "=\\="), [a, b]) => {
                let rel = match op {
                    "<" => Rel::Lt,
                    ">" => Rel::Gt,
                    "=<" => Rel::Le,
                    ">=" => Rel::Ge,
                    "=:=" => Rel::Eq,
                    _ => Rel::Ne,
                };
                let (mut lhs, mut rhs) = (self.arith_operand(a), self.arith_operand(b));
                if let (Operand::Var(x), Operand::Var(y)) = (lhs, rhs) {
                    if x == y {
                        let z = self.fresh();
                        self.body.push(Literal::UnifVar(x, z));
                        rhs = Operand::Var(z);
                    }
                }
                if let (Operand::Const(_), Operand::Const(_)) = (lhs, rhs) {
                    // keep the test observable: route one side through a variable
                    let Operand::Const(c) = lhs else { unreachable!() };
                    let y = self.fresh();
                    self.body.push(Literal::ArithEval { target: y, expr: Expr::Const(c) });
                    lhs = Operand::Var(y);
                }
                self.body.push(Literal::ArithTest { rel, lhs, rhs });
            }
            (k @ ("var" | "ground" | "nonvar" | "novar"), [a]) => {
                let kind = match k {
                    "var" => TypeTestKind::Var,
                    "ground" => TypeTestKind::Ground,
                    _ => TypeTestKind::NoVar,
                };
                let var = self.operand_var(a);
                self.body.push(Literal::TypeTest { kind, var });
            }
            _ => {
                let mut vs: Vec<Var> = args.iter().map(|a| self.operand_var(a)).collect();
                self.distinct(&mut vs);
                self.body.push(Literal::Call { name: name.clone(), arity: args.len(), args: vs });
            }
        }
    }
}

/// Normalizes one raw clause; also returns its predicate key.
pub fn normalize_clause(rc: &RawClause) -> (PredKey, Clause) {
    let (name, args): (&str, &[RawTerm]) = match &rc.head {
        RawTerm::Fn(f, a) => (f, a),
        _ => unreachable!("checked by the parser"),
    };
    let n = args.len();
    let mut cx = Ctx { names: HashMap::new(), next: n as u32, body: Vec::new() };
    for (i, a) in args.iter().enumerate() {
        if let RawTerm::Var(v) = a {
            cx.names.entry(v.clone()).or_insert(Var::from_ix(i));
        }
    }
    for (i, a) in args.iter().enumerate() {
        let xi = Var::from_ix(i);
        match a {
            RawTerm::Var(v) => {
                let first = cx.names[v];
                if first != xi {
                    cx.body.push(Literal::UnifVar(first, xi));
                }
            }
            t => cx.bind(xi, t),
        }
    }
    for g in &rc.body {
        cx.goal(g);
    }
    let clause = Clause { name: name.to_string(), arity: n, body: cx.body, var_count: cx.next as usize };
    (PredKey::new(name, n), clause)
}

pub fn normalize(raw: &[RawClause]) -> Program {
    let mut prog = Program::default();
    for rc in raw {
        let (key, c) = normalize_clause(rc);
        prog.procs.entry(key).or_default().push(c);
    }
    prog
}
