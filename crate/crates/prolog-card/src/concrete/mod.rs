//! Concrete substitution sequences and a depth-bounded interpreter of the
//! denotational semantics with cut. Used as the oracle for the analyzer.

mod eval;

pub use eval::{EvalError, Interpreter};

use crate::ast::{Functor, Literal, Sym, Var};
use std::collections::BTreeMap;
use std::fmt;

/// A term over standard variables `y_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(u32),
    Fn(Sym, Vec<Term>),
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Fn(Sym::Atom(name.into()), Vec::new())
    }

    pub fn int(v: i64) -> Term {
        Term::Fn(Sym::Int(v), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::Fn(Sym::Atom(name.into()), args)
    }

    pub fn list(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |t, h| Term::app(".", vec![h, t]))
    }

    pub fn functor(&self) -> Option<Functor> {
        match self {
            Term::Var(_) => None,
            Term::Fn(s, a) => Some(Functor { sym: s.clone(), arity: a.len() }),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Fn(Sym::Int(v), a) if a.is_empty() => Some(*v),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Fn(_, a) => a.iter().all(Term::is_ground),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Fn(_, a) => 1 + a.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn vars_into(&self, out: &mut Vec<u32>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Term::Fn(_, a) => a.iter().for_each(|t| t.vars_into(out)),
        }
    }

    pub fn max_var(&self) -> u32 {
        match self {
            Term::Var(v) => *v,
            Term::Fn(_, a) => a.iter().map(Term::max_var).max().unwrap_or(0),
        }
    }

    pub fn apply(&self, s: &Bindings) -> Term {
        match self {
            Term::Var(v) => match s.map.get(v) {
                Some(t) => t.clone(),
                None => self.clone(),
            },
            Term::Fn(f, a) => Term::Fn(f.clone(), a.iter().map(|t| t.apply(s)).collect()),
        }
    }

    fn rename(&self, f: &mut impl FnMut(u32) -> u32) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(*v)),
            Term::Fn(s, a) => Term::Fn(s.clone(), a.iter().map(|t| t.rename(f)).collect()),
        }
    }

    /// Extends `m` so that `self` instantiated by `m` equals `other`.
    pub fn match_into(&self, other: &Term, m: &mut BTreeMap<u32, Term>) -> bool {
        match (self, other) {
            (Term::Var(v), t) => match m.get(v) {
                Some(b) => b == t,
                None => {
                    m.insert(*v, t.clone());
                    true
                }
            },
            (Term::Fn(f, a), Term::Fn(g, b)) => {
                f == g && a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.match_into(y, m))
            }
            _ => false,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "y{v}"),
            Term::Fn(s, a) if a.is_empty() => write!(f, "{s}"),
            Term::Fn(Sym::Atom(c), a) if &**c == "." && a.len() == 2 => {
                write!(f, "[{}", a[0])?;
                let mut t = &a[1];
                loop {
                    match t {
                        Term::Fn(Sym::Atom(c), b) if &**c == "." && b.len() == 2 => {
                            write!(f, ",{}", b[0])?;
                            t = &b[1];
                        }
                        Term::Fn(Sym::Atom(c), b) if &**c == "[]" && b.is_empty() => break,
                        other => {
                            write!(f, "|{other}")?;
                            break;
                        }
                    }
                }
                f.write_str("]")
            }
            Term::Fn(s, a) => {
                write!(f, "{s}(")?;
                for (i, t) in a.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// An idempotent standard substitution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings {
    pub map: BTreeMap<u32, Term>,
}

impl Bindings {
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn walk<'a>(t: &'a Term, s: &'a BTreeMap<u32, Term>) -> &'a Term {
    let mut t = t;
    while let Term::Var(v) = t {
        match s.get(v) {
            Some(b) => t = b,
            None => break,
        }
    }
    t
}

fn resolve(t: &Term, s: &BTreeMap<u32, Term>) -> Term {
    match walk(t, s) {
        Term::Var(v) => Term::Var(*v),
        Term::Fn(f, a) => Term::Fn(f.clone(), a.iter().map(|x| resolve(x, s)).collect()),
    }
}

fn occurs_walk(v: u32, t: &Term, s: &BTreeMap<u32, Term>) -> bool {
    match walk(t, s) {
        Term::Var(w) => *w == v,
        Term::Fn(_, a) => a.iter().any(|x| occurs_walk(v, x, s)),
    }
}

/// Most general unifier of the pairs, with occur check.
pub fn mgu_all(pairs: &[(Term, Term)]) -> Option<Bindings> {
    let mut s: BTreeMap<u32, Term> = BTreeMap::new();
    let mut stack: Vec<(Term, Term)> = pairs.to_vec();
    while let Some((a, b)) = stack.pop() {
        let (a, b) = (walk(&a, &s).clone(), walk(&b, &s).clone());
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if occurs_walk(x, &t, &s) {
                    return None;
                }
                s.insert(x, t);
            }
            (Term::Fn(f, xs), Term::Fn(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                stack.extend(xs.into_iter().zip(ys));
            }
        }
    }
    let keys: Vec<u32> = s.keys().copied().collect();
    let map = keys.into_iter().map(|k| (k, resolve(&Term::Var(k), &s))).collect();
    Some(Bindings { map })
}

pub fn mgu(t1: &Term, t2: &Term) -> Option<Bindings> {
    mgu_all(&[(t1.clone(), t2.clone())])
}

/// A program substitution: `vals[i]` is the term bound to `x_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subst {
    pub vals: Vec<Term>,
}

impl Subst {
    pub fn new(vals: Vec<Term>) -> Self {
        Subst { vals }
    }

    pub fn get(&self, v: Var) -> &Term {
        &self.vals[v.ix()]
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn max_var(&self) -> u32 {
        self.vals.iter().map(Term::max_var).max().unwrap_or(0)
    }

    pub fn apply(&self, s: &Bindings) -> Subst {
        Subst { vals: self.vals.iter().map(|t| t.apply(s)).collect() }
    }

    /// Variables in first-occurrence order over x1, x2, ...
    pub fn vars(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for t in &self.vals {
            t.vars_into(&mut out);
        }
        out
    }

    /// `self` with every variable shifted above `offset`.
    pub fn shifted(&self, offset: u32) -> Subst {
        Subst { vals: self.vals.iter().map(|t| t.rename(&mut |v| v + offset)).collect() }
    }

    /// True if `self` is `other` instantiated by some substitution.
    pub fn is_instance_of(&self, other: &Subst) -> bool {
        let mut m = BTreeMap::new();
        self.vals.len() == other.vals.len() && other.vals.iter().zip(&self.vals).all(|(g, s)| g.match_into(s, &mut m))
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.vals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "x{}/{}", i + 1, t)?;
        }
        f.write_str("}")
    }
}

/// Renames the standard variables to y1, y2, ... in first-occurrence order.
pub fn canonicalize(theta: &Subst) -> Subst {
    let mut order: Vec<u32> = Vec::new();
    for t in &theta.vals {
        t.vars_into(&mut order);
    }
    let map: BTreeMap<u32, u32> = order.iter().enumerate().map(|(i, v)| (*v, i as u32 + 1)).collect();
    Subst { vals: theta.vals.iter().map(|t| t.rename(&mut |v| map[&v])).collect() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CutFlag {
    Cut,
    NoCut,
}

/// A finite or incomplete substitution sequence; an incomplete sequence
/// carries an implicit trailing ⊥.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Seq {
    pub items: Vec<Subst>,
    pub complete: bool,
}

impl Seq {
    pub fn empty() -> Self {
        Seq { items: Vec::new(), complete: true }
    }

    pub fn bottom() -> Self {
        Seq { items: Vec::new(), complete: false }
    }

    pub fn one(s: Subst) -> Self {
        Seq { items: vec![s], complete: true }
    }

    /// Number of substitutions.
    pub fn ns(&self) -> usize {
        self.items.len()
    }

    /// Number of elements, counting a trailing ⊥.
    pub fn ne(&self) -> usize {
        self.items.len() + usize::from(!self.complete)
    }

    /// `self □ other`: concatenation unless `self` is incomplete.
    pub fn concat(mut self, other: Seq) -> Seq {
        if self.complete {
            self.items.extend(other.items);
            self.complete = other.complete;
        }
        self
    }

    /// The ordering on sequences: equal, or `self` is an incomplete
    /// prefix of `other`.
    pub fn le(&self, other: &Seq) -> bool {
        if self == other {
            return true;
        }
        !self.complete && self.items.len() <= other.items.len() && other.items[..self.items.len()] == self.items[..]
    }
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, s) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        if !self.complete {
            if !self.items.is_empty() {
                f.write_str(", ")?;
            }
            f.write_str("⊥")?;
        }
        f.write_str(">")
    }
}

/// `⟨S1, cf⟩ □ S2`: drops `S2` after a cut.
pub fn concat_with_cut(s1: Seq, cf: CutFlag, s2: Seq) -> Seq {
    match cf {
        CutFlag::Cut => s1,
        CutFlag::NoCut => s1.concat(s2),
    }
}

/// Clause entry: adds fresh variables for x_{n+1}..x_m.
pub fn extc(var_count: usize, theta: &Subst) -> (Seq, CutFlag) {
    let base = theta.max_var();
    let mut vals = theta.vals.clone();
    for k in theta.len()..var_count {
        vals.push(Term::Var(base + 1 + (k - theta.len()) as u32));
    }
    (Seq::one(Subst::new(vals)), CutFlag::NoCut)
}

/// Clause exit: restricts to the first `arity` variables.
pub fn restrc(arity: usize, s: &Seq, cf: CutFlag) -> (Seq, CutFlag) {
    let items = s.items.iter().map(|t| canonicalize(&Subst::new(t.vals[..arity].to_vec()))).collect();
    (Seq { items, complete: s.complete }, cf)
}

/// Projection onto the literal's variables, renamed to x1..xr.
pub fn restrg(lit: &Literal, theta: &Subst) -> Subst {
    canonicalize(&Subst::new(lit.vars().iter().map(|v| theta.get(*v).clone()).collect()))
}

/// Propagates the answers `s` of a literal over `args` back into `theta`.
pub fn extg(args: &[Var], theta: &Subst, s: &Seq) -> Seq {
    let base = theta.max_var();
    let mut items = Vec::with_capacity(s.items.len());
    for out in &s.items {
        let out = out.shifted(base);
        let pairs: Vec<(Term, Term)> =
            args.iter().zip(&out.vals).map(|(v, t)| (theta.get(*v).clone(), t.clone())).collect();
        let sigma = mgu_all(&pairs).expect("call answers are instances of the call");
        items.push(theta.apply(&sigma));
    }
    Seq { items, complete: s.complete }
}

/// Unification literal over formal parameters: at most one answer.
pub fn unify(lit: &Literal, theta: &Subst) -> Seq {
    let sigma = match lit {
        Literal::UnifVar(a, b) => mgu(theta.get(*a), theta.get(*b)),
        Literal::UnifFunc { var, functor, args } => {
            let t = Term::Fn(functor.sym.clone(), args.iter().map(|v| theta.get(*v).clone()).collect());
            mgu(theta.get(*var), &t)
        }
        _ => panic!("not a unification literal: {lit}"),
    };
    match sigma {
        Some(s) => Seq::one(theta.apply(&s)),
        None => Seq::empty(),
    }
}
