//! Abstract substitutions: modes, term patterns (same-value and functor
//! information), pairwise possible sharing, and integer order constraints.
//!
//! A [`Pat`] describes program substitutions over `x1..xn`. Each variable is
//! mapped to an index; an index either carries a pattern `f(i1..ik)` or is a
//! leaf. Every index has a [`Mode`]. Two distinct leaves that are not listed
//! in `ps` denote terms without common variables. Indices mentioned in
//! `arith` denote integers satisfying the constraints.
//!
//! Values are kept in a canonical form (see [`canon`]) so that structural
//! equality can be used for table keys.

mod arith;
mod exclusive;
mod extg;
mod lattice;
mod work;

pub use arith::{Cons, Rhs};
pub use exclusive::exclusive;
pub use extg::extg;
pub use lattice::{cap, leq, union, widen};
pub use work::{builtin, unif_func, unif_var, Outcome};

use crate::ast::{Functor, Literal, Rel};
use crate::concrete::{Subst, Term};
use arith::System;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Subset of {ground, var, non-ground non-variable}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mode(u8);

impl Mode {
    pub const BOTTOM: Mode = Mode(0);
    pub const G: Mode = Mode(1);
    pub const V: Mode = Mode(2);
    pub const N: Mode = Mode(4);
    pub const GV: Mode = Mode(3);
    pub const NOVAR: Mode = Mode(5);
    pub const NOGROUND: Mode = Mode(6);
    pub const ANY: Mode = Mode(7);

    pub const ALL: [Mode; 8] =
        [Mode::BOTTOM, Mode::G, Mode::V, Mode::GV, Mode::N, Mode::NOVAR, Mode::NOGROUND, Mode::ANY];

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn has(self, m: Mode) -> bool {
        self.0 & m.0 == m.0
    }

    pub fn le(self, other: Mode) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn join(self, other: Mode) -> Mode {
        Mode(self.0 | other.0)
    }

    pub fn meet(self, other: Mode) -> Mode {
        Mode(self.0 & other.0)
    }

    pub fn is_bottom(self) -> bool {
        self.0 == 0
    }

    /// Some concretization may contain a variable.
    pub fn may_nonground(self) -> bool {
        self.0 & 6 != 0
    }

    pub fn of_term(t: &Term) -> Mode {
        match t {
            Term::Var(_) => Mode::V,
            t if t.is_ground() => Mode::G,
            _ => Mode::N,
        }
    }

    fn atoms(self) -> impl Iterator<Item = Mode> {
        [Mode::G, Mode::V, Mode::N].into_iter().filter(move |m| self.has(*m))
    }

    /// Possible modes of the common instance of two terms of modes `a`, `b`.
    pub fn unify(a: Mode, b: Mode) -> Mode {
        let mut out = Mode::BOTTOM;
        for x in a.atoms() {
            for y in b.atoms() {
                out = out.join(match (x, y) {
                    (Mode::G, _) | (_, Mode::G) => Mode::G,
                    (Mode::V, Mode::V) => Mode::V,
                    (Mode::N, Mode::N) => Mode::NOVAR,
                    _ => Mode::N,
                });
            }
        }
        out
    }

    /// Modes a term of mode `self` may have after further instantiation.
    pub fn instantiated(self) -> Mode {
        let mut out = Mode::BOTTOM;
        for x in self.atoms() {
            out = out.join(match x {
                Mode::G => Mode::G,
                Mode::V => Mode::ANY,
                _ => Mode::NOVAR,
            });
        }
        out
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            0 => "bottom",
            1 => "ground",
            2 => "var",
            3 => "gv",
            4 => "ngv",
            5 => "novar",
            6 => "noground",
            _ => "any",
        }
    }

    /// Short letter used in queries.
    pub fn letter(self) -> &'static str {
        match self.0 {
            0 => "bottom",
            1 => "g",
            2 => "v",
            3 => "gv",
            4 => "ngv",
            5 => "n",
            6 => "ng",
            _ => "a",
        }
    }

    pub fn from_name(s: &str) -> Option<Mode> {
        Some(match s {
            "g" | "ground" => Mode::G,
            "v" | "var" => Mode::V,
            "a" | "any" => Mode::ANY,
            "n" | "novar" | "nv" => Mode::NOVAR,
            "ng" | "noground" => Mode::NOGROUND,
            "ngv" => Mode::N,
            "gv" => Mode::GV,
            _ => return None,
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Functor pattern of an index.
pub type Frm = (Functor, Vec<u32>);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub mode: Mode,
    pub frm: Option<Frm>,
}

impl Node {
    pub fn leaf(mode: Mode) -> Node {
        Node { mode, frm: None }
    }
}

/// A non-empty abstract substitution.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pat {
    pub sv: Vec<u32>,
    pub nodes: Vec<Node>,
    /// Pairs `(i, j)`, `i < j`, of leaves that may share a variable.
    pub ps: BTreeSet<(u32, u32)>,
    pub arith: Vec<Cons>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbsSubst {
    Empty,
    Pat(Pat),
}

/// Tuning of the abstract domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AbsCfg {
    /// Pattern nesting bound applied by widening and call keys.
    pub depth: usize,
    /// Whether the arithmetic component is used.
    pub arith: bool,
}

impl Default for AbsCfg {
    fn default() -> Self {
        AbsCfg { depth: 3, arith: true }
    }
}

pub(crate) fn norm_pair(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Pat {
    pub fn dom(&self) -> usize {
        self.sv.len()
    }

    pub fn mode(&self, n: u32) -> Mode {
        self.nodes[n as usize].mode
    }

    pub fn frm(&self, n: u32) -> Option<&Frm> {
        self.nodes[n as usize].frm.as_ref()
    }

    pub fn var_mode(&self, x: usize) -> Mode {
        self.mode(self.sv[x])
    }

    /// Leaves reachable from `n` (including `n`) that may be non-ground.
    pub fn leaves_under(&self, n: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![n];
        let mut seen = vec![false; self.nodes.len()];
        while let Some(x) = stack.pop() {
            if std::mem::replace(&mut seen[x as usize], true) {
                continue;
            }
            match self.frm(x) {
                Some((_, cs)) => stack.extend(cs.iter().copied()),
                None if self.mode(x).may_nonground() => out.push(x),
                None => {}
            }
        }
        out.sort_unstable();
        out
    }

    pub fn pair_shares(&self, a: u32, b: u32) -> bool {
        a == b || self.ps.contains(&norm_pair(a, b))
    }

    /// The terms at `a` and `b` may have a common variable.
    pub fn share_star(&self, a: u32, b: u32) -> bool {
        let la = self.leaves_under(a);
        let lb = self.leaves_under(b);
        la.iter().any(|x| lb.iter().any(|y| self.pair_shares(*x, *y)))
    }

    pub fn int_nodes(&self) -> HashMap<u32, i64> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.frm.as_ref().and_then(|(f, _)| f.int_value()).map(|v| (i as u32, v)))
            .collect()
    }

    pub(crate) fn system(&self) -> System {
        System::build(&self.arith, &self.int_nodes()).expect("canonical constraints are consistent")
    }

    /// `n` denotes a known integer.
    pub fn is_int(&self, n: u32) -> bool {
        self.frm(n).is_some_and(|(f, _)| f.int_value().is_some())
            || self.arith.iter().any(|c| c.nodes().any(|x| x == n))
    }
}

impl AbsSubst {
    pub fn is_empty(&self) -> bool {
        matches!(self, AbsSubst::Empty)
    }

    pub fn pat(&self) -> Option<&Pat> {
        match self {
            AbsSubst::Empty => None,
            AbsSubst::Pat(p) => Some(p),
        }
    }

    /// Distinct leaves with the given modes and no sharing.
    pub fn from_modes(modes: &[Mode]) -> AbsSubst {
        canon(Pat {
            sv: (0..modes.len() as u32).collect(),
            nodes: modes.iter().map(|m| Node::leaf(*m)).collect(),
            ps: BTreeSet::new(),
            arith: Vec::new(),
        })
    }

    /// No information on `n` variables.
    pub fn top(n: usize) -> AbsSubst {
        let mut ps = BTreeSet::new();
        for i in 0..n as u32 {
            for j in i + 1..n as u32 {
                ps.insert((i, j));
            }
        }
        canon(Pat { sv: (0..n as u32).collect(), nodes: vec![Node::leaf(Mode::ANY); n], ps, arith: Vec::new() })
    }

    /// Adds variables up to `m`, each a fresh unshared variable.
    pub fn extc(&self, m: usize) -> AbsSubst {
        let AbsSubst::Pat(p) = self else { return AbsSubst::Empty };
        let mut p = p.clone();
        while p.sv.len() < m {
            p.sv.push(p.nodes.len() as u32);
            p.nodes.push(Node::leaf(Mode::V));
        }
        canon(p)
    }

    /// Keeps the first `n` variables.
    pub fn restrc(&self, n: usize) -> AbsSubst {
        let AbsSubst::Pat(p) = self else { return AbsSubst::Empty };
        let mut p = p.clone();
        p.sv.truncate(n);
        canon(p)
    }

    /// Restriction to the variables of `lit`, renamed to formals.
    pub fn restrg(&self, lit: &Literal) -> AbsSubst {
        let AbsSubst::Pat(p) = self else { return AbsSubst::Empty };
        let mut q = p.clone();
        q.sv = lit.vars().iter().map(|v| p.sv[v.ix()]).collect();
        canon(q)
    }

    pub fn without_arith(&self) -> AbsSubst {
        match self {
            AbsSubst::Empty => AbsSubst::Empty,
            AbsSubst::Pat(p) => {
                let mut q = p.clone();
                q.arith.clear();
                canon(q)
            }
        }
    }

    /// Table key for a call: constraints dropped and depth capped.
    pub fn call_key(&self, cfg: &AbsCfg) -> AbsSubst {
        cap(&self.without_arith(), cfg.depth)
    }

    /// Membership of a concrete substitution in the concretization.
    pub fn contains(&self, theta: &Subst) -> bool {
        match self {
            AbsSubst::Empty => false,
            AbsSubst::Pat(p) => contains(p, theta),
        }
    }

    /// `name(m1,...)` with patterns printed as terms.
    pub fn render(&self, name: &str) -> String {
        match self {
            AbsSubst::Empty => format!("{name}:bottom"),
            AbsSubst::Pat(p) if p.sv.is_empty() => name.to_string(),
            AbsSubst::Pat(p) => {
                let args: Vec<String> = p.sv.iter().map(|n| render_node(p, *n)).collect();
                format!("{name}({})", args.join(","))
            }
        }
    }
}

fn render_node(p: &Pat, n: u32) -> String {
    match p.frm(n) {
        None => p.mode(n).name().to_string(),
        Some((f, cs)) if f.is_cons() => {
            let mut s = format!("[{}", render_node(p, cs[0]));
            let mut tail = cs[1];
            loop {
                match p.frm(tail) {
                    Some((g, ds)) if g.is_cons() => {
                        s.push(',');
                        s.push_str(&render_node(p, ds[0]));
                        tail = ds[1];
                    }
                    Some((g, _)) if g.is_nil() => break,
                    _ => {
                        s.push('|');
                        s.push_str(&render_node(p, tail));
                        break;
                    }
                }
            }
            s.push(']');
            s
        }
        Some((f, cs)) if cs.is_empty() => f.sym.to_string(),
        Some((f, cs)) => {
            let args: Vec<String> = cs.iter().map(|c| render_node(p, *c)).collect();
            format!("{}({})", f.sym, args.join(","))
        }
    }
}

impl fmt::Display for AbsSubst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self {
            AbsSubst::Empty => return f.write_str("bottom"),
            AbsSubst::Pat(p) => p,
        };
        let vars: Vec<String> =
            p.sv.iter().enumerate().map(|(i, n)| format!("x{}:{}", i + 1, render_node(p, *n))).collect();
        write!(f, "{{{}}}", vars.join(", "))?;
        if !p.ps.is_empty() {
            let ps: Vec<String> = p.ps.iter().map(|(a, b)| format!("{a}~{b}")).collect();
            write!(f, " ps[{}]", ps.join(" "))?;
        }
        if !p.arith.is_empty() {
            let cs: Vec<String> = p
                .arith
                .iter()
                .map(|c| match c.b {
                    Rhs::Node(b) => format!("i{}{}i{}", c.a, c.rel.symbol(), b),
                    Rhs::Const(v) => format!("i{}{}{}", c.a, c.rel.symbol(), v),
                })
                .collect();
            write!(f, " ar[{}]", cs.join(" "))?;
        }
        Ok(())
    }
}

fn postorder(p: &Pat) -> Vec<u32> {
    fn go(p: &Pat, n: u32, seen: &mut [bool], out: &mut Vec<u32>) {
        if std::mem::replace(&mut seen[n as usize], true) {
            return;
        }
        if let Some((_, cs)) = &p.nodes[n as usize].frm {
            for c in cs {
                go(p, *c, seen, out);
            }
        }
        out.push(n);
    }
    let mut seen = vec![false; p.nodes.len()];
    let mut out = Vec::new();
    for &r in &p.sv {
        go(p, r, &mut seen, &mut out);
    }
    out
}

fn preorder(p: &Pat) -> Vec<u32> {
    fn go(p: &Pat, n: u32, seen: &mut [bool], out: &mut Vec<u32>) {
        if std::mem::replace(&mut seen[n as usize], true) {
            return;
        }
        out.push(n);
        if let Some((_, cs)) = &p.nodes[n as usize].frm {
            for c in cs {
                go(p, *c, seen, out);
            }
        }
    }
    let mut seen = vec![false; p.nodes.len()];
    let mut out = Vec::new();
    for &r in &p.sv {
        go(p, r, &mut seen, &mut out);
    }
    out
}

/// Normal form: modes made consistent with patterns (ground pushed down,
/// pattern modes derived from arguments), unreachable indices dropped,
/// sharing restricted to possibly non-ground leaves, constraints closed and
/// projected, indices renumbered in depth-first order from `x1`.
/// Returns `Empty` when the description is unsatisfiable.
pub(crate) fn canon(mut p: Pat) -> AbsSubst {
    for c in p.arith.clone() {
        for x in c.nodes() {
            let node = &mut p.nodes[x as usize];
            if let Some((f, _)) = &node.frm {
                if f.int_value().is_none() {
                    return AbsSubst::Empty;
                }
            }
            node.mode = node.mode.meet(Mode::G);
            if node.mode.is_bottom() {
                return AbsSubst::Empty;
            }
        }
    }
    let order = postorder(&p);
    loop {
        let mut changed = false;
        for &x in &order {
            let Some((_, cs)) = &p.nodes[x as usize].frm else { continue };
            let mut g = true;
            let mut ng = false;
            for c in cs {
                let m = p.nodes[*c as usize].mode;
                g &= m.has(Mode::G);
                ng |= m.may_nonground();
            }
            let derived = Mode((if g { 1 } else { 0 }) | (if ng { 4 } else { 0 }));
            let node = &mut p.nodes[x as usize];
            let m = node.mode.meet(derived).meet(Mode::NOVAR);
            if m != node.mode {
                node.mode = m;
                changed = true;
            }
        }
        for &x in order.iter().rev() {
            let node = &p.nodes[x as usize];
            if node.mode != Mode::G {
                continue;
            }
            let Some((_, cs)) = node.frm.clone() else { continue };
            for c in cs {
                let cm = &mut p.nodes[c as usize].mode;
                if *cm != cm.meet(Mode::G) {
                    *cm = cm.meet(Mode::G);
                    changed = true;
                }
            }
        }
        if order.iter().any(|x| p.nodes[*x as usize].mode.is_bottom()) {
            return AbsSubst::Empty;
        }
        if !changed {
            break;
        }
    }

    let mut reach = vec![false; p.nodes.len()];
    for &x in &order {
        reach[x as usize] = true;
    }
    let arith = if p.arith.is_empty() {
        Vec::new()
    } else {
        let ints = p.int_nodes();
        match System::build(&p.arith, &ints) {
            None => return AbsSubst::Empty,
            Some(sys) => sys.emit(|x| reach[x as usize], &ints),
        }
    };

    let pre = preorder(&p);
    let mut new_id = vec![u32::MAX; p.nodes.len()];
    for (i, &x) in pre.iter().enumerate() {
        new_id[x as usize] = i as u32;
    }
    let mut ps = BTreeSet::new();
    let leaves = |n: u32| -> Vec<u32> {
        if !reach[n as usize] {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut stack = vec![n];
        while let Some(x) = stack.pop() {
            match &p.nodes[x as usize].frm {
                Some((_, cs)) => stack.extend(cs.iter().copied()),
                None if p.nodes[x as usize].mode.may_nonground() => out.push(x),
                None => {}
            }
        }
        out
    };
    for &(a, b) in &p.ps {
        let lb = leaves(b);
        for x in leaves(a) {
            for &y in &lb {
                if x != y {
                    ps.insert(norm_pair(new_id[x as usize], new_id[y as usize]));
                }
            }
        }
    }
    let nodes = pre
        .iter()
        .map(|&x| {
            let n = &p.nodes[x as usize];
            Node {
                mode: n.mode,
                frm: n.frm.as_ref().map(|(f, cs)| (f.clone(), cs.iter().map(|c| new_id[*c as usize]).collect())),
            }
        })
        .collect();
    let mut arith: Vec<Cons> = arith
        .iter()
        .map(|c| {
            let c = c.map(|x| new_id[x as usize]);
            match c.b {
                Rhs::Node(b) if b < c.a => Cons { a: b, rel: c.rel.flip(), b: Rhs::Node(c.a) },
                _ => c,
            }
        })
        .collect();
    arith.sort();
    arith.dedup();
    AbsSubst::Pat(Pat { sv: p.sv.iter().map(|x| new_id[*x as usize]).collect(), nodes, ps, arith })
}

fn contains(p: &Pat, theta: &Subst) -> bool {
    if theta.len() != p.dom() {
        return false;
    }
    let mut val: Vec<Option<&Term>> = vec![None; p.nodes.len()];
    let mut stack: Vec<(u32, &Term)> = p.sv.iter().copied().zip(theta.vals.iter()).collect();
    while let Some((n, t)) = stack.pop() {
        if let Some(old) = val[n as usize] {
            if old != t {
                return false;
            }
            continue;
        }
        val[n as usize] = Some(t);
        if !p.mode(n).has(Mode::of_term(t)) {
            return false;
        }
        if let Some((f, cs)) = p.frm(n) {
            match t {
                Term::Fn(s, args) if *s == f.sym && args.len() == f.arity => {
                    stack.extend(cs.iter().copied().zip(args.iter()));
                }
                _ => return false,
            }
        }
    }
    let leaves: Vec<(u32, Vec<u32>)> = (0..p.nodes.len() as u32)
        .filter(|n| p.frm(*n).is_none())
        .filter_map(|n| {
            val[n as usize].map(|t| {
                let mut vs = Vec::new();
                t.vars_into(&mut vs);
                (n, vs)
            })
        })
        .collect();
    for (i, (a, va)) in leaves.iter().enumerate() {
        for (b, vb) in &leaves[i + 1..] {
            if !p.pair_shares(*a, *b) && va.iter().any(|v| vb.contains(v)) {
                return false;
            }
        }
    }
    let int = |n: u32| val[n as usize].and_then(|t| t.as_int());
    p.arith.iter().all(|c| {
        let Some(a) = int(c.a) else { return false };
        let b = match c.b {
            Rhs::Node(b) => match int(b) {
                Some(v) => v,
                None => return false,
            },
            Rhs::Const(v) => v,
        };
        c.rel.holds(a, b)
    })
}

/// Builds a single-pattern substitution: variable `i` gets `terms[i]`,
/// where a term variable `y_k` is a leaf of mode var shared by all its
/// occurrences. Integer leaves are literal patterns. Used by tests and
/// the report of worked examples.
pub fn from_terms(terms: &[Term]) -> AbsSubst {
    let mut nodes = Vec::new();
    let mut vars: HashMap<u32, u32> = HashMap::new();
    fn go(t: &Term, nodes: &mut Vec<Node>, vars: &mut HashMap<u32, u32>) -> u32 {
        match t {
            Term::Var(v) => *vars.entry(*v).or_insert_with(|| {
                nodes.push(Node::leaf(Mode::V));
                nodes.len() as u32 - 1
            }),
            Term::Fn(s, args) => {
                let cs: Vec<u32> = args.iter().map(|a| go(a, nodes, vars)).collect();
                let f = Functor { sym: s.clone(), arity: args.len() };
                nodes.push(Node { mode: Mode::NOVAR, frm: Some((f, cs)) });
                nodes.len() as u32 - 1
            }
        }
    }
    let sv = terms.iter().map(|t| go(t, &mut nodes, &mut vars)).collect();
    canon(Pat { sv, nodes, ps: BTreeSet::new(), arith: Vec::new() })
}

/// Adds a constraint between the indices of two variables (test helper).
pub fn with_constraint(b: &AbsSubst, x: usize, rel: Rel, y: Result<usize, i64>) -> AbsSubst {
    let AbsSubst::Pat(p) = b else { return AbsSubst::Empty };
    let mut q = p.clone();
    let rhs = match y {
        Ok(y) => Rhs::Node(p.sv[y]),
        Err(c) => Rhs::Const(c),
    };
    q.arith.push(Cons { a: p.sv[x], rel, b: rhs });
    canon(q)
}
