//! Abstract unification on a mutable union-find copy of a pattern, and the
//! built-in literals expressed on top of it.

use super::arith::{Cons, Rhs, System};
use super::{canon, norm_pair, AbsCfg, AbsSubst, Mode, Node, Pat};
use crate::ast::{ArithOp, Expr, Functor, Literal, Operand, Rel, TypeTestKind};
use std::collections::BTreeSet;

/// Result of an abstract unification or built-in: the success description
/// and the "surely succeeds" / "surely fails" flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub beta: AbsSubst,
    pub ss: bool,
    pub sf: bool,
}

impl Outcome {
    fn new(beta: AbsSubst, ss: bool) -> Outcome {
        if beta.is_empty() {
            Outcome { beta, ss: false, sf: true }
        } else {
            Outcome { beta, ss, sf: false }
        }
    }

    fn fail() -> Outcome {
        Outcome { beta: AbsSubst::Empty, ss: false, sf: true }
    }
}

pub(crate) struct Work {
    parent: Vec<u32>,
    nodes: Vec<Node>,
    ps: Vec<(u32, u32)>,
    arith: Vec<Cons>,
    sv: Vec<u32>,
    failed: bool,
}

/// Mode of a term after one of its variables is bound to a term that is
/// ground (`allground`) or of unknown groundness.
pub(crate) fn bind_effect(m: Mode, allground: bool) -> Mode {
    let mut add = Mode::BOTTOM;
    if m.has(Mode::V) {
        add = add.join(if allground { Mode::G } else { Mode::NOVAR });
    }
    if m.has(Mode::N) {
        add = add.join(Mode::G);
    }
    m.join(add)
}

impl Work {
    pub fn new(p: &Pat) -> Work {
        let nodes = p
            .nodes
            .iter()
            .map(|n| match n.frm {
                Some(_) if n.mode != Mode::G => Node { mode: Mode::NOVAR, frm: n.frm.clone() },
                _ => n.clone(),
            })
            .collect();
        Work {
            parent: (0..p.nodes.len() as u32).collect(),
            nodes,
            ps: p.ps.iter().copied().collect(),
            arith: p.arith.clone(),
            sv: p.sv.clone(),
            failed: false,
        }
    }

    pub fn find(&self, mut n: u32) -> u32 {
        while self.parent[n as usize] != n {
            n = self.parent[n as usize];
        }
        n
    }

    pub fn var(&self, x: usize) -> u32 {
        self.find(self.sv[x])
    }

    pub fn leaf(&mut self, mode: Mode) -> u32 {
        self.nodes.push(Node::leaf(mode));
        self.parent.push(self.nodes.len() as u32 - 1);
        self.nodes.len() as u32 - 1
    }

    pub fn frm(&mut self, f: Functor, args: Vec<u32>) -> u32 {
        let mode = if args.is_empty() { Mode::G } else { Mode::NOVAR };
        self.nodes.push(Node { mode, frm: Some((f, args)) });
        self.parent.push(self.nodes.len() as u32 - 1);
        self.nodes.len() as u32 - 1
    }

    fn children(&self, n: u32) -> Option<Vec<u32>> {
        self.nodes[n as usize].frm.as_ref().map(|(_, cs)| cs.iter().map(|c| self.find(*c)).collect())
    }

    /// Current mode of a representative; patterns derive theirs.
    pub fn mode(&self, n: u32) -> Mode {
        let node = &self.nodes[n as usize];
        match self.children(n) {
            None => node.mode,
            Some(cs) => {
                let mut g = true;
                let mut ng = false;
                for c in cs {
                    let m = self.mode(c);
                    g &= m.has(Mode::G);
                    ng |= m.may_nonground();
                }
                let mut d = Mode::BOTTOM;
                if g {
                    d = d.join(Mode::G);
                }
                if ng {
                    d = d.join(Mode::N);
                }
                node.mode.meet(d)
            }
        }
    }

    fn all_leaves(&self, n: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![self.find(n)];
        while let Some(x) = stack.pop() {
            match self.children(x) {
                Some(cs) => stack.extend(cs),
                None => {
                    if !out.contains(&x) {
                        out.push(x)
                    }
                }
            }
        }
        out
    }

    fn ng_leaves(&self, n: u32) -> Vec<u32> {
        self.all_leaves(n).into_iter().filter(|l| self.nodes[*l as usize].mode.may_nonground()).collect()
    }

    /// Strict descendant test on representatives.
    fn below(&self, a: u32, b: u32) -> bool {
        let mut stack = self.children(b).unwrap_or_default();
        let mut steps = 0;
        while let Some(x) = stack.pop() {
            if x == a {
                return true;
            }
            steps += 1;
            if steps > 100_000 {
                break;
            }
            if let Some(cs) = self.children(x) {
                stack.extend(cs);
            }
        }
        false
    }

    /// Sharing pairs between current non-ground leaves.
    fn pairs(&self) -> BTreeSet<(u32, u32)> {
        let mut out = BTreeSet::new();
        for &(a, b) in &self.ps {
            let lb = self.ng_leaves(b);
            for x in self.ng_leaves(a) {
                for &y in &lb {
                    if x != y {
                        out.insert(norm_pair(x, y));
                    }
                }
            }
        }
        out
    }

    fn sharers(pairs: &BTreeSet<(u32, u32)>, l: u32) -> Vec<u32> {
        pairs
            .iter()
            .filter_map(|&(a, b)| {
                if a == l {
                    Some(b)
                } else if b == l {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    fn share_star(&self, pairs: &BTreeSet<(u32, u32)>, a: u32, b: u32) -> bool {
        let lb = self.ng_leaves(b);
        self.ng_leaves(a).iter().any(|x| lb.iter().any(|y| x == y || pairs.contains(&norm_pair(*x, *y))))
    }

    fn add_ps(&mut self, a: u32, b: u32) {
        if a != b {
            self.ps.push(norm_pair(a, b));
        }
    }

    fn all_pairs(&mut self, set: &[u32]) {
        for (i, a) in set.iter().enumerate() {
            for b in &set[i + 1..] {
                self.add_ps(*a, *b);
            }
        }
    }

    pub fn meet(&mut self, n: u32, m: Mode) {
        let n = self.find(n);
        let node = &mut self.nodes[n as usize];
        if node.frm.is_some() {
            if !m.has(Mode::N) && !m.has(Mode::G) {
                self.failed = true;
            } else if !m.has(Mode::N) {
                node.mode = Mode::G;
            }
        } else {
            node.mode = node.mode.meet(m);
            if node.mode.is_bottom() {
                self.failed = true;
            }
        }
    }

    /// Unifies the terms at `a` and `b`; returns the "surely succeeds" flag.
    /// A certain failure sets the failed state.
    pub fn unify(&mut self, a: u32, b: u32) -> bool {
        let mut ss = true;
        let mut stack = vec![(a, b)];
        while let Some((a, b)) = stack.pop() {
            if self.failed {
                return false;
            }
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            if self.below(a, b) || self.below(b, a) {
                self.failed = true;
                return false;
            }
            let fa = self.nodes[a as usize].frm.clone();
            let fb = self.nodes[b as usize].frm.clone();
            match (fa, fb) {
                (Some((f, ca)), Some((g, cb))) => {
                    if f != g {
                        self.failed = true;
                        return false;
                    }
                    let ground = self.nodes[a as usize].mode == Mode::G || self.nodes[b as usize].mode == Mode::G;
                    self.parent[a as usize] = b;
                    self.nodes[b as usize].mode = if ground { Mode::G } else { Mode::NOVAR };
                    stack.extend(ca.into_iter().zip(cb));
                }
                (Some(_), None) => self.leaf_to_frm(b, a, &mut ss),
                (None, Some(_)) => self.leaf_to_frm(a, b, &mut ss),
                (None, None) => self.leaf_leaf(a, b, &mut ss),
            }
        }
        !self.failed && ss
    }

    fn leaf_to_frm(&mut self, l: u32, f: u32, ss: &mut bool) {
        let ml = self.nodes[l as usize].mode;
        let pairs = self.pairs();
        if ml == Mode::V {
            if self.share_star(&pairs, f, l) {
                *ss = false;
            }
            let sh = Self::sharers(&pairs, l);
            let fg = self.mode(f) == Mode::G;
            let fl = self.ng_leaves(f);
            self.parent[l as usize] = f;
            for d in sh {
                let m = self.nodes[d as usize].mode;
                self.nodes[d as usize].mode = bind_effect(m, fg);
                for &u in &fl {
                    self.add_ps(d, u);
                }
            }
            return;
        }
        *ss = false;
        let leaves = self.all_leaves(f);
        let mut touched: Vec<u32> = Self::sharers(&pairs, l);
        for &u in &leaves {
            touched.extend(Self::sharers(&pairs, u));
        }
        touched.retain(|d| *d != l && !leaves.contains(d));
        touched.sort_unstable();
        touched.dedup();
        let mut ms = Mode::BOTTOM;
        if ml.has(Mode::G) {
            ms = ms.join(Mode::G);
        }
        if ml.has(Mode::N) {
            ms = Mode::ANY;
        }
        let keep = ml.has(Mode::V);
        self.parent[l as usize] = f;
        for &u in &leaves {
            let old = self.nodes[u as usize].mode;
            let new = Mode::unify(old, ms).join(if keep { old } else { Mode::BOTTOM });
            self.nodes[u as usize].mode = new;
            if new.is_bottom() {
                self.failed = true;
            }
        }
        if ml == Mode::G {
            self.nodes[f as usize].mode = Mode::G;
        }
        let allg = self.mode(f) == Mode::G;
        for &d in &touched {
            let m = self.nodes[d as usize].mode;
            self.nodes[d as usize].mode = bind_effect(m, allg);
        }
        if !allg {
            let mut set = self.ng_leaves(f);
            set.extend(touched);
            self.all_pairs(&set);
        }
    }

    fn leaf_leaf(&mut self, a: u32, b: u32, ss: &mut bool) {
        let (ma, mb) = (self.nodes[a as usize].mode, self.nodes[b as usize].mode);
        if ma == Mode::V && mb == Mode::V {
            self.parent[a as usize] = b;
            return;
        }
        let pairs = self.pairs();
        if ma == Mode::V || mb == Mode::V {
            let (v, t) = if ma == Mode::V { (a, b) } else { (b, a) };
            if pairs.contains(&norm_pair(v, t)) {
                *ss = false;
            }
            let tg = self.nodes[t as usize].mode == Mode::G;
            let sh: Vec<u32> = Self::sharers(&pairs, v).into_iter().filter(|d| *d != t).collect();
            self.parent[v as usize] = t;
            for d in sh {
                let m = self.nodes[d as usize].mode;
                self.nodes[d as usize].mode = bind_effect(m, tg);
                if !tg {
                    self.add_ps(d, t);
                }
            }
            return;
        }
        *ss = false;
        let m = Mode::unify(ma, mb);
        let mut touched: Vec<u32> = Self::sharers(&pairs, a);
        touched.extend(Self::sharers(&pairs, b));
        touched.retain(|d| *d != a && *d != b);
        touched.sort_unstable();
        touched.dedup();
        self.parent[a as usize] = b;
        self.nodes[b as usize].mode = m;
        if m.is_bottom() {
            self.failed = true;
            return;
        }
        let allg = m == Mode::G;
        for &d in &touched {
            let dm = self.nodes[d as usize].mode;
            self.nodes[d as usize].mode = bind_effect(dm, allg);
        }
        if !allg {
            touched.push(b);
            self.all_pairs(&touched);
        }
    }

    pub fn constrain(&mut self, c: Cons) {
        self.arith.push(c);
    }

    pub fn finish(self) -> AbsSubst {
        if self.failed {
            return AbsSubst::Empty;
        }
        let nodes = self
            .nodes
            .iter()
            .map(|n| Node {
                mode: n.mode,
                frm: n.frm.as_ref().map(|(f, cs)| (f.clone(), cs.iter().map(|c| self.find(*c)).collect())),
            })
            .collect();
        let pairs = self.pairs();
        let arith = self.arith.iter().map(|c| c.map(|x| self.find(x))).collect();
        canon(Pat { sv: self.sv.iter().map(|x| self.find(*x)).collect(), nodes, ps: pairs, arith })
    }
}

/// `x1 = x2` over a two-variable substitution.
pub fn unif_var(b: &AbsSubst) -> Outcome {
    let AbsSubst::Pat(p) = b else { return Outcome::fail() };
    let mut w = Work::new(p);
    let ss = w.unify(w.var(0), w.var(1));
    Outcome::new(w.finish(), ss)
}

/// `x1 = f(x2..xn)`.
pub fn unif_func(f: &Functor, b: &AbsSubst) -> Outcome {
    let AbsSubst::Pat(p) = b else { return Outcome::fail() };
    let mut w = Work::new(p);
    let args: Vec<u32> = (1..p.dom()).map(|i| w.var(i)).collect();
    let t = w.frm(f.clone(), args);
    let ss = w.unify(w.var(0), t);
    Outcome::new(w.finish(), ss)
}

/// Type tests and arithmetic literals, given over their formals.
pub fn builtin(lit: &Literal, b: &AbsSubst, cfg: &AbsCfg) -> Outcome {
    let AbsSubst::Pat(p) = b else { return Outcome::fail() };
    match lit {
        Literal::TypeTest { kind, .. } => type_test(*kind, p),
        Literal::ArithTest { rel, lhs, rhs } => arith_test(*rel, *lhs, *rhs, p, cfg),
        Literal::ArithEval { expr, .. } => arith_eval(expr, p, cfg),
        Literal::UnifVar(..) => unif_var(b),
        Literal::UnifFunc { functor, .. } => unif_func(functor, b),
        Literal::Call { .. } | Literal::Cut => panic!("not a built-in: {lit}"),
    }
}

fn type_test(kind: TypeTestKind, p: &Pat) -> Outcome {
    let m = p.var_mode(0);
    let (keep, ss, sf) = match kind {
        TypeTestKind::Var => (Mode::V, m == Mode::V, !m.has(Mode::V)),
        TypeTestKind::Ground => (Mode::G, m == Mode::G, !m.has(Mode::G)),
        TypeTestKind::NoVar => (Mode::NOVAR, !m.has(Mode::V), m == Mode::V),
    };
    if sf {
        return Outcome::fail();
    }
    let mut w = Work::new(p);
    w.meet(w.var(0), keep);
    Outcome::new(w.finish(), ss)
}

enum Val {
    Int(i64),
    Node(u32),
}

fn operand(p: &Pat, o: Operand, next: &mut usize) -> Option<Val> {
    match o {
        Operand::Const(c) => Some(Val::Int(c)),
        Operand::Var(_) => {
            let n = p.sv[*next];
            *next += 1;
            if !p.mode(n).has(Mode::G) {
                return None;
            }
            match p.frm(n) {
                Some((f, _)) => f.int_value().map(Val::Int),
                None => Some(Val::Node(n)),
            }
        }
    }
}

fn arith_test(rel: Rel, lhs: Operand, rhs: Operand, p: &Pat, cfg: &AbsCfg) -> Outcome {
    let mut next = 0;
    let (Some(a), Some(b)) = (operand(p, lhs, &mut next), operand(p, rhs, &mut next)) else {
        return Outcome::fail();
    };
    let cons = match (a, b) {
        (Val::Int(x), Val::Int(y)) => {
            return if rel.holds(x, y) { Outcome::new(AbsSubst::Pat(p.clone()), true) } else { Outcome::fail() };
        }
        (Val::Node(x), Val::Int(c)) => Cons { a: x, rel, b: Rhs::Const(c) },
        (Val::Int(c), Val::Node(y)) => Cons { a: y, rel: rel.flip(), b: Rhs::Const(c) },
        (Val::Node(x), Val::Node(y)) => Cons { a: x, rel, b: Rhs::Node(y) },
    };
    let mut w = Work::new(p);
    for n in cons.nodes() {
        w.meet(n, Mode::G);
    }
    if !cfg.arith {
        return Outcome::new(w.finish(), false);
    }
    let ints = p.int_nodes();
    let known = cons.nodes().all(|n| p.is_int(n));
    if known && p.system().entails(&cons) {
        return Outcome::new(AbsSubst::Pat(p.clone()), true);
    }
    let mut all = p.arith.clone();
    all.push(cons);
    if System::build(&all, &ints).is_none() {
        return Outcome::fail();
    }
    w.constrain(cons);
    Outcome::new(w.finish(), false)
}

/// Relation of `target` to `j` implied by `target is expr`, when `expr`
/// is `j`, `j + c`, `c + j` or `j - c`.
fn eval_relation(expr: &Expr) -> Option<(crate::ast::Var, Rel)> {
    let sign = |c: i64| match c.signum() {
        1 => Rel::Gt,
        -1 => Rel::Lt,
        _ => Rel::Eq,
    };
    match expr {
        Expr::Var(j) => Some((*j, Rel::Eq)),
        Expr::Bin(ArithOp::Add, a, b) => match (a.as_ref(), b.as_ref()) {
            (Expr::Var(j), Expr::Const(c)) | (Expr::Const(c), Expr::Var(j)) => Some((*j, sign(*c))),
            _ => None,
        },
        Expr::Bin(ArithOp::Sub, a, b) => match (a.as_ref(), b.as_ref()) {
            (Expr::Var(j), Expr::Const(c)) => Some((*j, sign(-*c))),
            _ => None,
        },
        _ => None,
    }
}

fn arith_eval(expr: &Expr, p: &Pat, cfg: &AbsCfg) -> Outcome {
    let mut vars = Vec::new();
    expr.vars(&mut vars);
    let mut w = Work::new(p);
    let mut all_ground = true;
    for v in &vars {
        let n = p.sv[v.ix()];
        let m = p.mode(n);
        if !m.has(Mode::G) || p.frm(n).is_some_and(|(f, _)| f.int_value().is_none()) {
            return Outcome::fail();
        }
        all_ground &= m == Mode::G;
        w.meet(n, Mode::G);
    }
    let folded = if cfg.arith {
        let lookup = |v: crate::ast::Var| p.frm(p.sv[v.ix()]).and_then(|(f, _)| f.int_value());
        if vars.iter().all(|v| lookup(*v).is_some()) {
            match expr.eval(&lookup) {
                Some(v) => Some(v),
                None => return Outcome::fail(),
            }
        } else {
            None
        }
    } else {
        None
    };
    let value = match folded {
        Some(v) => w.frm(Functor::int(v), Vec::new()),
        None => w.leaf(Mode::G),
    };
    let ok = w.unify(w.var(0), value);
    if cfg.arith && folded.is_none() {
        if let Some((j, rel)) = eval_relation(expr) {
            w.constrain(Cons { a: value, rel, b: Rhs::Node(p.sv[j.ix()]) });
        } else {
            w.constrain(Cons { a: value, rel: Rel::Eq, b: Rhs::Node(value) });
        }
    }
    Outcome::new(w.finish(), ok && all_ground)
}
