//! Checks an analysis against the bounded concrete interpreter: every
//! concrete input described by a query's entry pattern is run for
//! `k = 1..=K` and the result must lie in the concretization of the
//! computed abstract sequence.
//!
//! A complete `tcb_k` result is the full answer sequence and must be a
//! member. An incomplete result is only a prefix of the eventual answer,
//! so it is checked against the domain's prefix condition instead.

use super::{Analysis, Domain, Query};
use crate::ast::{Clause, Expr, Literal, Operand, Program, Sym};
use crate::concrete::{Interpreter, Seq, Subst, Term};
use crate::par;
use serde::Serialize;
use std::collections::BTreeSet;

/// Term-generation bounds for concrete inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    pub constants: Vec<Term>,
    /// Functor names with their arities.
    pub functors: Vec<(String, usize)>,
    /// Maximal term depth; constants have depth 1.
    pub depth: usize,
    /// Inputs per query above which a deterministic stride sample is taken.
    pub max_inputs: usize,
}

impl Universe {
    pub fn new(constants: Vec<Term>, functors: Vec<(String, usize)>, depth: usize) -> Universe {
        Universe { constants, functors, depth, max_inputs: usize::MAX }
    }

    /// Universe built from the symbols of `prog`: its constants plus `[]`
    /// (and `0`, `1` when it does arithmetic), its functors (at least the
    /// list constructor), depth 3.
    pub fn for_program(prog: &Program) -> Universe {
        let mut consts: BTreeSet<Term> = BTreeSet::new();
        let mut functors: BTreeSet<(String, usize)> = BTreeSet::new();
        let mut arith = false;
        consts.insert(Term::atom("[]"));
        functors.insert((".".to_string(), 2));
        for (_, cs) in &prog.procs {
            for c in cs {
                arith |= collect(c, &mut consts, &mut functors);
            }
        }
        if arith {
            consts.insert(Term::int(0));
            consts.insert(Term::int(1));
        }
        Universe {
            constants: consts.into_iter().collect(),
            functors: functors.into_iter().collect(),
            depth: 3,
            max_inputs: 1_000_000,
        }
    }

    /// All terms up to the depth bound; with `var`, a variable may occur
    /// at any leaf. Variables are all `Var(0)` here and renamed apart when
    /// an input is assembled.
    pub fn terms(&self, var: bool) -> Vec<Term> {
        let mut leaves = self.constants.clone();
        if var {
            leaves.push(Term::Var(0));
        }
        let mut level = leaves.clone();
        for _ in 1..self.depth {
            let mut next = leaves.clone();
            for (f, n) in &self.functors {
                for args in product(&vec![level.as_slice(); *n]) {
                    next.push(Term::app(f, args));
                }
            }
            level = next;
        }
        level
    }
}

fn collect(c: &Clause, consts: &mut BTreeSet<Term>, functors: &mut BTreeSet<(String, usize)>) -> bool {
    let mut arith = false;
    for lit in &c.body {
        match lit {
            Literal::UnifFunc { functor, args, .. } => {
                if args.is_empty() {
                    consts.insert(Term::Fn(functor.sym.clone(), Vec::new()));
                } else if let Sym::Atom(a) = &functor.sym {
                    functors.insert((a.to_string(), args.len()));
                }
            }
            Literal::ArithTest { lhs, rhs, .. } => {
                arith = true;
                operand_consts(lhs, consts);
                operand_consts(rhs, consts);
            }
            Literal::ArithEval { expr, .. } => {
                arith = true;
                expr_consts(expr, consts);
            }
            _ => {}
        }
    }
    arith
}

fn operand_consts(o: &Operand, consts: &mut BTreeSet<Term>) {
    if let Operand::Const(v) = o {
        consts.insert(Term::int(*v));
    }
}

fn expr_consts(e: &Expr, consts: &mut BTreeSet<Term>) {
    match e {
        Expr::Var(_) => {}
        Expr::Const(v) => {
            consts.insert(Term::int(*v));
        }
        Expr::Neg(a) => expr_consts(a, consts),
        Expr::Bin(_, a, b) => {
            expr_consts(a, consts);
            expr_consts(b, consts);
        }
    }
}

/// Cartesian product of the given choice lists.
fn product<T: Clone>(lists: &[&[T]]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for l in lists {
        out = out
            .iter()
            .flat_map(|pre| {
                l.iter().map(move |x| {
                    let mut v = pre.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

fn rename_apart(t: &Term, next: &mut u32) -> Term {
    match t {
        Term::Var(_) => {
            *next += 1;
            Term::Var(*next)
        }
        Term::Fn(f, a) => Term::Fn(f.clone(), a.iter().map(|x| rename_apart(x, next)).collect()),
    }
}

/// Concrete inputs for `q` described by `beta`, and whether the list is
/// the whole enumeration rather than a sample.
pub fn inputs<D: Domain>(dom: &D, beta: &D::Subst, q: &Query, u: &Universe) -> (Vec<Subst>, bool) {
    let ground = u.terms(false);
    let open = u.terms(true);
    let choices: Vec<Vec<Term>> = q
        .modes
        .iter()
        .map(|m| {
            let pool = if m.may_nonground() { &open } else { &ground };
            pool.iter().filter(|t| crate::absdom::Mode::of_term(t).le(*m)).cloned().collect()
        })
        .collect();
    let total = choices.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len())).unwrap_or(usize::MAX);
    let step = if total > u.max_inputs { total.div_ceil(u.max_inputs.max(1)) } else { 1 };
    let mut out = Vec::new();
    let mut ix = 0usize;
    while ix < total {
        let mut rest = ix;
        let mut next = 0u32;
        let mut vals = Vec::with_capacity(choices.len());
        for c in choices.iter().rev() {
            vals.push(rename_apart(&c[rest % c.len()], &mut next));
            rest /= c.len();
        }
        vals.reverse();
        let theta = Subst::new(vals);
        if dom.admits_input(beta, &theta) {
            out.push(theta);
        }
        ix = match ix.checked_add(step) {
            Some(i) => i,
            None => break,
        };
    }
    (out, step == 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub input: String,
    pub k: usize,
    pub concrete: String,
    #[serde(rename = "abstract")]
    pub abstract_: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SafetyReport {
    pub query: String,
    pub inputs: usize,
    /// Number of `(input, k)` pairs compared.
    pub checks: usize,
    /// Pairs skipped because the concrete run raised an error.
    pub skipped: usize,
    pub exhaustive: bool,
    pub violations: Vec<Violation>,
}

impl SafetyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct SafetyConfig {
    /// Largest oracle depth `K`.
    pub depth: usize,
    pub universe: Option<Universe>,
    pub parallel: bool,
}

impl Default for SafetyConfig {
    fn default() -> Self {
        SafetyConfig { depth: 6, universe: None, parallel: true }
    }
}

/// Runs the oracle for each query against its root entry in `an`, which
/// must come from analyzing `queries` in this order.
pub fn check_safety<D: Domain>(
    prog: &Program,
    dom: &D,
    an: &Analysis<D>,
    queries: &[Query],
    cfg: &SafetyConfig,
) -> Vec<SafetyReport> {
    let u = cfg.universe.clone().unwrap_or_else(|| Universe::for_program(prog));
    queries
        .iter()
        .enumerate()
        .map(|(qi, q)| {
            let root = an.root(qi);
            let (thetas, exhaustive) = inputs(dom, &root.input, q, &u);
            let results = par::map_with(
                &thetas,
                cfg.parallel,
                || Interpreter::new(prog),
                |it, theta| {
                    if it.memo_len() > MEMO_LIMIT {
                        it.clear_memo();
                    }
                    check_one(it, dom, &root.output, q, theta, cfg.depth)
                },
            );
            let mut rep = SafetyReport {
                query: q.to_string(),
                inputs: thetas.len(),
                checks: 0,
                skipped: 0,
                exhaustive,
                violations: Vec::new(),
            };
            for (checks, skipped, vs) in results {
                rep.checks += checks;
                rep.skipped += skipped;
                rep.violations.extend(vs);
            }
            rep
        })
        .collect()
}

/// Memo size at which a worker's interpreter starts afresh.
const MEMO_LIMIT: usize = 200_000;

fn check_one<D: Domain>(
    it: &Interpreter<'_>,
    dom: &D,
    out: &D::Seq,
    q: &Query,
    theta: &Subst,
    depth: usize,
) -> (usize, usize, Vec<Violation>) {
    let (mut checks, mut skipped, mut vs) = (0, 0, Vec::new());
    for k in 1..=depth {
        let s: Seq = match it.tcb(&q.pred, theta, k) {
            Ok(s) => s,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let ok = if s.complete { dom.admits(out, &s) } else { dom.admits_prefix(out, &s) };
        if !ok {
            vs.push(Violation {
                input: theta.to_string(),
                k,
                concrete: s.to_string(),
                abstract_: dom.render(&q.pred.name, out),
            });
        }
        if s.complete {
            // iterates increase and a complete sequence is maximal, so the
            // deeper runs return this same sequence
            checks += depth - k + 1;
            break;
        }
        checks += 1;
    }
    (checks, skipped, vs)
}
