//! Soundness of the abstract substitution operations against concrete
//! unification and built-ins.
//!
//! Every check runs on the witnesses of a generated description and on
//! renamings of them (descriptions with mode `var` are not closed under
//! instantiation). An outcome is read as: success results are in the
//! computed description, `ss` means every input succeeds and `sf` means
//! none does.

use super::config;
use crate::common::gen::{self, WBeta};
use prolog_card::absdom::{self, AbsCfg};
use prolog_card::ast::{ArithOp, Expr, Functor, Literal, Operand, Rel, TypeTestKind, Var};
use prolog_card::concrete::{mgu, Bindings, Subst, Term};
use proptest::prelude::*;
use std::collections::BTreeMap;

/// A permutation of the variables 1..4 onto 5..8.
fn inst() -> impl Strategy<Value = Bindings> {
    Just((5u32..9).collect::<Vec<_>>()).prop_shuffle().prop_map(|vs| Bindings {
        map: vs.into_iter().enumerate().map(|(i, v)| (i as u32 + 1, Term::Var(v))).collect::<BTreeMap<_, _>>(),
    })
}

/// The witnesses and their renamings under `sigma`.
fn inputs(w: &WBeta, sigma: &Bindings) -> Vec<Subst> {
    w.members.iter().flat_map(|m| [m.clone(), m.apply(sigma)]).collect()
}

const RELS: [Rel; 6] = [Rel::Lt, Rel::Le, Rel::Eq, Rel::Ne, Rel::Ge, Rel::Gt];

fn rel() -> impl Strategy<Value = Rel> {
    prop::sample::select(&RELS[..])
}

fn ints(t: &Term) -> Option<i64> {
    t.as_int()
}

/// A description whose first two variables are integers, constrained
/// by a relation that all the witnesses satisfy when there is one.
fn warith() -> impl Strategy<Value = WBeta> {
    (prop::collection::vec((0i64..4, 0i64..4, gen::term()), 1..4), rel()).prop_map(|(rows, r)| {
        let members: Vec<Subst> =
            rows.iter().map(|(a, b, t)| Subst::new(vec![Term::int(*a), Term::int(*b), t.clone()])).collect();
        let mut beta =
            members.iter().map(|m| absdom::from_terms(&m.vals)).reduce(|a, b| absdom::union(&a, &b)).unwrap();
        if rows.iter().all(|(a, b, _)| r.holds(*a, *b)) {
            beta = absdom::with_constraint(&beta, 0, r, Ok(1));
        }
        WBeta { beta, members }
    })
}

fn any_beta3() -> impl Strategy<Value = WBeta> {
    prop_oneof![gen::wbeta(3), warith()]
}

fn expr() -> impl Strategy<Value = Expr> {
    let op = prop::sample::select(&[ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div, ArithOp::Mod][..]);
    let v = |i: u32| Box::new(Expr::Var(Var(i)));
    prop_oneof![
        (-2i64..3).prop_map(Expr::Const),
        Just(Expr::Var(Var(2))),
        op.clone().prop_map(move |o| Expr::Bin(o, v(2), v(3))),
        (op, -2i64..3).prop_map(move |(o, c)| Expr::Bin(o, v(2), Box::new(Expr::Const(c)))),
    ]
}

/// Literal over formals `x1..`, in the order the literal lists them.
fn eval_lit(e: &Expr) -> Literal {
    Literal::ArithEval { target: Var(1), expr: e.clone() }
}

/// Descriptions are closed under renaming.
pub fn members_and_renamings_are_contained(cases: u32) {
    proptest!(config(cases), |(w in any_beta3(), sigma in inst())| {
        for th in inputs(&w, &sigma) {
            prop_assert!(w.beta.contains(&th), "{:?} not in {}", th, w.beta.render("p"));
        }
    });
}

pub fn unif_var_is_sound(cases: u32) {
    proptest!(config(cases), |(w in gen::wbeta(2), sigma in inst())| {
        let out = absdom::unif_var(&w.beta);
        for th in inputs(&w, &sigma) {
            match mgu(&th.vals[0], &th.vals[1]) {
                Some(b) => {
                    prop_assert!(!out.sf);
                    prop_assert!(out.beta.contains(&th.apply(&b)), "{:?} lost", th);
                }
                None => prop_assert!(!out.ss, "{:?} fails", th),
            }
        }
    });
}

pub fn unif_func_is_sound(cases: u32) {
    proptest!(config(cases), |(w in prop_oneof![gen::wbeta(2), gen::wbeta(3)], sigma in inst())| {
        let n = w.beta.pat().map_or(0, |p| p.dom());
        prop_assume!(n > 0);
        let f = if n == 3 { Functor::atom(".", 2) } else { Functor::atom("f", 1) };
        let out = absdom::unif_func(&f, &w.beta);
        for th in inputs(&w, &sigma) {
            let t = Term::Fn(f.sym.clone(), th.vals[1..].to_vec());
            match mgu(&th.vals[0], &t) {
                Some(b) => {
                    prop_assert!(!out.sf);
                    prop_assert!(out.beta.contains(&th.apply(&b)), "{:?} lost", th);
                }
                None => prop_assert!(!out.ss, "{:?} fails", th),
            }
        }
    });
}

pub fn type_tests_are_sound(cases: u32) {
    proptest!(config(cases), |(w in gen::wbeta(1), sigma in inst(), k in 0usize..3)| {
        let kind = [TypeTestKind::Var, TypeTestKind::NoVar, TypeTestKind::Ground][k];
        let lit = Literal::TypeTest { kind, var: Var(1) };
        let out = absdom::builtin(&lit, &w.beta, &AbsCfg::default());
        for th in inputs(&w, &sigma) {
            let t = &th.vals[0];
            let holds = match kind {
                TypeTestKind::Var => matches!(t, Term::Var(_)),
                TypeTestKind::NoVar => !matches!(t, Term::Var(_)),
                TypeTestKind::Ground => t.is_ground(),
            };
            if holds {
                prop_assert!(!out.sf && out.beta.contains(&th));
            } else {
                prop_assert!(!out.ss);
            }
        }
    });
}

/// Comparisons; a non-integer operand makes the test fail.
pub fn arith_tests_are_sound(cases: u32) {
    proptest!(config(cases), |(w in any_beta3(), sigma in inst(), r in rel(), c in prop::option::of(-1i64..4), arith in any::<bool>())| {
        let rhs = match c {
            Some(c) => Operand::Const(c),
            None => Operand::Var(Var(2)),
        };
        // restricted to its own variables: x1 (and x2)
        let n = if c.is_some() { 1 } else { 2 };
        let beta = w.beta.restrc(n);
        let lit = Literal::ArithTest { rel: r, lhs: Operand::Var(Var(1)), rhs };
        let out = absdom::builtin(&lit, &beta, &AbsCfg { arith, ..AbsCfg::default() });
        for th in inputs(&w, &sigma) {
            let th = Subst::new(th.vals[..n].to_vec());
            let rv = match c {
                Some(c) => Some(c),
                None => ints(&th.vals[1]),
            };
            match (ints(&th.vals[0]), rv) {
                (Some(a), Some(b)) if r.holds(a, b) => {
                    prop_assert!(!out.sf);
                    prop_assert!(out.beta.contains(&th), "{:?} lost by {}", th, out.beta.render("t"));
                }
                _ => prop_assert!(!out.ss, "{:?}", th),
            }
        }
    });
}

/// `x1 is e`; evaluation errors are outside the semantics.
pub fn arith_eval_is_sound(cases: u32) {
    proptest!(config(cases), |(w in any_beta3(), sigma in inst(), e in expr(), arith in any::<bool>())| {
        let lit = eval_lit(&e);
        let out = absdom::builtin(&lit, &w.beta, &AbsCfg { arith, ..AbsCfg::default() });
        for th in inputs(&w, &sigma) {
            let v = e.eval(&|x: Var| th.vals[x.ix()].as_int());
            let Some(v) = v else {
                // errors, or fails when an operand is bound to a non-number
                continue;
            };
            match mgu(&th.vals[0], &Term::int(v)) {
                Some(b) => {
                    prop_assert!(!out.sf);
                    prop_assert!(out.beta.contains(&th.apply(&b)), "{:?} -> {} lost by {}", th, v, out.beta.render("e"));
                }
                None => prop_assert!(!out.ss),
            }
        }
    });
}

/// `β1 ≤ β2` implies `Cc(β1) ⊆ Cc(β2)`; union, widening and the depth
/// cap are above their arguments.
pub fn lattice_operations_cover_their_arguments(cases: u32) {
    proptest!(config(cases), |(w1 in any_beta3(), w2 in any_beta3(), sigma in inst(), depth in 1usize..4)| {
        let u = absdom::union(&w1.beta, &w2.beta);
        let wd = absdom::widen(&w1.beta, &w2.beta, depth);
        let cap = absdom::cap(&w1.beta, depth);
        for th in inputs(&w1, &sigma) {
            prop_assert!(u.contains(&th));
            prop_assert!(wd.contains(&th), "new {:?} not in {}", th, wd.render("w"));
            prop_assert!(cap.contains(&th));
            if absdom::leq(&w1.beta, &w2.beta) {
                prop_assert!(w2.beta.contains(&th));
            }
        }
        for th in inputs(&w2, &sigma) {
            prop_assert!(u.contains(&th));
            prop_assert!(wd.contains(&th), "old {:?} not in {}", th, wd.render("w"));
        }
        prop_assert!(absdom::leq(&w1.beta, &u) && absdom::leq(&w2.beta, &u));
        prop_assert!(absdom::leq(&w1.beta, &wd) && absdom::leq(&w1.beta, &cap));
    });
}
pub const SUITE: &[(&str, super::Prop)] = &[
    ("members_and_renamings_are_contained", members_and_renamings_are_contained),
    ("unif_var_is_sound", unif_var_is_sound),
    ("unif_func_is_sound", unif_func_is_sound),
    ("type_tests_are_sound", type_tests_are_sound),
    ("arith_tests_are_sound", arith_tests_are_sound),
    ("arith_eval_is_sound", arith_eval_is_sound),
    ("lattice_operations_cover_their_arguments", lattice_operations_cover_their_arguments),
];
