use super::{canonicalize, concat_with_cut, extc, extg, mgu, restrc, restrg, unify, CutFlag, Seq, Subst, Term};
use crate::ast::{Clause, Expr, Literal, Operand, PredKey, Program, TypeTestKind};
use std::cell::RefCell;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("arithmetic on a non-integer or unbound term in `{0}`")]
    Arith(String),
    #[error("call to undefined predicate {0}")]
    Unknown(PredKey),
}

type Memo = HashMap<(PredKey, Subst, usize), Result<Seq, EvalError>>;

/// Depth-bounded evaluator: `tcb(p, θ, k)` is the k-th iterate of the
/// concrete transformation from the everywhere-⊥ behavior.
pub struct Interpreter<'p> {
    prog: &'p Program,
    memo: RefCell<Memo>,
}

impl<'p> Interpreter<'p> {
    pub fn new(prog: &'p Program) -> Self {
        Interpreter { prog, memo: RefCell::new(HashMap::new()) }
    }

    /// Number of memoized calls.
    pub fn memo_len(&self) -> usize {
        self.memo.borrow().len()
    }

    pub fn clear_memo(&self) {
        self.memo.borrow_mut().clear();
    }

    /// Answers of `p` for input `theta` after `k` iterations.
    pub fn tcb(&self, p: &PredKey, theta: &Subst, k: usize) -> Result<Seq, EvalError> {
        if k == 0 {
            return Ok(Seq::bottom());
        }
        let theta = canonicalize(theta);
        let key = (p.clone(), theta, k);
        if let Some(r) = self.memo.borrow().get(&key) {
            return r.clone();
        }
        let r = self.procedure(p, &key.1, k);
        self.memo.borrow_mut().insert(key, r.clone());
        r
    }

    fn procedure(&self, p: &PredKey, theta: &Subst, k: usize) -> Result<Seq, EvalError> {
        let clauses = self.prog.clauses(p).ok_or_else(|| EvalError::Unknown(p.clone()))?;
        self.clauses_from(clauses, theta, k)
    }

    /// Rules R8/R9 over the clause suffix; the rest of the procedure is
    /// only computed when the prefix result lets it through.
    fn clauses_from(&self, clauses: &[Clause], theta: &Subst, k: usize) -> Result<Seq, EvalError> {
        let Some((c, rest)) = clauses.split_first() else {
            return Ok(Seq::empty());
        };
        let (s, cf) = self.clause(c, theta, k)?;
        if rest.is_empty() || cf == CutFlag::Cut || !s.complete {
            return Ok(s);
        }
        let tail = self.clauses_from(rest, theta, k)?;
        Ok(concat_with_cut(s, cf, tail))
    }

    /// Rule R7: a clause restricted to its head variables.
    pub fn clause(&self, c: &Clause, theta: &Subst, k: usize) -> Result<(Seq, CutFlag), EvalError> {
        let (s, cf) = self.body(c, c.body.len(), theta, k)?;
        Ok(restrc(c.arity, &s, cf))
    }

    /// The first `upto` literals of the body of `c` (rules R1-R6).
    pub fn body(&self, c: &Clause, upto: usize, theta: &Subst, k: usize) -> Result<(Seq, CutFlag), EvalError> {
        let (mut s, mut cf) = extc(c.var_count, theta);
        for lit in &c.body[..upto] {
            if let Literal::Cut = lit {
                if let Some(first) = s.items.first() {
                    s = Seq::one(first.clone());
                    cf = CutFlag::Cut;
                }
                continue;
            }
            let mut out = Seq::empty();
            for th in &s.items {
                out = out.concat(self.literal(lit, th, k)?);
                if !out.complete {
                    break;
                }
            }
            if !s.complete {
                out = out.concat(Seq::bottom());
            }
            s = out;
        }
        Ok((s, cf))
    }

    fn literal(&self, lit: &Literal, theta: &Subst, k: usize) -> Result<Seq, EvalError> {
        match lit {
            Literal::UnifVar(..) | Literal::UnifFunc { .. } => Ok(unify(lit, theta)),
            Literal::Call { name, arity, args } => {
                let sub = restrg(lit, theta);
                let answers = self.tcb(&PredKey::new(name, *arity), &sub, k - 1)?;
                Ok(extg(args, theta, &answers))
            }
            Literal::TypeTest { kind, var } => {
                let t = theta.get(*var);
                let keep = match kind {
                    TypeTestKind::Var => matches!(t, Term::Var(_)),
                    TypeTestKind::Ground => t.is_ground(),
                    TypeTestKind::NoVar => !matches!(t, Term::Var(_)),
                };
                Ok(if keep { Seq::one(theta.clone()) } else { Seq::empty() })
            }
            Literal::ArithTest { rel, lhs, rhs } => {
                let val = |o: &Operand| match o {
                    Operand::Const(c) => Some(*c),
                    Operand::Var(v) => theta.get(*v).as_int(),
                };
                let keep = matches!((val(lhs), val(rhs)), (Some(a), Some(b)) if rel.holds(a, b));
                Ok(if keep { Seq::one(theta.clone()) } else { Seq::empty() })
            }
            Literal::ArithEval { target, expr } => {
                let v = eval_expr(expr, theta).ok_or_else(|| EvalError::Arith(lit.to_string()))?;
                Ok(match mgu(theta.get(*target), &Term::int(v)) {
                    Some(s) => Seq::one(theta.apply(&s)),
                    None => Seq::empty(),
                })
            }
            Literal::Cut => unreachable!("cut handled at the body level"),
        }
    }
}

fn eval_expr(e: &Expr, theta: &Subst) -> Option<i64> {
    e.eval(&|v| theta.get(v).as_int())
}
