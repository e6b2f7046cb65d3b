//! A plain depth-first SLD resolution engine with cut, written
//! independently of the crate's interpreter. Used to cross-check it.

use prolog_card::ast::{Literal, Operand, PredKey, Program, Rel, Sym, TypeTestKind};
use prolog_card::concrete::{canonicalize, Subst, Term};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Every answer, in order.
    Finished(Vec<Subst>),
    /// The step budget ran out after these answers.
    OutOfSteps(Vec<Subst>),
    /// Arithmetic on a non-integer.
    Error,
}

enum Signal {
    Go,
    CutTo(usize),
    Stop,
    Error,
}

struct Goal<'p> {
    lit: &'p Literal,
    frame: usize,
}

struct Solver<'p> {
    prog: &'p Program,
    frames: Vec<Vec<Term>>,
    next_var: u32,
    steps: usize,
    answers: Vec<Subst>,
    query: Vec<Term>,
}

type Env = HashMap<u32, Term>;

fn walk(t: &Term, env: &Env) -> Term {
    match t {
        Term::Var(v) => match env.get(v) {
            Some(b) => walk(b, env),
            None => t.clone(),
        },
        Term::Fn(f, a) => Term::Fn(f.clone(), a.iter().map(|x| walk(x, env)).collect()),
    }
}

fn occurs(v: u32, t: &Term) -> bool {
    match t {
        Term::Var(w) => *w == v,
        Term::Fn(_, a) => a.iter().any(|x| occurs(v, x)),
    }
}

fn unify(a: &Term, b: &Term, env: &mut Env) -> bool {
    let (a, b) = (walk(a, env), walk(b, env));
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), t) | (t, Term::Var(x)) => {
            if occurs(*x, t) {
                return false;
            }
            env.insert(*x, t.clone());
            true
        }
        (Term::Fn(f, xs), Term::Fn(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, env))
        }
    }
}

fn int_of(t: &Term) -> Option<i64> {
    match t {
        Term::Fn(Sym::Int(v), a) if a.is_empty() => Some(*v),
        _ => None,
    }
}

impl<'p> Solver<'p> {
    fn frame(&mut self, size: usize, args: &[Term]) -> usize {
        let mut vars: Vec<Term> = args.to_vec();
        while vars.len() < size {
            self.next_var += 1;
            vars.push(Term::Var(self.next_var));
        }
        self.frames.push(vars);
        self.frames.len() - 1
    }

    fn var(&self, frame: usize, v: prolog_card::ast::Var) -> Term {
        self.frames[frame][v.ix()].clone()
    }

    fn run<'g>(&mut self, goals: &[Goal<'g>], env: &Env, budget: usize) -> Signal
    where
        'p: 'g,
    {
        self.steps += 1;
        if self.steps > budget {
            return Signal::Stop;
        }
        let Some((g, rest)) = goals.split_first() else {
            let ans: Vec<Term> = self.query.iter().map(|t| walk(t, env)).collect();
            self.answers.push(canonicalize(&Subst::new(ans)));
            return Signal::Go;
        };
        let f = g.frame;
        match g.lit {
            Literal::Cut => match self.run(rest, env, budget) {
                Signal::Go => Signal::CutTo(f),
                s => s,
            },
            Literal::Call { name, arity, args } => {
                let key = PredKey::new(name, *arity);
                let Some(clauses) = self.prog.clauses(&key) else { return Signal::Error };
                let actuals: Vec<Term> = args.iter().map(|v| self.var(f, *v)).collect();
                for c in clauses {
                    let nf = self.frame(c.var_count, &actuals);
                    let mut goals: Vec<Goal<'g>> = c.body.iter().map(|lit| Goal { lit, frame: nf }).collect();
                    goals.extend(rest.iter().map(|g| Goal { lit: g.lit, frame: g.frame }));
                    match self.run(&goals, env, budget) {
                        Signal::Go => {}
                        Signal::CutTo(t) if t == nf => return Signal::Go,
                        s => return s,
                    }
                }
                Signal::Go
            }
            lit => {
                let mut env2 = env.clone();
                let ok = match lit {
                    Literal::UnifVar(a, b) => unify(&self.var(f, *a), &self.var(f, *b), &mut env2),
                    Literal::UnifFunc { var, functor, args } => {
                        let t = Term::Fn(functor.sym.clone(), args.iter().map(|v| self.var(f, *v)).collect());
                        unify(&self.var(f, *var), &t, &mut env2)
                    }
                    Literal::TypeTest { kind, var } => {
                        let t = walk(&self.var(f, *var), env);
                        match kind {
                            TypeTestKind::Var => matches!(t, Term::Var(_)),
                            TypeTestKind::NoVar => !matches!(t, Term::Var(_)),
                            TypeTestKind::Ground => t.is_ground(),
                        }
                    }
                    Literal::ArithTest { rel, lhs, rhs } => {
                        let val = |o: &Operand| match o {
                            Operand::Const(c) => Some(*c),
                            Operand::Var(v) => int_of(&walk(&self.var(f, *v), env)),
                        };
                        match (val(lhs), val(rhs)) {
                            (Some(a), Some(b)) => holds(*rel, a, b),
                            // a non-integer makes the test fail
                            _ => false,
                        }
                    }
                    Literal::ArithEval { target, expr } => {
                        let v = expr.eval(&|x| int_of(&walk(&self.var(f, x), env)));
                        match v {
                            None => return Signal::Error,
                            Some(v) => unify(&self.var(f, *target), &Term::int(v), &mut env2),
                        }
                    }
                    _ => unreachable!(),
                };
                if ok {
                    self.run(rest, &env2, budget)
                } else {
                    Signal::Go
                }
            }
        }
    }
}

fn holds(rel: Rel, a: i64, b: i64) -> bool {
    match rel {
        Rel::Lt => a < b,
        Rel::Le => a <= b,
        Rel::Gt => a > b,
        Rel::Ge => a >= b,
        Rel::Eq => a == b,
        Rel::Ne => a != b,
    }
}

/// All answers of `p` for the arguments `theta`, within `budget` steps.
/// Resolution recurses once per step, so this runs on its own thread
/// with a large stack.
pub fn solve(prog: &Program, p: &PredKey, theta: &Subst, budget: usize) -> Outcome {
    std::thread::scope(|sc| {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn_scoped(sc, || solve_here(prog, p, theta, budget))
            .expect("spawn")
            .join()
            .expect("resolution thread")
    })
}

fn solve_here(prog: &Program, p: &PredKey, theta: &Subst, budget: usize) -> Outcome {
    let theta = canonicalize(theta);
    let mut s = Solver {
        prog,
        frames: Vec::new(),
        next_var: theta.max_var(),
        steps: 0,
        answers: Vec::new(),
        query: theta.vals.clone(),
    };
    // a query frame holding the arguments, and a call into `p`
    let qf = s.frame(p.arity, &theta.vals);
    let args: Vec<prolog_card::ast::Var> = (0..p.arity).map(prolog_card::ast::Var::from_ix).collect();
    let call = Literal::Call { name: p.name.clone(), arity: p.arity, args };
    let goals = [Goal { lit: &call, frame: qf }];
    let sig = s.run(&goals, &Env::new(), budget);
    match sig {
        Signal::Go | Signal::CutTo(_) => Outcome::Finished(s.answers),
        Signal::Stop => Outcome::OutOfSteps(s.answers),
        Signal::Error => Outcome::Error,
    }
}
