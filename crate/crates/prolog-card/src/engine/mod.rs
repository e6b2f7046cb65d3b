//! Top-down tabled fixpoint engine with local iteration and extended
//! widening, generic over the abstract domain.

pub mod domain;
pub mod safety;

pub use domain::{Card, Domain, Sahlin, Shape, WidenState};

use crate::absdom::Mode;
use crate::ast::{Literal, PredKey, Program};
use crate::cardseq::Acf;
use indexmap::IndexMap;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("call to undefined predicate {0}")]
    Unknown(PredKey),
    #[error("{pred} did not stabilize within {limit} iterations for input {input}")]
    Budget { pred: PredKey, input: String, limit: usize },
    #[error("bad query `{0}`: {1}")]
    Query(String, String),
}

/// An entry point: predicate plus one mode per argument.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    pub pred: PredKey,
    pub modes: Vec<Mode>,
}

impl Query {
    /// Parses `p(g,v)`, `p()` or `p`.
    pub fn parse(s: &str) -> Result<Query, EngineError> {
        let bad = |why: &str| EngineError::Query(s.to_string(), why.to_string());
        let s = s.trim();
        let (name, args) = match s.find('(') {
            None => (s, ""),
            Some(i) => {
                let inner = s[i + 1..].strip_suffix(')').ok_or_else(|| bad("missing `)`"))?;
                (&s[..i], inner)
            }
        };
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(bad("bad predicate name"));
        }
        let modes = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|m| Mode::from_name(m.trim()).ok_or_else(|| bad(&format!("unknown mode `{}`", m.trim()))))
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(Query { pred: PredKey::new(name, modes.len()), modes })
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms: Vec<&str> = self.modes.iter().map(|m| m.letter()).collect();
        write!(f, "{}({})", self.pred.name, ms.join(","))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EngineConfig {
    /// Iteration cap per table entry.
    pub max_iter: usize,
    /// Record every local iterate in [`Analysis::trace`].
    pub trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { max_iter: 1000, trace: false }
    }
}

/// One local iterate of an entry: the computed `B_i` and the stored
/// `B'_i` after it.
#[derive(Clone, Debug)]
pub struct Step<D: Domain> {
    pub entry: usize,
    pub computed: D::Seq,
    pub stored: D::Seq,
}

/// One table entry of a finished analysis.
#[derive(Clone, Debug)]
pub struct Entry<D: Domain> {
    pub pred: PredKey,
    pub input: D::Subst,
    pub output: D::Seq,
    /// Join of the cut information of the evaluated clauses.
    pub acf: Acf,
    pub iterations: usize,
}

/// A completed table: entries in creation order, the entry points, and
/// the clauses some entry evaluates.
#[derive(Clone, Debug)]
pub struct Analysis<D: Domain> {
    pub entries: Vec<Entry<D>>,
    pub roots: Vec<usize>,
    pub live: BTreeSet<(PredKey, usize)>,
    /// Entries whose recomputation is not below the stored value; empty
    /// for a post-fixpoint.
    pub unstable: Vec<usize>,
    /// Iterates in order, when requested.
    pub trace: Vec<Step<D>>,
}

impl<D: Domain> Analysis<D> {
    pub fn root(&self, i: usize) -> &Entry<D> {
        &self.entries[self.roots[i]]
    }

    /// Clauses of `prog` that no entry evaluates, in program order.
    pub fn dead_clauses(&self, prog: &Program) -> Vec<(PredKey, usize)> {
        prog.procs
            .iter()
            .flat_map(|(k, cs)| (0..cs.len()).map(move |i| (k.clone(), i)))
            .filter(|c| !self.live.contains(c))
            .collect()
    }

    /// Procedures with at least one entry, and those whose entries are
    /// all deterministic.
    pub fn determinacy(&self, dom: &D) -> (usize, usize) {
        let mut procs: IndexMap<&PredKey, bool> = IndexMap::new();
        for e in &self.entries {
            let det = dom.is_deterministic(&e.output);
            *procs.entry(&e.pred).or_insert(true) &= det;
        }
        (procs.len(), procs.values().filter(|d| **d).count())
    }
}

struct Slot<D: Domain> {
    value: D::Seq,
    widen: WidenState,
    iterations: usize,
    acf: Acf,
    dirty: bool,
    /// Entries that read this one.
    readers: HashSet<usize>,
}

pub struct Engine<'a, D: Domain> {
    prog: &'a Program,
    dom: &'a D,
    cfg: EngineConfig,
    index: IndexMap<(PredKey, D::Subst), Slot<D>>,
    active: HashSet<usize>,
    live: Option<BTreeSet<(PredKey, usize)>>,
    trace: Vec<Step<D>>,
}

impl<'a, D: Domain> Engine<'a, D> {
    pub fn new(prog: &'a Program, dom: &'a D, cfg: EngineConfig) -> Self {
        Engine { prog, dom, cfg, index: IndexMap::new(), active: HashSet::new(), live: None, trace: Vec::new() }
    }

    /// Analyzes every query against one shared table.
    pub fn run(mut self, queries: &[Query]) -> Result<Analysis<D>, EngineError> {
        let mut roots = Vec::new();
        for q in queries {
            if self.prog.clauses(&q.pred).is_none() {
                return Err(EngineError::Unknown(q.pred.clone()));
            }
            let beta = self.dom.input(&q.modes);
            roots.push(self.call(&q.pred, beta, None)?);
        }
        self.settle()?;
        // Final sweep: recompute each entry once to check stability and
        // to record which clauses are evaluated.
        self.live = Some(BTreeSet::new());
        let mut unstable = Vec::new();
        let known = self.index.len();
        for i in 0..known {
            let (b, _) = self.tab(i)?;
            if !self.dom.leq(&b, &self.index[i].value) {
                unstable.push(i);
            }
        }
        // a call pattern first met in the sweep was never analyzed
        unstable.extend(known..self.index.len());
        let live = self.live.take().unwrap_or_default();
        let entries = self
            .index
            .into_iter()
            .map(|((pred, input), s)| Entry { pred, input, output: s.value, acf: s.acf, iterations: s.iterations })
            .collect();
        Ok(Analysis { entries, roots, live, unstable, trace: self.trace })
    }

    /// Re-iterates entries whose callees changed until none is dirty.
    fn settle(&mut self) -> Result<(), EngineError> {
        while let Some(i) = (0..self.index.len()).find(|i| self.index[*i].dirty) {
            self.solve(i)?;
        }
        Ok(())
    }

    /// Table lookup for a call, creating and solving the entry if new.
    fn call(&mut self, p: &PredKey, beta: D::Subst, reader: Option<usize>) -> Result<usize, EngineError> {
        let key = (p.clone(), beta);
        let i = match self.index.get_index_of(&key) {
            Some(i) => i,
            None => {
                let slot = Slot {
                    value: self.dom.bottom(),
                    widen: WidenState::default(),
                    iterations: 0,
                    acf: Acf::NoCut,
                    dirty: true,
                    readers: HashSet::new(),
                };
                self.index.insert_full(key, slot).0
            }
        };
        if let Some(r) = reader {
            self.index[i].readers.insert(r);
        }
        if self.index[i].dirty && !self.active.contains(&i) && self.live.is_none() {
            self.solve(i)?;
        }
        Ok(i)
    }

    /// Local iteration of one entry until `B_{i+1} <= B'_i`.
    fn solve(&mut self, i: usize) -> Result<(), EngineError> {
        self.active.insert(i);
        let r = self.iterate(i);
        self.active.remove(&i);
        r
    }

    fn iterate(&mut self, i: usize) -> Result<(), EngineError> {
        loop {
            self.index[i].dirty = false;
            let (b, acf) = self.tab(i)?;
            let slot = &self.index[i];
            if self.dom.leq(&b, &slot.value) {
                if self.cfg.trace {
                    self.trace.push(Step { entry: i, computed: b, stored: slot.value.clone() });
                }
                self.index[i].acf = acf;
                return Ok(());
            }
            if slot.iterations >= self.cfg.max_iter {
                let ((pred, input), _) = self.index.get_index(i).expect("entry");
                return Err(EngineError::Budget {
                    pred: pred.clone(),
                    input: self.dom.render_input(&pred.name, input),
                    limit: self.cfg.max_iter,
                });
            }
            let mut st = slot.widen;
            let w = self.dom.widen(&b, &slot.value, &mut st);
            if self.cfg.trace {
                self.trace.push(Step { entry: i, computed: b, stored: w.clone() });
            }
            let slot = &mut self.index[i];
            slot.value = w;
            slot.widen = st;
            slot.iterations += 1;
            slot.acf = acf;
            let readers: Vec<usize> = slot.readers.iter().copied().collect();
            for r in readers {
                self.index[r].dirty = true;
            }
        }
    }

    /// One application of the abstract transformation to entry `i`.
    fn tab(&mut self, i: usize) -> Result<(D::Seq, Acf), EngineError> {
        let ((pred, beta), _) = self.index.get_index(i).expect("entry");
        let (pred, beta) = (pred.clone(), beta.clone());
        let prog = self.prog;
        let clauses = prog.clauses(&pred).ok_or_else(|| EngineError::Unknown(pred.clone()))?;
        let mut results = Vec::with_capacity(clauses.len());
        for (ci, c) in clauses.iter().enumerate() {
            if let Some(live) = &mut self.live {
                live.insert((pred.clone(), ci));
            }
            let cc = self.clause(i, c, &beta)?;
            let stop = self.dom.blocks_rest(&cc);
            results.push(cc);
            if stop {
                break;
            }
        }
        let acf = results.iter().map(|c| self.dom.acf(c)).reduce(Acf::join).unwrap_or(Acf::NoCut);
        let (last, init) = results.split_last().expect("procedures have clauses");
        let mut enh = if results.len() == clauses.len() {
            self.dom.last(last)
        } else {
            // the last evaluated clause hides the rest
            self.dom.conc(&beta, last, &self.dom.last(last))
        };
        for cc in init.iter().rev() {
            enh = self.dom.conc(&beta, cc, &enh);
        }
        Ok((self.dom.merge(&enh), acf))
    }

    fn clause(&mut self, i: usize, c: &crate::ast::Clause, beta: &D::Subst) -> Result<D::Cut, EngineError> {
        let mut cc = self.dom.extc(c, beta);
        for lit in &c.body {
            cc = match lit {
                Literal::Cut => self.dom.cut(&cc),
                Literal::Call { name, arity, .. } => {
                    let b = match self.dom.call_key(lit, &cc) {
                        None => self.dom.unreached(),
                        Some(key) => {
                            let q = PredKey::new(name, *arity);
                            if self.prog.clauses(&q).is_none() {
                                return Err(EngineError::Unknown(q));
                            }
                            let j = self.call(&q, key, Some(i))?;
                            self.index[j].value.clone()
                        }
                    };
                    self.dom.extgs(lit, &cc, &b)
                }
                _ => {
                    let b = self.dom.builtin(lit, &cc);
                    self.dom.extgs(lit, &cc, &b)
                }
            };
        }
        Ok(self.dom.restrc(c, &cc))
    }
}

/// Analyzes `queries` over `prog` in one table.
pub fn analyze<D: Domain>(
    prog: &Program,
    dom: &D,
    queries: &[Query],
    cfg: EngineConfig,
) -> Result<Analysis<D>, EngineError> {
    Engine::new(prog, dom, cfg).run(queries)
}
