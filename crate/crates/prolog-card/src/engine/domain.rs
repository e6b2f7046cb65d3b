//! The operations the fixpoint engine needs from an abstract domain, and
//! their two instances.

use crate::absdom::{self, AbsCfg, AbsSubst, Mode};
use crate::ast::{Clause, Literal};
use crate::cardseq::{self, AbsSeq, Acf, Bound, SeqCut, TermInfo};
use crate::concrete::{CutFlag, Seq, Subst};
use crate::sahlin::{self, SCut, SSeq};
use std::fmt::Debug;
use std::hash::Hash;

/// Per-entry state the widening may carry between iterations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WidenState {
    /// Sahlin's widening lost its pre-order condition; only unions from now.
    pub crude: bool,
}

/// Cardinality summary shared by both domains, used in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub lo: u64,
    pub hi: Bound,
    pub t: TermInfo,
}

pub trait Domain: Sync {
    /// Abstract substitution; also the table key of a call.
    type Subst: Clone + Eq + Hash + Debug + Send + Sync;
    /// Abstract sequence.
    type Seq: Clone + PartialEq + Debug + Send + Sync;
    /// Abstract sequence with cut information.
    type Cut: Clone + Debug;
    /// Intermediate result of a clause suffix.
    type Enh: Clone + Debug;

    fn name(&self) -> &'static str;
    fn input(&self, modes: &[Mode]) -> Self::Subst;
    /// Initial value of every table entry.
    fn bottom(&self) -> Self::Seq;
    fn extc(&self, c: &Clause, beta: &Self::Subst) -> Self::Cut;
    fn restrc(&self, c: &Clause, cc: &Self::Cut) -> Self::Cut;
    fn cut(&self, cc: &Self::Cut) -> Self::Cut;
    /// Table key for a call after `cc`, or `None` when no substitution
    /// can reach the call.
    fn call_key(&self, lit: &Literal, cc: &Self::Cut) -> Option<Self::Subst>;
    /// Result of a call that no substitution reaches.
    fn unreached(&self) -> Self::Seq;
    /// Result of a unification, type test or arithmetic literal.
    fn builtin(&self, lit: &Literal, cc: &Self::Cut) -> Self::Seq;
    fn extgs(&self, lit: &Literal, cc: &Self::Cut, b: &Self::Seq) -> Self::Cut;
    /// Whether later clauses cannot contribute after `cc`.
    fn blocks_rest(&self, cc: &Self::Cut) -> bool;
    fn last(&self, cc: &Self::Cut) -> Self::Enh;
    fn conc(&self, beta: &Self::Subst, cc: &Self::Cut, rest: &Self::Enh) -> Self::Enh;
    fn merge(&self, e: &Self::Enh) -> Self::Seq;
    fn leq(&self, a: &Self::Seq, b: &Self::Seq) -> bool;
    fn widen(&self, new: &Self::Seq, old: &Self::Seq, st: &mut WidenState) -> Self::Seq;
    fn acf(&self, cc: &Self::Cut) -> Acf;

    fn shape(&self, b: &Self::Seq) -> Shape;
    fn is_deterministic(&self, b: &Self::Seq) -> bool;
    fn is_fully_deterministic(&self, b: &Self::Seq) -> bool;
    fn render_input(&self, name: &str, beta: &Self::Subst) -> String;
    fn render_output(&self, name: &str, b: &Self::Seq) -> String;
    fn render(&self, name: &str, b: &Self::Seq) -> String;

    /// Concrete inputs described by `beta`.
    fn admits_input(&self, beta: &Self::Subst, theta: &Subst) -> bool;
    /// Concrete sequences described by `b`.
    fn admits(&self, b: &Self::Seq, s: &Seq) -> bool;
    /// Whether some sequence described by `b` extends the incomplete `s`.
    fn admits_prefix(&self, b: &Self::Seq, s: &Seq) -> bool;
    /// Concrete sequence/cut pairs described by a clause result.
    fn admits_cut(&self, cc: &Self::Cut, s: &Seq, cf: CutFlag) -> bool;
}

/// Cardinality domain over patterns.
#[derive(Clone, Debug, Default)]
pub struct Card {
    pub cfg: AbsCfg,
}

impl Card {
    pub fn new(cfg: AbsCfg) -> Card {
        Card { cfg }
    }
}

impl Domain for Card {
    type Subst = AbsSubst;
    type Seq = AbsSeq;
    type Cut = SeqCut;
    type Enh = Vec<AbsSeq>;

    fn name(&self) -> &'static str {
        "card"
    }

    fn input(&self, modes: &[Mode]) -> AbsSubst {
        AbsSubst::from_modes(modes)
    }

    fn bottom(&self) -> AbsSeq {
        AbsSeq::bottom()
    }

    fn extc(&self, c: &Clause, beta: &AbsSubst) -> SeqCut {
        cardseq::seq_extc(c.var_count, beta)
    }

    fn restrc(&self, c: &Clause, cc: &SeqCut) -> SeqCut {
        cardseq::seq_restrc(c.arity, cc)
    }

    fn cut(&self, cc: &SeqCut) -> SeqCut {
        cardseq::ai_cut(cc)
    }

    fn call_key(&self, lit: &Literal, cc: &SeqCut) -> Option<AbsSubst> {
        let beta = cc.subst_of();
        if beta.is_empty() {
            return None;
        }
        Some(beta.restrg(lit).call_key(&self.cfg))
    }

    fn unreached(&self) -> AbsSeq {
        AbsSeq { beta: AbsSubst::Empty, lo: 0, hi: Bound::Fin(0), t: TermInfo::St }
    }

    fn builtin(&self, lit: &Literal, cc: &SeqCut) -> AbsSeq {
        let beta = cc.subst_of().restrg(lit);
        cardseq::lift(absdom::builtin(&lit.formal(), &beta, &self.cfg))
    }

    fn extgs(&self, lit: &Literal, cc: &SeqCut, b: &AbsSeq) -> SeqCut {
        cardseq::extgs(&lit.vars(), cc, b)
    }

    fn blocks_rest(&self, cc: &SeqCut) -> bool {
        cardseq::blocks_rest(cc)
    }

    fn last(&self, cc: &SeqCut) -> Vec<AbsSeq> {
        cardseq::split1(cc.seq_of())
    }

    fn conc(&self, beta: &AbsSubst, cc: &SeqCut, rest: &Vec<AbsSeq>) -> Vec<AbsSeq> {
        cardseq::conc(beta, cc, rest, &self.cfg)
    }

    fn merge(&self, e: &Vec<AbsSeq>) -> AbsSeq {
        cardseq::merge(e)
    }

    fn leq(&self, a: &AbsSeq, b: &AbsSeq) -> bool {
        cardseq::seq_leq(a, b)
    }

    fn widen(&self, new: &AbsSeq, old: &AbsSeq, _: &mut WidenState) -> AbsSeq {
        cardseq::widen(new, old, self.cfg.depth)
    }

    fn acf(&self, cc: &SeqCut) -> Acf {
        cc.acf
    }

    fn shape(&self, b: &AbsSeq) -> Shape {
        Shape { lo: b.lo, hi: b.hi, t: b.t }
    }

    fn is_deterministic(&self, b: &AbsSeq) -> bool {
        b.is_deterministic()
    }

    fn is_fully_deterministic(&self, b: &AbsSeq) -> bool {
        b.is_fully_deterministic()
    }

    fn render_input(&self, name: &str, beta: &AbsSubst) -> String {
        beta.render(name)
    }

    fn render_output(&self, name: &str, b: &AbsSeq) -> String {
        b.beta.render(name)
    }

    fn render(&self, name: &str, b: &AbsSeq) -> String {
        b.render(name)
    }

    fn admits_input(&self, beta: &AbsSubst, theta: &Subst) -> bool {
        beta.contains(theta)
    }

    fn admits(&self, b: &AbsSeq, s: &Seq) -> bool {
        cardseq::cc_member(s, b)
    }

    fn admits_prefix(&self, b: &AbsSeq, s: &Seq) -> bool {
        s.items.iter().all(|th| b.beta.contains(th)) && b.hi.admits(s.ns())
    }

    fn admits_cut(&self, cc: &SeqCut, s: &Seq, cf: CutFlag) -> bool {
        cardseq::cc_member_cut(s, cf, cc)
    }
}

/// Sahlin's domain: one table entry per predicate, no substitution part.
#[derive(Clone, Debug, Default)]
pub struct Sahlin;

impl Domain for Sahlin {
    type Subst = ();
    type Seq = SSeq;
    type Cut = SCut;
    type Enh = SSeq;

    fn name(&self) -> &'static str {
        "sahlin"
    }

    fn input(&self, _: &[Mode]) {}

    fn bottom(&self) -> SSeq {
        SSeq::bottom()
    }

    fn extc(&self, _: &Clause, _: &()) -> SCut {
        SCut::extc()
    }

    fn restrc(&self, _: &Clause, cc: &SCut) -> SCut {
        *cc
    }

    fn cut(&self, cc: &SCut) -> SCut {
        sahlin::s_cut(*cc)
    }

    fn call_key(&self, _: &Literal, cc: &SCut) -> Option<()> {
        cc.seq_of().atoms().any(|a| a.count() > 0).then_some(())
    }

    fn unreached(&self) -> SSeq {
        SSeq::of(&[sahlin::Atom::Zero])
    }

    fn builtin(&self, _: &Literal, _: &SCut) -> SSeq {
        sahlin::s_builtin()
    }

    fn extgs(&self, _: &Literal, cc: &SCut, b: &SSeq) -> SCut {
        sahlin::s_extgs(*cc, *b)
    }

    fn blocks_rest(&self, cc: &SCut) -> bool {
        cc.nocut.atoms().all(|a| !a.complete())
    }

    fn last(&self, cc: &SCut) -> SSeq {
        cc.seq_of()
    }

    fn conc(&self, _: &(), cc: &SCut, rest: &SSeq) -> SSeq {
        sahlin::s_conc(*cc, *rest)
    }

    fn merge(&self, e: &SSeq) -> SSeq {
        *e
    }

    fn leq(&self, a: &SSeq, b: &SSeq) -> bool {
        a.leq(*b)
    }

    fn widen(&self, new: &SSeq, old: &SSeq, st: &mut WidenState) -> SSeq {
        if st.crude {
            return new.union(*old);
        }
        let w = sahlin::s_widen(*new, *old);
        st.crude = w.crude;
        w.value
    }

    fn acf(&self, cc: &SCut) -> Acf {
        match (cc.nocut.is_empty(), cc.cut.is_empty()) {
            (true, false) => Acf::Cut,
            (false, true) => Acf::NoCut,
            _ => Acf::WeakCut,
        }
    }

    fn shape(&self, b: &SSeq) -> Shape {
        let lo = b.min_count().unwrap_or(1) as u64;
        let hi = match b.max_count() {
            None => Bound::Fin(0),
            Some(2) => Bound::Inf,
            Some(c) => Bound::Fin(c as u64),
        };
        let t = match (b.atoms().all(|a| a.complete()), b.atoms().all(|a| !a.complete())) {
            (true, _) => TermInfo::St,
            (_, true) => TermInfo::Snt,
            _ => TermInfo::Pt,
        };
        Shape { lo, hi, t }
    }

    fn is_deterministic(&self, b: &SSeq) -> bool {
        b.is_deterministic()
    }

    fn is_fully_deterministic(&self, b: &SSeq) -> bool {
        b.is_fully_deterministic()
    }

    fn render_input(&self, name: &str, _: &()) -> String {
        name.to_string()
    }

    fn render_output(&self, name: &str, _: &SSeq) -> String {
        name.to_string()
    }

    fn render(&self, name: &str, b: &SSeq) -> String {
        format!("<{name},{b}>")
    }

    fn admits_input(&self, _: &(), _: &Subst) -> bool {
        true
    }

    fn admits(&self, b: &SSeq, s: &Seq) -> bool {
        b.contains(s)
    }

    fn admits_prefix(&self, b: &SSeq, s: &Seq) -> bool {
        let n = s.ns().min(2);
        b.atoms().any(|a| usize::from(a.count()) >= n)
    }

    fn admits_cut(&self, cc: &SCut, s: &Seq, cf: CutFlag) -> bool {
        cc.contains(s, cf)
    }
}
