//! proptest strategies for concrete terms, abstract sequences with
//! witnesses, and concrete sequences inside their concretization.

use prolog_card::absdom::{self, AbsSubst};
use prolog_card::cardseq::{AbsSeq, Acf, Bound, SeqCut, TermInfo};
use prolog_card::concrete::{CutFlag, Seq, Subst, Term};
use proptest::collection::vec;
use proptest::prelude::*;

pub fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::atom("a")),
        Just(Term::atom("[]")),
        (0i64..3).prop_map(Term::int),
        (1u32..4).prop_map(Term::Var),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("f", vec![t])),
            (inner.clone(), inner).prop_map(|(h, t)| Term::app(".", vec![h, t])),
        ]
    })
}

pub fn subst(n: usize) -> impl Strategy<Value = Subst> {
    vec(term(), n).prop_map(Subst::new)
}

pub fn term_info() -> impl Strategy<Value = TermInfo> {
    prop_oneof![Just(TermInfo::St), Just(TermInfo::Snt), Just(TermInfo::Pt)]
}

pub fn acf() -> impl Strategy<Value = Acf> {
    prop_oneof![Just(Acf::Cut), Just(Acf::NoCut), Just(Acf::WeakCut)]
}

pub fn bound() -> impl Strategy<Value = Bound> {
    prop_oneof![3 => (0u64..4).prop_map(Bound::Fin), 1 => Just(Bound::Inf)]
}

/// An abstract substitution together with concrete members of it.
#[derive(Clone, Debug)]
pub struct WBeta {
    pub beta: AbsSubst,
    pub members: Vec<Subst>,
}

/// Union of the single-pattern descriptions of one to three
/// substitutions; those substitutions are the witnesses.
pub fn wbeta(n: usize) -> impl Strategy<Value = WBeta> {
    vec(subst(n), 1..4).prop_map(|ms| {
        let beta =
            ms.iter().map(|m| absdom::from_terms(&m.vals)).reduce(|a, b| absdom::union(&a, &b)).expect("nonempty");
        WBeta { beta, members: ms }
    })
}

#[derive(Clone, Debug)]
pub struct WSeq {
    pub seq: AbsSeq,
    pub members: Vec<Subst>,
}

pub fn wseq(n: usize) -> impl Strategy<Value = WSeq> {
    (wbeta(n), 0u64..3, bound(), term_info(), prop::bool::weighted(0.1)).prop_map(|(w, lo, hi, t, empty)| {
        let beta = if empty { AbsSubst::Empty } else { w.beta };
        let seq = AbsSeq::new(beta, lo, hi, t);
        let members = if seq.beta.is_empty() { Vec::new() } else { w.members };
        WSeq { seq, members }
    })
}

pub fn wcut(n: usize) -> impl Strategy<Value = (WSeq, Acf)> {
    (wseq(n), acf())
}

/// Choices used to build a concrete sequence from a [`WSeq`].
#[derive(Clone, Debug)]
pub struct Pick {
    pub extra: u64,
    pub ix: Vec<usize>,
    pub coin: bool,
}

pub fn pick() -> impl Strategy<Value = Pick> {
    (0u64..3, vec(0usize..8, 6), any::<bool>()).prop_map(|(extra, ix, coin)| Pick { extra, ix, coin })
}

/// A concrete sequence in `Cc(w.seq)` built from the witnesses, or `None`
/// when the concretization is empty.
pub fn member(w: &WSeq, p: &Pick) -> Option<Seq> {
    let b = &w.seq;
    if b.is_void() {
        return None;
    }
    let complete = match b.t {
        TermInfo::St => true,
        TermInfo::Snt => false,
        TermInfo::Pt => p.coin,
    };
    let mut len = b.lo + p.extra;
    if let Bound::Fin(h) = b.hi {
        len = len.min(h);
    }
    if w.members.is_empty() {
        len = 0;
    }
    if len < b.lo {
        return None;
    }
    let items = (0..len as usize).map(|i| w.members[p.ix[i % p.ix.len()] % w.members.len()].clone()).collect();
    Some(Seq { items, complete })
}

/// The cut flag of a concrete run admitted by `acf`, for a sequence
/// with `ns` answers.
pub fn flag(acf: Acf, ns: usize, coin: bool) -> CutFlag {
    match acf {
        Acf::Cut => CutFlag::Cut,
        Acf::NoCut => CutFlag::NoCut,
        Acf::WeakCut if ns == 0 && coin => CutFlag::NoCut,
        Acf::WeakCut => CutFlag::Cut,
    }
}

/// Arbitrary concrete sequence over `n` variables, member or not.
pub fn any_seq(n: usize) -> impl Strategy<Value = Seq> {
    (vec(subst(n), 0..4), any::<bool>()).prop_map(|(items, complete)| Seq { items, complete })
}

pub fn seq_cut(seq: AbsSeq, acf: Acf) -> SeqCut {
    SeqCut::new(seq, acf)
}
