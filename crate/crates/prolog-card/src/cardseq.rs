//! Abstract sequences `<β, m, M, t>` over the pattern domain, with cut
//! information and the sequence-level operations.

use crate::absdom::{self, AbsCfg, AbsSubst, Outcome};
use crate::ast::Var;
use crate::concrete::{CutFlag, Seq};
use serde::Serialize;
use std::fmt;

/// Termination information.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TermInfo {
    /// sure termination
    St,
    /// sure non-termination
    Snt,
    /// possible termination
    Pt,
}

impl TermInfo {
    pub fn le(self, other: TermInfo) -> bool {
        self == other || other == TermInfo::Pt
    }

    pub fn lub(self, other: TermInfo) -> TermInfo {
        if self == other {
            self
        } else {
            TermInfo::Pt
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TermInfo::St => "st",
            TermInfo::Snt => "snt",
            TermInfo::Pt => "pt",
        }
    }

    pub fn from_name(s: &str) -> Option<TermInfo> {
        match s {
            "st" => Some(TermInfo::St),
            "snt" => Some(TermInfo::Snt),
            "pt" => Some(TermInfo::Pt),
            _ => None,
        }
    }

    /// Whether a concrete sequence with the given completeness fits.
    pub fn admits(self, complete: bool) -> bool {
        match self {
            TermInfo::St => complete,
            TermInfo::Snt => !complete,
            TermInfo::Pt => true,
        }
    }
}

/// Upper bound on solutions: a natural or ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    Fin(u64),
    Inf,
}

impl std::ops::Add for Bound {
    type Output = Bound;

    fn add(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Fin(a), Bound::Fin(b)) => Bound::Fin(a.saturating_add(b)),
            _ => Bound::Inf,
        }
    }
}

/// 0·∞ = 0
impl std::ops::Mul for Bound {
    type Output = Bound;

    fn mul(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Fin(0), _) | (_, Bound::Fin(0)) => Bound::Fin(0),
            (Bound::Fin(a), Bound::Fin(b)) => Bound::Fin(a.saturating_mul(b)),
            _ => Bound::Inf,
        }
    }
}

impl Bound {
    pub fn min1(self) -> Bound {
        self.min(Bound::Fin(1))
    }

    pub fn is_zero(self) -> bool {
        self == Bound::Fin(0)
    }

    pub fn admits(self, n: usize) -> bool {
        match self {
            Bound::Fin(k) => n as u64 <= k,
            Bound::Inf => true,
        }
    }
}

impl From<u64> for Bound {
    fn from(v: u64) -> Bound {
        Bound::Fin(v)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Fin(v) => write!(f, "{v}"),
            Bound::Inf => f.write_str("inf"),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Bound::Fin(v) => s.serialize_u64(*v),
            Bound::Inf => s.serialize_str("inf"),
        }
    }
}

/// `<β, m, M, t>`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbsSeq {
    pub beta: AbsSubst,
    pub lo: u64,
    pub hi: Bound,
    pub t: TermInfo,
}

impl AbsSeq {
    /// Builds a sequence; shapes with the same concretization as `B∅`
    /// or with no room for substitutions are normalized.
    pub fn new(beta: AbsSubst, lo: u64, hi: Bound, t: TermInfo) -> AbsSeq {
        if Bound::Fin(lo) > hi || (beta.is_empty() && lo > 0) {
            return AbsSeq::empty();
        }
        if beta.is_empty() || hi.is_zero() {
            return AbsSeq { beta: AbsSubst::Empty, lo: 0, hi: Bound::Fin(0), t };
        }
        AbsSeq { beta, lo, hi, t }
    }

    /// `B⊥ = <β∅, 0, 0, snt>`, describing only `<⊥>`.
    pub fn bottom() -> AbsSeq {
        AbsSeq { beta: AbsSubst::Empty, lo: 0, hi: Bound::Fin(0), t: TermInfo::Snt }
    }

    /// `B∅ = <β∅, 1, 0, st>`, the chosen representative of the empty set.
    pub fn empty() -> AbsSeq {
        AbsSeq { beta: AbsSubst::Empty, lo: 1, hi: Bound::Fin(0), t: TermInfo::St }
    }

    pub fn is_void(&self) -> bool {
        Bound::Fin(self.lo) > self.hi
    }

    /// Semi-simple: `β∅` with `m = M = 0`, or `β ≠ β∅` with `1 ≤ m ≤ M`.
    pub fn is_semi_simple(&self) -> bool {
        if self.beta.is_empty() {
            self.lo == 0 && self.hi.is_zero()
        } else {
            self.lo >= 1 && Bound::Fin(self.lo) <= self.hi
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.hi <= Bound::Fin(1)
    }

    pub fn is_fully_deterministic(&self) -> bool {
        self.lo == 1 && self.hi == Bound::Fin(1) && self.t == TermInfo::St
    }

    /// `<p(pattern),m,M,t>`
    pub fn render(&self, name: &str) -> String {
        format!("<{},{},{},{}>", self.beta.render(name), self.lo, self.hi, self.t.name())
    }
}

/// Componentwise order, except that a void sequence (empty
/// concretization) is below everything. Without that, normalizing a
/// void widening result to `B∅` can make the iterates cycle.
pub fn seq_leq(b1: &AbsSeq, b2: &AbsSeq) -> bool {
    b1.is_void() || (absdom::leq(&b1.beta, &b2.beta) && b1.lo >= b2.lo && b1.hi <= b2.hi && b1.t.le(b2.t))
}

/// Componentwise upper bound.
pub fn seq_ub(b1: &AbsSeq, b2: &AbsSeq) -> AbsSeq {
    AbsSeq { beta: absdom::union(&b1.beta, &b2.beta), lo: b1.lo.min(b2.lo), hi: b1.hi.max(b2.hi), t: b1.t.lub(b2.t) }
}

/// Extended widening `new ∇ old`.
pub fn widen(new: &AbsSeq, old: &AbsSeq, depth: usize) -> AbsSeq {
    if !absdom::leq(&new.beta, &old.beta) {
        let beta = absdom::widen(&new.beta, &old.beta, depth);
        return AbsSeq::new(beta, new.lo, new.hi, new.t);
    }
    // built without `AbsSeq::new`: normalizing `M = 0` would drop
    // `β_old` and let the first case fire again on the next round
    if !new.t.le(old.t) {
        return AbsSeq { beta: old.beta.clone(), lo: new.lo, hi: new.hi, t: TermInfo::Pt };
    }
    if new.lo < old.lo || new.hi > old.hi {
        return AbsSeq { beta: old.beta.clone(), lo: new.lo.min(old.lo), hi: Bound::Inf, t: old.t };
    }
    old.clone()
}

/// Membership of a concrete sequence in `Cc(B)`.
pub fn cc_member(s: &Seq, b: &AbsSeq) -> bool {
    let n = s.ns();
    s.items.iter().all(|th| b.beta.contains(th)) && b.lo as usize <= n && b.hi.admits(n) && b.t.admits(s.complete)
}

/// Abstract cut information.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Acf {
    Cut,
    NoCut,
    WeakCut,
}

impl Acf {
    pub fn name(self) -> &'static str {
        match self {
            Acf::Cut => "cut",
            Acf::NoCut => "nocut",
            Acf::WeakCut => "weakcut",
        }
    }

    pub fn join(self, other: Acf) -> Acf {
        if self == other {
            self
        } else {
            Acf::WeakCut
        }
    }
}

/// `<B, acf>`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeqCut {
    pub seq: AbsSeq,
    pub acf: Acf,
}

impl SeqCut {
    pub fn new(seq: AbsSeq, acf: Acf) -> SeqCut {
        SeqCut { seq, acf }
    }

    /// SEQ
    pub fn seq_of(&self) -> &AbsSeq {
        &self.seq
    }

    /// SUBST
    pub fn subst_of(&self) -> &AbsSubst {
        &self.seq.beta
    }

    /// Simple: semi-simple sequence part, concrete cut flag, `t ≠ pt`.
    pub fn is_simple(&self) -> bool {
        self.seq.is_semi_simple() && self.acf != Acf::WeakCut && self.seq.t != TermInfo::Pt
    }
}

pub fn cc_member_cut(s: &Seq, cf: CutFlag, c: &SeqCut) -> bool {
    if !cc_member(s, &c.seq) {
        return false;
    }
    match (c.acf, cf) {
        (Acf::Cut, CutFlag::Cut) | (Acf::NoCut, CutFlag::NoCut) | (Acf::WeakCut, CutFlag::Cut) => true,
        (Acf::WeakCut, CutFlag::NoCut) => s.items.is_empty(),
        _ => false,
    }
}

/// Unification result lifted to a sequence of length at most one.
pub fn lift(o: Outcome) -> AbsSeq {
    let lo = u64::from(o.ss);
    let hi = Bound::Fin(u64::from(!o.sf));
    AbsSeq::new(o.beta, lo, hi, TermInfo::St)
}

/// Clause entry over `var_count` clause variables.
pub fn seq_extc(var_count: usize, beta: &AbsSubst) -> SeqCut {
    SeqCut::new(AbsSeq::new(beta.extc(var_count), 1, Bound::Fin(1), TermInfo::St), Acf::NoCut)
}

/// Clause exit: projection on the head variables.
pub fn seq_restrc(arity: usize, c: &SeqCut) -> SeqCut {
    let s = &c.seq;
    let seq = AbsSeq { beta: s.beta.restrc(arity), ..s.clone() };
    SeqCut::new(seq, c.acf)
}

pub fn ai_cut(c: &SeqCut) -> SeqCut {
    let s = &c.seq;
    let t = if s.lo >= 1 || s.t == TermInfo::St {
        TermInfo::St
    } else if s.hi.is_zero() && s.t == TermInfo::Snt {
        TermInfo::Snt
    } else {
        TermInfo::Pt
    };
    let acf = if s.lo >= 1 || c.acf == Acf::Cut {
        Acf::Cut
    } else if s.hi.is_zero() && c.acf == Acf::NoCut {
        Acf::NoCut
    } else {
        Acf::WeakCut
    };
    SeqCut::new(AbsSeq::new(s.beta.clone(), s.lo.min(1), s.hi.min1(), t), acf)
}

/// Extends the clause-level sequence `c` with the result `b` of a
/// literal over `args`.
pub fn extgs(args: &[Var], c: &SeqCut, b: &AbsSeq) -> SeqCut {
    let (s1, s2) = (&c.seq, b);
    let beta = absdom::extg(args, &s1.beta, &s2.beta);
    let lo = if s2.t == TermInfo::St { s1.lo * s2.lo } else { s1.lo.min(1) * s2.lo };
    let hi = if s2.t == TermInfo::Snt { s1.hi.min1() * s2.hi } else { s1.hi * s2.hi };
    let t = if s1.t == TermInfo::Snt || (s2.t == TermInfo::Snt && s1.lo >= 1) {
        TermInfo::Snt
    } else if s1.t == TermInfo::St && (s2.t == TermInfo::St || s1.hi.is_zero()) {
        TermInfo::St
    } else {
        TermInfo::Pt
    };
    SeqCut::new(AbsSeq::new(beta, lo, hi, t), c.acf)
}

fn push_unique(v: &mut Vec<AbsSeq>, b: AbsSeq) {
    if !v.contains(&b) {
        v.push(b);
    }
}

/// Exact decomposition into semi-simple sequences.
pub fn split1(b: &AbsSeq) -> Vec<AbsSeq> {
    let mut out = Vec::new();
    if b.lo == 0 {
        out.push(AbsSeq { beta: AbsSubst::Empty, lo: 0, hi: Bound::Fin(0), t: b.t });
    }
    let lo = b.lo.max(1);
    if !b.beta.is_empty() && Bound::Fin(lo) <= b.hi {
        out.push(AbsSeq { beta: b.beta.clone(), lo, hi: b.hi, t: b.t });
    }
    out
}

/// Exact decomposition into simple sequences with cut information.
pub fn split2(c: &SeqCut) -> Vec<SeqCut> {
    let mut out = Vec::new();
    for b in split1(&c.seq) {
        let flags: &[Acf] = match c.acf {
            Acf::WeakCut if b.lo == 0 => &[Acf::NoCut, Acf::Cut],
            Acf::WeakCut => &[Acf::Cut],
            Acf::Cut => &[Acf::Cut],
            Acf::NoCut => &[Acf::NoCut],
        };
        let ts: &[TermInfo] = match b.t {
            TermInfo::Pt => &[TermInfo::Snt, TermInfo::St],
            TermInfo::St => &[TermInfo::St],
            TermInfo::Snt => &[TermInfo::Snt],
        };
        for &acf in flags {
            for &t in ts {
                let sc = SeqCut::new(AbsSeq { t, ..b.clone() }, acf);
                if !out.contains(&sc) {
                    out.push(sc);
                }
            }
        }
    }
    out
}

/// Converse of `split1`.
pub fn merge(sb: &[AbsSeq]) -> AbsSeq {
    match sb {
        [] => AbsSeq::empty(),
        [b] => b.clone(),
        [first, rest @ ..] => rest.iter().fold(first.clone(), |acc, b| seq_ub(&acc, b)),
    }
}

/// True when no member of `split2(c)` lets later clauses contribute.
pub fn blocks_rest(c: &SeqCut) -> bool {
    split2(c).iter().all(|s| s.acf == Acf::Cut || s.seq.t == TermInfo::Snt)
}

/// Concatenation of a clause result `c1` with the results `sb2` of the
/// remaining clauses, all for the input `beta`.
pub fn conc(beta: &AbsSubst, c1: &SeqCut, sb2: &[AbsSeq], cfg: &AbsCfg) -> Vec<AbsSeq> {
    let mut out = Vec::new();
    for c in split2(c1) {
        let b1 = &c.seq;
        if c.acf == Acf::Cut || b1.t == TermInfo::Snt {
            push_unique(&mut out, b1.clone());
            continue;
        }
        for b2 in sb2 {
            if b1.hi.is_zero() {
                push_unique(&mut out, b2.clone());
            } else if b2.hi.is_zero() {
                push_unique(&mut out, AbsSeq { t: b2.t, ..b1.clone() });
            } else if !absdom::exclusive(beta, &b1.beta, &b2.beta, cfg) {
                let u = absdom::union(&b1.beta, &b2.beta);
                push_unique(&mut out, AbsSeq::new(u, b1.lo + b2.lo, b1.hi + b2.hi, b2.t));
            }
        }
    }
    out
}

impl fmt::Display for AbsSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}, {}>", self.beta, self.lo, self.hi, self.t.name())
    }
}

impl fmt::Display for SeqCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.seq, self.acf.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absdom::{from_terms, Mode};
    use crate::concrete::{Subst, Term};

    fn seq(beta: &AbsSubst, lo: u64, hi: Bound, t: TermInfo) -> AbsSeq {
        AbsSeq::new(beta.clone(), lo, hi, t)
    }

    fn g() -> AbsSubst {
        AbsSubst::from_modes(&[Mode::G])
    }

    fn top0() -> AbsSubst {
        AbsSubst::top(0)
    }

    use Bound::{Fin, Inf};
    use TermInfo::{Pt, Snt, St};

    #[test]
    fn ordering() {
        let b = g();
        assert!(seq_leq(&seq(&b, 1, Fin(1), St), &seq(&b, 0, Fin(2), Pt)));
        assert!(!seq_leq(&seq(&b, 0, Fin(1), St), &seq(&b, 1, Fin(1), St)));
        assert!(!seq_leq(&seq(&b, 1, Fin(1), Snt), &seq(&b, 1, Fin(1), St)));
    }

    #[test]
    fn membership() {
        let eps = Subst::new(vec![]);
        let top = seq(&top0(), 1, Inf, Snt);
        let s = Seq { items: vec![eps.clone(); 3], complete: false };
        assert!(cc_member(&s, &top));
        assert!(!cc_member(&Seq::bottom(), &seq(&g(), 1, Fin(1), St)));
        assert!(cc_member(&Seq::empty(), &seq(&g(), 0, Fin(1), Pt)));
        assert!(cc_member(&Seq::bottom(), &AbsSeq::bottom()));
        assert!(!cc_member(&Seq::empty(), &AbsSeq::bottom()));
        assert!(!cc_member(&Seq::empty(), &AbsSeq::empty()));
    }

    #[test]
    fn repeat_widening_trace() {
        let b1 = seq(&top0(), 1, Fin(1), Snt);
        let w1 = widen(&b1, &AbsSeq::bottom(), 3);
        assert_eq!(w1, b1);
        let b2 = seq(&top0(), 2, Fin(2), Snt);
        let w2 = widen(&b2, &w1, 3);
        assert_eq!(w2, seq(&top0(), 1, Inf, Snt));
        let b3 = seq(&top0(), 2, Inf, Snt);
        assert!(seq_leq(&b3, &w2));
        assert_eq!(widen(&b3, &w2, 3), w2);
    }

    #[test]
    fn widening_cases() {
        let old = seq(&g(), 1, Fin(1), St);
        let any = AbsSubst::from_modes(&[Mode::ANY]);
        let w = widen(&seq(&any, 2, Fin(2), St), &old, 3);
        assert_eq!((w.beta.clone(), w.lo, w.hi), (any, 2, Fin(2)));
        assert_eq!(widen(&seq(&g(), 1, Fin(1), Snt), &old, 3).t, Pt);
    }

    #[test]
    fn lifting() {
        let o = |ss, sf| Outcome { beta: g(), ss, sf };
        assert_eq!((lift(o(true, false)).lo, lift(o(true, false)).hi), (1, Fin(1)));
        assert!(lift(o(false, true)).hi.is_zero());
        let b = lift(o(false, false));
        assert_eq!((b.lo, b.hi, b.t), (0, Fin(1), St));
    }

    #[test]
    fn cut_cases() {
        let c = SeqCut::new(seq(&g(), 2, Fin(2), St), Acf::NoCut);
        assert_eq!(ai_cut(&c), SeqCut::new(seq(&g(), 1, Fin(1), St), Acf::Cut));
        let c = SeqCut::new(seq(&g(), 0, Fin(1), St), Acf::NoCut);
        assert_eq!(ai_cut(&c), SeqCut::new(seq(&g(), 0, Fin(1), St), Acf::WeakCut));
        let c = SeqCut::new(AbsSeq::bottom(), Acf::NoCut);
        let r = ai_cut(&c);
        assert_eq!((r.seq.t, r.acf), (Snt, Acf::NoCut));
    }

    #[test]
    fn extension_after_call() {
        let c = SeqCut::new(seq(&AbsSubst::from_modes(&[Mode::V]), 1, Fin(1), St), Acf::NoCut);
        let r = extgs(&[Var(1)], &c, &seq(&g(), 2, Fin(2), St));
        assert_eq!(r, SeqCut::new(seq(&g(), 2, Fin(2), St), Acf::NoCut));
        let fail = AbsSeq { beta: AbsSubst::Empty, lo: 0, hi: Fin(0), t: St };
        let r = extgs(&[Var(1)], &c, &fail);
        assert_eq!((r.seq.lo, r.seq.hi, r.seq.t), (0, Fin(0), St));
        let r = extgs(&[Var(1)], &c, &seq(&g(), 1, Inf, Snt));
        assert_eq!(r.seq.t, Snt);
        // a call that surely fails guards a diverging continuation
        let c0 = SeqCut::new(AbsSeq { beta: AbsSubst::Empty, lo: 0, hi: Fin(0), t: St }, Acf::NoCut);
        assert!(extgs(&[Var(1)], &c0, &seq(&g(), 1, Inf, Snt)).seq.hi.is_zero());
    }

    #[test]
    fn splitting() {
        let b = g();
        assert_eq!(
            split1(&seq(&b, 0, Fin(2), Pt)),
            vec![AbsSeq { beta: AbsSubst::Empty, lo: 0, hi: Fin(0), t: Pt }, seq(&b, 1, Fin(2), Pt)]
        );
        let f = AbsSeq { beta: AbsSubst::Empty, lo: 0, hi: Fin(0), t: St };
        assert_eq!(split1(&f), vec![f.clone()]);
        assert!(split1(&AbsSeq { beta: b.clone(), lo: 2, hi: Fin(1), t: St }).is_empty());
        let c = SeqCut::new(seq(&b, 1, Fin(1), St), Acf::Cut);
        assert_eq!(split2(&c), vec![c.clone()]);
        assert_eq!(split2(&SeqCut::new(seq(&b, 1, Fin(1), Pt), Acf::Cut)).len(), 2);
        let w = split2(&SeqCut::new(seq(&b, 0, Fin(1), Pt), Acf::WeakCut));
        assert_eq!(w.len(), 6);
        assert!(w.iter().all(SeqCut::is_simple));
    }

    #[test]
    fn merging() {
        assert_eq!(merge(&[]), AbsSeq::empty());
        let b = seq(&g(), 1, Fin(1), St);
        assert_eq!(merge(std::slice::from_ref(&b)), b);
        assert_eq!(merge(&[b.clone(), AbsSeq::bottom()]), seq(&g(), 0, Fin(1), Pt));
        let any = seq(&g(), 0, Fin(3), Pt);
        assert_eq!(merge(&split1(&any)), any);
    }

    #[test]
    fn concatenation_cases() {
        let cfg = AbsCfg::default();
        let beta = g();
        let a = seq(&from_terms(&[Term::atom("a")]), 1, Fin(1), St);
        let b = seq(&from_terms(&[Term::atom("b")]), 1, Fin(1), St);
        assert_eq!(conc(&beta, &SeqCut::new(a.clone(), Acf::Cut), std::slice::from_ref(&b), &cfg), vec![a.clone()]);
        assert!(conc(&beta, &SeqCut::new(a.clone(), Acf::NoCut), std::slice::from_ref(&b), &cfg).is_empty());
        let none = AbsSeq { beta: AbsSubst::Empty, lo: 0, hi: Fin(0), t: St };
        assert_eq!(conc(&beta, &SeqCut::new(none, Acf::NoCut), std::slice::from_ref(&b), &cfg), vec![b.clone()]);
        let v = AbsSubst::from_modes(&[Mode::V]);
        let two = conc(&v, &SeqCut::new(a.clone(), Acf::NoCut), std::slice::from_ref(&b), &cfg);
        assert_eq!(two, vec![seq(&g(), 2, Fin(2), St)]);
    }

    #[test]
    fn bound_arithmetic() {
        assert_eq!(Fin(0) * Inf, Fin(0));
        assert_eq!(Fin(2) * Inf, Inf);
        assert_eq!(Fin(2) + Inf, Inf);
        assert_eq!(Inf.min1(), Fin(1));
        assert_eq!(serde_json::to_string(&Inf).unwrap(), "\"inf\"");
    }

    #[test]
    fn rendering() {
        let b = from_terms(&[Term::atom("a")]);
        assert_eq!(seq(&b, 0, Fin(1), Pt).render("p"), "<p(a),0,1,pt>");
        assert_eq!(seq(&top0(), 1, Inf, Snt).render("repeat"), "<repeat,1,inf,snt>");
    }
}
