//! Sahlin's determinacy domain: sets of six atomic sequence shapes,
//! ignoring substitutions altogether.
//!
//! An atom records how many substitutions a sequence holds (0, 1 or
//! more) and whether it is complete; `L` is `<⊥>`.

use crate::concrete::{CutFlag, Seq};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    L,
    Zero,
    One,
    OneP,
    Two,
    TwoP,
}

pub const ATOMS: [Atom; 6] = [Atom::L, Atom::Zero, Atom::One, Atom::OneP, Atom::Two, Atom::TwoP];

impl Atom {
    fn bit(self) -> u8 {
        1 << self as u8
    }

    /// Solution count class (0, 1, 2 meaning "more than one").
    pub fn count(self) -> u8 {
        match self {
            Atom::L | Atom::Zero => 0,
            Atom::One | Atom::OneP => 1,
            Atom::Two | Atom::TwoP => 2,
        }
    }

    pub fn complete(self) -> bool {
        matches!(self, Atom::Zero | Atom::One | Atom::Two)
    }

    pub fn of(count: u8, complete: bool) -> Atom {
        match (count.min(2), complete) {
            (0, false) => Atom::L,
            (0, true) => Atom::Zero,
            (1, true) => Atom::One,
            (1, false) => Atom::OneP,
            (_, true) => Atom::Two,
            (_, false) => Atom::TwoP,
        }
    }

    /// The atom whose concretization contains `s`.
    pub fn classify(s: &Seq) -> Atom {
        Atom::of(s.ns().min(2) as u8, s.complete)
    }

    /// "is strictly less complete than"
    pub fn below(self, other: Atom) -> bool {
        use Atom::*;
        matches!(
            (self, other),
            (L, Zero)
                | (L, One)
                | (L, OneP)
                | (L, Two)
                | (L, TwoP)
                | (OneP, One)
                | (OneP, Two)
                | (OneP, TwoP)
                | (TwoP, Two)
        )
    }

    pub fn below_eq(self, other: Atom) -> bool {
        self == other || self.below(other)
    }

    pub fn name(self) -> &'static str {
        match self {
            Atom::L => "L",
            Atom::Zero => "0",
            Atom::One => "1",
            Atom::OneP => "1'",
            Atom::Two => "2",
            Atom::TwoP => "2'",
        }
    }
}

/// A set of atoms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SSeq(pub u8);

impl SSeq {
    pub const EMPTY: SSeq = SSeq(0);

    pub fn of(atoms: &[Atom]) -> SSeq {
        SSeq(atoms.iter().fold(0, |m, a| m | a.bit()))
    }

    /// `{L}`, the start of every local iteration.
    pub fn bottom() -> SSeq {
        SSeq::of(&[Atom::L])
    }

    pub fn all() -> impl Iterator<Item = SSeq> {
        (0u8..64).map(SSeq)
    }

    pub fn has(self, a: Atom) -> bool {
        self.0 & a.bit() != 0
    }

    pub fn atoms(self) -> impl Iterator<Item = Atom> {
        ATOMS.into_iter().filter(move |a| self.has(*a))
    }

    pub fn insert(&mut self, a: Atom) {
        self.0 |= a.bit();
    }

    pub fn union(self, other: SSeq) -> SSeq {
        SSeq(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Set inclusion, the order on the domain.
    pub fn leq(self, other: SSeq) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn contains(self, s: &Seq) -> bool {
        self.has(Atom::classify(s))
    }

    /// Computational pre-order `⊑`.
    pub fn comp_le(self, other: SSeq) -> bool {
        self.atoms().all(|a| other.atoms().any(|b| a.below_eq(b)))
            && other.atoms().all(|b| self.atoms().any(|a| a.below_eq(b)))
    }

    /// `⊏`
    pub fn comp_lt(self, other: SSeq) -> bool {
        self.comp_le(other) && !other.comp_le(self)
    }

    pub fn equiv(self, other: SSeq) -> bool {
        self.comp_le(other) && other.comp_le(self)
    }

    /// Strengthened computational ordering.
    pub fn strong_le(self, other: SSeq) -> bool {
        self.comp_lt(other) || (self.equiv(other) && self.leq(other))
    }

    pub fn min_count(self) -> Option<u8> {
        self.atoms().map(Atom::count).min()
    }

    pub fn max_count(self) -> Option<u8> {
        self.atoms().map(Atom::count).max()
    }

    pub fn is_deterministic(self) -> bool {
        self.max_count().is_none_or(|c| c <= 1)
    }

    pub fn is_fully_deterministic(self) -> bool {
        self == SSeq::of(&[Atom::One])
    }
}

impl fmt::Display for SSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.atoms().map(Atom::name).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Result of widening: the new stored value and whether the pre-order
/// condition failed, in which case callers fall back to plain union.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Widened {
    pub value: SSeq,
    pub crude: bool,
}

pub fn s_widen(new: SSeq, old: SSeq) -> Widened {
    let value = if old.comp_lt(new) { new } else { new.union(old) };
    Widened { value, crude: !old.comp_le(new) }
}

/// Equivalence classes of `≈` over all 64 sets, each sorted.
pub fn s_classes() -> Vec<Vec<SSeq>> {
    let mut classes: Vec<Vec<SSeq>> = Vec::new();
    for b in SSeq::all() {
        match classes.iter_mut().find(|c| c[0].equiv(b)) {
            Some(c) => c.push(b),
            None => classes.push(vec![b]),
        }
    }
    classes
}

/// Sets of (atom, cut flag) pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SCut {
    pub nocut: SSeq,
    pub cut: SSeq,
}

impl SCut {
    pub fn extc() -> SCut {
        SCut { nocut: SSeq::of(&[Atom::One]), cut: SSeq::EMPTY }
    }

    pub fn seq_of(self) -> SSeq {
        self.nocut.union(self.cut)
    }

    pub fn contains(self, s: &Seq, cf: CutFlag) -> bool {
        match cf {
            CutFlag::Cut => self.cut.contains(s),
            CutFlag::NoCut => self.nocut.contains(s),
        }
    }

    fn pairs(self) -> impl Iterator<Item = (Atom, CutFlag)> {
        self.nocut.atoms().map(|a| (a, CutFlag::NoCut)).chain(self.cut.atoms().map(|a| (a, CutFlag::Cut)))
    }

    fn add(&mut self, a: Atom, cf: CutFlag) {
        match cf {
            CutFlag::Cut => self.cut.insert(a),
            CutFlag::NoCut => self.nocut.insert(a),
        }
    }
}

impl fmt::Display for SCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> =
            self.pairs().map(|(a, cf)| format!("{}{}", a.name(), if cf == CutFlag::Cut { "c" } else { "n" })).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Any unification or builtin: at most one answer, always terminating.
pub fn s_builtin() -> SSeq {
    SSeq::of(&[Atom::Zero, Atom::One])
}

/// Keeps the first answer of every sequence producing one.
pub fn s_cut(c: SCut) -> SCut {
    let mut out = SCut::default();
    for (a, cf) in c.pairs() {
        if a.count() == 0 {
            out.add(a, cf);
        } else {
            out.add(Atom::One, CutFlag::Cut);
        }
    }
    out
}

/// Concatenation state: solution count so far and whether a ⊥ or an
/// infinite part has been reached.
type State = (u8, bool);

fn step(states: &[State], b: SSeq) -> Vec<State> {
    let mut out: Vec<State> = Vec::new();
    for &(n, open) in states {
        let next: Vec<State> =
            if !open { vec![(n, open)] } else { b.atoms().map(|a| ((n + a.count()).min(2), a.complete())).collect() };
        for s in next {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

/// Every element of the clause-level sequence is extended by an answer
/// sequence of the call, each chosen independently from `b`.
pub fn s_extgs(c: SCut, b: SSeq) -> SCut {
    let mut out = SCut::default();
    for (a, cf) in c.pairs() {
        // states after a number of calls fitting the count class of `a`
        let start = vec![(0u8, true)];
        let finals: Vec<State> = match a.count() {
            0 => start,
            1 => step(&start, b),
            _ => {
                let mut cur = step(&step(&start, b), b);
                loop {
                    let mut next = cur.clone();
                    for s in step(&cur, b) {
                        if !next.contains(&s) {
                            next.push(s);
                        }
                    }
                    if next.len() == cur.len() {
                        break cur;
                    }
                    cur = next;
                }
            }
        };
        for (n, complete) in finals {
            out.add(Atom::of(n, complete && a.complete()), cf);
        }
    }
    out
}

/// `<S1, cf> □ S2` over all members.
pub fn s_conc(c1: SCut, b2: SSeq) -> SSeq {
    let mut out = SSeq::EMPTY;
    for (a, cf) in c1.pairs() {
        if cf == CutFlag::Cut || !a.complete() {
            out.insert(a);
        } else {
            for b in b2.atoms() {
                out.insert(Atom::of(a.count() + b.count(), b.complete()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::Atom::*;
    use super::*;

    #[test]
    fn computational_order() {
        assert!(SSeq::of(&[L]).comp_le(SSeq::of(&[Zero, One])));
        assert!(!SSeq::of(&[One]).comp_le(SSeq::of(&[OneP])));
        for b in SSeq::all() {
            assert!(b.comp_le(b));
        }
    }

    #[test]
    fn widening() {
        let w = s_widen(SSeq::of(&[Zero, One]), SSeq::of(&[L]));
        assert_eq!(w, Widened { value: SSeq::of(&[Zero, One]), crude: false });
        let b = SSeq::of(&[One, TwoP]);
        assert_eq!(s_widen(b, b).value, b);
        let w = s_widen(SSeq::of(&[One]), SSeq::of(&[Zero]));
        assert_eq!(w, Widened { value: SSeq::of(&[Zero, One]), crude: true });
    }

    #[test]
    fn class_census() {
        let cs = s_classes();
        assert_eq!(cs.len(), 42);
        let count = |n| cs.iter().filter(|c| c.len() == n).count();
        assert_eq!((count(1), count(2), count(4)), (28, 10, 4));
        let find = |b: SSeq| cs.iter().find(|c| c.contains(&b)).unwrap().clone();
        let pair = find(SSeq::of(&[L, Zero, TwoP]));
        assert_eq!(pair.len(), 2);
        assert!(pair.contains(&SSeq::of(&[L, Zero, OneP, TwoP])));
        let quad = find(SSeq::of(&[L, Zero, Two]));
        for b in
            [SSeq::of(&[L, Zero, Two, TwoP]), SSeq::of(&[L, Zero, OneP, Two]), SSeq::of(&[L, Zero, OneP, Two, TwoP])]
        {
            assert!(quad.contains(&b));
        }
    }

    #[test]
    fn repeat_iterates_to_infinite() {
        // repeat. repeat :- repeat.
        let clause = |rec: SSeq| {
            let c1 = SCut::extc();
            let c2 = s_extgs(SCut::extc(), rec);
            s_conc(c1, c2.seq_of())
        };
        let mut old = SSeq::bottom();
        loop {
            let new = clause(old);
            if new.leq(old) {
                break;
            }
            let w = s_widen(new, old);
            assert!(!w.crude);
            old = w.value;
        }
        assert_eq!(old, SSeq::of(&[TwoP]));
    }

    #[test]
    fn cut_keeps_first_answer() {
        let c = SCut { nocut: SSeq::of(&[Zero, TwoP]), cut: SSeq::EMPTY };
        let r = s_cut(c);
        assert_eq!(r.nocut, SSeq::of(&[Zero]));
        assert_eq!(r.cut, SSeq::of(&[One]));
    }

    #[test]
    fn extension_by_call_answers() {
        let r = s_extgs(SCut::extc(), SSeq::of(&[Zero, One]));
        assert_eq!(r.nocut, SSeq::of(&[Zero, One]));
        let two = SCut { nocut: SSeq::of(&[Two]), cut: SSeq::EMPTY };
        assert_eq!(s_extgs(two, SSeq::of(&[Zero, One])).nocut, SSeq::of(&[Zero, One, Two]));
        assert_eq!(s_extgs(two, SSeq::of(&[L])).nocut, SSeq::of(&[L]));
        let inc = SCut { nocut: SSeq::of(&[OneP]), cut: SSeq::EMPTY };
        assert_eq!(s_extgs(inc, SSeq::of(&[Zero])).nocut, SSeq::of(&[L]));
    }
}
