//! Properties of the six-atom domain against concrete sequences. Only
//! lengths and completeness matter to the domain, so every substitution
//! here is the empty one.

use super::config;
use prolog_card::concrete::{concat_with_cut, CutFlag, Seq, Subst};
use prolog_card::engine::{Domain, Sahlin, WidenState};
use prolog_card::sahlin::*;
use proptest::prelude::*;

fn sseq() -> impl Strategy<Value = SSeq> {
    (0u8..64).prop_map(SSeq)
}

fn scut() -> impl Strategy<Value = SCut> {
    (sseq(), sseq()).prop_map(|(nocut, cut)| SCut { nocut, cut })
}

fn cut_flag() -> impl Strategy<Value = CutFlag> {
    prop_oneof![Just(CutFlag::Cut), Just(CutFlag::NoCut)]
}

fn seq(n: usize, complete: bool) -> Seq {
    Seq { items: vec![Subst::new(vec![]); n], complete }
}

/// A concrete sequence of atom `a`, with `extra` more answers when the
/// atom allows them.
fn of_atom(a: Atom, extra: usize) -> Seq {
    let n = match a.count() {
        2 => 2 + extra,
        c => c as usize,
    };
    seq(n, a.complete())
}

/// A member of `b`, if any: `pick` chooses the atom.
fn member(b: SSeq, pick: usize, extra: usize) -> Option<Seq> {
    let atoms: Vec<Atom> = b.atoms().collect();
    (!atoms.is_empty()).then(|| of_atom(atoms[pick % atoms.len()], extra))
}

/// A member of `c` with its cut flag.
fn member_cut(c: SCut, pick: usize, extra: usize, cf: CutFlag) -> Option<(Seq, CutFlag)> {
    let (b, other, flip) = match cf {
        CutFlag::Cut => (c.cut, c.nocut, CutFlag::NoCut),
        CutFlag::NoCut => (c.nocut, c.cut, CutFlag::Cut),
    };
    member(b, pick, extra).map(|s| (s, cf)).or_else(|| member(other, pick, extra).map(|s| (s, flip)))
}

/// Every answer of `s` extended by its own call result; the run stops
/// at the first call that does not terminate.
fn extend(s: &Seq, results: &[Seq]) -> Seq {
    let mut out = seq(0, s.complete);
    for r in results.iter().take(s.ns()) {
        out.items.extend(r.items.iter().cloned());
        if !r.complete {
            out.complete = false;
            break;
        }
    }
    out
}

pub fn classify_matches_membership(cases: u32) {
    proptest!(config(cases), |(n in 0usize..6, complete in any::<bool>(), b in sseq())| {
        let s = seq(n, complete);
        let a = Atom::classify(&s);
        prop_assert!(SSeq::of(&[a]).contains(&s));
        prop_assert_eq!(b.contains(&s), b.has(a));
    });
}

/// Inclusion is the order, and the union bounds both sides.
pub fn order_is_monotone_for_membership(cases: u32) {
    proptest!(config(cases), |(b1 in sseq(), b2 in sseq(), pick in 0usize..6, extra in 0usize..3)| {
        let Some(s) = member(b1, pick, extra) else { return Ok(()) };
        prop_assert!(b1.union(b2).contains(&s));
        if b1.leq(b2) {
            prop_assert!(b2.contains(&s));
        }
    });
}

pub fn conc_is_sound(cases: u32) {
    proptest!(config(cases), |(c1 in scut(), b2 in sseq(), p1 in 0usize..6, p2 in 0usize..6, e1 in 0usize..3, e2 in 0usize..3, cf in cut_flag())| {
        let (Some((s1, cf)), Some(s2)) = (member_cut(c1, p1, e1, cf), member(b2, p2, e2)) else {
            return Ok(());
        };
        let s = concat_with_cut(s1.clone(), cf, s2.clone());
        let out = s_conc(c1, b2);
        prop_assert!(out.contains(&s), "<{},{:?}> □ {} = {} not in {}", s1, cf, s2, s, out);
    });
}

pub fn extension_is_sound(cases: u32) {
    proptest!(config(cases), |(c in scut(), b in sseq(), p in 0usize..6, e in 0usize..3, cf in cut_flag(), picks in prop::collection::vec((0usize..6, 0usize..3), 5))| {
        let Some((s, cf)) = member_cut(c, p, e, cf) else { return Ok(()) };
        let results: Option<Vec<Seq>> = picks.iter().map(|&(p, e)| member(b, p, e)).collect();
        let out = s_extgs(c, b);
        match results {
            Some(rs) => {
                let x = extend(&s, &rs);
                prop_assert!(out.contains(&x, cf), "{} extended to {} not in {}", s, x, out);
            }
            // no call can answer: only runs without answers survive
            None if s.ns() == 0 => prop_assert!(out.contains(&s, cf)),
            None => {}
        }
    });
}

pub fn cut_is_sound(cases: u32) {
    proptest!(config(cases), |(c in scut(), p in 0usize..6, e in 0usize..3, cf in cut_flag())| {
        let Some((s, cf)) = member_cut(c, p, e, cf) else { return Ok(()) };
        let (s2, cf2) = match s.items.first() {
            Some(th) => (Seq::one(th.clone()), CutFlag::Cut),
            None => (s.clone(), cf),
        };
        prop_assert!(s_cut(c).contains(&s2, cf2));
    });
}

/// Condition 1: the stored value is above the new iterate.
pub fn widening_is_above_the_new_value(cases: u32) {
    proptest!(config(cases), |(new in sseq(), old in sseq(), crude in any::<bool>())| {
        let mut st = WidenState { crude };
        let w = Sahlin.widen(&new, &old, &mut st);
        prop_assert!(new.leq(w));
        if crude {
            prop_assert!(old.leq(w) && st.crude);
        }
    });
}

/// Condition 2: repeated widening with arbitrary iterates stabilizes.
pub fn widening_stabilizes(cases: u32) {
    proptest!(config(cases), |(xs in prop::collection::vec(sseq(), 1..10))| {
        let mut cur = Sahlin.bottom();
        let mut st = WidenState::default();
        let mut rounds = 0;
        loop {
            let mut changed = false;
            for x in &xs {
                if !x.leq(cur) {
                    cur = Sahlin.widen(x, &cur, &mut st);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            rounds += 1;
            prop_assert!(rounds < 64, "no stabilization: {} from {:?}", cur, xs);
        }
    });
}
pub const SUITE: &[(&str, super::Prop)] = &[
    ("classify_matches_membership", classify_matches_membership),
    ("order_is_monotone_for_membership", order_is_monotone_for_membership),
    ("conc_is_sound", conc_is_sound),
    ("extension_is_sound", extension_is_sound),
    ("cut_is_sound", cut_is_sound),
    ("widening_is_above_the_new_value", widening_is_above_the_new_value),
    ("widening_stabilizes", widening_stabilizes),
];
