//! Properties of abstract sequences.

use super::config;
use crate::common::gen;
use prolog_card::absdom::{AbsCfg, AbsSubst};
use prolog_card::cardseq::*;
use prolog_card::concrete::{concat_with_cut, CutFlag, Seq};
use proptest::prelude::*;

fn cut_flag() -> impl Strategy<Value = CutFlag> {
    prop_oneof![Just(CutFlag::Cut), Just(CutFlag::NoCut)]
}

/// `<S1,c1> □ (<S2,c2> □ S3) = <<S1,c1> □ S2, c1 ∨ c2> □ S3`
pub fn concatenation_is_associative(cases: u32) {
    proptest!(config(cases), |(s1 in gen::any_seq(1), s2 in gen::any_seq(1), s3 in gen::any_seq(1), c1 in cut_flag(), c2 in cut_flag())| {
        let right = concat_with_cut(s1.clone(), c1, concat_with_cut(s2.clone(), c2, s3.clone()));
        let c12 = if c1 == CutFlag::Cut || c2 == CutFlag::Cut { CutFlag::Cut } else { CutFlag::NoCut };
        let left = concat_with_cut(concat_with_cut(s1, c1, s2), c12, s3);
        prop_assert_eq!(left, right);
    });
}

/// Witness-built sequences are members (checks the generator and
/// the membership test against each other).
pub fn witnesses_are_members(cases: u32) {
    proptest!(config(cases), |(w in gen::wseq(2), p in gen::pick())| {
        if let Some(s) = gen::member(&w, &p) {
            prop_assert!(cc_member(&s, &w.seq), "{} not in {}", s, w.seq);
        }
    });
}

/// `Cc(B) = ∪ Cc(split1(B))`, members are semi-simple, and merging
/// gives `B` back.
pub fn split1_is_exact(cases: u32) {
    proptest!(config(cases), |(w in gen::wseq(2), p in gen::pick(), other in gen::any_seq(2))| {
        let parts = split1(&w.seq);
        for b in &parts {
            prop_assert!(b.is_semi_simple(), "{}", b);
        }
        let cands: Vec<Seq> = gen::member(&w, &p).into_iter().chain([other]).collect();
        for s in &cands {
            prop_assert_eq!(cc_member(s, &w.seq), parts.iter().any(|b| cc_member(s, b)), "{}", s);
        }
        if !w.seq.is_void() {
            prop_assert_eq!(merge(&parts), w.seq.clone());
        } else {
            prop_assert!(parts.is_empty());
        }
    });
}

/// `Cc(C) = ∪ Cc(split2(C))` with simple members.
pub fn split2_is_exact(cases: u32) {
    proptest!(config(cases), |((w, acf) in gen::wcut(2), p in gen::pick(), other in gen::any_seq(2), cf in cut_flag())| {
        let c = SeqCut::new(w.seq.clone(), acf);
        let parts = split2(&c);
        for sc in &parts {
            prop_assert!(sc.is_simple(), "{}", sc);
        }
        let mut cands: Vec<(Seq, CutFlag)> = vec![(other, cf)];
        if let Some(s) = gen::member(&w, &p) {
            let f = gen::flag(acf, s.ns(), p.coin);
            cands.push((s, f));
        }
        for (s, f) in &cands {
            prop_assert_eq!(
                cc_member_cut(s, *f, &c),
                parts.iter().any(|sc| cc_member_cut(s, *f, sc)),
                "{} {:?}", s, f
            );
        }
    });
}

/// Condition 1: the widened value is above the new iterate. The
/// stored values need not form a chain.
pub fn widening_is_above_the_new_value(cases: u32) {
    proptest!(config(cases), |(a in gen::wseq(2), b in gen::wseq(2), depth in 1usize..4)| {
        let w = widen(&a.seq, &b.seq, depth);
        prop_assert!(seq_leq(&a.seq, &w), "new {} not below {}", a.seq, w);
    });
}

/// Condition 2: feeding any values through `B' := B' ∇ B` whenever
/// `B` is not already below `B'` stabilizes.
pub fn widening_stabilizes(cases: u32) {
    proptest!(config(cases), |(xs in prop::collection::vec(gen::wseq(2), 1..8), depth in 1usize..4)| {
        let mut cur = AbsSeq::bottom();
        let mut rounds = 0;
        loop {
            let mut changed = false;
            for x in &xs {
                if !seq_leq(&x.seq, &cur) {
                    cur = widen(&x.seq, &cur, depth);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            rounds += 1;
            prop_assert!(rounds < 64, "no stabilization: {} from {}", cur, xs.iter().map(|x| x.seq.to_string()).collect::<Vec<_>>().join(" ; "));
        }
    });
}

/// `B1 ≤ B2` implies `Cc(B1) ⊆ Cc(B2)`; the upper bound is above both.
pub fn order_is_monotone_for_membership(cases: u32) {
    proptest!(config(cases), |(w1 in gen::wseq(2), w2 in gen::wseq(2), p in gen::pick())| {
        let ub = seq_ub(&w1.seq, &w2.seq);
        prop_assert!(seq_leq(&w1.seq, &ub) && seq_leq(&w2.seq, &ub));
        if let Some(s) = gen::member(&w1, &p) {
            prop_assert!(cc_member(&s, &ub), "{} in {} but not in {}", s, w1.seq, ub);
            if seq_leq(&w1.seq, &w2.seq) {
                prop_assert!(cc_member(&s, &w2.seq));
            }
        }
    });
}

/// The abstract concatenation covers the concrete one when the
/// input is unknown.
pub fn conc_is_sound(cases: u32) {
    proptest!(config(cases), |((w1, acf) in gen::wcut(2), w2 in gen::wseq(2), p1 in gen::pick(), p2 in gen::pick())| {
        let (Some(s1), Some(s2)) = (gen::member(&w1, &p1), gen::member(&w2, &p2)) else {
            return Ok(());
        };
        let cf = gen::flag(acf, s1.ns(), p1.coin);
        let c1 = SeqCut::new(w1.seq.clone(), acf);
        prop_assert!(cc_member_cut(&s1, cf, &c1));
        let top = AbsSubst::top(2);
        let out = merge(&conc(&top, &c1, &split1(&w2.seq), &AbsCfg::default()));
        let s = concat_with_cut(s1.clone(), cf, s2.clone());
        prop_assert!(cc_member(&s, &out), "{} = <{},{:?}> □ {} not in {}", s, s1, cf, s2, out);
    });
}

/// The cut keeps the first answer.
pub fn cut_is_sound(cases: u32) {
    proptest!(config(cases), |((w, acf) in gen::wcut(2), p in gen::pick())| {
        let Some(s) = gen::member(&w, &p) else { return Ok(()) };
        let cf = gen::flag(acf, s.ns(), p.coin);
        let out = ai_cut(&SeqCut::new(w.seq.clone(), acf));
        let (s2, cf2) = match s.items.first() {
            Some(th) => (Seq::one(th.clone()), CutFlag::Cut),
            None => (s.clone(), cf),
        };
        prop_assert!(cc_member_cut(&s2, cf2, &out), "{} -> {}", s, out);
    });
}
pub const SUITE: &[(&str, super::Prop)] = &[
    ("concatenation_is_associative", concatenation_is_associative),
    ("witnesses_are_members", witnesses_are_members),
    ("split1_is_exact", split1_is_exact),
    ("split2_is_exact", split2_is_exact),
    ("widening_is_above_the_new_value", widening_is_above_the_new_value),
    ("widening_stabilizes", widening_stabilizes),
    ("order_is_monotone_for_membership", order_is_monotone_for_membership),
    ("conc_is_sound", conc_is_sound),
    ("cut_is_sound", cut_is_sound),
];
