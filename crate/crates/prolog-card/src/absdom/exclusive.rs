//! Incompatibility of two clause outputs for a common input.

use super::arith::{Dbm, INF};
use super::{AbsCfg, AbsSubst, Mode, Pat};
use crate::ast::Rel;
use std::collections::HashMap;

/// Maps indices of `b` to indices of its instance `bk`, following the
/// patterns of `b` from the roots. Indices below a pattern that `bk` does
/// not refine stay unmapped.
fn instance_map(b: &Pat, bk: &Pat) -> Vec<Option<u32>> {
    let mut im = vec![None; b.nodes.len()];
    let mut stack: Vec<(u32, u32)> = b.sv.iter().copied().zip(bk.sv.iter().copied()).collect();
    while let Some((n, m)) = stack.pop() {
        if im[n as usize].is_some() {
            continue;
        }
        im[n as usize] = Some(m);
        if let (Some((f, cs)), Some((g, ds))) = (b.frm(n), bk.frm(m)) {
            if f == g {
                stack.extend(cs.iter().copied().zip(ds.iter().copied()));
            }
        }
    }
    im
}

fn directly_exclusive(p1: &Pat, a: u32, p2: &Pat, b: u32) -> bool {
    matches!((p1.frm(a), p2.frm(b)), (Some((f, _)), Some((g, _))) if f != g)
}

/// Walks two descriptions of the same ground term in parallel; collects
/// the aligned index pairs and reports a functor clash.
fn align(p1: &Pat, a: u32, p2: &Pat, b: u32, out: &mut Vec<(u32, u32)>) -> bool {
    if out.contains(&(a, b)) {
        return false;
    }
    out.push((a, b));
    match (p1.frm(a), p2.frm(b)) {
        (Some((f, cs)), Some((g, ds))) => {
            if f != g {
                return true;
            }
            cs.iter().zip(ds).any(|(c, d)| align(p1, *c, p2, *d, out))
        }
        _ => false,
    }
}

/// True only if no concrete input described by `b` has instances in both
/// `b1` and `b2` (the outputs of two clauses for the input `b`).
pub fn exclusive(b: &AbsSubst, b1: &AbsSubst, b2: &AbsSubst, cfg: &AbsCfg) -> bool {
    let (p, p1, p2) = match (b, b1, b2) {
        (AbsSubst::Empty, _, _) | (_, AbsSubst::Empty, _) | (_, _, AbsSubst::Empty) => return true,
        (AbsSubst::Pat(p), AbsSubst::Pat(p1), AbsSubst::Pat(p2)) => (p, p1, p2),
    };
    let im1 = instance_map(p, p1);
    let im2 = instance_map(p, p2);
    let mut aligned = Vec::new();
    for n in 0..p.nodes.len() {
        let (Some(a), Some(b)) = (im1[n], im2[n]) else { continue };
        let m = p.nodes[n].mode;
        if m == Mode::G {
            if align(p1, a, p2, b, &mut aligned) {
                return true;
            }
        } else if m.le(Mode::NOVAR) && directly_exclusive(p1, a, p2, b) {
            return true;
        }
    }
    cfg.arith && arith_conflict(p1, p2, &aligned)
}

/// The aligned pairs denote equal integers on both sides; the combined
/// constraints of the two outputs over them are unsatisfiable.
fn arith_conflict(p1: &Pat, p2: &Pat, pairs: &[(u32, u32)]) -> bool {
    if p1.arith.is_empty() && p2.arith.is_empty() {
        return false;
    }
    let (s1, s2) = (p1.system(), p2.system());
    let mut dbm = Dbm::new(pairs.len());
    let slot = |i: usize| i + 1;
    let mut any = false;
    for (sys, pick) in [(&s1, 0), (&s2, 1)] {
        let node = |pr: &(u32, u32)| if pick == 0 { pr.0 } else { pr.1 };
        let slots: HashMap<usize, usize> =
            pairs.iter().enumerate().filter_map(|(i, pr)| sys.slot.get(&node(pr)).map(|s| (i, *s))).collect();
        for (&i, &si) in &slots {
            any = true;
            let d = &sys.dbm.d;
            if d[si][0] < INF {
                dbm.le(slot(i), 0, d[si][0]);
            }
            if d[0][si] < INF {
                dbm.le(0, slot(i), d[0][si]);
            }
            for (&j, &sj) in &slots {
                if i != j && d[si][sj] < INF {
                    dbm.le(slot(i), slot(j), d[si][sj]);
                }
            }
            for &(x, y, c) in &sys.dbm.ne {
                if x == si {
                    if y == 0 {
                        dbm.rel(slot(i), Rel::Ne, 0, c);
                    }
                    for (&j, &sj) in &slots {
                        if sj == y {
                            dbm.rel(slot(i), Rel::Ne, slot(j), c);
                        }
                    }
                }
            }
        }
        for (i, a) in pairs.iter().enumerate() {
            for (j, b) in pairs.iter().enumerate().skip(i + 1) {
                if node(a) == node(b) {
                    dbm.rel(slot(i), Rel::Eq, slot(j), 0);
                }
            }
        }
    }
    any && !dbm.close()
}
