//! Ordering, upper bound, widening and depth capping.

use super::arith::{Cons, Rhs};
use super::{canon, norm_pair, AbsSubst, Node, Pat};
use crate::ast::Rel;
use std::collections::{BTreeSet, HashMap, VecDeque};

/// `Cc(b1) ⊆ Cc(b2)`, decided by matching the structure of `b2` into `b1`.
pub fn leq(b1: &AbsSubst, b2: &AbsSubst) -> bool {
    let (p1, p2) = match (b1, b2) {
        (AbsSubst::Empty, _) => return true,
        (_, AbsSubst::Empty) => return false,
        (AbsSubst::Pat(p1), AbsSubst::Pat(p2)) => (p1, p2),
    };
    if p1.dom() != p2.dom() {
        return false;
    }
    let mut im: HashMap<u32, u32> = HashMap::new();
    let mut stack: Vec<(u32, u32)> = p2.sv.iter().copied().zip(p1.sv.iter().copied()).collect();
    while let Some((n2, n1)) = stack.pop() {
        if let Some(&m) = im.get(&n2) {
            if m != n1 {
                return false;
            }
            continue;
        }
        im.insert(n2, n1);
        if !p1.mode(n1).le(p2.mode(n2)) {
            return false;
        }
        if let Some((f, cs2)) = p2.frm(n2) {
            match p1.frm(n1) {
                Some((g, cs1)) if f == g => stack.extend(cs2.iter().copied().zip(cs1.iter().copied())),
                _ => return false,
            }
        }
    }
    let leaves: Vec<u32> = im.keys().copied().filter(|n| p2.frm(*n).is_none() && p2.mode(*n).may_nonground()).collect();
    for (i, &u) in leaves.iter().enumerate() {
        for &w in &leaves[i + 1..] {
            if !p2.ps.contains(&norm_pair(u, w)) && p1.share_star(im[&u], im[&w]) {
                return false;
            }
        }
    }
    if p2.arith.is_empty() {
        return true;
    }
    let sys = p1.system();
    p2.arith.iter().all(|c| {
        let Some(&a) = im.get(&c.a) else { return false };
        let b = match c.b {
            Rhs::Node(b) => match im.get(&b) {
                Some(&b) => Rhs::Node(b),
                None => return false,
            },
            k => k,
        };
        let c1 = Cons { a, rel: c.rel, b };
        c1.nodes().all(|n| p1.is_int(n)) && sys.entails(&c1)
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Join,
    Widen,
}

/// Least common generalization of the two patterns, with modes joined,
/// sharing unioned and constraints intersected.
pub fn union(b1: &AbsSubst, b2: &AbsSubst) -> AbsSubst {
    combine(b1, b2, Kind::Join)
}

/// Upper bound of `new` and `old` whose constraints all come from `old`,
/// with pattern depth capped at `depth`.
pub fn widen(new: &AbsSubst, old: &AbsSubst, depth: usize) -> AbsSubst {
    cap(&combine(new, old, Kind::Widen), depth)
}

fn combine(b1: &AbsSubst, b2: &AbsSubst, kind: Kind) -> AbsSubst {
    let (p1, p2) = match (b1, b2) {
        (AbsSubst::Empty, b) | (b, AbsSubst::Empty) => return b.clone(),
        (AbsSubst::Pat(p1), AbsSubst::Pat(p2)) => (p1, p2),
    };
    let mut nodes: Vec<Node> = Vec::new();
    let mut origin: Vec<(u32, u32)> = Vec::new();
    let mut memo: HashMap<(u32, u32), u32> = HashMap::new();
    fn go(
        a: u32,
        b: u32,
        p1: &Pat,
        p2: &Pat,
        nodes: &mut Vec<Node>,
        origin: &mut Vec<(u32, u32)>,
        memo: &mut HashMap<(u32, u32), u32>,
    ) -> u32 {
        if let Some(&n) = memo.get(&(a, b)) {
            return n;
        }
        let id = nodes.len() as u32;
        memo.insert((a, b), id);
        let mode = p1.mode(a).join(p2.mode(b));
        nodes.push(Node::leaf(mode));
        origin.push((a, b));
        if let (Some((f, c1)), Some((g, c2))) = (p1.frm(a), p2.frm(b)) {
            if f == g {
                let cs = c1.iter().zip(c2).map(|(x, y)| go(*x, *y, p1, p2, nodes, origin, memo)).collect();
                nodes[id as usize].frm = Some((f.clone(), cs));
            }
        }
        id
    }
    let sv: Vec<u32> =
        p1.sv.iter().zip(&p2.sv).map(|(a, b)| go(*a, *b, p1, p2, &mut nodes, &mut origin, &mut memo)).collect();
    let leaves: Vec<u32> = (0..nodes.len() as u32)
        .filter(|n| nodes[*n as usize].frm.is_none() && nodes[*n as usize].mode.may_nonground())
        .collect();
    let mut ps = BTreeSet::new();
    for (i, &x) in leaves.iter().enumerate() {
        for &y in &leaves[i + 1..] {
            let (a, b) = origin[x as usize];
            let (c, d) = origin[y as usize];
            if p1.share_star(a, c) || p2.share_star(b, d) {
                ps.insert((x, y));
            }
        }
    }
    let arith = match kind {
        Kind::Join => join_arith(p1, p2, &origin),
        Kind::Widen => widen_arith(p1, p2, &origin),
    };
    canon(Pat { sv, nodes, ps, arith })
}

const RELS: [Rel; 6] = [Rel::Eq, Rel::Lt, Rel::Gt, Rel::Le, Rel::Ge, Rel::Ne];

/// Strongest relations and bounds holding on both sides.
fn join_arith(p1: &Pat, p2: &Pat, origin: &[(u32, u32)]) -> Vec<Cons> {
    if p1.arith.is_empty() && p2.arith.is_empty() {
        return Vec::new();
    }
    let (s1, s2) = (p1.system(), p2.system());
    let ints: Vec<u32> = (0..origin.len() as u32)
        .filter(|n| p1.is_int(origin[*n as usize].0) && p2.is_int(origin[*n as usize].1))
        .collect();
    let mut out = Vec::new();
    for &n in &ints {
        let (a, b) = origin[n as usize];
        let bound = |p: &Pat, s: &super::arith::System, x: u32| -> (i64, i64) {
            if let Some(v) = p.frm(x).and_then(|(f, _)| f.int_value()) {
                return (v, v);
            }
            let k = s.slot[&x];
            (-s.dbm.d[0][k], s.dbm.d[k][0])
        };
        let (lo1, hi1) = bound(p1, &s1, a);
        let (lo2, hi2) = bound(p2, &s2, b);
        let (lo, hi) = (lo1.min(lo2), hi1.max(hi2));
        if lo > -super::arith::INF {
            out.push(Cons { a: n, rel: Rel::Ge, b: Rhs::Const(lo) });
        }
        if hi < super::arith::INF {
            out.push(Cons { a: n, rel: Rel::Le, b: Rhs::Const(hi) });
        }
    }
    for (i, &x) in ints.iter().enumerate() {
        for &y in &ints[i + 1..] {
            let (a, b) = origin[x as usize];
            let (c, d) = origin[y as usize];
            for rel in RELS {
                let c1 = Cons { a, rel, b: Rhs::Node(c) };
                let c2 = Cons { a: b, rel, b: Rhs::Node(d) };
                if s1.entails(&c1) && s2.entails(&c2) {
                    out.push(Cons { a: x, rel, b: Rhs::Node(y) });
                    break;
                }
            }
        }
    }
    out
}

/// Constraints of `old` (second operand) that `new` entails.
fn widen_arith(new: &Pat, old: &Pat, origin: &[(u32, u32)]) -> Vec<Cons> {
    if old.arith.is_empty() {
        return Vec::new();
    }
    let s1 = new.system();
    let mut by_old: HashMap<u32, Vec<u32>> = HashMap::new();
    for (n, (_, o)) in origin.iter().enumerate() {
        by_old.entry(*o).or_default().push(n as u32);
    }
    let mut out = Vec::new();
    for c in &old.arith {
        for &x in by_old.get(&c.a).into_iter().flatten() {
            let a = origin[x as usize].0;
            match c.b {
                Rhs::Const(k) => {
                    let c1 = Cons { a, rel: c.rel, b: Rhs::Const(k) };
                    if new.is_int(a) && s1.entails(&c1) {
                        out.push(Cons { a: x, rel: c.rel, b: c.b });
                    }
                }
                Rhs::Node(ob) => {
                    for &y in by_old.get(&ob).into_iter().flatten() {
                        let b = origin[y as usize].0;
                        let c1 = Cons { a, rel: c.rel, b: Rhs::Node(b) };
                        if new.is_int(a) && new.is_int(b) && s1.entails(&c1) {
                            out.push(Cons { a: x, rel: c.rel, b: Rhs::Node(y) });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Replaces patterns nested at depth `depth` or more by leaves carrying
/// their mode; sharing is inherited from the leaves they contained.
pub fn cap(b: &AbsSubst, depth: usize) -> AbsSubst {
    let AbsSubst::Pat(p) = b else { return AbsSubst::Empty };
    let mut dist = vec![usize::MAX; p.nodes.len()];
    let mut queue = VecDeque::new();
    for &r in &p.sv {
        if dist[r as usize] == usize::MAX {
            dist[r as usize] = 0;
            queue.push_back(r);
        }
    }
    while let Some(x) = queue.pop_front() {
        if let Some((_, cs)) = p.frm(x) {
            for &c in cs {
                if dist[c as usize] == usize::MAX {
                    dist[c as usize] = dist[x as usize] + 1;
                    queue.push_back(c);
                }
            }
        }
    }
    let cut: Vec<bool> = (0..p.nodes.len()).map(|i| p.nodes[i].frm.is_some() && dist[i] >= depth).collect();
    if !cut.iter().any(|c| *c) {
        return b.clone();
    }
    let mut q = p.clone();
    for (i, c) in cut.iter().enumerate() {
        if *c {
            q.nodes[i].frm = None;
        }
    }
    // reachable leaves after the cut, with the original leaves they stand for
    let mut reps: Vec<(u32, Vec<u32>)> = Vec::new();
    let mut seen = vec![false; q.nodes.len()];
    let mut stack: Vec<u32> = q.sv.clone();
    while let Some(x) = stack.pop() {
        if std::mem::replace(&mut seen[x as usize], true) {
            continue;
        }
        match q.frm(x) {
            Some((_, cs)) => stack.extend(cs.iter().copied()),
            None if q.mode(x).may_nonground() => {
                reps.push((x, if cut[x as usize] { p.leaves_under(x) } else { vec![x] }));
            }
            None => {}
        }
    }
    let mut ps = BTreeSet::new();
    for (i, (x, rx)) in reps.iter().enumerate() {
        for (y, ry) in &reps[i + 1..] {
            if rx.iter().any(|a| ry.iter().any(|b| p.pair_shares(*a, *b))) {
                ps.insert(norm_pair(*x, *y));
            }
        }
    }
    q.ps = ps;
    q.arith.retain(|c| c.nodes().all(|n| !cut[n as usize]));
    canon(q)
}
