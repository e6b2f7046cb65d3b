//! Extension of the caller's substitution with the result of a call.
//!
//! The caller pattern `b1` is matched against the call result `b2` from
//! the argument roots. Each reached caller index gets a position in `b2`:
//! either exactly a `b2` index, or somewhere inside one (below a caller
//! pattern that `b2` only knows as a leaf). Caller leaves at a `b2`
//! pattern are replaced by a copy of it; caller leaves at the same `b2`
//! index are merged. Indices not reached from the arguments only change
//! through sharing with reached leaves.

use super::arith::{Cons, Rhs};
use super::work::bind_effect;
use super::{canon, norm_pair, AbsSubst, Mode, Node, Pat};
use crate::ast::Var;
use std::collections::{BTreeSet, HashMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pos {
    At(u32),
    Inside(u32),
}

impl Pos {
    fn node(self) -> u32 {
        match self {
            Pos::At(n) | Pos::Inside(n) => n,
        }
    }
}

fn pos_mode(b2: &Pat, pos: Pos) -> Mode {
    match pos {
        Pos::At(n) => b2.mode(n),
        Pos::Inside(n) if b2.mode(n) == Mode::G => Mode::G,
        Pos::Inside(_) => Mode::ANY,
    }
}

/// `b1` over the clause variables, `b2` the call's result over the formals
/// standing for `args`.
pub fn extg(args: &[Var], b1: &AbsSubst, b2: &AbsSubst) -> AbsSubst {
    let (p1, p2) = match (b1, b2) {
        (AbsSubst::Pat(p1), AbsSubst::Pat(p2)) => (p1, p2),
        _ => return AbsSubst::Empty,
    };
    let n1 = p1.nodes.len();
    let mut pos: Vec<Option<Pos>> = vec![None; n1];
    let mut stack: Vec<(u32, u32)> = args.iter().enumerate().map(|(k, v)| (p1.sv[v.ix()], p2.sv[k])).collect();
    stack.reverse();
    while let Some((a, b)) = stack.pop() {
        if pos[a as usize].is_some() {
            continue;
        }
        pos[a as usize] = Some(Pos::At(b));
        match (p1.frm(a), p2.frm(b)) {
            (Some((f, c1)), Some((g, c2))) => {
                if f != g {
                    return AbsSubst::Empty;
                }
                for (x, y) in c1.iter().zip(c2).rev() {
                    stack.push((*x, *y));
                }
            }
            (Some((_, c1)), None) => {
                if p2.mode(b) == Mode::V {
                    return AbsSubst::Empty;
                }
                let mut inner: Vec<u32> = c1.clone();
                while let Some(x) = inner.pop() {
                    if pos[x as usize].is_none() {
                        pos[x as usize] = Some(Pos::Inside(b));
                        if let Some((_, cs)) = p1.frm(x) {
                            inner.extend(cs.iter().copied());
                        }
                    }
                }
            }
            (None, _) => {}
        }
    }

    let mut nodes: Vec<Node> = p1.nodes.clone();
    let mut opos: Vec<Option<Pos>> = pos.clone();
    let mut redirect: Vec<u32> = (0..n1 as u32).collect();
    let mut t2: HashMap<u32, u32> = HashMap::new();

    for (a, (node, ps)) in p1.nodes.iter().zip(&pos).enumerate() {
        if let (Some(_), Some(Pos::At(b))) = (&node.frm, ps) {
            t2.entry(*b).or_insert(a as u32);
        }
    }
    fn import(b: u32, p2: &Pat, nodes: &mut Vec<Node>, opos: &mut Vec<Option<Pos>>, t2: &mut HashMap<u32, u32>) -> u32 {
        if let Some(&r) = t2.get(&b) {
            return r;
        }
        let frm = p2.frm(b).map(|(f, cs)| (f.clone(), cs.iter().map(|c| import(*c, p2, nodes, opos, t2)).collect()));
        nodes.push(Node { mode: p2.mode(b), frm });
        opos.push(Some(Pos::At(b)));
        let id = nodes.len() as u32 - 1;
        t2.insert(b, id);
        id
    }
    for a in 0..n1 {
        if p1.nodes[a].frm.is_some() {
            continue;
        }
        let Some(Pos::At(b)) = pos[a] else { continue };
        if let Some(&r) = t2.get(&b) {
            redirect[a] = r;
        } else if p2.frm(b).is_none() {
            t2.insert(b, a as u32);
        } else {
            redirect[a] = import(b, p2, &mut nodes, &mut opos, &mut t2);
        }
    }

    // modes of reached caller indices
    for a in 0..n1 {
        let Some(ps) = pos[a] else { continue };
        let pre = p1.nodes[a].mode;
        let r = redirect[a] as usize;
        if p1.nodes[a].frm.is_some() {
            let mut m = if pre == Mode::G { Mode::G } else { Mode::NOVAR };
            if pos_mode(p2, ps) == Mode::G {
                m = Mode::G;
            }
            nodes[a].mode = m;
        } else if r == a {
            nodes[a].mode = pre.instantiated().meet(pos_mode(p2, ps));
        } else if nodes[r].frm.is_none() {
            nodes[r].mode = nodes[r].mode.meet(pre.instantiated()).meet(pos_mode(p2, ps));
        } else if pre == Mode::G {
            nodes[r].mode = Mode::G;
        }
    }
    // unreached patterns re-derive their mode from their arguments
    for a in 0..n1 {
        if pos[a].is_none() && p1.nodes[a].frm.is_some() && p1.nodes[a].mode != Mode::G {
            nodes[a].mode = Mode::NOVAR;
        }
    }
    for node in nodes.iter_mut() {
        if let Some((_, cs)) = &mut node.frm {
            for c in cs.iter_mut() {
                if (*c as usize) < n1 {
                    *c = redirect[*c as usize];
                }
            }
        }
    }

    // sharing
    let l2 = |p: Pos| -> Vec<u32> { p2.leaves_under(p.node()) };
    let share2 = |x: Pos, y: Pos| -> bool {
        let ly = l2(y);
        l2(x).iter().any(|u| ly.iter().any(|w| p2.pair_shares(*u, *w)))
    };
    let is_leaf = |n: usize, nodes: &Vec<Node>| nodes[n].frm.is_none();
    // caller leaves with a position and the unreached leaves sharing with them
    let arg_leaves: Vec<u32> = (0..n1 as u32).filter(|a| pos[*a as usize].is_some() && p1.frm(*a).is_none()).collect();
    let pre_sharers = |d: u32| -> Vec<u32> {
        arg_leaves.iter().copied().filter(|p| p1.mode(*p).may_nonground() && p1.pair_shares(d, *p) && d != *p).collect()
    };
    let post_mode = |p: u32, nodes: &Vec<Node>| -> Mode {
        let r = redirect[p as usize] as usize;
        if nodes[r].frm.is_some() {
            pos_mode(p2, pos[p as usize].unwrap())
        } else {
            nodes[r].mode
        }
    };
    let mut result_leaves: Vec<u32> = Vec::new();
    for (i, n) in nodes.iter().enumerate() {
        if n.frm.is_none() && (i >= n1 || redirect[i] == i as u32) {
            result_leaves.push(i as u32);
        }
    }
    let mut sharers_of: HashMap<u32, Vec<u32>> = HashMap::new();
    for &d in &result_leaves {
        if opos[d as usize].is_none() && (d as usize) < n1 {
            let a = pre_sharers(d);
            if !a.is_empty() {
                let changed: Vec<Mode> = a.iter().map(|p| post_mode(*p, &nodes)).filter(|m| *m != Mode::V).collect();
                if !changed.is_empty() {
                    let allg = a.iter().all(|p| post_mode(*p, &nodes) == Mode::G);
                    nodes[d as usize].mode = bind_effect(nodes[d as usize].mode, allg);
                }
                sharers_of.insert(d, a);
            }
        }
    }
    let ng: Vec<u32> = result_leaves
        .iter()
        .copied()
        .filter(|n| is_leaf(*n as usize, &nodes) && nodes[*n as usize].mode.may_nonground())
        .collect();
    let mut ps = BTreeSet::new();
    for (i, &x) in ng.iter().enumerate() {
        for &y in &ng[i + 1..] {
            let (px, py) = (opos[x as usize], opos[y as usize]);
            let shares = match (px, py) {
                (Some(px), Some(py)) => share2(px, py),
                (None, Some(py)) => {
                    sharers_of.get(&x).is_some_and(|a| a.iter().any(|p| share2(pos[*p as usize].unwrap(), py)))
                }
                (Some(px), None) => {
                    sharers_of.get(&y).is_some_and(|a| a.iter().any(|p| share2(pos[*p as usize].unwrap(), px)))
                }
                (None, None) => {
                    p1.pair_shares(x, y)
                        || match (sharers_of.get(&x), sharers_of.get(&y)) {
                            (Some(a), Some(b)) => a.iter().any(|p| {
                                b.iter().any(|q| share2(pos[*p as usize].unwrap(), pos[*q as usize].unwrap()))
                            }),
                            _ => false,
                        }
                }
            };
            if shares {
                ps.insert(norm_pair(x, y));
            }
        }
    }

    let mut arith: Vec<Cons> = p1.arith.iter().map(|c| c.map(|x| redirect[x as usize])).collect();
    for c in &p2.arith {
        let a = t2.get(&c.a).copied();
        let b = match c.b {
            Rhs::Node(b) => t2.get(&b).map(|x| Rhs::Node(*x)),
            k => Some(k),
        };
        if let (Some(a), Some(b)) = (a, b) {
            arith.push(Cons { a, rel: c.rel, b });
        }
    }
    let sv = p1.sv.iter().map(|x| redirect[*x as usize]).collect();
    canon(Pat { sv, nodes, ps, arith })
}
