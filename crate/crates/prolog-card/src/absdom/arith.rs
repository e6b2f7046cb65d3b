//! Order constraints between integer-valued indices, decided with a
//! difference-bound matrix over the integers.

use crate::ast::Rel;
use serde::Serialize;
use std::collections::HashMap;

/// Right-hand side of a constraint: another index or a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rhs {
    Node(u32),
    Const(i64),
}

/// `a rel b` over the integer values of indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cons {
    pub a: u32,
    pub rel: Rel,
    pub b: Rhs,
}

impl Cons {
    pub fn nodes(&self) -> impl Iterator<Item = u32> {
        let b = match self.b {
            Rhs::Node(n) => Some(n),
            Rhs::Const(_) => None,
        };
        std::iter::once(self.a).chain(b)
    }

    pub fn map(&self, f: impl Fn(u32) -> u32) -> Cons {
        Cons {
            a: f(self.a),
            rel: self.rel,
            b: match self.b {
                Rhs::Node(n) => Rhs::Node(f(n)),
                c => c,
            },
        }
    }
}

pub(crate) const INF: i64 = i64::MAX / 4;

fn add(a: i64, b: i64) -> i64 {
    if a >= INF || b >= INF {
        INF
    } else {
        (a + b).clamp(-INF, INF)
    }
}

/// Difference-bound matrix; slot 0 is the constant zero. `d[i][j] = c`
/// means `v_i - v_j <= c`. Disequalities `v_i - v_j != c` are kept aside
/// and used to tighten bounds.
#[derive(Clone, Debug)]
pub(crate) struct Dbm {
    pub d: Vec<Vec<i64>>,
    pub ne: Vec<(usize, usize, i64)>,
}

impl Dbm {
    pub fn new(vars: usize) -> Self {
        let n = vars + 1;
        let mut d = vec![vec![INF; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        Dbm { d, ne: Vec::new() }
    }

    pub fn size(&self) -> usize {
        self.d.len()
    }

    /// `v_i - v_j <= c`
    pub fn le(&mut self, i: usize, j: usize, c: i64) {
        if c < self.d[i][j] {
            self.d[i][j] = c;
        }
    }

    /// `v_i - v_j rel c`
    pub fn rel(&mut self, i: usize, rel: Rel, j: usize, c: i64) {
        match rel {
            Rel::Lt => self.le(i, j, c - 1),
            Rel::Le => self.le(i, j, c),
            Rel::Eq => {
                self.le(i, j, c);
                self.le(j, i, -c);
            }
            Rel::Ge => self.le(j, i, -c),
            Rel::Gt => self.le(j, i, -c - 1),
            Rel::Ne => self.ne.push((i, j, c)),
        }
    }

    fn floyd(&mut self) -> bool {
        let n = self.size();
        for k in 0..n {
            for i in 0..n {
                let dik = self.d[i][k];
                if dik >= INF {
                    continue;
                }
                for j in 0..n {
                    let v = add(dik, self.d[k][j]);
                    if v < self.d[i][j] {
                        self.d[i][j] = v;
                    }
                }
            }
        }
        (0..n).all(|i| self.d[i][i] >= 0)
    }

    /// Closes the matrix; false when the constraints are unsatisfiable.
    pub fn close(&mut self) -> bool {
        loop {
            if !self.floyd() {
                return false;
            }
            let mut changed = false;
            for &(i, j, c) in &self.ne.clone() {
                let hi = self.d[i][j];
                let lo = -self.d[j][i];
                if hi == c && lo == c {
                    return false;
                }
                if hi == c {
                    self.d[i][j] = c - 1;
                    changed = true;
                } else if lo == c {
                    self.d[j][i] = -(c + 1);
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    /// On a closed matrix: does `v_i - v_j rel c` always hold?
    pub fn entails(&self, i: usize, rel: Rel, j: usize, c: i64) -> bool {
        let hi = self.d[i][j];
        let lo = -self.d[j][i];
        match rel {
            Rel::Lt => hi < c,
            Rel::Le => hi <= c,
            Rel::Eq => hi <= c && lo >= c,
            Rel::Ge => lo >= c,
            Rel::Gt => lo > c,
            Rel::Ne => {
                hi < c || lo > c || self.ne.iter().any(|&(a, b, k)| (a, b, k) == (i, j, c) || (a, b, k) == (j, i, -c))
            }
        }
    }
}

/// Constraint system of one abstract substitution, with the slot of each
/// integer-valued index.
pub(crate) struct System {
    pub dbm: Dbm,
    pub slot: HashMap<u32, usize>,
}

impl System {
    /// Builds and closes the system; `None` when inconsistent. `ints`
    /// gives the indices whose value is a known integer constant.
    pub fn build(cons: &[Cons], ints: &HashMap<u32, i64>) -> Option<System> {
        let mut ids: Vec<u32> = cons.iter().flat_map(|c| c.nodes()).collect();
        ids.extend(ints.keys());
        ids.sort_unstable();
        ids.dedup();
        let slot: HashMap<u32, usize> = ids.iter().enumerate().map(|(k, n)| (*n, k + 1)).collect();
        let mut dbm = Dbm::new(ids.len());
        for (n, v) in ints {
            dbm.rel(slot[n], Rel::Eq, 0, *v);
        }
        for c in cons {
            match c.b {
                Rhs::Node(b) => dbm.rel(slot[&c.a], c.rel, slot[&b], 0),
                Rhs::Const(v) => dbm.rel(slot[&c.a], c.rel, 0, v),
            }
        }
        if dbm.close() {
            Some(System { dbm, slot })
        } else {
            None
        }
    }

    pub fn entails(&self, c: &Cons) -> bool {
        if let Rhs::Node(b) = c.b {
            if b == c.a {
                return matches!(c.rel, Rel::Le | Rel::Eq | Rel::Ge);
            }
        }
        let Some(&i) = self.slot.get(&c.a) else { return false };
        match c.b {
            Rhs::Node(b) => match self.slot.get(&b) {
                Some(&j) => self.dbm.entails(i, c.rel, j, 0),
                None => false,
            },
            Rhs::Const(v) => self.dbm.entails(i, c.rel, 0, v),
        }
    }

    /// Constraints among the indices accepted by `keep`, in canonical
    /// order; `ints` are constants and only appear through bounds.
    pub fn emit(&self, keep: impl Fn(u32) -> bool, ints: &HashMap<u32, i64>) -> Vec<Cons> {
        let d = &self.dbm.d;
        let mut nodes: Vec<(u32, usize)> =
            self.slot.iter().filter(|(n, _)| keep(**n) && !ints.contains_key(n)).map(|(n, s)| (*n, *s)).collect();
        nodes.sort_unstable();
        let mut out = Vec::new();
        for &(n, i) in &nodes {
            let (hi, lo) = (d[i][0], -d[0][i]);
            if hi < INF && hi == lo {
                out.push(Cons { a: n, rel: Rel::Eq, b: Rhs::Const(hi) });
                continue;
            }
            if lo > -INF {
                out.push(Cons { a: n, rel: Rel::Ge, b: Rhs::Const(lo) });
            }
            if hi < INF {
                out.push(Cons { a: n, rel: Rel::Le, b: Rhs::Const(hi) });
            }
            for &(a, b, c) in &self.dbm.ne {
                if b == 0 && a == i && c > lo && c < hi {
                    out.push(Cons { a: n, rel: Rel::Ne, b: Rhs::Const(c) });
                }
            }
        }
        for (x, &(n, i)) in nodes.iter().enumerate() {
            for &(m, j) in &nodes[x + 1..] {
                let (hi, lo) = (d[i][j], -d[j][i]);
                let rel = if hi <= 0 && lo >= 0 {
                    Some(Rel::Eq)
                } else if hi <= -1 {
                    Some(Rel::Lt)
                } else if lo >= 1 {
                    Some(Rel::Gt)
                } else if hi <= 0 {
                    Some(Rel::Le)
                } else if lo >= 0 {
                    Some(Rel::Ge)
                } else if self.dbm.ne.iter().any(|&(a, b, c)| c == 0 && ((a, b) == (i, j) || (a, b) == (j, i))) {
                    Some(Rel::Ne)
                } else {
                    None
                };
                if let Some(rel) = rel {
                    out.push(Cons { a: n, rel, b: Rhs::Node(m) });
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}
