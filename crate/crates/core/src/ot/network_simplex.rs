//! Primal network simplex for dense transportation problems.
//!
//! Sources `0..p`, sinks `p..p+q` and an artificial root `p+q`. Real arcs are
//! implicit: arc `a < p*q` runs from source `a / q` to sink `a % q`. Every
//! source also has an artificial arc to the root and the root one to every
//! sink, priced at a cost larger than any path of real arcs, which makes the
//! starting tree feasible. Leaving arcs follow the strongly-feasible rule, so
//! degenerate pivots cannot cycle.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

pub(crate) struct Solution {
    /// Row-major `p x q` flows.
    pub flow: Vec<f64>,
    pub cost: f64,
    /// Dual objective `sum(a_i u_i) + sum(b_j v_j)`.
    pub dual: f64,
    pub iterations: usize,
}

struct Simplex<'a, C: Fn(usize, usize) -> f64> {
    p: usize,
    q: usize,
    cost: &'a C,
    big_m: f64,
    flow: Vec<f64>,
    in_tree: Vec<bool>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    depth: Vec<usize>,
    pot: Vec<f64>,
    children: Vec<Vec<usize>>,
    next_arc: usize,
}

const NONE: usize = usize::MAX;

impl<C: Fn(usize, usize) -> f64> Simplex<'_, C> {
    fn real_arcs(&self) -> usize {
        self.p * self.q
    }

    fn root(&self) -> usize {
        self.p + self.q
    }

    fn ends(&self, a: usize) -> (usize, usize) {
        let real = self.real_arcs();
        if a < real {
            (a / self.q, self.p + a % self.q)
        } else {
            let v = a - real;
            if v < self.p {
                (v, self.root())
            } else {
                (self.root(), v)
            }
        }
    }

    fn arc_cost(&self, a: usize) -> f64 {
        if a < self.real_arcs() {
            (self.cost)(a / self.q, a % self.q)
        } else {
            self.big_m
        }
    }

    fn reduced(&self, a: usize) -> f64 {
        let (s, t) = self.ends(a);
        self.arc_cost(a) + self.pot[s] - self.pot[t]
    }

    fn find_entering(&mut self, tol: f64) -> Option<usize> {
        let total = self.in_tree.len();
        let block = (math::sqrt(total as f64) as usize).max(16);
        let mut best = None;
        let mut best_rc = -tol;
        let mut seen = 0;
        let mut a = self.next_arc;
        for _ in 0..total {
            if !self.in_tree[a] {
                let rc = self.reduced(a);
                if rc < best_rc {
                    best_rc = rc;
                    best = Some(a);
                }
            }
            a += 1;
            if a == total {
                a = 0;
            }
            seen += 1;
            if seen == block {
                if best.is_some() {
                    break;
                }
                seen = 0;
            }
        }
        self.next_arc = a;
        best
    }

    fn join(&self, mut a: usize, mut b: usize) -> usize {
        while a != b {
            if self.depth[a] > self.depth[b] {
                a = self.parent[a];
            } else if self.depth[b] > self.depth[a] {
                b = self.parent[b];
            } else {
                a = self.parent[a];
                b = self.parent[b];
            }
        }
        a
    }

    fn remove_child(&mut self, parent: usize, child: usize) {
        let list = &mut self.children[parent];
        let pos = list.iter().position(|&c| c == child).expect("tree child lists out of sync");
        list.swap_remove(pos);
    }

    fn pivot(&mut self, enter: usize) -> Result<()> {
        let (u, v) = self.ends(enter);
        let join = self.join(u, v);

        // Only arcs traversed against their direction can block.
        let mut delta = f64::INFINITY;
        let mut leave = NONE;
        let mut side = 0;
        let mut x = u;
        while x != join {
            let a = self.pred[x];
            if self.ends(a).0 == x && self.flow[a] < delta {
                delta = self.flow[a];
                leave = x;
                side = 1;
            }
            x = self.parent[x];
        }
        x = v;
        while x != join {
            let a = self.pred[x];
            if self.ends(a).1 == x && self.flow[a] <= delta {
                delta = self.flow[a];
                leave = x;
                side = 2;
            }
            x = self.parent[x];
        }
        if leave == NONE {
            return Err(Error::SolverFailure("unbounded pivot cycle".into()));
        }

        if delta > 0.0 {
            self.flow[enter] += delta;
            let mut x = u;
            while x != join {
                let a = self.pred[x];
                if self.ends(a).0 == x {
                    self.flow[a] -= delta;
                } else {
                    self.flow[a] += delta;
                }
                x = self.parent[x];
            }
            x = v;
            while x != join {
                let a = self.pred[x];
                if self.ends(a).1 == x {
                    self.flow[a] -= delta;
                } else {
                    self.flow[a] += delta;
                }
                x = self.parent[x];
            }
        }
        let leave_arc = self.pred[leave];
        self.flow[leave_arc] = 0.0;

        // Re-hang the detached subtree from the entering arc.
        let (start, new_parent) = if side == 1 { (u, v) } else { (v, u) };
        let mut path = vec![start];
        while *path.last().unwrap() != leave {
            path.push(self.parent[*path.last().unwrap()]);
        }
        let old_pred: Vec<usize> = path.iter().map(|&x| self.pred[x]).collect();
        self.remove_child(self.parent[leave], leave);
        for w in path.windows(2) {
            self.remove_child(w[1], w[0]);
        }
        self.parent[start] = new_parent;
        self.pred[start] = enter;
        self.children[new_parent].push(start);
        for i in 0..path.len() - 1 {
            self.parent[path[i + 1]] = path[i];
            self.pred[path[i + 1]] = old_pred[i];
            self.children[path[i]].push(path[i + 1]);
        }
        self.in_tree[leave_arc] = false;
        self.in_tree[enter] = true;

        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            let par = self.parent[x];
            let a = self.pred[x];
            self.depth[x] = self.depth[par] + 1;
            let c = self.arc_cost(a);
            self.pot[x] = if self.ends(a).1 == x { self.pot[par] + c } else { self.pot[par] - c };
            stack.extend_from_slice(&self.children[x]);
        }
        Ok(())
    }
}

/// Solves `min sum c(i,j) x_ij` subject to row sums `supply` and column sums
/// `demand` (both strictly positive, equal totals up to rounding).
pub(crate) fn solve<C>(supply: &[f64], demand: &[f64], cost: &C, max_cost: f64) -> Result<Solution>
where
    C: Fn(usize, usize) -> f64,
{
    let p = supply.len();
    let q = demand.len();
    let nodes = p + q + 1;
    let big_m = (max_cost.max(0.0) + 1.0) * nodes as f64;
    let real = p * q;
    let total = real + p + q;
    let root = p + q;

    let mut s = Simplex {
        p,
        q,
        cost,
        big_m,
        flow: vec![0.0; total],
        in_tree: vec![false; total],
        parent: vec![root; nodes],
        pred: vec![NONE; nodes],
        depth: vec![1; nodes],
        pot: vec![0.0; nodes],
        children: vec![Vec::new(); nodes],
        next_arc: 0,
    };
    s.parent[root] = NONE;
    s.depth[root] = 0;
    for v in 0..p + q {
        let a = real + v;
        s.pred[v] = a;
        s.in_tree[a] = true;
        s.flow[a] = if v < p { supply[v] } else { demand[v - p] };
        s.pot[v] = if v < p { -big_m } else { big_m };
        s.children[root].push(v);
    }

    let tol = 1e-13 * big_m;
    let max_iter = 20 * total + 10_000;
    let mut iterations = 0;
    while let Some(enter) = s.find_entering(tol) {
        s.pivot(enter)?;
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::SolverFailure("network simplex iteration limit".into()));
        }
    }

    let mass: f64 = supply.iter().sum();
    let stranded: f64 = s.flow[real..].iter().sum();
    if stranded > 1e-9 * mass.max(1.0) {
        return Err(Error::SolverFailure("artificial arcs carry flow at the optimum".into()));
    }
    let flow: Vec<f64> = s.flow[..real].iter().map(|&f| f.max(0.0)).collect();
    let primal: f64 = flow.iter().enumerate().map(|(a, f)| f * cost(a / q, a % q)).sum();
    // Potentials are defined up to a constant; centre them before forming the
    // dual so that the big-M offsets cancel without rounding loss.
    let shift = s.pot[..p + q].iter().sum::<f64>() / (p + q) as f64;
    let dual = supply.iter().enumerate().map(|(i, a)| a * -(s.pot[i] - shift)).sum::<f64>()
        + demand.iter().enumerate().map(|(j, b)| b * (s.pot[p + j] - shift)).sum::<f64>();
    Ok(Solution { flow, cost: primal, dual, iterations })
}
