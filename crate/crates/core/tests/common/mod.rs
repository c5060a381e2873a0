//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use udemd_core::Graph;

/// Dense `n x n` row-major walk matrix built straight from the edge list.
pub fn dense_walk(g: &Graph, laziness: f64) -> Vec<f64> {
    let n = g.node_count();
    let mut a = vec![0.0; n * n];
    for e in g.edges() {
        a[e.src * n + e.dst] += e.weight;
        if e.src != e.dst {
            a[e.dst * n + e.src] += e.weight;
        }
    }
    for i in 0..n {
        let d: f64 = a[i * n..(i + 1) * n].iter().sum();
        for j in 0..n {
            a[i * n + j] *= (1.0 - laziness) / d;
        }
        a[i * n + i] += laziness;
    }
    a
}

pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += x * b[k * n + j];
            }
        }
    }
    c
}

pub fn matpow(p: &[f64], n: usize, t: usize) -> Vec<f64> {
    let mut r = vec![0.0; n * n];
    for i in 0..n {
        r[i * n + i] = 1.0;
    }
    for _ in 0..t {
        r = matmul(&r, p, n);
    }
    r
}

/// `(M^T x)` for a row-major square `M`.
pub fn push(m: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|j| (0..n).map(|i| m[i * n + j] * x[i]).sum()).collect()
}

/// Minimum cost over every simple path between `s` and `t`.
pub fn brute_force_path(g: &Graph, s: usize, t: usize) -> f64 {
    fn walk(g: &Graph, u: usize, t: usize, seen: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if u == t {
            *best = best.min(acc);
            return;
        }
        for (v, w) in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                walk(g, v, t, seen, acc + w, best);
                seen[v] = false;
            }
        }
    }
    let mut seen = vec![false; g.node_count()];
    seen[s] = true;
    let mut best = f64::INFINITY;
    walk(g, s, t, &mut seen, 0.0, &mut best);
    best
}

/// Exact transport for masses that are integer multiples of `1 / q`: every
/// vertex of the transportation polytope is integral in these units, so the
/// optimum is the best of all `q!` matchings of unit atoms.
pub fn brute_force_emd(cost: &[f64], n: usize, mu_units: &[usize], nu_units: &[usize]) -> f64 {
    let atoms = |u: &[usize]| u.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat(i).take(c)).collect::<Vec<_>>();
    let src = atoms(mu_units);
    let mut dst = atoms(nu_units);
    assert_eq!(src.len(), dst.len());
    let q = src.len();
    let eval = |d: &[usize]| src.iter().zip(d).map(|(&a, &b)| cost[a * n + b]).sum::<f64>();
    let mut best = eval(&dst);
    // Heap's algorithm
    let mut c = vec![0; q];
    let mut i = 0;
    while i < q {
        if c[i] < i {
            if i % 2 == 0 {
                dst.swap(0, i);
            } else {
                dst.swap(c[i], i);
            }
            best = best.min(eval(&dst));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best / q as f64
}

/// Naive double loop.
pub fn naive_l1(rows: &[f64], m: usize, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for k in 0..d {
                s += (rows[i * d + k] - rows[j * d + k]).abs();
            }
            out[i * m + j] = s;
        }
    }
    out
}

/// Full argsort of one row, skipping the query itself.
pub fn argsort_neighbors(dist: &[f64], query: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..dist.len()).filter(|&j| j != query).collect();
    idx.sort_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap().then(a.cmp(&b)));
    idx
}
