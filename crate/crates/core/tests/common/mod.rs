//! Test-only oracles, kept independent of the library's own algorithms.

#![allow(dead_code)]

use bbc_capacity::{BroadcastChannelSpec, CapacityRegion, ReceiverSet};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Textbook `(x + 1) log2(x + 1) - x log2 x`.
pub fn g_direct(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (x + 1.0) * (x + 1.0).log2() - x * x.log2()
    }
}

/// Vertices of `{x : A x <= b}` by solving every square subsystem of tight
/// constraints and keeping the feasible solutions.
pub fn brute_force_vertices(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> Vec<Vec<f64>> {
    let (rows, dim) = a.shape();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut pick = Vec::with_capacity(dim);
    combinations(rows, dim, 0, &mut pick, &mut |idx| {
        let sub = DMatrix::from_fn(dim, dim, |r, c| a[(idx[r], c)]);
        let rhs = DVector::from_fn(dim, |r, _| b[idx[r]]);
        if sub.determinant().abs() < 1e-12 {
            return;
        }
        let Some(x) = sub.lu().solve(&rhs) else { return };
        if (a * &x - b).iter().all(|&v| v <= tol) {
            let v: Vec<f64> = x.iter().copied().collect();
            if !out.iter().any(|w| w.iter().zip(&v).all(|(p, q)| (p - q).abs() <= tol)) {
                out.push(v);
            }
        }
    });
    out
}

fn combinations(n: usize, k: usize, start: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in start..n {
        pick.push(i);
        combinations(n, k, i + 1, pick, f);
        pick.pop();
    }
}

/// Halfspace form of a bounded region: subset constraints plus `r_i >= 0`.
pub fn region_halfspaces(region: &CapacityRegion) -> (DMatrix<f64>, DVector<f64>) {
    let m = region.m();
    let cons = region.constraints();
    let rows = cons.len() + m;
    let mut a = DMatrix::zeros(rows, m);
    let mut b = DVector::zeros(rows);
    for (r, c) in cons.iter().enumerate() {
        for i in c.subset.members() {
            a[(r, i)] = 1.0;
        }
        b[r] = c.bound.finite().expect("bounded region");
    }
    for i in 0..m {
        a[(cons.len() + i, i)] = -1.0;
    }
    (a, b)
}

/// True when the two point sets coincide within `tol` in every coordinate.
pub fn same_point_sets(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    let close = |p: &Vec<f64>, q: &Vec<f64>| p.iter().zip(q).all(|(x, y)| (x - y).abs() <= tol);
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| close(p, q)))
        && b.iter().all(|q| a.iter().any(|p| close(p, q)))
}

/// Random spec with every transmittance in `[lo, hi]`, rescaled so that the
/// receivers collect at most `max_total`.
pub fn random_spec(rng: &mut impl Rng, m: usize, lo: f64, hi: f64, max_total: f64) -> BroadcastChannelSpec {
    let mut etas: Vec<f64> = (0..m).map(|_| rng.gen_range(lo..=hi)).collect();
    let total: f64 = etas.iter().sum();
    if total > max_total {
        etas.iter_mut().for_each(|e| *e *= max_total / total);
    }
    BroadcastChannelSpec::new(etas).unwrap()
}

pub fn all_subsets(m: usize) -> impl Iterator<Item = ReceiverSet> {
    (1..1u32 << m).map(ReceiverSet::from_mask)
}
