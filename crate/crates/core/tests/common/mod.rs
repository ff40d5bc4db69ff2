#![allow(dead_code)]

use mwi_core::{DiscreteMeasure, Norm};
use nalgebra::{DMatrix, DVector};

/// Extreme costs over the martingale polytope by enumerating every basis
/// with nalgebra's LU; `None` when the polytope is empty.
pub fn vertex_extrema(mu: &DiscreteMeasure, nu: &DiscreteMeasure, rho: f64, norm: Norm) -> Option<(f64, f64)> {
    let (n, m, d) = (mu.len(), nu.len(), mu.dim());
    let cols = n * m;
    let rows = n + m + n * d;
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    for i in 0..n {
        for j in 0..m {
            let c = i * m + j;
            a[(i, c)] = 1.0;
            a[(n + j, c)] = 1.0;
            for k in 0..d {
                a[(n + m + i * d + k, c)] = nu.point(j)[k] - mu.point(i)[k];
            }
        }
        b[i] = mu.weight(i);
    }
    for j in 0..m {
        b[n + j] = nu.weight(j);
    }
    let cost: Vec<f64> = (0..cols)
        .map(|c| norm.distance(mu.point(c / m), nu.point(c % m)).powf(rho))
        .collect();

    // least-squares solves over column subsets of the full-rank size
    let rank = a.clone().svd(false, false).rank(1e-9);
    let mut best: Option<(f64, f64)> = None;
    let mut subset = Vec::new();
    enumerate(0, cols, rank, &mut subset, &mut |s: &[usize]| {
        let sub = a.select_columns(s);
        let svd = sub.clone().svd(true, true);
        if svd.rank(1e-9) < rank {
            return;
        }
        let Ok(x) = svd.solve(&b, 1e-12) else { return };
        if (&sub * &x - &b).amax() > 1e-10 || x.iter().any(|&v| v < -1e-11) {
            return;
        }
        let value: f64 = s.iter().zip(x.iter()).map(|(&c, v)| cost[c] * v.max(0.0)).sum();
        best = Some(best.map_or((value, value), |(lo, hi)| (lo.min(value), hi.max(value))));
    });
    best
}

fn enumerate(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for c in start..n {
        cur.push(c);
        enumerate(c + 1, n, k, cur, f);
        cur.pop();
    }
}
