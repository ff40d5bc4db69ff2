//! Minimum enclosing ball (Euclidean Chebyshev center) of a finite point set.
//!
//! Welzl's randomized recursion in its iterative move-to-front-free form:
//! the support set grows by one point per nesting level, so recursion depth
//! is bounded by `d + 1`. Points are visited in a fixed pseudo-random order
//! so results are deterministic.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    fn contains(&self, p: &[f64]) -> bool {
        let dist = euclid(&self.center, p);
        dist <= self.radius * (1.0 + 1e-12) + 1e-13
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Smallest Euclidean ball containing every point. `points` must be
/// non-empty and all of the same length.
pub fn min_enclosing_ball(points: &[&[f64]]) -> Ball {
    assert!(!points.is_empty(), "min_enclosing_ball needs at least one point");
    let dim = points[0].len();
    let mut order: Vec<&[f64]> = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d65_625f);
    order.shuffle(&mut rng);
    let mut support = Vec::with_capacity(dim + 1);
    welzl(&order, order.len(), &mut support, dim)
}

fn welzl<'a>(points: &[&'a [f64]], end: usize, support: &mut Vec<&'a [f64]>, dim: usize) -> Ball {
    let mut ball = ball_from_support(support, dim);
    if support.len() == dim + 1 {
        return ball;
    }
    for i in 0..end {
        if !ball.contains(points[i]) {
            support.push(points[i]);
            ball = welzl(points, i, support, dim);
            support.pop();
        }
    }
    ball
}

/// Smallest ball with every support point on its boundary (circumsphere
/// within the affine hull). Affinely dependent supports fall back to the
/// ball spanned by the farthest pair.
fn ball_from_support(support: &[&[f64]], dim: usize) -> Ball {
    match support.len() {
        0 => Ball { center: vec![0.0; dim], radius: -1.0 },
        1 => Ball { center: support[0].to_vec(), radius: 0.0 },
        _ => circumsphere(support).unwrap_or_else(|| farthest_pair_ball(support)),
    }
}

fn farthest_pair_ball(support: &[&[f64]]) -> Ball {
    let mut best = (0, 0, -1.0);
    for i in 0..support.len() {
        for j in i + 1..support.len() {
            let d = euclid(support[i], support[j]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let center = support[best.0]
        .iter()
        .zip(support[best.1])
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    Ball { center, radius: 0.5 * best.2 }
}

fn circumsphere(support: &[&[f64]]) -> Option<Ball> {
    let origin = support[0];
    let k = support.len() - 1;
    let vs: Vec<Vec<f64>> = support[1..]
        .iter()
        .map(|p| p.iter().zip(origin).map(|(a, b)| a - b).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // Gram system 2 G lambda = |v|^2
    let mut a = vec![vec![0.0; k + 1]; k];
    let mut scale = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            a[i][j] = 2.0 * dot(&vs[i], &vs[j]);
        }
        a[i][k] = dot(&vs[i], &vs[i]);
        scale = scale.max(a[i][k]);
    }
    let lambda = solve_dense(a, 1e-12 * scale.max(f64::MIN_POSITIVE))?;
    let mut center = origin.to_vec();
    for (l, v) in lambda.iter().zip(&vs) {
        for (c, x) in center.iter_mut().zip(v) {
            *c += l * x;
        }
    }
    let radius = support
        .iter()
        .map(|p| euclid(&center, p))
        .fold(0.0, f64::max);
    Some(Ball { center, radius })
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(mut a: Vec<Vec<f64>>, pivot_floor: f64) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= pivot_floor {
            return None;
        }
        a.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..=n {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    Some(x)
}
