//! Random instance generators for tests, sweeps and the verification suite.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::measures::DiscreteMeasure;

fn gaussian_point<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `atoms` Gaussian points with weights uniform on `[0.1, 1)` (normalised).
pub fn random_measure<R: Rng>(rng: &mut R, dim: usize, atoms: usize, scale: f64) -> Result<DiscreteMeasure> {
    let points = (0..atoms).map(|_| gaussian_point(rng, dim, scale)).collect();
    let weights = (0..atoms).map(|_| rng.random_range(0.1..1.0)).collect();
    DiscreteMeasure::new(points, weights)
}

/// Splits every atom of `mu` into pieces whose barycenter is the atom, so the
/// result dominates `mu` in convex order. At most `max_atoms` pieces in
/// total and at least one atom is split; requires `max_atoms > mu.len()`.
pub fn mean_preserving_spread<R: Rng>(rng: &mut R, mu: &DiscreteMeasure, max_atoms: usize, scale: f64) -> Result<DiscreteMeasure> {
    let n = mu.len();
    let mut pieces = vec![1usize; n];
    let mut budget = max_atoms.saturating_sub(n);
    if budget > 0 {
        pieces[rng.random_range(0..n)] += 1;
        budget -= 1;
        let extra = rng.random_range(0..=budget);
        for _ in 0..extra {
            pieces[rng.random_range(0..n)] += 1;
        }
    }
    let (mut points, mut weights) = (Vec::new(), Vec::new());
    for (i, &k) in pieces.iter().enumerate() {
        let (x, w) = (mu.point(i), mu.weight(i));
        if k == 1 {
            points.push(x.to_vec());
            weights.push(w);
            continue;
        }
        let p: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
        let total: f64 = p.iter().sum();
        let mut sum = vec![0.0; x.len()];
        let mut disp = Vec::with_capacity(k);
        for pj in &p[..k - 1] {
            let d = gaussian_point(rng, x.len(), scale);
            for (s, dk) in sum.iter_mut().zip(&d) {
                *s += pj * dk;
            }
            disp.push(d);
        }
        disp.push(sum.iter().map(|s| -s / p[k - 1]).collect());
        for (pj, d) in p.iter().zip(disp) {
            points.push(x.iter().zip(&d).map(|(a, b)| a + b).collect());
            weights.push(w * pj / total);
        }
    }
    DiscreteMeasure::new(points, weights)
}

/// A pair `mu <=_cx nu` with `mu != nu`: `mu` has up to `max_atoms / 2`
/// atoms and `nu` is a spread of it with at most `max_atoms` atoms.
pub fn random_convex_pair<R: Rng>(rng: &mut R, dim: usize, max_atoms: usize) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let k = rng.random_range(1..=(max_atoms / 2).max(1));
    let mu = random_measure(rng, dim, k, 1.0)?;
    let scale = rng.random_range(0.2..2.0);
    let nu = mean_preserving_spread(rng, &mu, max_atoms, scale)?;
    Ok((mu, nu))
}

/// Two unrelated measures on the line.
pub fn random_1d_pair<R: Rng>(rng: &mut R, max_atoms: usize) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let a = rng.random_range(1..=max_atoms);
    let b = rng.random_range(1..=max_atoms);
    Ok((random_measure(rng, 1, a, 1.0)?, random_measure(rng, 1, b, 1.0)?))
}

/// Pairs on the line that straddle the convex-order boundary: spreads (in
/// order), spreads with one atom nudged and recentred (usually not), and
/// unrelated pairs shifted to equal means.
pub fn random_1d_order_candidate<R: Rng>(rng: &mut R, max_atoms: usize) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    match rng.random_range(0..3) {
        0 => random_convex_pair(rng, 1, max_atoms),
        1 => {
            let (mu, nu) = random_convex_pair(rng, 1, max_atoms)?;
            let mut points: Vec<Vec<f64>> = nu.points().map(|p| p.to_vec()).collect();
            let j = rng.random_range(0..points.len());
            points[j][0] += rng.random_range(-0.5..0.5);
            let moved = DiscreteMeasure::new(points, nu.weights().to_vec())?;
            let shift = mu.mean()[0] - moved.mean()[0];
            Ok((mu, moved.translate(&[shift])?))
        }
        _ => {
            let (mu, nu) = random_1d_pair(rng, max_atoms)?;
            let shift = mu.mean()[0] - nu.mean()[0];
            Ok((mu, nu.translate(&[shift])?))
        }
    }
}
