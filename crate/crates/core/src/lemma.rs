//! Optimal constants of the pointwise inequalities, for `rho >= 2`,
//!
//! ```text
//! |x - y|^rho <= kappa ((rho-1)|x|^rho + |y|^rho - rho |x|^(rho-2) <x, y>)
//! |y|^rho - |x|^rho <= kappa~ |y - x| (|x|^(rho-1) + |y|^(rho-1))
//! ```
//!
//! in Euclidean space. Writing `y = |x| (z e + omega e_perp)` reduces both to
//! suprema of explicit functions of `(z, omega)`, independent of dimension.
//! The suprema are located on a compactified polar grid around the singular
//! point `(1, 0)` and refined by simplex descent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimize::{nelder_mead, NelderMeadOptions};

/// Relative tolerance between successive refinement passes.
pub const REFINE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedCoords {
    pub z: f64,
    pub omega: f64,
}

impl ReducedCoords {
    fn from_polar(s: f64, angle: f64) -> Self {
        let r = s / (1.0 - s);
        Self { z: 1.0 + r * angle.cos(), omega: r * angle.sin() }
    }

    /// Euclidean distance to the singular point `(1, 0)`.
    pub fn distance_to_base(&self) -> f64 {
        (self.z - 1.0).hypot(self.omega)
    }
}

/// Where a supremum estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupSource {
    /// Known exactly (`rho = 2`).
    Exact,
    /// Interior point found by grid search and refinement.
    Interior,
    /// Limit at the singular point `(1, 0)`.
    BaseLimit,
    /// Limit as `|(z, omega)| -> inf`.
    InfinityLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Supremum {
    pub value: f64,
    pub argmax: ReducedCoords,
    pub source: SupSource,
    /// Best interior value after the grid and after each refinement pass.
    pub passes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupOptions {
    pub radial: usize,
    pub angular: usize,
    /// Grid points closer than this (in mapped radius) to `(1, 0)` are skipped.
    pub min_mapped_radius: f64,
    pub min_passes: usize,
    pub max_passes: usize,
}

impl Default for SupOptions {
    fn default() -> Self {
        Self { radial: 400, angular: 200, min_mapped_radius: 1e-6, min_passes: 3, max_passes: 12 }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho >= 2.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!("rho must be finite and >= 2, got {rho}")));
    }
    Ok(())
}

/// `rho - 1 + (z^2 + omega^2)^(rho/2) - rho z`.
pub fn phi(z: f64, omega: f64, rho: f64) -> f64 {
    phi_shifted(z - 1.0, omega, rho)
}

// (1 + t)^(rho/2) - 1 with t = 2 dz + dz^2 + omega^2, avoiding the
// cancellation near the base point.
fn pow_minus_one(dz: f64, omega: f64, e: f64) -> f64 {
    let t = dz * (2.0 + dz) + omega * omega;
    (e * t.ln_1p()).exp_m1()
}

fn phi_shifted(dz: f64, omega: f64, rho: f64) -> f64 {
    pow_minus_one(dz, omega, rho / 2.0) - rho * dz
}

fn kappa_shifted(dz: f64, omega: f64, rho: f64) -> f64 {
    dz.hypot(omega).powf(rho) / phi_shifted(dz, omega, rho)
}

fn kappa_tilde_shifted(dz: f64, omega: f64, rho: f64) -> f64 {
    let num = pow_minus_one(dz, omega, rho / 2.0);
    let r2 = (1.0 + dz).powi(2) + omega * omega;
    num / (dz.hypot(omega) * (1.0 + r2.powf((rho - 1.0) / 2.0)))
}

/// `((z-1)^2 + omega^2)^(rho/2) / phi(z, omega)`.
pub fn kappa_objective(z: f64, omega: f64, rho: f64) -> f64 {
    kappa_shifted(z - 1.0, omega, rho)
}

/// `((z^2+omega^2)^(rho/2) - 1) / (((z-1)^2+omega^2)^(1/2) (1 + (z^2+omega^2)^((rho-1)/2)))`.
pub fn kappa_tilde_objective(z: f64, omega: f64, rho: f64) -> f64 {
    kappa_tilde_shifted(z - 1.0, omega, rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Objective {
    Kappa,
    KappaTilde,
}

impl Objective {
    fn eval_polar(self, s: f64, angle: f64, rho: f64) -> f64 {
        let r = s / (1.0 - s);
        let (dz, omega) = (r * angle.cos(), r * angle.sin());
        match self {
            Objective::Kappa => kappa_shifted(dz, omega, rho),
            Objective::KappaTilde => kappa_tilde_shifted(dz, omega, rho),
        }
    }

    fn base_limit(self, rho: f64) -> f64 {
        match self {
            Objective::Kappa => 0.0,
            Objective::KappaTilde => rho / 2.0,
        }
    }
}

fn supremum(obj: Objective, rho: f64, opts: &SupOptions) -> Result<Supremum> {
    let s_min = opts.min_mapped_radius;
    let s_max = 1.0 - 1e-9;
    let clamp = |v: &[f64]| (v[0].clamp(s_min, s_max), v[1].clamp(0.0, std::f64::consts::PI));
    let value_at = |v: &[f64]| {
        let (s, a) = clamp(v);
        let f = obj.eval_polar(s, a, rho);
        if f.is_finite() {
            f
        } else {
            f64::NEG_INFINITY
        }
    };

    let ds = (s_max - s_min) / (opts.radial - 1) as f64;
    let da = std::f64::consts::PI / (opts.angular - 1) as f64;
    let mut best = (f64::NEG_INFINITY, vec![s_min, 0.0]);
    for i in 0..opts.radial {
        let s = s_min + ds * i as f64;
        for j in 0..opts.angular {
            let x = [s, da * j as f64];
            let f = value_at(&x);
            if f > best.0 {
                best = (f, x.to_vec());
            }
        }
    }

    let mut passes = vec![best.0];
    let mut step = ds.max(da);
    let mut converged = false;
    for pass in 0..opts.max_passes {
        let nm = NelderMeadOptions { initial_step: step, xtol: 1e-14, ftol: 0.0, max_evals: 20_000 };
        let m = nelder_mead(|v| -value_at(v), &best.1, &nm);
        let prev = best.0;
        if -m.value > best.0 {
            let (s, a) = clamp(&m.x);
            best = (-m.value, vec![s, a]);
        }
        passes.push(best.0);
        if pass + 1 >= opts.min_passes && (best.0 - prev).abs() <= REFINE_TOL * best.0.abs().max(1.0) {
            converged = true;
            break;
        }
        step = (step * 0.1).max(1e-8);
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "supremum estimate still moving after {} refinement passes",
            opts.max_passes
        )));
    }

    let interior = ReducedCoords::from_polar(best.1[0], best.1[1]);
    let base = obj.base_limit(rho);
    let (value, argmax, source) = if best.0 >= base && best.0 >= 1.0 {
        (best.0, interior, SupSource::Interior)
    } else if base >= 1.0 {
        (base, ReducedCoords { z: 1.0, omega: 0.0 }, SupSource::BaseLimit)
    } else {
        (1.0, ReducedCoords { z: f64::INFINITY, omega: 0.0 }, SupSource::InfinityLimit)
    };
    Ok(Supremum { value, argmax, source, passes })
}

fn exact_one(argmax: ReducedCoords, source: SupSource) -> Supremum {
    Supremum { value: 1.0, argmax, source, passes: Vec::new() }
}

/// `kappa_rho`, exactly 1 at `rho = 2`.
pub fn kappa(rho: f64) -> Result<Supremum> {
    check_rho(rho)?;
    if rho == 2.0 {
        // the objective is identically 1
        return Ok(exact_one(ReducedCoords { z: 0.0, omega: 0.0 }, SupSource::Exact));
    }
    kappa_numeric(rho, &SupOptions::default())
}

/// `kappa~_rho`, exactly 1 at `rho = 2`.
pub fn kappa_tilde(rho: f64) -> Result<Supremum> {
    check_rho(rho)?;
    if rho == 2.0 {
        return Ok(exact_one(ReducedCoords { z: 1.0, omega: 0.0 }, SupSource::Exact));
    }
    kappa_tilde_numeric(rho, &SupOptions::default())
}

/// Numerical supremum for `kappa_rho` without the `rho = 2` shortcut.
pub fn kappa_numeric(rho: f64, opts: &SupOptions) -> Result<Supremum> {
    check_rho(rho)?;
    supremum(Objective::Kappa, rho, opts)
}

pub fn kappa_tilde_numeric(rho: f64, opts: &SupOptions) -> Result<Supremum> {
    check_rho(rho)?;
    supremum(Objective::KappaTilde, rho, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstants {
    pub rho: f64,
    pub kappa: f64,
    pub kappa_tilde: f64,
    pub kappa_argmax: ReducedCoords,
    pub kappa_tilde_argmax: ReducedCoords,
    pub kappa_source: SupSource,
    pub kappa_tilde_source: SupSource,
    pub optimizer_tol: f64,
}

pub fn lemma_constants(rho: f64) -> Result<LemmaConstants> {
    let k = kappa(rho)?;
    let kt = kappa_tilde(rho)?;
    Ok(LemmaConstants {
        rho,
        kappa: k.value,
        kappa_tilde: kt.value,
        kappa_argmax: k.argmax,
        kappa_tilde_argmax: kt.argmax,
        kappa_source: k.source,
        kappa_tilde_source: kt.source,
        optimizer_tol: REFINE_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// `(lhs - rhs) / scale`.
    pub excess: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseReport {
    pub rho: f64,
    pub dim: usize,
    pub samples: usize,
    pub violations_first: usize,
    pub violations_second: usize,
    /// Largest normalised excess of the first inequality.
    pub worst_first: Violation,
    pub worst_second: Violation,
}

impl PointwiseReport {
    pub fn pass(&self) -> bool {
        self.violations_first == 0 && self.violations_second == 0
    }
}

/// Slack allowed relative to `(|x| + |y|)^rho`.
const POINTWISE_MARGIN: f64 = 1e-9;

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn sample_pair(rng: &mut ChaCha8Rng, d: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
    match k % 4 {
        0 => (gaussian(rng, d), gaussian(rng, d)),
        1 => {
            // y close to x
            let x = gaussian(rng, d);
            let eps = 10f64.powf(rng.random_range(-6.0..0.0)) * norm2(&x);
            let y = x.iter().zip(gaussian(rng, d)).map(|(a, g)| a + eps * g).collect();
            (x, y)
        }
        2 => {
            // y nearly parallel to x
            let x = gaussian(rng, d);
            let t: f64 = rng.random_range(-5.0..5.0);
            let eps = 10f64.powf(rng.random_range(-8.0..-1.0)) * norm2(&x);
            let y = x.iter().zip(gaussian(rng, d)).map(|(a, g)| t * a + eps * g).collect();
            (x, y)
        }
        _ => {
            let sx = 10f64.powf(rng.random_range(-3.0..6.0));
            let sy = 10f64.powf(rng.random_range(-3.0..6.0));
            let x = gaussian(rng, d).into_iter().map(|a| a * sx).collect();
            let y = gaussian(rng, d).into_iter().map(|a| a * sy).collect();
            (x, y)
        }
    }
}

/// Both inequalities' normalised excesses `(lhs - rhs) / (|x| + |y|)^rho`.
pub fn pointwise_excess(x: &[f64], y: &[f64], constants: &LemmaConstants) -> (f64, f64) {
    let rho = constants.rho;
    let (nx, ny) = (norm2(x), norm2(y));
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let nd = norm2(&diff);
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let scale = (nx + ny).powf(rho);
    if scale == 0.0 {
        return (0.0, 0.0);
    }
    let cross = if nx > 0.0 { rho * nx.powf(rho - 2.0) * dot } else { 0.0 };
    let first = nd.powf(rho) - constants.kappa * ((rho - 1.0) * nx.powf(rho) + ny.powf(rho) - cross);
    let second =
        ny.powf(rho) - nx.powf(rho) - constants.kappa_tilde * nd * (nx.powf(rho - 1.0) + ny.powf(rho - 1.0));
    (first / scale, second / scale)
}

/// Checks both inequalities on `samples` random pairs in R^`dim`.
pub fn verify_pointwise(rho: f64, dim: usize, samples: usize, constants: &LemmaConstants, seed: u64) -> Result<PointwiseReport> {
    check_rho(rho)?;
    if (constants.rho - rho).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "constants were computed for rho = {}, not {rho}",
            constants.rho
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let empty = || Violation { excess: f64::NEG_INFINITY, x: Vec::new(), y: Vec::new() };
    let mut report = PointwiseReport {
        rho,
        dim,
        samples,
        violations_first: 0,
        violations_second: 0,
        worst_first: empty(),
        worst_second: empty(),
    };
    for k in 0..samples {
        let (x, y) = sample_pair(&mut rng, dim, k);
        let (e1, e2) = pointwise_excess(&x, &y, constants);
        if e1 > POINTWISE_MARGIN {
            report.violations_first += 1;
        }
        if e2 > POINTWISE_MARGIN {
            report.violations_second += 1;
        }
        if e1 > report.worst_first.excess {
            report.worst_first = Violation { excess: e1, x: x.clone(), y: y.clone() };
        }
        if e2 > report.worst_second.excess {
            report.worst_second = Violation { excess: e2, x, y };
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert_eq!(phi(1.0, 0.0, 3.0), 0.0);
        assert!((phi(0.0, 0.0, 2.5) - 1.5).abs() < 1e-15);
        assert!((phi(2.0, 0.0, 3.0) - 4.0).abs() < 1e-12);
        // symmetric in omega
        assert_eq!(phi(0.3, 0.7, 3.0), phi(0.3, -0.7, 3.0));
    }

    #[test]
    fn rho_two_is_exact() {
        let c = lemma_constants(2.0).unwrap();
        assert_eq!((c.kappa, c.kappa_tilde), (1.0, 1.0));
        assert_eq!(c.kappa_source, SupSource::Exact);
        let k = kappa_numeric(2.0, &SupOptions::default()).unwrap();
        let kt = kappa_tilde_numeric(2.0, &SupOptions::default()).unwrap();
        assert!(k.value <= 1.0 + 1e-6 && kt.value <= 1.0 + 1e-6);
        assert!(k.value >= 1.0 && kt.value >= 1.0);
    }

    #[test]
    fn limits_of_the_objectives() {
        for rho in [2.5, 3.0, 4.0] {
            for j in 0..16 {
                let a = std::f64::consts::PI * j as f64 / 15.0;
                let (c, s) = a.sin_cos();
                assert!(kappa_objective(1.0 + 1e-4 * s, 1e-4 * c.abs(), rho) < 0.5);
                let far = kappa_objective(1e4 * s, 1e4 * c.abs(), rho);
                assert!((far - 1.0).abs() < 1e-2, "rho={rho} a={a} far={far}");
            }
        }
    }

    #[test]
    fn constants_respect_lower_bounds() {
        for rho in [2.5, 3.0, 4.0] {
            let c = lemma_constants(rho).unwrap();
            assert!(c.kappa >= 1.0 - 1e-9);
            assert!(c.kappa_tilde >= rho / 2.0 - 1e-9);
        }
    }

    #[test]
    fn passes_never_decrease() {
        let s = kappa_numeric(3.0, &SupOptions::default()).unwrap();
        assert!(s.passes.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn trivial_pairs() {
        let c = lemma_constants(3.0).unwrap();
        let (e1, _) = pointwise_excess(&[0.0, 0.0], &[1.0, 2.0], &c);
        assert!(e1 <= 0.0);
        let (e1, e2) = pointwise_excess(&[1.0, 2.0], &[1.0, 2.0], &c);
        assert!(e1 <= 0.0 && e2 <= 0.0);
    }

    #[test]
    fn sampled_check_is_deterministic() {
        let c = lemma_constants(3.0).unwrap();
        let a = verify_pointwise(3.0, 2, 2000, &c, 7).unwrap();
        let b = verify_pointwise(3.0, 2, 2000, &c, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.pass(), "{a:?}");
    }

    #[test]
    fn rejects_small_rho() {
        assert!(kappa(1.5).is_err());
        assert!(kappa_tilde(1.0).is_err());
    }
}
