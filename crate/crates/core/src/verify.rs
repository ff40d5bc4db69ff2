//! The acceptance checks as runnable routines, shared by the command line
//! `verify-all` and the acceptance test target.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::counterexamples::{
    asymptotics, check_sigma_formula, closed_form_ratio, closed_forms, family_1d, family_2d_rotated, loglog_slope,
    FamilyParams,
};
use crate::error::Result;
use crate::inequality::{ratio_from_bounds, theoretical_bound};
use crate::format::sig;
use crate::lemma::{kappa_numeric, kappa_tilde_numeric, lemma_constants, verify_pointwise, SupOptions};
use crate::martingale::{
    check_convex_order, convex_order_1d, mot_bounds, second_moment_gap, verify_martingale, MartingaleProblem,
};
use crate::measures::{central_moment, DiscreteMeasure, ExtendedIndex, Norm};
use crate::sampling::{random_1d_order_candidate, random_1d_pair, random_convex_pair};
use crate::transport::{bottleneck_w_inf, comonotone_1d, wasserstein_with, TransportOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    fn pick<T>(self, quick: T, full: T) -> T {
        match self {
            Level::Quick => quick,
            Level::Full => full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    /// Criterion number with an optional sub-case letter, e.g. `3c`.
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {} {}: {} ({:.2} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn timed<F>(id: &str, name: &str, f: F) -> CheckResult
where
    F: FnOnce() -> Result<(bool, String)>,
{
    let start = Instant::now();
    let (pass, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult { id: id.into(), name: name.into(), pass, detail, seconds: start.elapsed().as_secs_f64() }
}

const INF: ExtendedIndex = ExtendedIndex::Infinite;

fn fin(v: f64) -> ExtendedIndex {
    ExtendedIndex::Finite(v)
}

/// The random convex-ordered pool: `count` pairs cycling through d = 1, 2, 3,
/// at most 8 atoms per measure.
pub fn random_pool(seed: u64, count: usize) -> Result<Vec<(DiscreteMeasure, DiscreteMeasure)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|k| random_convex_pair(&mut rng, 1 + k % 3, 8)).collect()
}

fn pool_size(level: Level) -> usize {
    level.pick(60, 200)
}

pub fn criterion_1(level: Level, seed: u64) -> CheckResult {
    timed("1", "quadratic martingale cost identity", || {
        let pool = random_pool(seed, pool_size(level))?;
        let (mut spread, mut gap_err) = (0.0f64, 0.0f64);
        for (mu, nu) in &pool {
            let b = mot_bounds(&MartingaleProblem::new(mu.clone(), nu.clone(), 2.0, Norm::Euclidean)?)?;
            let gap = second_moment_gap(mu, nu);
            spread = spread.max(b.upper_cost - b.lower_cost);
            gap_err = gap_err.max((b.upper_cost - gap).abs()).max((b.lower_cost - gap).abs());
        }
        Ok((
            spread <= 1e-8 && gap_err <= 1e-7,
            format!("{} pairs, max upper-lower {spread:.3e}, max |cost-gap| {gap_err:.3e}", pool.len()),
        ))
    })
}

pub fn criterion_2(level: Level) -> CheckResult {
    timed("2", "family closed forms", || {
        let ns: Vec<usize> = level.pick(vec![2, 3, 4, 7, 12, 20, 35, 50], (2..=50).collect());
        let lp = TransportOptions { force_lp: true, ..Default::default() };
        let (mut w_err, mut sig_inf_err, mut sig_rho_err) = (0.0f64, 0.0f64, 0.0f64);
        let mut bottleneck_ok = true;
        for &n in &ns {
            for z in [0.25, 1.0, 4.0] {
                let f = family_1d(n, z)?;
                for rho in [1.0, 1.5, 2.0, 3.0] {
                    let cf = closed_forms(&FamilyParams::new(n, z, rho, fin(rho))?);
                    let (w, _) = wasserstein_with(&f.mu, &f.nu, fin(rho), Norm::Euclidean, &lp)?;
                    w_err = w_err.max((w.powf(rho) - cf.w_rho_pow).abs());
                    if n <= 20 {
                        sig_rho_err = sig_rho_err.max(check_sigma_formula(n, z, rho)?.abs_diff);
                    }
                }
                let (t, coupling) = bottleneck_w_inf(&f.mu, &f.nu, Norm::Euclidean)?;
                bottleneck_ok &= t == z && coupling.cost(INF, Norm::Euclidean) == z;
                let s = central_moment(&f.nu, INF, Norm::Euclidean);
                sig_inf_err = sig_inf_err.max((s - (n as f64 - 1.0 + 2.0 * z) / 2.0).abs());
            }
        }
        Ok((
            w_err <= 1e-8 && bottleneck_ok && sig_inf_err <= 1e-9 && sig_rho_err <= 1e-7,
            format!(
                "{} values of n; W err {w_err:.3e}, bottleneck exact {bottleneck_ok}, sigma_inf err {sig_inf_err:.3e}, sigma_rho err {sig_rho_err:.3e}",
                ns.len()
            ),
        ))
    })
}

/// LP cross-check of the family at n = 200: transport LP against the
/// closed-form W_rho^rho, and the martingale bounds must bracket the cost of
/// the explicit coupling. Slow, so only part of the full run.
pub fn criterion_2_large() -> CheckResult {
    timed("2'", "family LP cross-check at n=200", || {
        let (n, z) = (200, 1.0);
        let f = family_1d(n, z)?;
        let lp = TransportOptions { force_lp: true, ..Default::default() };
        let mut w_err = 0.0f64;
        for rho in [1.5, 2.0] {
            let cf = closed_forms(&FamilyParams::new(n, z, rho, fin(rho))?);
            let (w, _) = wasserstein_with(&f.mu, &f.nu, fin(rho), Norm::Euclidean, &lp)?;
            w_err = w_err.max((w.powf(rho) - cf.w_rho_pow).abs());
        }
        let rho = 1.5;
        let cf = closed_forms(&FamilyParams::new(n, z, rho, fin(rho))?);
        let b = mot_bounds(&MartingaleProblem::new(f.mu.clone(), f.nu.clone(), rho, Norm::Euclidean)?)?;
        let bracket = b.lower_cost <= cf.coupling_cost + 1e-8 && cf.coupling_cost <= b.upper_cost + 1e-8;
        let above_w = b.lower_cost >= cf.w_rho_pow - 1e-8;
        Ok((
            w_err <= 1e-8 && bracket && above_w,
            format!(
                "W err {w_err:.3e}; rho=1.5 bounds [{}, {}] vs coupling cost {}",
                sig(b.lower_cost, 10),
                sig(b.upper_cost, 10),
                sig(cf.coupling_cost, 10)
            ),
        ))
    })
}

/// Fitted exponent of the closed-form ratio over `n = 2^4 .. 2^10`.
pub fn blow_up_slope(rho: f64, q: ExtendedIndex, alpha: f64) -> Result<(f64, f64)> {
    let ns: Vec<usize> = (4..=10).map(|k| 1usize << k).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let ys = ns
        .iter()
        .map(|&n| closed_form_ratio(n, (n as f64).powf(-alpha), rho, q))
        .collect::<Result<Vec<_>>>()?;
    Ok((loglog_slope(&xs, &ys)?, asymptotics(rho, q, alpha)?.exponent))
}

pub fn criterion_3() -> Vec<CheckResult> {
    let cases = [("3a", 1.0, fin(1.0), 0.0), ("3b", 1.5, fin(1.0), 0.0), ("3c", 1.5, INF, 0.75)];
    cases
        .iter()
        .map(|&(id, rho, q, alpha)| {
            timed(id, &format!("blow-up slope rho={rho} q={q} alpha={alpha}"), || {
                let (slope, predicted) = blow_up_slope(rho, q, alpha)?;
                Ok((
                    slope > 0.0 && (slope - predicted).abs() <= 0.05,
                    format!("fitted {slope:.4}, predicted {predicted:.4}, tolerance 0.05"),
                ))
            })
        })
        .collect()
}

pub fn criterion_4() -> CheckResult {
    timed("4", "rotated planar family", || {
        let (mut residual, mut spread, mut rel) = (0.0f64, 0.0f64, 0.0f64);
        let rho = 1.5;
        for n in [3, 5] {
            for theta in [0.3, 0.05, 0.001] {
                let f = family_2d_rotated(n, 0.0, theta)?;
                residual = residual.max(verify_martingale(&f.coupling).max_residual);
                let b = mot_bounds(&MartingaleProblem::new(f.mu.clone(), f.nu.clone(), rho, Norm::Euclidean)?)?;
                spread = spread.max(b.upper_cost - b.lower_cost);
                if theta == 0.001 {
                    for q in [fin(1.0), fin(2.0)] {
                        let r = ratio_from_bounds(&f.mu, &f.nu, &b, rho, q, Norm::Euclidean, &Default::default())?;
                        let line = closed_form_ratio(n, 1.0, rho, q)?;
                        rel = rel.max((r.ratio_lower / line - 1.0).abs());
                    }
                }
            }
        }
        Ok((
            residual <= 1e-10 && spread <= 1e-7 && rel <= 5e-3,
            format!("residual {residual:.3e}, upper-lower {spread:.3e}, ratio vs line family {rel:.3e}"),
        ))
    })
}

fn family_instances(ns: &[usize]) -> Result<Vec<(DiscreteMeasure, DiscreteMeasure)>> {
    let mut out = Vec::new();
    for &n in ns {
        for z in [0.25, 1.0, 4.0] {
            let f = family_1d(n, z)?;
            out.push((f.mu, f.nu));
        }
    }
    Ok(out)
}

/// Largest upper ratio over the pool and families for each `q`.
fn max_upper_ratio(
    instances: &[(DiscreteMeasure, DiscreteMeasure)],
    rho: f64,
    norm: Norm,
) -> Result<(f64, usize)> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (mu, nu) in instances {
        let b = mot_bounds(&MartingaleProblem::new(mu.clone(), nu.clone(), rho, norm)?)?;
        for q in [fin(1.0), fin(2.0), INF] {
            let r = ratio_from_bounds(mu, nu, &b, rho, q, norm, &Default::default())?;
            worst = worst.max(r.ratio_upper);
            count += 1;
        }
    }
    Ok((worst, count))
}

pub fn criterion_5(level: Level, seed: u64) -> CheckResult {
    timed("5", "boundedness at rho = 2", || {
        let mut instances = random_pool(seed, pool_size(level))?;
        instances.extend(family_instances(&level.pick(vec![2, 3, 5, 10], (2..=20).collect::<Vec<_>>()))?);
        let (worst, count) = max_upper_ratio(&instances, 2.0, Norm::Euclidean)?;
        let big = closed_form_ratio(10_000, 1.0, 2.0, fin(1.0))?;
        Ok((
            worst <= 2.0 + 1e-6 && (1.9..=2.0).contains(&big),
            format!("{count} ratios, max upper {worst:.9}; family at n=1e4 {big:.9}"),
        ))
    })
}

pub fn criterion_6(level: Level) -> CheckResult {
    timed("6", "pointwise inequality constants", || {
        let c2 = lemma_constants(2.0)?;
        let exact = c2.kappa == 1.0 && c2.kappa_tilde == 1.0;
        let opts = SupOptions::default();
        let k2 = kappa_numeric(2.0, &opts)?.value;
        let kt2 = kappa_tilde_numeric(2.0, &opts)?.value;
        let mut ok = exact && k2 <= 1.0 + 1e-6 && kt2 <= 1.0 + 1e-6;
        let mut detail = format!("rho=2 exact {exact}, numeric ({k2:.9}, {kt2:.9})");
        let samples = level.pick(10_000, 100_000);
        for rho in [2.5, 3.0, 4.0] {
            let c = lemma_constants(rho)?;
            ok &= c.kappa >= 1.0 - 1e-9 && c.kappa_tilde >= rho / 2.0 - 1e-9;
            let mut violations = 0;
            for d in [1, 2, 5, 20] {
                let r = verify_pointwise(rho, d, samples, &c, 42)?;
                violations += r.violations_first + r.violations_second;
            }
            ok &= violations == 0;
            detail.push_str(&format!(
                "; rho={rho} kappa {:.9} kappa~ {:.9} violations {violations}",
                c.kappa, c.kappa_tilde
            ));
        }
        Ok((ok, detail))
    })
}

pub fn criterion_7(level: Level, seed: u64) -> CheckResult {
    timed("7", "theoretical bound", || {
        let mut instances = random_pool(seed, level.pick(30, 200))?;
        instances.extend(family_instances(&level.pick(vec![2, 4], vec![2, 3, 5, 8, 12]))?);
        let mut ok = true;
        let mut detail = Vec::new();
        for rho in [2.0, 3.0] {
            let c = lemma_constants(rho)?;
            for norm in [Norm::Euclidean, Norm::P(1.0), Norm::P(3.0), Norm::Sup] {
                // bound grows with the dimension through lambda
                let mut worst_slack = f64::INFINITY;
                for (mu, nu) in &instances {
                    let bound = theoretical_bound(rho, norm, mu.dim(), &c)?;
                    let (w, _) = max_upper_ratio(std::slice::from_ref(&(mu.clone(), nu.clone())), rho, norm)?;
                    worst_slack = worst_slack.min(bound + 1e-6 - w);
                }
                ok &= worst_slack >= 0.0;
                detail.push(format!("rho={rho} {norm} min slack {worst_slack:.4}"));
            }
        }
        Ok((ok, format!("{} instances; {}", instances.len(), detail.join(", "))))
    })
}

pub fn criterion_8(level: Level, seed: u64) -> CheckResult {
    timed("8", "one-dimensional cross-validation", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x8);
        let lp = TransportOptions { force_lp: true, ..Default::default() };
        let pairs = level.pick(100, 500);
        let mut w_err = 0.0f64;
        for _ in 0..pairs {
            let (mu, nu) = random_1d_pair(&mut rng, 20)?;
            let c = comonotone_1d(&mu, &nu)?;
            for q in [1.0, 1.5, 2.0, 3.0] {
                let (w, _) = wasserstein_with(&mu, &nu, fin(q), Norm::Euclidean, &lp)?;
                w_err = w_err.max((w - c.cost(fin(q), Norm::Euclidean).powf(1.0 / q)).abs());
            }
        }
        let orders = level.pick(200, 1000);
        let (mut disagree, mut ordered) = (0, 0);
        for _ in 0..orders {
            let (mu, nu) = random_1d_order_candidate(&mut rng, 8)?;
            let fast = convex_order_1d(&mu, &nu)?;
            if fast != check_convex_order(&mu, &nu)? {
                disagree += 1;
            }
            ordered += fast as usize;
        }
        Ok((
            w_err <= 1e-8 && disagree == 0,
            format!("{pairs} pairs, max |LP - comonotone| {w_err:.3e}; {orders} order checks ({ordered} ordered), {disagree} disagreements"),
        ))
    })
}

/// Instances with at most 6 support points in total: small random spreads in
/// dimensions 1 and 2 plus the smallest family member.
pub fn small_instances(seed: u64, count: usize) -> Result<Vec<(DiscreteMeasure, DiscreteMeasure)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9);
    let mut out = vec![{
        let f = family_1d(2, 1.0)?;
        (f.mu, f.nu)
    }];
    while out.len() < count {
        let dim = 1 + out.len() % 2;
        let (mu, nu) = random_convex_pair(&mut rng, dim, 4)?;
        if mu.len() + nu.len() <= 6 {
            out.push((mu, nu));
        }
    }
    Ok(out)
}

/// Minimal and maximal cost over the martingale polytope by enumerating
/// every basic feasible solution. Only for tiny supports.
pub fn brute_force_mot(mu: &DiscreteMeasure, nu: &DiscreteMeasure, rho: f64, norm: Norm) -> Option<(f64, f64)> {
    let (n, m, d) = (mu.len(), nu.len(), mu.dim());
    let cols = n * m;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..n {
        rows.push((0..cols).map(|c| if c / m == i { 1.0 } else { 0.0 }).collect());
        rhs.push(mu.weight(i));
    }
    for j in 0..m {
        rows.push((0..cols).map(|c| if c % m == j { 1.0 } else { 0.0 }).collect());
        rhs.push(nu.weight(j));
    }
    for i in 0..n {
        for k in 0..d {
            rows.push(
                (0..cols)
                    .map(|c| if c / m == i { nu.point(c % m)[k] - mu.point(i)[k] } else { 0.0 })
                    .collect(),
            );
            rhs.push(0.0);
        }
    }
    let (all_rows, all_rhs) = (rows.clone(), rhs.clone());
    let (rows, rhs) = independent_rows(rows, rhs);
    let r = rows.len();
    let cost: Vec<f64> = (0..cols).map(|c| norm.distance(mu.point(c / m), nu.point(c % m)).powf(rho)).collect();
    let mut best: Option<(f64, f64)> = None;
    for subset in combinations(cols, r) {
        let a: Vec<Vec<f64>> = rows.iter().map(|row| subset.iter().map(|&c| row[c]).collect()).collect();
        let Some(x) = solve_square(a, rhs.clone()) else { continue };
        if x.iter().any(|&v| v < -1e-11) {
            continue;
        }
        // dropped rows may still be violated when the system is inconsistent
        let consistent = all_rows.iter().zip(&all_rhs).all(|(row, b)| {
            let lhs: f64 = subset.iter().zip(&x).map(|(&c, v)| row[c] * v).sum();
            (lhs - b).abs() <= 1e-9
        });
        if !consistent {
            continue;
        }
        let value: f64 = subset.iter().zip(&x).map(|(&c, v)| cost[c] * v.max(0.0)).sum();
        best = Some(best.map_or((value, value), |(lo, hi)| (lo.min(value), hi.max(value))));
    }
    best
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            cur.push(c);
            rec(c + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

// Keeps a maximal linearly independent subset of the rows (in order).
fn independent_rows(rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let (mut kept, mut kept_rhs) = (Vec::new(), Vec::new());
    for (row, b) in rows.into_iter().zip(rhs) {
        // Gram-Schmidt residual against the accepted rows
        let mut v = row.clone();
        for e in &basis {
            let dot: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(e).for_each(|(a, b)| *a -= dot * b);
        }
        let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let scale = row.iter().map(|a| a * a).sum::<f64>().sqrt();
        if len > 1e-9 * scale.max(1.0) {
            basis.push(v.into_iter().map(|a| a / len).collect());
            kept.push(row);
            kept_rhs.push(b);
        }
    }
    (kept, kept_rhs)
}

// Gaussian elimination with partial pivoting; None when (numerically) singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[i][k] -= f * a[col][k];
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

pub fn criterion_9(level: Level, seed: u64) -> CheckResult {
    timed("9", "vertex enumeration oracle", || {
        let instances = small_instances(seed, level.pick(40, 150))?;
        let mut err = 0.0f64;
        for (mu, nu) in &instances {
            for rho in [1.0, 1.5, 2.0, 3.0] {
                let b = mot_bounds(&MartingaleProblem::new(mu.clone(), nu.clone(), rho, Norm::Euclidean)?)?;
                let (lo, hi) = brute_force_mot(mu, nu, rho, Norm::Euclidean)
                    .ok_or_else(|| crate::Error::Solver("no vertex found for an ordered pair".into()))?;
                err = err.max((b.lower_cost - lo).abs()).max((b.upper_cost - hi).abs());
            }
        }
        Ok((err <= 1e-9, format!("{} instances, max |LP - vertices| {err:.3e}", instances.len())))
    })
}

pub fn run_all(level: Level, seed: u64) -> Vec<CheckResult> {
    let mut out = vec![criterion_1(level, seed), criterion_2(level)];
    if level == Level::Full {
        out.push(criterion_2_large());
    }
    out.extend(criterion_3());
    out.push(criterion_4());
    out.push(criterion_5(level, seed));
    out.push(criterion_6(level));
    out.push(criterion_7(level, seed));
    out.push(criterion_8(level, seed));
    out.push(criterion_9(level, seed));
    out
}
