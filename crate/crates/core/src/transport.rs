//! Couplings and Wasserstein distances `W_q`, `q` in `[1, inf]`.
//!
//! General dimensions go through the transportation LP; on the real line the
//! comonotone (quantile) coupling is optimal for every `q` and is used
//! unless the LP path is forced. `W_inf` is a bottleneck problem: the
//! smallest support cost admitting a coupling supported on cheaper cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpStatus, Sense, SolverOptions};
use crate::measures::{DiscreteMeasure, ExtendedIndex, Norm};

/// Costs below this are clamped to zero.
pub const COST_FLOOR: f64 = 1e-14;
/// Entries below this are dropped from LP couplings.
const ENTRY_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSource {
    Lp,
    Comonotone,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// A sparse joint distribution on `row_points x col_points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub row_points: Vec<Vec<f64>>,
    pub col_points: Vec<Vec<f64>>,
    pub entries: Vec<CouplingEntry>,
    pub source: CouplingSource,
}

impl Coupling {
    /// Builds a coupling from explicit `(x, y, weight)` triples. Supports are
    /// the (merged) sets of first and second coordinates.
    pub fn from_pairs(pairs: Vec<(Vec<f64>, Vec<f64>, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::ZeroMass);
        }
        let first = DiscreteMeasure::new(
            pairs.iter().map(|p| p.0.clone()).collect(),
            pairs.iter().map(|p| p.2).collect(),
        )?;
        let second = DiscreteMeasure::new(
            pairs.iter().map(|p| p.1.clone()).collect(),
            pairs.iter().map(|p| p.2).collect(),
        )?;
        let row_points: Vec<Vec<f64>> = first.points().map(|p| p.to_vec()).collect();
        let col_points: Vec<Vec<f64>> = second.points().map(|p| p.to_vec()).collect();
        let total: f64 = pairs.iter().map(|p| p.2).sum();
        let mut entries: Vec<CouplingEntry> = Vec::with_capacity(pairs.len());
        for (x, y, w) in pairs {
            if w == 0.0 {
                continue;
            }
            let i = nearest(&row_points, &x);
            let j = nearest(&col_points, &y);
            match entries.iter_mut().find(|e| e.i == i && e.j == j) {
                Some(e) => e.w += w / total,
                None => entries.push(CouplingEntry { i, j, w: w / total }),
            }
        }
        entries.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
        Ok(Self { row_points, col_points, entries, source: CouplingSource::Explicit })
    }

    pub fn dim(&self) -> usize {
        self.row_points.first().map_or(0, |p| p.len())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.row_points.len()];
        for e in &self.entries {
            s[e.i] += e.w;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.col_points.len()];
        for e in &self.entries {
            s[e.j] += e.w;
        }
        s
    }

    pub fn first_marginal(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.row_points.clone(), self.row_sums())
    }

    pub fn second_marginal(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.col_points.clone(), self.col_sums())
    }

    /// Largest deviation of the row/column sums from the weights of `mu`
    /// and `nu`. Assumes the supports are listed in the measures' order.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        if self.row_points.len() != mu.len() || self.col_points.len() != nu.len() {
            return f64::INFINITY;
        }
        let r = self.row_sums().iter().zip(mu.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let c = self.col_sums().iter().zip(nu.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.max(c)
    }

    pub fn min_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.w).fold(f64::INFINITY, f64::min)
    }

    /// `sum w |x - y|^q` for finite `q`; for `q = inf` the largest
    /// displacement carrying positive mass.
    pub fn cost(&self, q: ExtendedIndex, norm: Norm) -> f64 {
        match q {
            ExtendedIndex::Finite(q) => self
                .entries
                .iter()
                .map(|e| e.w * power_cost(norm.distance(&self.row_points[e.i], &self.col_points[e.j]), q))
                .sum(),
            ExtendedIndex::Infinite => self
                .entries
                .iter()
                .filter(|e| e.w > 0.0)
                .map(|e| norm.distance(&self.row_points[e.i], &self.col_points[e.j]))
                .fold(0.0, f64::max),
        }
    }

    pub fn to_json(&self, cost: f64) -> serde_json::Value {
        serde_json::json!({
            "source": self.source,
            "cost": cost,
            "entries": self.entries,
        })
    }
}

fn nearest(points: &[Vec<f64>], x: &[f64]) -> usize {
    points
        .iter()
        .enumerate()
        .map(|(k, p)| (k, p.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .expect("support is nonempty")
}

/// `d^q` with tiny costs clamped to zero.
pub fn power_cost(d: f64, q: f64) -> f64 {
    let c = if q == 1.0 {
        d
    } else if q == 2.0 {
        d * d
    } else {
        d.powf(q)
    };
    if c < COST_FLOOR {
        0.0
    } else {
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransportOptions {
    /// Use the LP even on the real line.
    pub force_lp: bool,
    pub solver: SolverOptions,
}

/// `W_q(mu, nu)` and an optimal coupling.
pub fn wasserstein(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    q: ExtendedIndex,
    norm: Norm,
) -> Result<(f64, Coupling)> {
    wasserstein_with(mu, nu, q, norm, &TransportOptions::default())
}

pub fn wasserstein_with(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    q: ExtendedIndex,
    norm: Norm,
    opts: &TransportOptions,
) -> Result<(f64, Coupling)> {
    check_dims(mu, nu)?;
    if let ExtendedIndex::Finite(v) = q {
        if v < 1.0 {
            return Err(Error::InvalidParameter(format!("Wasserstein order must be >= 1, got {v}")));
        }
    }
    if mu.dim() == 1 && !opts.force_lp {
        let coupling = comonotone_1d(mu, nu)?;
        let value = match q {
            ExtendedIndex::Finite(v) => coupling.cost(q, norm).powf(1.0 / v),
            ExtendedIndex::Infinite => coupling.cost(q, norm),
        };
        return Ok((value, coupling));
    }
    match q {
        ExtendedIndex::Infinite => bottleneck_w_inf_with(mu, nu, norm, &opts.solver),
        ExtendedIndex::Finite(v) => {
            let (_, coupling) = transport_lp(mu, nu, |x, y| power_cost(norm.distance(x, y), v), &opts.solver)?;
            // rounding dust in the LP objective would be blown up by the root
            Ok((coupling.cost(q, norm).powf(1.0 / v), coupling))
        }
    }
}

fn check_dims(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    Ok(())
}

/// Row constraints for the `N` atoms of `mu` followed by column constraints
/// for the first `M - 1` atoms of `nu` (the last one is implied by total mass).
pub(crate) fn marginal_rows(mu: &DiscreteMeasure, nu: &DiscreteMeasure, extra_rows: usize) -> Vec<f64> {
    let mut rhs: Vec<f64> = mu.weights().to_vec();
    rhs.extend_from_slice(&nu.weights()[..nu.len() - 1]);
    rhs.extend(std::iter::repeat(0.0).take(extra_rows));
    rhs
}

pub(crate) fn marginal_entries(i: usize, j: usize, n_mu: usize, n_nu: usize) -> Vec<(usize, f64)> {
    let mut e = vec![(i, 1.0)];
    if j + 1 < n_nu {
        e.push((n_mu + j, 1.0));
    }
    e
}

pub(crate) fn coupling_from_solution(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cells: &[(usize, usize)],
    x: &[f64],
) -> Coupling {
    let entries = cells
        .iter()
        .zip(x)
        .filter(|(_, &w)| w > ENTRY_FLOOR)
        .map(|(&(i, j), &w)| CouplingEntry { i, j, w })
        .collect();
    Coupling {
        row_points: mu.points().map(|p| p.to_vec()).collect(),
        col_points: nu.points().map(|p| p.to_vec()).collect(),
        entries,
        source: CouplingSource::Lp,
    }
}

fn transport_lp<F>(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: F,
    solver: &SolverOptions,
) -> Result<(f64, Coupling)>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let (n, m) = (mu.len(), nu.len());
    let mut lp = LinearProgram::new(Sense::Minimize, marginal_rows(mu, nu, 0));
    let mut cells = Vec::with_capacity(n * m);
    for (i, x) in mu.points().enumerate() {
        for (j, y) in nu.points().enumerate() {
            lp.add_column(cost(x, y), &marginal_entries(i, j, n, m));
            cells.push((i, j));
        }
    }
    let sol = lp::solve_with(&lp, solver);
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective_value, coupling_from_solution(mu, nu, &cells, &sol.x))),
        LpStatus::IterationLimit => Err(Error::IterationLimit(sol.iterations)),
        other => Err(Error::Solver(format!("transportation LP reported {other:?}"))),
    }
}

/// Quantile coupling of two measures on the real line, built by a
/// two-pointer sweep over the sorted atoms.
pub fn comonotone_1d(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Coupling> {
    if mu.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: mu.dim() });
    }
    check_dims(mu, nu)?;
    let (a, b) = (mu.weights(), nu.weights());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0], b[0]);
    let mut entries = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        let w = ra.min(rb);
        if w > 0.0 {
            entries.push(CouplingEntry { i, j, w });
        }
        ra -= w;
        rb -= w;
        // one side is exhausted exactly; the other may carry rounding dust
        if ra <= 1e-15 {
            i += 1;
            if i < a.len() {
                ra = a[i];
            }
        }
        if rb <= 1e-15 {
            j += 1;
            if j < b.len() {
                rb = b[j];
            }
        }
    }
    Ok(Coupling {
        row_points: mu.points().map(|p| p.to_vec()).collect(),
        col_points: nu.points().map(|p| p.to_vec()).collect(),
        entries,
        source: CouplingSource::Comonotone,
    })
}

/// `W_inf(mu, nu)`: the smallest support cost `t` such that some coupling
/// lives on `{(i, j) : |x_i - y_j| <= t}`, found by binary search over the
/// sorted distinct costs with an LP feasibility test per probe.
pub fn bottleneck_w_inf(mu: &DiscreteMeasure, nu: &DiscreteMeasure, norm: Norm) -> Result<(f64, Coupling)> {
    bottleneck_w_inf_with(mu, nu, norm, &SolverOptions::default())
}

pub fn bottleneck_w_inf_with(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    norm: Norm,
    solver: &SolverOptions,
) -> Result<(f64, Coupling)> {
    check_dims(mu, nu)?;
    let (n, m) = (mu.len(), nu.len());
    let mut dist = Vec::with_capacity(n * m);
    for x in mu.points() {
        for y in nu.points() {
            let d = norm.distance(x, y);
            dist.push(if d < COST_FLOOR { 0.0 } else { d });
        }
    }
    let mut levels = dist.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    // no threshold below the largest nearest-neighbour distance can work
    let mut floor = 0.0f64;
    for i in 0..n {
        floor = floor.max((0..m).map(|j| dist[i * m + j]).fold(f64::INFINITY, f64::min));
    }
    for j in 0..m {
        floor = floor.max((0..n).map(|i| dist[i * m + j]).fold(f64::INFINITY, f64::min));
    }
    let mut lo = levels.partition_point(|&t| t < floor);
    let mut hi = levels.len() - 1;

    let restricted = |t: f64, objective: bool| {
        let mut lp = LinearProgram::new(Sense::Minimize, marginal_rows(mu, nu, 0));
        let mut cells = Vec::new();
        for i in 0..n {
            for j in 0..m {
                let d = dist[i * m + j];
                if d <= t {
                    lp.add_column(if objective { d } else { 0.0 }, &marginal_entries(i, j, n, m));
                    cells.push((i, j));
                }
            }
        }
        (lp, cells)
    };

    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let (lp, _) = restricted(levels[mid], false);
        if lp::feasible_with(&lp, solver)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let t = levels[lo];
    // among bottleneck-optimal couplings return one of least W_1 cost
    let (lp, cells) = restricted(t, true);
    let sol = lp::solve_with(&lp, solver);
    match sol.status {
        LpStatus::Optimal => Ok((t, coupling_from_solution(mu, nu, &cells, &sol.x))),
        LpStatus::IterationLimit => Err(Error::IterationLimit(sol.iterations)),
        other => Err(Error::Solver(format!("bottleneck LP reported {other:?}"))),
    }
}
