//! Convex order and martingale transport bounds.
//!
//! By Strassen's theorem `mu <=_cx nu` iff a martingale coupling exists, so
//! the convex-order test is an LP feasibility problem over the transport
//! polytope cut by per-atom barycenter equalities. The extremal martingale
//! costs are the minimum and maximum of `sum pi_ij |x_i - y_j|^rho` over the
//! same polytope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpStatus, Sense, SolverOptions};
use crate::measures::{DiscreteMeasure, ExtendedIndex, Norm};
use crate::transport::{coupling_from_solution, marginal_entries, marginal_rows, power_cost, Coupling};

/// Barycenter residual accepted by [`verify_martingale`].
pub const MARTINGALE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleProblem {
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    pub rho: f64,
    pub norm: Norm,
}

impl MartingaleProblem {
    pub fn new(mu: DiscreteMeasure, nu: DiscreteMeasure, rho: f64, norm: Norm) -> Result<Self> {
        if mu.dim() != nu.dim() {
            return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
        }
        if !(rho >= 1.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho must be finite and >= 1, got {rho}")));
        }
        Ok(Self { mu, nu, rho, norm })
    }
}

/// Minimal and maximal martingale transport costs (the `rho`-th powers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotBounds {
    pub lower_cost: f64,
    pub upper_cost: f64,
    pub argmin: Coupling,
    pub argmax: Coupling,
}

impl MotBounds {
    pub fn to_json(&self, norm: Norm) -> serde_json::Value {
        serde_json::json!({
            "lower_cost": self.lower_cost,
            "upper_cost": self.upper_cost,
            "argmin": self.argmin.to_json(self.lower_cost),
            "argmax": self.argmax.to_json(self.upper_cost),
            "norm": norm.to_string(),
        })
    }
}

/// Builds the martingale transport LP with the given per-cell costs.
/// Rows: `N` source marginals, `M - 1` target marginals, `N * d` barycenter
/// equalities `sum_j pi_ij (y_j - x_i) = 0`.
fn martingale_lp(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    sense: Sense,
    cost: impl Fn(&[f64], &[f64]) -> f64,
) -> (LinearProgram, Vec<(usize, usize)>) {
    let (n, m, d) = (mu.len(), nu.len(), mu.dim());
    let base = n + m - 1;
    let mut lp = LinearProgram::new(sense, marginal_rows(mu, nu, n * d));
    let mut cells = Vec::with_capacity(n * m);
    for (i, x) in mu.points().enumerate() {
        for (j, y) in nu.points().enumerate() {
            let mut entries = marginal_entries(i, j, n, m);
            for k in 0..d {
                let disp = y[k] - x[k];
                if disp != 0.0 {
                    entries.push((base + i * d + k, disp));
                }
            }
            lp.add_column(cost(x, y), &entries);
            cells.push((i, j));
        }
    }
    (lp, cells)
}

fn check_dims(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    Ok(())
}

/// Strassen test: true iff a martingale coupling of `mu` and `nu` exists.
pub fn check_convex_order(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<bool> {
    check_convex_order_with(mu, nu, &SolverOptions::default())
}

pub fn check_convex_order_with(mu: &DiscreteMeasure, nu: &DiscreteMeasure, solver: &SolverOptions) -> Result<bool> {
    check_dims(mu, nu)?;
    let (lp, _) = martingale_lp(mu, nu, Sense::Minimize, |_, _| 0.0);
    lp::feasible_with(&lp, solver)
}

/// Convex order on the real line: equal means and
/// `E_nu (Y - k)_+ >= E_mu (X - k)_+` at every atom `k` of either measure.
/// Both call functions are piecewise linear with kinks only at atoms, so
/// checking the kinks is enough.
pub fn convex_order_1d(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<bool> {
    if mu.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: mu.dim() });
    }
    check_dims(mu, nu)?;
    let scale = 1.0
        + mu.points()
            .chain(nu.points())
            .fold(0.0f64, |a, p| a.max(p[0].abs()));
    let tol = 1e-9 * scale;
    if (mu.mean()[0] - nu.mean()[0]).abs() > tol {
        return Ok(false);
    }
    let mut strikes: Vec<f64> = mu.points().chain(nu.points()).map(|p| p[0]).collect();
    strikes.sort_by(f64::total_cmp);
    strikes.dedup();

    let calls = |m: &DiscreteMeasure| -> Vec<f64> { call_prices(m, &strikes) };
    let (cm, cn) = (calls(mu), calls(nu));
    Ok(cm.iter().zip(&cn).all(|(a, b)| *b >= *a - tol))
}

/// `E (X - k)_+` at sorted strikes, by a single sweep from the right.
fn call_prices(m: &DiscreteMeasure, strikes: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; strikes.len()];
    // atoms are sorted ascending; walk strikes right-to-left accumulating
    // the mass and first moment of atoms above each strike
    let (mut mass, mut first) = (0.0, 0.0);
    let mut idx = m.len();
    for (s, &k) in strikes.iter().enumerate().rev() {
        while idx > 0 && m.point(idx - 1)[0] > k {
            idx -= 1;
            mass += m.weight(idx);
            first += m.weight(idx) * m.point(idx)[0];
        }
        out[s] = first - k * mass;
    }
    out
}

/// Lower and upper martingale transport costs and optimal couplings.
pub fn mot_bounds(problem: &MartingaleProblem) -> Result<MotBounds> {
    mot_bounds_with(problem, &SolverOptions::default())
}

pub fn mot_bounds_with(problem: &MartingaleProblem, solver: &SolverOptions) -> Result<MotBounds> {
    let MartingaleProblem { mu, nu, rho, norm } = problem;
    let (rho, norm) = (*rho, *norm);
    let (lp_min, cells) = martingale_lp(mu, nu, Sense::Minimize, |x, y| power_cost(norm.distance(x, y), rho));
    let lp_max = lp_min.with_sense(Sense::Maximize);

    let run = |lp: &LinearProgram| -> Result<(f64, Coupling)> {
        let sol = lp::solve_with(lp, solver);
        match sol.status {
            LpStatus::Optimal => Ok((sol.objective_value.max(0.0), coupling_from_solution(mu, nu, &cells, &sol.x))),
            LpStatus::Infeasible => Err(Error::NotInConvexOrder),
            LpStatus::IterationLimit => Err(Error::IterationLimit(sol.iterations)),
            LpStatus::Unbounded => Err(Error::Solver("martingale LP reported unbounded".into())),
            LpStatus::NumericalFailure => Err(Error::Solver("martingale LP failed its final optimality check".into())),
        }
    };
    let (lower_cost, argmin) = run(&lp_min)?;
    let (upper_cost, argmax) = run(&lp_max)?;
    if lower_cost > upper_cost + 1e-9 * (1.0 + upper_cost.abs()) {
        return Err(Error::Solver(format!("martingale bounds cross: {lower_cost} > {upper_cost}")));
    }
    Ok(MotBounds {
        // equal up to rounding when the martingale coupling is unique
        lower_cost: lower_cost.min(upper_cost),
        upper_cost,
        argmin,
        argmax,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    /// `max_i |sum_j pi_ij (y_j - x_i)|_2 / w_i`.
    pub max_residual: f64,
    pub worst_row: Option<usize>,
    pub pass: bool,
}

/// Checks the barycenter condition of every row of a coupling.
pub fn verify_martingale(coupling: &Coupling) -> MartingaleReport {
    let d = coupling.dim();
    let rows = coupling.row_points.len();
    let mut disp = vec![vec![0.0; d]; rows];
    let mut mass = vec![0.0; rows];
    for e in &coupling.entries {
        let (x, y) = (&coupling.row_points[e.i], &coupling.col_points[e.j]);
        for k in 0..d {
            disp[e.i][k] += e.w * (y[k] - x[k]);
        }
        mass[e.i] += e.w;
    }
    let mut worst = (None, 0.0f64);
    for i in 0..rows {
        if mass[i] <= 0.0 {
            continue;
        }
        let r = Norm::Euclidean.length(&disp[i]) / mass[i];
        if r > worst.1 || worst.0.is_none() {
            worst = (Some(i), r);
        }
    }
    MartingaleReport {
        max_residual: worst.1,
        worst_row: worst.0,
        pass: worst.1 <= MARTINGALE_TOL,
    }
}

/// `sum |y|^2 d nu - sum |x|^2 d mu`, the common cost of every martingale
/// coupling under the squared Euclidean cost.
pub fn second_moment_gap(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    nu.second_moment() - mu.second_moment()
}

/// Cost of an explicit coupling, exposed for comparisons against LP bounds.
pub fn coupling_cost(coupling: &Coupling, rho: f64, norm: Norm) -> f64 {
    coupling.cost(ExtendedIndex::Finite(rho), norm)
}
