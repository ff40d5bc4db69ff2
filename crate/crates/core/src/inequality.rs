//! Martingale Wasserstein ratios
//!
//! ```text
//! M_rho^rho(mu, nu) / ( W_q(mu, nu) * sigma_p(nu)^(rho - 1) ),   p = q (rho - 1) / (q - 1)
//! ```
//!
//! for the minimal (lower) and maximal (upper) martingale costs, with the
//! index conventions `q = 1 -> p = inf` and `q = inf -> p = rho - 1`, and the
//! `sigma` factor taken as 1 when `rho = 1`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig12;
use crate::lemma::LemmaConstants;
use crate::martingale::{mot_bounds_with, MartingaleProblem, MotBounds};
use crate::measures::{central_moment, DiscreteMeasure, ExtendedIndex, Norm, MERGE_TOL};
use crate::transport::{wasserstein_with, TransportOptions};

/// Index of the central moment paired with `W_q`. `None` when `rho = 1`
/// and `q > 1`, where the index degenerates to 0 and the factor is 1.
pub fn sigma_index(rho: f64, q: ExtendedIndex) -> Option<ExtendedIndex> {
    match q {
        ExtendedIndex::Infinite => {
            if rho > 1.0 {
                Some(ExtendedIndex::Finite(rho - 1.0))
            } else {
                None
            }
        }
        ExtendedIndex::Finite(q) if q == 1.0 => Some(ExtendedIndex::Infinite),
        ExtendedIndex::Finite(q) => {
            let p = q * (rho - 1.0) / (q - 1.0);
            if p > 0.0 {
                Some(ExtendedIndex::Finite(p))
            } else {
                None
            }
        }
    }
}

/// `sigma_p(nu)^(rho - 1)` with the `rho = 1` convention.
pub fn sigma_factor(nu: &DiscreteMeasure, rho: f64, q: ExtendedIndex, norm: Norm) -> (Option<f64>, f64) {
    if rho == 1.0 {
        let sigma = sigma_index(rho, q).map(|p| central_moment(nu, p, norm));
        return (sigma, 1.0);
    }
    let p = sigma_index(rho, q).expect("rho > 1 always has a positive sigma index");
    let sigma = central_moment(nu, p, norm);
    (Some(sigma), sigma.powf(rho - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub rho: f64,
    pub q: ExtendedIndex,
    pub sigma_index: Option<ExtendedIndex>,
    pub w_q: f64,
    /// `sigma_p(nu)`, absent when the index degenerates.
    pub sigma_value: Option<f64>,
    /// `sigma_p(nu)^(rho - 1)`.
    pub sigma_factor: f64,
    pub mot_lower: f64,
    pub mot_upper: f64,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
}

pub const RATIO_CSV_HEADER: [&str; 11] = [
    "rho", "q", "n", "z", "theta", "w_q", "sigma", "mot_lower", "mot_upper", "ratio_lower", "ratio_upper",
];

impl RatioReport {
    /// One CSV record in [`RATIO_CSV_HEADER`] order; family parameters that
    /// do not apply are left empty.
    pub fn csv_fields(&self, n: Option<usize>, z: Option<f64>, theta: Option<f64>) -> Vec<String> {
        vec![
            sig12(self.rho),
            self.q.to_string(),
            n.map(|n| n.to_string()).unwrap_or_default(),
            z.map(sig12).unwrap_or_default(),
            theta.map(sig12).unwrap_or_default(),
            sig12(self.w_q),
            self.sigma_value.map(sig12).unwrap_or_default(),
            sig12(self.mot_lower),
            sig12(self.mot_upper),
            sig12(self.ratio_lower),
            sig12(self.ratio_upper),
        ]
    }
}

fn validate(rho: f64, q: ExtendedIndex) -> Result<()> {
    if !(rho >= 1.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!("rho must be finite and >= 1, got {rho}")));
    }
    if let ExtendedIndex::Finite(v) = q {
        if v < 1.0 {
            return Err(Error::InvalidParameter(format!("q must be >= 1, got {v}")));
        }
    }
    Ok(())
}

/// Assembles both martingale Wasserstein ratios for one pair.
pub fn ratio(mu: &DiscreteMeasure, nu: &DiscreteMeasure, rho: f64, q: ExtendedIndex, norm: Norm) -> Result<RatioReport> {
    ratio_with(mu, nu, rho, q, norm, &TransportOptions::default())
}

pub fn ratio_with(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    rho: f64,
    q: ExtendedIndex,
    norm: Norm,
    opts: &TransportOptions,
) -> Result<RatioReport> {
    validate(rho, q)?;
    if mu.approx_eq(nu, MERGE_TOL) {
        return Err(Error::DegenerateDenominator);
    }
    let problem = MartingaleProblem::new(mu.clone(), nu.clone(), rho, norm)?;
    let bounds = mot_bounds_with(&problem, &opts.solver)?;
    ratio_from_bounds(mu, nu, &bounds, rho, q, norm, opts)
}

/// Like [`ratio_with`] but reuses precomputed martingale bounds (they do
/// not depend on `q`).
pub fn ratio_from_bounds(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    bounds: &MotBounds,
    rho: f64,
    q: ExtendedIndex,
    norm: Norm,
    opts: &TransportOptions,
) -> Result<RatioReport> {
    validate(rho, q)?;
    if mu.approx_eq(nu, MERGE_TOL) {
        return Err(Error::DegenerateDenominator);
    }
    let (w_q, _) = wasserstein_with(mu, nu, q, norm, opts)?;
    let (sigma_value, sigma_factor) = sigma_factor(nu, rho, q, norm);
    let denom = w_q * sigma_factor;
    if !(denom > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(RatioReport {
        rho,
        q,
        sigma_index: sigma_index(rho, q),
        w_q,
        sigma_value,
        sigma_factor,
        mot_lower: bounds.lower_cost,
        mot_upper: bounds.upper_cost,
        ratio_lower: bounds.lower_cost / denom,
        ratio_upper: bounds.upper_cost / denom,
    })
}

/// `2 kappa_rho kappa~_rho lambda^(2 rho)`: the upper bound on the maximal
/// ratio for `rho >= 2` under `norm` on R^`dim`.
pub fn theoretical_bound(rho: f64, norm: Norm, dim: usize, lemma: &LemmaConstants) -> Result<f64> {
    if !(rho >= 2.0) {
        return Err(Error::InvalidParameter(format!("the bound needs rho >= 2, got {rho}")));
    }
    if (lemma.rho - rho).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "constants were computed for rho = {}, not {rho}",
            lemma.rho
        )));
    }
    let lambda = norm.equivalence_lambda(dim);
    Ok(2.0 * lemma.kappa * lemma.kappa_tilde * lambda.powf(2.0 * rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantEstimate {
    /// Largest ratio seen.
    pub value: f64,
    /// Position of the first instance attaining `value`.
    pub argmax: usize,
    pub report: RatioReport,
    pub evaluated: usize,
    /// Instances whose ratio could not be computed.
    pub skipped: usize,
}

/// Empirical lower estimate of the constant: the running maximum of the
/// chosen ratio over `instances`. Failing instances are skipped and counted.
pub fn estimate_constant<I>(instances: I, rho: f64, q: ExtendedIndex, norm: Norm, which: Which) -> Result<ConstantEstimate>
where
    I: IntoIterator<Item = (DiscreteMeasure, DiscreteMeasure)>,
{
    validate(rho, q)?;
    let mut best: Option<ConstantEstimate> = None;
    let (mut evaluated, mut skipped) = (0, 0);
    for (k, (mu, nu)) in instances.into_iter().enumerate() {
        match ratio(&mu, &nu, rho, q, norm) {
            Ok(report) => {
                evaluated += 1;
                let v = match which {
                    Which::Lower => report.ratio_lower,
                    Which::Upper => report.ratio_upper,
                };
                if best.as_ref().map_or(true, |b| v > b.value) {
                    best = Some(ConstantEstimate { value: v, argmax: k, report, evaluated: 0, skipped: 0 });
                }
            }
            Err(e) => {
                warn!("skipping instance {k}: {e}");
                skipped += 1;
            }
        }
    }
    let mut est = best.ok_or_else(|| Error::InvalidParameter("no instance produced a ratio".into()))?;
    est.evaluated = evaluated;
    est.skipped = skipped;
    Ok(est)
}
