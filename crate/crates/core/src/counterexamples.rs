//! The explicit families showing the ratio blows up for `rho < 2`.
//!
//! On the line, `mu_{n,z}` sits on `1..=n` and `nu_{n,z}` splits each atom
//! into its unit neighbours, with the two end atoms pushed out by `z`:
//!
//! ```text
//! M_{n,z} ∝ d(1, 1-z) + z d(1, 2) + z d(n, n-1) + d(n, n+z)
//!         + z sum_{i=2}^{n-1} ( d(i, i-1) + d(i, i+1) )
//! ```
//!
//! normalised by `1 / (2((n-1)z + 1))`. The planar family rotates the unit
//! jumps by `theta`, which makes the martingale coupling unique.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::sigma_index;
use crate::measures::{central_moment, DiscreteMeasure, ExtendedIndex, Norm};
use crate::transport::Coupling;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub n: usize,
    pub z: f64,
    /// Set when `z = n^-alpha`.
    pub alpha: Option<f64>,
    /// Rotation angle of the planar family.
    pub theta: Option<f64>,
    pub rho: f64,
    pub q: ExtendedIndex,
}

impl FamilyParams {
    pub fn new(n: usize, z: f64, rho: f64, q: ExtendedIndex) -> Result<Self> {
        let p = Self { n, z, alpha: None, theta: None, rho, q };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `z = n^-alpha`.
    pub fn with_alpha(n: usize, alpha: f64, rho: f64, q: ExtendedIndex) -> Result<Self> {
        check_alpha(alpha)?;
        let p = Self { n, z: (n as f64).powf(-alpha), alpha: Some(alpha), theta: None, rho, q };
        p.validate()?;
        Ok(p)
    }

    pub fn rotated(mut self, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        self.theta = Some(theta);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_nz(self.n, self.z)?;
        if let Some(a) = self.alpha {
            check_alpha(a)?;
        }
        if let Some(t) = self.theta {
            check_theta(t)?;
        }
        if !(self.rho >= 1.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho must be finite and >= 1, got {}", self.rho)));
        }
        if let ExtendedIndex::Finite(q) = self.q {
            if q < 1.0 {
                return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
            }
        }
        Ok(())
    }
}

fn check_nz(n: usize, z: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!("z must be finite and > 0, got {z}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::InvalidParameter(format!("theta must lie in (0, pi), got {theta}")));
    }
    Ok(())
}

/// A family member: both marginals and the explicit martingale coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    pub coupling: Coupling,
}

fn from_pairs(pairs: Vec<(Vec<f64>, Vec<f64>, f64)>) -> Result<Family> {
    let coupling = Coupling::from_pairs(pairs)?;
    Ok(Family {
        mu: coupling.first_marginal()?,
        nu: coupling.second_marginal()?,
        coupling,
    })
}

/// `(mu_{n,z}, nu_{n,z}, M_{n,z})`.
pub fn family_1d(n: usize, z: f64) -> Result<Family> {
    check_nz(n, z)?;
    let nf = n as f64;
    let norm = 1.0 / (2.0 * ((nf - 1.0) * z + 1.0));
    let mut pairs = vec![
        (vec![1.0], vec![1.0 - z], norm),
        (vec![1.0], vec![2.0], z * norm),
        (vec![nf], vec![nf - 1.0], z * norm),
        (vec![nf], vec![nf + z], norm),
    ];
    for i in 2..n {
        let x = i as f64;
        pairs.push((vec![x], vec![x - 1.0], z * norm));
        pairs.push((vec![x], vec![x + 1.0], z * norm));
    }
    from_pairs(pairs)
}

/// `(mu_n, nu_n^theta, M_n^theta)` in the plane, with `z = n^-alpha`.
pub fn family_2d_rotated(n: usize, alpha: f64, theta: f64) -> Result<Family> {
    check_alpha(alpha)?;
    check_theta(theta)?;
    let nf = n as f64;
    let z = nf.powf(-alpha);
    check_nz(n, z)?;
    let norm = 1.0 / (2.0 * ((nf - 1.0) * z + 1.0));
    let (s, c) = theta.sin_cos();
    let mut pairs = vec![
        (vec![1.0, 0.0], vec![1.0 - z * c, -z * s], norm),
        (vec![1.0, 0.0], vec![1.0 + c, s], z * norm),
        (vec![nf, 0.0], vec![nf - c, -s], z * norm),
        (vec![nf, 0.0], vec![nf + z * c, z * s], norm),
    ];
    for i in 2..n {
        let x = i as f64;
        pairs.push((vec![x, 0.0], vec![x - c, -s], z * norm));
        pairs.push((vec![x, 0.0], vec![x + c, s], z * norm));
    }
    from_pairs(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForms {
    /// `rho`-cost of `M_{n,z}`.
    pub coupling_cost: f64,
    /// `W_rho^rho(mu_{n,z}, nu_{n,z})`.
    pub w_rho_pow: f64,
    pub w_inf: f64,
    pub sigma_inf: f64,
    /// Midpoint value of `sigma_rho^rho(nu_{n,z})`.
    pub sigma_rho_pow: f64,
    /// Large-`n` equivalent `prefactor * n^exponent` of the ratio when
    /// `z = n^-alpha` (a fixed `z = 1` counts as `alpha = 0`). For any other
    /// fixed `z` only the exponent carries over.
    pub predicted_prefactor: Option<f64>,
    pub predicted_exponent: Option<f64>,
}

pub fn closed_forms(params: &FamilyParams) -> ClosedForms {
    let (n, z, rho) = (params.n as f64, params.z, params.rho);
    let d = (n - 1.0) * z + 1.0;
    let asym = asymptotics(rho, params.q, params.alpha.unwrap_or(0.0)).ok();
    let scaled = params.alpha.is_some() || z == 1.0;
    ClosedForms {
        coupling_cost: ((n - 1.0) * z + z.powf(rho)) / d,
        w_rho_pow: z.powf(rho) / d,
        w_inf: z,
        sigma_inf: (n - 1.0 + 2.0 * z) / 2.0,
        sigma_rho_pow: sigma_pow_closed_form(params.n, z, rho),
        predicted_prefactor: asym.filter(|_| scaled).map(|a| a.prefactor),
        predicted_exponent: asym.map(|a| a.exponent),
    }
}

/// `E|Y - c|^p` for `Y ~ nu_{n,z}` and `c` the midpoint `(n+1)/2`:
///
/// ```text
/// ((n-1+2z)^p + z(n-1)^p + 2z sum_{i=2}^{floor((n+1)/2)} (n+1-2i)^p) / (2^p ((n-1)z+1))
/// ```
///
/// By symmetry and convexity this is `sigma_p^p` for `p >= 1`; for `p < 1`
/// the midpoint is generally not optimal.
pub fn sigma_pow_closed_form(n: usize, z: f64, p: f64) -> f64 {
    let nf = n as f64;
    let tail: f64 = (2..=(n + 1) / 2).map(|i| (nf + 1.0 - 2.0 * i as f64).powf(p)).sum();
    ((nf - 1.0 + 2.0 * z).powf(p) + z * (nf - 1.0).powf(p) + 2.0 * z * tail)
        / (2f64.powf(p) * ((nf - 1.0) * z + 1.0))
}

/// `W_q(mu_{n,z}, nu_{n,z})`: the comonotone coupling moves mass
/// `1/((n-1)z+1)` by `z` and leaves the rest in place.
pub fn w_q_closed_form(n: usize, z: f64, q: ExtendedIndex) -> f64 {
    match q {
        ExtendedIndex::Infinite => z,
        ExtendedIndex::Finite(q) => (z.powf(q) / ((n as f64 - 1.0) * z + 1.0)).powf(1.0 / q),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotics {
    pub prefactor: f64,
    pub exponent: f64,
}

/// Equivalent `prefactor * n^exponent` of the family ratio with
/// `z = n^-alpha`:
///
/// ```text
/// 2^(rho-1) (1 + q(rho-1)/(q-1))^((q-1)/q) n^(((q-1)/q) alpha + 1/q + 1 - rho)
/// ```
///
/// with the middle factor 1 at `q = 1` and `rho` at `q = inf`.
pub fn asymptotics(rho: f64, q: ExtendedIndex, alpha: f64) -> Result<Asymptotics> {
    check_alpha(alpha)?;
    if !(rho >= 1.0) {
        return Err(Error::InvalidParameter(format!("rho must be >= 1, got {rho}")));
    }
    let base = 2f64.powf(rho - 1.0);
    Ok(match q {
        ExtendedIndex::Infinite => Asymptotics { prefactor: base * rho, exponent: alpha + 1.0 - rho },
        ExtendedIndex::Finite(q) if q == 1.0 => Asymptotics { prefactor: base, exponent: 2.0 - rho },
        ExtendedIndex::Finite(q) => {
            let e = (q - 1.0) / q;
            Asymptotics {
                prefactor: base * (1.0 + q * (rho - 1.0) / (q - 1.0)).powf(e),
                exponent: e * alpha + 1.0 / q + 1.0 - rho,
            }
        }
    })
}

/// `sigma_p(nu_{n,z})^(rho-1)` from closed forms, falling back to direct
/// minimisation when the index is below 1.
fn sigma_factor_closed_form(n: usize, z: f64, rho: f64, q: ExtendedIndex) -> Result<f64> {
    if rho == 1.0 {
        return Ok(1.0);
    }
    Ok(match sigma_index(rho, q) {
        None => 1.0,
        Some(ExtendedIndex::Infinite) => ((n as f64 - 1.0 + 2.0 * z) / 2.0).powf(rho - 1.0),
        Some(ExtendedIndex::Finite(p)) if p >= 1.0 => sigma_pow_closed_form(n, z, p).powf((rho - 1.0) / p),
        Some(p) => {
            let nu = family_1d(n, z)?.nu;
            central_moment(&nu, p, Norm::Euclidean).powf(rho - 1.0)
        }
    })
}

/// Cost of `M_{n,z}` over `W_q * sigma^(rho-1)`, a lower bound on the maximal
/// ratio for the family, from closed forms only.
pub fn closed_form_ratio(n: usize, z: f64, rho: f64, q: ExtendedIndex) -> Result<f64> {
    let params = FamilyParams::new(n, z, rho, q)?;
    let cf = closed_forms(&params);
    Ok(cf.coupling_cost / (w_q_closed_form(n, z, q) * sigma_factor_closed_form(n, z, rho, q)?))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter("need at least two (x, y) pairs".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("x values must not all coincide".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaCheck {
    pub n: usize,
    pub z: f64,
    pub p: f64,
    pub closed_form: f64,
    pub direct: f64,
    pub abs_diff: f64,
}

/// Compares [`sigma_pow_closed_form`] with `sigma_p(nu_{n,z})^p` computed by
/// direct minimisation over the centre.
pub fn check_sigma_formula(n: usize, z: f64, p: f64) -> Result<SigmaCheck> {
    let nu = family_1d(n, z)?.nu;
    let direct = central_moment(&nu, ExtendedIndex::finite(p)?, Norm::Euclidean).powf(p);
    let closed_form = sigma_pow_closed_form(n, z, p);
    Ok(SigmaCheck { n, z, p, closed_form, direct, abs_diff: (closed_form - direct).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::{coupling_cost, verify_martingale};
    use crate::transport::wasserstein;

    const INF: ExtendedIndex = ExtendedIndex::Infinite;

    fn fin(v: f64) -> ExtendedIndex {
        ExtendedIndex::Finite(v)
    }

    #[test]
    fn smallest_member() {
        let f = family_1d(2, 1.0).unwrap();
        assert_eq!(f.mu, DiscreteMeasure::from_1d(&[1.0, 2.0], &[0.5, 0.5]).unwrap());
        assert_eq!(f.nu, DiscreteMeasure::from_1d(&[0.0, 1.0, 2.0, 3.0], &[0.25; 4]).unwrap());
        let pairs: Vec<(f64, f64, f64)> = f
            .coupling
            .entries
            .iter()
            .map(|e| (f.coupling.row_points[e.i][0], f.coupling.col_points[e.j][0], e.w))
            .collect();
        assert_eq!(pairs, vec![(1.0, 0.0, 0.25), (1.0, 2.0, 0.25), (2.0, 1.0, 0.25), (2.0, 3.0, 0.25)]);
    }

    #[test]
    fn mu_weights_for_n3() {
        let f = family_1d(3, 0.5).unwrap();
        let expect = [1.5 / 4.0, 1.0 / 4.0, 1.5 / 4.0];
        for (w, e) in f.mu.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn couplings_are_martingales() {
        for n in 2..8 {
            for z in [0.1, 0.5, 1.0, 3.0] {
                assert!(verify_martingale(&family_1d(n, z).unwrap().coupling).pass, "n={n} z={z}");
            }
        }
        let f = family_2d_rotated(3, 0.0, std::f64::consts::FRAC_PI_4).unwrap();
        assert!(verify_martingale(&f.coupling).max_residual < 1e-12);
    }

    #[test]
    fn closed_form_values() {
        let c = closed_forms(&FamilyParams::new(2, 1.0, 1.0, fin(1.0)).unwrap());
        assert_eq!((c.coupling_cost, c.w_rho_pow, c.sigma_inf, c.sigma_rho_pow), (1.0, 0.5, 1.5, 1.0));
        let c = closed_forms(&FamilyParams::new(3, 1.0, 2.0, fin(1.0)).unwrap());
        assert!((c.coupling_cost - 1.0).abs() < 1e-15);
        assert!((c.w_rho_pow - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.w_inf, 1.0);
        assert_eq!(c.predicted_exponent, Some(0.0));
        let c = closed_forms(&FamilyParams::new(3, 0.5, 1.5, fin(1.0)).unwrap());
        assert_eq!((c.predicted_exponent, c.predicted_prefactor), (Some(0.5), None));
        let c = closed_forms(&FamilyParams::with_alpha(16, 0.5, 1.5, fin(1.0)).unwrap());
        assert_eq!(c.w_inf, 0.25);
        assert_eq!(c.predicted_exponent, Some(0.5));
    }

    #[test]
    fn closed_forms_match_generators() {
        for n in [2, 3, 6] {
            for z in [0.25, 1.0, 4.0] {
                let f = family_1d(n, z).unwrap();
                for rho in [1.0, 2.0, 3.0] {
                    let c = closed_forms(&FamilyParams::new(n, z, rho, fin(1.0)).unwrap());
                    assert!((coupling_cost(&f.coupling, rho, Norm::Euclidean) - c.coupling_cost).abs() < 1e-12);
                    let (w, _) = wasserstein(&f.mu, &f.nu, fin(rho), Norm::Euclidean).unwrap();
                    assert!((w.powf(rho) - c.w_rho_pow).abs() < 1e-12);
                    let s = check_sigma_formula(n, z, rho).unwrap();
                    assert!(s.abs_diff < 1e-7, "{s:?}");
                }
                let sig = central_moment(&f.nu, INF, Norm::Euclidean);
                assert!((sig - (n as f64 - 1.0 + 2.0 * z) / 2.0).abs() < 1e-12);
                assert_eq!(wasserstein(&f.mu, &f.nu, INF, Norm::Euclidean).unwrap().0, z);
            }
        }
    }

    #[test]
    fn asymptotic_conventions() {
        let a = asymptotics(1.5, fin(1.0), 0.3).unwrap();
        assert_eq!(a.exponent, 0.5);
        assert!((a.prefactor - 2f64.sqrt()).abs() < 1e-15);
        let a = asymptotics(1.5, INF, 0.75).unwrap();
        assert_eq!((a.exponent, a.prefactor), (0.25, 2f64.sqrt() * 1.5));
        // q -> inf limit of the finite-q expression
        let b = asymptotics(1.5, fin(1e9), 0.75).unwrap();
        assert!((a.prefactor - b.prefactor).abs() < 1e-6 && (a.exponent - b.exponent).abs() < 1e-6);
        assert!(asymptotics(1.5, INF, 1.0).is_err());
    }

    #[test]
    fn ratio_approaches_prefactor_times_power() {
        let a = asymptotics(1.5, fin(1.0), 0.0).unwrap();
        let n = 1_000_000usize;
        let r = closed_form_ratio(n, 1.0, 1.5, fin(1.0)).unwrap();
        assert!((r / (a.prefactor * (n as f64).powf(a.exponent)) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.7)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 0.7).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn rotated_family_validation() {
        assert!(family_2d_rotated(3, 0.0, 0.0).is_err());
        assert!(family_2d_rotated(3, 1.0, 0.5).is_err());
        assert!(family_2d_rotated(1, 0.0, 0.5).is_err());
        assert!(family_1d(3, 0.0).is_err());
    }
}
