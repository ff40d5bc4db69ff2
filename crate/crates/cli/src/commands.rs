use std::fs;
use std::path::Path;

use log::info;
use mwi_core::counterexamples::{
    closed_form_ratio, closed_forms, family_1d, family_2d_rotated, loglog_slope, Family, FamilyParams,
};
use mwi_core::format::sig12;
use mwi_core::inequality::{ratio_with, RatioReport, RATIO_CSV_HEADER};
use mwi_core::lemma::lemma_constants;
use mwi_core::lp::SolverOptions;
use mwi_core::martingale::{mot_bounds_with, MartingaleProblem};
use mwi_core::transport::{wasserstein_with, TransportOptions};
use mwi_core::verify::{run_all, Level};
use mwi_core::{DiscreteMeasure, Error, ExtendedIndex};
use serde_json::json;

use crate::{Cli, Command, Format, Global, LevelArg, Spread};

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_NOT_ORDERED: u8 = 4;
pub const EXIT_SOLVER: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotInConvexOrder => EXIT_NOT_ORDERED,
            Error::IterationLimit(_) | Error::NonConvergence(_) | Error::Solver(_) => EXIT_SOLVER,
            Error::LengthMismatch { .. } | Error::ZeroMass | Error::NegativeWeight(_) | Error::NonFinite(_) => {
                EXIT_PARSE
            }
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

fn solver(g: &Global) -> Result<SolverOptions, Failure> {
    if !(g.feas_tol > 0.0) {
        return Err(Failure::usage(format!("--feas-tol must be positive, got {}", g.feas_tol)));
    }
    Ok(SolverOptions { feas_tol: g.feas_tol, max_iterations: g.max_iterations, ..Default::default() })
}

fn load(path: &Path, flag: &str) -> Result<DiscreteMeasure, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("{flag}: cannot read {}: {e}", path.display()),
    })?;
    DiscreteMeasure::from_json(&text).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("{flag}: invalid measure file {}: {e}", path.display()),
    })
}

fn load_pair(mu: &Path, nu: &Path) -> Result<(DiscreteMeasure, DiscreteMeasure), Failure> {
    let (mu, nu) = (load(mu, "--mu")?, load(nu, "--nu")?);
    if mu.dim() != nu.dim() {
        return Err(Failure::usage(format!(
            "--nu: dimension {} does not match the dimension {} of --mu",
            nu.dim(),
            mu.dim()
        )));
    }
    Ok((mu, nu))
}

fn emit(g: &Global, text: String) -> Outcome {
    match &g.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            code: EXIT_USAGE,
            message: format!("--output: cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn check_rho(rho: f64) -> Result<(), Failure> {
    if !(rho >= 1.0) || !rho.is_finite() {
        return Err(Failure::usage(format!("--rho must be finite and >= 1, got {rho}")));
    }
    Ok(())
}

fn check_q(q: ExtendedIndex) -> Result<(), Failure> {
    if let ExtendedIndex::Finite(v) = q {
        if v < 1.0 {
            return Err(Failure::usage(format!("--q must be >= 1 or inf, got {v}")));
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Wasserstein { mu, nu, q, coupling, force_lp } => {
            check_q(*q)?;
            let (mu, nu) = load_pair(mu, nu)?;
            let opts = TransportOptions { force_lp: *force_lp, solver: solver(g)? };
            let (value, plan) = wasserstein_with(&mu, &nu, *q, g.norm, &opts)?;
            let text = match g.format {
                Format::Json => {
                    let mut v = json!({ "q": q, "norm": g.norm.to_string(), "value": value });
                    if *coupling {
                        v["coupling"] = plan.to_json(plan.cost(*q, g.norm));
                    }
                    json_text(&v)
                }
                Format::Csv => csv_text(&["q", "norm", "value"], &[vec![q.to_string(), g.norm.to_string(), sig12(value)]]),
            };
            emit(g, text)
        }
        Command::Mot { mu, nu, rho } => {
            check_rho(*rho)?;
            let (mu, nu) = load_pair(mu, nu)?;
            let bounds = mot_bounds_with(&MartingaleProblem::new(mu, nu, *rho, g.norm)?, &solver(g)?)?;
            let text = match g.format {
                Format::Json => {
                    let mut v = bounds.to_json(g.norm);
                    v["rho"] = json!(rho);
                    json_text(&v)
                }
                Format::Csv => csv_text(
                    &["rho", "norm", "lower_cost", "upper_cost"],
                    &[vec![sig12(*rho), g.norm.to_string(), sig12(bounds.lower_cost), sig12(bounds.upper_cost)]],
                ),
            };
            emit(g, text)
        }
        Command::Ratio { mu, nu, rho, q } => {
            check_rho(*rho)?;
            check_q(*q)?;
            let (mu, nu) = load_pair(mu, nu)?;
            let opts = TransportOptions { force_lp: false, solver: solver(g)? };
            let report = ratio_with(&mu, &nu, *rho, *q, g.norm, &opts)?;
            let text = match g.format {
                Format::Json => json_text(&serde_json::to_value(&report).expect("report serializes")),
                Format::Csv => csv_text(&RATIO_CSV_HEADER, &[report.csv_fields(None, None, None)]),
            };
            emit(g, text)
        }
        Command::Family { n, spread, theta, out_dir } => {
            let family = build_family(*n, spread, *theta)?;
            write_family(&family, out_dir)?;
            let summary = json!({
                "n": n,
                "z": spread_z(*n, spread),
                "theta": theta,
                "files": ["mu.json", "nu.json", "coupling.json"],
            });
            emit(g, json_text(&summary))
        }
        Command::FamilySweep { rho, q, spread, n_list, theta, lp_cap } => {
            family_sweep(g, *rho, *q, spread, n_list, *theta, *lp_cap)
        }
        Command::LemmaConstants { rho } => {
            let c = lemma_constants(*rho)?;
            let text = match g.format {
                Format::Json => json_text(&json!({
                    "rho": c.rho,
                    "kappa": c.kappa,
                    "kappa_tilde": c.kappa_tilde,
                    "kappa_argmax": c.kappa_argmax,
                    "kappa_tilde_argmax": c.kappa_tilde_argmax,
                    "kappa_source": c.kappa_source,
                    "kappa_tilde_source": c.kappa_tilde_source,
                    "tol": c.optimizer_tol,
                })),
                Format::Csv => csv_text(
                    &["rho", "kappa", "kappa_tilde", "tol"],
                    &[vec![sig12(c.rho), sig12(c.kappa), sig12(c.kappa_tilde), sig12(c.optimizer_tol)]],
                ),
            };
            emit(g, text)
        }
        Command::VerifyAll { level } => {
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let results = run_all(level, g.seed);
            let mut text = String::new();
            for r in &results {
                info!("{} finished in {:.2} s", r.id, r.seconds);
                text.push_str(&r.line());
                text.push('\n');
            }
            let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
            text.push_str(&format!("{} checks, {} failed\n", results.len(), failed.len()));
            if failed.is_empty() {
                emit(g, text)
            } else {
                print!("{text}");
                Err(Failure { code: EXIT_VERIFY, message: format!("failed checks: {}", failed.join(", ")) })
            }
        }
    }
}

fn spread_z(n: usize, spread: &Spread) -> f64 {
    match (spread.z, spread.alpha) {
        (Some(z), _) => z,
        (None, Some(a)) => (n as f64).powf(-a),
        (None, None) => unreachable!("clap requires one of --z and --alpha"),
    }
}

fn build_family(n: usize, spread: &Spread, theta: Option<f64>) -> Result<Family, Failure> {
    if let Some(a) = spread.alpha {
        if !(0.0..1.0).contains(&a) {
            return Err(Failure::usage(format!("--alpha must lie in [0, 1), got {a}")));
        }
    }
    match theta {
        Some(t) => {
            let alpha = spread.alpha.ok_or_else(|| Failure::usage("--theta needs --alpha (z = n^-alpha)"))?;
            Ok(family_2d_rotated(n, alpha, t)?)
        }
        None => Ok(family_1d(n, spread_z(n, spread))?),
    }
}

fn write_family(family: &Family, dir: &Path) -> Outcome {
    let io = |e: std::io::Error| Failure { code: EXIT_USAGE, message: format!("--out-dir {}: {e}", dir.display()) };
    let files = [
        ("mu.json", family.mu.to_json()),
        ("nu.json", family.nu.to_json()),
        ("coupling.json", json_text(&family.coupling.to_json(f64::NAN))),
    ];
    fs::create_dir_all(dir).map_err(io)?;
    for (name, text) in files {
        fs::write(dir.join(name), text).map_err(io)?;
    }
    Ok(())
}

const SWEEP_EXTRA: [&str; 7] = [
    "coupling_cost",
    "w_rho_pow",
    "sigma_inf",
    "sigma_rho_pow",
    "closed_form_ratio",
    "predicted_exponent",
    "fitted_exponent",
];

fn family_sweep(
    g: &Global,
    rho: f64,
    q: ExtendedIndex,
    spread: &Spread,
    n_list: &[usize],
    theta: Option<f64>,
    lp_cap: usize,
) -> Outcome {
    check_rho(rho)?;
    check_q(q)?;
    if n_list.is_empty() {
        return Err(Failure::usage("--n-list must name at least one n"));
    }
    if theta.is_some() && spread.alpha.is_none() {
        return Err(Failure::usage("--theta needs --alpha (z = n^-alpha)"));
    }
    let opts = TransportOptions { force_lp: false, solver: solver(g)? };
    // validate everything before solving anything
    let params = n_list
        .iter()
        .map(|&n| {
            let p = match spread.alpha {
                Some(a) => FamilyParams::with_alpha(n, a, rho, q),
                None => FamilyParams::new(n, spread_z(n, spread), rho, q),
            }?;
            match theta {
                Some(t) => p.rotated(t),
                None => Ok(p),
            }
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut rows: Vec<(FamilyParams, Option<RatioReport>, f64)> = Vec::new();
    for p in &params {
        let closed = closed_form_ratio(p.n, p.z, rho, q)?;
        let lp = if p.n <= lp_cap {
            info!("LP ratio for n = {}", p.n);
            let f = build_family(p.n, spread, theta)?;
            Some(ratio_with(&f.mu, &f.nu, rho, q, g.norm, &opts)?)
        } else {
            None
        };
        rows.push((*p, lp, closed));
    }
    let fitted = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| r.0.n as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.2).collect();
        loglog_slope(&xs, &ys).ok()
    } else {
        None
    };

    let text = match g.format {
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|(p, lp, closed)| {
                    json!({
                        "n": p.n, "z": p.z, "theta": p.theta,
                        "closed_forms": closed_forms(p),
                        "closed_form_ratio": closed,
                        "lp": lp,
                    })
                })
                .collect();
            json_text(&json!({ "rho": rho, "q": q, "norm": g.norm.to_string(), "rows": items, "fitted_exponent": fitted }))
        }
        Format::Csv => {
            let header: Vec<&str> = RATIO_CSV_HEADER.iter().chain(SWEEP_EXTRA.iter()).copied().collect();
            let records: Vec<Vec<String>> = rows
                .iter()
                .map(|(p, lp, closed)| {
                    let mut r = match lp {
                        Some(rep) => rep.csv_fields(Some(p.n), Some(p.z), p.theta),
                        None => {
                            let mut r = vec![String::new(); RATIO_CSV_HEADER.len()];
                            r[0] = sig12(rho);
                            r[1] = q.to_string();
                            r[2] = p.n.to_string();
                            r[3] = sig12(p.z);
                            r[4] = p.theta.map(sig12).unwrap_or_default();
                            r
                        }
                    };
                    let cf = closed_forms(p);
                    r.extend([
                        sig12(cf.coupling_cost),
                        sig12(cf.w_rho_pow),
                        sig12(cf.sigma_inf),
                        sig12(cf.sigma_rho_pow),
                        sig12(*closed),
                        cf.predicted_exponent.map(sig12).unwrap_or_default(),
                        fitted.map(sig12).unwrap_or_default(),
                    ]);
                    r
                })
                .collect();
            csv_text(&header, &records)
        }
    };
    emit(g, text)
}
