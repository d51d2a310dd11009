//! Two-step flow correction: fit kernel coefficients to the observations in the
//! l1 sense, then reconstruct every link flow from them.
//!
//! The fit `min_x ||Z_M x - f_M||_1` is solved by ADMM with the splitting
//! `z = Z_M x - f_M`:
//!
//! ```text
//!     x <- (Z_M' Z_M)^{-1} Z_M' (f_M + z - u)
//!     z <- shrink(Z_M x - f_M + u, 1/delta)
//!     u <- u + Z_M x - z - f_M
//! ```
//!
//! An LP formulation of the same problem serves as an exact cross-check.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{self, BaseSet, KernelBasis};
use crate::lp;
use crate::network::{self, FlowObservation, IncidenceMatrix, MonitoredSet, Network};

/// Component-wise soft-thresholding `sign(z_i) max(|z_i| - r, 0)`.
pub fn shrink(z: &DVector<f64>, r: f64) -> DVector<f64> {
    z.map(|v| shrink_scalar(v, r))
}

#[inline]
pub(crate) fn shrink_scalar(v: f64, r: f64) -> f64 {
    if v > r {
        v - r
    } else if v < -r {
        v + r
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmmConfig {
    /// Penalty parameter; the shrink threshold is `1 / delta`.
    pub delta: f64,
    pub max_iters: usize,
    /// Relative tolerance on `||Z_M x - z - f_M||_2`, scaled by `1 + ||f_M||_2`.
    pub primal_tol: f64,
    /// Relative tolerance on `||delta Z_M' (z_new - z_old)||_2`, scaled likewise.
    pub dual_tol: f64,
    /// Iteration after which `delta` is rebalanced when one residual dwarfs the
    /// other; `None` keeps `delta` fixed throughout.
    pub adapt_after: Option<usize>,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            delta: 0.1,
            max_iters: 50_000,
            primal_tol: 1e-12,
            dual_tol: 1e-12,
            adapt_after: Some(1_000),
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.primal_tol > 0.0 && self.dual_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmmDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Penalty in effect at the last iteration.
    pub final_delta: f64,
}

/// A solution of `min_x ||Z_M x - f_M||_1`.
#[derive(Debug, Clone)]
pub struct L1Fit {
    pub x: DVector<f64>,
    pub objective: f64,
    /// Present for ADMM fits.
    pub diagnostics: Option<AdmmDiagnostics>,
}

pub(crate) fn l1_objective(z_m: &DMatrix<f64>, x: &DVector<f64>, f_m: &DVector<f64>) -> f64 {
    (z_m * x - f_m).lp_norm(1)
}

/// Cholesky factor of `Z' Z`, rejecting numerically rank-deficient `Z`.
pub(crate) fn normal_factor(z: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(z.transpose() * z)?;
    let diag = chol.l_dirty().diagonal();
    let max = diag.amax();
    let min = diag.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    (max > 0.0 && min > 1e-7 * max).then_some(chol)
}

fn check_dims(z_m: &DMatrix<f64>, f_m: &DVector<f64>) -> Result<()> {
    if z_m.nrows() != f_m.len() {
        return Err(Error::DimensionMismatch {
            expected: z_m.nrows(),
            found: f_m.len(),
        });
    }
    Ok(())
}

/// Iterations between residual-balancing checks.
const ADAPT_EVERY: usize = 100;
/// Residual ratio that triggers a penalty change, and the factor applied.
const ADAPT_RATIO: f64 = 10.0;
const ADAPT_FACTOR: f64 = 2.0;

/// ADMM for the l1 fit, warm-started at the least-squares solution.
///
/// Stops when both residuals fall below tolerance or after `max_iters`. A run that
/// hits the cap is not an error: the lowest-objective iterate is returned with
/// `converged = false`.
///
/// With a fixed `delta`, residuals far above the shrink threshold `1 / delta`
/// (gross miscounts on busy links) can stall the dual residual indefinitely, so
/// after `adapt_after` iterations the penalty is halved or doubled whenever one
/// residual exceeds the other tenfold, rescaling the scaled dual to match.
pub fn solve_l1_admm(z_m: &DMatrix<f64>, f_m: &DVector<f64>, cfg: &AdmmConfig) -> Result<L1Fit> {
    cfg.validate()?;
    check_dims(z_m, f_m)?;
    let chol = normal_factor(z_m).ok_or(Error::NotFullColumnRank)?;
    let zt = z_m.transpose();
    let scale = 1.0 + f_m.norm();
    let (primal_tol, dual_tol) = (cfg.primal_tol * scale, cfg.dual_tol * scale);
    let mut delta = cfg.delta;

    let mut x = chol.solve(&(&zt * f_m));
    let mut z = z_m * &x - f_m;
    let mut u = DVector::zeros(f_m.len());

    let mut best = (l1_objective(z_m, &x, f_m), x.clone());
    let mut diag = AdmmDiagnostics {
        iterations: 0,
        converged: false,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        final_delta: delta,
    };
    for it in 1..=cfg.max_iters {
        x = chol.solve(&(&zt * (f_m + &z - &u)));
        let zx = z_m * &x;
        let w = &zx - f_m + &u;
        let z_new = shrink(&w, 1.0 / delta);
        let primal = &zx - &z_new - f_m;
        u += &primal;
        diag.primal_residual = primal.norm();
        diag.dual_residual = delta * (&zt * (&z_new - &z)).norm();
        z = z_new;
        diag.iterations = it;
        if diag.primal_residual <= primal_tol && diag.dual_residual <= dual_tol {
            diag.converged = true;
            break;
        }
        if it % 64 == 0 {
            let obj = l1_objective(z_m, &x, f_m);
            if obj < best.0 {
                best = (obj, x.clone());
            }
        }
        if cfg.adapt_after.is_some_and(|start| it >= start) && it % ADAPT_EVERY == 0 {
            // u is the dual scaled by 1/delta
            if diag.primal_residual > ADAPT_RATIO * diag.dual_residual {
                delta *= ADAPT_FACTOR;
                u /= ADAPT_FACTOR;
            } else if diag.dual_residual > ADAPT_RATIO * diag.primal_residual {
                delta /= ADAPT_FACTOR;
                u *= ADAPT_FACTOR;
            }
        }
    }
    diag.final_delta = delta;
    if !diag.converged {
        let obj = l1_objective(z_m, &x, f_m);
        if obj < best.0 {
            best = (obj, x.clone());
        }
        log::warn!(
            "l1 ADMM stopped at the iteration cap ({}) with primal {:.3e}, dual {:.3e}",
            cfg.max_iters,
            diag.primal_residual,
            diag.dual_residual
        );
        x = best.1;
    }
    let objective = l1_objective(z_m, &x, f_m);
    Ok(L1Fit {
        x,
        objective,
        diagnostics: Some(diag),
    })
}

/// Largest number of observation rows the LP oracle accepts.
pub const ORACLE_MAX_ROWS: usize = 200;

/// Exact l1 fit through its split-variable linear program.
pub fn solve_l1_exact(z_m: &DMatrix<f64>, f_m: &DVector<f64>) -> Result<L1Fit> {
    check_dims(z_m, f_m)?;
    if z_m.nrows() > ORACLE_MAX_ROWS {
        return Err(Error::OracleTooLarge {
            size: z_m.nrows(),
            cap: ORACLE_MAX_ROWS,
        });
    }
    if normal_factor(z_m).is_none() {
        return Err(Error::NotFullColumnRank);
    }
    let x = lp::l1_fit(z_m, f_m)?;
    let objective = l1_objective(z_m, &x, f_m);
    Ok(L1Fit {
        x,
        objective,
        diagnostics: None,
    })
}

/// Whether the optimal face of the l1 fit has positive width in some coordinate,
/// probed by minimizing and maximizing each coordinate over the set of points
/// within a hair of the optimal objective.
pub fn l1_has_ties(z_m: &DMatrix<f64>, f_m: &DVector<f64>, optimum: f64) -> Result<bool> {
    if z_m.nrows() > ORACLE_MAX_ROWS {
        return Err(Error::OracleTooLarge {
            size: z_m.nrows(),
            cap: ORACLE_MAX_ROWS,
        });
    }
    let slack = 1e-9 * (1.0 + optimum);
    let magnitude = 1.0 + f_m.amax();
    for c in 0..z_m.ncols() {
        let (lo, hi) = lp::l1_coordinate_range(z_m, f_m, optimum + slack, c)?;
        if hi - lo > 1e-6 * magnitude {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum L1Solver {
    #[default]
    Admm,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionConfig {
    pub admm: AdmmConfig,
    pub solver: L1Solver,
    /// Run the LP oracle alongside the chosen solver (skipped above the size cap).
    pub cross_check: bool,
    /// Report a rounded copy of the estimate when every observation is an integer.
    pub round: bool,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig {
            admm: AdmmConfig::default(),
            solver: L1Solver::Admm,
            cross_check: true,
            round: true,
        }
    }
}

/// LP oracle verdict on a correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCheck {
    pub objective: f64,
    /// `solver objective - oracle objective`.
    pub gap: f64,
    pub possibly_nonunique: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Suspect {
    pub link: usize,
    pub residual: f64,
    pub flagged: bool,
}

/// Factor over the median nonzero residual above which a link is flagged.
pub const SUSPECT_FACTOR: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct CorrectionResult {
    pub base_set: BaseSet,
    pub x_star: DVector<f64>,
    pub f_star: DVector<f64>,
    pub f_rounded: Option<DVector<f64>>,
    /// `f*_i - f_i` for each monitored link, in monitored order.
    pub residuals: DVector<f64>,
    pub objective: f64,
    pub solver: L1Solver,
    pub diagnostics: Option<AdmmDiagnostics>,
    pub oracle: Option<OracleCheck>,
    /// Monitored links ranked by decreasing `|residual|`.
    pub suspects: Vec<Suspect>,
    pub max_node_residual: f64,
    pub max_node_residual_rounded: Option<f64>,
}

impl CorrectionResult {
    pub fn converged(&self) -> bool {
        self.diagnostics.is_none_or(|d| d.converged)
    }

    pub fn iterations(&self) -> usize {
        self.diagnostics.map_or(0, |d| d.iterations)
    }

    pub fn possibly_nonunique(&self) -> bool {
        self.oracle.is_some_and(|o| o.possibly_nonunique)
    }

    /// The rounded estimate when available, otherwise the raw one.
    pub fn estimate(&self) -> &DVector<f64> {
        self.f_rounded.as_ref().unwrap_or(&self.f_star)
    }
}

/// Corrects observed flows using a base set found inside the monitored set.
pub fn correct_flows(
    network: &Network,
    monitored: &MonitoredSet,
    observation: &FlowObservation,
    cfg: &CorrectionConfig,
) -> Result<CorrectionResult> {
    let a = network::build_incidence(network)?;
    let k = kernel::find_base_set(&a, monitored.indices())?;
    correct_with_base_set(&a, &k, monitored, observation, cfg)
}

/// Corrects observed flows with the kernel basis of a caller-chosen base set.
pub fn correct_with_base_set(
    a: &IncidenceMatrix,
    base_set: &BaseSet,
    monitored: &MonitoredSet,
    observation: &FlowObservation,
    cfg: &CorrectionConfig,
) -> Result<CorrectionResult> {
    let basis = kernel::kernel_basis(a, base_set)?;
    correct_with_basis(a, &basis, monitored, observation, cfg)
}

fn correct_with_basis(
    a: &IncidenceMatrix,
    basis: &KernelBasis,
    monitored: &MonitoredSet,
    observation: &FlowObservation,
    cfg: &CorrectionConfig,
) -> Result<CorrectionResult> {
    let f_m = observation.values();
    if f_m.len() != monitored.len() {
        return Err(Error::DimensionMismatch {
            expected: monitored.len(),
            found: f_m.len(),
        });
    }
    let z_m = basis.rows(monitored.indices());
    if normal_factor(&z_m).is_none() {
        // Z_M loses rank exactly when M holds no base set
        return Err(Error::NoBaseSet);
    }
    let fit = match cfg.solver {
        L1Solver::Admm => solve_l1_admm(&z_m, f_m, &cfg.admm)?,
        L1Solver::Exact => solve_l1_exact(&z_m, f_m)?,
    };

    let oracle = if cfg.cross_check && z_m.nrows() <= ORACLE_MAX_ROWS {
        let exact = match cfg.solver {
            L1Solver::Exact => fit.clone(),
            L1Solver::Admm => solve_l1_exact(&z_m, f_m)?,
        };
        let possibly_nonunique = l1_has_ties(&z_m, f_m, exact.objective)?;
        if possibly_nonunique {
            log::info!("l1 minimizer is not unique; the estimate depends on the solver path");
        }
        Some(OracleCheck {
            objective: exact.objective,
            gap: fit.objective - exact.objective,
            possibly_nonunique,
        })
    } else {
        None
    };

    let f_star = basis.flow(&fit.x);
    let residuals = DVector::from_iterator(
        monitored.len(),
        monitored
            .indices()
            .iter()
            .zip(f_m.iter())
            .map(|(&j, &obs)| f_star[j] - obs),
    );
    let f_rounded =
        (cfg.round && observation.all_integers()).then(|| f_star.map(f64::round_ties_even));

    let max_node_residual = network::conservation_residual(a, &f_star)?.amax();
    let max_node_residual_rounded = match &f_rounded {
        Some(r) => Some(network::conservation_residual(a, r)?.amax()),
        None => None,
    };

    let suspects = rank_suspects(monitored, &residuals, f_m);
    Ok(CorrectionResult {
        base_set: basis.base_set().clone(),
        x_star: fit.x,
        f_star,
        f_rounded,
        objective: residuals.lp_norm(1),
        residuals,
        solver: cfg.solver,
        diagnostics: fit.diagnostics,
        oracle,
        suspects,
        max_node_residual,
        max_node_residual_rounded,
    })
}

/// Ranks monitored links by `|residual|`; a link is flagged when its residual
/// exceeds [`SUSPECT_FACTOR`] times the median of the nonzero residuals.
pub fn rank_suspects(
    monitored: &MonitoredSet,
    residuals: &DVector<f64>,
    f_m: &DVector<f64>,
) -> Vec<Suspect> {
    let zero = 1e-6 * (1.0 + f_m.amax());
    let mut nonzero: Vec<f64> = residuals
        .iter()
        .map(|r| r.abs())
        .filter(|&r| r > zero)
        .collect();
    nonzero.sort_by(f64::total_cmp);
    let median = match nonzero.len() {
        0 => f64::INFINITY,
        n if n % 2 == 1 => nonzero[n / 2],
        n => 0.5 * (nonzero[n / 2 - 1] + nonzero[n / 2]),
    };
    let mut out: Vec<Suspect> = monitored
        .indices()
        .iter()
        .zip(residuals.iter())
        .map(|(&link, &residual)| Suspect {
            link,
            residual,
            flagged: residual.abs() > zero && residual.abs() > SUSPECT_FACTOR * median,
        })
        .collect();
    out.sort_by(|a, b| {
        b.residual
            .abs()
            .total_cmp(&a.residual.abs())
            .then(a.link.cmp(&b.link))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_z_m() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            5,
            3,
            &[
                -1., 0., 1., //
                1., 0., 0., //
                0., -1., 1., //
                0., 1., 0., //
                0., 0., 1.,
            ],
        )
    }

    #[test]
    fn shrink_examples() {
        let z = DVector::from_vec(vec![3.0, -0.5, 0.0]);
        assert_eq!(shrink(&z, 1.0), DVector::from_vec(vec![2.0, 0.0, 0.0]));
        let z = DVector::from_vec(vec![-4.0, 2.0]);
        assert_eq!(shrink(&z, 0.5), DVector::from_vec(vec![-3.5, 1.5]));
        let z = DVector::from_vec(vec![0.3, -0.7, 0.7]);
        assert_eq!(shrink(&z, 0.7), DVector::zeros(3));
    }

    #[test]
    fn admm_example_one() {
        let f = DVector::from_vec(vec![300., 200., 200., 300., 600.]);
        let fit = solve_l1_admm(&toy_z_m(), &f, &AdmmConfig::default()).unwrap();
        let expected = DVector::from_vec(vec![200., 300., 500.]);
        assert!((&fit.x - expected).amax() < 1e-6, "{}", fit.x);
        assert!((fit.objective - 100.0).abs() < 1e-6);
        assert!(fit.diagnostics.unwrap().converged);
    }

    #[test]
    fn admm_example_two() {
        let f = DVector::from_vec(vec![302., 201., 198., 301., 600.]);
        let fit = solve_l1_admm(&toy_z_m(), &f, &AdmmConfig::default()).unwrap();
        let expected = DVector::from_vec(vec![201., 303., 503.]);
        assert!((&fit.x - expected).amax() < 1e-6, "{}", fit.x);
    }

    #[test]
    fn consistent_data_is_fit_exactly() {
        let x_hat = DVector::from_vec(vec![17.0, -4.0, 9.5]);
        let f = toy_z_m() * &x_hat;
        let fit = solve_l1_admm(&toy_z_m(), &f, &AdmmConfig::default()).unwrap();
        assert!((&fit.x - &x_hat).amax() < 1e-8);
        assert!(fit.objective < 1e-8);
        let exact = solve_l1_exact(&toy_z_m(), &f).unwrap();
        assert!(exact.objective < 1e-8);
    }

    #[test]
    fn exact_example_one() {
        let f = DVector::from_vec(vec![300., 200., 200., 300., 600.]);
        let fit = solve_l1_exact(&toy_z_m(), &f).unwrap();
        assert!((fit.objective - 100.0).abs() < 1e-9);
        assert!((&fit.x - DVector::from_vec(vec![200., 300., 500.])).amax() < 1e-9);
        assert!(!l1_has_ties(&toy_z_m(), &f, fit.objective).unwrap());
    }

    #[test]
    fn example_two_has_a_tied_face() {
        // residuals +2 on links 4 and 5 trade off one-for-one along x_2
        let f = DVector::from_vec(vec![302., 201., 198., 301., 600.]);
        let fit = solve_l1_exact(&toy_z_m(), &f).unwrap();
        assert!((fit.objective - 101.0).abs() < 1e-9);
        assert!(l1_has_ties(&toy_z_m(), &f, fit.objective).unwrap());
    }

    #[test]
    fn rank_deficient_rejected() {
        let z = DMatrix::from_row_slice(3, 2, &[1., 1., 2., 2., 3., 3.]);
        let f = DVector::from_vec(vec![1., 2., 3.]);
        assert!(matches!(
            solve_l1_admm(&z, &f, &AdmmConfig::default()),
            Err(Error::NotFullColumnRank)
        ));
        assert!(matches!(
            solve_l1_exact(&z, &f),
            Err(Error::NotFullColumnRank)
        ));
    }

    #[test]
    fn oracle_size_cap() {
        let z = DMatrix::from_element(ORACLE_MAX_ROWS + 1, 1, 1.0);
        let f = DVector::zeros(ORACLE_MAX_ROWS + 1);
        assert!(matches!(
            solve_l1_exact(&z, &f),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let bad = AdmmConfig {
            delta: 0.0,
            ..AdmmConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = AdmmConfig {
            max_iters: 0,
            ..AdmmConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let f = DVector::from_vec(vec![300., 200., 200., 300., 600.]);
        let cfg = AdmmConfig {
            max_iters: 2,
            ..AdmmConfig::default()
        };
        let fit = solve_l1_admm(&toy_z_m(), &f, &cfg).unwrap();
        let d = fit.diagnostics.unwrap();
        assert!(!d.converged);
        assert_eq!(d.iterations, 2);
    }
}
