//! Recoverability of a link subset and the correction-error bound it implies.
//!
//! For monitored links `M` and a subset `S`, recoverability is
//!
//! ```text
//!     Rec(S) = inf_{v : Z_S v != 0}  ||Z_{M\S} v||_1 / ||Z_S v||_1
//! ```
//!
//! Miscounts confined to `S` are corrected exactly when `Rec(S) > 1`, and with
//! small noise elsewhere the error obeys
//! `||f* - f||_1 <= lambda(alpha) ||e_{M\S}||_1` where
//! `lambda = 2(alpha+1)/(alpha-1) * min_K (||(A^{K^c})^{-1} A^K||_1 + 1)` over
//! base sets `K` inside `M`.
//!
//! The infimum is a ratio of two degree-one homogeneous functions, minimized here
//! by an inverse power iteration whose inner step is a ball-constrained l1
//! problem solved with ADMM. A sign-pattern LP enumeration gives the exact value
//! for small subsets.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::correction::{normal_factor, shrink_scalar};
use crate::error::{Error, Result};
use crate::kernel::{self, BaseSet, KernelBasis};
use crate::linalg;
use crate::lp;
use crate::network::{self, IncidenceMatrix, MonitoredSet, Network};

/// Values at or below this magnitude count as zero in sign and degeneracy tests.
const ZERO_TOL: f64 = 1e-12;

/// Margin above 1 required before exact recovery is certified.
pub const CERTIFICATION_MARGIN: f64 = 1e-6;

/// Largest subset the sign-pattern oracle accepts.
pub const EXACT_MAX_SUBSET: usize = 12;

/// Rows of `Z` split into the queried subset and the rest of the monitored set.
#[derive(Debug, Clone)]
struct SplitRows {
    subset: DMatrix<f64>,
    rest: DMatrix<f64>,
}

fn split_rows(
    basis: &KernelBasis,
    monitored: &MonitoredSet,
    subset: &[usize],
) -> Result<SplitRows> {
    if subset.is_empty() {
        return Err(Error::InvalidConfig("subset must not be empty".into()));
    }
    if let Some(&j) = subset.iter().find(|&&j| !monitored.contains(j)) {
        return Err(Error::SubsetNotMonitored(format!("#{j}")));
    }
    let rest: Vec<usize> = monitored
        .indices()
        .iter()
        .copied()
        .filter(|j| !subset.contains(j))
        .collect();
    Ok(SplitRows {
        subset: basis.rows(subset),
        rest: basis.rows(&rest),
    })
}

fn quotient_of(rows: &SplitRows, v: &DVector<f64>) -> Option<f64> {
    let den = (&rows.subset * v).lp_norm(1);
    if den <= ZERO_TOL * v.norm().max(1.0) {
        return None;
    }
    Some((&rows.rest * v).lp_norm(1) / den)
}

/// `||Z_{M\S} v||_1 / ||Z_S v||_1` for one direction `v`.
pub fn recoverability_quotient(
    basis: &KernelBasis,
    monitored: &MonitoredSet,
    subset: &[usize],
    v: &DVector<f64>,
) -> Result<f64> {
    if v.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: v.len(),
        });
    }
    let rows = split_rows(basis, monitored, subset)?;
    quotient_of(&rows, v).ok_or(Error::DegenerateDirection)
}

/// ADMM settings for the ball-constrained inner problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerAdmmConfig {
    pub delta: f64,
    pub max_iters: usize,
    /// Absolute tolerance on primal and dual residuals (directions live in the unit ball).
    pub tol: f64,
}

impl Default for InnerAdmmConfig {
    fn default() -> Self {
        InnerAdmmConfig {
            delta: 1.0,
            max_iters: 5_000,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InversePowerConfig {
    pub outer_iters: usize,
    pub inner: InnerAdmmConfig,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for InversePowerConfig {
    fn default() -> Self {
        InversePowerConfig {
            outer_iters: 100,
            inner: InnerAdmmConfig::default(),
            restarts: 8,
            seed: 0,
        }
    }
}

impl InversePowerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_iters == 0 || self.restarts == 0 || self.inner.max_iters == 0 {
            return Err(Error::InvalidConfig(
                "iteration and restart counts must be at least 1".into(),
            ));
        }
        if !(self.inner.delta > 0.0 && self.inner.tol > 0.0) {
            return Err(Error::InvalidConfig(
                "inner delta and tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct InversePowerResult {
    pub value: f64,
    pub direction: DVector<f64>,
    /// Quotient after each accepted outer step of the winning restart.
    pub trace: Vec<f64>,
    /// Final value of every restart, in start order.
    pub restart_values: Vec<f64>,
    /// Inner solves that hit their iteration cap.
    pub inner_stalls: usize,
}

/// How an inner solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InnerExit {
    Converged,
    /// Primal feasible with a flat objective while the iterate still drifts.
    Plateau,
    Capped,
}

/// Iterations between objective comparisons for plateau detection.
const PLATEAU_WINDOW: usize = 100;

/// Solves `min ||R v||_1 - <b, v>` over `||v||_2 <= 1` by ADMM on `z = R v`.
///
/// The v-step solves the normal equations and then projects onto the ball.
fn ball_subproblem(
    rest: &DMatrix<f64>,
    chol: &Cholesky<f64, Dyn>,
    b: &DVector<f64>,
    start: &DVector<f64>,
    cfg: &InnerAdmmConfig,
) -> (DVector<f64>, InnerExit) {
    let rt = rest.transpose();
    let delta = cfg.delta;
    let threshold = 1.0 / delta;
    let objective = |v: &DVector<f64>| (rest * v).lp_norm(1) - b.dot(v);
    let mut v = start.clone();
    let mut z = rest * &v;
    let mut u = DVector::zeros(rest.nrows());
    let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);
    let mut last_obj = f64::INFINITY;
    for it in 1..=cfg.max_iters {
        v = chol.solve(&(&rt * (&z + &u / delta) + b / delta));
        let norm = v.norm();
        if norm > 1.0 {
            v /= norm;
        }
        let rv = rest * &v;
        let z_new = (&rv - &u / delta).map(|w| shrink_scalar(w, threshold));
        let gap = &z_new - &rv;
        u += delta * &gap;
        primal = gap.norm();
        dual = delta * (&rt * (&z_new - &z)).norm();
        z = z_new;
        if primal <= cfg.tol && dual <= cfg.tol {
            return (v, InnerExit::Converged);
        }
        if it % PLATEAU_WINDOW == 0 {
            let obj = objective(&v);
            if primal <= cfg.tol && (obj - last_obj).abs() <= cfg.tol * (1.0 + obj.abs()) {
                log::trace!(
                    "inner plateau after {it} iterations: dual {dual:.2e}, |v| {:.6}",
                    v.norm()
                );
                return (v, InnerExit::Plateau);
            }
            last_obj = obj;
        }
    }
    log::debug!(
        "inner solve capped: primal {primal:.2e}, dual {dual:.2e}, |v| {:.6}",
        v.norm()
    );
    (v, InnerExit::Capped)
}

fn sign(x: f64) -> f64 {
    if x > ZERO_TOL {
        1.0
    } else if x < -ZERO_TOL {
        -1.0
    } else {
        0.0
    }
}

struct Run {
    value: f64,
    direction: DVector<f64>,
    trace: Vec<f64>,
    stalls: usize,
    plateaus: usize,
}

fn inverse_power_run(
    rows: &SplitRows,
    chol: &Cholesky<f64, Dyn>,
    start: &DVector<f64>,
    cfg: &InversePowerConfig,
) -> Option<Run> {
    let mut v = start.normalize();
    let mut lambda = quotient_of(rows, &v)?;
    let mut trace = vec![lambda];
    let mut stalls = 0;
    let mut plateaus = 0;
    for _ in 0..cfg.outer_iters {
        let signs = (&rows.subset * &v).map(sign);
        let b = lambda * rows.subset.transpose() * signs;
        let (cand, exit) = ball_subproblem(&rows.rest, chol, &b, &v, &cfg.inner);
        plateaus += usize::from(exit == InnerExit::Plateau);
        // once lambda is stationary the inner minimum is attained on a whole
        // segment through the origin, so no strictly better direction comes back
        let Some(next) = quotient_of(rows, &cand) else {
            break;
        };
        if next > lambda - ZERO_TOL * lambda.max(1.0) {
            break;
        }
        stalls += usize::from(exit == InnerExit::Capped);
        let improvement = lambda - next;
        lambda = next;
        v = cand.normalize();
        trace.push(lambda);
        debug_assert!(improvement > 0.0);
    }
    Some(Run {
        value: lambda,
        direction: v,
        trace,
        stalls,
        plateaus,
    })
}

/// Starting directions: for each subset row, the coordinate with the largest
/// entry, then seeded Gaussian directions up to `restarts`.
fn starting_directions(subset: &DMatrix<f64>, restarts: usize, seed: u64) -> Vec<DVector<f64>> {
    let k = subset.ncols();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(restarts);
    let mut used = vec![false; k];
    for row in subset.row_iter() {
        let (c, mag) =
            row.iter()
                .enumerate()
                .map(|(c, x)| (c, x.abs()))
                .fold(
                    (0, 0.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if mag > ZERO_TOL && !used[c] && out.len() < restarts {
            used[c] = true;
            out.push(DVector::from_fn(k, |i, _| if i == c { 1.0 } else { 0.0 }));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < restarts {
        let v = DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
        if v.norm() > 0.0 {
            out.push(v);
        }
    }
    out
}

/// Recoverability by inverse power iteration with restarts; the smallest final
/// quotient over restarts is returned, which is an upper bound on the true value.
pub fn recoverability_inverse_power(
    basis: &KernelBasis,
    monitored: &MonitoredSet,
    subset: &[usize],
    cfg: &InversePowerConfig,
) -> Result<InversePowerResult> {
    cfg.validate()?;
    let rows = split_rows(basis, monitored, subset)?;
    if rows.subset.amax() <= ZERO_TOL {
        return Err(Error::DegenerateSubset);
    }
    let Some(chol) = normal_factor(&rows.rest) else {
        return null_direction(&rows);
    };

    let starts = starting_directions(&rows.subset, cfg.restarts, cfg.seed);
    let mut best: Option<Run> = None;
    let mut restart_values = Vec::with_capacity(starts.len());
    let mut stalls = 0;
    let mut plateaus = 0;
    for start in &starts {
        let Some(run) = inverse_power_run(&rows, &chol, start, cfg) else {
            restart_values.push(f64::NAN);
            continue;
        };
        restart_values.push(run.value);
        stalls += run.stalls;
        plateaus += run.plateaus;
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    if stalls > 0 {
        log::warn!("{stalls} inner ball-constrained solves stopped at the iteration cap");
    }
    if plateaus > 0 {
        log::debug!("{plateaus} inner solves stopped on an objective plateau");
    }
    let best = best.ok_or(Error::DegenerateSubset)?;
    Ok(InversePowerResult {
        value: best.value,
        direction: best.direction,
        trace: best.trace,
        restart_values,
        inner_stalls: stalls,
    })
}

/// When `Z_{M\S}` has a null direction that is visible on `S`, the infimum is 0.
///
/// Null directions come from the Gram matrix, which also covers the case of
/// fewer remaining rows than kernel dimensions.
fn null_direction(rows: &SplitRows) -> Result<InversePowerResult> {
    let gram = rows.rest.transpose() * &rows.rest;
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.amax().max(1.0);
    let smallest = eig.eigenvalues.imin();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for i in 0..eig.eigenvalues.len() {
        if i != smallest && eig.eigenvalues[i] > 1e-12 * top {
            continue;
        }
        let dir = eig.eigenvectors.column(i).into_owned();
        let energy = (&rows.subset * &dir).lp_norm(1);
        if best.as_ref().is_none_or(|(e, _)| energy > *e) {
            best = Some((energy, dir));
        }
    }
    match best {
        Some((energy, direction)) if energy > 1e-9 => {
            let value = (&rows.rest * &direction).lp_norm(1) / energy;
            Ok(InversePowerResult {
                value,
                direction,
                trace: vec![value],
                restart_values: vec![value],
                inner_stalls: 0,
            })
        }
        _ => Err(Error::NotFullColumnRank),
    }
}

#[derive(Debug, Clone)]
pub struct ExactRecoverability {
    /// `+inf` when no direction is visible on the subset.
    pub value: f64,
    pub direction: Option<DVector<f64>>,
    pub patterns_solved: usize,
}

/// Exact recoverability: for each sign pattern `s` on `S` (up to a global sign),
/// minimize `||Z_{M\S} v||_1` over `s_i (Z_S v)_i >= 0`, `s' Z_S v = 1`.
pub fn recoverability_exact(
    basis: &KernelBasis,
    monitored: &MonitoredSet,
    subset: &[usize],
) -> Result<ExactRecoverability> {
    if subset.len() > EXACT_MAX_SUBSET {
        return Err(Error::OracleTooLarge {
            size: subset.len(),
            cap: EXACT_MAX_SUBSET,
        });
    }
    let rows = split_rows(basis, monitored, subset)?;
    let s = subset.len();
    let mut best = ExactRecoverability {
        value: f64::INFINITY,
        direction: None,
        patterns_solved: 0,
    };
    // v -> -v maps pattern s to -s, so fixing the first sign loses nothing
    for mask in 0u32..(1 << (s - 1)) {
        let signs: Vec<f64> = (0..s)
            .map(|i| {
                if i > 0 && mask & (1 << (i - 1)) != 0 {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect();
        best.patterns_solved += 1;
        if let Some((value, dir)) = lp::signed_quotient(&rows.rest, &rows.subset, &signs)? {
            if value < best.value {
                best.value = value;
                best.direction = Some(dir);
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityConstant {
    pub alpha: f64,
    pub lambda: f64,
    /// Minimizing base set.
    pub base_set: Vec<usize>,
    /// `||(A^{K^c})^{-1} A^K||_1` at the minimizing base set.
    pub norm: f64,
    pub base_sets_evaluated: usize,
    pub truncated: bool,
}

/// `2(alpha+1)/(alpha-1)`, tending to 2 as `alpha -> inf`.
pub fn stability_factor(alpha: f64) -> f64 {
    if alpha.is_infinite() {
        2.0
    } else {
        2.0 * (alpha + 1.0) / (alpha - 1.0)
    }
}

/// Error-bound constant for recoverability `alpha > 1`, minimized over up to
/// `limit` base sets inside `M`. A truncated search still yields a valid bound.
pub fn stability_constant(
    a: &IncidenceMatrix,
    monitored: &MonitoredSet,
    alpha: f64,
    limit: usize,
) -> Result<StabilityConstant> {
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let found = kernel::enumerate_base_sets(a, monitored.indices(), limit)?;
    let mut best: Option<(f64, &BaseSet)> = None;
    for k in &found.sets {
        let norm = linalg::operator_one_norm(&kernel::complement_map(a, k)?);
        if best.is_none_or(|(b, _)| norm < b) {
            best = Some((norm, k));
        }
    }
    let (norm, k) = best.ok_or(Error::NoBaseSet)?;
    Ok(StabilityConstant {
        alpha,
        lambda: stability_factor(alpha) * (norm + 1.0),
        base_set: k.links().to_vec(),
        norm,
        base_sets_evaluated: found.sets.len(),
        truncated: found.truncated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RecoverabilityMethod {
    /// Inverse power, replaced by the exact oracle value when the subset is small enough.
    #[default]
    Auto,
    InversePower,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueSource {
    InversePower,
    ExactOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifyConfig {
    pub method: RecoverabilityMethod,
    pub inverse_power: InversePowerConfig,
    /// Cap on base sets enumerated for the stability constant.
    pub lambda_limit: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            method: RecoverabilityMethod::Auto,
            inverse_power: InversePowerConfig::default(),
            lambda_limit: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoverabilityReport {
    pub subset: Vec<usize>,
    pub value: f64,
    pub method: ValueSource,
    pub inverse_power_value: Option<f64>,
    pub oracle_value: Option<f64>,
    pub certified_exact_recovery: bool,
    pub stability: Option<StabilityConstant>,
    pub trace: Vec<f64>,
}

/// Computes `Rec(S)`, decides whether exact recovery on `S` is guaranteed, and
/// attaches the stability constant when it is.
pub fn certify(
    network: &Network,
    monitored: &MonitoredSet,
    subset: &[usize],
    cfg: &CertifyConfig,
) -> Result<RecoverabilityReport> {
    let mut subset = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    if let Some(&j) = subset.iter().find(|&&j| !monitored.contains(j)) {
        let id = network
            .links()
            .get(j)
            .map_or_else(|| format!("#{j}"), |l| l.id.clone());
        return Err(Error::SubsetNotMonitored(id));
    }
    let a = network::build_incidence(network)?;
    let k = kernel::find_base_set(&a, monitored.indices())?;
    let basis = kernel::kernel_basis(&a, &k)?;
    if basis.rows(&subset).amax() <= ZERO_TOL {
        return Err(Error::DegenerateSubset);
    }

    let run_ip = cfg.method != RecoverabilityMethod::Exact;
    let run_exact = match cfg.method {
        RecoverabilityMethod::Exact => true,
        RecoverabilityMethod::Auto => subset.len() <= EXACT_MAX_SUBSET,
        RecoverabilityMethod::InversePower => false,
    };
    let ip = if run_ip {
        Some(recoverability_inverse_power(
            &basis,
            monitored,
            &subset,
            &cfg.inverse_power,
        )?)
    } else {
        None
    };
    let exact = if run_exact {
        Some(recoverability_exact(&basis, monitored, &subset)?)
    } else {
        None
    };
    let (value, method) = match (&exact, &ip) {
        (Some(e), _) => (e.value, ValueSource::ExactOracle),
        (None, Some(r)) => (r.value, ValueSource::InversePower),
        (None, None) => unreachable!("at least one method runs"),
    };
    if let (Some(e), Some(r)) = (&exact, &ip) {
        if r.value > e.value + 1e-4 {
            log::warn!(
                "inverse power stalled at {:.6} above the exact value {:.6}",
                r.value,
                e.value
            );
        }
    }
    let certified = value > 1.0 + CERTIFICATION_MARGIN;
    let stability = if certified {
        Some(stability_constant(&a, monitored, value, cfg.lambda_limit)?)
    } else {
        None
    };
    Ok(RecoverabilityReport {
        subset,
        value,
        method,
        inverse_power_value: ip.as_ref().map(|r| r.value),
        oracle_value: exact.as_ref().map(|e| e.value),
        certified_exact_recovery: certified,
        stability,
        trace: ip.map(|r| r.trace).unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_incidence, Link};

    fn toy() -> Network {
        Network::new(
            None,
            vec!["1".into(), "2".into(), "3".into()],
            vec![
                Link::new("1", None, Some("1")),
                Link::new("2", None, Some("1")),
                Link::new("3", Some("1"), Some("2")),
                Link::new("4", Some("1"), Some("3")),
                Link::new("5", Some("2"), Some("3")),
                Link::new("6", Some("3"), None),
            ],
        )
        .unwrap()
    }

    fn paper_basis() -> (IncidenceMatrix, KernelBasis, MonitoredSet) {
        let net = toy();
        let a = build_incidence(&net).unwrap();
        let k = BaseSet::new(&a, vec![1, 2, 5]).unwrap();
        let z = kernel::kernel_basis(&a, &k).unwrap();
        let m = MonitoredSet::new(&net, vec![0, 1, 3, 4, 5]).unwrap();
        (a, z, m)
    }

    #[test]
    fn quotient_examples() {
        let (_, z, m) = paper_basis();
        let e3 = DVector::from_vec(vec![0., 0., 1.]);
        assert_eq!(recoverability_quotient(&z, &m, &[5], &e3).unwrap(), 2.0);
        let e1 = DVector::from_vec(vec![1., 0., 0.]);
        assert_eq!(recoverability_quotient(&z, &m, &[0], &e1).unwrap(), 1.0);
        let e2 = DVector::from_vec(vec![0., 1., 0.]);
        assert!(matches!(
            recoverability_quotient(&z, &m, &[5], &e2),
            Err(Error::DegenerateDirection)
        ));
    }

    #[test]
    fn inverse_power_toy_values() {
        let (_, z, m) = paper_basis();
        let cfg = InversePowerConfig::default();
        let r6 = recoverability_inverse_power(&z, &m, &[5], &cfg).unwrap();
        assert!((r6.value - 2.0).abs() < 1e-6, "{}", r6.value);
        let r1 = recoverability_inverse_power(&z, &m, &[0], &cfg).unwrap();
        assert!((r1.value - 1.0).abs() < 1e-6, "{}", r1.value);
        for w in r1.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn exact_toy_values() {
        let (_, z, m) = paper_basis();
        assert!((recoverability_exact(&z, &m, &[5]).unwrap().value - 2.0).abs() < 1e-9);
        assert!((recoverability_exact(&z, &m, &[0]).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn subset_must_be_monitored() {
        let (_, z, m) = paper_basis();
        assert!(matches!(
            recoverability_exact(&z, &m, &[2]),
            Err(Error::SubsetNotMonitored(_))
        ));
    }

    #[test]
    fn stability_constant_rejects_small_alpha() {
        let (a, _, m) = paper_basis();
        assert!(matches!(
            stability_constant(&a, &m, 1.0, 100),
            Err(Error::InvalidAlpha(_))
        ));
        assert!(matches!(
            stability_constant(&a, &m, 0.5, 100),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn stability_factor_decreases() {
        let vals: Vec<f64> = [1.5, 2.0, 4.0, 10.0]
            .iter()
            .map(|&a| stability_factor(a))
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(stability_factor(f64::INFINITY), 2.0);
        assert_eq!(stability_factor(2.0), 6.0);
    }

    #[test]
    fn certify_toy() {
        let net = toy();
        let m = MonitoredSet::new(&net, vec![0, 1, 3, 4, 5]).unwrap();
        let r = certify(&net, &m, &[5], &CertifyConfig::default()).unwrap();
        assert!(r.certified_exact_recovery);
        assert!((r.value - 2.0).abs() < 1e-9);
        assert!(r.stability.is_some());
        let r = certify(&net, &m, &[0], &CertifyConfig::default()).unwrap();
        assert!(!r.certified_exact_recovery);
        assert!(r.stability.is_none());
    }

    #[test]
    fn starting_directions_are_deterministic() {
        let s = DMatrix::from_row_slice(1, 3, &[0., 0., 1.]);
        let a = starting_directions(&s, 4, 9);
        let b = starting_directions(&s, 4, 9);
        assert_eq!(a, b);
        assert_eq!(a[0], DVector::from_vec(vec![0., 0., 1.]));
        assert_eq!(a.len(), 4);
    }
}
