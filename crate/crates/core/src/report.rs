//! Human-readable and JSON renderings of correction, recoverability and
//! validation results.

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::correction::{CorrectionResult, L1Solver};
use crate::error::{Error, ParseError, Result};
use crate::format::{NetworkDocument, Scenario};
use crate::network::{FlowObservation, MonitoredSet, Network};
use crate::recoverability::{self, CertifyConfig, RecoverabilityReport};

pub const CORRECTION_FORMAT: &str = "linkflow-correction";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Json,
}

/// Integers print without a fractional part, everything else with three decimals.
pub fn fmt_count(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// `(estimate - observed) / observed` as a percentage with one decimal.
pub fn percent_difference(estimate: f64, observed: f64) -> Option<f64> {
    (observed != 0.0).then(|| 100.0 * (estimate - observed) / observed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRow {
    pub id: String,
    pub observed: Option<f64>,
    /// Rounded estimate when rounding applied, raw otherwise.
    pub estimate: f64,
    pub raw_estimate: f64,
    pub difference: Option<f64>,
    pub percent_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspectRow {
    pub id: String,
    pub residual: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub objective: f64,
    pub gap: f64,
    pub possibly_nonunique: bool,
}

/// Machine-readable correction report. It embeds the input network so that the
/// report alone is enough to score the estimate later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionReport {
    pub format: String,
    pub version: u32,
    pub network: NetworkDocument,
    pub links: Vec<LinkRow>,
    pub base_set: Vec<String>,
    pub objective: f64,
    pub solver: String,
    pub converged: bool,
    pub iterations: usize,
    pub rounded: bool,
    pub oracle: Option<OracleRow>,
    pub suspects: Vec<SuspectRow>,
    pub max_node_residual: f64,
}

impl CorrectionReport {
    pub fn new(
        network: &Network,
        monitored: &MonitoredSet,
        observation: &FlowObservation,
        result: &CorrectionResult,
    ) -> Self {
        let estimate = result.estimate();
        let links = network
            .links()
            .iter()
            .enumerate()
            .map(|(j, link)| {
                let observed = monitored.position(j).map(|p| observation.values()[p]);
                LinkRow {
                    id: link.id.clone(),
                    observed,
                    estimate: estimate[j],
                    raw_estimate: result.f_star[j],
                    difference: observed.map(|o| estimate[j] - o),
                    percent_difference: observed.and_then(|o| percent_difference(estimate[j], o)),
                }
            })
            .collect();
        CorrectionReport {
            format: CORRECTION_FORMAT.into(),
            version: 1,
            network: NetworkDocument::from_model(network, monitored, Some(observation)),
            links,
            base_set: result
                .base_set
                .links()
                .iter()
                .map(|&j| network.link_id(j).to_owned())
                .collect(),
            objective: result.objective,
            solver: match result.solver {
                L1Solver::Admm => "admm".into(),
                L1Solver::Exact => "exact".into(),
            },
            converged: result.converged(),
            iterations: result.iterations(),
            rounded: result.f_rounded.is_some(),
            oracle: result.oracle.map(|o| OracleRow {
                objective: o.objective,
                gap: o.gap,
                possibly_nonunique: o.possibly_nonunique,
            }),
            suspects: result
                .suspects
                .iter()
                .map(|s| SuspectRow {
                    id: network.link_id(s.link).to_owned(),
                    residual: s.residual,
                    flagged: s.flagged,
                })
                .collect(),
            max_node_residual: result
                .max_node_residual_rounded
                .unwrap_or(result.max_node_residual),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: CorrectionReport = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if r.format != CORRECTION_FORMAT {
            return Err(ParseError::UnsupportedFormat(format!("format {:?}", r.format)).into());
        }
        Ok(r)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Estimate aligned with the embedded network's link order.
    pub fn estimate(&self, network: &Network) -> Result<DVector<f64>> {
        let mut out = vec![None; network.link_count()];
        for row in &self.links {
            let j = network
                .link_index(&row.id)
                .ok_or_else(|| ParseError::UnknownLink(row.id.clone()))?;
            out[j] = Some(row.estimate);
        }
        let values = out
            .into_iter()
            .enumerate()
            .map(|(j, v)| {
                v.ok_or_else(|| ParseError::MissingObservation(network.link_id(j).to_owned()))
            })
            .collect::<Result<Vec<f64>, ParseError>>()?;
        Ok(DVector::from_vec(values))
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.network.name {
            let _ = writeln!(out, "network: {name}");
        }
        let _ = writeln!(
            out,
            "solver: {}  iterations: {}  converged: {}  objective: {}",
            self.solver,
            self.iterations,
            yes_no(self.converged),
            fmt_value(self.objective)
        );
        if let Some(o) = &self.oracle {
            let _ = writeln!(
                out,
                "exact objective: {}  gap: {:.3e}  possibly non-unique: {}",
                fmt_value(o.objective),
                o.gap,
                yes_no(o.possibly_nonunique)
            );
        }
        let _ = writeln!(out, "base set: {}", self.base_set.join(", "));
        out.push('\n');

        let header = [
            "Link",
            "Observation",
            "Estimation",
            "Difference",
            "Percentage Difference",
        ];
        let rows: Vec<[String; 5]> = self
            .links
            .iter()
            .map(|r| {
                [
                    r.id.clone(),
                    r.observed.map_or("N/A".into(), fmt_count),
                    fmt_count(r.estimate),
                    r.difference.map_or("N/A".into(), fmt_count),
                    r.percent_difference
                        .map_or("N/A".into(), |p| format!("{p:.1}%")),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[&str]| {
            let mut s = format!("{:<w$}", cells[0], w = widths[0]);
            for (c, w) in cells[1..].iter().zip(&widths[1..]) {
                let _ = write!(s, "  {c:>w$}");
            }
            s
        };
        let _ = writeln!(out, "{}", line(&header));
        for row in &rows {
            let cells: Vec<&str> = row.iter().map(String::as_str).collect();
            let _ = writeln!(out, "{}", line(&cells));
        }

        let flagged: Vec<&str> = self
            .suspects
            .iter()
            .filter(|s| s.flagged)
            .map(|s| s.id.as_str())
            .collect();
        let ranking: Vec<&str> = self
            .suspects
            .iter()
            .take(5)
            .map(|s| s.id.as_str())
            .collect();
        out.push('\n');
        let _ = writeln!(out, "largest corrections: {}", ranking.join(", "));
        let _ = writeln!(
            out,
            "flagged as miscounted: {}",
            if flagged.is_empty() {
                "none".to_owned()
            } else {
                flagged.join(", ")
            }
        );
        let _ = writeln!(
            out,
            "max node imbalance: {}",
            fmt_value(self.max_node_residual)
        );
        out
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.6}")
    }
}

/// Recoverability report with link ids in place of column indices.
#[derive(Debug, Clone, Serialize)]
pub struct RecoverabilitySummary {
    pub subset: Vec<String>,
    pub value: f64,
    pub method: recoverability::ValueSource,
    pub inverse_power_value: Option<f64>,
    pub oracle_value: Option<f64>,
    pub certified_exact_recovery: bool,
    pub lambda: Option<f64>,
    pub lambda_base_set: Option<Vec<String>>,
    pub lambda_norm: Option<f64>,
    pub base_sets_evaluated: Option<usize>,
    pub lambda_truncated: Option<bool>,
    pub trace_length: usize,
}

impl RecoverabilitySummary {
    pub fn new(network: &Network, r: &RecoverabilityReport) -> Self {
        let ids = |v: &[usize]| {
            v.iter()
                .map(|&j| network.link_id(j).to_owned())
                .collect::<Vec<_>>()
        };
        let s = r.stability.as_ref();
        RecoverabilitySummary {
            subset: ids(&r.subset),
            value: r.value,
            method: r.method,
            inverse_power_value: r.inverse_power_value,
            oracle_value: r.oracle_value,
            certified_exact_recovery: r.certified_exact_recovery,
            lambda: s.map(|s| s.lambda),
            lambda_base_set: s.map(|s| ids(&s.base_set)),
            lambda_norm: s.map(|s| s.norm),
            base_sets_evaluated: s.map(|s| s.base_sets_evaluated),
            lambda_truncated: s.map(|s| s.truncated),
            trace_length: r.trace.len(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let method = match self.method {
            recoverability::ValueSource::InversePower => "inverse power",
            recoverability::ValueSource::ExactOracle => "exact LP oracle",
        };
        let _ = writeln!(out, "subset: {}", self.subset.join(", "));
        let _ = writeln!(out, "recoverability: {} ({method})", fmt_value(self.value));
        if let Some(v) = self.inverse_power_value {
            let _ = writeln!(out, "inverse power value: {}", fmt_value(v));
        }
        if let Some(v) = self.oracle_value {
            let _ = writeln!(out, "exact LP value: {}", fmt_value(v));
        }
        let _ = writeln!(
            out,
            "exact recovery certified: {}",
            yes_no(self.certified_exact_recovery)
        );
        match (self.lambda, &self.lambda_base_set) {
            (Some(l), Some(k)) => {
                let _ = writeln!(out, "stability constant lambda: {}", fmt_value(l));
                let _ = writeln!(out, "minimizing base set: {}", k.join(", "));
                let _ = writeln!(
                    out,
                    "base sets evaluated: {}{}",
                    self.base_sets_evaluated.unwrap_or(0),
                    if self.lambda_truncated == Some(true) {
                        " (truncated)"
                    } else {
                        ""
                    }
                );
            }
            _ => {
                let _ = writeln!(
                    out,
                    "stability constant lambda: n/a (recoverability does not exceed 1)"
                );
            }
        }
        let _ = writeln!(out, "inverse power trace length: {}", self.trace_length);
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkError {
    pub id: String,
    pub estimate: f64,
    pub truth: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub subset: Vec<String>,
    pub recoverability: f64,
    pub certified: bool,
    pub lambda: Option<f64>,
    /// `||e_{M\S}||_1`: observation error outside the subset.
    pub noise_l1: f64,
    pub bound: Option<f64>,
    pub holds: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub l1_error: f64,
    pub max_abs_error: f64,
    pub links: Vec<LinkError>,
    pub bound: Option<BoundCheck>,
}

/// Scores an estimate against ground truth and, for a subset, checks
/// `||f* - f||_1 <= lambda ||e_{M\S}||_1`.
pub fn validate_estimate(
    scenario: &Scenario,
    estimate: &DVector<f64>,
    truth: &DVector<f64>,
    subset: Option<&[usize]>,
    cfg: &CertifyConfig,
) -> Result<ValidationReport> {
    let network = &scenario.network;
    if estimate.len() != network.link_count() || truth.len() != network.link_count() {
        return Err(Error::DimensionMismatch {
            expected: network.link_count(),
            found: estimate.len().min(truth.len()),
        });
    }
    let diff = estimate - truth;
    let links = network
        .links()
        .iter()
        .enumerate()
        .map(|(j, l)| LinkError {
            id: l.id.clone(),
            estimate: estimate[j],
            truth: truth[j],
            error: diff[j],
        })
        .collect();
    let l1_error = diff.lp_norm(1);
    let bound = match subset {
        None => None,
        Some(s) => {
            let obs = scenario.observation.as_ref().ok_or_else(|| {
                ParseError::MissingObservation("observations are needed for the bound".into())
            })?;
            let r = recoverability::certify(network, &scenario.monitored, s, cfg)?;
            let noise_l1: f64 = scenario
                .monitored
                .indices()
                .iter()
                .zip(obs.values().iter())
                .filter(|(j, _)| !r.subset.contains(j))
                .map(|(&j, &o)| (o - truth[j]).abs())
                .sum();
            let lambda = r.stability.as_ref().map(|s| s.lambda);
            let bound = lambda.map(|l| l * noise_l1);
            Some(BoundCheck {
                subset: r
                    .subset
                    .iter()
                    .map(|&j| network.link_id(j).to_owned())
                    .collect(),
                recoverability: r.value,
                certified: r.certified_exact_recovery,
                lambda,
                noise_l1,
                bound,
                // small slack for a rounded estimate against an exact bound of zero
                holds: bound.map(|b| l1_error <= b + 1e-6 * (1.0 + b)),
            })
        }
    };
    Ok(ValidationReport {
        l1_error,
        max_abs_error: diff.amax(),
        links,
        bound,
    })
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "l1 error ||f* - f||_1: {}", fmt_value(self.l1_error));
        let _ = writeln!(out, "max abs error: {}", fmt_value(self.max_abs_error));
        let nonzero: Vec<String> = self
            .links
            .iter()
            .filter(|l| l.error != 0.0)
            .map(|l| format!("{} ({})", l.id, fmt_count(l.error)))
            .collect();
        let _ = writeln!(
            out,
            "links with error: {}",
            if nonzero.is_empty() {
                "none".to_owned()
            } else {
                nonzero.join(", ")
            }
        );
        if let Some(b) = &self.bound {
            let _ = writeln!(
                out,
                "subset {}: recoverability {}, certified {}",
                b.subset.join(", "),
                fmt_value(b.recoverability),
                yes_no(b.certified)
            );
            let _ = writeln!(
                out,
                "noise outside subset ||e||_1: {}",
                fmt_value(b.noise_l1)
            );
            match (b.lambda, b.bound, b.holds) {
                (Some(l), Some(bound), Some(h)) => {
                    let _ = writeln!(
                        out,
                        "bound lambda * ||e||_1 = {} * {} = {}: {}",
                        fmt_value(l),
                        fmt_value(b.noise_l1),
                        fmt_value(bound),
                        if h { "holds" } else { "VIOLATED" }
                    );
                }
                _ => {
                    let _ = writeln!(out, "bound: not applicable");
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_formatting() {
        assert_eq!(fmt_count(124236.0), "124236");
        assert_eq!(fmt_count(-2.0), "-2");
        assert_eq!(fmt_count(1.5), "1.500");
    }

    #[test]
    fn percentage_convention() {
        let p = percent_difference(13661.0, 11127.0).unwrap();
        assert_eq!(format!("{p:.1}"), "22.8");
        assert!(percent_difference(1.0, 0.0).is_none());
    }
}
