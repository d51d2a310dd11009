//! Correction of traffic link counts by l1 minimization over the flow
//! conservation kernel, and recoverability certificates for link subsets.
//!
//! ```
//! use linkflow::{correct_flows, fixtures, CorrectionConfig};
//!
//! let s = fixtures::fixture("toy").unwrap().scenario().unwrap();
//! let obs = s.observation.as_ref().unwrap();
//! let r = correct_flows(&s.network, &s.monitored, obs, &CorrectionConfig::default()).unwrap();
//! assert_eq!(r.estimate().as_slice(), &[300., 200., 300., 200., 300., 500.]);
//! ```

pub mod correction;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod kernel;
pub mod linalg;
mod lp;
pub mod network;
pub mod recoverability;
pub mod report;
pub mod synthetic;

pub use correction::{correct_flows, AdmmConfig, CorrectionConfig, CorrectionResult, L1Solver};
pub use error::{Error, ParseError, Result};
pub use kernel::{find_base_set, kernel_basis, BaseSet, KernelBasis};
pub use network::{
    build_incidence, FlowObservation, IncidenceMatrix, Instance, Link, MonitoredSet, Network,
};
pub use recoverability::{certify, CertifyConfig, RecoverabilityMethod, RecoverabilityReport};
