//! Bundled example networks: the three-node toy network with its two observation
//! sets, the parallel highway and the I-405 segment.

use crate::error::{Error, Result};
use crate::format::{self, GroundTruth, Scenario};

/// A bundled network document and, when known, its ground-truth sidecar.
#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub document: &'static str,
    pub truth: Option<&'static str>,
}

const TOY_TRUTH: &str = include_str!("../fixtures/toy.truth.json");

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "toy-example1",
        document: include_str!("../fixtures/toy-example1.json"),
        truth: Some(TOY_TRUTH),
    },
    Fixture {
        name: "toy-example2",
        document: include_str!("../fixtures/toy-example2.json"),
        truth: Some(TOY_TRUTH),
    },
    Fixture {
        name: "parallel-highway",
        document: include_str!("../fixtures/parallel-highway.json"),
        truth: Some(include_str!("../fixtures/parallel-highway.truth.json")),
    },
    Fixture {
        name: "i405",
        document: include_str!("../fixtures/i405.json"),
        truth: None,
    },
];

const ALIASES: &[(&str, &str)] = &[("toy", "toy-example1"), ("parallel", "parallel-highway")];

/// Looks a fixture up by name or alias; a leading `fixtures/` and a trailing
/// `.json` are ignored.
pub fn fixture(name: &str) -> Option<&'static Fixture> {
    let name = name.strip_prefix("fixtures/").unwrap_or(name);
    let name = name.strip_suffix(".json").unwrap_or(name);
    let name = ALIASES
        .iter()
        .find(|(alias, _)| *alias == name)
        .map_or(name, |(_, target)| target);
    FIXTURES.iter().find(|f| f.name == name)
}

impl Fixture {
    pub fn scenario(&self) -> Result<Scenario> {
        format::parse_network(self.document)
    }

    pub fn ground_truth(&self) -> Result<GroundTruth> {
        let text = self.truth.ok_or_else(|| {
            Error::MissingGroundTruth(format!("no ground truth bundled with {}", self.name))
        })?;
        format::parse_truth(text, &self.scenario()?.network)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_incidence, conservation_residual};

    #[test]
    fn every_fixture_parses() {
        for f in FIXTURES {
            let s = f.scenario().unwrap();
            assert!(s.observation.is_some(), "{}", f.name);
            build_incidence(&s.network).unwrap();
        }
    }

    #[test]
    fn aliases_resolve() {
        assert_eq!(fixture("toy").unwrap().name, "toy-example1");
        assert_eq!(
            fixture("fixtures/parallel").unwrap().name,
            "parallel-highway"
        );
        assert_eq!(fixture("i405.json").unwrap().name, "i405");
        assert!(fixture("nope").is_none());
    }

    #[test]
    fn ground_truths_conserve_flow() {
        for f in FIXTURES.iter().filter(|f| f.truth.is_some()) {
            let s = f.scenario().unwrap();
            let a = build_incidence(&s.network).unwrap();
            let t = f.ground_truth().unwrap();
            assert_eq!(
                conservation_residual(&a, &t.flows).unwrap().amax(),
                0.0,
                "{}",
                f.name
            );
        }
    }

    #[test]
    fn parallel_highway_layout() {
        let s = fixture("parallel").unwrap().scenario().unwrap();
        assert_eq!((s.network.node_count(), s.network.link_count()), (9, 18));
        let unmonitored: Vec<&str> = (0..18)
            .filter(|&j| !s.monitored.contains(j))
            .map(|j| s.network.link_id(j))
            .collect();
        assert_eq!(unmonitored, ["3", "10", "14"]);
        let t = fixture("parallel").unwrap().ground_truth().unwrap();
        assert_eq!(t.corrupted, vec![5, 15]);
    }
}
