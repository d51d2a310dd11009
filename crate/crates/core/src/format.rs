//! JSON documents for networks with observations and for ground-truth sidecars.
//!
//! A network document lists nodes, links (with `null` for an external
//! endpoint), the monitored links and the observed counts:
//!
//! ```json
//! {
//!   "format": "linkflow-network",
//!   "version": 1,
//!   "name": "toy",
//!   "nodes": ["1", "2", "3"],
//!   "links": [{"id": "1", "tail": null, "head": "1"}, ...],
//!   "monitored": ["1", "2", "4", "5", "6"],
//!   "observed": {"1": 300, "2": 200, "4": 200, "5": 300, "6": 600}
//! }
//! ```
//!
//! Unmonitored links are simply left out of `monitored`. `observed` may be
//! omitted for topology-only documents.

use std::fmt;

use nalgebra::DVector;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, ParseError, Result};
use crate::network::{FlowObservation, Instance, Link, MonitoredSet, Network};

pub const NETWORK_FORMAT: &str = "linkflow-network";
pub const TRUTH_FORMAT: &str = "linkflow-ground-truth";
pub const VERSION: u32 = 1;

/// Link counts keyed by link id, kept in document order.
///
/// Duplicate keys are rejected, and integral values are written without a
/// fractional part.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Counts(pub Vec<(String, f64)>);

impl Serialize for Counts {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (id, v) in &self.0 {
            if v.fract() == 0.0 && v.abs() < 9.0e15 {
                map.serialize_entry(id, &(*v as i64))?;
            } else {
                map.serialize_entry(id, v)?;
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Counts {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct CountsVisitor;

        impl<'de> Visitor<'de> for CountsVisitor {
            type Value = Counts;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping link ids to counts")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<Counts, A::Error> {
                let mut out: Vec<(String, f64)> = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, f64>()? {
                    if out.iter().any(|(seen, _)| *seen == k) {
                        return Err(serde::de::Error::custom(format!(
                            "duplicate identifier {k}"
                        )));
                    }
                    out.push((k, v));
                }
                Ok(Counts(out))
            }
        }

        d.deserialize_map(CountsVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub id: String,
    #[serde(default)]
    pub tail: Option<String>,
    #[serde(default)]
    pub head: Option<String>,
}

/// Raw network document, before any semantic validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub format: String,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nodes: Vec<String>,
    pub links: Vec<LinkRecord>,
    pub monitored: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<Counts>,
}

/// Validated contents of a network document.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: Network,
    pub monitored: MonitoredSet,
    pub observation: Option<FlowObservation>,
}

impl Scenario {
    /// The scenario as a correction instance; fails when the document had no observations.
    pub fn into_instance(self) -> Result<Instance> {
        let observation = match self.observation {
            Some(o) => o,
            None => {
                let first = self
                    .monitored
                    .indices()
                    .first()
                    .map_or_else(String::new, |&j| self.network.link_id(j).to_owned());
                return Err(ParseError::MissingObservation(first).into());
            }
        };
        Ok(Instance {
            network: self.network,
            monitored: self.monitored,
            observation,
        })
    }
}

fn syntax(e: serde_json::Error) -> ParseError {
    ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn check_header(format: &str, version: u32, expected: &str) -> Result<(), ParseError> {
    if format != expected {
        return Err(ParseError::UnsupportedFormat(format!(
            "format {format:?}, expected {expected:?}"
        )));
    }
    if version != VERSION {
        return Err(ParseError::UnsupportedFormat(format!(
            "version {version}, expected {VERSION}"
        )));
    }
    Ok(())
}

impl NetworkDocument {
    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let doc: NetworkDocument = serde_json::from_str(text).map_err(syntax)?;
        check_header(&doc.format, doc.version, NETWORK_FORMAT)?;
        Ok(doc)
    }

    /// Canonical document for the given model: monitored links and observations
    /// follow link order.
    pub fn from_model(
        network: &Network,
        monitored: &MonitoredSet,
        observation: Option<&FlowObservation>,
    ) -> Self {
        let ids: Vec<String> = monitored
            .indices()
            .iter()
            .map(|&j| network.link_id(j).to_owned())
            .collect();
        let observed = observation.map(|o| {
            Counts(
                ids.iter()
                    .cloned()
                    .zip(o.values().iter().copied())
                    .collect(),
            )
        });
        NetworkDocument {
            format: NETWORK_FORMAT.into(),
            version: VERSION,
            name: network.name().map(str::to_owned),
            nodes: network.nodes().to_vec(),
            links: network
                .links()
                .iter()
                .map(|l| LinkRecord {
                    id: l.id.clone(),
                    tail: l.tail.clone(),
                    head: l.head.clone(),
                })
                .collect(),
            monitored: ids,
            observed,
        }
    }

    /// Checks every invariant and builds the domain objects.
    pub fn to_model(&self) -> Result<Scenario> {
        let links = self
            .links
            .iter()
            .map(|r| Link::new(r.id.clone(), r.tail.as_deref(), r.head.as_deref()))
            .collect();
        let network = Network::new(self.name.clone(), self.nodes.clone(), links)?;
        let monitored = MonitoredSet::from_ids(&network, &self.monitored)?;
        let observation = match &self.observed {
            None => None,
            Some(counts) => Some(observation_from(&network, &monitored, counts)?),
        };
        Ok(Scenario {
            network,
            monitored,
            observation,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }
}

fn observation_from(
    network: &Network,
    monitored: &MonitoredSet,
    counts: &Counts,
) -> Result<FlowObservation> {
    let mut values: Vec<Option<f64>> = vec![None; monitored.len()];
    for (id, v) in &counts.0 {
        let j = network
            .link_index(id)
            .ok_or_else(|| ParseError::UnknownLink(id.clone()))?;
        let pos = monitored
            .position(j)
            .ok_or_else(|| ParseError::UnmonitoredObservation(id.clone()))?;
        if !v.is_finite() {
            return Err(ParseError::NonFiniteCount(id.clone()).into());
        }
        if *v < 0.0 {
            return Err(ParseError::NegativeCount {
                link: id.clone(),
                value: *v,
            }
            .into());
        }
        values[pos] = Some(*v);
    }
    let values = values
        .into_iter()
        .zip(monitored.indices())
        .map(|(v, &j)| {
            v.ok_or_else(|| ParseError::MissingObservation(network.link_id(j).to_owned()))
        })
        .collect::<Result<Vec<f64>, ParseError>>()?;
    FlowObservation::new(monitored, values)
}

/// Parses and validates a network document.
pub fn parse_network(text: &str) -> Result<Scenario> {
    NetworkDocument::from_json(text)?.to_model()
}

/// Canonical text for a network with optional observations.
pub fn serialize_network(
    network: &Network,
    monitored: &MonitoredSet,
    observation: Option<&FlowObservation>,
) -> String {
    NetworkDocument::from_model(network, monitored, observation).to_json()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthDocument {
    pub format: String,
    pub version: u32,
    pub flows: Counts,
    /// Links whose observations were deliberately corrupted, if known.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub corrupted: Vec<String>,
}

/// Ground-truth flows on every link, aligned with a network's link order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub flows: DVector<f64>,
    pub corrupted: Vec<usize>,
}

impl GroundTruth {
    pub fn to_document(&self, network: &Network) -> TruthDocument {
        TruthDocument {
            format: TRUTH_FORMAT.into(),
            version: VERSION,
            flows: Counts(
                network
                    .links()
                    .iter()
                    .map(|l| l.id.clone())
                    .zip(self.flows.iter().copied())
                    .collect(),
            ),
            corrupted: self
                .corrupted
                .iter()
                .map(|&j| network.link_id(j).to_owned())
                .collect(),
        }
    }

    pub fn to_json(&self, network: &Network) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_document(network))
            .expect("documents always serialize");
        s.push('\n');
        s
    }
}

/// Parses a ground-truth sidecar against `network`; every link needs a flow.
pub fn parse_truth(text: &str, network: &Network) -> Result<GroundTruth> {
    let doc: TruthDocument = serde_json::from_str(text).map_err(syntax)?;
    check_header(&doc.format, doc.version, TRUTH_FORMAT)?;
    let mut flows: Vec<Option<f64>> = vec![None; network.link_count()];
    for (id, v) in &doc.flows.0 {
        let j = network
            .link_index(id)
            .ok_or_else(|| ParseError::UnknownLink(id.clone()))?;
        if !v.is_finite() {
            return Err(ParseError::NonFiniteCount(id.clone()).into());
        }
        flows[j] = Some(*v);
    }
    let flows = flows
        .into_iter()
        .enumerate()
        .map(|(j, v)| v.ok_or_else(|| Error::MissingGroundTruth(network.link_id(j).to_owned())))
        .collect::<Result<Vec<f64>>>()?;
    let mut corrupted = network.link_indices(&doc.corrupted)?;
    corrupted.sort_unstable();
    Ok(GroundTruth {
        flows: DVector::from_vec(flows),
        corrupted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"{
      "format": "linkflow-network", "version": 1, "name": "toy",
      "nodes": ["1", "2", "3"],
      "links": [
        {"id": "1", "tail": null, "head": "1"},
        {"id": "2", "head": "1"},
        {"id": "3", "tail": "1", "head": "2"},
        {"id": "4", "tail": "1", "head": "3"},
        {"id": "5", "tail": "2", "head": "3"},
        {"id": "6", "tail": "3", "head": null}
      ],
      "monitored": ["6", "1", "2", "4", "5"],
      "observed": {"6": 600, "1": 300, "2": 200, "4": 200, "5": 300}
    }"#;

    fn edit(from: &str, to: &str) -> String {
        assert!(TOY.contains(from), "{from}");
        TOY.replacen(from, to, 1)
    }

    fn parse_err(text: &str) -> ParseError {
        match parse_network(text) {
            Err(Error::Parse(p)) => p,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn toy_parses_in_link_order() {
        let s = parse_network(TOY).unwrap();
        assert_eq!(s.network.link_count(), 6);
        assert_eq!(s.monitored.indices(), &[0, 1, 3, 4, 5]);
        let obs = s.observation.unwrap();
        assert_eq!(obs.values().as_slice(), &[300., 200., 200., 300., 600.]);
    }

    #[test]
    fn canonical_round_trip() {
        let s = parse_network(TOY).unwrap();
        let text = serialize_network(&s.network, &s.monitored, s.observation.as_ref());
        let again = parse_network(&text).unwrap();
        assert_eq!(again, s);
        assert_eq!(
            serialize_network(&again.network, &again.monitored, again.observation.as_ref()),
            text
        );
        assert!(text.contains("\"1\": 300,"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_err("{\n  \"format\": ,\n}") {
            ParseError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_err(&edit("\"name\"", "\"nmae\"")),
            ParseError::Syntax { .. }
        ));
    }

    #[test]
    fn header_is_checked() {
        assert!(matches!(
            parse_err(&edit("\"version\": 1", "\"version\": 2")),
            ParseError::UnsupportedFormat(_)
        ));
        assert!(matches!(
            parse_err(&edit("linkflow-network", "other")),
            ParseError::UnsupportedFormat(_)
        ));
    }

    #[test]
    fn semantic_rejections() {
        assert!(matches!(
            parse_err(&edit(
                "\"tail\": \"2\", \"head\": \"3\"",
                "\"tail\": \"2\", \"head\": \"9\""
            )),
            ParseError::UnknownNode { .. }
        ));
        assert!(matches!(
            parse_err(&edit("{\"id\": \"2\", \"head\": \"1\"}", "{\"id\": \"2\"}")),
            ParseError::InvalidLink { .. }
        ));
        assert!(matches!(
            parse_err(&edit("\"id\": \"5\"", "\"id\": \"4\"")),
            ParseError::DuplicateId(_)
        ));
        assert!(matches!(
            parse_err(&edit("\"1\": 300", "\"1\": -3")),
            ParseError::NegativeCount { .. }
        ));
        assert!(matches!(
            parse_err(&edit("\"1\": 300", "\"1\": 300, \"3\": 1")),
            ParseError::UnmonitoredObservation(_)
        ));
        assert!(matches!(
            parse_err(&edit("\"1\": 300", "\"1\": 300, \"1\": 2")),
            ParseError::Syntax { .. }
        ));
        assert!(matches!(
            parse_err(&edit("\"1\": 300, ", "")),
            ParseError::MissingObservation(_)
        ));
        assert!(matches!(
            parse_err(&edit("\"1\": 300", "\"9\": 300")),
            ParseError::UnknownLink(_)
        ));
        assert!(matches!(
            parse_err(&edit("[\"6\", \"1\"", "[\"6\", \"6\", \"1\"")),
            ParseError::DuplicateId(_)
        ));
    }

    #[test]
    fn topology_only_documents() {
        let text = TOY
            .split(",\n      \"observed\"")
            .next()
            .unwrap()
            .to_owned()
            + "}";
        let s = parse_network(&text).unwrap();
        assert!(s.observation.is_none());
        assert!(matches!(
            s.into_instance(),
            Err(Error::Parse(ParseError::MissingObservation(_)))
        ));
    }

    #[test]
    fn truth_sidecar() {
        let s = parse_network(TOY).unwrap();
        let truth = GroundTruth {
            flows: DVector::from_vec(vec![300., 200., 300., 200., 300., 500.]),
            corrupted: vec![5],
        };
        let text = truth.to_json(&s.network);
        assert_eq!(parse_truth(&text, &s.network).unwrap(), truth);
        let partial = text.replace("\"6\": 500", "\"7\": 500");
        assert!(matches!(
            parse_truth(&partial, &s.network),
            Err(Error::Parse(ParseError::UnknownLink(_)))
        ));
        let missing = text.replace(",\n    \"6\": 500", "");
        assert!(matches!(
            parse_truth(&missing, &s.network),
            Err(Error::MissingGroundTruth(_))
        ));
    }
}
