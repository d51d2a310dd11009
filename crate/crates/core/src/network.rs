//! Road network description, monitored links, observed counts and the node-link
//! incidence matrix.
//!
//! Only non-centroid nodes are modeled. A link that starts or ends at a centroid
//! (an origin/destination zone outside the model) carries an absent endpoint, so
//! its incidence column has a single nonzero entry.

use std::collections::{HashMap, HashSet};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, ParseError, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub id: String,
    /// Node the link leaves; `None` when it originates at an external centroid.
    pub tail: Option<String>,
    /// Node the link enters; `None` when it terminates at an external centroid.
    pub head: Option<String>,
}

impl Link {
    pub fn new(id: impl Into<String>, tail: Option<&str>, head: Option<&str>) -> Self {
        Link {
            id: id.into(),
            tail: tail.map(str::to_owned),
            head: head.map(str::to_owned),
        }
    }

    /// Number of modeled endpoints (1 for a boundary link, 2 for an internal one).
    pub fn endpoint_count(&self) -> usize {
        usize::from(self.tail.is_some()) + usize::from(self.head.is_some())
    }
}

/// A validated road network. Nodes and links keep their input order, which is the
/// row/column order of every matrix derived from the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    name: Option<String>,
    nodes: Vec<String>,
    links: Vec<Link>,
    node_pos: HashMap<String, usize>,
    link_pos: HashMap<String, usize>,
}

impl Network {
    pub fn new(name: Option<String>, nodes: Vec<String>, links: Vec<Link>) -> Result<Self> {
        let mut node_pos = HashMap::with_capacity(nodes.len());
        for (i, id) in nodes.iter().enumerate() {
            if node_pos.insert(id.clone(), i).is_some() {
                return Err(ParseError::DuplicateId(id.clone()).into());
            }
        }
        let mut link_pos = HashMap::with_capacity(links.len());
        for (j, link) in links.iter().enumerate() {
            if link_pos.insert(link.id.clone(), j).is_some() {
                return Err(ParseError::DuplicateId(link.id.clone()).into());
            }
            for node in link.tail.iter().chain(link.head.iter()) {
                if !node_pos.contains_key(node) {
                    return Err(ParseError::UnknownNode {
                        link: link.id.clone(),
                        node: node.clone(),
                    }
                    .into());
                }
            }
            match (&link.tail, &link.head) {
                (None, None) => {
                    return Err(ParseError::InvalidLink {
                        link: link.id.clone(),
                        reason: "both endpoints are external".into(),
                    }
                    .into())
                }
                (Some(t), Some(h)) if t == h => {
                    return Err(ParseError::InvalidLink {
                        link: link.id.clone(),
                        reason: "self-loop".into(),
                    }
                    .into())
                }
                _ => {}
            }
        }
        let (n, l) = (nodes.len(), links.len());
        if n < 1 || l < 2 || l <= n {
            return Err(Error::DegenerateNetwork { nodes: n, links: l });
        }
        Ok(Network {
            name,
            nodes,
            links,
            node_pos,
            link_pos,
        })
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Dimension of the conservation kernel, `l - n`.
    pub fn kernel_dim(&self) -> usize {
        self.links.len() - self.nodes.len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_pos.get(id).copied()
    }

    pub fn link_index(&self, id: &str) -> Option<usize> {
        self.link_pos.get(id).copied()
    }

    pub fn link_id(&self, index: usize) -> &str {
        &self.links[index].id
    }

    /// Resolves link identifiers to sorted, de-duplicated column indices.
    pub fn link_indices<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let id = id.as_ref();
            let j = self
                .link_index(id)
                .ok_or_else(|| ParseError::UnknownLink(id.to_owned()))?;
            out.push(j);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// The `n x l` node-link incidence matrix: `+1` where a link enters a node, `-1`
/// where it leaves, `0` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    entries: DMatrix<f64>,
    node_ids: Vec<String>,
    link_ids: Vec<String>,
}

impl IncidenceMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn node_count(&self) -> usize {
        self.entries.nrows()
    }

    pub fn link_count(&self) -> usize {
        self.entries.ncols()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn link_ids(&self) -> &[String] {
        &self.link_ids
    }

    /// Columns `cols` of `A`, in the given order.
    pub fn columns(&self, cols: &[usize]) -> DMatrix<f64> {
        self.entries.select_columns(cols)
    }
}

/// Builds the incidence matrix and checks the full-row-rank premise.
pub fn build_incidence(network: &Network) -> Result<IncidenceMatrix> {
    let (n, l) = (network.node_count(), network.link_count());
    if l <= n {
        return Err(Error::DegenerateNetwork { nodes: n, links: l });
    }
    let mut entries = DMatrix::zeros(n, l);
    for (j, link) in network.links().iter().enumerate() {
        if let Some(i) = link.tail.as_deref().and_then(|t| network.node_index(t)) {
            entries[(i, j)] = -1.0;
        }
        if let Some(i) = link.head.as_deref().and_then(|h| network.node_index(h)) {
            entries[(i, j)] = 1.0;
        }
    }
    let rank = linalg::row_rank(&entries, linalg::PIVOT_TOL);
    if rank < n {
        return Err(Error::RankDeficient { nodes: n, rank });
    }
    Ok(IncidenceMatrix {
        entries,
        node_ids: network.nodes().to_vec(),
        link_ids: network.links().iter().map(|l| l.id.clone()).collect(),
    })
}

/// Node imbalances `A f`; all zero exactly when `f` conserves flow.
pub fn conservation_residual(a: &IncidenceMatrix, f: &DVector<f64>) -> Result<DVector<f64>> {
    if f.len() != a.link_count() {
        return Err(Error::DimensionMismatch {
            expected: a.link_count(),
            found: f.len(),
        });
    }
    Ok(a.entries() * f)
}

/// The links equipped with sensors, as ascending column indices.
///
/// Whether the set contains a base set is checked when a correction or
/// certification needs one, since that check requires the incidence matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitoredSet {
    links: Vec<usize>,
}

impl MonitoredSet {
    pub fn new(network: &Network, mut links: Vec<usize>) -> Result<Self> {
        links.sort_unstable();
        let before = links.len();
        links.dedup();
        if links.len() != before {
            return Err(Error::InvalidConfig("monitored set has duplicates".into()));
        }
        if let Some(&bad) = links.iter().find(|&&j| j >= network.link_count()) {
            return Err(Error::DimensionMismatch {
                expected: network.link_count(),
                found: bad + 1,
            });
        }
        Ok(MonitoredSet { links })
    }

    pub fn from_ids<S: AsRef<str>>(network: &Network, ids: &[S]) -> Result<Self> {
        let mut seen = HashSet::new();
        for id in ids {
            if !seen.insert(id.as_ref()) {
                return Err(ParseError::DuplicateId(id.as_ref().to_owned()).into());
            }
        }
        Self::new(network, network.link_indices(ids)?)
    }

    /// Every link of the network.
    pub fn all(network: &Network) -> Self {
        MonitoredSet {
            links: (0..network.link_count()).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn contains(&self, link: usize) -> bool {
        self.links.binary_search(&link).is_ok()
    }

    /// Position of `link` within the monitored ordering.
    pub fn position(&self, link: usize) -> Option<usize> {
        self.links.binary_search(&link).ok()
    }
}

/// Observed counts on the monitored links, aligned with [`MonitoredSet::indices`].
///
/// Values only need to be finite here; the file format additionally rejects
/// negative counts.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowObservation {
    values: DVector<f64>,
}

impl FlowObservation {
    pub fn new(monitored: &MonitoredSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != monitored.len() {
            return Err(Error::DimensionMismatch {
                expected: monitored.len(),
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(
                ParseError::NonFiniteCount(format!("#{}", monitored.indices()[pos])).into(),
            );
        }
        Ok(FlowObservation {
            values: DVector::from_vec(values),
        })
    }

    /// Restriction of a full flow vector to the monitored links.
    pub fn from_full(monitored: &MonitoredSet, f: &DVector<f64>) -> Result<Self> {
        let values = monitored.indices().iter().map(|&j| f[j]).collect();
        Self::new(monitored, values)
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn all_integers(&self) -> bool {
        self.values.iter().all(|v| v.fract() == 0.0)
    }
}

/// A network together with its monitored set and one observation of it.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub network: Network,
    pub monitored: MonitoredSet,
    pub observation: FlowObservation,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    pub(crate) fn toy() -> Network {
        Network::new(
            Some("toy".into()),
            ids(&["1", "2", "3"]),
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

    #[test]
    fn toy_incidence_matches_printed_matrix() {
        let a = build_incidence(&toy()).unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            6,
            &[
                1., 1., -1., -1., 0., 0., //
                0., 0., 1., 0., -1., 0., //
                0., 0., 0., 1., 1., -1.,
            ],
        );
        assert_eq!(a.entries(), &expected);
    }

    #[test]
    fn single_node_pass_through() {
        let net = Network::new(
            None,
            ids(&["x"]),
            vec![
                Link::new("a", None, Some("x")),
                Link::new("b", Some("x"), None),
            ],
        )
        .unwrap();
        let a = build_incidence(&net).unwrap();
        assert_eq!(a.entries(), &DMatrix::from_row_slice(1, 2, &[1., -1.]));
    }

    #[test]
    fn ground_truth_conserves() {
        let a = build_incidence(&toy()).unwrap();
        let f = DVector::from_vec(vec![300., 200., 300., 200., 300., 500.]);
        assert_eq!(conservation_residual(&a, &f).unwrap(), DVector::zeros(3));
        let zero = DVector::zeros(6);
        assert_eq!(conservation_residual(&a, &zero).unwrap(), DVector::zeros(3));
    }

    #[test]
    fn corrupted_link_six_shows_at_node_three() {
        let a = build_incidence(&toy()).unwrap();
        let f = DVector::from_vec(vec![300., 200., 300., 200., 300., 600.]);
        let r = conservation_residual(&a, &f).unwrap();
        assert_eq!(r, DVector::from_vec(vec![0., 0., -100.]));
    }

    #[test]
    fn residual_dimension_checked() {
        let a = build_incidence(&toy()).unwrap();
        let err = conservation_residual(&a, &DVector::zeros(5)).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 6,
                found: 5
            }
        ));
    }

    #[test]
    fn rejects_malformed_links() {
        let both_external = Network::new(
            None,
            ids(&["1"]),
            vec![
                Link::new("a", None, None),
                Link::new("b", Some("1"), None),
                Link::new("c", None, Some("1")),
            ],
        );
        assert!(matches!(
            both_external,
            Err(Error::Parse(ParseError::InvalidLink { .. }))
        ));

        let self_loop = Network::new(
            None,
            ids(&["1"]),
            vec![
                Link::new("a", Some("1"), Some("1")),
                Link::new("b", None, Some("1")),
            ],
        );
        assert!(matches!(
            self_loop,
            Err(Error::Parse(ParseError::InvalidLink { .. }))
        ));

        let unknown = Network::new(
            None,
            ids(&["1"]),
            vec![
                Link::new("a", Some("9"), None),
                Link::new("b", None, Some("1")),
            ],
        );
        assert!(matches!(
            unknown,
            Err(Error::Parse(ParseError::UnknownNode { .. }))
        ));

        let dup = Network::new(
            None,
            ids(&["1", "1"]),
            vec![
                Link::new("a", Some("1"), None),
                Link::new("b", None, Some("1")),
            ],
        );
        assert!(matches!(dup, Err(Error::Parse(ParseError::DuplicateId(_)))));
    }

    #[test]
    fn degenerate_sizes_rejected() {
        let net = Network::new(
            None,
            ids(&["1", "2"]),
            vec![
                Link::new("a", None, Some("1")),
                Link::new("b", Some("1"), Some("2")),
            ],
        );
        assert!(matches!(
            net,
            Err(Error::DegenerateNetwork { nodes: 2, links: 2 })
        ));
    }

    #[test]
    fn isolated_component_is_rank_deficient() {
        // nodes 3 and 4 exchange flow only with each other
        let net = Network::new(
            None,
            ids(&["1", "2", "3", "4"]),
            vec![
                Link::new("a", None, Some("1")),
                Link::new("b", Some("1"), Some("2")),
                Link::new("c", Some("2"), None),
                Link::new("d", Some("3"), Some("4")),
                Link::new("e", Some("4"), Some("3")),
            ],
        )
        .unwrap();
        assert!(matches!(
            build_incidence(&net),
            Err(Error::RankDeficient { nodes: 4, rank: 3 })
        ));
    }

    #[test]
    fn monitored_set_resolution() {
        let net = toy();
        let m = MonitoredSet::from_ids(&net, &["6", "1", "2", "4", "5"]).unwrap();
        assert_eq!(m.indices(), &[0, 1, 3, 4, 5]);
        assert_eq!(m.position(5), Some(4));
        assert!(!m.contains(2));
        assert!(MonitoredSet::from_ids(&net, &["1", "1"]).is_err());
        assert!(MonitoredSet::from_ids(&net, &["7"]).is_err());
    }
}
