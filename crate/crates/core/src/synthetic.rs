//! Seeded random networks, conservation-consistent flows and corrupted
//! observations for experiments and tests.

use nalgebra::DVector;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{GroundTruth, Scenario};
use crate::kernel;
use crate::network::{self, FlowObservation, Link, MonitoredSet, Network};

/// Attempts at drawing a monitored set that contains a base set.
const MONITOR_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub node_count: usize,
    pub link_count: usize,
    pub monitored_fraction: f64,
    pub corrupt_count: usize,
    /// Inclusive range of corruption magnitudes, in vehicles.
    pub corruption_magnitude_range: (f64, f64),
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            node_count: 9,
            link_count: 18,
            monitored_fraction: 15.0 / 18.0,
            corrupt_count: 2,
            corruption_magnitude_range: (5_000.0, 20_000.0),
            noise_sigma: 20.0,
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.node_count == 0 {
            return bad("node count must be positive");
        }
        if self.link_count < self.node_count + 1 {
            return bad("need at least one more link than nodes");
        }
        if !(self.monitored_fraction > 0.0 && self.monitored_fraction <= 1.0) {
            return bad("monitored fraction must lie in (0, 1]");
        }
        let (lo, hi) = self.corruption_magnitude_range;
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return bad("corruption range must satisfy 0 <= min <= max");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise sigma must be nonnegative");
        }
        Ok(())
    }

    pub fn monitored_count(&self) -> usize {
        ((self.monitored_fraction * self.link_count as f64).round() as usize)
            .clamp(1, self.link_count)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub scenario: Scenario,
    pub truth: GroundTruth,
}

/// Random connected network with nodes `1..=n` and links `1..=l`.
///
/// A backbone `ext -> 1 -> 2 -> ... -> n -> ext` keeps every node connected to
/// the outside, which guarantees full row rank; the remaining links are random
/// internal links or extra on- and off-ramps. Requires `l >= n + 1`.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, n: usize, l: usize) -> Result<Network> {
    if n == 0 || l < n + 1 {
        return Err(Error::DegenerateNetwork { nodes: n, links: l });
    }
    let node = |i: usize| (i + 1).to_string();
    let mut ends: Vec<(Option<String>, Option<String>)> = Vec::with_capacity(l);
    ends.push((None, Some(node(0))));
    for i in 0..n - 1 {
        ends.push((Some(node(i)), Some(node(i + 1))));
    }
    ends.push((Some(node(n - 1)), None));
    while ends.len() < l {
        let kind = if n >= 2 {
            rng.random_range(0..4)
        } else {
            rng.random_range(2..4)
        };
        let a = rng.random_range(0..n);
        let e = match kind {
            0 | 1 => {
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                (Some(node(a)), Some(node(b)))
            }
            2 => (None, Some(node(a))),
            _ => (Some(node(a)), None),
        };
        ends.push(e);
    }
    // interleave the backbone with the extras so link ids carry no structure
    ends.shuffle(rng);
    let links = ends
        .into_iter()
        .enumerate()
        .map(|(j, (t, h))| Link::new((j + 1).to_string(), t.as_deref(), h.as_deref()))
        .collect();
    Network::new(None, (0..n).map(node).collect(), links)
}

/// Backbone position of every node, assuming nodes were created by [`random_network`].
fn backbone(network: &Network) -> Option<Vec<usize>> {
    // links along the backbone go i -> i + 1 with external ends at 1 and n
    let n = network.node_count();
    let mut chain = vec![None; n + 1];
    for (j, link) in network.links().iter().enumerate() {
        let t = link.tail.as_ref().and_then(|t| network.node_index(t));
        let h = link.head.as_ref().and_then(|h| network.node_index(h));
        match (t, h) {
            (None, Some(0)) if chain[0].is_none() => chain[0] = Some(j),
            (Some(a), Some(b)) if b == a + 1 && chain[b].is_none() => chain[b] = Some(j),
            (Some(a), None) if a == n - 1 && chain[n].is_none() => chain[n] = Some(j),
            _ => {}
        }
    }
    chain.into_iter().collect()
}

/// Positive integer flows satisfying conservation: every link carries at least
/// one walk `ext -> ... -> ext` along the backbone, weighted by a random integer
/// in `weights`.
pub fn random_flows<R: Rng + ?Sized>(
    rng: &mut R,
    network: &Network,
    weights: std::ops::RangeInclusive<u32>,
) -> Result<DVector<f64>> {
    let chain = backbone(network)
        .ok_or_else(|| Error::InvalidConfig("network lacks the generator's backbone".into()))?;
    let n = network.node_count();
    let mut f = DVector::zeros(network.link_count());
    for (j, link) in network.links().iter().enumerate() {
        let w = f64::from(rng.random_range(weights.clone()));
        f[j] += w;
        // ext -> 1 -> ... -> tail
        if let Some(t) = link.tail.as_ref().and_then(|t| network.node_index(t)) {
            for &c in &chain[..=t] {
                f[c] += w;
            }
        }
        // head -> ... -> n -> ext
        if let Some(h) = link.head.as_ref().and_then(|h| network.node_index(h)) {
            for &c in &chain[h + 1..=n] {
                f[c] += w;
            }
        }
    }
    Ok(f)
}

/// Draws `count` monitored links that contain a base set.
pub fn random_monitored<R: Rng + ?Sized>(
    rng: &mut R,
    network: &Network,
    count: usize,
) -> Result<MonitoredSet> {
    let a = network::build_incidence(network)?;
    let all: Vec<usize> = (0..network.link_count()).collect();
    for _ in 0..MONITOR_ATTEMPTS {
        let mut pick: Vec<usize> = all.choose_multiple(rng, count).copied().collect();
        pick.sort_unstable();
        if kernel::find_base_set(&a, &pick).is_ok() {
            return MonitoredSet::new(network, pick);
        }
    }
    Err(Error::InfeasibleSpec(format!(
        "no monitored set of {count} links containing a base set found in {MONITOR_ATTEMPTS} draws"
    )))
}

/// Builds a network, ground truth and a corrupted observation from `spec`.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let network = random_network(&mut rng, spec.node_count, spec.link_count)?;
    let truth = random_flows(&mut rng, &network, 100..=5_000)?;
    let monitored = random_monitored(&mut rng, &network, spec.monitored_count())?;
    if spec.corrupt_count > monitored.len() {
        return Err(Error::InfeasibleSpec(format!(
            "{} corrupted links requested but only {} are monitored",
            spec.corrupt_count,
            monitored.len()
        )));
    }
    let mut corrupted: Vec<usize> = monitored
        .indices()
        .choose_multiple(&mut rng, spec.corrupt_count)
        .copied()
        .collect();
    corrupted.sort_unstable();

    let (lo, hi) = spec.corruption_magnitude_range;
    let noise =
        Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let values = monitored
        .indices()
        .iter()
        .map(|&j| {
            let t = truth[j];
            let v = if corrupted.contains(&j) {
                let mag = if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                }
                .round();
                // counts cannot go negative, so an undercount that large becomes an overcount
                if rng.random_bool(0.5) && t - mag >= 0.0 {
                    t - mag
                } else {
                    t + mag
                }
            } else if spec.noise_sigma > 0.0 {
                (t + noise.sample(&mut rng)).round()
            } else {
                t
            };
            v.max(0.0)
        })
        .collect();
    let observation = FlowObservation::new(&monitored, values)?;
    Ok(SyntheticInstance {
        scenario: Scenario {
            network,
            monitored,
            observation: Some(observation),
        },
        truth: GroundTruth {
            flows: truth,
            corrupted,
        },
    })
}
