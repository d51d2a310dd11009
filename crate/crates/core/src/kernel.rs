//! Base sets and the conservation-kernel basis built from them.
//!
//! A base set `K` is a set of `l - n` links whose complement columns `A^{K^c}`
//! are invertible. Given `K`, the matrix
//!
//! ```text
//!     Z = [ I ; -(A^{K^c})^{-1} A^K ]      (rows permuted back to link order)
//! ```
//!
//! spans `Ker(A)`, and flows on `K` determine the flows on every other link.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, IndependentSet, PIVOT_TOL};
use crate::network::IncidenceMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseSet {
    links: Vec<usize>,
    complement: Vec<usize>,
}

impl BaseSet {
    /// Validates `links` as a base set of `a`.
    pub fn new(a: &IncidenceMatrix, mut links: Vec<usize>) -> Result<Self> {
        let (n, l) = (a.node_count(), a.link_count());
        links.sort_unstable();
        links.dedup();
        if links.len() != l - n || links.iter().any(|&j| j >= l) {
            return Err(Error::NoBaseSet);
        }
        let complement = complement_of(&links, l);
        if !columns_independent(a, &complement) {
            return Err(Error::NoBaseSet);
        }
        Ok(BaseSet { links, complement })
    }

    /// `K`, ascending.
    pub fn links(&self) -> &[usize] {
        &self.links
    }

    /// `K^c`, ascending.
    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn is_subset_of(&self, candidates: &[usize]) -> bool {
        self.links.iter().all(|j| candidates.contains(j))
    }
}

fn complement_of(sorted: &[usize], l: usize) -> Vec<usize> {
    (0..l)
        .filter(|j| sorted.binary_search(j).is_err())
        .collect()
}

fn columns_independent(a: &IncidenceMatrix, cols: &[usize]) -> bool {
    let mut set = IndependentSet::new(a.node_count(), PIVOT_TOL);
    cols.iter()
        .all(|&j| set.try_insert(a.entries().column(j).as_slice()))
}

/// Greedy base-set search: columns are offered to an elimination in the order
/// non-candidates first, then candidates, each group in descending file order.
/// The accepted columns form `K^c`, so `K` falls inside `candidates` whenever
/// any base set does.
pub fn find_base_set(a: &IncidenceMatrix, candidates: &[usize]) -> Result<BaseSet> {
    let l = a.link_count();
    let mut is_candidate = vec![false; l];
    for &j in candidates {
        if j >= l {
            return Err(Error::DimensionMismatch {
                expected: l,
                found: j + 1,
            });
        }
        is_candidate[j] = true;
    }
    let order = (0..l)
        .rev()
        .filter(|&j| !is_candidate[j])
        .chain((0..l).rev().filter(|&j| is_candidate[j]));

    let mut set = IndependentSet::new(a.node_count(), PIVOT_TOL);
    let mut chosen = Vec::with_capacity(a.node_count());
    for j in order {
        if set.is_full() {
            if is_candidate[j] {
                break;
            }
            return Err(Error::NoBaseSet);
        }
        if set.try_insert(a.entries().column(j).as_slice()) {
            chosen.push(j);
        } else if !is_candidate[j] {
            // an unmonitored column that cannot sit in K^c forces K outside the candidates
            return Err(Error::NoBaseSet);
        }
    }
    if !set.is_full() {
        return Err(Error::NoBaseSet);
    }
    chosen.sort_unstable();
    let links = complement_of(&chosen, l);
    Ok(BaseSet {
        links,
        complement: chosen,
    })
}

/// Result of a (possibly truncated) base-set enumeration.
#[derive(Debug, Clone)]
pub struct BaseSetEnumeration {
    pub sets: Vec<BaseSet>,
    /// Number of `(l - n)`-subsets tested.
    pub examined: usize,
    /// True when the enumeration stopped at the limit before exhausting subsets.
    pub truncated: bool,
}

/// All base sets contained in `candidates`, in lexicographic order of `K`,
/// stopping after `limit` have been found.
pub fn enumerate_base_sets(
    a: &IncidenceMatrix,
    candidates: &[usize],
    limit: usize,
) -> Result<BaseSetEnumeration> {
    if limit == 0 {
        return Err(Error::InvalidConfig(
            "base-set limit must be at least 1".into(),
        ));
    }
    let l = a.link_count();
    let k = l - a.node_count();
    let mut pool = candidates.to_vec();
    pool.sort_unstable();
    pool.dedup();
    if let Some(&bad) = pool.iter().find(|&&j| j >= l) {
        return Err(Error::DimensionMismatch {
            expected: l,
            found: bad + 1,
        });
    }

    let mut sets = Vec::new();
    let mut examined = 0;
    let mut truncated = false;
    if pool.len() >= k {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            if sets.len() == limit {
                truncated = true;
                break;
            }
            examined += 1;
            let links: Vec<usize> = combo.iter().map(|&i| pool[i]).collect();
            let complement = complement_of(&links, l);
            if columns_independent(a, &complement) {
                sets.push(BaseSet { links, complement });
            }
            if !next_combination(&mut combo, pool.len()) {
                break;
            }
        }
    }
    if sets.is_empty() {
        return Err(Error::NoBaseSet);
    }
    Ok(BaseSetEnumeration {
        sets,
        examined,
        truncated,
    })
}

/// Advances `combo` (strictly increasing indices below `n`) to its lexicographic
/// successor.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The `l x (l - n)` kernel basis of a base set.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    z: DMatrix<f64>,
    base_set: BaseSet,
}

impl KernelBasis {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn base_set(&self) -> &BaseSet {
        &self.base_set
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    /// Rows of `Z` for the given links, in the given order.
    pub fn rows(&self, links: &[usize]) -> DMatrix<f64> {
        self.z.select_rows(links)
    }

    /// Full flow vector `Z x`.
    pub fn flow(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.z * x
    }
}

/// `-(A^{K^c})^{-1} A^K`, the map from flows on `K` to flows on `K^c`.
pub fn complement_map(a: &IncidenceMatrix, base_set: &BaseSet) -> Result<DMatrix<f64>> {
    let a_k = a.columns(base_set.links());
    let a_kc = a.columns(base_set.complement());
    let solved = linalg::solve_square(&a_kc, &a_k).map_err(|e| match e {
        Error::Singular { pivot } => Error::SingularComplement { pivot },
        other => other,
    })?;
    Ok(-solved.x)
}

pub fn kernel_basis(a: &IncidenceMatrix, base_set: &BaseSet) -> Result<KernelBasis> {
    let l = a.link_count();
    let k = base_set.links().len();
    if k + a.node_count() != l {
        return Err(Error::DimensionMismatch {
            expected: l - a.node_count(),
            found: k,
        });
    }
    let lower = complement_map(a, base_set)?;
    let mut z = DMatrix::zeros(l, k);
    for (c, &j) in base_set.links().iter().enumerate() {
        z[(j, c)] = 1.0;
    }
    for (r, &j) in base_set.complement().iter().enumerate() {
        z.row_mut(j).copy_from(&lower.row(r));
    }
    Ok(KernelBasis {
        z,
        base_set: base_set.clone(),
    })
}
