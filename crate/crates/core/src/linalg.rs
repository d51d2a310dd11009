//! Dense linear-algebra primitives: rank by elimination, square solves, induced
//! 1-norms.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Pivot threshold for rank and invertibility decisions on incidence columns.
/// Entries are in {-1, 0, 1}, so genuine pivots sit far above it.
pub const PIVOT_TOL: f64 = 1e-9;

/// Pivot threshold below which [`solve_square`] reports a singular matrix.
pub const SOLVE_PIVOT_TOL: f64 = 1e-12;

/// Rank by row reduction with partial pivoting.
pub fn row_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let mut work = m.clone();
    let (rows, cols) = work.shape();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let (pivot_row, pivot) =
            (rank..rows)
                .map(|r| (r, work[(r, c)].abs()))
                .fold(
                    (rank, 0.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot <= tol {
            continue;
        }
        work.swap_rows(rank, pivot_row);
        for r in rank + 1..rows {
            let factor = work[(r, c)] / work[(rank, c)];
            if factor != 0.0 {
                for k in c..cols {
                    work[(r, k)] -= factor * work[(rank, k)];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Incrementally grown set of linearly independent vectors, kept in reduced
/// echelon form so that membership tests are a single elimination pass.
#[derive(Debug, Clone)]
pub struct IndependentSet {
    dim: usize,
    tol: f64,
    basis: Vec<(usize, Vec<f64>)>,
}

impl IndependentSet {
    pub fn new(dim: usize, tol: f64) -> Self {
        IndependentSet {
            dim,
            tol,
            basis: Vec::with_capacity(dim),
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.dim
    }

    /// Adds `v` if it is independent of the vectors already held; returns whether
    /// it was added.
    pub fn try_insert(&mut self, v: &[f64]) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        let mut r = v.to_vec();
        for (p, b) in &self.basis {
            let coef = r[*p];
            if coef != 0.0 {
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= coef * bi;
                }
            }
        }
        let (pivot, mag) =
            r.iter()
                .enumerate()
                .map(|(i, x)| (i, x.abs()))
                .fold(
                    (0, 0.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if mag <= self.tol {
            return false;
        }
        let scale = r[pivot];
        r.iter_mut().for_each(|x| *x /= scale);
        // keep earlier vectors clear of the new pivot so reductions stay one-pass
        for (_, b) in &mut self.basis {
            let coef = b[pivot];
            if coef != 0.0 {
                for (bi, ri) in b.iter_mut().zip(&r) {
                    *bi -= coef * ri;
                }
            }
        }
        self.basis.push((pivot, r));
        true
    }
}

/// Solution of a square system together with its residual `max|A X - B|`.
#[derive(Debug, Clone)]
pub struct SquareSolve {
    pub x: DMatrix<f64>,
    pub residual: f64,
}

/// Solves `a X = b` by LU with partial pivoting.
pub fn solve_square(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<SquareSolve> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if b.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let lu = a.clone().lu();
    let min_pivot = lu
        .u()
        .diagonal()
        .iter()
        .map(|d| d.abs())
        .fold(f64::INFINITY, f64::min);
    if min_pivot.is_nan() || min_pivot <= SOLVE_PIVOT_TOL {
        return Err(Error::Singular { pivot: min_pivot });
    }
    let x = lu.solve(b).ok_or(Error::Singular { pivot: min_pivot })?;
    let residual = (a * &x - b).amax();
    Ok(SquareSolve { x, residual })
}

/// Operator norm induced by the l1 vector norm: the largest absolute column sum.
pub fn operator_one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
