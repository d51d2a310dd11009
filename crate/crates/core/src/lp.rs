//! Linear programs behind the exact oracles, solved with the `microlp` simplex.

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const FREE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);
const NONNEG: (f64, f64) = (0.0, f64::INFINITY);

/// Builds `t_i >= |(M y)_i - rhs_i|` rows for the split-variable l1 model.
fn add_abs_rows(
    problem: &mut Problem,
    m: &DMatrix<f64>,
    rhs: &DVector<f64>,
    y: &[Variable],
    t: &[Variable],
) {
    for i in 0..m.nrows() {
        let mut upper: Vec<(Variable, f64)> = Vec::with_capacity(y.len() + 1);
        let mut lower: Vec<(Variable, f64)> = Vec::with_capacity(y.len() + 1);
        for (c, &var) in y.iter().enumerate() {
            let a = m[(i, c)];
            if a != 0.0 {
                upper.push((var, a));
                lower.push((var, a));
            }
        }
        upper.push((t[i], -1.0));
        lower.push((t[i], 1.0));
        problem.add_constraint(upper.as_slice(), ComparisonOp::Le, rhs[i]);
        problem.add_constraint(lower.as_slice(), ComparisonOp::Ge, rhs[i]);
    }
}

fn lp_err(e: microlp::Error) -> Error {
    Error::Lp(e.to_string())
}

/// `argmin_x ||Z x - f||_1`.
pub(crate) fn l1_fit(z: &DMatrix<f64>, f: &DVector<f64>) -> Result<DVector<f64>> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let x: Vec<Variable> = (0..z.ncols()).map(|_| p.add_var(0.0, FREE)).collect();
    let t: Vec<Variable> = (0..z.nrows()).map(|_| p.add_var(1.0, NONNEG)).collect();
    add_abs_rows(&mut p, z, f, &x, &t);
    let sol = p
        .solve()
        .map_err(lp_err)?
        .into_solution()
        .map_err(|_| Error::Lp("solve interrupted".into()))?;
    Ok(DVector::from_iterator(
        x.len(),
        x.iter().map(|&v| sol.var_value_raw(v)),
    ))
}

/// Range of coordinate `coord` over `{x : ||Z x - f||_1 <= budget}`.
pub(crate) fn l1_coordinate_range(
    z: &DMatrix<f64>,
    f: &DVector<f64>,
    budget: f64,
    coord: usize,
) -> Result<(f64, f64)> {
    let mut ends = [0.0; 2];
    for (slot, dir) in [
        OptimizationDirection::Minimize,
        OptimizationDirection::Maximize,
    ]
    .into_iter()
    .enumerate()
    {
        let mut p = Problem::new(dir);
        let x: Vec<Variable> = (0..z.ncols())
            .map(|c| p.add_var(if c == coord { 1.0 } else { 0.0 }, FREE))
            .collect();
        let t: Vec<Variable> = (0..z.nrows()).map(|_| p.add_var(0.0, NONNEG)).collect();
        add_abs_rows(&mut p, z, f, &x, &t);
        let total: Vec<(Variable, f64)> = t.iter().map(|&v| (v, 1.0)).collect();
        p.add_constraint(total.as_slice(), ComparisonOp::Le, budget);
        let sol = p
            .solve()
            .map_err(lp_err)?
            .into_solution()
            .map_err(|_| Error::Lp("solve interrupted".into()))?;
        ends[slot] = sol.var_value_raw(x[coord]);
    }
    Ok((ends[0], ends[1]))
}

/// Minimum of `||R v||_1` subject to `s_i (S v)_i >= 0` and `sum_i s_i (S v)_i = 1`,
/// or `None` when that sign pattern is infeasible. Returns the value and `v`.
pub(crate) fn signed_quotient(
    rest: &DMatrix<f64>,
    subset: &DMatrix<f64>,
    signs: &[f64],
) -> Result<Option<(f64, DVector<f64>)>> {
    let k = rest.ncols();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let v: Vec<Variable> = (0..k).map(|_| p.add_var(0.0, FREE)).collect();
    let t: Vec<Variable> = (0..rest.nrows()).map(|_| p.add_var(1.0, NONNEG)).collect();
    add_abs_rows(&mut p, rest, &DVector::zeros(rest.nrows()), &v, &t);
    let mut normalizer = vec![0.0; k];
    for (i, &s) in signs.iter().enumerate() {
        let row: Vec<(Variable, f64)> = (0..k)
            .filter(|&c| subset[(i, c)] != 0.0)
            .map(|c| (v[c], s * subset[(i, c)]))
            .collect();
        for c in 0..k {
            normalizer[c] += s * subset[(i, c)];
        }
        if !row.is_empty() {
            p.add_constraint(row.as_slice(), ComparisonOp::Ge, 0.0);
        }
    }
    let norm_row: Vec<(Variable, f64)> = (0..k)
        .filter(|&c| normalizer[c] != 0.0)
        .map(|c| (v[c], normalizer[c]))
        .collect();
    if norm_row.is_empty() {
        return Ok(None);
    }
    p.add_constraint(norm_row.as_slice(), ComparisonOp::Eq, 1.0);
    match p.solve() {
        Ok(outcome) => {
            let sol = outcome
                .into_solution()
                .map_err(|_| Error::Lp("solve interrupted".into()))?;
            let dir = DVector::from_iterator(k, v.iter().map(|&var| sol.var_value_raw(var)));
            let value = (rest * &dir).lp_norm(1);
            Ok(Some((value, dir)))
        }
        Err(microlp::Error::Infeasible) => Ok(None),
        Err(e) => Err(lp_err(e)),
    }
}
