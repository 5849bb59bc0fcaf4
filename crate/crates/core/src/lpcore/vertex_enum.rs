use super::LpProblem;
use crate::error::{Error, Result};

pub const ORACLE_MAX_VARS: usize = 12;
/// Counts every row plus every finite bound, lower bounds included.
pub const ORACLE_MAX_CONSTRAINTS: usize = 16;

const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleOutcome {
    Optimal(f64),
    /// No basic feasible point exists. With nonnegative variables this is
    /// equivalent to an empty feasible region.
    Infeasible,
}

impl OracleOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            OracleOutcome::Optimal(v) => Some(*v),
            OracleOutcome::Infeasible => None,
        }
    }
}

/// Minimum of the objective over all basic feasible points, found by solving
/// every square subsystem of tight constraints.
///
/// Unboundedness is not detected; callers use it on bounded problems.
pub fn vertex_enum_oracle(lp: &LpProblem) -> Result<OracleOutcome> {
    lp.check_well_formed()?;
    let n = lp.n_vars();

    // Every candidate hyperplane a·x = b together with the full inequality set.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        planes.push((c.coeffs.clone(), c.rhs));
    }
    for (v, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[v] = 1.0;
        planes.push((e.clone(), lo));
        if hi.is_finite() {
            planes.push((e, hi));
        }
    }
    if n > ORACLE_MAX_VARS || planes.len() > ORACLE_MAX_CONSTRAINTS {
        return Err(Error::SizeCap(format!(
            "vertex enumeration limited to {ORACLE_MAX_VARS} variables and \
             {ORACLE_MAX_CONSTRAINTS} constraints, got {n} and {}",
            planes.len()
        )));
    }
    let mut best: Option<f64> = None;
    let mut chosen = Vec::with_capacity(n);
    let mut visit = |subset: &[usize]| {
        if let Some(x) = solve_square(&planes, subset, n) {
            if lp.max_residual(&x) <= FEAS_TOL {
                let v = lp.evaluate(&x);
                if best.is_none_or(|b| v < b) {
                    best = Some(v);
                }
            }
        }
    };
    // Equalities hold at every feasible point, so a vertex is any feasible
    // solution of n independent tight planes; dependent equality rows (a
    // zero row, a duplicate) must not be forced into the system.
    let all: Vec<usize> = (0..planes.len()).collect();
    combinations(&all, n, &mut chosen, 0, &mut visit);
    Ok(match best {
        Some(v) => OracleOutcome::Optimal(v),
        None => OracleOutcome::Infeasible,
    })
}

fn combinations(
    pool: &[usize],
    k: usize,
    chosen: &mut Vec<usize>,
    start: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    for i in start..pool.len() {
        if pool.len() - i < k - chosen.len() {
            break;
        }
        chosen.push(pool[i]);
        combinations(pool, k, chosen, i + 1, visit);
        chosen.pop();
    }
}

/// Gaussian elimination with partial pivoting; `None` for singular systems.
fn solve_square(planes: &[(Vec<f64>, f64)], rows: &[usize], n: usize) -> Option<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| {
            let mut row = planes[r].0.clone();
            row.push(planes[r].1);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        for i in 0..n {
            if i != col {
                let f = a[i][col] / a[col][col];
                if f != 0.0 {
                    for j in col..=n {
                        a[i][j] -= f * a[col][j];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::Relation;

    #[test]
    fn single_vertex() {
        let mut lp = LpProblem::new(1);
        lp.objective = vec![1.0];
        lp.add(vec![1.0], Relation::Ge, 1.0);
        lp.add(vec![1.0], Relation::Le, 1.0);
        assert_eq!(vertex_enum_oracle(&lp).unwrap(), OracleOutcome::Optimal(1.0));
    }

    #[test]
    fn symmetric_facet() {
        let mut lp = LpProblem::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.bounds = vec![(0.0, 1.0); 2];
        lp.add(vec![1.0, 1.0], Relation::Ge, 1.0);
        let v = vertex_enum_oracle(&lp).unwrap().value().unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_region() {
        let mut lp = LpProblem::new(1);
        lp.add(vec![1.0], Relation::Ge, 2.0);
        lp.add(vec![1.0], Relation::Le, 1.0);
        assert_eq!(vertex_enum_oracle(&lp).unwrap(), OracleOutcome::Infeasible);
    }

    #[test]
    fn dependent_equalities() {
        // min -x - 2y, 2x + 3y = 6 stated twice and a zero row; optimum (0, 2).
        let mut lp = LpProblem::new(2);
        lp.objective = vec![-1.0, -2.0];
        lp.bounds = vec![(0.0, 2.0), (0.0, 3.0)];
        lp.add(vec![2.0, 3.0], Relation::Eq, 6.0);
        lp.add(vec![4.0, 6.0], Relation::Eq, 12.0);
        lp.add(vec![0.0, 0.0], Relation::Eq, 0.0);
        let v = vertex_enum_oracle(&lp).unwrap().value().unwrap();
        assert!((v + 4.0).abs() < 1e-12);
    }

    #[test]
    fn size_cap() {
        let lp = LpProblem::new(ORACLE_MAX_VARS + 1);
        assert!(matches!(vertex_enum_oracle(&lp), Err(Error::SizeCap(_))));
    }
}
