use super::{LpProblem, LpSolution, LpStatus, Relation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Primal feasibility tolerance.
    pub feas_tol: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub opt_tol: f64,
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feas_tol: 1e-7,
            pivot_tol: 1e-9,
            opt_tol: 1e-9,
            max_pivots: 1_000_000,
        }
    }
}

/// Entries below this magnitude are flushed to zero after elimination.
const FLUSH: f64 = 1e-13;
/// Consecutive degenerate pivots before pricing falls back to Bland's rule.
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    reduced: Vec<f64>,
    pivots: usize,
    opts: SimplexOptions,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn n_cols(&self) -> usize {
        self.kinds.len()
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64)> = None;
        for (j, &d) in self.reduced.iter().enumerate() {
            if self.kinds[j] == ColKind::Artificial || d >= -tol {
                continue;
            }
            if bland {
                return Some(j);
            }
            match best {
                Some((_, bd)) if d >= bd => {}
                _ => best = Some((j, d)),
            }
        }
        best.map(|(j, _)| j)
    }

    /// Minimum-ratio row for entering column `s`.
    fn leaving(&self, s: usize, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let a = row[s];
            if a <= self.opts.pivot_tol {
                continue;
            }
            let ratio = self.rhs[i].max(0.0) / a;
            let better = match best {
                None => true,
                Some((bi, br, ba)) => {
                    let slack = 1e-12 * (1.0 + br.abs());
                    if ratio < br - slack {
                        true
                    } else if ratio <= br + slack {
                        if bland {
                            self.basis[i] < self.basis[bi]
                        } else {
                            a > ba || (a == ba && self.basis[i] < self.basis[bi])
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((i, ratio, a));
            }
        }
        best.map(|(i, r, _)| (i, r))
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let mut prow = std::mem::take(&mut self.rows[r]);
        let inv = 1.0 / prow[s];
        let mut nz = Vec::new();
        for (j, v) in prow.iter_mut().enumerate() {
            if *v != 0.0 {
                *v *= inv;
                if v.abs() < FLUSH {
                    *v = 0.0;
                } else {
                    nz.push(j);
                }
            }
        }
        prow[s] = 1.0;
        self.rhs[r] *= inv;
        let prhs = self.rhs[r];

        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[s];
            if f == 0.0 {
                continue;
            }
            for &j in &nz {
                let v = row[j] - f * prow[j];
                row[j] = if v.abs() < FLUSH { 0.0 } else { v };
            }
            row[s] = 0.0;
            let b = self.rhs[i] - f * prhs;
            self.rhs[i] = if b < 0.0 && b > -self.opts.feas_tol { 0.0 } else { b };
        }
        let f = self.reduced[s];
        if f != 0.0 {
            for &j in &nz {
                self.reduced[j] -= f * prow[j];
            }
            self.reduced[s] = 0.0;
        }
        self.rows[r] = prow;
        self.basis[r] = s;
        self.pivots += 1;
    }

    fn run(&mut self) -> Result<PhaseEnd> {
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run >= DEGENERATE_RUN;
            if self.pivots >= self.opts.max_pivots {
                return Err(Error::NumericalFailure(format!(
                    "simplex exceeded {} pivots",
                    self.opts.max_pivots
                )));
            }
            let Some(s) = self.entering(bland) else {
                return Ok(PhaseEnd::Optimal);
            };
            let Some((r, ratio)) = self.leaving(s, bland) else {
                return Ok(PhaseEnd::Unbounded);
            };
            // A cycle consists of degenerate pivots only, so Bland's rule after a
            // long enough run of them guarantees termination.
            degenerate_run = if ratio <= 1e-12 { degenerate_run + 1 } else { 0 };
            self.pivot(r, s);
        }
    }

    fn set_costs(&mut self, costs: &[f64]) {
        self.reduced = costs.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for (d, a) in self.reduced.iter_mut().zip(row) {
                *d -= cb * a;
            }
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
    }

    /// Pivots zero-level artificials out of the basis; drops redundant rows.
    fn expel_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.kinds[self.basis[i]] != ColKind::Artificial {
                i += 1;
                continue;
            }
            let col = (0..self.n_cols()).find(|&j| {
                self.kinds[j] != ColKind::Artificial && self.rows[i][j].abs() > self.opts.pivot_tol
            });
            match col {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.rhs.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}

/// Two-phase dense tableau simplex.
///
/// Pricing is largest-coefficient; a long run of degenerate pivots switches
/// to Bland's rule until the objective moves again, which guarantees
/// termination.
pub fn simplex_solve(lp: &LpProblem, opts: SimplexOptions) -> Result<LpSolution> {
    lp.check_well_formed()?;
    let n = lp.n_vars();

    // Shift by lower bounds and turn finite upper bounds into rows.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &lp.constraints {
        let shift: f64 = c.coeffs.iter().zip(&lp.bounds).map(|(a, (lo, _))| a * lo).sum();
        rows.push((c.coeffs.clone(), c.relation, c.rhs - shift));
    }
    for (v, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if hi.is_finite() {
            let mut coeffs = vec![0.0; n];
            coeffs[v] = 1.0;
            rows.push((coeffs, Relation::Le, hi - lo));
        }
    }
    for (coeffs, rel, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            coeffs.iter_mut().for_each(|a| *a = -*a);
            *rhs = -*rhs;
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let mut kinds = vec![ColKind::Structural; n];
    let mut extra: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows.len()];
    let mut basis = vec![0; rows.len()];
    for (i, (_, rel, _)) in rows.iter().enumerate() {
        match rel {
            Relation::Le => {
                basis[i] = kinds.len();
                extra[i].push((kinds.len(), 1.0));
                kinds.push(ColKind::Slack);
            }
            Relation::Ge => {
                extra[i].push((kinds.len(), -1.0));
                kinds.push(ColKind::Slack);
                basis[i] = kinds.len();
                extra[i].push((kinds.len(), 1.0));
                kinds.push(ColKind::Artificial);
            }
            Relation::Eq => {
                basis[i] = kinds.len();
                extra[i].push((kinds.len(), 1.0));
                kinds.push(ColKind::Artificial);
            }
        }
    }
    let width = kinds.len();
    let mut tab_rows = Vec::with_capacity(rows.len());
    let mut rhs = Vec::with_capacity(rows.len());
    for (i, (coeffs, _, b)) in rows.into_iter().enumerate() {
        let mut row = coeffs;
        row.resize(width, 0.0);
        for &(j, v) in &extra[i] {
            row[j] = v;
        }
        tab_rows.push(row);
        rhs.push(b);
    }

    let mut tab = Tableau {
        rows: tab_rows,
        rhs,
        basis,
        kinds,
        reduced: Vec::new(),
        pivots: 0,
        opts,
    };

    if tab.kinds.contains(&ColKind::Artificial) {
        let phase1: Vec<f64> = tab
            .kinds
            .iter()
            .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        tab.set_costs(&phase1);
        // Artificial columns may not re-enter, but phase 1 prices them at zero anyway.
        tab.run()?;
        let infeas: f64 = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(b, _)| tab.kinds[**b] == ColKind::Artificial)
            .map(|(_, v)| v.max(0.0))
            .sum();
        if infeas > opts.feas_tol {
            return Ok(infeasible(n, tab.pivots));
        }
        tab.expel_artificials();
    }

    let mut costs = lp.objective.clone();
    costs.resize(tab.n_cols(), 0.0);
    tab.set_costs(&costs);
    if let PhaseEnd::Unbounded = tab.run()? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: f64::NEG_INFINITY,
            assignment: Vec::new(),
            basis: Vec::new(),
            pivots: tab.pivots,
        });
    }

    let mut x: Vec<f64> = lp.bounds.iter().map(|(lo, _)| *lo).collect();
    let mut basic = Vec::new();
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] += tab.rhs[i].max(0.0);
            basic.push(b);
        }
    }
    for (v, &(lo, hi)) in x.iter_mut().zip(&lp.bounds) {
        *v = v.clamp(lo, hi);
    }
    basic.sort_unstable();

    let residual = lp.max_residual(&x);
    if residual > opts.feas_tol {
        return Err(Error::NumericalFailure(format!(
            "optimal basis violates constraints by {residual:e}"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: lp.evaluate(&x),
        assignment: x,
        basis: basic,
        pivots: tab.pivots,
    })
}

fn infeasible(_n: usize, pivots: usize) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        value: f64::INFINITY,
        assignment: Vec::new(),
        basis: Vec::new(),
        pivots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(lp: &LpProblem) -> LpSolution {
        simplex_solve(lp, SimplexOptions::default()).unwrap()
    }

    #[test]
    fn forced_variable() {
        // min y  s.t. y >= 1, 0 <= y <= 1
        let mut lp = LpProblem::new(1);
        lp.objective = vec![1.0];
        lp.bounds = vec![(0.0, 1.0)];
        lp.add(vec![1.0], Relation::Ge, 1.0);
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        // min y1 + y2  s.t. y1 >= 2, y1 <= 1
        let mut lp = LpProblem::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.add(vec![1.0, 0.0], Relation::Ge, 2.0);
        lp.add(vec![1.0, 0.0], Relation::Le, 1.0);
        assert_eq!(solve(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction_is_detected() {
        let mut lp = LpProblem::new(2);
        lp.objective = vec![-1.0, 0.0];
        lp.add(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(solve(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn lower_bounds_and_equalities() {
        // min x + 2y  s.t. x + y = 3, x in [1, 2], y >= 0.5
        let mut lp = LpProblem::new(2);
        lp.objective = vec![1.0, 2.0];
        lp.bounds = vec![(1.0, 2.0), (0.5, f64::INFINITY)];
        lp.add(vec![1.0, 1.0], Relation::Eq, 3.0);
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 4.0).abs() < 1e-9, "{sol:?}");
        assert!((sol.assignment[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LpProblem::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.add(vec![1.0, 1.0], Relation::Eq, 2.0);
        lp.add(vec![2.0, 2.0], Relation::Eq, 4.0);
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let mut lp = LpProblem::new(4);
        lp.objective = vec![-0.75, 150.0, -0.02, 6.0];
        lp.add(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let sol = solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value + 0.05).abs() < 1e-9, "{sol:?}");
    }

    #[test]
    fn pivot_cap_is_an_error() {
        let mut lp = LpProblem::new(2);
        lp.objective = vec![-1.0, -1.0];
        lp.add(vec![1.0, 2.0], Relation::Le, 4.0);
        lp.add(vec![3.0, 1.0], Relation::Le, 6.0);
        let opts = SimplexOptions {
            max_pivots: 1,
            ..SimplexOptions::default()
        };
        assert!(matches!(simplex_solve(&lp, opts), Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn identical_input_gives_identical_output() {
        let mut lp = LpProblem::new(3);
        lp.objective = vec![1.0, 1.0, 1.0];
        lp.add(vec![1.0, 1.0, 0.0], Relation::Ge, 1.0);
        lp.add(vec![0.0, 1.0, 1.0], Relation::Ge, 1.0);
        lp.add(vec![1.0, 0.0, 1.0], Relation::Ge, 1.0);
        let a = solve(&lp);
        let b = solve(&lp);
        assert_eq!(a, b);
        assert!((a.value - 1.5).abs() < 1e-9);
    }
}
