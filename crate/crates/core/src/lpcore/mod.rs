//! Linear programs in row form, a dense two-phase simplex solver, and a
//! brute-force vertex enumerator used to cross-check it on tiny problems.

mod simplex;
mod vertex_enum;

pub use simplex::{simplex_solve, SimplexOptions};
pub use vertex_enum::{vertex_enum_oracle, OracleOutcome, ORACLE_MAX_CONSTRAINTS, ORACLE_MAX_VARS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize objective · x` subject to the rows and per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// `[lo, hi]` per variable; `lo >= 0`, `hi` may be `f64::INFINITY`.
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub assignment: Vec<f64>,
    /// Structural variables that are basic at the returned vertex.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

impl LpProblem {
    /// Problem over `n` variables with zero objective and default bounds `[0, ∞)`.
    pub fn new(n: usize) -> Self {
        LpProblem {
            objective: vec![0.0; n],
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Adds a row from `(variable, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.n_vars()];
        for &(v, c) in terms {
            coeffs[v] += c;
        }
        self.add(coeffs, relation, rhs);
    }

    pub fn check_well_formed(&self) -> Result<()> {
        let n = self.n_vars();
        if self.bounds.len() != n {
            return Err(Error::InvalidParams(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (k, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::InvalidParams(format!(
                    "row {k} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParams(format!("row {k} is not finite")));
            }
        }
        for (v, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && lo >= 0.0) || hi.is_nan() || hi < lo {
                return Err(Error::InvalidParams(format!(
                    "variable {v} has bounds [{lo}, {hi}]"
                )));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams("objective is not finite".into()));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound by `x`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let r = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(r);
        }
        for (v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }
}
