use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<R> {
    pub name: String,
    /// Sparse `(column, coefficient)` pairs.
    pub terms: Vec<(usize, R)>,
    pub relation: Relation,
    pub rhs: R,
}

/// `minimize objective . x` subject to the rows and per-column bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<R> {
    pub names: Vec<String>,
    pub objective: Vec<R>,
    /// May be `-inf`.
    pub lower: Vec<R>,
    /// May be `+inf`.
    pub upper: Vec<R>,
    pub rows: Vec<Constraint<R>>,
}

impl<R: Real> LinearProgram<R> {
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Adds a column and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, cost: R, lower: R, upper: R) -> usize {
        self.names.push(name.into());
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, R)>,
        relation: Relation,
        rhs: R,
    ) {
        self.rows.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.terms.len()).sum()
    }

    pub fn objective_value(&self, x: &[R]) -> R {
        self.objective.iter().zip(x).map(|(&c, &v)| c * v).sum()
    }

    /// Largest violation of any row or bound by `x`, with the row or column
    /// name.
    pub fn max_violation(&self, x: &[R]) -> (R, String) {
        let mut worst = (R::zero(), String::new());
        for r in &self.rows {
            let lhs: R = r.terms.iter().map(|&(j, c)| c * x[j]).sum();
            let v = match r.relation {
                Relation::Le => lhs - r.rhs,
                Relation::Ge => r.rhs - lhs,
                Relation::Eq => (lhs - r.rhs).abs(),
            };
            if v > worst.0 {
                worst = (v, r.name.clone());
            }
        }
        for (j, &v) in x.iter().enumerate() {
            let e = (self.lower[j] - v).max(v - self.upper[j]);
            if e > worst.0 {
                worst = (e, self.names[j].clone());
            }
        }
        worst
    }
}

impl<R: Real> Default for LinearProgram<R> {
    fn default() -> Self {
        Self::new()
    }
}

/// Primal solution of a [`LinearProgram`].
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<R> {
    pub values: Vec<R>,
    pub objective: R,
    pub iterations: usize,
}
