//! Dense two-phase tableau simplex.

#![allow(clippy::needless_range_loop)]

use crate::error::LpError;
use crate::lp::program::{LinearProgram, LpSolution, Relation};
use crate::lp::{Formulation, LpBackend};
use crate::scalar::Real;

type ShiftedRow<R> = (Vec<(usize, R)>, Relation, R, String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Lowest-index entering and leaving variable; never cycles.
    Bland,
    /// Most negative reduced cost; faster but may stall on degenerate
    /// vertices.
    Dantzig,
}

#[derive(Debug, Clone, Copy)]
pub struct DenseSimplex {
    pub rule: PivotRule,
    pub max_pivots: usize,
    pub pivot_tol: f64,
    pub feas_tol: f64,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self {
            rule: PivotRule::Bland,
            max_pivots: 1_000_000,
            pivot_tol: 1e-11,
            feas_tol: 1e-9,
        }
    }
}

impl<R: Real> LpBackend<R> for DenseSimplex {
    fn name(&self) -> &str {
        "dense-simplex"
    }

    fn formulation(&self) -> Formulation {
        Formulation::Dense
    }

    fn solve(&self, lp: &LinearProgram<R>) -> Result<LpSolution<R>, LpError> {
        self.run(lp)
    }
}

/// How an original column maps onto nonnegative tableau columns.
#[derive(Debug, Clone, Copy)]
enum ColMap<R> {
    /// `x = lower + y`
    Shifted(usize, R),
    /// `x = upper - y`
    Mirrored(usize, R),
    /// `x = y+ - y-`
    Split(usize, usize),
}

struct Tableau<R> {
    rows: usize,
    cols: usize,
    /// `rows x (cols + 1)`, last column is the right-hand side.
    data: Vec<R>,
    basis: Vec<usize>,
}

impl<R: Real> Tableau<R> {
    fn at(&self, i: usize, j: usize) -> R {
        self.data[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> R {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [R]) {
        let w = self.cols + 1;
        let p = self.data[r * w + c];
        for j in 0..w {
            self.data[r * w + j] /= p;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [R]| {
            let f = row[c];
            if f != R::zero() {
                for (x, &y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[c] = R::zero();
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        eliminate(obj);
        self.basis[r] = c;
    }
}

impl DenseSimplex {
    pub fn with_rule(rule: PivotRule) -> Self {
        Self {
            rule,
            ..Self::default()
        }
    }

    fn run<R: Real>(&self, lp: &LinearProgram<R>) -> Result<LpSolution<R>, LpError> {
        let n0 = lp.num_vars();
        // column mapping onto y >= 0
        let mut maps = Vec::with_capacity(n0);
        let mut ncol = 0usize;
        let mut extra_rows: Vec<(usize, R, String)> = Vec::new();
        for j in 0..n0 {
            let (lo, hi) = (lp.lower[j], lp.upper[j]);
            if lo.is_finite() {
                maps.push(ColMap::Shifted(ncol, lo));
                if hi.is_finite() {
                    extra_rows.push((ncol, hi - lo, format!("{}_upper", lp.names[j])));
                }
                ncol += 1;
            } else if hi.is_finite() {
                maps.push(ColMap::Mirrored(ncol, hi));
                ncol += 1;
            } else {
                maps.push(ColMap::Split(ncol, ncol + 1));
                ncol += 2;
            }
        }
        // rows in terms of y: sparse terms, relation, rhs, name
        let mut rows: Vec<ShiftedRow<R>> = Vec::new();
        for r in &lp.rows {
            let mut terms = Vec::with_capacity(r.terms.len() + 1);
            let mut rhs = r.rhs;
            for &(j, c) in &r.terms {
                match maps[j] {
                    ColMap::Shifted(y, lo) => {
                        terms.push((y, c));
                        rhs -= c * lo;
                    }
                    ColMap::Mirrored(y, hi) => {
                        terms.push((y, -c));
                        rhs -= c * hi;
                    }
                    ColMap::Split(p, q) => {
                        terms.push((p, c));
                        terms.push((q, -c));
                    }
                }
            }
            rows.push((terms, r.relation, rhs, r.name.clone()));
        }
        for (y, cap, name) in extra_rows {
            rows.push((vec![(y, R::one())], Relation::Le, cap, name));
        }
        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let slack0 = ncol;
        let art0 = ncol + n_slack;
        let total_cols = art0 + m;
        let w = total_cols + 1;
        let mut t = Tableau {
            rows: m,
            cols: total_cols,
            data: vec![R::zero(); m * w],
            basis: vec![0; m],
        };
        let mut has_art = vec![false; m];
        let mut s = slack0;
        for (i, (terms, rel, rhs, _)) in rows.iter().enumerate() {
            let row = &mut t.data[i * w..(i + 1) * w];
            let scale = terms
                .iter()
                .map(|&(_, c)| c.abs())
                .fold(R::zero(), R::max)
                .max(R::lit(1e-300));
            let scale = if scale > R::zero() { scale } else { R::one() };
            for &(j, c) in terms {
                row[j] += c / scale;
            }
            row[total_cols] = *rhs / scale;
            let slack_col = match rel {
                Relation::Le => {
                    row[s] = R::one();
                    s += 1;
                    Some(s - 1)
                }
                Relation::Ge => {
                    row[s] = -R::one();
                    s += 1;
                    Some(s - 1)
                }
                Relation::Eq => None,
            };
            if row[total_cols] < R::zero() {
                row.iter_mut().for_each(|v| *v = -*v);
            }
            match slack_col {
                Some(c) if row[c] > R::zero() => t.basis[i] = c,
                _ => {
                    row[art0 + i] = R::one();
                    t.basis[i] = art0 + i;
                    has_art[i] = true;
                }
            }
        }

        let mut pivots = 0usize;
        // phase 1: minimize the sum of artificials
        let mut obj = vec![R::zero(); w];
        for i in 0..m {
            if has_art[i] {
                for j in 0..w {
                    obj[j] -= t.data[i * w + j];
                }
                obj[art0 + i] = R::zero();
            }
        }
        self.iterate(&mut t, &mut obj, total_cols, &mut pivots)?;
        let infeas = -obj[total_cols];
        if infeas > R::lit(self.feas_tol) {
            let names = (0..m)
                .filter(|&i| t.basis[i] >= art0 && t.rhs(i) > R::lit(self.feas_tol))
                .map(|i| rows[t.basis[i] - art0].3.clone())
                .collect();
            return Err(LpError::Infeasible { rows: names });
        }
        // drive remaining artificials out of the basis
        let mut dead = vec![false; m];
        for i in 0..m {
            if t.basis[i] >= art0 {
                let c = (0..art0).find(|&j| t.at(i, j).abs() > R::lit(1e-9));
                match c {
                    Some(c) => {
                        t.pivot(i, c, &mut obj);
                        pivots += 1;
                    }
                    None => dead[i] = true,
                }
            }
        }
        // phase 2 on the structural and slack columns only
        let mut obj = vec![R::zero(); w];
        for (j, map) in maps.iter().enumerate() {
            let c = lp.objective[j];
            match *map {
                ColMap::Shifted(y, _) => obj[y] += c,
                ColMap::Mirrored(y, _) => obj[y] -= c,
                ColMap::Split(p, q) => {
                    obj[p] += c;
                    obj[q] -= c;
                }
            }
        }
        for i in 0..m {
            let b = t.basis[i];
            if !dead[i] && obj[b] != R::zero() {
                let f = obj[b];
                for j in 0..w {
                    obj[j] -= f * t.data[i * w + j];
                }
            }
        }
        // block artificial columns from re-entering
        for i in 0..m {
            if !dead[i] {
                for j in art0..total_cols {
                    t.data[i * w + j] = R::zero();
                }
            }
        }
        self.iterate(&mut t, &mut obj, art0, &mut pivots)?;

        let mut y = vec![R::zero(); total_cols];
        for i in 0..m {
            if !dead[i] {
                y[t.basis[i]] = t.rhs(i);
            }
        }
        let values: Vec<R> = maps
            .iter()
            .map(|map| match *map {
                ColMap::Shifted(c, lo) => lo + y[c],
                ColMap::Mirrored(c, hi) => hi - y[c],
                ColMap::Split(p, q) => y[p] - y[q],
            })
            .collect();
        Ok(LpSolution {
            objective: lp.objective_value(&values),
            values,
            iterations: pivots,
        })
    }

    /// Pivots until no column below `limit` has a negative reduced cost.
    fn iterate<R: Real>(
        &self,
        t: &mut Tableau<R>,
        obj: &mut [R],
        limit: usize,
        pivots: &mut usize,
    ) -> Result<(), LpError> {
        let tol = R::lit(self.pivot_tol);
        loop {
            let entering = match self.rule {
                PivotRule::Bland => (0..limit).find(|&j| obj[j] < -tol),
                PivotRule::Dantzig => (0..limit)
                    .filter(|&j| obj[j] < -tol)
                    .min_by(|&i, &j| obj[i].partial_cmp(&obj[j]).expect("finite costs")),
            };
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, R)> = None;
            for i in 0..t.rows {
                let v = t.at(i, c);
                if v > tol {
                    let ratio = t.rhs(i) / v;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best || (ratio == best && t.basis[i] < t.basis[r]) {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            t.pivot(r, c, obj);
            *pivots += 1;
            if *pivots >= self.max_pivots {
                return Err(LpError::IterationLimit(*pivots));
            }
        }
    }
}
