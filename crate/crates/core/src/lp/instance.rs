use serde::{Deserialize, Serialize};

use crate::badinterval::{bad_interval, BadInterval};
use crate::error::ConfigError;
use crate::lp::program::{LinearProgram, Relation};
use crate::model::{build_grid, ceil_index, ProblemConfig, StopTime, TimeGrid};
use crate::scalar::Real;

/// One constraint family member of the optimization over `(0, L_b] + {inf}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    /// Ratio row at grid index `k` with `k tau <= 1`.
    CrSmall(usize),
    /// Ratio row at grid index `k` with `k tau >= 1`.
    CrLarge(usize),
    /// Ratio row at infinity.
    CrInfinity,
    /// Mass of grid indices `lo..=hi` (plus infinity) at most delta; `at` is
    /// the stop-time index, `None` for infinity.
    Mass {
        at: Option<usize>,
        lo: usize,
        hi: usize,
        infinity: bool,
    },
    /// All mass sums to 1.
    Total,
}

/// Which algebraic form to materialize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    /// Coefficients as displayed: each ratio row touches every variable.
    Dense,
    /// Adds running-sum columns so every row is short.
    Lifted,
}

/// Structured LP instance. Columns are `f_1 .. f_K`, `f_inf`, `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInstance<R> {
    pub config: ProblemConfig<R>,
    pub grid: TimeGrid<R>,
    pub rows: Vec<RowKind>,
}

impl<R: Real> LpInstance<R> {
    /// Number of time variables `K`.
    pub fn count(&self) -> usize {
        self.grid.count
    }

    pub fn inf_col(&self) -> usize {
        self.count()
    }

    pub fn lambda_col(&self) -> usize {
        self.count() + 1
    }

    /// `K + 2` structural variables.
    pub fn num_vars(&self) -> usize {
        self.count() + 2
    }

    pub fn row_name(&self, row: &RowKind) -> String {
        match *row {
            RowKind::CrSmall(k) => format!("cr_lo_{k:04}"),
            RowKind::CrLarge(k) => format!("cr_hi_{k:04}"),
            RowKind::CrInfinity => "cr_inf".into(),
            RowKind::Mass { at: Some(k), .. } => format!("mass_{k:04}"),
            RowKind::Mass { at: None, .. } => "mass_inf".into(),
            RowKind::Total => "total".into(),
        }
    }

    pub fn var_name(&self, j: usize) -> String {
        if j < self.count() {
            format!("f_{:04}", j + 1)
        } else if j == self.inf_col() {
            "f_inf".into()
        } else {
            "lambda".into()
        }
    }

    pub fn materialize(&self, form: Formulation) -> LinearProgram<R> {
        match form {
            Formulation::Dense => self.dense(),
            Formulation::Lifted => self.lifted(),
        }
    }

    fn base_columns(&self) -> LinearProgram<R> {
        let mut lp = LinearProgram::new();
        for j in 0..=self.count() {
            lp.add_var(self.var_name(j), R::zero(), R::zero(), R::infinity());
        }
        lp.add_var("lambda", R::one(), R::neg_infinity(), R::infinity());
        lp
    }

    fn dense(&self) -> LinearProgram<R> {
        let cfg = &self.config;
        let (a, one, tau) = (cfg.a, R::one(), cfg.tau);
        let n = self.count();
        let (fi, lam) = (self.inf_col(), self.lambda_col());
        let mut lp = self.base_columns();
        for row in &self.rows {
            let name = self.row_name(row);
            match *row {
                RowKind::CrSmall(k) | RowKind::CrLarge(k) => {
                    let x = R::of_usize(k) * tau;
                    let (den, tail) = match row {
                        RowKind::CrSmall(_) => (x, one),
                        _ => {
                            let d = one - a + a * x;
                            (d, x / d)
                        }
                    };
                    let mut terms = Vec::with_capacity(n + 2);
                    for j in 1..=n {
                        let c = if j <= k {
                            let t = R::of_usize(j) * tau;
                            (t + one - a + a * (x - t)) / den
                        } else {
                            tail
                        };
                        terms.push((j - 1, c));
                    }
                    terms.push((fi, tail));
                    terms.push((lam, -one));
                    lp.add_row(name, terms, Relation::Le, R::zero());
                }
                RowKind::CrInfinity => {
                    let mut terms: Vec<(usize, R)> = (0..n).map(|j| (j, one)).collect();
                    terms.push((fi, one / a));
                    terms.push((lam, -one));
                    lp.add_row(name, terms, Relation::Le, R::zero());
                }
                RowKind::Mass {
                    lo, hi, infinity, ..
                } => {
                    let mut terms: Vec<(usize, R)> = (lo..=hi).map(|j| (j - 1, one)).collect();
                    if infinity {
                        terms.push((fi, one));
                    }
                    lp.add_row(name, terms, Relation::Le, cfg.delta);
                }
                RowKind::Total => {
                    let terms = (0..=n).map(|j| (j, one)).collect();
                    lp.add_row(name, terms, Relation::Eq, one);
                }
            }
        }
        lp
    }

    /// Running sums `s0_k = s0_{k-1} + f_k` and `s1_k = s1_{k-1} + t_k f_k`
    /// as extra columns. With the total row, the mass after `x` is
    /// `1 - s0_k`, which turns every ratio row into three nonzeros.
    fn lifted(&self) -> LinearProgram<R> {
        let cfg = &self.config;
        let (a, one, tau) = (cfg.a, R::one(), cfg.tau);
        let n = self.count();
        let (fi, lam) = (self.inf_col(), self.lambda_col());
        let mut lp = self.base_columns();
        let s0: Vec<usize> = (1..=n)
            .map(|k| lp.add_var(format!("s0_{k:04}"), R::zero(), R::zero(), R::infinity()))
            .collect();
        let s1: Vec<usize> = (1..=n)
            .map(|k| lp.add_var(format!("s1_{k:04}"), R::zero(), R::zero(), R::infinity()))
            .collect();
        for k in 1..=n {
            let t = R::of_usize(k) * tau;
            let mut r0 = vec![(s0[k - 1], one), (k - 1, -one)];
            let mut r1 = vec![(s1[k - 1], one), (k - 1, -t)];
            if k > 1 {
                r0.push((s0[k - 2], -one));
                r1.push((s1[k - 2], -one));
            }
            lp.add_row(format!("run0_{k:04}"), r0, Relation::Eq, R::zero());
            lp.add_row(format!("run1_{k:04}"), r1, Relation::Eq, R::zero());
        }
        let s0_at = |k: usize| if k == 0 { None } else { Some(s0[k - 1]) };
        for row in &self.rows {
            let name = self.row_name(row);
            match *row {
                RowKind::CrSmall(k) => {
                    let x = R::of_usize(k) * tau;
                    let terms = vec![
                        (s1[k - 1], (one - a) / x),
                        (s0[k - 1], (one - a + a * x) / x - one),
                        (lam, -one),
                    ];
                    lp.add_row(name, terms, Relation::Le, -one);
                }
                RowKind::CrLarge(k) => {
                    let x = R::of_usize(k) * tau;
                    let d = one - a + a * x;
                    let terms = vec![
                        (s1[k - 1], (one - a) / d),
                        (s0[k - 1], one - x / d),
                        (lam, -one),
                    ];
                    lp.add_row(name, terms, Relation::Le, -(x / d));
                }
                RowKind::CrInfinity => {
                    let terms = vec![(s0[n - 1], one), (fi, one / a), (lam, -one)];
                    lp.add_row(name, terms, Relation::Le, R::zero());
                }
                RowKind::Mass {
                    lo, hi, infinity, ..
                } => {
                    let mut terms = Vec::with_capacity(3);
                    if hi >= lo {
                        terms.push((s0[hi - 1], one));
                        if let Some(c) = s0_at(lo - 1) {
                            terms.push((c, -one));
                        }
                    }
                    if infinity {
                        terms.push((fi, one));
                    }
                    lp.add_row(name, terms, Relation::Le, cfg.delta);
                }
                RowKind::Total => {
                    lp.add_row(name, vec![(s0[n - 1], one), (fi, one)], Relation::Eq, one);
                }
            }
        }
        lp
    }
}

/// Builds the instance on the grid `(0, L_b]`.
///
/// Beyond the displayed rows it includes the ratio row at infinity and the
/// mass rows for stop times in `(L_b, L5 + tau]` and at infinity; without
/// them the program could park unlimited mass at infinity.
pub fn build_lp<R: Real>(cfg: &ProblemConfig<R>) -> Result<LpInstance<R>, ConfigError> {
    let grid = build_grid(cfg, cfg.lp_support_end())?;
    let n = grid.count;
    let tau = cfg.tau;
    let k1 = cfg.index_of_one();
    let mut rows = Vec::new();
    for k in 1..=k1.min(n) {
        rows.push(RowKind::CrSmall(k));
    }
    for k in k1..=n {
        rows.push(RowKind::CrLarge(k));
    }
    rows.push(RowKind::CrInfinity);
    let last = n.max(ceil_index(cfg.boundaries().l5, tau) + 1);
    let mut push_mass = |at: Option<usize>, iv: BadInterval<R>| {
        let infinity = iv.contains_infinity();
        match iv.grid_range(tau, n) {
            Some((lo, hi)) => rows.push(RowKind::Mass {
                at,
                lo,
                hi,
                infinity,
            }),
            None if infinity => rows.push(RowKind::Mass {
                at,
                lo: 1,
                hi: 0,
                infinity,
            }),
            None => {}
        }
    };
    for k in 1..=last {
        let x = R::of_usize(k) * tau;
        push_mass(
            Some(k),
            bad_interval(StopTime::Finite(x), cfg.a, cfg.gamma).expect("positive time"),
        );
    }
    push_mass(
        None,
        bad_interval(StopTime::Infinity, cfg.a, cfg.gamma).expect("infinity is valid"),
    );
    rows.push(RowKind::Total);
    Ok(LpInstance {
        config: *cfg,
        grid,
        rows,
    })
}
