//! HiGHS as an [`LpBackend`], plus a reader that solves LP files from disk.
//!
//! The bundled dense simplex is fine at desk scale; at `tau = 1e-3` the
//! instances have thousands of columns and HiGHS is the practical choice.

use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;

use highs::{HighsModelStatus, RowProblem, Sense};
use highs_sys::*;
use ski_tail::lp::{Formulation, LinearProgram, LpBackend, LpSolution, Relation};
use ski_tail::LpError;
use thiserror::Error;

const FEASIBILITY_TOL: f64 = 1e-10;

/// HiGHS dual simplex on the lifted formulation.
#[derive(Debug, Clone)]
pub struct HighsBackend {
    pub feasibility_tol: f64,
    pub formulation: Formulation,
}

impl Default for HighsBackend {
    fn default() -> Self {
        Self {
            feasibility_tol: FEASIBILITY_TOL,
            formulation: Formulation::Lifted,
        }
    }
}

impl HighsBackend {
    pub fn new() -> Self {
        Self::default()
    }
}

impl LpBackend<f64> for HighsBackend {
    fn name(&self) -> &str {
        "highs"
    }

    fn formulation(&self) -> Formulation {
        self.formulation
    }

    fn solve(&self, lp: &LinearProgram<f64>) -> Result<LpSolution<f64>, LpError> {
        let mut pb = RowProblem::default();
        let cols: Vec<_> = (0..lp.num_vars())
            .map(|j| pb.add_column(lp.objective[j], lp.lower[j]..=lp.upper[j]))
            .collect();
        for row in &lp.rows {
            let terms: Vec<_> = row.terms.iter().map(|&(j, c)| (cols[j], c)).collect();
            match row.relation {
                Relation::Le => pb.add_row(..=row.rhs, &terms),
                Relation::Ge => pb.add_row(row.rhs.., &terms),
                Relation::Eq => pb.add_row(row.rhs..=row.rhs, &terms),
            }
        }
        let mut model = pb.optimise(Sense::Minimise);
        model.make_quiet();
        model.set_option("primal_feasibility_tolerance", self.feasibility_tol);
        model.set_option("dual_feasibility_tolerance", self.feasibility_tol);
        let solved = model
            .try_solve()
            .map_err(|s| LpError::Backend(format!("{s:?}")))?;
        match solved.status() {
            HighsModelStatus::Optimal => {}
            HighsModelStatus::Infeasible => {
                let x = solved.get_solution().columns().to_vec();
                return Err(LpError::Infeasible {
                    rows: violated_rows(lp, &x),
                });
            }
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
                return Err(LpError::Unbounded)
            }
            HighsModelStatus::ReachedIterationLimit => {
                return Err(LpError::IterationLimit(
                    solved.simplex_iteration_count().max(0) as usize,
                ))
            }
            other => return Err(LpError::Backend(format!("{other:?}"))),
        }
        let values = solved.get_solution().columns().to_vec();
        Ok(LpSolution {
            objective: lp.objective_value(&values),
            iterations: solved.simplex_iteration_count().max(0) as usize,
            values,
        })
    }
}

/// Rows the solver's last point breaks; HiGHS has no IIS in this binding.
fn violated_rows(lp: &LinearProgram<f64>, x: &[f64]) -> Vec<String> {
    lp.rows
        .iter()
        .filter(|row| {
            let lhs: f64 = row.terms.iter().map(|&(j, c)| c * x[j]).sum();
            let excess = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            excess > 1e-9
        })
        .map(|row| row.name.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FileSolveError {
    #[error("path {0:?} is not valid UTF-8 or contains a NUL byte")]
    Path(String),
    #[error("HiGHS could not read {0}")]
    Read(String),
    #[error("HiGHS run failed with status {0}")]
    Run(i32),
    #[error("model status {0} is not optimal")]
    NotOptimal(i32),
}

/// Objective and named column values of an LP read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct FileSolution {
    pub objective: f64,
    pub values: BTreeMap<String, f64>,
}

struct Handle(*mut std::ffi::c_void);

impl Drop for Handle {
    fn drop(&mut self) {
        // SAFETY: created by Highs_create and dropped once.
        unsafe { Highs_destroy(self.0) }
    }
}

/// Reads an LP file (format picked by HiGHS from the extension) and solves it.
pub fn solve_lp_file(path: &Path) -> Result<FileSolution, FileSolveError> {
    let shown = path.display().to_string();
    let c_path = path
        .to_str()
        .and_then(|s| CString::new(s).ok())
        .ok_or_else(|| FileSolveError::Path(shown.clone()))?;
    // SAFETY: every pointer handed to HiGHS is either the live handle or a
    // buffer sized per the C API's requirements.
    unsafe {
        let h = Handle(Highs_create());
        let quiet = CString::new("output_flag").expect("static option name");
        Highs_setBoolOptionValue(h.0, quiet.as_ptr(), 0);
        for opt in ["primal_feasibility_tolerance", "dual_feasibility_tolerance"] {
            let name = CString::new(opt).expect("static option name");
            Highs_setDoubleOptionValue(h.0, name.as_ptr(), FEASIBILITY_TOL);
        }
        if Highs_readModel(h.0, c_path.as_ptr()) != kHighsStatusOk {
            return Err(FileSolveError::Read(shown));
        }
        let status = Highs_run(h.0);
        if status != kHighsStatusOk {
            return Err(FileSolveError::Run(status as i32));
        }
        let model = Highs_getModelStatus(h.0);
        if model != kHighsModelStatusOptimal {
            return Err(FileSolveError::NotOptimal(model as i32));
        }
        let ncol = Highs_getNumCol(h.0);
        let nrow = Highs_getNumRow(h.0);
        let mut col_value = vec![0.0; ncol as usize];
        let mut col_dual = vec![0.0; ncol as usize];
        let mut row_value = vec![0.0; nrow as usize];
        let mut row_dual = vec![0.0; nrow as usize];
        Highs_getSolution(
            h.0,
            col_value.as_mut_ptr(),
            col_dual.as_mut_ptr(),
            row_value.as_mut_ptr(),
            row_dual.as_mut_ptr(),
        );
        let mut values = BTreeMap::new();
        let mut buf = vec![0 as c_char; kHighsMaximumStringLength as usize + 1];
        for j in 0..ncol {
            Highs_getColName(h.0, j, buf.as_mut_ptr());
            let name = CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned();
            values.insert(name, col_value[j as usize]);
        }
        Ok(FileSolution {
            objective: Highs_getObjectiveValue(h.0),
            values,
        })
    }
}
