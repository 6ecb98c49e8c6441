use std::io::Write;

use ski_tail::lp::{LinearProgram, Relation};
use ski_tail::{
    binary_search, build_lp, classical_opt, solve_lp, to_lp_format, DenseSimplex, Formulation,
    LpBackend, LpError, ProblemConfig, World,
};
use ski_tail_highs::{solve_lp_file, HighsBackend};

fn cfg(a: f64, g: f64, d: f64, tau: f64) -> ProblemConfig {
    ProblemConfig::new(a, g, d, tau, 1e-9).unwrap()
}

#[test]
fn toy_program() {
    // min -x - y s.t. x + 2y <= 4, 3x + y <= 6  ->  (8/5, 6/5)
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", -1.0, 0.0, f64::INFINITY);
    let y = lp.add_var("y", -1.0, 0.0, f64::INFINITY);
    lp.add_row("c1", vec![(x, 1.0), (y, 2.0)], Relation::Le, 4.0);
    lp.add_row("c2", vec![(x, 3.0), (y, 1.0)], Relation::Le, 6.0);
    let sol = HighsBackend::new().solve(&lp).unwrap();
    assert!((sol.values[x] - 1.6).abs() < 1e-9);
    assert!((sol.values[y] - 1.2).abs() < 1e-9);
    assert!((sol.objective + 2.8).abs() < 1e-9);
}

#[test]
fn infeasible_names_rows() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 1.0, 0.0, f64::INFINITY);
    lp.add_row("hi", vec![(x, 1.0)], Relation::Ge, 2.0);
    lp.add_row("lo", vec![(x, 1.0)], Relation::Le, 1.0);
    match HighsBackend::new().solve(&lp) {
        Err(LpError::Infeasible { rows }) => assert!(!rows.is_empty()),
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn unbounded() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", -1.0, 0.0, f64::INFINITY);
    lp.add_row("r", vec![(x, 1.0)], Relation::Ge, 0.0);
    assert!(matches!(
        HighsBackend::new().solve(&lp),
        Err(LpError::Unbounded)
    ));
}

#[test]
fn agrees_with_bundled_simplex() {
    for (d, tau) in [(0.05, 0.05), (0.25, 0.05), (1.0, 0.1)] {
        let inst = build_lp(&cfg(0.5, 1.5, d, tau)).unwrap();
        let ours = solve_lp(&inst, &DenseSimplex::default()).unwrap();
        let theirs = solve_lp(&inst, &HighsBackend::new()).unwrap();
        assert!(
            (ours.opt_estimate - theirs.opt_estimate).abs() < 1e-8,
            "delta {d}: {} vs {}",
            ours.opt_estimate,
            theirs.opt_estimate
        );
    }
}

#[test]
fn dense_formulation_matches_lifted() {
    let inst = build_lp(&cfg(0.8, 1.2, 0.05, 0.01)).unwrap();
    let lifted = solve_lp(&inst, &HighsBackend::new()).unwrap();
    let dense = HighsBackend {
        formulation: Formulation::Dense,
        ..HighsBackend::default()
    };
    let dense = solve_lp(&inst, &dense).unwrap();
    assert!((lifted.opt_estimate - dense.opt_estimate).abs() < 1e-8);
}

#[test]
fn sandwiches_binary_search() {
    let c = cfg(0.8, 1.2, 0.05, 0.01);
    let lp = solve_lp(&build_lp(&c).unwrap(), &HighsBackend::new()).unwrap();
    let bs = binary_search(&c).unwrap();
    assert!(lp.opt_estimate <= bs.opt_estimate + 1e-9);
    assert!(bs.opt_estimate <= lp.opt_estimate + c.epsilon + 1e-7);
    assert_eq!(lp.world, World::World2);
    assert!((lp.distribution.mass_inf - 0.05).abs() < 1e-7);
}

#[test]
fn classical_at_fine_grid() {
    let c = cfg(0.5, 1.5, 1.0, 1e-3);
    let lp = solve_lp(&build_lp(&c).unwrap(), &HighsBackend::new()).unwrap();
    assert!((lp.opt_estimate - classical_opt(0.5)).abs() < 2e-3);
}

#[test]
fn exported_file_round_trip() {
    let inst = build_lp(&cfg(0.5, 1.5, 0.25, 0.05)).unwrap();
    let lp = inst.materialize(Formulation::Dense);
    let direct = HighsBackend::new().solve(&lp).unwrap();
    let mut file = tempfile::Builder::new().suffix(".lp").tempfile().unwrap();
    file.write_all(to_lp_format(&lp, "round trip").as_bytes())
        .unwrap();
    let read = solve_lp_file(file.path()).unwrap();
    assert!((read.objective - direct.objective).abs() < 1e-9);
    assert!(read.values.contains_key("f_inf"));
    assert!((read.values["lambda"] - read.objective).abs() < 1e-12);
}

#[test]
fn missing_file() {
    assert!(solve_lp_file(std::path::Path::new("/nonexistent/x.lp")).is_err());
}
