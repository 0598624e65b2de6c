use cavsqueeze::optimize::{
    delta_zero_check, optimize, scaling_sweep, sweep_template, Bounds, OptimizationProblem,
};

fn sweep_problem(cooperativity: f64) -> OptimizationProblem {
    OptimizationProblem::new(sweep_template(1_000_000, 100.0, 100.0, 1e5, cooperativity))
}

#[test]
fn cooperativity_hundred_matches_power_law() {
    let rep = optimize(&sweep_problem(100.0)).unwrap();
    eprintln!("{:?}", (rep.xi2_min, rep.r, rep.delta, rep.delta_1, rep.t_min, rep.evaluations));
    assert!(rep.feasible);
    assert!((rep.xi2_min - 0.07).abs() <= 0.3 * 0.07, "{}", rep.xi2_min);
    assert!(rep.reproduction_error(400).unwrap() < 1e-6);
}

#[test]
fn degenerate_ratio_box_gives_no_squeezing() {
    let mut prob = sweep_problem(100.0);
    prob.ratio = Bounds::fixed(0.0);
    prob.settings.restarts = 2;
    let rep = optimize(&prob).unwrap();
    assert_eq!(rep.xi2_min, 1.0);
    assert_eq!(rep.t_min, 0.0);
}

#[test]
fn deterministic_given_seed() {
    let mut prob = sweep_problem(10.0);
    prob.settings.restarts = 3;
    prob.settings.seed = 11;
    let a = optimize(&prob).unwrap();
    let b = optimize(&prob).unwrap();
    assert_eq!(a, b);
    prob.settings.seed = 12;
    let c = optimize(&prob).unwrap();
    assert_ne!(a.restarts[0].start, c.restarts[0].start);
}

#[test]
fn pinned_drive_scale_is_irrelevant() {
    let mut prob = sweep_problem(100.0);
    prob.settings.restarts = 3;
    let a = optimize(&prob).unwrap();
    prob.omega1_scale = 2.0;
    let b = optimize(&prob).unwrap();
    assert!((a.xi2_min - b.xi2_min).abs() <= 1e-6 * a.xi2_min, "{} {}", a.xi2_min, b.xi2_min);
    assert!((a.r - b.r).abs() <= 1e-6 * a.r);
    assert!((b.t_min - a.t_min / 4.0).abs() <= 1e-6 * a.t_min);
}

#[test]
fn delta_check_skips_without_absorption_dominance() {
    let mut prob = sweep_problem(100.0);
    prob.ratio = Bounds::new(1e-2, 0.5);
    prob.settings.restarts = 2;
    let rep = delta_zero_check(&prob).unwrap();
    assert!(rep.skipped);
    assert!(rep.passed.is_none());
    assert!(rep.side.explanation.unwrap().contains("absorption"));
}

#[test]
fn single_point_sweep() {
    let mut prob = sweep_problem(1.0);
    prob.settings.restarts = 2;
    let rep = scaling_sweep(&[10.0], &prob);
    let x = rep.points[0].xi2_min().unwrap();
    assert!((rep.fit.c_fixed_slope.unwrap() - x * 10f64.sqrt()).abs() < 1e-12);
    let csv = rep.to_csv();
    assert!(csv.starts_with("cooperativity,xi2_min,r_opt,delta_opt,delta1_opt,t_min,C_fixed_slope\n"));
    let bad = scaling_sweep(&[0.01], &prob);
    assert!(bad.points[0].error.is_some());
}
