mod common;

use common::svr_reference::{kernel_matrix, kkt_violation, objective, random_problem, sin_regression_rmse, solve};
use paraboost_core::svr::{kkt_report, solve_nu_svr, SolverConfig};

#[test]
fn kkt_certificate_on_random_problems() {
    for seed in 0..20 {
        let (x, y, c, nu, gamma) = random_problem(seed, 40, 3);
        let sol = solve_nu_svr(&x, &y, c, nu, gamma, &SolverConfig::default()).unwrap();
        assert!(sol.converged, "seed {seed}");
        let v = kkt_violation(&x, &y, c, gamma, &sol.alpha);
        assert!(v < 1e-3, "seed {seed}: violation {v}");
        let report = kkt_report(&x, &y, c, nu, gamma, &sol.alpha);
        assert!((report.max_violation - v).abs() < 1e-9, "seed {seed}: {report:?} vs {v}");
        assert!(report.box_violation < 1e-12 && report.sum_violation < 1e-9, "seed {seed}: {report:?}");
    }
}

#[test]
fn objective_matches_dense_reference() {
    let tight = SolverConfig {
        tol: 1e-5,
        ..SolverConfig::default()
    };
    for (seed, n) in [(100, 10), (101, 20), (102, 30), (103, 40), (104, 50), (105, 25)] {
        let (x, y, c, nu, gamma) = random_problem(seed, n, 2);
        let sol = solve_nu_svr(&x, &y, c, nu, gamma, &tight).unwrap();
        let reference = solve(&x, &y, c, nu, gamma, 20_000);
        let k = kernel_matrix(&x, gamma);
        let (fast, slow) = (objective(&k, &y, &sol.alpha), objective(&k, &y, &reference));
        assert!((fast - slow).abs() <= 1e-4 * slow.abs(), "seed {seed}: smo {fast} vs reference {slow}");
        assert!((sol.objective - fast).abs() <= 1e-9 * fast.abs().max(1.0), "reported objective drifted");
    }
}

#[test]
fn learns_a_sine() {
    let rmse = sin_regression_rmse(120, 200);
    assert!(rmse < 0.05, "rmse {rmse}");
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let (x, y, c, nu, gamma) = random_problem(9, 40, 3);
    let capped = SolverConfig {
        max_iter: Some(2),
        ..SolverConfig::default()
    };
    let sol = solve_nu_svr(&x, &y, c, nu, gamma, &capped).unwrap();
    assert!(!sol.converged);
    assert!(sol.iterations <= 2);
}
