mod common;

use std::f64::consts::{E, PI};

use parapos_core::analysis::*;
use parapos_core::fdm::{solve, SchemeConfig, TimeStepper, Trajectory};
use parapos_core::hypothesis::{check_dissipativity, CheckTolerances, DissipativityMode, SampleBudget};
use parapos_core::model::*;
use parapos_core::par::ExecPolicy;
use parapos_core::Error;

use common::*;

fn logistic_lv(d: f64, beta: ScalarCoef, gamma: ScalarCoef) -> LVCoefficients {
    LVCoefficients::new(vec![d], vec![beta], vec![vec![gamma]]).unwrap()
}

fn run(spec: &ProblemSpec, dt: f64, stride: usize) -> Trajectory {
    solve(spec, &SchemeConfig::new(TimeStepper::ImexBe, dt).unwrap().with_stride(stride)).unwrap()
}

fn monotone_run(n: usize, dt: f64) -> Trajectory {
    let spec = lv_problem(monotone_lv(0.01), unit_grid(n), 100.0, monotone_initial);
    let scheme = SchemeConfig::new(TimeStepper::ImexBe, dt).unwrap().with_stride(50).with_steady_stop(5.0, 1e-9);
    solve(&spec, &scheme).unwrap()
}

#[test]
fn max_principle_bound_examples() {
    assert!((max_principle_bound(0.0, 1.0, 1.0, 1.0).unwrap() - E * E).abs() < 1e-12);
    assert_eq!(max_principle_bound(0.0, 3.0, 2.0, 0.0).unwrap(), 0.0);
    assert_eq!(max_principle_bound(4.0, 0.0, 1.0, 0.0).unwrap(), 2.0);
    assert!(matches!(max_principle_bound(-1.0, 0.0, 1.0, 1.0), Err(Error::Spec(_))));
    assert!(matches!(max_principle_bound(0.0, 0.0, 0.0, 1.0), Err(Error::Spec(_))));
}

#[test]
fn component_bound_examples() {
    let grid = unit_grid(101);
    let one = ScalarCoef::constant(1.0);
    let spec = lv_problem(logistic_lv(0.01, one.clone(), one.clone()), grid.clone(), 0.5, |x| {
        vec![0.8 * (PI * x[0]).sin()]
    });
    let traj = run(&spec, 0.01, 10);
    assert_eq!(component_bound_mk(&traj, 0, &one, &one, 0.0).unwrap(), 1.0);

    let zero = ScalarCoef::constant(0.0);
    let head = traj.snapshots.iter().filter(|_| true).map(|f| f.max_value(0)).fold(0.0, f64::max);
    let m = component_bound_mk(&traj, 0, &zero, &one, traj.final_time()).unwrap();
    assert_eq!(m, head);

    let two = ScalarCoef::constant(2.0);
    let spec = lv_problem(logistic_lv(0.01, two.clone(), one.clone()), grid, 5.0, |x| {
        vec![0.5 * (PI * x[0]).sin()]
    });
    let traj = run(&spec, 0.01, 10);
    let m = component_bound_mk(&traj, 0, &two, &one, 0.0).unwrap();
    assert_eq!(m, 2.0);
    assert!(traj.max_sup_norm() <= m + 1e-9);

    let bad = ScalarCoef::of_time(|t| 1.0 - t);
    assert!(matches!(component_bound_mk(&traj, 0, &one, &bad, 0.0), Err(Error::DivisionDomain(_))));
}

#[test]
fn gronwall_bound_examples() {
    let pts = vec![vec![0.0], vec![0.5], vec![1.0]];
    let b = gronwall_extinction_bound(1.0, &ScalarCoef::of_time(|t| (-t).exp()), &pts).unwrap();
    assert!((b - E).abs() < 1e-8, "{b}");
    assert_eq!(gronwall_extinction_bound(1.5, &ScalarCoef::constant(0.0), &pts).unwrap(), 1.5);
    let b = gronwall_extinction_bound(2.0, &ScalarCoef::of_time(|t| 1.0 / ((1.0 + t) * (1.0 + t))), &pts).unwrap();
    assert!((b - 2.0 * E).abs() < 1e-8, "{b}");
    // Spatially varying: the supremum over the sample is used.
    let beta = ScalarCoef::new(|t, x| x[0] * (-t).exp());
    let b = gronwall_extinction_bound(1.0, &beta, &pts).unwrap();
    assert!((b - E).abs() < 1e-8);
}

#[test]
fn gronwall_rejects_non_integrable_rates() {
    let pts = vec![vec![0.5]];
    for beta in [ScalarCoef::constant(1.0), ScalarCoef::of_time(|t| 1.0 / (1.0 + t))] {
        assert!(matches!(gronwall_extinction_bound(1.0, &beta, &pts), Err(Error::Integrability(_))));
    }
}

#[test]
fn decaying_growth_leads_to_extinction_below_the_gronwall_bound() {
    let beta = ScalarCoef::of_time(|t| (-t).exp());
    let lv = logistic_lv(0.05, beta.clone(), ScalarCoef::constant(1.0));
    let grid = unit_grid(51);
    let spec = lv_problem(lv, grid.clone(), 30.0, |x| vec![(PI * x[0]).sin()]);
    let traj = run(&spec, 0.01, 5);
    let pts: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let bound = gronwall_extinction_bound(spec.initial().max_value(0), &beta, &pts).unwrap();
    for f in &traj.snapshots {
        assert!(f.max_value(0) <= bound + 1e-6);
    }
    let ext = extinction_check(&traj, 0, 1e-3, 0.1).unwrap();
    assert!(ext.extinct && ext.final_sup <= 1e-3, "{ext:?}");
}

#[test]
fn extinction_negative_and_trivial_cases() {
    let one = ScalarCoef::constant(1.0);
    let spec = lv_problem(logistic_lv(0.01, one.clone(), one.clone()), unit_grid(51), 10.0, |x| {
        vec![0.2 * (PI * x[0]).sin()]
    });
    let ext = extinction_check(&run(&spec, 0.01, 10), 0, 1e-3, 0.1).unwrap();
    assert!(!ext.extinct && ext.final_sup > 0.5);

    let spec = lv_problem(logistic_lv(0.01, one.clone(), one), unit_grid(51), 1.0, |_| vec![0.0]);
    let ext = extinction_check(&run(&spec, 0.01, 10), 0, 1e-3, 0.1).unwrap();
    assert!(ext.extinct);
    assert_eq!(ext.final_sup, 0.0);
}

#[test]
fn constant_in_time_solution_is_monotone_both_ways() {
    let one = ScalarCoef::constant(1.0);
    let spec = lv_problem(logistic_lv(0.01, one.clone(), one), unit_grid(21), 1.0, |_| vec![0.0]);
    let traj = run(&spec, 0.05, 2);
    for sign in [ExpectedSign::Increasing, ExpectedSign::Decreasing] {
        let r = detect_monotone(&traj, 0, sign).unwrap();
        assert!(r.pass);
        assert_eq!(r.worst_margin, 0.0);
        assert!(r.witness.is_none());
    }
}

#[test]
fn monotone_detection_needs_three_snapshots() {
    let one = ScalarCoef::constant(1.0);
    let spec = lv_problem(logistic_lv(0.01, one.clone(), one), unit_grid(21), 0.1, |_| vec![0.0]);
    let traj = run(&spec, 0.1, 1);
    assert!(matches!(detect_monotone(&traj, 0, ExpectedSign::Increasing), Err(Error::Spec(_))));
}

#[test]
fn decaying_growth_breaks_monotone_increase() {
    let lv = logistic_lv(0.01, ScalarCoef::of_time(|t| (-t).exp()), ScalarCoef::constant(1.0));
    let spec = lv_problem(lv, unit_grid(51), 5.0, |x| vec![0.1 * (PI * x[0]).sin()]);
    let traj = run(&spec, 0.01, 5);
    let r = detect_monotone(&traj, 0, ExpectedSign::Increasing).unwrap();
    assert!(!r.pass);
    let w = r.witness.unwrap();
    assert!(w.t > 0.5, "{w:?}");
}

#[test]
fn monotone_scenario_converges_to_a_weak_steady_state() {
    let traj = monotone_run(101, 0.01);
    assert!(traj.steady_at.is_some());
    let up = detect_monotone(&traj, 0, ExpectedSign::Increasing).unwrap();
    let down = detect_monotone(&traj, 1, ExpectedSign::Decreasing).unwrap();
    assert!(up.pass && down.pass, "{up:?} {down:?}");

    let sups: Vec<f64> = traj.snapshots.iter().map(|f| f.max_value(0)).collect();
    assert!(sups.windows(2).all(|w| w[1] >= w[0] - up.tol));

    let mut report = extract_steady_state(&traj, 0.1, 1e-8).unwrap();
    assert!(report.converged(), "slope {}", report.tail_slope);
    let limits = LimitCoefficients::from_lv(&monotone_lv(0.01)).unwrap();
    let tests = TestFunction::battery(traj.grid().domain()).unwrap();
    report.residuals = elliptic_weak_residual(&report.state, 0.01, 0.01, &limits, &tests, ExecPolicy::Sequential).unwrap();
    report.monotonicity = vec![up, down];
    assert_eq!(report.residuals.len() * 2, tests.len() * 2);
    for r in &report.residuals {
        assert!(r.r1.abs() <= 5e-4 && r.r2.abs() <= 5e-4, "{r:?}");
    }
    let par = elliptic_weak_residual(&report.state, 0.01, 0.01, &limits, &tests, ExecPolicy::Parallel).unwrap();
    assert_eq!(par, report.residuals);

    let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    assert_eq!(json["status"], "converged");
    assert_eq!(json["residuals"].as_array().unwrap().len(), 5);
    assert_eq!(json["fields"].as_array().unwrap().len(), 2);
}

#[test]
fn steady_extraction_of_an_elliptic_solution_shows_no_drift() {
    let (d, n) = (0.05, 101);
    let w = scalar_steady_state(d, 1.0, 1.0, 0.0, 1.0, n);
    let one = ScalarCoef::constant(1.0);
    let spec = lv_problem(logistic_lv(d, one.clone(), one), unit_grid(n), 2.0, |x| {
        vec![w[(x[0] * (n - 1) as f64).round() as usize]]
    });
    let report = extract_steady_state(&run(&spec, 0.01, 10), 0.1, 1e-8).unwrap();
    assert!(report.converged());
    assert!(report.tail_slope < 1e-9, "{}", report.tail_slope);
}

#[test]
fn steady_extraction_of_zero_data_is_zero() {
    let one = ScalarCoef::constant(1.0);
    let spec = lv_problem(logistic_lv(0.05, one.clone(), one), unit_grid(21), 1.0, |_| vec![0.0]);
    let report = extract_steady_state(&run(&spec, 0.01, 10), 0.1, 1e-8).unwrap();
    assert!(report.converged());
    assert!(report.fields[0].iter().all(|v| *v == 0.0));
}

#[test]
fn logistic_relaxes_to_its_steady_profile() {
    let (d, n) = (0.05, 101);
    let one = ScalarCoef::constant(1.0);
    let spec = lv_problem(logistic_lv(d, one.clone(), one), unit_grid(n), 50.0, |x| {
        vec![0.1 * (PI * x[0]).sin()]
    });
    let report = extract_steady_state(&run(&spec, 0.02, 25), 0.1, 1e-8).unwrap();
    assert!(report.converged(), "{}", report.tail_slope);
    let w = scalar_steady_state(d, 1.0, 1.0, 0.0, 1.0, n);
    let err = report.fields[0].iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-7, "{err}");
}

#[test]
fn not_converged_status_is_reported() {
    let one = ScalarCoef::constant(1.0);
    let spec = lv_problem(logistic_lv(0.05, one.clone(), one), unit_grid(51), 2.0, |x| {
        vec![0.1 * (PI * x[0]).sin()]
    });
    let report = extract_steady_state(&run(&spec, 0.01, 10), 0.1, 1e-8).unwrap();
    assert_eq!(report.status, SteadyStatus::NotConverged);
}

fn pair_field(grid: std::sync::Arc<Grid>, u: impl Fn(&[f64]) -> f64) -> Field {
    Field::from_fn(grid, 2, |x| vec![u(x), 0.0]).unwrap()
}

#[test]
fn weak_residual_vanishes_for_zero_fields() {
    let grid = unit_grid(51);
    let f = Field::zeros(grid.clone(), 2);
    let tests = TestFunction::battery(grid.domain()).unwrap();
    let r = elliptic_weak_residual(&f, 1.0, 1.0, &LimitCoefficients::constant([1.0; 6]), &tests, ExecPolicy::Sequential)
        .unwrap();
    assert!(r.iter().all(|p| p.r1 == 0.0 && p.r2 == 0.0));
}

#[test]
fn weak_residual_of_the_scalar_elliptic_solution_is_small() {
    let (lo, hi, n) = (0.0, 10.0, 401);
    let w = scalar_steady_state(1.0, 1.0, 1.0, lo, hi, n);
    let grid = std::sync::Arc::new(Grid::new(SpatialDomain::interval(lo, hi).unwrap(), vec![n]).unwrap());
    let h = (hi - lo) / (n - 1) as f64;
    let f = pair_field(grid.clone(), |x| w[((x[0] - lo) / h).round() as usize]);
    let tests = TestFunction::battery(grid.domain()).unwrap();
    let limits = LimitCoefficients::constant([1.0, 1.0, 0.0, 1.0, 1.0, 1.0]);
    for r in elliptic_weak_residual(&f, 1.0, 1.0, &limits, &tests, ExecPolicy::Sequential).unwrap() {
        assert!(r.r1.abs() <= 5e-4 * r.scale.max(1.0), "{r:?}");
        assert_eq!(r.r2, 0.0);
    }
}

#[test]
fn weak_residual_of_a_constant_has_the_integral_sign() {
    let grid = unit_grid(1001);
    let c0 = 0.5;
    let f = pair_field(grid.clone(), |x| if x[0] > 0.0 && x[0] < 1.0 { c0 } else { 0.0 });
    let tf = TestFunction::new(vec![0.5], 0.2, grid.domain()).unwrap();
    let bump_integral = 16.0 * 0.2 / 15.0;
    for (beta, gamma) in [(1.0, 1.0), (0.2, 1.0)] {
        let limits = LimitCoefficients::constant([beta, gamma, 0.0, 1.0, 1.0, 1.0]);
        let r = elliptic_weak_residual(&f, 0.3, 1.0, &limits, std::slice::from_ref(&tf), ExecPolicy::Sequential)
            .unwrap();
        let expected = (beta - gamma * c0) * c0 * bump_integral;
        assert!((r[0].r1 - expected).abs() < 2e-4, "{} vs {expected}", r[0].r1);
        assert_eq!(r[0].r1.signum(), expected.signum());
        assert!((r[0].scale - bump_integral).abs() < 1e-6);
    }
}

#[test]
fn weak_residual_rejects_supports_touching_the_boundary() {
    let grid = unit_grid(51);
    let f = Field::zeros(grid.clone(), 2);
    let bad = TestFunction { center: vec![0.1], radius: 0.2 };
    let r = elliptic_weak_residual(&f, 1.0, 1.0, &LimitCoefficients::constant([1.0; 6]), &[bad], ExecPolicy::Sequential);
    assert!(matches!(r, Err(Error::Spec(_))));
    assert!(TestFunction::battery(grid.domain()).unwrap().iter().all(|t| t.center[0] - t.radius > 0.0));
}

#[test]
fn two_dimensional_battery_stays_inside() {
    let d = SpatialDomain::rectangle((0.0, 2.0), (-1.0, 1.0)).unwrap();
    let b = TestFunction::battery(&d).unwrap();
    assert_eq!(b.len(), 5);
    for t in &b {
        assert!(t.center[0] - t.radius > 0.0 && t.center[0] + t.radius < 2.0);
        assert!(t.center[1] - t.radius > -1.0 && t.center[1] + t.radius < 1.0);
    }
}

#[test]
fn limits_require_declared_families() {
    let lv = LVCoefficients::two_species(
        0.1,
        0.1,
        ScalarCoef::of_time(|t| 1.0 - (-t).exp()),
        ScalarCoef::constant(1.0),
        ScalarCoef::constant(0.1),
        ScalarCoef::constant(1.0),
        ScalarCoef::constant(0.1),
        ScalarCoef::constant(1.0),
    )
    .unwrap();
    assert!(matches!(LimitCoefficients::from_lv(&lv), Err(Error::Spec(_))));
    let limits = LimitCoefficients::from_lv(&monotone_lv(0.01)).unwrap();
    assert_eq!(limits.eval(&[0.3]), [1.0, 1.0, 0.1, 0.8, 0.2, 1.0]);
}

#[test]
fn residual_csv_has_two_rows_per_test_function() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("residuals.csv");
    let rows = vec![
        ResidualPair { test_id: 0, r1: 1e-5, r2: -2e-5, scale: 0.2 },
        ResidualPair { test_id: 1, r1: 3e-5, r2: 0.0, scale: 0.2 },
    ];
    write_residuals_csv(&path, &rows).unwrap();
    write_residuals_csv(&path, &rows[..1]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "test_id,equation,residual");
    assert_eq!(lines.len(), 1 + 4 + 2);
    assert_eq!(lines[2], "0,2,-2e-5");
}

#[test]
fn trajectory_respects_the_maximum_principle_bound() {
    let lv = LVCoefficients::constant(vec![0.05, 0.05], vec![1.0, 0.8], vec![vec![1.0, 0.3], vec![0.2, 1.0]]).unwrap();
    let horizon = 2.0;
    let spec = lv_problem(lv, unit_grid(81), horizon, |x| {
        let s = (PI * x[0]).sin();
        vec![1.5 * s, 0.7 * s * s]
    });
    let budget = SampleBudget { u_radius: 3.0, ..SampleBudget::default() };
    let (entry, d1, d2) = check_dissipativity(
        &spec,
        &budget,
        DissipativityMode::A2Prime,
        None,
        &CheckTolerances::default(),
        ExecPolicy::Sequential,
    )
    .unwrap();
    assert!(entry.passed());
    let m = max_principle_bound(d1, d2, horizon, spec.initial().sup_norm()).unwrap();
    let traj = run(&spec, 0.01, 10);
    assert!(traj.max_sup_norm() <= m + 1e-6, "{} > {m}", traj.max_sup_norm());
}
