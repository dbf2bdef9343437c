mod common;

use std::f64::consts::{E, PI};
use std::sync::Arc;

use parapos_core::duhamel::*;
use parapos_core::fdm::{solve, SchemeConfig, TimeStepper};
use parapos_core::model::*;
use parapos_core::Error;

use common::*;

fn line(lo: f64, hi: f64, nodes: usize) -> Arc<Grid> {
    Arc::new(Grid::new(SpatialDomain::interval(lo, hi).unwrap(), vec![nodes]).unwrap())
}

fn gaussian(x: f64, s: f64) -> f64 {
    (-x * x / (2.0 * s * s)).exp()
}

#[test]
fn kernel_value_normalization_and_scaling() {
    assert!((heat_kernel(1.0, &[0.0], 1.0).unwrap() - 0.398942280401).abs() < 1e-11);
    let (t, d) = (0.3, 0.7);
    let sd = (d * t as f64).sqrt();
    let n = 4001;
    let half = 8.0 * sd;
    let h = 2.0 * half / (n - 1) as f64;
    let mass: f64 = (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            w * h * heat_kernel(t, &[-half + i as f64 * h], d).unwrap()
        })
        .sum();
    assert!((mass - 1.0).abs() < 1e-10);
    for x in [0.0, 0.1, -0.7, 1.3] {
        let a = heat_kernel(t, &[x, 0.5 * x], d).unwrap();
        let b = heat_kernel(d * t, &[x, 0.5 * x], 1.0).unwrap();
        assert!((a - b).abs() <= 1e-15 * a.max(1.0));
    }
}

#[test]
fn gaussian_widens_by_the_diffusion_variance() {
    let g = line(-5.0, 5.0, 501);
    let (s0, d, t) = (0.4, 0.1, 1.0);
    let phi = Field::from_fn(g.clone(), 1, |x| vec![gaussian(x[0], s0)]).unwrap();
    let cfg = KernelConfig::new(vec![d]).unwrap();
    let u = duhamel_apply(&phi, &[], t, &cfg).unwrap();
    // du/dt = d u'' spreads the variance by 2 d t.
    let st = (s0 * s0 + 2.0 * d * t).sqrt();
    for node in 1..g.len() - 1 {
        let x = g.point(node)[0];
        let exact = s0 / st * gaussian(x, st);
        assert!((u.component(0)[node] - exact).abs() < 1e-9);
    }
}

#[test]
fn zero_data_and_zero_time() {
    let g = line(0.0, 1.0, 51);
    let cfg = KernelConfig::new(vec![1.0]).unwrap();
    let zero = Field::zeros(g.clone(), 1);
    assert_eq!(duhamel_apply(&zero, &[], 0.5, &cfg).unwrap(), zero);
    let phi = Field::from_fn(g, 1, |x| vec![x[0] * (1.0 - x[0])]).unwrap();
    assert_eq!(duhamel_apply(&phi, &[], 0.0, &cfg).unwrap(), phi);
    assert!(matches!(duhamel_apply(&phi, &[], -1.0, &cfg), Err(Error::Domain(_))));
}

#[test]
fn unit_source_accumulates_time() {
    let g = line(-5.0, 5.0, 201);
    let cfg = KernelConfig::new(vec![0.1]).unwrap();
    let t = 0.8;
    let one = Field::from_fn(g.clone(), 1, |_| vec![1.0]).unwrap();
    let history: Vec<(f64, Field)> = (0..=16).map(|j| (j as f64 * t / 16.0, one.clone())).collect();
    let u = duhamel_apply(&Field::zeros(g, 1), &history, t, &cfg).unwrap();
    assert!((u.component(0)[100] - t).abs() < 1e-10);
}

#[test]
fn semigroup_property() {
    let g = line(-6.0, 6.0, 601);
    let cfg = KernelConfig::new(vec![0.2]).unwrap();
    let phi = Field::from_fn(g, 1, |x| vec![gaussian(x[0] - 0.3, 0.5)]).unwrap();
    let twice = duhamel_apply(&duhamel_apply(&phi, &[], 0.4, &cfg).unwrap(), &[], 0.7, &cfg).unwrap();
    let once = duhamel_apply(&phi, &[], 1.1, &cfg).unwrap();
    assert!(twice.max_abs_diff(&once) < 2e-9);
}

#[test]
fn picard_logistic_matches_closed_form() {
    // Kernel width sqrt(2 d t) is 0.063, far below the distance 0.5 to the boundary.
    let lv = LVCoefficients::constant(vec![0.002], vec![1.0], vec![vec![1.0]]).unwrap();
    let spec = lv_problem(lv, unit_grid(101), 1.0, |_| vec![0.5]);
    let cfg = KernelConfig::for_spec(&spec).unwrap();
    let sol = picard_solve(&spec, &cfg, 0.01).unwrap();
    assert!(sol.converged);
    let u = sol.final_state().component(0)[50];
    let exact = logistic(1.0, 1.0, 0.5, 1.0);
    assert!((exact - E / (1.0 + E)).abs() < 1e-15);
    assert!((u - exact).abs() < 1e-4, "{u} vs {exact}");
    assert!(sol.contraction_ratios(2, 1e-13).iter().all(|r| *r < 1.0));
    assert!(sol.states.iter().all(|s| s.min_value() >= -1e-12));
    assert_eq!(sol.times.len(), 101);
    assert_eq!(*sol.times.last().unwrap(), 1.0);
}

#[test]
fn picard_without_source_is_one_step() {
    let g = line(-4.0, 4.0, 161);
    let coef = CoefficientSet::new(FnCoefficients::constant_diffusion(1, vec![0.2]));
    let phi = Field::from_fn(g, 1, |x| vec![gaussian(x[0], 0.5)]).unwrap();
    let spec = ProblemSpec::new(coef, phi.clone(), 0.5).unwrap();
    let cfg = KernelConfig::for_spec(&spec).unwrap();
    let sol = picard_solve(&spec, &cfg, 0.05).unwrap();
    assert_eq!(sol.iterations, vec![1]);
    let direct = duhamel_apply(&phi, &[], 0.5, &cfg).unwrap();
    assert!(sol.final_state().max_abs_diff(&direct) < 1e-15);
}

#[test]
fn picard_detects_growing_iterates() {
    let coef = FnCoefficients::constant_diffusion(1, vec![0.01])
        .with_source(false, |_, _, u, _, out| out[0] = 5.0 + 1000.0 * (u[0] - 2.5).max(0.0));
    let g = unit_grid(41);
    let phi = Field::from_fn(g, 1, |x| vec![(PI * x[0]).sin()]).unwrap();
    let spec = ProblemSpec::new(CoefficientSet::new(coef), phi, 1.0).unwrap();
    let cfg = KernelConfig::for_spec(&spec).unwrap();
    assert!(matches!(picard_solve(&spec, &cfg, 0.05), Err(Error::NonContraction(_))));
}

#[test]
fn picard_rejects_unsupported_problems() {
    let g = unit_grid(11);
    let var = FnCoefficients::constant_diffusion(1, vec![1.0]).with_diffusion(|_, _, x, _| [[1.0 + x[0], 0.0], [0.0, 0.0]]);
    let spec = ProblemSpec::new(CoefficientSet::new(var), Field::zeros(g.clone(), 1), 1.0).unwrap();
    assert!(matches!(KernelConfig::for_spec(&spec), Err(Error::Spec(_))));
    let drift = FnCoefficients::constant_diffusion(1, vec![1.0]).with_drift(|_, _, _, _| [1.0, 0.0]);
    let spec = ProblemSpec::new(CoefficientSet::new(drift), Field::zeros(g, 1), 1.0).unwrap();
    let cfg = KernelConfig::new(vec![1.0]).unwrap();
    assert!(matches!(picard_solve(&spec, &cfg, 0.1), Err(Error::Spec(_))));
    assert!(KernelConfig { truncation: 5.0, ..cfg.clone() }.validate().is_err());
    assert!(KernelConfig { max_iter: 0, ..cfg }.validate().is_err());
}

#[test]
fn two_species_agrees_with_finite_differences() {
    let g = line(-4.0, 4.0, 161);
    let lv = LVCoefficients::constant(vec![0.05, 0.1], vec![1.0, 0.8], vec![vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap();
    let spec = lv_problem(lv, g, 0.5, |x| {
        vec![0.6 * gaussian(x[0] + 0.5, 0.4), 0.4 * gaussian(x[0] - 0.5, 0.5)]
    });
    let dt = 0.005;
    let sol = picard_solve(&spec, &KernelConfig::for_spec(&spec).unwrap(), dt).unwrap();
    let fdm = solve(&spec, &SchemeConfig::new(TimeStepper::ImexCn, dt).unwrap()).unwrap();
    let (a, b) = (sol.final_state(), fdm.final_state());
    let rel = a.max_abs_diff(b) / a.sup_norm();
    assert!(rel <= 1e-3, "relative difference {rel}");
}
