mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use parapos_core::fdm::{solve, SchemeConfig, TimeStepper};
use parapos_core::model::*;
use parapos_core::Error;
use proptest::prelude::*;

use common::*;

fn lv2(d: (f64, f64), c: [f64; 6]) -> LVCoefficients {
    let k = ScalarCoef::constant;
    LVCoefficients::two_species(d.0, d.1, k(c[0]), k(c[1]), k(c[2]), k(c[3]), k(c[4]), k(c[5])).unwrap()
}

#[test]
fn zero_state_annihilates_the_lv_source() {
    let grid = unit_grid(11);
    let spec = lv_problem(lv2((1.0, 2.0), [1.0; 6]), grid, 1.0, |_| vec![0.0, 0.0]);
    let e = evaluate_coefficients(&spec, 0.5, &[0.3], &[0.0, 0.0], &[4.0, -7.0]).unwrap();
    assert_eq!(e.diffusion[0][0][0], 1.0);
    assert_eq!(e.diffusion[1][0][0], 2.0);
    assert_eq!(e.drift, [0.0, 0.0]);
    assert_eq!(e.source, vec![0.0, 0.0]);
}

#[test]
fn lv_source_by_hand() {
    let spec = lv_problem(lv2((1.0, 1.0), [1.0; 6]), unit_grid(11), 1.0, |_| vec![0.0, 0.0]);
    let e = evaluate_coefficients(&spec, 0.0, &[0.5], &[1.0, 1.0], &[0.0, 0.0]).unwrap();
    assert_eq!(e.source[0], -1.0);
}

#[test]
fn pass_through_gradient_source() {
    let coef = FnCoefficients::constant_diffusion(1, vec![1.0]).with_source(true, |_, _, _, p, out| out[0] = p[0]);
    let spec = ProblemSpec::new(CoefficientSet::new(coef), Field::zeros(unit_grid(5), 1), 1.0).unwrap();
    let e = evaluate_coefficients(&spec, 0.0, &[0.5], &[0.0], &[3.0]).unwrap();
    assert_eq!(e.source, vec![3.0]);
}

#[test]
fn evaluation_outside_the_cylinder_is_rejected() {
    let spec = lv_problem(lv2((1.0, 1.0), [1.0; 6]), unit_grid(11), 1.0, |_| vec![0.0, 0.0]);
    assert!(matches!(evaluate_coefficients(&spec, 0.0, &[1.5], &[0.0, 0.0], &[0.0, 0.0]), Err(Error::Coefficient(_))));
    assert!(matches!(evaluate_coefficients(&spec, 2.0, &[0.5], &[0.0, 0.0], &[0.0, 0.0]), Err(Error::Coefficient(_))));
}

#[test]
fn species_count_must_match_initial_data() {
    let grid = unit_grid(11);
    let init = Field::zeros(grid.clone(), 1);
    let r = build_lv_problem(lv2((1.0, 1.0), [1.0; 6]), grid.domain(), init, 1.0);
    assert!(matches!(r, Err(Error::Spec(_))));
}

#[test]
fn zero_data_without_growth_stays_zero() {
    let lv = LVCoefficients::constant(vec![1.0], vec![0.0], vec![vec![1.0]]).unwrap();
    let spec = lv_problem(lv, unit_grid(21), 1.0, |_| vec![0.0]);
    let traj = solve(&spec, &SchemeConfig::new(TimeStepper::ImexBe, 0.05).unwrap()).unwrap();
    assert!(traj.snapshots.iter().all(|f| f.sup_norm() == 0.0));
}

#[test]
fn diagonal_three_species_are_decoupled_logistics() {
    let beta = [1.0, 0.5, 2.0];
    let gamma = [1.0, 2.0, 0.5];
    let mut inter = vec![vec![0.0; 3]; 3];
    for k in 0..3 {
        inter[k][k] = gamma[k];
    }
    let lv = LVCoefficients::constant(vec![1e-4; 3], beta.to_vec(), inter).unwrap();
    let u0 = [0.2, 0.1, 0.3];
    let (t_end, dt) = (1.0, 1e-3);
    let spec = lv_problem(lv, unit_grid(41), t_end, |_| u0.to_vec());
    let traj = solve(&spec, &SchemeConfig::new(TimeStepper::Erk2, dt).unwrap().with_stride(1000)).unwrap();
    let last = traj.final_state();
    for k in 0..3 {
        let exact = logistic(beta[k], gamma[k], u0[k], t_end);
        // Away from the boundary layer the flat state follows the ODE.
        assert!((last.component(k)[20] - exact).abs() < 1e-6, "{k}: {} vs {exact}", last.component(k)[20]);
    }
}

#[test]
fn coefficient_evaluation_is_pure() {
    let lv = LVCoefficients::two_species(
        0.1,
        0.2,
        ScalarCoef::new(|t, x| 1.0 + 0.3 * (t * x[0]).sin()),
        ScalarCoef::of_time(|t| 1.0 + (-t).exp()),
        ScalarCoef::constant(0.4),
        ScalarCoef::constant(0.7),
        ScalarCoef::new(|_, x| x[0] * x[0]),
        ScalarCoef::constant(1.3),
    )
    .unwrap();
    let spec = lv_problem(lv, unit_grid(11), 1.0, |_| vec![0.0, 0.0]);
    let args = (0.37, [0.61], [0.83, 1.27], [0.1, -0.2]);
    let first = evaluate_coefficients(&spec, args.0, &args.1, &args.2, &args.3).unwrap();
    for _ in 0..1000 {
        let e = evaluate_coefficients(&spec, args.0, &args.1, &args.2, &args.3).unwrap();
        assert!(e.source.iter().zip(&first.source).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(e.diffusion, first.diffusion);
    }
}

#[test]
fn cutoff_examples() {
    let z = build_cutoff(4.0, 1.0).unwrap();
    assert_eq!(z.eval(&[0.0]), 1.0);
    assert_eq!(z.eval(&[4.0]), 0.0);
    let mid = z.radial(3.5);
    assert!(mid > 0.0 && mid < 1.0);
    let h = 1e-3;
    let d2 = (z.radial(3.5 + h) - 2.0 * mid + z.radial(3.5 - h)) / (h * h);
    assert!(d2.is_finite());
    assert!(matches!(build_cutoff(1.0, 1.0), Err(Error::Spec(_))));
}

#[test]
fn boundary_stays_zero_after_every_step() {
    let grid = Arc::new(Grid::new(SpatialDomain::rectangle((0.0, 1.0), (0.0, 2.0)).unwrap(), vec![11, 21]).unwrap());
    let lv = lv2((0.05, 0.1), [1.0, 1.0, 0.2, 0.8, 0.3, 1.0]);
    let spec = lv_problem(lv, grid, 0.5, |x| vec![(PI * x[0]).sin(), (0.5 * PI * x[1]).sin()]);
    let traj = solve(&spec, &SchemeConfig::new(TimeStepper::ImexCn, 0.01).unwrap().with_stride(1)).unwrap();
    assert!(traj.snapshots.iter().all(|f| f.boundary_max_abs() == 0.0));
}

proptest! {
    #[test]
    fn lv_source_vanishes_with_its_own_species(
        c in prop::array::uniform6(0.0f64..5.0),
        u in prop::array::uniform2(0.0f64..10.0),
        t in 0.0f64..3.0,
        x in 0.0f64..1.0,
        k in 0usize..2,
    ) {
        let spec = lv_problem(lv2((1.0, 1.0), c), unit_grid(5), 3.0, |_| vec![0.0, 0.0]);
        let mut state = u;
        state[k] = 0.0;
        let e = evaluate_coefficients(&spec, t, &[x], &state, &[0.0, 0.0]).unwrap();
        prop_assert_eq!(e.source[k].to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn lv_source_matches_the_classical_expansion(
        c in prop::array::uniform6(0.0f64..5.0),
        u in prop::array::uniform2(0.0f64..10.0),
    ) {
        let spec = lv_problem(lv2((1.0, 1.0), c), unit_grid(5), 1.0, |_| vec![0.0, 0.0]);
        let e = evaluate_coefficients(&spec, 0.0, &[0.5], &u, &[0.0, 0.0]).unwrap();
        let [beta, gamma, delta, rho, sigma, theta] = c;
        let c1 = u[0] * (beta - gamma * u[0] - delta * u[1]);
        let c2 = u[1] * (rho - sigma * u[0] - theta * u[1]);
        prop_assert!((e.source[0] - c1).abs() <= 1e-12 * (1.0 + c1.abs()));
        prop_assert!((e.source[1] - c2).abs() <= 1e-12 * (1.0 + c2.abs()));
    }

    #[test]
    fn cutoff_partitions_unity_and_decreases(r in 1.5f64..10.0, wfrac in 0.05f64..0.95) {
        let z = build_cutoff(r, wfrac * r).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let rho = 1.2 * r * i as f64 / 200.0;
            let v = z.radial(rho);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(v + (1.0 - v), 1.0);
            prop_assert!(v <= prev);
            prev = v;
        }
    }
}
