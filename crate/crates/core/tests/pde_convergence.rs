//! Refinement studies for the FPME solver.

use fpme_core::pde::{energy_norms, exact_linear_solution, range_check, solve_fpme, weak_residual_f, SolverConfig};
use fpme_core::{ProfileSpec, TestFunction};

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn uniform_times(horizon: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| horizon * i as f64 / steps as f64).collect()
}

#[test]
fn rk4_is_fourth_order_in_time() {
    let g = ProfileSpec::default();
    let base = SolverConfig::rk4(1.0, 1, 64, 2.0).unwrap();
    let exact = exact_linear_solution(&g, base.symbol, 0.5, 64, 2.0).unwrap();
    let err = |scale: f64| {
        let mut cfg = base.clone();
        cfg.dt *= scale;
        sup(&solve_fpme(&g, &cfg, &[0.5]).unwrap()[0].values, &exact.values)
    };
    let ratio = err(1.0) / err(0.5);
    assert!((ratio - 16.0).abs() < 0.3 * 16.0, "{ratio}");
}

#[test]
fn linear_solver_matches_multiplier_solution() {
    let g = ProfileSpec::default();
    let cfg = SolverConfig::rk4(1.0, 1, 1024, 2.0).unwrap();
    let num = solve_fpme(&g, &cfg, &[0.5]).unwrap();
    let exact = exact_linear_solution(&g, cfg.symbol, 0.5, 1024, 2.0).unwrap();
    assert!(sup(&num[0].values, &exact.values) < 1e-8);
}

#[test]
fn weak_residual_quarters_under_refinement() {
    let g = ProfileSpec::default();
    let test = TestFunction::gaussian_bump(1.0, 0.2);
    let residual = |grid: usize, steps: usize| {
        let cfg = SolverConfig::rk4(1.0, 2, grid, 2.0).unwrap();
        let rho = solve_fpme(&g, &cfg, &uniform_times(0.5, steps)).unwrap();
        weak_residual_f(&rho, &test, &g, 0.5, 2, cfg.symbol).unwrap()
    };
    let coarse = residual(256, 20);
    let fine = residual(512, 40);
    assert!(coarse.abs() < 1e-4, "{coarse}");
    assert!(coarse.abs() / fine.abs() > 3.0, "{coarse} {fine}");
}

#[test]
fn energy_integrals_stable_under_refinement() {
    let g = ProfileSpec::default();
    for m in 1..=2 {
        let energy = |grid: usize| {
            let cfg = SolverConfig::rk4(1.0, m, grid, 2.0).unwrap();
            let rho = solve_fpme(&g, &cfg, &uniform_times(1.0, 50)).unwrap();
            energy_norms(&rho, 0.3, 1.0, m).unwrap()
        };
        let (a, b) = (energy(1024), energy(2048));
        assert!(a.l2_dist.is_finite() && a.sobolev_integral.is_finite());
        assert!((a.l2_dist - b.l2_dist).abs() < 0.02 * b.l2_dist);
        assert!((a.sobolev_integral - b.sobolev_integral).abs() < 0.02 * b.sobolev_integral);
    }
}

#[test]
fn nonlinear_bump_stays_in_unit_interval() {
    let g = ProfileSpec::default();
    let cfg = SolverConfig::rk4(1.0, 2, 512, 2.0).unwrap();
    for f in solve_fpme(&g, &cfg, &uniform_times(1.0, 10)).unwrap() {
        let (lo, hi) = range_check(&f);
        assert!(lo >= -1e-6 && hi <= 1.0 + 1e-6);
    }
}
