//! Refinement studies of the continuum solver.

use fpme_core::pde::{energy_norms, exact_linear_solution, range_check, solve_fpme, weak_residual_f, DensityField, FracSymbol, SolverConfig};
use fpme_core::ProfileSpec;

use super::Runtime;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{Check, Comparison, ExperimentReport, Row};

const ORDER_TARGET: f64 = 16.0;
const ORDER_TOL: f64 = 0.3 * ORDER_TARGET;
const EXACT_TOL: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-4;
const RESIDUAL_SHRINK: f64 = 3.0;
const ENERGY_DRIFT: f64 = 0.02;
const RANGE_SLACK: f64 = 1e-6;

/// Solver output at `times`, through the stage cache.
pub(crate) fn solve_cached(rt: &Runtime, profile: &ProfileSpec, solver: &SolverConfig, times: &[f64]) -> Result<Vec<DensityField>> {
    rt.cache.get_or_compute("pde", &(profile, solver, times), || {
        solve_fpme(profile, solver, times).map_err(HarnessError::stage("pde"))
    })
}

/// Multiplier solution at `times` for m = 1, through the stage cache.
pub(crate) fn exact_cached(
    rt: &Runtime,
    profile: &ProfileSpec,
    symbol: FracSymbol,
    grid: usize,
    torus_length: f64,
    times: &[f64],
) -> Result<Vec<DensityField>> {
    rt.cache.get_or_compute("pde-exact", &(profile, symbol, grid, torus_length, times), || {
        times
            .iter()
            .map(|&t| exact_linear_solution(profile, symbol, t, grid, torus_length))
            .collect::<fpme_core::Result<Vec<_>>>()
            .map_err(HarnessError::stage("pde-exact"))
    })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn uniform_times(horizon: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| horizon * i as f64 / steps as f64).collect()
}

fn solver(cfg: &ExperimentConfig, m: u32, grid: usize) -> Result<SolverConfig> {
    SolverConfig::rk4(cfg.gamma, m, grid, cfg.torus_length).map_err(HarnessError::stage("pde"))
}

pub fn run_pde_suite(cfg: &ExperimentConfig, rt: &Runtime) -> Result<ExperimentReport> {
    let p = &cfg.pde;
    let (gamma, t, len) = (cfg.gamma, cfg.horizon, cfg.torus_length);
    let profile = &cfg.profile;
    let mut report = ExperimentReport::new(cfg);

    // time order: m = 1 against the multiplier solution at dt and dt/2
    let base = solver(cfg, 1, p.order_grid)?;
    let exact = exact_cached(rt, profile, base.symbol, p.order_grid, len, &[t])?;
    let mut errs = [0.0; 2];
    for (k, scale) in [1.0, 0.5].into_iter().enumerate() {
        let mut s = base.clone();
        s.dt *= scale;
        errs[k] = sup_diff(&solve_cached(rt, profile, &s, &[t])?[0].values, &exact[0].values);
    }
    let ratio = errs[0] / errs[1];
    report.rows.push(
        Row::new("pde_order")
            .n(p.order_grid)
            .gamma(gamma)
            .m(1)
            .t(t)
            .metric("dt", base.dt)
            .metric("error_dt", errs[0])
            .metric("error_half_dt", errs[1])
            .metric("ratio", ratio),
    );
    report.checks.push(Check::new(
        "pde.rk4_order",
        format!("grid {}: error(dt)/error(dt/2) at t={t}", p.order_grid),
        ratio,
        Comparison::Near {
            target: ORDER_TARGET,
            tolerance: ORDER_TOL,
        },
    ));

    // m = 1 at the stable step against the multiplier solution
    let s = solver(cfg, 1, p.exact_grid)?;
    let num = solve_cached(rt, profile, &s, &[t])?;
    let exact = exact_cached(rt, profile, s.symbol, p.exact_grid, len, &[t])?;
    let err = sup_diff(&num[0].values, &exact[0].values);
    report.rows.push(Row::new("pde_exact").n(p.exact_grid).gamma(gamma).m(1).t(t).metric("dt", s.dt).metric("sup_error", err));
    report.checks.push(Check::new(
        "pde.linear_exact",
        format!("grid {}: sup |rho - exact| at t={t}", p.exact_grid),
        err,
        Comparison::Below { limit: EXACT_TOL },
    ));

    // weak residual under simultaneous refinement of dt and dx
    let m = cfg.m;
    let runs = [(p.residual_grid, p.residual_steps), (2 * p.residual_grid, 2 * p.residual_steps)];
    let mut fields = Vec::new();
    for &(grid, steps) in &runs {
        let s = solver(cfg, m, grid)?;
        fields.push((s.symbol, solve_cached(rt, profile, &s, &uniform_times(t, steps))?));
    }
    for g in cfg.test_function_list() {
        let label = g.label();
        let mut res = [0.0; 2];
        for (k, ((grid, steps), (symbol, rho))) in runs.iter().zip(&fields).enumerate() {
            res[k] = weak_residual_f(rho, &g, profile, t, m, *symbol).map_err(HarnessError::stage("weak_residual"))?;
            report.rows.push(
                Row::new("weak_residual")
                    .n(*grid)
                    .gamma(gamma)
                    .m(m)
                    .t(t)
                    .test_function(&label)
                    .metric("steps", *steps as f64)
                    .metric("residual", res[k]),
            );
        }
        let tag = format!("m={m} G={label}");
        report.checks.push(Check::new(
            "pde.weak_residual",
            format!("{tag}: |F| on grid {} with {} steps", runs[0].0, runs[0].1),
            res[0].abs(),
            Comparison::Below { limit: RESIDUAL_TOL },
        ));
        report.checks.push(Check::new(
            "pde.weak_residual_shrink",
            format!("{tag}: |F coarse|/|F fine| under x2 refinement of dt and dx"),
            res[0].abs() / res[1].abs(),
            Comparison::Above { limit: RESIDUAL_SHRINK },
        ));
    }
    let (lo, hi) = fields
        .iter()
        .flat_map(|(_, rho)| rho.iter().map(range_check))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (l, h)| (a.min(l), b.max(h)));
    report.checks.push(Check::new(
        "pde.range",
        format!("m={m}: distance of the solution range [{lo:.4}, {hi:.4}] outside [0, 1]"),
        (-lo).max(hi - 1.0).max(0.0),
        Comparison::Below { limit: RANGE_SLACK },
    ));

    // energy integrals under grid refinement
    let times = uniform_times(p.energy_horizon, p.energy_outputs);
    let b = profile.background();
    for &em in &p.energy_ms {
        let mut norms = Vec::new();
        for &grid in &p.energy_grids {
            let s = solver(cfg, em, grid)?;
            let rho = solve_cached(rt, profile, &s, &times)?;
            let e = energy_norms(&rho, b, gamma, em).map_err(HarnessError::stage("energy"))?;
            report.rows.push(
                Row::new("energy")
                    .n(grid)
                    .gamma(gamma)
                    .m(em)
                    .t(p.energy_horizon)
                    .metric("l2_dist", e.l2_dist)
                    .metric("sobolev_integral", e.sobolev_integral),
            );
            norms.push((grid, e));
        }
        for w in norms.windows(2) {
            let ((g0, a), (g1, c)) = (&w[0], &w[1]);
            for (name, x, y) in [("l2_dist", a.l2_dist, c.l2_dist), ("sobolev_integral", a.sobolev_integral, c.sobolev_integral)] {
                report.checks.push(Check::new(
                    "pde.energy_stable",
                    format!("m={em}: relative change of {name} from grid {g0} to {g1}"),
                    (x - y).abs() / y.abs(),
                    Comparison::Below { limit: ENERGY_DRIFT },
                ));
            }
        }
    }
    Ok(report)
}
