//! Discrete-operator convergence, extra-term decay and L¹ bounds.

use fpme_core::fracops::{convdisc_gap, extra_term_bounds, l1_boundedness, FracParams};
use fpme_core::{JumpKernel, TestFunction};
use rayon::prelude::*;

use super::{fit, Runtime};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{Check, Comparison, ExperimentReport, Row};

const SLOPE_TOL: f64 = 0.3;
const GAP_REDUCTION: f64 = 4.0;
const L1_SPREAD: f64 = 0.01;

#[derive(Debug, Clone, Copy)]
struct PerN {
    gap: f64,
    y1: Option<f64>,
    y2: Option<f64>,
}

pub fn run_operator_suite(cfg: &ExperimentConfig, rt: &Runtime) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg);
    let ns = &cfg.n_list;
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let m = cfg.m;
    if m < 2 {
        report.notes.push("m = 1 has no extra terms; Y1 and Y2 are skipped".into());
    }
    for &gamma in &cfg.operators.gammas {
        let params = FracParams::new(gamma).map_err(HarnessError::stage("operators"))?;
        for g in cfg.test_function_list() {
            let label = g.label();
            let per_n = rt.install(|| {
                ns.par_iter()
                    .map(|&n| measure(&g, gamma, n, cfg.ring_size(n), m, cfg.horizon))
                    .collect::<Result<Vec<_>>>()
            })?;
            for (&n, v) in ns.iter().zip(&per_n) {
                report.rows.push(Row::new("convdisc").n(n).gamma(gamma).test_function(&label).metric("gap", v.gap));
                if let (Some(y1), Some(y2)) = (v.y1, v.y2) {
                    report.rows.push(
                        Row::new("extra_terms")
                            .n(n)
                            .gamma(gamma)
                            .m(m)
                            .test_function(&label)
                            .metric("y1", y1)
                            .metric("y2", y2),
                    );
                }
            }
            let tag = format!("gamma={gamma} G={label}");
            let gaps: Vec<f64> = per_n.iter().map(|v| v.gap).collect();
            if g.is_spatially_constant() {
                report.notes.push(format!("{tag}: spatially constant, every operator term vanishes"));
                let worst = gaps.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                report.checks.push(Check::new(
                    "operators.convdisc_trivial",
                    format!("{tag}: largest gap"),
                    worst,
                    Comparison::Below { limit: f64::MIN_POSITIVE },
                ));
                continue;
            }

            let mut f = fit("convdisc_gap", xs.clone(), gaps.clone(), None);
            f.gamma = Some(gamma);
            f.test_function = Some(label.clone());
            report.fits.push(f);
            if gaps.len() >= 2 {
                let worst = gaps.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max);
                report.checks.push(Check::new(
                    "operators.convdisc_decreasing",
                    format!("{tag}: largest ratio gap(n_next)/gap(n)"),
                    worst,
                    Comparison::Below { limit: 1.0 },
                ));
                report.checks.push(Check::new(
                    "operators.convdisc_reduction",
                    format!("{tag}: gap(n_max)/gap(n_min)"),
                    gaps[gaps.len() - 1] / gaps[0],
                    Comparison::Below { limit: 1.0 / GAP_REDUCTION },
                ));
            }

            if m >= 2 && ns.len() >= 2 {
                for (name, ys, predicted) in [
                    ("y1", per_n.iter().map(|v| v.y1.unwrap_or(0.0)).collect::<Vec<_>>(), params.y1_exponent()),
                    ("y2", per_n.iter().map(|v| v.y2.unwrap_or(0.0)).collect(), gamma - 2.0),
                ] {
                    let mut f = fit(name, xs.clone(), ys, Some(predicted));
                    f.gamma = Some(gamma);
                    f.m = Some(m);
                    f.test_function = Some(label.clone());
                    report.checks.push(Check::new(
                        &format!("operators.{name}_slope"),
                        format!("{tag} m={m}: log-log slope of {} against n", name.to_uppercase()),
                        f.slope.unwrap_or(f64::NAN),
                        Comparison::Near {
                            target: predicted,
                            tolerance: SLOPE_TOL,
                        },
                    ));
                    report.fits.push(f);
                }
            }

            let l1 = l1_boundedness(&g, ns, gamma, cfg.torus_length, cfg.horizon).map_err(HarnessError::stage("l1"))?;
            for (&n, &v) in ns.iter().zip(&l1.values) {
                report.rows.push(Row::new("l1").n(n).gamma(gamma).test_function(&label).metric("l1", v));
            }
            let lo = l1.values.iter().cloned().fold(f64::INFINITY, f64::min);
            report.checks.push(Check::new(
                "operators.l1_bounded",
                format!("{tag}: (max - min)/max of the L1 norm over n"),
                (l1.max - lo) / l1.max,
                Comparison::Below { limit: L1_SPREAD },
            ));
        }
    }
    Ok(report)
}

fn measure(g: &TestFunction, gamma: f64, n: usize, size: usize, m: u32, horizon: f64) -> Result<PerN> {
    let kernel = JumpKernel::new(gamma, size).map_err(HarnessError::stage("kernel"))?;
    let gap = convdisc_gap(g, &kernel, n, horizon).map_err(HarnessError::stage("convdisc"))?;
    let (y1, y2) = if m >= 2 {
        let e = extra_term_bounds(g, &kernel, n, m, horizon).map_err(HarnessError::stage("extra_terms"))?;
        (Some(e.y1), Some(e.y2))
    } else {
        (None, None)
    };
    Ok(PerN { gap, y1, y2 })
}
