//! Grid-convergence studies: one solve per grid, run concurrently, reduced
//! to a [`ConvergenceReport`].

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::analysis::{
    build_convergence_report, error_l2, error_linf, error_linf_per_variable, ConvergenceReport,
    CriticalPrediction, ErrorRecord, Norm,
};
use crate::equations::{Gas, Primitive2};
use crate::error::Result;
use crate::grid::{Grid1D, Grid2D};
use crate::mms::{Euler1dMms, Euler2dSteadyMms, ScalarMms, Vortex};
use crate::residual::{sample_exact_2d, sample_exact_euler1d, sample_exact_scalar};
use crate::scheme::{Equation, SchemeConfig};
use crate::solvers::{
    integrate_vortex, solve_steady_burgers_1d, solve_steady_euler_1d, solve_steady_euler_2d,
    IterationRecord, SolveConfig, TimeIntegrationConfig,
};

pub const GRIDS_1D: [usize; 5] = [16, 32, 64, 128, 256];
pub const GRIDS_STEADY_2D: [usize; 6] = [49, 65, 81, 97, 113, 129];
pub const GRIDS_VORTEX: [usize; 6] = [48, 64, 80, 96, 112, 128];
pub const GRIDS_VORTEX_FULL: [usize; 14] = [
    48, 64, 80, 96, 112, 128, 144, 160, 176, 192, 208, 224, 240, 256,
];

/// Residual drop used by the 1D Euler studies. The explicit pseudo-time
/// solver leaves an iteration error of about `1e-6` after seven orders,
/// comparable to the discretization error on the finest grids.
pub const EULER1D_STUDY_DROP: f64 = 10.0;

/// Solver settings of the 1D Euler studies.
pub fn euler1d_study_config() -> SolveConfig {
    SolveConfig {
        residual_drop: EULER1D_STUDY_DROP,
        ..SolveConfig::euler1d()
    }
}

/// Half-width of the square vortex domain centred on the initial vortex.
pub const VORTEX_HALF_WIDTH: f64 = 5.0;

/// Result of one grid in a series.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRun {
    pub record: ErrorRecord,
    /// Solver iteration log; empty for time-accurate runs.
    pub log: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesOutcome {
    pub report: ConvergenceReport,
    /// Per-grid runs, coarse to fine, aligned with `report.records`.
    pub runs: Vec<GridRun>,
}

fn finish(
    mut runs: Vec<GridRun>,
    norm: Norm,
    critical: Option<CriticalPrediction>,
) -> Result<SeriesOutcome> {
    runs.sort_by(|a, b| b.record.h.total_cmp(&a.record.h));
    let report = build_convergence_report(
        runs.iter().map(|r| r.record.clone()).collect(),
        norm,
        critical,
    )?;
    Ok(SeriesOutcome { report, runs })
}

/// Steady Burgers with `epsilon = c_eps u_inf`, errors in the max norm.
pub fn burgers_series(scheme: &SchemeConfig, c_eps: f64, grids: &[usize]) -> Result<SeriesOutcome> {
    scheme.validate_for(Equation::Burgers)?;
    let mms = ScalarMms::burgers(c_eps);
    let runs = grids
        .par_iter()
        .map(|&n| -> Result<GridRun> {
            let grid = Grid1D::unit(n)?;
            let sol = solve_steady_burgers_1d(&SolveConfig::burgers(), scheme, &grid, &mms)?;
            let exact = sample_exact_scalar(&mms, &grid);
            let free = grid.free_nodes();
            let linf = error_linf(&sol.field, &exact, &free);
            let record = ErrorRecord {
                n,
                h: grid.h(),
                linf,
                l2: error_l2(&sol.field, &exact, &free),
                per_variable: vec![linf],
            };
            Ok(GridRun {
                record,
                log: sol.log,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let critical = (c_eps > 0.0).then(|| CriticalPrediction::new(c_eps, TAU));
    finish(runs, Norm::Linf, critical)
}

/// Steady 1D Euler; the max norm is the largest among the three
/// primitive variables, the L2 entry likewise.
pub fn euler1d_series(
    scheme: &SchemeConfig,
    mms: &Euler1dMms,
    grids: &[usize],
    solve: &SolveConfig,
) -> Result<SeriesOutcome> {
    scheme.validate_for(Equation::Euler1D)?;
    let gas = Gas::default();
    let runs = grids
        .par_iter()
        .map(|&n| -> Result<GridRun> {
            let grid = Grid1D::unit(n)?;
            let sol = solve_steady_euler_1d(solve, scheme, &gas, &grid, mms)?;
            let exact = sample_exact_euler1d(mms, &grid);
            let free = grid.free_nodes();
            let pick = |k: usize, f: &[crate::Primitive1]| -> Vec<f64> {
                f.iter().map(|s| s.to_vector()[k]).collect()
            };
            let num: Vec<_> = sol.field.iter().map(|s| s.to_vector()).collect();
            let ex: Vec<_> = exact.iter().map(|s| s.to_vector()).collect();
            let per_variable = error_linf_per_variable(&num, &ex, &free).to_vec();
            let l2 = (0..3)
                .map(|k| error_l2(&pick(k, &sol.field), &pick(k, &exact), &free))
                .fold(0.0, f64::max);
            let linf = per_variable.iter().copied().fold(0.0, f64::max);
            Ok(GridRun {
                record: ErrorRecord {
                    n,
                    h: grid.h(),
                    linf,
                    l2,
                    per_variable,
                },
                log: sol.log,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish(runs, Norm::Linf, None)
}

fn pressure_record(
    n: usize,
    h: f64,
    field: &[Primitive2],
    exact: &[Primitive2],
    free: &[usize],
) -> ErrorRecord {
    let p: Vec<f64> = field.iter().map(|s| s.p).collect();
    let pe: Vec<f64> = exact.iter().map(|s| s.p).collect();
    let num: Vec<_> = field.iter().map(|s| s.to_vector()).collect();
    let ex: Vec<_> = exact.iter().map(|s| s.to_vector()).collect();
    ErrorRecord {
        n,
        h,
        linf: error_linf(&p, &pe, free),
        l2: error_l2(&p, &pe, free),
        per_variable: error_linf_per_variable(&num, &ex, free).to_vec(),
    }
}

/// Steady 2D manufactured solution on the unit square; pressure errors,
/// designated norm L-infinity.
pub fn euler2d_steady_series(
    scheme: &SchemeConfig,
    epsilon: f64,
    grids: &[usize],
    solve: &SolveConfig,
) -> Result<SeriesOutcome> {
    scheme.validate_for(Equation::Euler2D)?;
    let gas = Gas::default();
    let mms = Euler2dSteadyMms::new(epsilon);
    let runs = grids
        .par_iter()
        .map(|&n| -> Result<GridRun> {
            let grid = Grid2D::square(n, 0.0, 1.0)?;
            let sol = solve_steady_euler_2d(solve, scheme, &gas, &grid, &mms)?;
            let exact = sample_exact_2d(&grid, |x, y| Ok(mms.exact(x, y)))?;
            Ok(GridRun {
                record: pressure_record(n, grid.h(), &sol.field, &exact, &grid.free_nodes()),
                log: sol.log,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish(runs, Norm::Linf, None)
}

/// Vortex transport to `t_f`; pressure errors, designated norm L2.
pub fn vortex_series(
    scheme: &SchemeConfig,
    strength: f64,
    grids: &[usize],
    ti: &TimeIntegrationConfig,
) -> Result<SeriesOutcome> {
    scheme.validate_for(Equation::Euler2D)?;
    let gas = Gas::default();
    let vortex = Vortex::new(strength);
    let runs = grids
        .par_iter()
        .map(|&n| -> Result<GridRun> {
            let grid = Grid2D::square(n, -VORTEX_HALF_WIDTH, VORTEX_HALF_WIDTH)?;
            let sol = integrate_vortex(ti, scheme, &gas, &grid, &vortex)?;
            let exact = sample_exact_2d(&grid, |x, y| vortex.exact(x, y, sol.final_time))?;
            Ok(GridRun {
                record: pressure_record(n, grid.h(), &sol.field, &exact, &grid.free_nodes()),
                log: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish(runs, Norm::L2, None)
}
