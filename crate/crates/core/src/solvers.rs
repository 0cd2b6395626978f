//! Steady solvers and the time-accurate integrator.
//!
//! * Burgers 1D: defect correction with the exact Jacobian of the
//!   first-order scheme (a tridiagonal solve per iteration).
//! * Euler 1D: explicit SSP-RK3 in pseudo-time with a local time step.
//! * Euler 2D steady: Jacobian-free Newton-Krylov (FGMRES) preconditioned by
//!   symmetric Gauss-Seidel sweeps on the first-order Roe Jacobian, with
//!   continuation in the perturbation amplitude. The forced equilibria are
//!   unstable in pseudo-time, so plain defect correction does not settle.
//! * Vortex: SSP-RK3 in physical time, boundary layers pinned to the exact
//!   solution at each stage time.

use nalgebra::SVector;

use crate::analysis::error_l2;
use crate::equations::{Gas, Mat4, Primitive1, Primitive2, UnitNormal, Vec3, Vec4};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, Grid2D};
use crate::mms::{Euler1dMms, Euler2dSteadyMms, ScalarMms, Vortex};
use crate::numflux::{scalar_flux_umuscl_derivatives, Eigensystem2};
use crate::reconstruction::Reconstructable;
use crate::residual::{
    residual_1d_euler, residual_1d_scalar, residual_2d, sample_exact_2d, sample_exact_euler1d,
    sample_exact_scalar, sample_forcing_euler1d, sample_forcing_euler2d, sample_forcing_scalar,
};
use crate::scheme::SchemeConfig;

/// Iteration control for the steady solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Required reduction of the L1 residual, in orders of magnitude.
    pub residual_drop: f64,
    pub max_iterations: usize,
    /// Pseudo-time CFL number; `f64::INFINITY` disables the pseudo-time
    /// term. Implicit solvers scale it by the residual reduction so far.
    pub cfl: f64,
    pub cfl_max: f64,
    /// Symmetric Gauss-Seidel sweeps per first-order solve (2D only).
    pub linear_sweeps: usize,
    /// Krylov dimension of the 2D Newton step; 0 gives plain defect
    /// correction.
    pub krylov_dim: usize,
    /// Relative tolerance of the inexact Newton step.
    pub krylov_tol: f64,
    /// Initial number of amplitude-continuation stages (2D only); 0 or 1
    /// solves the target problem directly from the freestream.
    pub continuation_steps: usize,
}

impl SolveConfig {
    pub fn burgers() -> Self {
        Self {
            residual_drop: 9.0,
            max_iterations: 500,
            cfl: f64::INFINITY,
            cfl_max: f64::INFINITY,
            linear_sweeps: 0,
            krylov_dim: 0,
            krylov_tol: 0.0,
            continuation_steps: 0,
        }
    }

    pub fn euler1d() -> Self {
        Self {
            residual_drop: 7.0,
            max_iterations: 1_000_000,
            cfl: 0.99,
            cfl_max: 0.99,
            linear_sweeps: 0,
            krylov_dim: 0,
            krylov_tol: 0.0,
            continuation_steps: 0,
        }
    }

    pub fn euler2d() -> Self {
        Self {
            residual_drop: 7.0,
            max_iterations: 40,
            cfl: f64::INFINITY,
            cfl_max: f64::INFINITY,
            linear_sweeps: 4,
            krylov_dim: 30,
            krylov_tol: 1e-2,
            continuation_steps: 8,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.residual_drop > 0.0) {
            return Err(Error::Config(format!(
                "residual drop must be positive, got {}",
                self.residual_drop
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if !(self.cfl > 0.0) || self.cfl_max < self.cfl {
            return Err(Error::Config(format!(
                "invalid CFL settings {} (max {})",
                self.cfl, self.cfl_max
            )));
        }
        Ok(())
    }

    fn target(&self) -> f64 {
        10f64.powf(-self.residual_drop)
    }

    /// Switched evolution relaxation: the CFL grows as the residual falls.
    fn ramped_cfl(&self, ratio: f64) -> f64 {
        if !self.cfl.is_finite() {
            return self.cfl;
        }
        (self.cfl / ratio.max(f64::MIN_POSITIVE)).clamp(self.cfl, self.cfl_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeIntegrationConfig {
    pub dt: f64,
    pub steps: usize,
}

impl Default for TimeIntegrationConfig {
    fn default() -> Self {
        Self {
            dt: 0.001,
            steps: 1000,
        }
    }
}

impl TimeIntegrationConfig {
    pub fn final_time(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

/// One line of a solver's iteration log.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Continuation stage (always 0 for single-stage solves).
    pub stage: usize,
    pub iteration: usize,
    /// Mean absolute residual over free nodes, per equation.
    pub residual: Vec<f64>,
    /// Total L1 residual relative to the initial one.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadySolution<T> {
    pub field: Vec<T>,
    pub iterations: usize,
    pub final_ratio: f64,
    pub log: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VortexSolution {
    pub field: Vec<Primitive2>,
    pub final_time: f64,
    pub pressure_error_l2: f64,
}

fn l1_per_equation<const N: usize>(res: &[SVector<f64, N>], free: &[usize]) -> Vec<f64> {
    let mut sums = vec![0.0; N];
    for &i in free {
        for (k, s) in sums.iter_mut().enumerate() {
            *s += res[i][k].abs();
        }
    }
    let count = free.len().max(1) as f64;
    sums.iter().map(|s| s / count).collect()
}

/// Convergence bookkeeping shared by the steady solvers.
struct Monitor {
    /// Norm the ratios refer to; the first recorded norm unless preset.
    reference: Option<f64>,
    target: f64,
    stage: usize,
    log: Vec<IterationRecord>,
}

enum Status {
    Converged,
    Continue,
}

impl Monitor {
    fn new(config: &SolveConfig) -> Self {
        Self {
            reference: None,
            target: config.target(),
            stage: 0,
            log: Vec::new(),
        }
    }

    fn record(&mut self, iteration: usize, residual: Vec<f64>) -> Result<Status> {
        let total: f64 = residual.iter().sum();
        if !total.is_finite() {
            return Err(Error::Diverged {
                iteration,
                reason: "non-finite residual".into(),
            });
        }
        let reference = *self.reference.get_or_insert(total);
        let ratio = if reference > 0.0 {
            total / reference
        } else {
            0.0
        };
        self.log.push(IterationRecord {
            stage: self.stage,
            iteration,
            residual,
            ratio,
        });
        if ratio > 1e6 {
            return Err(Error::Diverged {
                iteration,
                reason: format!("residual grew by {ratio:e}"),
            });
        }
        Ok(if ratio <= self.target {
            Status::Converged
        } else {
            Status::Continue
        })
    }

    fn last_ratio(&self) -> f64 {
        self.log.last().map_or(f64::NAN, |r| r.ratio)
    }

    fn finish<T>(self, field: Vec<T>) -> SteadySolution<T> {
        let iterations = self.log.last().map_or(0, |r| r.iteration);
        SteadySolution {
            field,
            iterations,
            final_ratio: self.last_ratio(),
            log: self.log,
        }
    }
}

/// Tridiagonal matrix over the free nodes of a 1D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// `lower[k]` couples row `k` to `k-1` (`lower[0]` unused).
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// `upper[k]` couples row `k` to `k+1` (last entry unused).
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    /// Thomas algorithm; the matrix must not need pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let m = self.diag.len();
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut pivot = self.diag[0];
        for k in 0..m {
            if k > 0 {
                pivot = self.diag[k] - self.lower[k] * c[k - 1];
            }
            if pivot.abs() < 1e-300 || !pivot.is_finite() {
                return Err(Error::Diverged {
                    iteration: 0,
                    reason: format!("singular tridiagonal pivot at row {k}"),
                });
            }
            c[k] = self.upper[k] / pivot;
            d[k] = (rhs[k] - if k > 0 { self.lower[k] * d[k - 1] } else { 0.0 }) / pivot;
        }
        for k in (0..m.saturating_sub(1)).rev() {
            d[k] -= c[k] * d[k + 1];
        }
        Ok(d)
    }

    /// Column-wise weak diagonal dominance, which suffices for pivot-free
    /// elimination. An upwind operator is only row-dominant where the
    /// transport speed does not decrease downstream.
    pub fn is_diagonally_dominant(&self) -> bool {
        let m = self.diag.len();
        (0..m).all(|k| {
            let below = if k + 1 < m {
                self.lower[k + 1].abs()
            } else {
                0.0
            };
            let above = if k > 0 { self.upper[k - 1].abs() } else { 0.0 };
            self.diag[k].abs() * (1.0 + 1e-12) >= below + above
        })
    }
}

/// Exact Jacobian of the first-order (unreconstructed) scalar residual,
/// restricted to free nodes.
pub fn first_order_jacobian_1d(
    law: crate::equations::ScalarLaw,
    grid: &Grid1D,
    u: &[f64],
) -> Tridiagonal {
    let free = grid.free_nodes();
    let inv_h = 1.0 / grid.h();
    let m = free.len();
    let mut t = Tridiagonal {
        lower: vec![0.0; m],
        diag: vec![0.0; m],
        upper: vec![0.0; m],
    };
    for (k, &i) in free.iter().enumerate() {
        // face i+1/2 contributes +F, face i-1/2 contributes -F
        let (dl_right, dr_right) = scalar_flux_umuscl_derivatives(law, u[i], u[i + 1]);
        let (dl_left, dr_left) = scalar_flux_umuscl_derivatives(law, u[i - 1], u[i]);
        t.diag[k] = (dl_right - dr_left) * inv_h;
        t.upper[k] = dr_right * inv_h;
        t.lower[k] = -dl_left * inv_h;
    }
    t
}

/// Steady Burgers (or linear advection) manufactured problem.
pub fn solve_steady_burgers_1d(
    config: &SolveConfig,
    scheme: &SchemeConfig,
    grid: &Grid1D,
    mms: &ScalarMms,
) -> Result<SteadySolution<f64>> {
    config.validate()?;
    let law = mms.law;
    let free = grid.free_nodes();
    let forcing = sample_forcing_scalar(mms, grid);
    let mut u = sample_exact_scalar(mms, grid);
    for &i in &free {
        u[i] = 1.0;
    }
    let mut monitor = Monitor::new(config);
    let inv_h = 1.0 / grid.h();
    for iteration in 0.. {
        let res = residual_1d_scalar(scheme, law, grid, &u, Some(&forcing))?;
        let norm = free.iter().map(|&i| res[i].abs()).sum::<f64>() / free.len() as f64;
        if let Status::Converged = monitor.record(iteration, vec![norm])? {
            break;
        }
        if iteration >= config.max_iterations {
            return Err(Error::NotConverged {
                iterations: iteration,
                ratio: monitor.last_ratio(),
            });
        }
        let mut jac = first_order_jacobian_1d(law, grid, &u);
        let cfl = config.ramped_cfl(monitor.last_ratio());
        if cfl.is_finite() {
            for (k, &i) in free.iter().enumerate() {
                jac.diag[k] += law.wave_speed(u[i]).abs() * inv_h / cfl;
            }
        }
        let rhs: Vec<f64> = free.iter().map(|&i| -res[i]).collect();
        let du = jac.solve(&rhs).map_err(|_| Error::Diverged {
            iteration,
            reason: "singular Jacobian".into(),
        })?;
        for (k, &i) in free.iter().enumerate() {
            u[i] += du[k];
        }
    }
    Ok(monitor.finish(u))
}

/// SSP-RK3 step `u <- u + dt L(u)` with per-node `dt`. `after_stage(s, v)`
/// runs after stage `s` (0, 1, 2) and may overwrite entries of `v`.
pub fn ssp_rk3_step<T: Reconstructable>(
    u: &[T],
    dt: &[f64],
    mut operator: impl FnMut(&[T]) -> Result<Vec<T>>,
    mut after_stage: impl FnMut(usize, &mut [T]) -> Result<()>,
) -> Result<Vec<T>> {
    let l0 = operator(u)?;
    let mut u1: Vec<T> = u
        .iter()
        .zip(&l0)
        .zip(dt)
        .map(|((&a, &l), &d)| a + l * d)
        .collect();
    after_stage(0, &mut u1)?;
    let l1 = operator(&u1)?;
    let mut u2: Vec<T> = (0..u.len())
        .map(|i| u[i] * 0.75 + (u1[i] + l1[i] * dt[i]) * 0.25)
        .collect();
    after_stage(1, &mut u2)?;
    let l2 = operator(&u2)?;
    let mut next: Vec<T> = (0..u.len())
        .map(|i| u[i] * (1.0 / 3.0) + (u2[i] + l2[i] * dt[i]) * (2.0 / 3.0))
        .collect();
    after_stage(2, &mut next)?;
    Ok(next)
}

/// Steady 1D Euler manufactured problem by pseudo-time marching.
pub fn solve_steady_euler_1d(
    config: &SolveConfig,
    scheme: &SchemeConfig,
    gas: &Gas,
    grid: &Grid1D,
    mms: &Euler1dMms,
) -> Result<SteadySolution<Primitive1>> {
    config.validate()?;
    let free = grid.free_nodes();
    let forcing = sample_forcing_euler1d(mms, gas, grid)?;
    let mut w = sample_exact_euler1d(mms, grid);
    for &i in &free {
        w[i] = Primitive1::new(1.0, mms.u_inf, 1.0);
    }
    let mut u: Vec<Vec3> = w
        .iter()
        .map(|s| gas.prim_to_cons1(s))
        .collect::<Result<_>>()?;
    let h = grid.h();
    let mut monitor = Monitor::new(config);
    let mut dt = vec![0.0; grid.n()];
    for iteration in 0.. {
        let res = residual_1d_euler(scheme, gas, grid, &w, Some(&forcing))?;
        if let Status::Converged = monitor.record(iteration, l1_per_equation(&res, &free))? {
            break;
        }
        if iteration >= config.max_iterations {
            return Err(Error::NotConverged {
                iterations: iteration,
                ratio: monitor.last_ratio(),
            });
        }
        for &i in &free {
            dt[i] = config.cfl * h / (w[i].u.abs() + gas.sound_speed(w[i].rho, w[i].p));
        }
        let diverged = |e: Error| Error::Diverged {
            iteration,
            reason: e.to_string(),
        };
        let operator = |c: &[Vec3]| -> Result<Vec<Vec3>> {
            let prim: Vec<Primitive1> = c
                .iter()
                .map(|x| gas.cons_to_prim1(x))
                .collect::<Result<_>>()?;
            let r = residual_1d_euler(scheme, gas, grid, &prim, Some(&forcing))?;
            Ok(r.into_iter().map(|x| -x).collect())
        };
        u = ssp_rk3_step(&u, &dt, operator, |_, _| Ok(())).map_err(diverged)?;
        w = u
            .iter()
            .map(|c| gas.cons_to_prim1(c))
            .collect::<Result<_>>()
            .map_err(diverged)?;
    }
    Ok(monitor.finish(w))
}

/// First-order implicit operator for the 2D defect correction: one block
/// row per node, neighbors ordered W, E, S, N.
struct BlockSystem {
    diag_inv: Vec<Mat4>,
    offdiag: Vec<[Mat4; 4]>,
}

const WEST: usize = 0;
const EAST: usize = 1;
const SOUTH: usize = 2;
const NORTH: usize = 3;

fn neighbor(grid: &Grid2D, idx: usize, side: usize) -> usize {
    match side {
        WEST => idx - 1,
        EAST => idx + 1,
        SOUTH => idx - grid.nx(),
        _ => idx + grid.nx(),
    }
}

impl BlockSystem {
    fn assemble(gas: &Gas, grid: &Grid2D, w: &[Primitive2], cfl: f64) -> Result<Self> {
        let n = grid.len();
        let inv_h = 1.0 / grid.h();
        let mut diag = vec![Mat4::zeros(); n];
        let mut offdiag = vec![[Mat4::zeros(); 4]; n];
        let jac_x: Vec<Mat4> = w
            .iter()
            .map(|s| gas.euler2d_flux_jacobian_conservative(s, UnitNormal::X))
            .collect::<Result<_>>()?;
        let jac_y: Vec<Mat4> = w
            .iter()
            .map(|s| gas.euler2d_flux_jacobian_conservative(s, UnitNormal::Y))
            .collect::<Result<_>>()?;
        let mut face = |a: usize,
                        b: usize,
                        normal: UnitNormal,
                        a_side: usize,
                        b_side: usize,
                        jac: &[Mat4]|
         -> Result<()> {
            let avg = gas.roe_average2(&w[a], &w[b])?;
            let abs_a = Eigensystem2::new(gas, &avg, normal).dissipation_matrix();
            let d_left = (jac[a] + abs_a) * (0.5 * inv_h);
            let d_right = (jac[b] - abs_a) * (0.5 * inv_h);
            let (ia, ja) = grid.ij(a);
            let (ib, jb) = grid.ij(b);
            if !grid.is_pinned(ia, ja) {
                diag[a] += d_left;
                offdiag[a][b_side] += d_right;
            }
            if !grid.is_pinned(ib, jb) {
                diag[b] -= d_right;
                offdiag[b][a_side] -= d_left;
            }
            Ok(())
        };
        let (nx, ny) = (grid.nx(), grid.ny());
        for j in 2..ny - 2 {
            for i in 1..=nx - 3 {
                let a = grid.index(i, j);
                face(a, a + 1, UnitNormal::X, WEST, EAST, &jac_x)?;
            }
        }
        for j in 1..=ny - 3 {
            for i in 2..nx - 2 {
                let a = grid.index(i, j);
                face(a, a + nx, UnitNormal::Y, SOUTH, NORTH, &jac_y)?;
            }
        }
        let mut diag_inv = vec![Mat4::identity(); n];
        for idx in grid.free_nodes() {
            let s = &w[idx];
            let c = gas.sound_speed(s.rho, s.p);
            let radius = (s.u.abs() + s.v.abs() + 2.0 * c) * inv_h;
            let mut d = diag[idx];
            if cfl.is_finite() {
                d += Mat4::identity() * (radius / cfl);
            }
            diag_inv[idx] = d.try_inverse().ok_or_else(|| Error::Diverged {
                iteration: 0,
                reason: format!("singular diagonal block at node {idx}"),
            })?;
        }
        Ok(Self { diag_inv, offdiag })
    }

    /// Approximately solves `A x = rhs` by symmetric Gauss-Seidel sweeps.
    fn solve(&self, grid: &Grid2D, free: &[usize], rhs: &[Vec4], sweeps: usize) -> Vec<Vec4> {
        let mut x = vec![Vec4::zeros(); grid.len()];
        let mask = grid.pinned_mask();
        let relax = |x: &mut Vec<Vec4>, idx: usize| {
            let mut r = rhs[idx];
            for side in 0..4 {
                let nb = neighbor(grid, idx, side);
                if !mask[nb] {
                    r -= self.offdiag[idx][side] * x[nb];
                }
            }
            x[idx] = self.diag_inv[idx] * r;
        };
        for _ in 0..sweeps.max(1) {
            for &idx in free {
                relax(&mut x, idx);
            }
            for &idx in free.iter().rev() {
                relax(&mut x, idx);
            }
        }
        x
    }
}

/// Steady 2D Euler manufactured problem by defect correction.
pub fn solve_steady_euler_2d(
    config: &SolveConfig,
    scheme: &SchemeConfig,
    gas: &Gas,
    grid: &Grid2D,
    mms: &Euler2dSteadyMms,
) -> Result<SteadySolution<Primitive2>> {
    config.validate()?;
    let mut w = sample_exact_2d(grid, |x, y| Ok(mms.exact(x, y)))?;
    let freestream = Primitive2::new(1.0, mms.u_inf, mms.v_inf, 1.0);
    let free = grid.free_nodes();
    for &i in &free {
        w[i] = freestream;
    }
    if config.continuation_steps <= 1 {
        return solve_steady_euler_2d_from(config, scheme, gas, grid, mms, w);
    }
    // Large amplitudes are reached through a sequence of scaled problems;
    // convergence of the last one is still measured against the residual
    // of the freestream field.
    let forcing = sample_forcing_euler2d(mms, gas, grid)?;
    let res0 = residual_2d(scheme, gas, grid, &w, Some(&forcing))?;
    let reference: f64 = l1_per_equation(&res0, &free).iter().sum();
    let intermediate = SolveConfig {
        residual_drop: INTERMEDIATE_DROP,
        ..*config
    };
    let mut theta = 0.0;
    let mut step = 1.0 / config.continuation_steps as f64;
    let mut stage = 0;
    let mut log = Vec::new();
    let mut iterations = 0;
    loop {
        let trial = (theta + step).min(1.0);
        let last = trial >= 1.0;
        let scaled = if last { *mms } else { mms.scaled(trial) };
        let (cfg, preset) = if last {
            (config, Some(reference))
        } else {
            (&intermediate, None)
        };
        match newton_stage(cfg, scheme, gas, grid, &scaled, w.clone(), preset, stage) {
            Ok(sol) => {
                iterations += sol.iterations;
                log.extend(sol.log);
                w = sol.field;
                if last {
                    let final_ratio = log.last().map_or(0.0, |r: &IterationRecord| r.ratio);
                    return Ok(SteadySolution {
                        field: w,
                        iterations,
                        final_ratio,
                        log,
                    });
                }
                theta = trial;
                stage += 1;
                step = step.min(1.0 - theta);
            }
            Err(e @ Error::Config(_)) => return Err(e),
            Err(e) => {
                step *= 0.5;
                if step < MIN_CONTINUATION_STEP {
                    return Err(e);
                }
            }
        }
    }
}

/// Residual reduction required of intermediate continuation stages.
const INTERMEDIATE_DROP: f64 = 3.0;
const MIN_CONTINUATION_STEP: f64 = 1.0 / 512.0;

/// As [`solve_steady_euler_2d`] without continuation, starting from
/// `initial` (pinned entries are reset to the exact solution).
pub fn solve_steady_euler_2d_from(
    config: &SolveConfig,
    scheme: &SchemeConfig,
    gas: &Gas,
    grid: &Grid2D,
    mms: &Euler2dSteadyMms,
    initial: Vec<Primitive2>,
) -> Result<SteadySolution<Primitive2>> {
    config.validate()?;
    newton_stage(config, scheme, gas, grid, mms, initial, None, 0)
}

#[allow(clippy::too_many_arguments)]
fn newton_stage(
    config: &SolveConfig,
    scheme: &SchemeConfig,
    gas: &Gas,
    grid: &Grid2D,
    mms: &Euler2dSteadyMms,
    initial: Vec<Primitive2>,
    reference: Option<f64>,
    stage: usize,
) -> Result<SteadySolution<Primitive2>> {
    if initial.len() != grid.len() {
        return Err(Error::Config(format!(
            "initial field has {} entries, grid has {}",
            initial.len(),
            grid.len()
        )));
    }
    let free = grid.free_nodes();
    let forcing = sample_forcing_euler2d(mms, gas, grid)?;
    let mut w = initial;
    for idx in grid.pinned_nodes() {
        let (i, j) = grid.ij(idx);
        let [x, y] = grid.xy(i, j);
        w[idx] = mms.exact(x, y);
    }
    let mut monitor = Monitor {
        reference,
        stage,
        ..Monitor::new(config)
    };
    let inv_h = 1.0 / grid.h();
    for iteration in 0.. {
        let res = residual_2d(scheme, gas, grid, &w, Some(&forcing))?;
        if let Status::Converged = monitor.record(iteration, l1_per_equation(&res, &free))? {
            break;
        }
        if iteration >= config.max_iterations {
            return Err(Error::NotConverged {
                iterations: iteration,
                ratio: monitor.last_ratio(),
            });
        }
        let diverged = |e: Error| Error::Diverged {
            iteration,
            reason: e.to_string(),
        };
        let cfl = config.ramped_cfl(monitor.last_ratio());
        let system = BlockSystem::assemble(gas, grid, &w, cfl).map_err(diverged)?;
        let rhs: Vec<Vec4> = res.iter().map(|r| -r).collect();
        let du = if config.krylov_dim == 0 {
            system.solve(grid, &free, &rhs, config.linear_sweeps)
        } else {
            // pseudo-time diagonal consistent with the preconditioner
            let shift: Vec<f64> = free
                .iter()
                .map(|&i| {
                    let s = &w[i];
                    (s.u.abs() + s.v.abs() + 2.0 * gas.sound_speed(s.rho, s.p)) * inv_h / cfl
                })
                .collect();
            let u0: Vec<Vec4> = w
                .iter()
                .map(|s| gas.prim_to_cons2(s))
                .collect::<Result<_>>()
                .map_err(diverged)?;
            let scale = 1.0 + norm(&flatten(&u0, &free));
            let apply = |v: &[f64]| -> Result<Vec<f64>> {
                let vn = norm(v);
                if vn == 0.0 {
                    return Ok(vec![0.0; v.len()]);
                }
                let sigma = f64::EPSILON.sqrt() * scale / vn;
                let mut wp = w.clone();
                for (k, &i) in free.iter().enumerate() {
                    let dv = Vec4::from_column_slice(&v[4 * k..4 * k + 4]);
                    wp[i] = gas.cons_to_prim2(&(u0[i] + dv * sigma))?;
                }
                let rp = residual_2d(scheme, gas, grid, &wp, Some(&forcing))?;
                let mut out = Vec::with_capacity(v.len());
                for (k, &i) in free.iter().enumerate() {
                    let jv = (rp[i] - res[i]) / sigma;
                    for c in 0..4 {
                        out.push(jv[c] + shift[k] * v[4 * k + c]);
                    }
                }
                Ok(out)
            };
            let precondition = |v: &[f64]| -> Vec<f64> {
                let x = system.solve(
                    grid,
                    &free,
                    &unflatten(v, &free, grid.len()),
                    config.linear_sweeps,
                );
                flatten(&x, &free)
            };
            let b = flatten(&rhs, &free);
            let x = fgmres(
                &b,
                config.krylov_dim,
                config.krylov_tol,
                apply,
                precondition,
            )
            .map_err(diverged)?;
            unflatten(&x, &free, grid.len())
        };
        let admissible = |trial: &[Primitive2]| residual_2d(scheme, gas, grid, trial, None).is_ok();
        w = apply_update(gas, &w, &du, &free, admissible).map_err(diverged)?;
    }
    Ok(monitor.finish(w))
}

/// Largest relative change of density or pressure accepted per update.
const MAX_RELATIVE_CHANGE: f64 = 0.2;

/// `w + alpha du` in conservative variables, halving `alpha` until every
/// node changes density and pressure by at most [`MAX_RELATIVE_CHANGE`]
/// and `admissible` accepts the result.
fn apply_update(
    gas: &Gas,
    w: &[Primitive2],
    du: &[Vec4],
    free: &[usize],
    mut admissible: impl FnMut(&[Primitive2]) -> bool,
) -> Result<Vec<Primitive2>> {
    let mut alpha = 1.0;
    for _ in 0..30 {
        let mut next = w.to_vec();
        let mut ok = true;
        for &i in free {
            match gas.cons_to_prim2(&(gas.prim_to_cons2(&w[i])? + du[i] * alpha)) {
                Ok(s)
                    if (s.rho - w[i].rho).abs() <= MAX_RELATIVE_CHANGE * w[i].rho
                        && (s.p - w[i].p).abs() <= MAX_RELATIVE_CHANGE * w[i].p =>
                {
                    next[i] = s
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && admissible(&next) {
            return Ok(next);
        }
        alpha *= 0.5;
    }
    Err(Error::Diverged {
        iteration: 0,
        reason: "no admissible update along the Newton direction".into(),
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn flatten(field: &[Vec4], free: &[usize]) -> Vec<f64> {
    free.iter()
        .flat_map(|&i| field[i].iter().copied().collect::<Vec<_>>())
        .collect()
}

fn unflatten(v: &[f64], free: &[usize], len: usize) -> Vec<Vec4> {
    let mut out = vec![Vec4::zeros(); len];
    for (k, &i) in free.iter().enumerate() {
        out[i] = Vec4::from_column_slice(&v[4 * k..4 * k + 4]);
    }
    out
}

/// One cycle of flexible, right-preconditioned GMRES for `A x = b`
/// starting from `x = 0`; stops at `|b - A x| <= tol |b|`.
pub fn fgmres(
    b: &[f64],
    dim: usize,
    tol: f64,
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    mut precondition: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<Vec<f64>> {
    let n = b.len();
    let beta = norm(b);
    let mut x = vec![0.0; n];
    if beta == 0.0 || dim == 0 {
        return Ok(x);
    }
    let mut basis: Vec<Vec<f64>> = vec![b.iter().map(|v| v / beta).collect()];
    let mut search: Vec<Vec<f64>> = Vec::with_capacity(dim);
    // Hessenberg columns after Givens rotations, plus the rotations
    let mut hess: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let mut rot: Vec<(f64, f64)> = Vec::with_capacity(dim);
    let mut g = vec![beta];
    for j in 0..dim {
        let z = precondition(&basis[j]);
        let mut v = apply(&z)?;
        search.push(z);
        let mut h = vec![0.0; j + 2];
        for (i, q) in basis.iter().enumerate() {
            h[i] = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vk, qk) in v.iter_mut().zip(q) {
                *vk -= h[i] * qk;
            }
        }
        let vnorm = norm(&v);
        h[j + 1] = vnorm;
        for (i, &(c, s)) in rot.iter().enumerate() {
            let (a, b) = (h[i], h[i + 1]);
            h[i] = c * a + s * b;
            h[i + 1] = -s * a + c * b;
        }
        let r = h[j].hypot(h[j + 1]);
        let (c, s) = if r == 0.0 {
            (1.0, 0.0)
        } else {
            (h[j] / r, h[j + 1] / r)
        };
        let breakdown = vnorm <= 1e-14 * r;
        h[j] = r;
        h[j + 1] = 0.0;
        rot.push((c, s));
        g.push(-s * g[j]);
        g[j] *= c;
        hess.push(h);
        if g[j + 1].abs() <= tol * beta || breakdown {
            break;
        }
        basis.push(v.iter().map(|x| x / vnorm).collect());
    }
    // back substitution on the rotated Hessenberg system
    let m = hess.len();
    let mut y = vec![0.0; m];
    for i in (0..m).rev() {
        let mut acc = g[i];
        for k in i + 1..m {
            acc -= hess[k][i] * y[k];
        }
        y[i] = acc / hess[i][i];
    }
    for (k, z) in search.iter().enumerate() {
        for (xi, zi) in x.iter_mut().zip(z) {
            *xi += y[k] * zi;
        }
    }
    Ok(x)
}

/// Convects the vortex to `t_f` and measures the pressure error.
pub fn integrate_vortex(
    ti: &TimeIntegrationConfig,
    scheme: &SchemeConfig,
    gas: &Gas,
    grid: &Grid2D,
    vortex: &Vortex,
) -> Result<VortexSolution> {
    if !(ti.dt > 0.0) || ti.steps == 0 {
        return Err(Error::Config(format!(
            "invalid time integration dt={} steps={}",
            ti.dt, ti.steps
        )));
    }
    let pinned = grid.pinned_nodes();
    let free = grid.free_nodes();
    let exact_cons = |t: f64| -> Result<Vec<Vec4>> {
        sample_exact_2d(grid, |x, y| vortex.exact(x, y, t))?
            .iter()
            .map(|s| gas.prim_to_cons2(s))
            .collect()
    };
    let mut u = exact_cons(0.0)?;
    let dt = vec![ti.dt; grid.len()];
    for step in 0..ti.steps {
        let t = step as f64 * ti.dt;
        let failed = |e: Error| Error::Diverged {
            iteration: step,
            reason: e.to_string(),
        };
        let operator = |c: &[Vec4]| -> Result<Vec<Vec4>> {
            let prim: Vec<Primitive2> = c
                .iter()
                .map(|x| gas.cons_to_prim2(x))
                .collect::<Result<_>>()?;
            Ok(residual_2d(scheme, gas, grid, &prim, None)?
                .into_iter()
                .map(|x| -x)
                .collect())
        };
        let pin = |stage: usize, v: &mut [Vec4]| -> Result<()> {
            let ts = t + [ti.dt, 0.5 * ti.dt, ti.dt][stage];
            for &idx in &pinned {
                let (i, j) = grid.ij(idx);
                let [x, y] = grid.xy(i, j);
                v[idx] = gas.prim_to_cons2(&vortex.exact(x, y, ts)?)?;
            }
            Ok(())
        };
        u = ssp_rk3_step(&u, &dt, operator, pin).map_err(failed)?;
    }
    let final_time = ti.final_time();
    let field: Vec<Primitive2> = u
        .iter()
        .map(|c| gas.cons_to_prim2(c))
        .collect::<Result<_>>()?;
    let exact = sample_exact_2d(grid, |x, y| vortex.exact(x, y, final_time))?;
    let p: Vec<f64> = field.iter().map(|s| s.p).collect();
    let pe: Vec<f64> = exact.iter().map(|s| s.p).collect();
    Ok(VortexSolution {
        pressure_error_l2: error_l2(&p, &pe, &free),
        field,
        final_time,
    })
}
