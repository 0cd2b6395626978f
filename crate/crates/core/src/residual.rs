//! Steady residual assembly
//! `Res_i = (F_{i+1/2} - F_{i-1/2})/h [+ (G_{j+1/2} - G_{j-1/2})/h] - s_i`.
//!
//! Each face flux is evaluated once and scattered with opposite signs to
//! its two nodes. Pinned nodes receive no contribution, so their residual
//! is identically zero.

use crate::equations::{Gas, Primitive1, Primitive2, ScalarLaw, UnitNormal, Vec3, Vec4};
use crate::error::{Error, Result};
use crate::grid::{Boundary1D, Grid1D, Grid2D};
use crate::mms::{Euler1dMms, Euler2dSteadyMms, ScalarMms};
use crate::numflux::{roe_flux_1d, roe_flux_2d, scalar_flux_fsr, scalar_flux_umuscl};
use crate::reconstruction::{
    flux_reconstruct_pair_1d, kappa_face, kappa_reconstruct_pair_1d, node_gradients_2d,
    Reconstructable, Stencil4,
};
use crate::scheme::{Equation, Reconstruction, SchemeConfig};

fn check_len(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(Error::Config(format!(
            "{what} has {got} entries, grid has {expected} nodes"
        )));
    }
    Ok(())
}

/// Stencils `[i-1, i, i+1, i+2]` of every face that touches a free node.
fn face_stencils(grid: &Grid1D) -> Vec<[usize; 4]> {
    let n = grid.n();
    match grid.boundary() {
        Boundary1D::Pinned => (1..=n - 3).map(|i| [i - 1, i, i + 1, i + 2]).collect(),
        Boundary1D::Periodic => (0..n)
            .map(|i| [(i + n - 1) % n, i, (i + 1) % n, (i + 2) % n])
            .collect(),
    }
}

fn assemble_1d<T: Reconstructable>(
    grid: &Grid1D,
    zero: T,
    forcing: Option<&[T]>,
    mut face_flux: impl FnMut(&[usize; 4]) -> Result<T>,
) -> Result<Vec<T>> {
    let inv_h = 1.0 / grid.h();
    let mut res = vec![zero; grid.n()];
    for st in face_stencils(grid) {
        let flux = face_flux(&st)? * inv_h;
        let (a, b) = (st[1], st[2]);
        if !grid.is_pinned(a) {
            res[a] = res[a] + flux;
        }
        if !grid.is_pinned(b) {
            res[b] = res[b] - flux;
        }
    }
    if let Some(s) = forcing {
        check_len(grid.n(), s.len(), "forcing")?;
        for i in grid.free_nodes() {
            res[i] = res[i] - s[i];
        }
    }
    Ok(res)
}

/// Residual of a scalar law on a 1D grid.
pub fn residual_1d_scalar(
    config: &SchemeConfig,
    law: ScalarLaw,
    grid: &Grid1D,
    u: &[f64],
    forcing: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let equation = if law.is_linear() {
        Equation::LinearAdvection
    } else {
        Equation::Burgers
    };
    config.validate_for(equation)?;
    check_len(grid.n(), u.len(), "field")?;
    let h = grid.h();
    let kappa = config.kappa;
    let nodal_flux: Vec<f64> = match config.mode {
        Reconstruction::Fsr => u.iter().map(|&v| law.flux(v)).collect(),
        _ => Vec::new(),
    };
    assemble_1d(grid, 0.0, forcing, |st| {
        let (ul, ur) = kappa_reconstruct_pair_1d(&Stencil4::new(st.map(|k| u[k]), h), kappa);
        Ok(match config.mode {
            Reconstruction::Fsr => {
                let (fl, fr) =
                    flux_reconstruct_pair_1d(&Stencil4::new(st.map(|k| nodal_flux[k]), h), kappa);
                scalar_flux_fsr(law, ul, ur, fl, fr)
            }
            _ => scalar_flux_umuscl(law, ul, ur),
        })
    })
}

/// Residual of the 1D Euler equations; reconstruction in primitive variables.
pub fn residual_1d_euler(
    config: &SchemeConfig,
    gas: &Gas,
    grid: &Grid1D,
    w: &[Primitive1],
    forcing: Option<&[Vec3]>,
) -> Result<Vec<Vec3>> {
    config.validate_for(Equation::Euler1D)?;
    check_len(grid.n(), w.len(), "field")?;
    let h = grid.h();
    let kappa = config.kappa;
    let wv: Vec<Vec3> = w.iter().map(|s| s.to_vector()).collect();
    let nodal_flux: Vec<Vec3> = match config.mode {
        Reconstruction::Fsr => w
            .iter()
            .map(|s| gas.euler1d_flux(s))
            .collect::<Result<_>>()?,
        _ => Vec::new(),
    };
    assemble_1d(grid, Vec3::zeros(), forcing, |st| {
        let (wl, wr) = kappa_reconstruct_pair_1d(&Stencil4::new(st.map(|k| wv[k]), h), kappa);
        let (pl, pr) = (Primitive1::from_vector(&wl), Primitive1::from_vector(&wr));
        let reconstructed = match config.mode {
            Reconstruction::Fsr => Some(flux_reconstruct_pair_1d(
                &Stencil4::new(st.map(|k| nodal_flux[k]), h),
                kappa,
            )),
            _ => None,
        };
        roe_flux_1d(gas, &pl, &pr, reconstructed)
    })
}

/// Nodal forcing `s(x_i)` of a scalar manufactured solution.
pub fn sample_forcing_scalar(mms: &ScalarMms, grid: &Grid1D) -> Vec<f64> {
    (0..grid.n()).map(|i| mms.forcing(grid.x(i))).collect()
}

pub fn sample_exact_scalar(mms: &ScalarMms, grid: &Grid1D) -> Vec<f64> {
    (0..grid.n()).map(|i| mms.exact(grid.x(i))).collect()
}

pub fn sample_forcing_euler1d(mms: &Euler1dMms, gas: &Gas, grid: &Grid1D) -> Result<Vec<Vec3>> {
    (0..grid.n()).map(|i| mms.forcing(gas, grid.x(i))).collect()
}

pub fn sample_exact_euler1d(mms: &Euler1dMms, grid: &Grid1D) -> Vec<Primitive1> {
    (0..grid.n()).map(|i| mms.exact(grid.x(i))).collect()
}

pub fn sample_forcing_euler2d(
    mms: &Euler2dSteadyMms,
    gas: &Gas,
    grid: &Grid2D,
) -> Result<Vec<Vec4>> {
    (0..grid.len())
        .map(|idx| {
            let (i, j) = grid.ij(idx);
            let [x, y] = grid.xy(i, j);
            mms.forcing(gas, x, y)
        })
        .collect()
}

pub fn sample_exact_2d(
    grid: &Grid2D,
    exact: impl Fn(f64, f64) -> Result<Primitive2>,
) -> Result<Vec<Primitive2>> {
    (0..grid.len())
        .map(|idx| {
            let (i, j) = grid.ij(idx);
            let [x, y] = grid.xy(i, j);
            exact(x, y)
        })
        .collect()
}

/// Nodal data reused by every face of a 2D residual evaluation.
struct NodeData {
    w: Vec<Vec4>,
    /// Physical fluxes along x and y (FSR modes only).
    fx: Vec<Vec4>,
    fy: Vec<Vec4>,
    /// Increments `grad . (x_k - x_j)` toward the +x and +y neighbor, for the
    /// solution and (chain-rule mode) for the flux.
    dwx: Vec<Vec4>,
    dwy: Vec<Vec4>,
    dfx: Vec<Vec4>,
    dfy: Vec<Vec4>,
}

impl NodeData {
    fn new(config: &SchemeConfig, gas: &Gas, grid: &Grid2D, w: &[Primitive2]) -> Result<Self> {
        let h = grid.h();
        let wv: Vec<Vec4> = w.iter().map(|s| s.to_vector()).collect();
        let grads = node_gradients_2d(&wv, grid);
        let dwx: Vec<Vec4> = grads.iter().map(|g| g.dx * h).collect();
        let dwy: Vec<Vec4> = grads.iter().map(|g| g.dy * h).collect();
        let (mut fx, mut fy, mut dfx, mut dfy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        if config.mode != Reconstruction::Umuscl {
            fx = w
                .iter()
                .map(|s| gas.euler2d_flux_projected(s, UnitNormal::X))
                .collect::<Result<_>>()?;
            fy = w
                .iter()
                .map(|s| gas.euler2d_flux_projected(s, UnitNormal::Y))
                .collect::<Result<_>>()?;
        }
        if config.mode == Reconstruction::FsrCr {
            dfx = Vec::with_capacity(w.len());
            dfy = Vec::with_capacity(w.len());
            for (k, s) in w.iter().enumerate() {
                dfx.push(gas.euler2d_flux_jacobian_primitive(s, UnitNormal::X)? * dwx[k]);
                dfy.push(gas.euler2d_flux_jacobian_primitive(s, UnitNormal::Y)? * dwy[k]);
            }
        } else if config.mode == Reconstruction::Fsr {
            // flux gradients by the same central differences as the solution
            let fgx = node_gradients_2d(&fx, grid);
            let fgy = node_gradients_2d(&fy, grid);
            dfx = fgx.iter().map(|g| g.dx * h).collect();
            dfy = fgy.iter().map(|g| g.dy * h).collect();
        }
        Ok(Self {
            w: wv,
            fx,
            fy,
            dwx,
            dwy,
            dfx,
            dfy,
        })
    }

    /// Face flux between node `j` and its neighbor `k` in the positive
    /// coordinate direction given by `n`.
    fn face_flux(
        &self,
        config: &SchemeConfig,
        gas: &Gas,
        j: usize,
        k: usize,
        n: UnitNormal,
    ) -> Result<Vec4> {
        let kappa = config.kappa;
        let along_x = n == UnitNormal::X;
        let (dw, df, f) = if along_x {
            (&self.dwx, &self.dfx, &self.fx)
        } else {
            (&self.dwy, &self.dfy, &self.fy)
        };
        let (wl, wr) = kappa_face(self.w[j], self.w[k], dw[j], -dw[k], kappa);
        let reconstructed = match config.mode {
            Reconstruction::Umuscl => None,
            _ => Some(kappa_face(f[j], f[k], df[j], -df[k], kappa)),
        };
        roe_flux_2d(
            gas,
            &Primitive2::from_vector(&wl),
            &Primitive2::from_vector(&wr),
            n,
            reconstructed,
        )
    }
}

/// Residual of the 2D Euler equations on a Cartesian grid, one flux
/// evaluation at each face midpoint.
pub fn residual_2d(
    config: &SchemeConfig,
    gas: &Gas,
    grid: &Grid2D,
    w: &[Primitive2],
    forcing: Option<&[Vec4]>,
) -> Result<Vec<Vec4>> {
    check_len(grid.len(), w.len(), "field")?;
    let nodes = NodeData::new(config, gas, grid, w)?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let inv_h = 1.0 / grid.h();
    let mut res = vec![Vec4::zeros(); grid.len()];

    // x-faces (i, j) - (i+1, j) on rows holding free nodes
    for j in 2..ny - 2 {
        for i in 1..=nx - 3 {
            let a = grid.index(i, j);
            let flux = nodes.face_flux(config, gas, a, a + 1, UnitNormal::X)? * inv_h;
            if !grid.is_pinned(i, j) {
                res[a] += flux;
            }
            if !grid.is_pinned(i + 1, j) {
                res[a + 1] -= flux;
            }
        }
    }
    // y-faces (i, j) - (i, j+1)
    for j in 1..=ny - 3 {
        for i in 2..nx - 2 {
            let a = grid.index(i, j);
            let b = a + nx;
            let flux = nodes.face_flux(config, gas, a, b, UnitNormal::Y)? * inv_h;
            if !grid.is_pinned(i, j) {
                res[a] += flux;
            }
            if !grid.is_pinned(i, j + 1) {
                res[b] -= flux;
            }
        }
    }
    if let Some(s) = forcing {
        check_len(grid.len(), s.len(), "forcing")?;
        for idx in grid.free_nodes() {
            res[idx] -= s[idx];
        }
    }
    Ok(res)
}
