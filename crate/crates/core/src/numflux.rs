//! Face numerical fluxes.
//!
//! Every flux has the form `1/2 (f_L + f_R) - 1/2 D (u_R - u_L)`. In the
//! UMUSCL form `f_L, f_R` are the physical fluxes of the reconstructed
//! states; in the FSR form they are reconstructed directly from nodal
//! fluxes. The dissipation only ever sees the reconstructed states.

use crate::equations::{
    Gas, Mat3, Mat4, Primitive1, Primitive2, RoeAverage, ScalarLaw, UnitNormal, Vec3, Vec4,
};
use crate::error::Result;

/// `|df/du|` at the face-averaged state.
pub fn scalar_dissipation(law: ScalarLaw, ul: f64, ur: f64) -> f64 {
    law.wave_speed(0.5 * (ul + ur)).abs()
}

pub fn scalar_flux_umuscl(law: ScalarLaw, ul: f64, ur: f64) -> f64 {
    scalar_flux_fsr(law, ul, ur, law.flux(ul), law.flux(ur))
}

pub fn scalar_flux_fsr(law: ScalarLaw, ul: f64, ur: f64, fl: f64, fr: f64) -> f64 {
    0.5 * (fl + fr) - 0.5 * scalar_dissipation(law, ul, ur) * (ur - ul)
}

/// Exact partial derivatives `(dF/du_L, dF/du_R)` of the UMUSCL flux,
/// including the dependence of the dissipation coefficient on the states.
pub fn scalar_flux_umuscl_derivatives(law: ScalarLaw, ul: f64, ur: f64) -> (f64, f64) {
    let d = scalar_dissipation(law, ul, ur);
    let jump = ur - ul;
    let dd = match law {
        ScalarLaw::LinearAdvection { .. } => 0.0,
        // d|(u_L+u_R)/2| / du_{L,R}
        ScalarLaw::Burgers => 0.5 * (ul + ur).signum(),
    };
    let dl = 0.5 * law.wave_speed(ul) - 0.5 * dd * jump + 0.5 * d;
    let dr = 0.5 * law.wave_speed(ur) - 0.5 * dd * jump - 0.5 * d;
    (dl, dr)
}

/// Right eigenvectors (columns), left eigenvectors (rows) and eigenvalues
/// of the Roe-averaged flux Jacobian.
#[derive(Debug, Clone, Copy)]
pub struct Eigensystem<M, V> {
    pub right: M,
    pub left: M,
    pub eigenvalues: V,
}

pub type Eigensystem1 = Eigensystem<Mat3, Vec3>;
pub type Eigensystem2 = Eigensystem<Mat4, Vec4>;

impl Eigensystem1 {
    pub fn new(gas: &Gas, avg: &RoeAverage) -> Self {
        let (u, h, c) = (avg.u, avg.h, avg.c);
        let b1 = (gas.gamma - 1.0) / (c * c);
        let b2 = 0.5 * b1 * u * u;
        #[rustfmt::skip]
        let right = Mat3::new(
            1.0,         1.0,         1.0,
            u - c,       u,           u + c,
            h - u * c,   0.5 * u * u, h + u * c,
        );
        #[rustfmt::skip]
        let left = Mat3::new(
            0.5 * (b2 + u / c), -0.5 * (b1 * u + 1.0 / c), 0.5 * b1,
            1.0 - b2,           b1 * u,                    -b1,
            0.5 * (b2 - u / c), -0.5 * (b1 * u - 1.0 / c), 0.5 * b1,
        );
        Self {
            right,
            left,
            eigenvalues: Vec3::new(u - c, u, u + c),
        }
    }

    /// `R |Lambda| L`
    pub fn dissipation_matrix(&self) -> Mat3 {
        self.right * Mat3::from_diagonal(&self.eigenvalues.abs()) * self.left
    }

    /// `R Lambda L`
    pub fn roe_matrix(&self) -> Mat3 {
        self.right * Mat3::from_diagonal(&self.eigenvalues) * self.left
    }

    pub fn apply_dissipation(&self, jump: &Vec3) -> Vec3 {
        let strengths = self.left * jump;
        self.right * strengths.component_mul(&self.eigenvalues.abs())
    }
}

impl Eigensystem2 {
    pub fn new(gas: &Gas, avg: &RoeAverage, n: UnitNormal) -> Self {
        let (u, v, h, c) = (avg.u, avg.v, avg.h, avg.c);
        let (nx, ny) = (n.nx(), n.ny());
        let (tx, ty) = n.tangent();
        let un = u * nx + v * ny;
        let ut = u * tx + v * ty;
        let q2 = u * u + v * v;
        let b1 = (gas.gamma - 1.0) / (c * c);
        let b2 = 0.5 * b1 * q2;
        // columns: acoustic (un - c), entropy, shear, acoustic (un + c)
        #[rustfmt::skip]
        let right = Mat4::new(
            1.0,            1.0,      0.0, 1.0,
            u - c * nx,     u,        tx,  u + c * nx,
            v - c * ny,     v,        ty,  v + c * ny,
            h - c * un,     0.5 * q2, ut,  h + c * un,
        );
        #[rustfmt::skip]
        let left = Mat4::new(
            0.5 * (b2 + un / c), -0.5 * (b1 * u + nx / c), -0.5 * (b1 * v + ny / c), 0.5 * b1,
            1.0 - b2,            b1 * u,                   b1 * v,                   -b1,
            -ut,                 tx,                       ty,                       0.0,
            0.5 * (b2 - un / c), -0.5 * (b1 * u - nx / c), -0.5 * (b1 * v - ny / c), 0.5 * b1,
        );
        Self {
            right,
            left,
            eigenvalues: Vec4::new(un - c, un, un, un + c),
        }
    }

    pub fn dissipation_matrix(&self) -> Mat4 {
        self.right * Mat4::from_diagonal(&self.eigenvalues.abs()) * self.left
    }

    pub fn roe_matrix(&self) -> Mat4 {
        self.right * Mat4::from_diagonal(&self.eigenvalues) * self.left
    }

    pub fn apply_dissipation(&self, jump: &Vec4) -> Vec4 {
        let strengths = self.left * jump;
        self.right * strengths.component_mul(&self.eigenvalues.abs())
    }
}

/// Roe flux for the 1D Euler equations.
///
/// `reconstructed = Some((f_L, f_R))` selects the FSR form; `None` uses the
/// physical fluxes of the face states.
pub fn roe_flux_1d(
    gas: &Gas,
    wl: &Primitive1,
    wr: &Primitive1,
    reconstructed: Option<(Vec3, Vec3)>,
) -> Result<Vec3> {
    let avg = gas.roe_average1(wl, wr)?;
    let eig = Eigensystem1::new(gas, &avg);
    let jump = gas.prim_to_cons1(wr)? - gas.prim_to_cons1(wl)?;
    let (fl, fr) = match reconstructed {
        Some(pair) => pair,
        None => (gas.euler1d_flux(wl)?, gas.euler1d_flux(wr)?),
    };
    Ok((fl + fr) * 0.5 - eig.apply_dissipation(&jump) * 0.5)
}

/// Roe flux along the unit normal `n` for the 2D Euler equations.
pub fn roe_flux_2d(
    gas: &Gas,
    wl: &Primitive2,
    wr: &Primitive2,
    n: UnitNormal,
    reconstructed: Option<(Vec4, Vec4)>,
) -> Result<Vec4> {
    let avg = gas.roe_average2(wl, wr)?;
    let eig = Eigensystem2::new(gas, &avg, n);
    let jump = gas.prim_to_cons2(wr)? - gas.prim_to_cons2(wl)?;
    let (fl, fr) = match reconstructed {
        Some(pair) => pair,
        None => (
            gas.euler2d_flux_projected(wl, n)?,
            gas.euler2d_flux_projected(wr, n)?,
        ),
    };
    Ok((fl + fr) * 0.5 - eig.apply_dissipation(&jump) * 0.5)
}
