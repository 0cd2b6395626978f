//! Physical fluxes, variable conversions and flux Jacobians for scalar laws
//! and the 1D/2D Euler equations.
//!
//! Euler states are carried in primitive form (`Primitive1`, `Primitive2`)
//! and in conservative form as plain `nalgebra` vectors
//! `(rho, rho u[, rho v], rho E)`.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};

pub type Vec3 = SVector<f64, 3>;
pub type Vec4 = SVector<f64, 4>;
pub type Mat3 = SMatrix<f64, 3, 3>;
pub type Mat4 = SMatrix<f64, 4, 4>;

/// Ratio of specific heats used by every test problem.
pub const GAMMA: f64 = 1.4;

/// Scalar conservation law `u_t + f(u)_x = s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarLaw {
    LinearAdvection { speed: f64 },
    Burgers,
}

impl ScalarLaw {
    pub fn flux(&self, u: f64) -> f64 {
        match *self {
            ScalarLaw::LinearAdvection { speed } => speed * u,
            ScalarLaw::Burgers => 0.5 * u * u,
        }
    }

    /// df/du
    pub fn wave_speed(&self, u: f64) -> f64 {
        match *self {
            ScalarLaw::LinearAdvection { speed } => speed,
            ScalarLaw::Burgers => u,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, ScalarLaw::LinearAdvection { .. })
    }
}

/// Free-function form of [`ScalarLaw::flux`].
pub fn scalar_flux(law: ScalarLaw, u: f64) -> f64 {
    law.flux(u)
}

/// Unit face normal in 2D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitNormal {
    nx: f64,
    ny: f64,
}

impl UnitNormal {
    pub const X: UnitNormal = UnitNormal { nx: 1.0, ny: 0.0 };
    pub const Y: UnitNormal = UnitNormal { nx: 0.0, ny: 1.0 };

    pub fn new(nx: f64, ny: f64) -> Result<Self> {
        let norm = nx.hypot(ny);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitNormal(norm));
        }
        Ok(Self { nx, ny })
    }

    /// Normalizes an arbitrary non-zero direction.
    pub fn from_direction(dx: f64, dy: f64) -> Result<Self> {
        let norm = dx.hypot(dy);
        if !(norm > 0.0) {
            return Err(Error::NonUnitNormal(norm));
        }
        Ok(Self {
            nx: dx / norm,
            ny: dy / norm,
        })
    }

    pub fn nx(&self) -> f64 {
        self.nx
    }

    pub fn ny(&self) -> f64 {
        self.ny
    }

    /// Tangent obtained by rotating the normal counter-clockwise.
    pub fn tangent(&self) -> (f64, f64) {
        (-self.ny, self.nx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive1 {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl Primitive1 {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        Self { rho, u, p }
    }

    pub fn to_vector(self) -> Vec3 {
        Vec3::new(self.rho, self.u, self.p)
    }

    pub fn from_vector(w: &Vec3) -> Self {
        Self::new(w[0], w[1], w[2])
    }

    pub fn check(&self) -> Result<()> {
        check_positive(self.rho, self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive2 {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
}

impl Primitive2 {
    pub fn new(rho: f64, u: f64, v: f64, p: f64) -> Self {
        Self { rho, u, v, p }
    }

    pub fn to_vector(self) -> Vec4 {
        Vec4::new(self.rho, self.u, self.v, self.p)
    }

    pub fn from_vector(w: &Vec4) -> Self {
        Self::new(w[0], w[1], w[2], w[3])
    }

    pub fn check(&self) -> Result<()> {
        check_positive(self.rho, self.p)
    }
}

fn check_positive(rho: f64, p: f64) -> Result<()> {
    // written as negations so that NaN is rejected too
    if !(rho > 0.0) {
        return Err(Error::NonPositiveDensity(rho));
    }
    if !(p > 0.0) {
        return Err(Error::NonPositivePressure(p));
    }
    Ok(())
}

/// Roe-averaged state. `v` is zero in 1D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoeAverage {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub h: f64,
    pub c: f64,
}

/// Ideal-gas Euler equations with a fixed ratio of specific heats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gas {
    pub gamma: f64,
}

impl Default for Gas {
    fn default() -> Self {
        Self { gamma: GAMMA }
    }
}

impl Gas {
    pub fn new(gamma: f64) -> Self {
        Self { gamma }
    }

    pub fn sound_speed(&self, rho: f64, p: f64) -> f64 {
        (self.gamma * p / rho).sqrt()
    }

    /// Total enthalpy per unit mass.
    pub fn enthalpy(&self, rho: f64, p: f64, q2: f64) -> f64 {
        self.gamma / (self.gamma - 1.0) * p / rho + 0.5 * q2
    }

    // ---- 1D ----

    pub fn euler1d_flux(&self, w: &Primitive1) -> Result<Vec3> {
        w.check()?;
        let rho_h = self.gamma * w.p / (self.gamma - 1.0) + 0.5 * w.rho * w.u * w.u;
        Ok(Vec3::new(w.rho * w.u, w.rho * w.u * w.u + w.p, w.u * rho_h))
    }

    pub fn prim_to_cons1(&self, w: &Primitive1) -> Result<Vec3> {
        w.check()?;
        Ok(Vec3::new(
            w.rho,
            w.rho * w.u,
            w.p / (self.gamma - 1.0) + 0.5 * w.rho * w.u * w.u,
        ))
    }

    pub fn cons_to_prim1(&self, c: &Vec3) -> Result<Primitive1> {
        let rho = c[0];
        if !(rho > 0.0) {
            return Err(Error::NonPositiveDensity(rho));
        }
        let u = c[1] / rho;
        let p = (self.gamma - 1.0) * (c[2] - 0.5 * rho * u * u);
        let w = Primitive1::new(rho, u, p);
        w.check()?;
        Ok(w)
    }

    /// df/dw for the 1D flux in primitive variables `(rho, u, p)`.
    pub fn euler1d_flux_jacobian_primitive(&self, w: &Primitive1) -> Result<Mat3> {
        w.check()?;
        let (rho, u) = (w.rho, w.u);
        let h = self.enthalpy(rho, w.p, u * u);
        let g1 = self.gamma / (self.gamma - 1.0);
        Ok(Mat3::new(
            u,
            rho,
            0.0,
            u * u,
            2.0 * rho * u,
            1.0,
            0.5 * u * u * u,
            rho * (h + u * u),
            g1 * u,
        ))
    }

    pub fn roe_average1(&self, wl: &Primitive1, wr: &Primitive1) -> Result<RoeAverage> {
        wl.check()?;
        wr.check()?;
        let (sl, sr) = (wl.rho.sqrt(), wr.rho.sqrt());
        let hl = self.enthalpy(wl.rho, wl.p, wl.u * wl.u);
        let hr = self.enthalpy(wr.rho, wr.p, wr.u * wr.u);
        let u = (sl * wl.u + sr * wr.u) / (sl + sr);
        let h = (sl * hl + sr * hr) / (sl + sr);
        let c2 = (self.gamma - 1.0) * (h - 0.5 * u * u);
        if !(c2 > 0.0) {
            return Err(Error::ImaginarySoundSpeed(c2));
        }
        Ok(RoeAverage {
            rho: sl * sr,
            u,
            v: 0.0,
            h,
            c: c2.sqrt(),
        })
    }

    // ---- 2D ----

    /// Flux projected on the unit normal `n`.
    pub fn euler2d_flux_projected(&self, w: &Primitive2, n: UnitNormal) -> Result<Vec4> {
        w.check()?;
        let un = w.u * n.nx + w.v * n.ny;
        let rho_h = self.gamma * w.p / (self.gamma - 1.0) + 0.5 * w.rho * (w.u * w.u + w.v * w.v);
        Ok(Vec4::new(
            w.rho * un,
            w.rho * w.u * un + w.p * n.nx,
            w.rho * w.v * un + w.p * n.ny,
            rho_h * un,
        ))
    }

    pub fn prim_to_cons2(&self, w: &Primitive2) -> Result<Vec4> {
        w.check()?;
        Ok(Vec4::new(
            w.rho,
            w.rho * w.u,
            w.rho * w.v,
            w.p / (self.gamma - 1.0) + 0.5 * w.rho * (w.u * w.u + w.v * w.v),
        ))
    }

    pub fn cons_to_prim2(&self, c: &Vec4) -> Result<Primitive2> {
        let rho = c[0];
        if !(rho > 0.0) {
            return Err(Error::NonPositiveDensity(rho));
        }
        let u = c[1] / rho;
        let v = c[2] / rho;
        let p = (self.gamma - 1.0) * (c[3] - 0.5 * rho * (u * u + v * v));
        let w = Primitive2::new(rho, u, v, p);
        w.check()?;
        Ok(w)
    }

    /// df/dw of the projected flux, primitive variables `(rho, u, v, p)`.
    ///
    /// Rows: mass, x-momentum, y-momentum, energy.
    pub fn euler2d_flux_jacobian_primitive(&self, w: &Primitive2, n: UnitNormal) -> Result<Mat4> {
        w.check()?;
        let (rho, u, v) = (w.rho, w.u, w.v);
        let (nx, ny) = (n.nx, n.ny);
        let un = u * nx + v * ny;
        let q2 = u * u + v * v;
        let h = self.enthalpy(rho, w.p, q2);
        let g1 = self.gamma / (self.gamma - 1.0);
        #[rustfmt::skip]
        let m = Mat4::new(
            un,            rho * nx,                 rho * ny,                 0.0,
            un * u,        rho * (un + u * nx),      rho * u * ny,             nx,
            un * v,        rho * v * nx,             rho * (un + v * ny),      ny,
            0.5 * un * q2, rho * (h * nx + un * u),  rho * (h * ny + un * v),  g1 * un,
        );
        Ok(m)
    }

    /// dw/du, primitive with respect to conservative variables.
    pub fn primitive_from_conservative_jacobian2(&self, w: &Primitive2) -> Mat4 {
        let (rho, u, v) = (w.rho, w.u, w.v);
        let gm1 = self.gamma - 1.0;
        let q2 = u * u + v * v;
        #[rustfmt::skip]
        let m = Mat4::new(
            1.0,            0.0,        0.0,        0.0,
            -u / rho,       1.0 / rho,  0.0,        0.0,
            -v / rho,       0.0,        1.0 / rho,  0.0,
            0.5 * gm1 * q2, -gm1 * u,   -gm1 * v,   gm1,
        );
        m
    }

    /// df/du of the projected flux in conservative variables.
    pub fn euler2d_flux_jacobian_conservative(
        &self,
        w: &Primitive2,
        n: UnitNormal,
    ) -> Result<Mat4> {
        Ok(self.euler2d_flux_jacobian_primitive(w, n)?
            * self.primitive_from_conservative_jacobian2(w))
    }

    pub fn roe_average2(&self, wl: &Primitive2, wr: &Primitive2) -> Result<RoeAverage> {
        wl.check()?;
        wr.check()?;
        let (sl, sr) = (wl.rho.sqrt(), wr.rho.sqrt());
        let hl = self.enthalpy(wl.rho, wl.p, wl.u * wl.u + wl.v * wl.v);
        let hr = self.enthalpy(wr.rho, wr.p, wr.u * wr.u + wr.v * wr.v);
        let wsum = sl + sr;
        let u = (sl * wl.u + sr * wr.u) / wsum;
        let v = (sl * wl.v + sr * wr.v) / wsum;
        let h = (sl * hl + sr * hr) / wsum;
        let c2 = (self.gamma - 1.0) * (h - 0.5 * (u * u + v * v));
        if !(c2 > 0.0) {
            return Err(Error::ImaginarySoundSpeed(c2));
        }
        Ok(RoeAverage {
            rho: sl * sr,
            u,
            v,
            h,
            c: c2.sqrt(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gas() -> Gas {
        Gas::default()
    }

    fn random_prim2(rng: &mut ChaCha8Rng) -> Primitive2 {
        Primitive2::new(
            rng.gen_range(0.5..2.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.5..2.0),
        )
    }

    #[test]
    fn scalar_fluxes() {
        assert_eq!(scalar_flux(ScalarLaw::Burgers, 0.0), 0.0);
        assert_eq!(scalar_flux(ScalarLaw::Burgers, 2.0), 2.0);
        let lin = ScalarLaw::LinearAdvection { speed: 0.3 };
        assert!((scalar_flux(lin, 1.5) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn euler1d_flux_values() {
        let g = gas();
        let f = g.euler1d_flux(&Primitive1::new(1.0, 0.0, 1.0)).unwrap();
        assert_eq!(f, Vec3::new(0.0, 1.0, 0.0));

        let f = g.euler1d_flux(&Primitive1::new(1.0, 0.3, 1.0)).unwrap();
        assert!((f - Vec3::new(0.3, 1.09, 1.0635)).norm() < 1e-14);

        // rho H = 3.5 p + rho u^2/2 with p = 1/gamma
        let f = g
            .euler1d_flux(&Primitive1::new(1.0, 1.0, 1.0 / GAMMA))
            .unwrap();
        let expected = Vec3::new(1.0, 1.0 + 1.0 / 1.4, 3.0);
        assert!((f - expected).norm() < 1e-14);
    }

    #[test]
    fn flux_rejects_nonpositive_states() {
        let g = gas();
        assert!(matches!(
            g.euler1d_flux(&Primitive1::new(0.0, 0.0, 1.0)),
            Err(Error::NonPositiveDensity(_))
        ));
        assert!(matches!(
            g.euler1d_flux(&Primitive1::new(1.0, 0.0, -1.0)),
            Err(Error::NonPositivePressure(_))
        ));
        assert!(matches!(
            g.cons_to_prim1(&Vec3::new(1.0, 0.0, -0.1)),
            Err(Error::NonPositivePressure(_))
        ));
        assert!(g
            .cons_to_prim2(&Vec4::new(f64::NAN, 0.0, 0.0, 1.0))
            .is_err());
    }

    #[test]
    fn euler2d_flux_values() {
        let g = gas();
        let w = Primitive2::new(1.0, 0.0, 0.0, 1.0);
        let n = UnitNormal::new(0.6, 0.8).unwrap();
        let f = g.euler2d_flux_projected(&w, n).unwrap();
        assert!((f - Vec4::new(0.0, 0.6, 0.8, 0.0)).norm() < 1e-15);

        // rho H = 3.5 + 0.025, u_n = 0.1
        let w = Primitive2::new(1.0, 0.2, 0.1, 1.0);
        let f = g.euler2d_flux_projected(&w, UnitNormal::Y).unwrap();
        assert!((f - Vec4::new(0.1, 0.02, 1.01, 0.3525)).norm() < 1e-14);
    }

    #[test]
    fn non_unit_normal_is_rejected() {
        assert!(matches!(
            UnitNormal::new(1.0, 1.0),
            Err(Error::NonUnitNormal(_))
        ));
        assert!(UnitNormal::from_direction(3.0, 4.0).is_ok());
        assert!(UnitNormal::from_direction(0.0, 0.0).is_err());
    }

    #[test]
    fn flux_rotational_consistency() {
        let g = gas();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let w2 = random_prim2(&mut rng);
            let f2 = g.euler2d_flux_projected(&w2, UnitNormal::X).unwrap();
            let f1 = g
                .euler1d_flux(&Primitive1::new(w2.rho, w2.u, w2.p))
                .unwrap();
            // 1D energy flux sees only u^2; add the transverse kinetic part
            let extra = 0.5 * w2.rho * w2.v * w2.v * w2.u;
            assert!((f2[0] - f1[0]).abs() < 1e-14);
            assert!((f2[1] - f1[1]).abs() < 1e-14);
            assert!((f2[2] - w2.rho * w2.u * w2.v).abs() < 1e-14);
            assert!((f2[3] - f1[2] - extra).abs() < 1e-13);

            let w2 = Primitive2 { v: 0.0, ..w2 };
            let f2 = g.euler2d_flux_projected(&w2, UnitNormal::X).unwrap();
            let f1 = g
                .euler1d_flux(&Primitive1::new(w2.rho, w2.u, w2.p))
                .unwrap();
            assert!((f2[3] - f1[2]).abs() < 1e-14);
            assert_eq!(f2[2], 0.0);
        }
    }

    #[test]
    fn conversions() {
        let g = gas();
        let c = g.prim_to_cons1(&Primitive1::new(1.0, 0.0, 1.0)).unwrap();
        assert!((c - Vec3::new(1.0, 0.0, 2.5)).norm() < 1e-15);
        let c = g.prim_to_cons1(&Primitive1::new(1.0, 0.3, 1.0)).unwrap();
        assert!((c - Vec3::new(1.0, 0.3, 2.545)).norm() < 1e-15);
    }

    #[test]
    fn prim_cons_round_trip() {
        let g = gas();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let w = random_prim2(&mut rng);
            let back = g.cons_to_prim2(&g.prim_to_cons2(&w).unwrap()).unwrap();
            let (a, b) = (w.to_vector(), back.to_vector());
            assert!((a - b).norm() <= 1e-13 * a.norm());

            let w1 = Primitive1::new(w.rho, w.u, w.p);
            let back = g.cons_to_prim1(&g.prim_to_cons1(&w1).unwrap()).unwrap();
            assert!((w1.to_vector() - back.to_vector()).norm() <= 1e-13 * w1.to_vector().norm());
        }
    }

    #[test]
    fn jacobian_at_zero_normal_velocity() {
        let g = gas();
        let w = Primitive2::new(1.3, 0.0, 0.4, 0.9);
        let jac = g
            .euler2d_flux_jacobian_primitive(&w, UnitNormal::X)
            .unwrap();
        assert_eq!(jac[(0, 0)], 0.0);
        assert_eq!(jac[(0, 1)], 1.3);
        assert_eq!(jac[(0, 2)], 0.0);
        assert_eq!(jac[(0, 3)], 0.0);
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let g = gas();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let step = 1e-6;
        for _ in 0..100 {
            let w = random_prim2(&mut rng);
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let n = UnitNormal::new(theta.cos(), theta.sin()).unwrap();
            let jac = g.euler2d_flux_jacobian_primitive(&w, n).unwrap();
            for k in 0..4 {
                let mut wp = w.to_vector();
                let mut wm = w.to_vector();
                wp[k] += step;
                wm[k] -= step;
                let fp = g
                    .euler2d_flux_projected(&Primitive2::from_vector(&wp), n)
                    .unwrap();
                let fm = g
                    .euler2d_flux_projected(&Primitive2::from_vector(&wm), n)
                    .unwrap();
                let fd = (fp - fm) / (2.0 * step);
                let col = jac.column(k).into_owned();
                let scale = col.norm().max(1.0);
                assert!(
                    (fd - col).norm() <= 1e-6 * scale,
                    "column {k}: {fd} vs {col}"
                );
            }
        }
    }

    #[test]
    fn jacobian_1d_matches_central_differences() {
        let g = gas();
        let w = Primitive1::new(1.1, 0.35, 0.8);
        let jac = g.euler1d_flux_jacobian_primitive(&w).unwrap();
        let step = 1e-6;
        for k in 0..3 {
            let mut wp = w.to_vector();
            let mut wm = w.to_vector();
            wp[k] += step;
            wm[k] -= step;
            let fd = (g.euler1d_flux(&Primitive1::from_vector(&wp)).unwrap()
                - g.euler1d_flux(&Primitive1::from_vector(&wm)).unwrap())
                / (2.0 * step);
            assert!((fd - jac.column(k)).norm() < 1e-8);
        }
    }

    #[test]
    fn conservative_jacobian_matches_central_differences() {
        let g = gas();
        let w = Primitive2::new(0.9, 0.3, -0.2, 1.2);
        let n = UnitNormal::from_direction(1.0, 2.0).unwrap();
        let a = g.euler2d_flux_jacobian_conservative(&w, n).unwrap();
        let u0 = g.prim_to_cons2(&w).unwrap();
        let step = 1e-6;
        for k in 0..4 {
            let mut up = u0;
            let mut um = u0;
            up[k] += step;
            um[k] -= step;
            let fp = g
                .euler2d_flux_projected(&g.cons_to_prim2(&up).unwrap(), n)
                .unwrap();
            let fm = g
                .euler2d_flux_projected(&g.cons_to_prim2(&um).unwrap(), n)
                .unwrap();
            assert!(((fp - fm) / (2.0 * step) - a.column(k)).norm() < 1e-8);
        }
    }

    #[test]
    fn roe_average_properties() {
        let g = gas();
        let w = Primitive2::new(1.2, 0.3, -0.1, 0.9);
        let avg = g.roe_average2(&w, &w).unwrap();
        assert!((avg.rho - w.rho).abs() < 1e-15);
        assert!((avg.u - w.u).abs() < 1e-15);
        assert!((avg.v - w.v).abs() < 1e-15);
        assert!((avg.c - g.sound_speed(w.rho, w.p)).abs() < 1e-14);

        let wl = Primitive1::new(1.0, 0.1, 1.0);
        let wr = Primitive1::new(4.0, 0.4, 2.0);
        let avg = g.roe_average1(&wl, &wr).unwrap();
        assert!((avg.rho - 2.0).abs() < 1e-15);
        // sqrt weights 1 and 2
        assert!((avg.u - (0.1 + 2.0 * 0.4) / 3.0).abs() < 1e-15);
        let hl = 3.5 * 1.0 + 0.005;
        let hr = 3.5 * 0.5 + 0.08;
        assert!((avg.h - (hl + 2.0 * hr) / 3.0).abs() < 1e-14);
        let c2 = 0.4 * (avg.h - 0.5 * avg.u * avg.u);
        assert!((avg.c - c2.sqrt()).abs() < 1e-15);
    }
}
