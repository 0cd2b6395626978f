//! Manufactured and exact solutions with their analytic forcing terms.
//!
//! Forcing is always the divergence of the physical flux evaluated on the
//! exact solution, obtained in closed form through the chain rule.

use std::f64::consts::PI;

use crate::equations::{Gas, Primitive1, Primitive2, ScalarLaw, UnitNormal, Vec3, Vec4};
use crate::error::{Error, Result};

/// `u_e(x) = u_inf + epsilon sin(omega x)` for a scalar law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMms {
    pub law: ScalarLaw,
    pub u_inf: f64,
    pub epsilon: f64,
    pub omega: f64,
}

impl ScalarMms {
    pub const U_INF: f64 = 0.3;

    /// Burgers solution with `epsilon = c_eps u_inf`, `u_inf = 0.3`, `omega = 2 pi`.
    pub fn burgers(c_eps: f64) -> Self {
        Self {
            law: ScalarLaw::Burgers,
            u_inf: Self::U_INF,
            epsilon: c_eps * Self::U_INF,
            omega: 2.0 * PI,
        }
    }

    pub fn exact(&self, x: f64) -> f64 {
        self.u_inf + self.epsilon * (self.omega * x).sin()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.epsilon * self.omega * (self.omega * x).cos()
    }

    /// `d f(u_e) / dx = f'(u_e) u_e'`
    pub fn forcing(&self, x: f64) -> f64 {
        self.law.wave_speed(self.exact(x)) * self.derivative(x)
    }
}

/// The three 1D Euler cases in which the flux is (or is not) linear in the
/// varying variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearizationCase {
    /// Only density varies.
    EntropyWave,
    /// Density and pressure vary, velocity is constant.
    ConstantVelocity,
    /// All three variables vary with amplitude 0.2.
    FullyNonlinear,
}

impl LinearizationCase {
    pub fn label(self) -> char {
        match self {
            LinearizationCase::EntropyWave => 'a',
            LinearizationCase::ConstantVelocity => 'b',
            LinearizationCase::FullyNonlinear => 'c',
        }
    }

    pub fn from_label(c: &str) -> Result<Self> {
        match c {
            "a" => Ok(LinearizationCase::EntropyWave),
            "b" => Ok(LinearizationCase::ConstantVelocity),
            "c" => Ok(LinearizationCase::FullyNonlinear),
            other => Err(Error::Config(format!(
                "unknown linearization case {other:?} (expected a, b or c)"
            ))),
        }
    }
}

/// Sinusoidal 1D Euler solution
/// `rho = 1 + eps_rho sin(2.3 pi x)`, `u = u_inf + eps sin(2 pi x)`,
/// `p = 1 + eps_p sin(2.5 pi x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler1dMms {
    pub u_inf: f64,
    pub epsilon: f64,
    pub eps_rho: f64,
    pub eps_p: f64,
}

impl Euler1dMms {
    pub const U_INF: f64 = 0.3;
    const K_RHO: f64 = 2.3 * PI;
    const K_U: f64 = 2.0 * PI;
    const K_P: f64 = 2.5 * PI;

    pub fn from_c_eps(c_eps: f64) -> Self {
        Self {
            u_inf: Self::U_INF,
            epsilon: c_eps * Self::U_INF,
            eps_rho: 0.2,
            eps_p: 0.2,
        }
    }

    pub fn from_case(case: LinearizationCase) -> Self {
        let (epsilon, eps_p) = match case {
            LinearizationCase::EntropyWave => (0.0, 0.0),
            LinearizationCase::ConstantVelocity => (0.0, 0.2),
            LinearizationCase::FullyNonlinear => (0.2, 0.2),
        };
        Self {
            u_inf: Self::U_INF,
            epsilon,
            eps_rho: 0.2,
            eps_p,
        }
    }

    pub fn exact(&self, x: f64) -> Primitive1 {
        Primitive1::new(
            1.0 + self.eps_rho * (Self::K_RHO * x).sin(),
            self.u_inf + self.epsilon * (Self::K_U * x).sin(),
            1.0 + self.eps_p * (Self::K_P * x).sin(),
        )
    }

    pub fn derivative(&self, x: f64) -> Vec3 {
        Vec3::new(
            self.eps_rho * Self::K_RHO * (Self::K_RHO * x).cos(),
            self.epsilon * Self::K_U * (Self::K_U * x).cos(),
            self.eps_p * Self::K_P * (Self::K_P * x).cos(),
        )
    }

    pub fn forcing(&self, gas: &Gas, x: f64) -> Result<Vec3> {
        Ok(gas.euler1d_flux_jacobian_primitive(&self.exact(x))? * self.derivative(x))
    }
}

/// Steady 2D manufactured solution varying along `x + y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler2dSteadyMms {
    pub u_inf: f64,
    pub v_inf: f64,
    pub epsilon: f64,
    pub amp_rho: f64,
    pub amp_p: f64,
}

impl Euler2dSteadyMms {
    const K_RHO: f64 = 2.3 * PI;
    const K_V: f64 = 2.0 * PI;
    const K_P: f64 = 2.5 * PI;

    pub fn new(epsilon: f64) -> Self {
        Self {
            u_inf: 0.15,
            v_inf: 0.02,
            epsilon,
            amp_rho: 0.2,
            amp_p: 0.2,
        }
    }

    pub fn exact(&self, x: f64, y: f64) -> Primitive2 {
        let s = x + y;
        let sv = self.epsilon * (Self::K_V * s).sin();
        Primitive2::new(
            1.0 + self.amp_rho * (Self::K_RHO * s).sin(),
            self.u_inf + sv,
            self.v_inf + sv,
            1.0 + self.amp_p * (Self::K_P * s).sin(),
        )
    }

    /// The same family with all three amplitudes multiplied by `theta`.
    pub fn scaled(&self, theta: f64) -> Self {
        Self {
            epsilon: self.epsilon * theta,
            amp_rho: self.amp_rho * theta,
            amp_p: self.amp_p * theta,
            ..*self
        }
    }

    /// d/dx of the primitive variables; identical to d/dy.
    pub fn derivative(&self, x: f64, y: f64) -> Vec4 {
        let s = x + y;
        let dv = self.epsilon * Self::K_V * (Self::K_V * s).cos();
        Vec4::new(
            self.amp_rho * Self::K_RHO * (Self::K_RHO * s).cos(),
            dv,
            dv,
            self.amp_p * Self::K_P * (Self::K_P * s).cos(),
        )
    }

    /// `d f/dx + d g/dy` on the exact solution.
    pub fn forcing(&self, gas: &Gas, x: f64, y: f64) -> Result<Vec4> {
        let w = self.exact(x, y);
        let dw = self.derivative(x, y);
        let ax = gas.euler2d_flux_jacobian_primitive(&w, UnitNormal::X)?;
        let ay = gas.euler2d_flux_jacobian_primitive(&w, UnitNormal::Y)?;
        Ok(ax * dw + ay * dw)
    }
}

/// Isentropic vortex convected by a uniform stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vortex {
    pub strength: f64,
    pub u_inf: f64,
    pub v_inf: f64,
    pub gamma: f64,
}

impl Vortex {
    pub fn new(strength: f64) -> Self {
        Self {
            strength,
            u_inf: 0.2,
            v_inf: 0.0,
            gamma: crate::equations::GAMMA,
        }
    }

    pub fn exact(&self, x: f64, y: f64, t: f64) -> Result<Primitive2> {
        let xb = x - self.u_inf * t;
        let yb = y - self.v_inf * t;
        let r2 = xb * xb + yb * yb;
        let k = self.strength;
        let swirl = k / (2.0 * PI) * (0.5 * (1.0 - r2)).exp();
        let temp = 1.0 - k * k * (self.gamma - 1.0) / (8.0 * PI * PI) * (1.0 - r2).exp();
        if !(temp > 0.0) {
            return Err(Error::NonPositiveTemperature(temp));
        }
        let rho = temp.powf(1.0 / (self.gamma - 1.0));
        Ok(Primitive2::new(
            rho,
            self.u_inf - yb * swirl,
            self.v_inf + xb * swirl,
            rho.powf(self.gamma) / self.gamma,
        ))
    }
}
