use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::reconstruction::Kappa;

/// How face fluxes are formed from nodal data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reconstruction {
    /// Reconstruct the solution, evaluate the physical flux of the face states.
    Umuscl,
    /// Additionally reconstruct the flux from nodal flux values.
    Fsr,
    /// FSR with flux gradients from solution gradients by the chain rule (2D).
    FsrCr,
}

impl Reconstruction {
    pub fn name(self) -> &'static str {
        match self {
            Reconstruction::Umuscl => "umuscl",
            Reconstruction::Fsr => "fsr",
            Reconstruction::FsrCr => "fsr-cr",
        }
    }
}

impl fmt::Display for Reconstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Reconstruction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "umuscl" => Ok(Reconstruction::Umuscl),
            "fsr" => Ok(Reconstruction::Fsr),
            "fsr-cr" | "fsrcr" => Ok(Reconstruction::FsrCr),
            other => Err(Error::Config(format!(
                "unknown scheme {other:?} (expected umuscl, fsr or fsr-cr)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    LinearAdvection,
    Burgers,
    Euler1D,
    Euler2D,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub kappa: Kappa,
    pub mode: Reconstruction,
}

impl SchemeConfig {
    pub fn new(kappa: Kappa, mode: Reconstruction) -> Self {
        Self { kappa, mode }
    }

    pub fn umuscl(kappa: Kappa) -> Self {
        Self::new(kappa, Reconstruction::Umuscl)
    }

    pub fn fsr(kappa: Kappa) -> Self {
        Self::new(kappa, Reconstruction::Fsr)
    }

    pub fn fsr_cr(kappa: Kappa) -> Self {
        Self::new(kappa, Reconstruction::FsrCr)
    }

    /// The chain-rule variant needs nodal solution gradients, which the
    /// 1D stencil form does not carry.
    pub fn validate_for(&self, equation: Equation) -> Result<()> {
        if self.mode == Reconstruction::FsrCr && equation != Equation::Euler2D {
            return Err(Error::Config(format!(
                "fsr-cr is only available for the 2D Euler equations, not {equation:?}"
            )));
        }
        Ok(())
    }
}
