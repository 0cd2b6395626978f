//! Node-centered finite-volume schemes for the Burgers and Euler equations
//! with kappa-reconstruction (UMUSCL), flux-and-solution reconstruction (FSR)
//! and its chain-rule variant (FSR-CR), together with a manufactured-solution
//! verification harness that exposes "false" third-order accuracy.

pub mod analysis;
pub mod equations;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod mms;
pub mod numflux;
pub mod reconstruction;
pub mod residual;
pub mod scheme;
pub mod solvers;

pub use equations::{Gas, Primitive1, Primitive2, ScalarLaw, UnitNormal, Vec3, Vec4};
pub use error::{Error, Result};
pub use grid::{Grid1D, Grid2D};
pub use reconstruction::Kappa;
pub use scheme::{Equation, Reconstruction, SchemeConfig};
