//! Numerical study of the singular minimization constant
//! `μ(Ω) = lim_{q→0⁺} λ_q(Ω)|Ω|^{p/q}` of the p-Laplacian on planar domains.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod field_ops;
pub mod geometry;
pub mod io;
pub mod linalg;
pub(crate) mod optim;
pub mod quadrature;
pub mod radial;
pub mod solver;

pub use error::{Error, Result};
pub use field_ops::{MeanValue, ScalarField};
pub use geometry::{make_domain, normalize_volume, scale_domain, GridDomain, Shape, ShapeSpec};
