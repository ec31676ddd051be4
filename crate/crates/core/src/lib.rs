//! Contour dynamics for horizontally periodic α-SQG patches and layers.

pub mod cde;
pub mod contour;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod kernel;
pub mod mollifier;
pub mod oracle;
pub mod point;
pub mod quadrature;
pub mod scenario;
pub mod snapshot;
pub mod special;
pub mod spectral;
pub mod svg;

pub use error::{Error, Result};
pub use point::PlanePoint;
