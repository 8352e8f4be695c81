//! Finite-difference solution of the clamped fourth-order problem on the
//! unit cube, together with the discrete-analysis toolkit used to verify it:
//! mollified sources, discrete Sobolev and fractional boundary norms,
//! reflection extension and inverse-trace operators, summation-by-parts
//! identities, and manufactured-solution convergence studies.

pub mod analysis;
pub mod error;
pub mod extend;
pub mod field;
pub mod grid;
pub mod mollify;
pub mod norms;
pub mod ops;
pub mod report;
pub mod solve;
pub mod sources;

pub use error::{Error, Result};
pub use field::{FaceField, LatticeField};
pub use grid::{GridSpec, PointClass};
pub use ops::BcScheme;
