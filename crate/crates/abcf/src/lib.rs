//! (a,b)-continued fractions, their reduction map and its attractor.

pub mod attractor;
pub mod cf;
pub mod cycles;
pub mod error;
pub mod exceptional;
pub mod geom;
pub mod measures;
pub mod mobius;
pub mod natext;
pub mod quad;
pub mod scalar;

pub use cf::{Params, ParamError, CfError};
pub use error::{ArithError, MatrixKind};
pub use mobius::{Gen, Mobius};
pub use scalar::{ExtReal, Scalar};
