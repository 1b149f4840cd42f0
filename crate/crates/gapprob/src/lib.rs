//! Gap probabilities for the Gaussian Hermitian ensemble with an external
//! source and for the Pearcey process, with numerical checks of the
//! integrable identities and PDEs they satisfy.

pub mod cli;
pub mod diffops;
pub mod ensemble_mc;
pub mod domain;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod pde_source;
pub mod pearcey;
pub mod quad;
pub mod real;
pub mod report;
pub mod tau;

pub use domain::{IntervalUnion, PrecisionConfig, SignedLogValue, SourceSpec};
pub use error::{Error, Result};
pub use real::{Mp, Real};
