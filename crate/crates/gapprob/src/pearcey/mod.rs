//! Pearcey functions, the Pearcey kernel and its Fredholm determinant.

pub mod fredholm;
pub mod functions;
pub mod kernel;
pub mod pde;
pub mod scaling;

pub use fredholm::{fredholm_log_det, fredholm_log_det_mp, FredholmDiscretization};
pub use functions::{pearcey_p, pearcey_q, PearceyEngine, QuadEngine, SeriesEngine};
pub use kernel::{kernel, kernel_integral};
pub use pde::{residual_pearcey_pde, residual_pearcey_pde_mp, ChartKind, PearceyFdConfig, PearceyForm, PearceyTerms, PearceyPdeReport};
pub use scaling::{scaling_limit_report, ScalingReport, ScalingRow};
