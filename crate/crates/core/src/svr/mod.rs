//! nu-SVR regression with an RBF kernel.

mod grid;
mod kernel;
mod kkt;
mod model;
mod scaling;
mod solver;

pub use grid::{fold_assignment, grid_search, train_with_search, GridCell, GridResult, GridSearchSpec, SvrConfig};
pub use kernel::rbf_kernel;
pub use kkt::{kkt_report, KktReport};
pub use model::{fit_svr, train_nu_svr, train_nu_svr_detailed, KernelKind, SvrModel, SvrParams, MODEL_FORMAT_VERSION};
pub use scaling::ScalingSpec;
pub use solver::{solve_nu_svr, DualSolution, SolverConfig};
