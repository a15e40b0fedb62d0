//! Existence and uniqueness certification for pseudo-likelihood and
//! Gaussian graphical-model estimators, weak-rank estimation, coordinate
//! descent fitters, and Monte Carlo existence curves.

pub mod certify;
pub mod estim;
pub mod graph;
pub mod qmat;
pub mod sim;
pub mod simplex;
pub mod symmat;

pub use certify::{
    check_gaussian, check_pseudo, check_pseudo_recursive, estimate_weak_ranks,
    generic_completion_rank, pseudo_kernel, CertifyError, ExistenceVerdict, GaussianOutcome,
    GaussianVerdict, RankBounds, RankFactor, SubspaceBasis,
};
pub use estim::{
    coordinate_gradients, demonstrate_space_unbounded, evaluate, fit,
    gaussian_stationarity_residual, EstimError,
    FitOptions, FitResult, FitStatus, Objective, ObjectiveKind,
};
pub use graph::{Graph, GraphError, GraphFamily, GraphInvariants};
pub use sim::{
    bound_sweep, existence_curve, sample_covariance, Method, SimConfig, SimCurve, SimError, SimRow,
};
pub use symmat::{SymMatrix, SymMatrixError};
