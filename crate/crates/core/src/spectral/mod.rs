//! Separated Laplace and Schrödinger eigenproblems on warped products.

mod eigen;
mod ground;
mod pencil;
mod polish;

pub use eigen::{
    eigenfunction_u, lambda1, mode_eigenpair, normalize_profile, EigenResult, ModeEigenpair, ModeValue, RefinementStep,
    SolverSettings, DEGENERACY_TOL, ORDER_WINDOW,
};
pub use ground::{build_j, build_j_deviation, residual_j_equation, schrodinger_ground, GroundState};
pub use pencil::{assemble, fiber_eigenvalue, Discretization};
