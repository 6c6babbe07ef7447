//! Discrete Gagliardo energy, its gradient, and convex minimization solving
//! the variational Dirichlet problem and the obstacle problem, plus the
//! comparison-principle checker.

mod descent;
mod energy;

pub use descent::{
    comparison_check, solve_dirichlet, solve_obstacle, ObstacleSide, SolveOptions, SolveReport,
};
pub use energy::DiscreteEnergy;
