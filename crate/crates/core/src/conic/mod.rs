//! Conic programming: a small modeling layer and an interior-point solver
//! for linear, second-order cone and semidefinite constraints (real or
//! complex Hermitian blocks).

mod certificate;
mod cones;
mod problem;
mod solver;

pub use certificate::{check_point, ViolationReport};
pub use cones::{smat, svec, Cone};
pub use problem::{
    hvec_constant, BlockKind, BlockSpec, ConicProblem, EqConstraint, HermitianBlock, IneqConstraint, LinExpr,
    ScalarVar, Sense, SocConstraint, SymmetricBlock,
};
pub use solver::{solve, ConicSolution, IterationLog, SolveStatus, SolverOptions};
