//! Greedy strongly orthogonal decomposition (GSOD) of dense real tensors.
//!
//! A p-tensor is treated as the multilinear form
//! `A[u_1, …, u_p] = Σ_α a_α u_{1,α_1} ⋯ u_{p,α_p}`. The GSOD repeatedly
//! maximizes this form over products of unit spheres, each time restricted
//! to points strongly orthogonal to the components found so far. The crate
//! also checks criticality of decomposition components, enumerates the
//! sign orbits of the components, and ships independent reference
//! computations (Jacobi SVD, brute-force maximization, ground-truth
//! fixtures) for testing.

pub mod criticality;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod sod;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use sod::{Decomposition, Term, ValidationReport};
pub use solver::{gsod, strong_rank, GsodResult, SolverOptions};
pub use tensor::{DenseTensor, MultiVector, Shape, SignDistribution, TorusPoint};
