//! Petz-Augustin capacity of classical-quantum channels.
//!
//! For a channel `W: j ↦ W(j)` on `d × d` density matrices and an order
//! `α ∈ [1/2, 1)`, the capacity
//!
//! ```text
//! C_{W,α} = max_p I_α^R(p, W) = max_p I_α^A(p, W)
//! ```
//!
//! is computed by two first-order methods:
//!
//! * [`solvers::fgm_capacity`], a universal fast gradient method on the
//!   exponentiated Petz-Rényi objective `g̃(p) = Tr[(Σ_j p_j W(j)^α)^{1/α}]`,
//!   which is Hölder smooth;
//! * [`solvers::emd_capacity`], entropic mirror descent on `−I_α^A`, whose
//!   gradient comes from the contractive fixed-point solver in [`augustin`].
//!
//! [`checks`] verifies the smoothness and contraction properties the
//! guarantees rest on, and [`oracle`] provides grid-search references for
//! small classical channels.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augustin;
pub mod channel;
pub mod checks;
pub mod error;
pub mod experiment;
pub mod matcore;
pub mod oracle;
pub mod renyi;
pub mod simplex;
pub mod solvers;

pub use augustin::{augustin_information, solve_augustin, AugustinOptions, FixedPointOutput};
pub use channel::{load_channel, random_channel, save_channel, CQChannel, ClassicalChannel};
pub use error::{Error, Result};
pub use matcore::{DensityMatrix, HermitianMatrix};
pub use renyi::{holder_constants, renyi_gradient, renyi_information, renyi_objective};
pub use simplex::ProbVector;
pub use solvers::{emd_capacity, fgm_capacity, EpsilonPolicy, SolverConfig, SolverOutput};
