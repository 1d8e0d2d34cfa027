//! Consistent-planning equilibria under non-exponential discounting.
//!
//! The equilibrium value kernel `P(t, s)` on the triangle `0 ≤ t ≤ s ≤ T`
//! solves a non-local Riccati equation: the feedback at `s` is read off the
//! diagonal `P(s, s)`. Two independent routes are provided:
//!
//! * [`single_partition_solve`] / [`game_partition_solve`]: precommitment on
//!   each cell of a partition, glued backward (first order in the mesh);
//! * [`vdie_solve`] + [`reconstruct_kernel`]: the diagonal `Γ(t) = P(t, t)` as
//!   the solution of a Volterra differential-integral equation, then the full
//!   kernel by quadrature.
//!
//! For `R = 1` the game kernel is known in closed form ([`symmetric_kernel`]).

mod kernel;
mod partition;
mod recursion;
mod refine;
mod vdie;

pub use kernel::{KernelBounds, TriangularKernel};
pub use partition::Partition;
pub use recursion::{
    game_partition_solve, single_partition_solve, EquilibriumSolution, Players,
    DEFAULT_SUBGRID_FACTOR,
};
pub use refine::{refine_to_tolerance, RefineOptions, Refinement};
pub use vdie::{
    reconstruct_kernel, reconstruct_kernel_strided, symmetric_kernel, vdie_solve, GammaCurve,
};
