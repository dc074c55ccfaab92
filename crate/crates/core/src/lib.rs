//! Global maximization of trained feed-forward ReLU networks over bounded
//! polyhedra.
//!
//! The crate bundles everything needed end to end:
//!
//! - [`network`] and [`polytope`]: the function being maximized and its domain.
//! - [`linprog`] and [`mipsolver`]: an embedded bounded-variable simplex and a
//!   best-bound branch-and-bound on top of it.
//! - [`formulation`]: pre-activation bounds, the big-M MIP, fixed-pattern LPs
//!   and the restricted neighbourhood MIPs used by local search.
//! - [`samplers`]: the sampled LP decomposition, its local-search variant,
//!   the (optionally warm-started) full MIP and an exhaustive oracle.
//! - [`evt`]: extreme-value index estimation and the sample-count bound.
//! - [`bench`](mod@bench): the desk-scale comparison harness behind `relu-peak bench`.
//!
//! Inner loops (sample batches, pattern enumeration, bench cells) run on
//! rayon when the `parallel` feature is enabled, and sequentially otherwise.

pub mod bench;
pub mod error;
pub mod evt;
pub mod formulation;
pub mod linprog;
pub mod mipsolver;
pub mod network;
pub mod par;
pub mod polytope;
pub mod samplers;

pub use error::{Error, Result};
pub use formulation::{NeuronBounds, ReluMipFormulation};
pub use linprog::{LinearProgram, LpOutcome, Sense};
pub use mipsolver::{MipOutcome, MipStatus, MixedIntegerProgram};
pub use network::{ActivationPattern, ReluNetwork};
pub use polytope::Polytope;
pub use samplers::{OptimizeResult, RunStatus, SamplerConfig};
