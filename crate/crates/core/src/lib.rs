//! Numerics for the non-linear continuity equation `du/dt + div(a f(u)) = 0`
//! on the periodic unit torus: a class of conservative monotone explicit
//! schemes driven by rough velocity fields, the log-scale semi-norms that
//! measure their regularity, Littlewood-Paley/Besov machinery, and the
//! commutator diagnostics tying the two together.

// index-based loops are the idiom throughout the lattice kernels, and the
// negated comparisons are deliberate NaN-rejecting parameter gates
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod commutator;
pub mod error;
pub mod fit;
pub mod flux;
pub mod forge;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod oracle;
pub mod scheme;
pub mod spectral;

pub use error::{CoreError, Result};
pub use flux::{FluxKind, FluxLaw};
pub use grid::{
    discrete_w1p, lorentz_q1_norm, lp_norm, Exponent, GridSpec, ScalarField, VectorField,
};
pub use kernel::{
    discrete_seminorm, kernel_mass, FoldedKernel, KernelLadder, LogKernel, SemiNormParams,
};
pub use scheme::{SchemeDef, StepReport};
