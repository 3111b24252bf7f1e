//! Discrepancy of arithmetic progressions on integer boxes and convex bodies: progression
//! families, lattice-point counting, factorization certificates, walk colorings, and
//! counting lower bounds.

pub mod apgen;
pub mod body;
pub mod error;
pub mod fourier;
pub mod gamma2;
pub mod lattice;
pub mod system;
pub mod verify;
pub mod walk;

pub use apgen::{BoxSpec, Guard};
pub use body::{Polytope, ShiftedBody};
pub use error::{Error, Result};
pub use gamma2::{Certificate, SparseMatrix};
pub use lattice::{LatticePoint, Universe};
pub use system::{Coloring, OrderingSigma, SetSystem};
