//! Transition probabilities on the lattice of projections of a
//! finite-dimensional complex Hilbert space.
//!
//! For projections `p ≠ 0` and `q`, the transition probability `P(q|p)` is
//! the value `r` that every state with `μ(p) = 1` assigns to `q`, when such a
//! value is forced. It exists exactly when `pqp = r·p`.
//!
//! - [`kernel`]: dense complex matrices, range bases, spectra, Haar unitaries.
//! - [`lattice`]: validated projections with order, orthogonality, meet, join.
//! - [`transition`]: existence and value of `P(q|p)` and its properties.
//! - [`states`]: density-matrix states, conditioning, and the certificate
//!   ruling out dispersion-free states.
//! - [`generators`]: the worked example pairs and random families.

#![forbid(unsafe_code)]

pub mod error;
pub mod generators;
pub mod kernel;
pub mod lattice;
pub mod states;
pub mod transition;

pub use error::{Error, Result};
pub use kernel::{ComplexMatrix, Complex64, Ket, ToleranceConfig};
pub use lattice::Projection;
pub use states::{DensityState, ExclusionCertificate};
pub use transition::{Classification, ClassificationReport, TransitionResult};
