//! Stationary configurations of `N` classical electrons bound to a nucleus of
//! charge `Z` in a static electric field along `z`.
//!
//! The saddles of the potential
//!
//! ```text
//! V = -Σ Z/|r_i| + Σ_{i<j} 1/|r_i - r_j| - F Σ z_i
//! ```
//!
//! gate simultaneous escape of all electrons. Their energies, unstable
//! directions and Lyapunov exponents give the threshold exponent
//! `μ = Σ λ_i / λ_r` of the multiple-ionization cross section.
//!
//! * [`model`] evaluates the potential, its gradient and Hessian.
//! * [`ring`] holds the closed-form ring saddles and the ring-plus-center family.
//! * [`finder`] runs the multistart Newton–Raphson enumeration.
//! * [`stability`] classifies the Hessian spectrum and computes the exponents.
//! * [`symmetry`] canonicalizes configurations and assigns `C_kv` labels.
//! * [`record`] holds the persisted saddle records and run manifests.

pub mod error;
pub mod finder;
pub mod model;
pub mod record;
pub mod ring;
pub mod stability;
pub mod symmetry;

pub use error::{Error, Result};
pub use finder::{NewtonResult, NewtonStatus, SearchOutcome, SearchParams};
pub use model::{Configuration, ModelParams};
pub use record::{RunManifest, SaddleRecord};
pub use ring::{RingPlusCenterSaddle, RingSaddle};
pub use stability::{ExponentReport, ModeKind, StabilitySpectrum};
pub use symmetry::{CanonicalForm, SymmetryLabel};
