//! Neutral kaon pairs as an open quantum system, and the CHSH-type Bell
//! expressions built from their strangeness and quasi-spin correlations.
//!
//! The crate is organised bottom-up:
//!
//! * [`physics`] holds the kaon constants and the strangeness / mass / CP bases.
//! * [`dynamics`] evolves a single kaon, either through the analytic
//!   non-Hermitian propagator or through the trace-preserving Lindblad
//!   equation on the enlarged surviving ⊕ decayed space.
//! * [`pair`] builds two-kaon states and the detection probabilities.
//! * [`bell`] assembles CHSH values, the strangeness and CP special cases and
//!   the local-hidden-variable bound.
//! * [`optimize`] maximizes CHSH values with a restarted Nelder–Mead search.
//! * [`config`] loads physics and optimizer settings from a flat key-value file.

pub mod bell;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod pair;
pub mod physics;

pub use error::{Error, Result};
pub use linalg::{Mat2, Mat4, C64};
pub use physics::{KaonPhysics, Quasispin};
