//! Localizable information and quantum deficit of distributed quantum states.
//!
//! The crate computes the information content `I = N - S` of a state shared
//! between parties, an upper bound on the part of it that can be brought to
//! local form by noisy local operations and dephased communication (from the
//! min-entropy of a reduced state), and a lower bound from the best
//! dephasing in an implementable product basis. It also simulates the
//! underlying distillation and dephasing protocols.

pub mod bounds;
pub mod channels;
pub mod cli;
pub mod distillsim;
pub mod error;
pub mod ipbopt;
pub mod matcore;
pub mod measures;
pub mod states;
pub mod tolerances;

pub use error::{Error, Result};
