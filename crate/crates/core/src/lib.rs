//! Operational theories, their generalized probabilistic theories (GPTs), and
//! classical (noncontextual) representations of them.
//!
//! The crate is organized along the pipeline it implements:
//!
//! - [`quotient`] groups context-labelled procedures into operational
//!   equivalence classes and emits a [`gptcore::GptFragment`].
//! - [`tomo`] builds transition matrices, checks the identity decomposition
//!   and converts processes to standard form.
//! - [`frames`] builds frame/dual-frame representations and checks whether
//!   they are positive (i.e. ontological models).
//! - [`embed`] decides simplex-embeddability of polyhedral fragments by
//!   linear programming and returns self-verifying certificates.
//! - [`quantum`] turns density operators, effects and Kraus channels into GPT
//!   data, enumerates stabilizer fragments and builds Gross's Wigner frame.
//! - [`schema`] and [`zoo`] provide the versioned JSON formats and a set of
//!   ready-made models.

pub mod embed;
pub mod error;
pub mod frames;
pub mod gptcore;
pub mod linalg;
pub mod lp;
pub mod quantum;
pub mod quotient;
pub mod report;
pub mod schema;
pub mod tomo;
pub mod zoo;

pub use error::{Error, Result};
pub use gptcore::{
    compose_par, compose_seq, evaluate, validate_fragment, GptEffect, GptFragment, GptState,
    GptTransformation, SystemRegistry, SystemSpec, DEFAULT_TOL,
};
