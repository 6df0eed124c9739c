//! Tools for studying the pedagogical roles of technical documents.
//!
//! The library covers the full experimental pipeline: ingesting an annotated
//! corpus, resolving majority labels and measuring inter-annotator agreement,
//! turning sentences into vectors (precomputed files or a built-in hashing
//! encoder), clustering sentence vectors into a bag-of-clusters document
//! representation, four role classifiers, and cross-validated evaluation
//! reports. The `pedroles` binary wires these pieces into subcommands.

pub mod agreement;
pub mod bosec;
pub mod classifiers;
pub mod commands;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod rng;
pub mod roles;
pub mod tables;
pub mod textproc;

pub use error::{Error, Result};
pub use roles::{Role, RoleSet};
