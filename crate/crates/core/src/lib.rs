//! Exact-arithmetic calculator for the algebra of twisted Whitney towers:
//! labeled unitrivalent trees with AS/IHX relations, free Lie algebras over
//! the integers, the tree groups `T_n` and `T_n^∞`, the summation maps
//! `eta_n`, and the Milnor / higher-order Arf invariants of intersection
//! forests.
//!
//! Everything is computed over arbitrary-precision integers; group structure
//! comes from Smith normal forms of presentation matrices.

pub mod config;
pub mod eta;
pub mod invariants;
pub mod lie;
pub mod linalg;
pub mod selftest;
pub mod tree_groups;
pub mod trees;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("label {label} out of range 1..={max}")]
    LabelRange { label: u32, max: u32 },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
