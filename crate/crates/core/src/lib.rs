//! Certification, construction and falsification of additive upper bounds
//! `α₁(x₁) + α₂(x₂) ≤ β(x₁ + x₂)` for comparison functions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod construct;
pub mod definitions;
pub mod error;
pub mod expr;
pub mod funcmodel;
pub mod grid;
pub mod verify;

pub use error::{Error, Result};
