//! Exact arithmetic toolkit for rational approximation of p-adic integers.
//!
//! The crate builds truncated p-adic integers (lacunary, factorial,
//! digit-rule, Schneider continued fraction and digit-surgery families),
//! extracts their classical and multiplicative best-approximation chains
//! from the congruence lattices `{(x, y) : x ≡ yξ mod p^v}`, turns chains
//! into exponent estimates and checks the known inequalities between them.
//!
//! All valuations and heights are exact integers. Floating point only
//! appears when exponents (ratios of logarithms) are reported.

pub mod constructors;
pub mod error;
pub mod exponents;
pub mod format;
pub mod lattice;
pub mod padic;
pub mod verify;

pub use error::{Error, Result};
pub use padic::{ApproxPair, PAdicNumber, Valuation};
