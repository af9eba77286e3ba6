//! Tilings of finite cyclic groups `Z_M = A ⊕ B`.
//!
//! The crate is `no_std` and only needs `alloc`. Sets and multisets on `Z_M` are
//! dense weight vectors; the factorisation of `M` lives in [`Modulus`].

#![no_std]

extern crate alloc;

pub mod arith;
pub mod cuboid;
pub mod cyclo;
mod error;
pub mod modulus;
pub mod multiset;
pub mod ratio;
pub mod reduce;
pub mod search;
pub mod structure;
pub mod tiling;

pub use error::{Error, Result};
pub use modulus::Modulus;
pub use multiset::Multiset;
pub use ratio::Ratio;
pub use tiling::{TilingInstance, VerifiedTiling};

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
