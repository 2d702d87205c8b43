//! Core numerical kernels for Signorini-type transmission problems across
//! rough periodic interfaces.
//!
//! The crate covers the whole pipeline at fixed oscillation scale `eps` and
//! in the flat-interface limit:
//!
//! * two-component meshes of a cylinder split by a periodic graph interface,
//!   with duplicated trace nodes carrying the jump ([`mesh`]),
//! * P1 assembly of the oscillating-coefficient stiffness, the scaled
//!   interface coupling and loads ([`assemble`]),
//! * projected over-relaxation and an exhaustive active-set oracle for the
//!   jump-constrained variational inequality ([`vi`]),
//! * periodic cell problems, the homogenized tensor, the effective interface
//!   conductance and the regime classification ([`homogenize`]),
//! * the three regime-dependent limit problems ([`limit`]) and the eps-sweep
//!   harness that compares against them ([`sweep`]).
//!
//! Everything is `no_std` + `alloc`; IO, file formats and the CLI live in the
//! companion `sighom-cli` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assemble;
pub mod cell;
pub mod coeff;
pub mod error;
pub mod fields;
pub mod homogenize;
pub mod limit;
pub mod linalg;
pub mod mesh;
pub mod profile;
pub mod rational;
pub mod sweep;
pub mod vi;

pub use error::{Error, Result};
pub use rational::Rational;
