//! Core library for studying physical-layer secrecy in multi-cell massive MIMO
//! when a multi-antenna adversary actively contaminates the uplink training
//! phase.
//!
//! The crate is organized bottom-up:
//!
//! - [`numerics`]: complex Hermitian linear algebra, seeded random streams,
//!   circularly-symmetric Gaussian sampling.
//! - [`channel`]: system configuration, spatial correlation models, and
//!   channel realization sampling.
//! - [`uplink`]: pilot books, the adversary's optimal training-phase precoder,
//!   MMSE channel estimation under contamination, and null-space projected
//!   estimation.
//! - [`downlink`]: transmit designs (matched filter, artificial noise,
//!   null-space beamforming, and their convex combination) and power splits.
//! - [`analysis`]: large-antenna deterministic equivalents for user SINR and
//!   adversary capacity, secrecy-rate expressions, power-allocation optima,
//!   feasibility conditions, and design-switching thresholds.
//!
//! Monte Carlo trial execution, file formats, and the command-line interface
//! live in the companion `secmimo-sim` crate. This crate is `no_std`-compatible
//! (with `alloc`) when built without the default `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod channel;
pub mod downlink;
mod error;
pub mod numerics;
pub mod uplink;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
