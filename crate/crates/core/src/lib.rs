//! Physics-informed neural network benchmark core.
//!
//! Solves a catalogue of reaction-diffusion and wave equations three ways:
//! closed-form oracles ([`oracles`]), finite-difference schemes ([`fdm`]) and
//! unsupervised physics-informed networks ([`trainer`]), and measures how far
//! the network solutions land from the other two.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. File formats, plotting and the command-line front end live in the
//! companion `pinnbench` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod autodiff;
pub mod fdm;
mod math;
pub mod network;
pub mod optim;
pub mod oracles;
pub mod problems;
pub mod sampling;
pub mod trainer;

pub use autodiff::{Jet, Scalar, Tape, Var};
