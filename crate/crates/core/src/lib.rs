//! Electrostatics of uniformly charged knots.
//!
//! The crate evaluates the potential of a charged closed curve, locates and
//! classifies its critical points, extracts equipotential surfaces, reads off
//! the Morse code (the sequence of surface genera between critical values)
//! and checks the structural relations that code must satisfy.

pub mod cli;
pub mod critical;
pub mod curve;
pub mod field;
pub mod geometry;
pub mod morse;
pub mod surface;
