//! Desk-scale lab for non-intrusive video QoS estimation.
//!
//! Emulates network-degraded video with known (data rate, packet loss)
//! labels, trains a semi-supervised GAN whose discriminator estimates the
//! labels from the degraded frame alone and whose generator reconstructs
//! the frame, and compares against a paired-input CNN baseline.

pub mod corpus;
pub mod emulator;
pub mod error;
pub mod eval;
pub mod model;
pub mod seed;
pub mod tensor;
