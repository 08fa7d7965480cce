//! Klein tunneling of pseudospin-1 Maxwell particles on a linear potential.
//!
//! The crate offers three routes to the same scattering probabilities:
//!
//! * [`lz_analytics`]: closed-form Landau-Zener transition probabilities;
//! * [`lz_oracle`]: direct integration of the swept few-level problem;
//! * [`wavepacket`]: split-operator propagation of spinor wave packets;
//!
//! plus [`ion_emulator`], a Fock-space model of the two-ion setup that realizes
//! the same Hamiltonian, and [`cli_io`] which drives all of them from plain
//! `key = value` configuration files.
//!
//! A guide with worked examples lives in the `book/` directory of the
//! repository.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod error;
pub mod ion_emulator;
pub mod lz_analytics;
pub mod lz_oracle;
pub mod spin_algebra;
pub mod wavepacket;

pub use error::{Error, ErrorKind, Result};
pub use lz_analytics::TransitionProbabilities;
pub use spin_algebra::{Band, PhysicalParams, Spin, SpinAlgebra};
pub use wavepacket::{BandPopulations, Grid1D, SpinorField};
