//! Compiles the guide's code listings as doctests, one module per chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/spin-algebra.md")]
pub mod spin_algebra {}
#[doc = include_str!("../../../book/src/landau-zener.md")]
pub mod landau_zener {}
#[doc = include_str!("../../../book/src/wave-packets.md")]
pub mod wave_packets {}
#[doc = include_str!("../../../book/src/ion-emulator.md")]
pub mod ion_emulator {}
#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
