//! Link-level toolkit for DPSS-precoded OFDM.
//!
//! The crate compares three orthonormal signalling bases built on top of an
//! `N`-point OFDM modulator: plain OFDM, DFT precoding (SC-FDMA) and DPSS
//! precoding. A channel path whose delay is not an integer number of samples
//! expands into an infinitely long integer-tap response once the signal is
//! band limited, so a guard prefix no longer removes inter-symbol
//! interference (ISI). The modules here measure that leakage exactly, bound
//! it analytically, and run Monte-Carlo symbol-error-rate campaigns with a
//! low-power user sandwiched between two high-power users.
//!
//! Module map:
//!
//! * [`dpss`] discrete prolate spheroidal sequences via the commuting
//!   tridiagonal matrix.
//! * [`waveform`] effective bases `O = F S` and their prefixed variants.
//! * [`channel`] fractional-delay multipath channels, dense and streaming.
//! * [`isimetrics`] correlation tensors, tail energies, ISI energy and its
//!   upper bound, S2I sweeps.
//! * [`linksim`] QPSK multi-user frames, MMSE detection and SER curves.
//! * [`report`] CSV writers shared by the command-line tool.
//!
//! A sequence of length `N` is stored 0-based; sample `k` sits at the centred
//! time index `n = k - (N - 1) / 2`, which is a half-integer when `N` is even.

// Guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dpss;
mod error;
pub mod isimetrics;
pub mod linksim;
pub mod numeric;
pub mod report;
mod tridiag;
pub mod waveform;

pub use error::{Error, Result};
pub use numeric::C64;
