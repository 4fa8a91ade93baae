//! Polarization-adjusted convolutional (PAC) codes over GF(2).
//!
//! The encoding chain is `x = (insert(d) T) G_n` with `G_n = F^{(x)n}`,
//! `F = [[1,0],[1,1]]`, and `T` the upper-triangular Toeplitz matrix of a
//! connection polynomial. Besides the codec this crate provides the
//! cyclic-shift description of the convolution, exact weight spectra, a Fano
//! sequential decoder and a reproducible Monte Carlo harness.

pub mod channel;
pub mod conv;
pub mod cyclic;
pub mod error;
pub mod fano;
pub mod gf2;
pub mod pac;
pub mod polar;
pub mod sim;
pub mod weights;

pub use channel::{ChannelConfig, RngStream};
pub use conv::{ConnectionPolynomial, ToeplitzUT};
pub use error::{Error, ProfileError, Result};
pub use fano::{fano_decode, DecodeResult, DecoderConfig, LlrDomain};
pub use gf2::{BitVec, ShiftSet};
pub use pac::PacCode;
pub use polar::{PolarDim, RateProfile};
pub use weights::WeightSpectrum;
