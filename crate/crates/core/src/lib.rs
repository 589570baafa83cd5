//! Toolkit for McEliece-type cryptosystems built on quasi-cyclic LDPC and
//! MDPC codes.
//!
//! The crate is organised bottom-up:
//!
//! - [`gf2`]: the circulant ring GF(2)\[x\]/(x^p - 1) and block matrices of circulants.
//! - [`design`]: private parity-check matrices (random or random-difference-family) and the systematic generator.
//! - [`decoder`]: bit-flipping and sum-product decoders over the sparse private matrix.
//! - [`threshold`]: asymptotic bit-flipping decoding threshold.
//! - [`attacks`]: dual-code and information-set decoding work factors.
//! - [`optimizer`]: decryption-complexity metric and density optimization.
//! - [`crypto`] and [`keyfile`]: key generation, encryption, decryption and file formats.
//! - [`sim`]: Monte Carlo error-rate estimation.

pub mod attacks;
pub mod bits;
pub mod crypto;
pub mod decoder;
pub mod design;
pub mod error;
pub mod gf2;
pub mod keyfile;
pub mod optimizer;
pub mod rng;
pub mod sim;
pub mod threshold;

pub use error::{Error, Result};
