//! Non-binary LDPC codes over GF(2^m) with FFT-based q-ary sum-product
//! decoding, and multilevel coding over square QAM with multistage decoding.

pub mod analysis;
pub mod channel_sim;
pub mod codes;
pub mod error;
pub mod galois;
pub mod messages;
pub mod mlc;
pub mod modem;
pub mod qspa;

pub use error::{Error, Result};
