//! catlab: cavity-field states of a driven, dispersively coupled three-level
//! atom, with a full set of nonclassicality witnesses.
//!
//! The library builds the field states analytically (coherent branches, their
//! statistical mixture, and measurement-conditioned superpositions), validates
//! them against independent numerical propagators, and evaluates photon
//! statistics, Mandel Q, quadrature squeezing, g²(0), antibunching, and the
//! Wigner and Husimi distributions — each analytic route cross-checked
//! against a truncated-Fock-space oracle.

pub mod cli;
pub mod error;
pub mod fock;
pub mod model;
pub mod phase_space;
pub mod witness;

pub use error::{Error, Result};
