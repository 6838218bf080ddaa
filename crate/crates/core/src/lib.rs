//! Exact computation of Chern-class operations from algebraic Morava K-theories
//! to Chow groups, evaluated on products of projective spaces.
//!
//! Layers, bottom up: [`exactnum`] (rationals, valuations, F_p), [`polyring`]
//! (weighted truncated polynomials), [`fgl`] (formal group laws), [`chernalg`]
//! (symbolic Chern polynomials), [`caot`] (additive operations as G-data) and
//! [`chernbuild`] (the inductive construction and its verification suites).

pub mod caot;
pub mod chernalg;
pub mod chernbuild;
pub mod cli;
pub mod config;
pub mod error;
pub mod exactnum;
pub mod fgl;
pub mod polyring;

pub use error::{Error, Result};
pub use exactnum::{Prime, Rational, Valuation};
