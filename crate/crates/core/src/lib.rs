//! Fractional calculus in the Mellin frame.
//!
//! Hadamard-type fractional integrals and derivatives, Mellin transforms and
//! convolutions, fractional Mellin differences, Stirling-function series and
//! kernel solvers for two fractional evolution problems in the variable x > 0.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod dd;
pub mod derivative;
pub mod difference;
pub mod error;
pub mod function;
pub mod gamma;
pub mod grid;
pub mod hadamard;
pub mod io;
pub mod jet;
pub mod library;
pub mod mellin;
pub mod oracle;
pub mod order;
pub mod pde;
pub mod quad;
pub mod verification;

pub use error::{Error, Result};
pub use function::{Kind, MellinFunction};
pub use grid::LogGrid;
pub use library::Builtin;
pub use num_complex::Complex64;
pub use order::FracOrder;
