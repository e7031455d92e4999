//! Numerics for Jacobi matrices with finite-gap essential spectrum: potential theory of
//! the set, the isospectral torus, Szegő-class functionals, left-shift dynamics, Jost
//! functions on a single interval, and polynomial asymptotics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod quadrature;
pub mod poly;
pub mod gapset;
pub mod jacobi;
pub mod torus;
pub mod szego;
pub mod dynamics;
pub mod jost;
pub mod asymptotics;
pub mod io;
pub mod cli;
pub mod acceptance;

pub use error::{Error, Result};
pub use gapset::{FiniteGapSet, GreenFunction};
pub use jacobi::{DiscretizedMeasure, JacobiCoeffs};
pub use torus::{Divisor, TorusPoint};
