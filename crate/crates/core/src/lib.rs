//! Numerical kernels for the fractional Peierls-Nabarro model: the Lévy operator, layer and
//! corrector profiles, the cell problem and its effective Hamiltonian, homogenization runs
//! and the hull-function ansatz.
//!
//! The operator, potential, series and interpolation code is generic over [`Real`]; the
//! solvers built on top of them work in `f64` (see the aliases below).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell;
pub mod error;
pub mod fracop;
pub mod grid;
pub mod homog;
pub mod hull;
pub mod interp;
pub mod layer;
pub mod potential;
pub mod quad;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use fracop::{AnisotropyKernel, FractionalOrder, SplitRadius};
pub use grid::{Geometry, GridField, TailModel};
pub use potential::{Forcing, PeriodicPotential};
pub use scalar::Real;

pub type Field = GridField<f64>;
pub type Tail = TailModel<f64>;
pub type Order = FractionalOrder<f64>;
pub type Kernel = AnisotropyKernel<f64>;
pub type Potential = PeriodicPotential<f64>;
pub type Sigma = Forcing<f64>;
