//! Solvers for the two-player behavioral multi-target security game.
//!
//! A defender and an attacker split budgets `B` and `P` over `n` assets. An
//! attack on asset `i` succeeds with probability
//! `p_i = exp(-x_i - a_i) (1 - exp(-y_i))`, and each player may perceive that
//! probability through a Prelec weighting `w(p) = exp(-(-ln p)^alpha)`.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod best_response;
pub mod equilibrium;
pub mod error;
pub mod instances;
pub mod model;
mod roots;
pub mod success;
pub mod weighting;

pub use best_response::{BestResponseOptions, Player};
pub use equilibrium::{DynamicsOptions, EquilibriumResult};
pub use error::{Error, Result};
pub use model::{Allocation, Asset, GameConfig};
