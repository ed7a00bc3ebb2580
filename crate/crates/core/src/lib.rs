//! Ground states of Hamiltonian elliptic systems
//! `−Δu = |x|^β |v|^{q−1} v`, `−Δv = |x|^α |u|^{p−1} u` with Dirichlet data,
//! computed by three independent variational frameworks on spectral bases.
#![no_std]
// `num_traits::Float` supplies float math without std; when std is linked
// elsewhere in the graph its inherent methods win and the import looks unused.
#![allow(unused_imports)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod functionals;
pub mod linalg;
pub mod problem;
pub mod solvers;
pub mod spectral;
pub mod symmetry;
pub mod verification;

pub use error::{Error, Result};
