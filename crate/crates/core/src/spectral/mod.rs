//! Model domains, Dirichlet eigenbases, quadrature and spectral operators.

pub mod basis;
pub mod bessel;
pub mod domain;
pub mod field;
pub mod quadrature;

pub use basis::{build_basis, BoundaryRule, Mode, NodeLayout, Parity, SpectralBasis, MAX_MODES};
pub use domain::{Domain, Point};
pub use field::{
    apply_frac, apply_inverse_laplacian, dirichlet_pairing, es_norm, l2_inner, lr_norm,
    weighted_power_integral, Field,
};
