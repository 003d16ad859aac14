//! Betti number growth along towers of finite normal covers.
//!
//! A computation starts from a group model ([`group`]), a finite free chain
//! complex over its integral group ring ([`complex`]) and a tower of finite
//! quotients given as regular permutation representations. Each level of the
//! tower is reduced to ordinary integer / rational / mod-p matrices
//! ([`reduction`]), from which the crate derives
//!
//! * exact rational and mod-p Betti numbers and their normalized values,
//! * spectral measures, moments and Fuglede–Kadison certificates of the
//!   reduced Laplacians ([`spectral`]),
//! * the local-ring structure behind monotone mod-p convergence in p-power
//!   towers ([`local`]),
//! * residual-exponent fits for p-adic analytic towers ([`padic`]).
//!
//! [`lab`] ties everything together behind a file format and the batch
//! runner used by the `towerlab` binary.

pub mod arith;
pub mod complex;
pub mod error;
pub mod group;
pub mod group_ring;
pub mod lab;
pub mod local;
pub mod padic;
pub mod reduction;
pub mod ring;
pub mod spectral;

pub use complex::{builtin_complex, BuiltinComplex, ChainComplexSpec};
pub use error::{Error, Result};
pub use group::{
    make_builtin_tower, quotient_image, validate_quotient, FiniteQuotient, GroupElement, GroupKind,
    GroupModelSpec, Perm, Tower, TowerFamily,
};
pub use group_ring::{laplacian, GroupRingElement, GroupRingMatrix};
pub use reduction::{betti, betti_table, reduce_matrix, smith_normal_form, BettiTable, FlatMatrix};
pub use ring::CoefficientRing;
pub use spectral::{FkCertificate, SpectralMeasure};
