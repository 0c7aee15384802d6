//! Exact arithmetic for modular forms of level 1 and Γ₁(3), divided
//! congruences, and f-invariants of products of framed manifolds.
//!
//! Everything is computed over arbitrary-precision rationals; there is no
//! floating point anywhere in this crate.

pub mod arith;
pub mod divcong;
pub mod expr;
pub mod finvariant;
pub mod modforms;
pub mod qseries;

pub(crate) mod linalg;

#[cfg(feature = "testsupport")]
pub mod testsupport;

pub use arith::Rational;
pub use divcong::{CongruenceCertificate, DividedCongruenceClass, InhomogeneousForm};
pub use modforms::{GradedComponent, ModularFormExpansion};
pub use qseries::{IntegralityRing, QSeries};
