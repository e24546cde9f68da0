//! Integral cohomology of congruence subgroups of SL2(Z).
//!
//! The pipeline is: exact integer linear algebra, free chain complexes and
//! their reduction, explicit free resolutions with contracting homotopies,
//! restriction to finite-index subgroups, Hom into coefficient modules, and
//! Hecke operators built from equivariant chain maps.

pub mod chaincx;
pub mod coeffmod;
pub mod congruence;
pub mod cuspidal;
pub mod cwdvf;
pub mod error;
pub mod exactlin;
pub mod hecke;
pub mod int;
pub mod quadring;
pub mod resolutions;
pub mod sl2z;

pub use error::{Error, Result};
pub use exactlin::{AbelianInvariants, IntMatrix, SmithForm};
pub use int::Int;
