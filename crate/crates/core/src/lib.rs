//! Exact computer algebra for A-infinity algebras over semisimple base
//! rings: bimodules and their hom complexes, subalgebra pairs and their
//! boundary homomorphism, curved deformations with their localized module
//! categories, and truncated Hochschild homology. All arithmetic is exact
//! (rationals or a prime field); every identity is verified componentwise.

pub mod ainfty;
pub mod bimod;
pub mod complex;
pub mod curved;
pub mod fixtures;
pub mod graded;
pub mod hochschild;
pub mod matrix;
pub mod pair;
pub mod scalar;
pub mod sign;
pub mod tensor;

pub use ainfty::{bar_differential, from_associative, validate_ainfty, AInftyAlgebra, ValidationReport};
pub use bimod::{diagonal, mapping_cone, ses_boundary, Bimodule, PreHom, Ses};
pub use complex::{map_on_cohomology, Cohomology, ComplexMap, TruncatedComplex};
pub use graded::{BaseRing, BasisElem, Elem, GradedMap, GradedSpace};
pub use matrix::SparseMat;
pub use pair::SubalgebraPair;
pub use scalar::{FieldSpec, Scalar};
pub use sign::{koszul_sign, SignContext, SignEntry};
