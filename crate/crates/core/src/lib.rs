//! Degree-4 real spherical harmonics with octahedral symmetry.
//!
//! The set of unit-norm harmonics obtained by rotating the reference harmonic
//! `sqrt(7/12) Y₄,₀ + sqrt(5/12) Y₄,₄` is a 3-manifold in ℝ⁹. This crate
//! provides:
//!
//! * [`sh4`]: the coefficient type, basis evaluation and sphere sampling;
//! * [`rotation`]: the 9×9 rotation operators acting on coefficients;
//! * [`variety`]: the manifold as an intersection of quadrics, the
//!   rotation-invariant deviation measure and penalty-driven symmetrization;
//! * [`quotient`]: the octahedral rotation group, fundamental-zone reduction
//!   and nearest-symmetric-harmonic search;
//! * [`io`]: JSON/CSV file formats used by the command-line tool.

pub mod error;
pub mod io;
pub mod quotient;
pub mod rotation;
pub mod sh4;
pub mod variety;

pub use error::{Error, Result};
pub use quotient::{
    euler_from_quaternion, in_fundamental_zone, nearest_symmetric, octahedral_group,
    quaternion_from_euler, quotient_distance, reduce_to_fundamental_zone, NearestSymmetric,
    OctahedralGroup, OrbitSearch, RodriguesVector, UnitQuaternion,
};
pub use rotation::{
    rotate_coeffs, rotation3_from_euler, rx90_matrix, rx_matrix, ry_matrix, rz_matrix,
    EulerAngles, Rotation9,
};
pub use sh4::{
    eval_basis, eval_harmonic, reference_harmonic, sample_sphere, Sh4Coeffs, SphereSampleGrid,
    SphericalPoint,
};
pub use variety::{
    deviation, is_on_manifold, penalty, penalty_gradient, quadric_matrices, residuals,
    symmetrize, symmetrize_tracked, DescentConfig, DescentRecord, DescentStatus, DescentTrace,
    QuadricSet, ResidualVector,
};
