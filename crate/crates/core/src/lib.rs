//! Right inverse of `curl + λ` built from the λ-Teodorescu volume transform.
//!
//! The crate discretizes the weakly singular volume potentials on voxelized
//! model domains, verifies their operator identities with finite differences
//! on interior grids, and uses them to construct metaharmonic conjugates,
//! solutions of a Neumann problem for force-free fields, and weak solutions
//! of the time-harmonic Maxwell system in achiral and chiral media.
//!
//! Field values are [`Biquaternion`]s: complex quaternions `w0 + w⃗`.

pub mod conjugate;
pub mod domain;
pub mod error;
pub mod fielddiff;
pub mod forcefree;
pub mod kernels;
pub mod maxwell;
pub mod neumann;
pub mod potentials;
pub mod quaternion;
pub mod rightinverse;
pub mod tolerances;
pub mod verify;

pub use domain::{Field, FieldKind, FieldSample, GridMeta, Point, PointSet, Shape, VoxelDomain};
pub use error::{Error, Result};
pub use kernels::Sign;
pub use quaternion::{Biquaternion, CVec3, C64};
pub use tolerances::{ToleranceProfile, Tolerances};
