//! Exact-arithmetic toolkit for T-adic exponential sums over finite fields.
//!
//! The crate computes, with no floating point anywhere:
//! - lattice geometry of an integral convex polytope containing the origin
//!   (facets, cone membership, the gauge degree function, normalized volume),
//! - the Hodge polygon and the arithmetic polygon attached to the polytope,
//! - C-functions and L-functions of T-adic exponential sums by direct
//!   summation over rational points,
//! - the same C-function a second time through a truncated Dwork operator
//!   and a division-free characteristic series,
//! - Newton polygons of the results and comparisons against the polygon
//!   lower bounds, with explicit "certified vs refuted" semantics.
//!
//! All modular arithmetic is exact in `Z/p^M`; all polygon arithmetic is
//! exact over the rationals. The [`harness`] module ties everything into
//! configurable verification runs and machine-readable reports.
//!
//! ```
//! use tadic::polytope::{build_cone_data, Polytope};
//! use tadic::polygons::{arithmetic_polygon, hodge_polygon};
//!
//! let poly = Polytope::new(1, vec![vec![0], vec![3]]).unwrap();
//! let cone = build_cone_data(&poly).unwrap();
//! assert_eq!(cone.d(), 3);
//! let arith = arithmetic_polygon(&cone, 11, 5);
//! assert_eq!(arith.value(3), hodge_polygon(&cone, 5).value(3) * num_bigint::BigInt::from(10));
//! ```

pub mod dwork;
pub mod harness;
pub mod padic;
pub mod polygons;
pub mod polytope;
pub mod sums;
pub mod tseries;

pub use harness::{run_verify, InstanceConfig, VerificationReport};
pub use polygons::Polygon;
pub use polytope::{ConeData, Degree, Polytope};
