//! Birkhoff-James orthogonality in finite-dimensional normed spaces.
//!
//! Polyhedral spaces (`l_inf^n`, `l_1^n`, balls given by vertices or facets)
//! are handled in exact rational arithmetic; `l_p^n` for `1 < p < infinity`
//! uses `f64` with the tolerances in [`scalar`] and [`ortho`].

pub mod error;
pub mod fixtures;
pub mod isometry;
pub mod linalg;
pub mod lp;
pub mod ortho;
pub mod preserve;
pub mod query;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod search;
pub mod space;
pub mod support;

pub use error::{Error, Result};
pub use isometry::{
    bkt_refined_check, certify_isometry, counterexample_operator, kset_conditions, IsometryCertificate,
    IsometryVerdict, KSetQuery, KSetReading,
};
pub use linalg::{Functional, LinearOperator, Matrix, Vector};
pub use ortho::{is_orthogonal, oracle_is_orthogonal, LineSearch, OrthoCertificate, OrthoResult};
pub use preserve::{
    exists_preserved_direction, find_codim2_subspace, preserves_at_point, preserves_in_direction,
    preserves_wrt_kernel, preserves_wrt_subspace, PreservationReport,
};
pub use query::{run_query, Answer, Context};
pub use scalar::{Field, Rational, Scalar};
pub use search::Searchable;
pub use space::{make_space, LpSpace, NormedSpace, PolyhedralSpace, Space, SpaceKind};
pub use support::{associated_cones, smoothness_order, support_face, AssociatedCone, SupportFace};
