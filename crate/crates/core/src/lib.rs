//! Proper joint spectra of matrix tuples: pencil evaluation, local branch
//! analysis, Riesz component projections and their limits, the projection
//! identities they satisfy, and Coxeter group representations recovered
//! from spectral data.

pub mod branch;
pub mod coxeter;
pub mod error;
pub mod extrapolate;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod moments;
pub mod pencil;
pub mod riesz;

pub use branch::{
    check_regularity, local_branches, spectral_resolution, t_operator, Branch, BranchKind, BranchOptions,
    RegularityReport, SpectralResolution, TOperator,
};
pub use coxeter::{
    build_representation, check_rigidity, CoxeterMatrix, CoxeterRep, DihedralIrrep, IrrepKind, RigidityOptions,
    RigidityReport, Summand,
};
pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use moments::{verify_tuple, RelationId, RelationReport, Verification, VerifyOptions};
pub use pencil::{is_spectral_point, slice_roots, MatrixTuple, PencilPoint};
pub use riesz::{component_projection, limit_projection, ComponentProjection, LimitOptions, LimitProjection};
