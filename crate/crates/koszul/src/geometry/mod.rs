//! Concrete geometric structures and their induced bivector-vector pairs:
//! contact forms, almost contact metric structures, and locally conformally
//! symplectic pairs, together with the checkers that tie them to the
//! algebroid and compatibility layers.

pub mod contact;
pub mod lcs;

pub use contact::{
    almost_contact_checks, check_contact_algebroid, check_half_kenmotsu_equivalence, contact_from,
    contact_metric_structure, AlmostContactMetric, ContactStructure,
};
pub use lcs::{check_lcs_jacobi_equivalence, lck_check, lcs_from, LcsStructure};

use thiserror::Error;

use crate::algebroid::AlgebroidError;
use crate::manifold::FieldError;
use crate::metric::MetricError;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("the one-form is not a contact form: its flat map is degenerate")]
    DegenerateContactForm,
    #[error("the 2-form is degenerate")]
    DegenerateTwoForm,
    #[error("a contact chart must have odd dimension, got {0}")]
    EvenDimension(usize),
    #[error("a symplectic-type chart must have even dimension, got {0}")]
    OddDimension(usize),
    #[error("conformal checks need the potential f with theta = df")]
    MissingPotential,
}
