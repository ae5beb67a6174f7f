//! Kalikow's auxiliary walk: the environment-averaged kernel whose Green
//! function is the averaged Green function, its second-order expansion, and
//! the field of local drifts on `Z^d`.

pub mod auxiliary;
pub mod drift;
pub mod hull;
pub mod lemma2;

pub use auxiliary::{auxiliary_kernel, prop1_residual, verify_prop1, AuxBudget, AuxMethod, AuxiliaryKernel};
pub use drift::{drift_field, DriftField, DriftSettings};
pub use hull::{convex_hull, Hull};
pub use lemma2::{j_tilde, lemma2_bound, lemma2_scaling, Lemma2Report, Lemma2Row};
