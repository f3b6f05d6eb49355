//! Privacy protection for tabular medical data.
//!
//! The crate follows a three-stage workflow:
//!
//! 1. **Assess**: load a dataset, split its attributes by role (quasi-identifier,
//!    sensitive, non-sensitive, target) and score every attribute's disclosure
//!    risk as its mutual information with the diagnosis target ([`risk`]).
//! 2. **Protect**: run a [`transforms::ProtectionPlan`] made of additive or
//!    multiplicative noise, k-anonymity, l-diversity, binning and masking steps.
//! 3. **Re-assess**: compare the published data against the raw data, both on
//!    disclosure risk and on classification utility ([`utility`]).
//!
//! Hot loops (per-attribute scoring, KSG neighbour counts, KNN prediction) run
//! on rayon when the `parallel` feature is on; see [`exec`].

pub mod dataset;
pub mod exec;
pub mod risk;
pub mod rng;
pub mod transforms;
pub mod utility;

pub use dataset::{
    load_csv, read_csv, AttributeRole, Column, ColumnKind, Dataset, DatasetError, Interval,
    PartitionView, RoleMap, Schema,
};
pub use exec::Execution;
pub use risk::{RiskError, RiskReport};
pub use transforms::{ProtectionPlan, SuppressionLog, TransformError, TransformStep};
pub use utility::{ClassifierSpec, UtilityError, UtilityReport};
