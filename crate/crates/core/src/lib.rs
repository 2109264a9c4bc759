//! Information-plane laboratory.
//!
//! Trains small dense networks, discretizes inputs, activations and outputs,
//! and tracks two families of information functionals over training:
//!
//! * the standard Information Bottleneck terms `I(T;Y)` and `I(X;T)`,
//! * the synergy-based Generalized Information Bottleneck, whose terms are
//!   measured against the PMI-reweighted prediction/label pair `Q(Z,Y)`, and
//!   its sum-versus-whole variant.
//!
//! The crate is organised as
//!
//! * [`estimators`]: binning, plugin entropy / MI, exact MI over enumerated
//!   pmfs and the loss-comparison estimator,
//! * [`objectives`]: PMI reweighting, feature synergy, IB / GIB / SVW reports
//!   and the IB ≤ GIB inequality checker,
//! * [`nets`]: a small f64 dense-network engine with FGSM,
//! * [`datagen`]: synthetic generators, exact pmf enumeration and IDX loading,
//! * [`runner`]: experiment configs, probe scheduling, trajectories and
//!   CSV / manifest emission.

pub mod datagen;
pub mod estimators;
pub mod nets;
pub mod objectives;
pub mod runner;

mod error;
mod matrix;

pub use error::{Error, Result};
pub use matrix::SampleMatrix;
