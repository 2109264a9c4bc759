//! Information functionals over binned features and network outputs.
//!
//! Every term against `Q(Z, Y)` is a weighted plugin MI: `Q` is the stream of
//! `(z, y)` pair symbols, and each sample is weighted by its empirical
//! pointwise-mutual-information ratio `p(z, y) / (p(z) p(y))`.

mod pmi;
mod terms;
mod theorem;

pub use pmi::{pmi_reweight, PmiWeightedJoint};
pub use terms::{
    feature_synergy, gib_terms, ib_terms, svw_terms, Beta, FeatureTerms, MiCounter, ObjectiveKind,
    ObjectiveReport, SynergyReport,
};
pub use theorem::{check_theorem1, Theorem1Check, THEOREM_TOLERANCE};
