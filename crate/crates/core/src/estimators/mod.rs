//! Discretization and mutual-information estimation. All quantities are in bits.

mod binning;
mod exact;
mod loss_comparison;
mod plugin;
mod view;

pub use binning::{bin_equal_width, bin_values, BinnedMatrix, BinningSpec, RangePolicy};
pub use exact::{exact_mi, ExactPmf, PMF_SUM_TOLERANCE};
pub use loss_comparison::{loss_comparison_mi, LossComparisonConfig, LossComparisonEstimate};
pub use plugin::{entropy, mutual_information, pair_view, MI_CLAMP};
pub use view::{
    column_views, joint_view, leave_one_out_views, DiscreteView, Weights, WEIGHT_SUM_TOLERANCE,
};
