//! Experiment orchestration: declarative configs, probe scheduling,
//! information-plane trajectories, normalization and CSV / manifest output.

mod config;
mod emit;
pub mod presets;
mod run;
mod trajectory;

pub use config::{DatasetParams, ExperimentConfig, ExperimentKind, HiddenRange, IbLayer};
pub use emit::{
    emit, format_sig9, parse_trajectory_csv, trajectory_csv, trajectory_file_name, CsvRow, Manifest, RunRecord,
    RunStatus, Timing, TrajectoryRecord, CSV_HEADER, MANIFEST_FILE,
};
pub use run::{
    prepare_data, run_experiment, run_seed, synergy_rows, ExperimentResult, PreparedData, SynergyRow,
    SYNERGY_TABLE_FILE,
};
pub use trajectory::{
    compression_score, compression_score_of, normalize_trajectory, shows_compression, Extent, InfoTrajectory,
    TrajectoryPoint, COMPRESSION_THRESHOLD,
};
