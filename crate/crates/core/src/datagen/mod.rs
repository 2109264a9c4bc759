//! Dataset construction: force-to-1 corruption with exact enumeration, the
//! simple-functions regression suite, a symmetric 12-bit classification set
//! and IDX image ingestion.

mod binary;
mod dataset;
mod force_to_one;
mod idx;
mod simple;

pub use binary::{gen_binary_classification, rotate_row, N_BITS};
pub use dataset::{provenance_path, read_csv, write_csv, LabeledDataset, Labels, Provenance};
pub use force_to_one::{
    apply_synergy_function, enumerate_force_to_one, gen_force_to_one, ForceToOneSample, NoiseSpec, SynergyFunction,
    MAX_ENUMERATED_WIDTH,
};
pub use idx::{
    load_idx, parse_idx_images, parse_idx_labels, write_idx_images, write_idx_labels, IMAGES_MAGIC, LABELS_MAGIC,
    N_DIGIT_CLASSES, TRAIN_IMAGES_FILE, TRAIN_LABELS_FILE,
};
pub use simple::{
    gen_simple_function, rescale_inputs, SimpleFunction, ADDITION_TRAIN_RANGE, DEFAULT_SAMPLES, DEFAULT_TEST_RANGE,
    DEFAULT_TRAIN_RANGE,
};
