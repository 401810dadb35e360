//! Data ingestion and protocol: schema-driven CSV loading with one-hot
//! encoding, train-statistic min-max normalization, the attack-as-normal
//! split, and synthetic dataset generators.

pub mod encode;
pub mod normalize;
pub mod schema;
pub mod split;
pub mod synth;

pub use encode::{load_csv, load_encoded_csv, write_encoded_csv, EncodedDataset};
pub use normalize::{apply_minmax, fit_minmax, NormStats};
pub use schema::{ColumnKind, SchemaColumn, SchemaSpec};
pub use split::{kddcup_split, SplitSpec};
pub use synth::{synth_generate, SynthKind};
