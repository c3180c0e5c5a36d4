//! Tabular data model, CSV ingestion, the synthetic generator and the
//! A–D dataset views.

mod csvio;
mod generator;
mod table;
mod variant;

pub use csvio::{load_csv, read_csv, write_csv, write_csv_to};
pub use generator::{
    generate, GeneratorConfig, CLASS_COLUMN, N_CLASSES, REFERENCE_CLASS_SIZES, RESPONSE_COLUMN,
    TRANSFORMED_PREDICTORS,
};
pub use table::Table;
pub use variant::{expand_raw, expand_raw_with, make_variant, make_variant_with, DatasetVariant, ExpandConfig};
