//! Labeled-CSV ingestion and segment composition.

mod csv_io;
mod recipe;

pub use csv_io::{load_labeled_csv, read_labeled_csv, write_labeled_csv, write_stream_csv};
pub use recipe::{compose_stream, Draw, RecipeFile, SegmentPlan, SegmentRecipe};
