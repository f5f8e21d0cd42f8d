//! Synthetic data, CSV ingestion, configuration files and result writers.

mod config;
mod csvio;
mod output;
mod synth;

pub use config::parse_config;
pub use csvio::{load_csv, write_dataset_csv, LoadOptions};
pub use output::{format_f64, summary_json, write_pips, write_summary, write_trace};
pub use synth::{generate_synthetic, SynthSpec, Truth, BETA_TEMPLATE};
