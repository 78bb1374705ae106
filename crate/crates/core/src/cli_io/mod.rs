//! Configuration files, CSV/manifest/plot output and subcommand dispatch.

mod config_file;
mod output;
mod run;

pub use config_file::{parse_config, parse_config_str, parse_config_with};
pub use output::{
    csv_string, emit_csv, emit_plot_script, manifest_string, parse_csv, plot_script_string, write_manifest, CSV_HEADER,
};
pub use run::{execute, load_config, Invocation, Outcome, Subcommand};
