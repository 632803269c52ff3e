//! Support library behind the `abel` command-line tool: CSV table I/O,
//! plot-data emission, and the error-to-exit-code mapping.

pub mod error;
pub mod plot;
pub mod table;

pub use error::CliError;
