//! Instance files, error codes and report rendering for the `cyclotile` binary.

pub mod error;
pub mod format;

pub use error::CliError;
pub use format::InstanceFile;

/// Version of the instance file format.
pub const FORMAT_VERSION: u32 = 1;
