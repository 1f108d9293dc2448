//! Text format, fixture generators and DOT export.

pub mod dot;
pub mod format;
pub mod generators;

pub use format::{parse, serialize, FormatError};
