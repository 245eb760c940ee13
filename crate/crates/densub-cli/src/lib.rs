//! File formats and run metadata for the `densub` command-line tool.
//!
//! External files are 1-indexed (matrix-market convention); everything in
//! memory is 0-indexed. The translation happens here and only here.

pub mod exit;
pub mod formats;
pub mod manifest;
