//! Versioned JSON envelope shared by every subcommand.
//!
//! ```json
//! {
//!   "schema": "projexp/1",
//!   "command": "expm",
//!   "provenance": { "library_version", "command_line", "seed", "samples", "shards" },
//!   "passed": true,
//!   "result": { ... },
//!   "timing": { "wall_seconds": 1.23 }
//! }
//! ```
//!
//! Everything except `timing` is a pure function of the command line.

use serde::Serialize;

pub const SCHEMA: &str = "projexp/1";

#[derive(Debug, Serialize)]
pub struct Provenance {
    pub library_version: &'static str,
    pub command_line: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shards: Option<u32>,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub schema: &'static str,
    pub command: &'static str,
    pub provenance: Provenance,
    pub passed: bool,
    pub result: T,
    pub timing: Timing,
}
