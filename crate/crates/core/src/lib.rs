//! Repository and analysis toolkit for system-dynamics models.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: domain types for parsed models and the equation language.
//! - [`xmile`]: XMILE parsing, serialization and structural validation.
//! - [`graph`]: causal-graph derivation, feedback-loop enumeration and layout.
//! - [`narrative`]: structured diagrams, controlled natural language and the
//!   co-pilot adapter seam.
//! - [`catalog`]: document store with hybrid keyword/vector search and SDG tagging.
//! - [`ingest`]: the directory-to-snapshot pipeline used by the CLI.
//! - `service` (feature `server`): the HTTP API.

pub mod catalog;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod narrative;
#[cfg(feature = "server")]
pub mod service;
pub mod xmile;

/// 64-bit FNV-1a. Used wherever a stable, platform-independent hash is part
/// of an output contract (embedding buckets, layout seeds).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}
