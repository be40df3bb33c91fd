//! Information-centric access-point selection for mobile offloading.
//!
//! A UE is steered to the WiFi AP whose cache already holds the content it
//! is interested in. This crate simulates that decision against random AP
//! selection, models how cache sharing affects item lifetimes with Che's
//! approximation, and provides the profile matching primitives both rest on.

pub mod caching;
pub mod catalogue;
pub mod che;
pub mod cli;
pub mod error;
pub mod matching;
pub mod simulator;

pub use error::{ConfigError, ParseError, RunError};
