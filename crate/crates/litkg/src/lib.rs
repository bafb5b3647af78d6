//! Command-line and HTTP front ends for the litkg engine.

pub mod cli;
pub mod error;
pub mod server;
pub mod store;

/// Current UTC time in the report timestamp format.
pub fn now_stamp() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()
}
