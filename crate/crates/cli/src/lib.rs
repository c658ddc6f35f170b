//! Command line and HTTP session service around the `isneak` search engine.
//!
//! The binary exposes `gen`, `enumerate`, `run`, `bench`, `sweep` and
//! `serve`. The server drives the same pass-1 state machine as the terminal
//! oracle, one suspended search per session.

pub mod cli;
pub mod models;
pub mod server;
pub mod session;

pub use cli::main_with;
