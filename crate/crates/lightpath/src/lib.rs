//! The std side of the intent-to-design pipeline: data files, the
//! rephrasing gateway, sessions with an event log, the HTTP service, the
//! evaluation harness and the pieces the `lightpath` binary is built from.

pub mod config;
pub mod data;
pub mod gateway;
pub mod pipeline;
pub mod session;
pub mod store;
pub mod manager;
pub mod service;
pub mod eval;
pub mod generator;
