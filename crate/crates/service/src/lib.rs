//! Session service for interactive training.
//!
//! [`SessionService`] owns any number of independent engine sessions and is
//! transport-agnostic; [`http::router`] exposes it over HTTP with JSON
//! bodies defined in [`wire`].

pub mod http;
pub mod service;
pub mod wire;

pub use http::{router, serve};
pub use service::{ServiceError, SessionService};
