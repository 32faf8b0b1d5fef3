//! HTTP session service.
//!
//! `POST /sessions` encodes a lattice inside a rest cage once; every
//! `PUT /sessions/{id}/cage` afterwards is a linear combination over the
//! stored field.

pub mod api;
pub mod session;

pub use api::router;
pub use session::{AppState, ServiceConfig, Session, StoredImage};
