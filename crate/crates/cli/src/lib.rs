//! The `sc` tool: validation, flattened layouts, alignment queries and a
//! read-only HTTP service over merged canvas graphs.

pub mod api;
pub mod cmd;
pub mod layout;
pub mod load;

pub use api::{Api, Response};
pub use layout::{FlattenedLayout, LayerInfo};
