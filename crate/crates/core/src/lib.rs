//! Analytico-synthetic classification engine.
//!
//! The crate models bibliographic classification schemes (notation,
//! hierarchy, auxiliary facet tables, see-also structure), builds numbers
//! from them, derives word-access indexes, and drives subject search over a
//! classified document collection. Flat-file interchange formats live in
//! [`interchange`].

pub mod error;
pub mod indexes;
pub mod interchange;
pub mod notation;
pub mod render;
pub mod retrieval;
pub mod scheme;
pub mod synthesis;

pub use error::{Error, Result};
pub use notation::{NotationExpr, NotationSyntax};
pub use scheme::{ClassRecord, HierarchyMode, Scheme, SchemeBuilder};
