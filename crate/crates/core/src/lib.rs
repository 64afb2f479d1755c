//! Compilation of exactly-one and at-most-one constraint problems into
//! weighted atom-array layouts whose maximum-weight independent sets encode
//! the feasible assignments.
//!
//! The pipeline runs `problems` (encoders) → `model` → `reduce` → `layout`
//! (built from `gadgets`) → `mwis` → `decode`, with `report` producing
//! resource tables.

pub mod decode;
pub mod gadgets;
pub mod layout;
pub mod model;
pub mod mwis;
pub mod problems;
pub mod reduce;
pub mod report;
