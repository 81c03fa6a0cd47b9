//! Checks shared by this crate's tests and the workspace acceptance suite.

#![allow(dead_code)]

pub mod invariants;
pub mod oracle;
