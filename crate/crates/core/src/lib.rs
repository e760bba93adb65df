#![allow(clippy::result_large_err)]

pub mod address;
pub mod diag;
pub mod engine;
pub mod export;
pub mod grammar_file;
pub mod lstag;
pub mod restrict;
pub mod script;
pub mod stag;
pub mod syntax;
pub mod tag;
pub mod tree;
