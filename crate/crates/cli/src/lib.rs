//! Command-line front end: configuration parsing and subcommand execution.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
