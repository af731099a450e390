//! Scenario files, CSV tables, SVG figures and the `dout` subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod figure;
pub mod scenario_file;
pub mod table;
