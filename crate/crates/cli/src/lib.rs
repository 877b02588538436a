//! Building blocks of the `hdloc` command-line tool.

pub mod check;
pub mod config;
pub mod data;
pub mod output;
