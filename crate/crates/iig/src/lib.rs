//! Configuration, file formats, result emission and the `iig` command line
//! on top of `iig-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod emit;
pub mod error;
pub mod formats;
