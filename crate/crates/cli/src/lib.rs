//! Library surface of the `plcut` command-line tool: file formats, result
//! documents, subcommand implementations, and parameter sweeps.

pub mod commands;
pub mod experiment;
pub mod io;
pub mod output;
