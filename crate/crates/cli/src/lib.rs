//! Command-line front end for `dfsphere`: runs built-in or custom problems,
//! writes snapshots and convergence tables, and renders images.

pub mod cli;
pub mod commands;
pub mod config;
pub mod expr;
pub mod render;
pub mod snapshot;
