//! Configuration, initial sampling, persistence and the command-line driver.

pub mod commands;
pub mod config;
pub mod io;
pub mod sampling;
