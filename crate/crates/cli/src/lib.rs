//! Command-line front end: argument handling, grid file formats and
//! scenario dispatch.

pub mod app;
pub mod formats;
