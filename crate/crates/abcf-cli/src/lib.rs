//! Command-line front end: run configuration, command dispatch and SVG output.

pub mod commands;
pub mod config;
pub mod svg;

pub use commands::{dispatch, Outcome};
pub use config::{Command, RunConfig};
pub use svg::{render_svg, SvgError, Window};
