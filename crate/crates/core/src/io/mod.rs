//! Text formats, generators and exporters.

mod export;
mod generators;
mod link_file;

use thiserror::Error;

use crate::knot::KnotError;

pub use export::{export_obj, export_svg, report};
pub use generators::{
    gen_ngon, gen_random_unknot, gen_torus_example, ngon_tube_bound, torus_point, CoordinatePlane,
    TORUS_MAJOR, TORUS_MINOR,
};
pub use link_file::{parse_link, write_link, Component, LinkFile};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("component {component} (line {line}): {source}")]
    Validation {
        component: String,
        line: usize,
        source: KnotError,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
