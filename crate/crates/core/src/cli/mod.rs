//! Command-line front end: expression grammar, job files and JSON reports.

mod job;
mod parse;

pub use job::{parse_complex_vector, run_job, write_report, Job, PhiReport, Report, SubtractionBlock};
pub use parse::parse_expression;
