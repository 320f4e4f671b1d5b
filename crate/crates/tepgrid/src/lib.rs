//! File formats, reports and the command-line front end for
//! [`tepgrid_core`].

#![forbid(unsafe_code)]

pub mod cli;
pub mod exec;
pub mod format;
pub mod report;

pub use cli::run;
pub use exec::Parallel;
pub use format::{
    bundled_case, bundled_network, load_network, load_tep_case, parse_network, parse_tep_case,
};
pub use report::{render, OutputFormat, Payload, ReportDocument};
