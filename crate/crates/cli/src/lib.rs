pub mod commands;
pub mod error;
pub mod problem;
pub mod render;
pub mod report;

pub use commands::{run, Command, Options, Outcome};
pub use error::{CliError, Result};
pub use problem::Problem;
pub use report::{verify_certificates, Report};
