//! Stream replay, reporting and generation behind the `ckc` binary.

pub mod gen;
pub mod report;
pub mod run;
pub mod stream;

pub use gen::{generate_stream, GenMode, GenOptions};
pub use report::{AuditReport, OracleReport, StepReport};
pub use run::{run_stream, OracleChoice, RunError, RunOptions, RunSummary};
pub use stream::{MetricKind, Stream, StreamHeader, StreamReader};
