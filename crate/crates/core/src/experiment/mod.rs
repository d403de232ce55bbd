//! Experiment drivers: configuration files, training runs, evaluation and
//! gradient checks. The `qa3c` binary is a thin wrapper around these.

mod baseline;
pub mod config;
pub mod gradcheck;
mod run;

pub use baseline::random_policy_returns;
pub use config::{parse_config, RunConfig};
pub use gradcheck::{
    gradcheck_sweep, rel_error, run_gradcheck, run_gradcheck_with, Deviation, GradcheckOptions, GradcheckReport,
};
pub use run::{run_eval, run_train, EvalReport, EVAL_CSV_HEADER};
