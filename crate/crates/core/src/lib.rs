// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arwa;
pub mod bench;
pub mod cli;
pub mod error;
pub mod graph;
pub mod model;
pub mod operator;
pub mod oracle;
pub mod relevance;
pub mod solve;
pub mod superop;

pub use arwa::{expectation_magnitude, solve, ArwaConfig, ArwaResult, SweepRow};
pub use error::{Error, Result};
pub use graph::{extract_frame, EdgeStyle, Frame, FrameGraph, MergePolicy};
pub use model::{DriveStatus, DriveTerm, LindbladModel, ObservableSpec};
pub use operator::{frobenius_norm, Operator, C64};
pub use oracle::{integrate, long_time_average, OracleConfig, TrajectoryResult};
pub use relevance::{rank, Ranking};
pub use solve::{solve_steady_state, SolverOptions};
pub use superop::{dissipator_superop, liouvillian, Superoperator};
