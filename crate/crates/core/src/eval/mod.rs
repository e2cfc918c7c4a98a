//! Scenario suites, open- and closed-loop evaluation and ablations.

pub mod ablation;
pub mod closed_loop;
pub mod open_loop;
pub mod planners;
pub mod suite;
pub mod svg;

pub use ablation::{run_ablation, AblationRow, AblationTable, Axis};
pub use closed_loop::{closed_loop_eval, run_episode, ClosedLoopConfig, ClosedLoopRecord, ClosedLoopReport, Outcome};
pub use open_loop::{open_loop_eval, OpenLoopConfig, OpenLoopRecord, OpenLoopReport};
pub use planners::{ConstantVelocity, ExpertReplay, Planner, Stationary, StudentPlanner, TeacherPlanner};
pub use suite::{generate_suite, Suite, SuiteConfig, SUITE_SCHEMA_VERSION};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
