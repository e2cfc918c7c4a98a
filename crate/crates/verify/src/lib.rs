//! Independent oracles and the acceptance checks run by `tests/acceptance.rs`.

pub mod criteria;
pub mod oracle;
pub mod run;
