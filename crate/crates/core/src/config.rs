//! Run configuration shared by every pipeline stage.

use crate::error::{Error, Result};
use crate::eval::{ClosedLoopConfig, OpenLoopConfig, SuiteConfig};
use crate::learned::{FeatureConfig, RewardTrainConfig};
use crate::policy::{CandidateConfig, Interaction, StudentConfig, TeacherConfig};
use crate::reward::RewardConfig;
use crate::world::WorldConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Which scorer the teacher uses at inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RewardSource {
    #[default]
    Engine,
    Learned,
    /// Uniform random candidate choice.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeacherSection {
    pub n_candidates: usize,
    pub candidates: CandidateConfig,
    pub interaction: Interaction,
    pub reward_source: RewardSource,
    pub query_dim: usize,
}

impl Default for TeacherSection {
    fn default() -> Self {
        let t = TeacherConfig::default();
        Self {
            n_candidates: t.n_candidates,
            candidates: t.candidates,
            interaction: t.interaction,
            reward_source: RewardSource::Engine,
            query_dim: t.query_dim,
        }
    }
}

/// Every knob of a run. Missing fields take their defaults; unknown fields
/// are rejected. `out` and `parallel` do not affect results and are left out
/// of the hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub suite: SuiteConfig,
    /// World-model constants; `dt` and `history` always follow `suite`.
    pub world: WorldConfig,
    pub teacher: TeacherSection,
    pub reward: RewardConfig,
    pub features: FeatureConfig,
    pub reward_training: RewardTrainConfig,
    pub student: StudentConfig,
    pub open_loop: OpenLoopConfig,
    pub closed_loop: ClosedLoopConfig,
    pub out: Option<String>,
    pub parallel: Option<usize>,
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let s = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_json(&s)
    }

    pub fn validate(&self) -> Result<()> {
        self.suite.validate()?;
        self.reward.weights.validate()?;
        let s = &self.suite;
        let c = &self.teacher.candidates;
        if c.steps != s.horizon || self.student.steps != s.horizon {
            return Err(Error::Config(format!(
                "candidate steps {} and student steps {} must equal the horizon {}",
                c.steps, self.student.steps, s.horizon
            )));
        }
        if c.dt != s.dt || self.student.dt != s.dt {
            return Err(Error::Config("candidate and student dt must equal suite dt".into()));
        }
        if self.student.query_dim != self.teacher.query_dim {
            return Err(Error::Config("student and teacher query dims differ".into()));
        }
        if self.teacher.n_candidates < 2 {
            return Err(Error::Config("need at least 2 candidates".into()));
        }
        if self.closed_loop.step_budget > s.step_budget {
            return Err(Error::Config(format!(
                "closed-loop budget {} exceeds the suite's expert budget {}",
                self.closed_loop.step_budget, s.step_budget
            )));
        }
        if self.parallel == Some(0) {
            return Err(Error::Config("parallel must be >= 1".into()));
        }
        Ok(())
    }

    pub fn world_config(&self) -> WorldConfig {
        WorldConfig {
            dt: self.suite.dt,
            history: self.suite.history,
            ..self.world
        }
    }

    pub fn teacher_config(&self) -> TeacherConfig {
        TeacherConfig {
            n_candidates: self.teacher.n_candidates,
            candidates: self.teacher.candidates,
            reward: self.reward,
            interaction: self.teacher.interaction,
            features: self.features,
            query_dim: self.teacher.query_dim,
        }
    }

    pub fn student_config(&self) -> StudentConfig {
        StudentConfig {
            seed: self.seed,
            ..self.student
        }
    }

    pub fn reward_train_config(&self) -> RewardTrainConfig {
        RewardTrainConfig {
            seed: self.seed,
            ..self.reward_training
        }
    }

    /// The configuration with the result-neutral fields cleared.
    pub fn canonical(&self) -> RunConfig {
        RunConfig {
            out: None,
            parallel: None,
            ..self.clone()
        }
    }

    /// SHA-256 of the canonical configuration, as lowercase hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.canonical()).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of a byte string, as lowercase hex.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&s).unwrap(), c);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = RunConfig::from_json(r#"{"seed": 9, "teacher": {"n_candidates": 8}}"#).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.teacher.n_candidates, 8);
        assert_eq!(c.suite, SuiteConfig::default());
    }

    #[test]
    fn unknown_field_rejected() {
        let e = RunConfig::from_json(r#"{"sead": 9}"#).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn hash_ignores_output_settings() {
        let a = RunConfig::default();
        let b = RunConfig {
            out: Some("x".into()),
            parallel: Some(3),
            ..RunConfig::default()
        };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig {
            seed: 1,
            ..RunConfig::default()
        };
        assert_ne!(a.hash(), c.hash());
    }
}
